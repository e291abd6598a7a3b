import itertools

import numpy as np
import pytest

from oracles import random_density, spin_op
from spinqip.product_operator import (Decomposition, ProductTerm, basis, compose, decompose,
                                      terms_from_pairs)
from spinqip.sequence import equilibrium_state


def brute_operator(axes):
    n = len(axes)
    q = sum(a != "e" for a in axes)
    m = np.eye(2 ** n, dtype=complex)
    for k, a in enumerate(axes, start=1):
        if a != "e":
            m = m @ spin_op(n, k, a)
    return 2 ** (q - 1) * m


def test_basis_sizes_and_order():
    assert [t.label for t in basis(1)] == ["I1x", "I1y", "I1z"]
    assert len(basis(2)) == 15
    b3 = basis(3)
    assert len(b3) == 63
    assert sum(t.q == 3 and t.prefactor == 4 for t in b3) == 27
    assert [t.q for t in b3] == sorted(t.q for t in b3)
    with pytest.raises(ValueError):
        basis(0)


@pytest.mark.parametrize("n", [2, 3])
def test_basis_norms_match_brute_force(n):
    for t in basis(n):
        b = brute_operator(t.axes)
        assert np.max(np.abs(t.operator() - b)) <= 1e-12
        assert abs(np.trace(b @ b) - 2 ** (n - 2)) <= 1e-12
        assert np.max(np.abs(b - b.conj().T)) == 0


def test_pairwise_orthogonality_n3():
    ops = [t.operator() for t in basis(3)]
    for a, b in itertools.combinations(ops, 2):
        assert abs(np.trace(a @ b)) <= 1e-12


@pytest.mark.parametrize("axes,label", [
    (("z", "e", "x"), "2I1zI3x"), (("x", "z", "z"), "4I1xI2zI3z"), (("e", "y", "e"), "I2y")])
def test_label_round_trip(axes, label):
    t = ProductTerm(axes)
    assert t.label == label
    assert ProductTerm.from_label(label, 3).axes == axes


@pytest.mark.parametrize("bad", ["I1xI1z", "I2xI1z", "I1x2", "4I1xI2z", "2I1x", "I4x", "Ix"])
def test_bad_labels(bad):
    with pytest.raises(ValueError):
        ProductTerm.from_label(bad, 3)


def test_decompose_examples():
    d = decompose(equilibrium_state(3, 1.0))
    assert d.identity_part == pytest.approx(1.0, abs=1e-12)
    assert d.as_dict() == pytest.approx({"I1z": 1.0, "I2z": 1.0, "I3z": 1.0}, abs=1e-12)
    empty = decompose(np.eye(8) / 8)
    assert empty.terms == () and empty.identity_part == pytest.approx(1.0)


def test_decompose_matches_trace_projection():
    rho = random_density(np.random.default_rng(7), 8)
    d = decompose(rho, cutoff=0.0)
    for t in d.terms:
        b = brute_operator(t.axes)
        expected = np.trace(b @ rho).real / np.trace(b @ b).real
        assert abs(t.coefficient - expected) <= 1e-12


def test_decompose_rejects_non_hermitian():
    with pytest.raises(ValueError):
        decompose(np.array([[0, 1], [0, 0]], dtype=complex))


def test_round_trip_random():
    rng = np.random.default_rng(3)
    for _ in range(100):
        rho = random_density(rng, 8)
        assert np.max(np.abs(compose(decompose(rho, cutoff=0.0)) - rho)) <= 1e-12


def test_compose_input_state():
    rho = compose({"I1x": 1.0, "I2z": 1.0, "I3x": 1.0}, n=3, identity_part=1.0)
    expected = np.eye(8) / 8 + spin_op(3, 1, "x") + spin_op(3, 2, "z") + spin_op(3, 3, "x")
    assert np.max(np.abs(rho - expected)) <= 1e-12
    with pytest.raises(ValueError):
        compose({"I1x": 1.0})
    with pytest.raises(ValueError):
        compose({"I5x": 1.0}, n=3)


def test_terms_from_pairs_sums_repeats():
    d = terms_from_pairs([("I1x", 0.25), ("I1x", 0.25), ("2I1zI2z", -1)], 2)
    assert d["I1x"] == 0.5 and d["2I1zI2z"] == -1
    assert isinstance(d, Decomposition)
