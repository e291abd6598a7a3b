"""Product-operator basis: terms such as ``4I1xI2zI3z``.

A term with ``q`` non-identity factors is ``2**(q-1) * prod_k I^k_axis``. For ``n``
spins these elements are mutually trace-orthogonal and each has squared norm
``2**(n-2)``. The identity is carried separately as ``identity_part * I / 2**n``,
so ``identity_part`` equals the trace of the density matrix.

Decomposition and recomposition go through a per-spin Pauli transform over the
``(4,)*n`` coefficient tensor, never through explicit basis matrices.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .core import EXACT_TOL, MAX_SPINS, SIGMA, angular_momentum, is_hermitian, num_spins

AXIS_ORDER = "exyz"
_LABEL_RE = re.compile(r"^(\d+)?((?:I\d+[xyz])+)$")
_FACTOR_RE = re.compile(r"I(\d+)([xyz])")

# rows: e, x, y, z; _FORWARD[a, 2*r + c] = sigma_a[c, r] so that sum gives Tr(sigma rho)
_SIGMA_STACK = np.stack([SIGMA[a] for a in AXIS_ORDER])
_FORWARD = np.transpose(_SIGMA_STACK, (0, 2, 1)).reshape(4, 4)
_INVERSE = _SIGMA_STACK.reshape(4, 4).T


@dataclass(frozen=True)
class ProductTerm:
    axes: tuple[str, ...]
    coefficient: float = 1.0

    def __post_init__(self):
        axes = tuple(self.axes)
        if not axes or any(a not in AXIS_ORDER for a in axes):
            raise ValueError(f"invalid axes {self.axes!r}")
        if all(a == "e" for a in axes):
            raise ValueError("the identity is not a product term; use identity_part")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "coefficient", float(self.coefficient))

    @property
    def n(self) -> int:
        return len(self.axes)

    @property
    def q(self) -> int:
        return sum(a != "e" for a in self.axes)

    @property
    def prefactor(self) -> int:
        return 2 ** (self.q - 1)

    @property
    def spins(self) -> tuple[int, ...]:
        return tuple(k for k, a in enumerate(self.axes, start=1) if a != "e")

    @property
    def label(self) -> str:
        body = "".join(f"I{k}{a}" for k, a in enumerate(self.axes, start=1) if a != "e")
        return body if self.q == 1 else f"{self.prefactor}{body}"

    def sort_key(self):
        return (self.q, self.spins, tuple(AXIS_ORDER.index(a) for a in self.axes if a != "e"))

    def operator(self) -> np.ndarray:
        """The basis element itself, without the coefficient."""
        n = self.n
        op = np.eye(2 ** n, dtype=complex)
        for k, a in enumerate(self.axes, start=1):
            if a != "e":
                op = op @ angular_momentum(a, k, n)
        return self.prefactor * op

    def with_coefficient(self, value: float) -> "ProductTerm":
        return ProductTerm(self.axes, value)

    @classmethod
    def from_label(cls, label: str, n: int, coefficient: float = 1.0) -> "ProductTerm":
        m = _LABEL_RE.match(label.strip())
        if not m:
            raise ValueError(f"malformed product-operator label {label!r}")
        factors = [(int(k), a) for k, a in _FACTOR_RE.findall(m.group(2))]
        spins = [k for k, _ in factors]
        if spins != sorted(set(spins)):
            raise ValueError(f"spin indices must be strictly increasing in {label!r}")
        if spins[0] < 1 or spins[-1] > n:
            raise ValueError(f"label {label!r} references a spin outside 1..{n}")
        axes = ["e"] * n
        for k, a in factors:
            axes[k - 1] = a
        term = cls(tuple(axes), coefficient)
        expected = None if term.q == 1 else str(term.prefactor)
        if m.group(1) != expected:
            raise ValueError(f"label {label!r} needs prefactor {expected or 'none'}")
        return term


def basis(n: int) -> list[ProductTerm]:
    """All ``4**n - 1`` non-identity product terms in canonical order."""
    if not 1 <= n <= MAX_SPINS:
        raise ValueError(f"spin count must be in [1, {MAX_SPINS}], got {n}")
    terms = [ProductTerm(axes) for axes in itertools.product(AXIS_ORDER, repeat=n)
             if any(a != "e" for a in axes)]
    return sorted(terms, key=ProductTerm.sort_key)


@dataclass(frozen=True)
class Decomposition:
    n: int
    identity_part: float
    terms: tuple[ProductTerm, ...]

    def as_dict(self) -> dict[str, float]:
        return {t.label: t.coefficient for t in self.terms}

    def __getitem__(self, label: str) -> float:
        return self.as_dict().get(label, 0.0)

    @classmethod
    def from_dict(cls, coefficients: Mapping[str, float], n: int,
                  identity_part: float = 1.0) -> "Decomposition":
        terms = [ProductTerm.from_label(lbl, n, c) for lbl, c in coefficients.items()]
        return cls(n, float(identity_part), tuple(sorted(terms, key=ProductTerm.sort_key)))


def _apply_per_spin(t: np.ndarray, m: np.ndarray) -> np.ndarray:
    for k in range(t.ndim):
        t = np.moveaxis(np.tensordot(m, t, axes=([1], [k])), 0, k)
    return t


def pauli_coefficients(rho: np.ndarray) -> np.ndarray:
    """Tensor ``t[a1, ..., an] = Tr(sigma_a1 x ... x sigma_an @ rho)``, axes ordered e,x,y,z."""
    n = num_spins(rho)
    t = rho.reshape((2,) * (2 * n))
    order = [ax for k in range(n) for ax in (k, n + k)]
    t = t.transpose(order).reshape((4,) * n)
    return _apply_per_spin(t, _FORWARD)


def from_pauli_coefficients(t: np.ndarray) -> np.ndarray:
    n = t.ndim
    rho = _apply_per_spin(np.asarray(t, dtype=complex), _INVERSE) / 2 ** n
    rho = rho.reshape((2,) * (2 * n))
    order = [2 * k for k in range(n)] + [2 * k + 1 for k in range(n)]
    return rho.transpose(order).reshape(2 ** n, 2 ** n)


def decompose(rho: np.ndarray, cutoff: float = EXACT_TOL) -> Decomposition:
    """Expand a Hermitian matrix over the product-operator basis.

    Coefficients with magnitude below ``cutoff`` are dropped.
    """
    n = num_spins(rho)
    if not is_hermitian(rho):
        raise ValueError("density matrix is not Hermitian")
    t = pauli_coefficients(rho).real
    identity_part = float(t[(0,) * n])
    # basis element = 2**(q-1) prod(sigma/2) = sigma_string / 2, norm 2**(n-2)
    coeff = t / 2 ** (n - 1)
    terms = []
    for index in zip(*np.nonzero(np.abs(coeff) >= cutoff)):
        if any(index):
            axes = tuple(AXIS_ORDER[i] for i in index)
            terms.append(ProductTerm(axes, float(coeff[index])))
    terms.sort(key=ProductTerm.sort_key)
    return Decomposition(n, identity_part, tuple(terms))


def compose(d: Decomposition | Mapping[str, float], n: int | None = None,
            identity_part: float | None = None) -> np.ndarray:
    """Inverse of :func:`decompose`.

    Accepts a :class:`Decomposition` or a ``{label: coefficient}`` mapping, in which
    case ``n`` is required and ``identity_part`` defaults to 1.
    """
    if not isinstance(d, Decomposition):
        if n is None:
            raise ValueError("n is required when composing from labels")
        d = Decomposition.from_dict(d, n, 1.0 if identity_part is None else identity_part)
    elif n is not None and n != d.n:
        raise ValueError(f"decomposition has {d.n} spins, not {n}")
    t = np.zeros((4,) * d.n)
    t[(0,) * d.n] = d.identity_part
    for term in d.terms:
        if term.n != d.n:
            raise ValueError(f"term {term.label} has {term.n} spins, expected {d.n}")
        t[tuple(AXIS_ORDER.index(a) for a in term.axes)] += term.coefficient * 2 ** (d.n - 1)
    return from_pauli_coefficients(t)


def terms_from_pairs(pairs: Iterable[tuple[str, float]], n: int,
                     identity_part: float = 1.0) -> Decomposition:
    """Build a decomposition from ``(label, coefficient)`` pairs, summing repeats."""
    acc: dict[str, float] = {}
    for label, value in pairs:
        key = ProductTerm.from_label(label, n).label
        acc[key] = acc.get(key, 0.0) + value
    return Decomposition.from_dict(acc, n, identity_part)
