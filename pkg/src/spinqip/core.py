"""Operator algebra for small systems of coupled spin-1/2 nuclei.

Operators are plain dense ``complex128`` numpy arrays of shape ``(2**n, 2**n)``.

Basis convention: spin 1 is the most significant bit and ``|0>`` is the
``sigma_z = +1`` state, so ``|b1 b2 ... bn>`` sits at index
``sum(b_k << (n - k))``; for three spins ``|b1 b2 b3>`` is ``4*b1 + 2*b2 + b3``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Mapping, Sequence

import numpy as np

MAX_SPINS = 10

# tolerance ladder
EXACT_TOL = 1e-12
HERMITIAN_TOL = 1e-10

SIGMA = {
    "e": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _check_spin(k: int, n: int) -> None:
    if not 1 <= n <= MAX_SPINS:
        raise ValueError(f"spin count must be in [1, {MAX_SPINS}], got {n}")
    if not 1 <= k <= n:
        raise ValueError(f"spin index {k} out of range for {n} spins")


def embed(single: np.ndarray, k: int, n: int) -> np.ndarray:
    """Place a 2x2 matrix on spin ``k`` of an ``n``-spin register."""
    _check_spin(k, n)
    left = np.eye(2 ** (k - 1), dtype=complex)
    right = np.eye(2 ** (n - k), dtype=complex)
    return np.kron(np.kron(left, single), right)


def pauli(axis: str, k: int, n: int) -> np.ndarray:
    """Pauli matrix ``sigma_axis`` acting on spin ``k`` (1-based) of ``n`` spins."""
    if axis not in ("x", "y", "z"):
        raise ValueError(f"axis must be one of x, y, z, got {axis!r}")
    return embed(SIGMA[axis], k, n)


def angular_momentum(axis: str, k: int, n: int) -> np.ndarray:
    """Spin angular momentum ``I^k_axis = sigma^k_axis / 2``."""
    return pauli(axis, k, n) / 2


def pauli_string(axes: Sequence[str]) -> np.ndarray:
    """Kronecker product of single-spin Paulis, one per spin; ``'e'`` is identity."""
    return reduce(np.kron, [SIGMA[a] for a in axes])


def total_z(n: int) -> np.ndarray:
    """Sum of ``I^k_z`` over all spins, returned as a dense diagonal matrix."""
    return np.diag(total_z_diagonal(n)).astype(complex)


def total_z_diagonal(n: int) -> np.ndarray:
    idx = np.arange(2 ** n)
    bits = (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    return (0.5 - bits).sum(axis=1)


def spin_bits(index: int, n: int) -> tuple[int, ...]:
    """Bits ``(b1, ..., bn)`` of a computational basis index."""
    return tuple((index >> (n - k)) & 1 for k in range(1, n + 1))


def basis_label(index: int, n: int) -> str:
    return "|" + "".join(str(b) for b in spin_bits(index, n)) + ">"


def num_spins(op: np.ndarray) -> int:
    dim = op.shape[0]
    if op.ndim != 2 or op.shape[1] != dim or dim < 2 or dim & (dim - 1):
        raise ValueError(f"expected a square 2^n x 2^n matrix, got shape {op.shape}")
    return dim.bit_length() - 1


def is_hermitian(op: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(op - op.conj().T), initial=0.0) <= tol)


def is_unitary(op: np.ndarray, tol: float = EXACT_TOL) -> bool:
    eye = np.eye(op.shape[0])
    return bool(np.max(np.abs(op.conj().T @ op - eye), initial=0.0) <= tol)


def trace_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product ``Tr(a^dagger b)``."""
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def expm_hermitian(h: np.ndarray, scale: float) -> np.ndarray:
    """Return ``exp(i * scale * h)`` for Hermitian ``h`` via eigendecomposition."""
    if not is_hermitian(h):
        raise ValueError("generator is not Hermitian")
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    return (v * np.exp(1j * scale * w)) @ v.conj().T


def expm_projector(h: np.ndarray, scale: float) -> np.ndarray:
    """Closed-form ``exp(i * scale * h)`` when ``h @ h`` is a projector.

    Uses ``exp(i a h) = 1 - P + cos(a) P + i sin(a) h`` with ``P = h @ h``.
    Transition-pulse generators (half a Pauli times control projectors, times two)
    have this form.
    """
    if not is_hermitian(h):
        raise ValueError("generator is not Hermitian")
    p = h @ h
    if np.max(np.abs(p @ p - p)) > HERMITIAN_TOL:
        raise ValueError("generator squared is not a projector")
    eye = np.eye(h.shape[0], dtype=complex)
    return eye - p + np.cos(scale) * p + 1j * np.sin(scale) * h


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpinSystem:
    """Chemical-shift offsets (Hz) and a signed, symmetric J matrix (Hz).

    Offsets are relative to ``reference_mhz`` when that is given. The sign of
    every coupling is kept as supplied.
    """

    offsets: tuple[float, ...]
    j: np.ndarray
    labels: tuple[str, ...] = ()
    reference_mhz: float | None = None
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        offsets = tuple(float(v) for v in self.offsets)
        n = len(offsets)
        if not 1 <= n <= MAX_SPINS:
            raise ValueError(f"spin count must be in [1, {MAX_SPINS}], got {n}")
        if not all(np.isfinite(offsets)):
            raise ValueError("offsets must be finite")
        j = np.array(self.j, dtype=float).reshape(n, n) if n > 0 else np.zeros((0, 0))
        if not np.all(np.isfinite(j)):
            raise ValueError("couplings must be finite")
        if np.any(np.diag(j) != 0):
            raise ValueError("J matrix must have a zero diagonal")
        if not np.array_equal(j, j.T):
            raise ValueError("J matrix must be symmetric")
        labels = tuple(self.labels) or tuple(f"S{k}" for k in range(1, n + 1))
        if len(labels) != n:
            raise ValueError(f"{len(labels)} labels given for {n} spins")
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "j", _readonly(j))
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_couplings(cls, offsets, couplings: Mapping[tuple[int, int], float] = None,
                       **kwargs) -> "SpinSystem":
        """Build from 1-based ``{(k, l): J_kl}`` pairs; missing pairs are uncoupled."""
        n = len(offsets)
        j = np.zeros((n, n))
        for (k, l), value in (couplings or {}).items():
            if k == l:
                raise ValueError(f"self-coupling ({k}, {l}) is not allowed")
            _check_spin(k, n)
            _check_spin(l, n)
            j[k - 1, l - 1] = j[l - 1, k - 1] = value
        return cls(tuple(offsets), j, **kwargs)

    @property
    def n(self) -> int:
        return len(self.offsets)

    @property
    def dim(self) -> int:
        return 2 ** self.n

    def coupling(self, k: int, l: int) -> float:
        return float(self.j[k - 1, l - 1])

    def hamiltonian(self, frame: float = 0.0, mode: str = "weak") -> np.ndarray:
        """Internal Hamiltonian ``H/h`` in Hz, in a frame rotating at ``frame`` Hz.

        ``weak`` keeps only ``J I_z I_z`` couplings; ``full`` uses the isotropic
        ``J I.I`` form.
        """
        if mode not in ("weak", "full"):
            raise ValueError(f"unknown Hamiltonian mode {mode!r}")
        n = self.n
        if mode == "weak":
            return np.diag(self.weak_diagonal(frame)).astype(complex)
        h = sum((nu - frame) * angular_momentum("z", k, n)
                for k, nu in enumerate(self.offsets, start=1))
        for k in range(1, n + 1):
            for l in range(k + 1, n + 1):
                jkl = self.j[k - 1, l - 1]
                if jkl:
                    for a in "xyz":
                        h = h + jkl * angular_momentum(a, k, n) @ angular_momentum(a, l, n)
        return np.asarray(h, dtype=complex)

    def weak_diagonal(self, frame: float = 0.0) -> np.ndarray:
        """Diagonal of the weak-coupling Hamiltonian (Hz) in the computational basis."""
        n = self.n
        idx = np.arange(2 ** n)
        m = 0.5 - ((idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1)
        nu = np.asarray(self.offsets) - frame
        return m @ nu + 0.5 * np.einsum("ik,kl,il->i", m, self.j, m)
