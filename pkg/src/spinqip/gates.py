"""Ideal gate constructors, transition-pulse unitaries and equivalence checks."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (EXACT_TOL, HERMITIAN_TOL, MAX_SPINS, basis_label, expm_hermitian,
                   is_unitary, num_spins, pauli)

KINDS = ("transition_cnot", "transition_toffoli", "rotation", "cnot", "toffoli",
         "fredkin", "raw")


def _projector(k: int, state: int, n: int) -> np.ndarray:
    """Projector onto spin ``k`` being in ``|state>``."""
    sign = 1 if state == 0 else -1
    return (np.eye(2 ** n) + sign * pauli("z", k, n)) / 2


def transition_cnot(control: int, target: int, sense: int = 1, n: int = 3,
                    control_state: int = 1) -> np.ndarray:
    """``exp[i*sense*pi * (sigma_y^target / 2) * P_control]``.

    On the subspace selected by the control this is ``sense * i*sigma_y`` on the
    target; elsewhere it is the identity.
    """
    _check_distinct((control, target), n)
    if sense not in (1, -1):
        raise ValueError(f"sense must be +1 or -1, got {sense}")
    gen = pauli("y", target, n) @ _projector(control, control_state, n) / 2
    return expm_hermitian(gen, sense * np.pi)


def transition_toffoli(controls: tuple[int, ...], target: int, n: int = 3,
                       control_states: tuple[int, ...] | None = None) -> np.ndarray:
    """``exp[-i*pi * (sigma_x^target / 2) * prod P_control]``: ``-i*sigma_x`` on the selected line."""
    controls = tuple(controls)
    _check_distinct(controls + (target,), n)
    states = control_states or (1,) * len(controls)
    if len(states) != len(controls):
        raise ValueError("one control state per control spin is required")
    gen = pauli("x", target, n) / 2
    for c, s in zip(controls, states):
        gen = gen @ _projector(c, s, n)
    return expm_hermitian(gen, -np.pi)


def transition_cnot_32(sense: int = 1) -> np.ndarray:
    return transition_cnot(3, 2, sense, n=3)


def transition_toffoli_123() -> np.ndarray:
    return transition_toffoli((1, 2), 3, n=3)


def fredkin_sequence() -> np.ndarray:
    """Product of the three transition pulses: ``blockdiag(I5, -i*sigma_x, 1)``.

    The pulse applied first is the ``sense=-1`` controlled flip (rightmost factor),
    then the Toffoli-type pulse, then the ``sense=+1`` flip.
    """
    return transition_cnot_32(+1) @ transition_toffoli_123() @ transition_cnot_32(-1)


def rotation(spin: int, axis: str, angle: float, n: int) -> np.ndarray:
    """``R^spin_axis(angle) = exp(-i * angle/2 * sigma_axis)``; R_y(pi/2) takes Iz to Ix."""
    return expm_hermitian(pauli(axis, spin, n), -angle / 2)


def rotation_phase(spin: int, phase_deg: float, angle: float, n: int) -> np.ndarray:
    """Rotation about the transverse axis ``cos(phase) x + sin(phase) y``."""
    phi = np.radians(phase_deg)
    gen = np.cos(phi) * pauli("x", spin, n) + np.sin(phi) * pauli("y", spin, n)
    return expm_hermitian(gen, -angle / 2)


def _permutation_gate(n: int, mapping) -> np.ndarray:
    dim = 2 ** n
    u = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        u[mapping(i), i] = 1
    return u


def _bit(i: int, k: int, n: int) -> int:
    return (i >> (n - k)) & 1


def cnot(control: int, target: int, n: int) -> np.ndarray:
    _check_distinct((control, target), n)
    flip = 1 << (n - target)
    return _permutation_gate(n, lambda i: i ^ flip if _bit(i, control, n) else i)


def toffoli(c1: int, c2: int, target: int, n: int) -> np.ndarray:
    _check_distinct((c1, c2, target), n)
    flip = 1 << (n - target)
    return _permutation_gate(
        n, lambda i: i ^ flip if _bit(i, c1, n) and _bit(i, c2, n) else i)


def fredkin(control: int, t1: int, t2: int, n: int) -> np.ndarray:
    _check_distinct((control, t1, t2), n)

    def swap(i):
        if not _bit(i, control, n) or _bit(i, t1, n) == _bit(i, t2, n):
            return i
        return i ^ (1 << (n - t1)) ^ (1 << (n - t2))

    return _permutation_gate(n, swap)


def _check_distinct(spins, n: int) -> None:
    if not 1 <= n <= MAX_SPINS:
        raise ValueError(f"spin count must be in [1, {MAX_SPINS}], got {n}")
    if len(set(spins)) != len(spins):
        raise ValueError(f"spin indices must be distinct, got {spins}")
    for k in spins:
        if not 1 <= k <= n:
            raise ValueError(f"spin index {k} out of range for {n} spins")


@dataclass(frozen=True)
class GateSpec:
    """Declarative gate description; build the matrix with :func:`ideal_gate`.

    ``spins`` holds controls first, then targets. ``control_states`` defaults to
    conditioning every control on ``|1>``.
    """

    kind: str
    spins: tuple[int, ...]
    n: int = 3
    axis: str | None = None
    angle: float = 0.0
    sense: int = 1
    control_states: tuple[int, ...] | None = None
    matrix: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "spins", tuple(self.spins))
        arity = {"transition_cnot": 2, "transition_toffoli": 3, "rotation": 1, "cnot": 2,
                 "toffoli": 3, "fredkin": 3}
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == "raw":
            if self.matrix is None or num_spins(np.asarray(self.matrix)) != self.n:
                raise ValueError(f"raw gate needs a {2 ** self.n}x{2 ** self.n} matrix")
            return
        if len(self.spins) != arity[self.kind]:
            raise ValueError(f"{self.kind} takes {arity[self.kind]} spin indices")
        _check_distinct(self.spins, self.n)
        if self.kind == "rotation" and self.axis not in ("x", "y", "z"):
            raise ValueError(f"rotation axis must be x, y or z, got {self.axis!r}")
        if self.control_states is not None:
            ncontrols = {"transition_cnot": 1, "transition_toffoli": 2}.get(self.kind)
            if ncontrols is None or len(self.control_states) != ncontrols:
                raise ValueError(f"control_states not valid for {self.kind}")
            if any(s not in (0, 1) for s in self.control_states):
                raise ValueError("control states must be 0 or 1")

    @property
    def controls(self) -> tuple[int, ...]:
        return {"transition_cnot": self.spins[:1], "transition_toffoli": self.spins[:2],
                "cnot": self.spins[:1], "toffoli": self.spins[:2],
                "fredkin": self.spins[:1]}.get(self.kind, ())

    @property
    def targets(self) -> tuple[int, ...]:
        return self.spins[len(self.controls):]

    @property
    def states(self) -> tuple[int, ...]:
        return self.control_states or (1,) * len(self.controls)

    @classmethod
    def rotation_of(cls, spin, axis, angle, n=3):
        return cls("rotation", (spin,), n, axis=axis, angle=angle)

    @classmethod
    def raw_of(cls, matrix):
        matrix = np.asarray(matrix, dtype=complex)
        return cls("raw", (), num_spins(matrix), matrix=matrix)


def ideal_gate(spec: GateSpec) -> np.ndarray:
    n, s = spec.n, spec.spins
    if spec.kind == "transition_cnot":
        return transition_cnot(s[0], s[1], spec.sense, n, spec.states[0])
    if spec.kind == "transition_toffoli":
        return transition_toffoli(s[:2], s[2], n, spec.states)
    if spec.kind == "rotation":
        return rotation(s[0], spec.axis, spec.angle, n)
    if spec.kind == "cnot":
        return cnot(s[0], s[1], n)
    if spec.kind == "toffoli":
        return toffoli(s[0], s[1], s[2], n)
    if spec.kind == "fredkin":
        return fredkin(s[0], s[1], s[2], n)
    return np.array(spec.matrix, dtype=complex)


def fredkin_via_cnot_toffoli() -> np.ndarray:
    """Controlled swap of spins 2, 3 built as CNOT(3->2) . Toffoli(1,2->3) . CNOT(3->2)."""
    c = cnot(3, 2, 3)
    return c @ toffoli(1, 2, 3, 3) @ c


@dataclass(frozen=True)
class EquivalenceReport:
    exact: bool
    global_phase: bool
    monomial_phase: bool
    fidelity: float
    # phase_table[j]: phase picked up by basis state j relative to the reference
    phase_table: tuple[complex, ...] | None

    def phase_deviations(self, tol: float = HERMITIAN_TOL) -> dict[str, complex]:
        """Basis states whose relative phase is not 1."""
        if self.phase_table is None:
            return {}
        n = len(self.phase_table).bit_length() - 1
        return {basis_label(j, n): p for j, p in enumerate(self.phase_table)
                if abs(p - 1) > tol}


def equivalence(u: np.ndarray, v: np.ndarray, tol: float = HERMITIAN_TOL) -> EquivalenceReport:
    """Compare two unitaries exactly, up to a global phase, and up to per-state phases.

    Per-state (monomial-phase) equivalence means ``u^dagger v`` is diagonal with
    unit-modulus entries; then ``v|j> = phase_table[j] * u|j>``.
    """
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    if not (is_unitary(u, tol) and is_unitary(v, tol)):
        raise ValueError("equivalence requires unitary inputs")
    dim = u.shape[0]
    w = u.conj().T @ v
    tr = np.trace(w)
    fidelity = float(min(abs(tr) / dim, 1.0))
    exact = bool(np.max(np.abs(u - v)) <= tol)
    global_phase = False
    if abs(tr) > 0:
        phase = tr / abs(tr)
        global_phase = bool(np.max(np.abs(w - phase * np.eye(dim))) <= tol)

    diag = np.diag(w)
    off = w - np.diag(diag)
    monomial = bool(np.all(np.abs(np.abs(diag) - 1) <= tol) and np.max(np.abs(off)) <= tol)
    table = tuple(complex(p) for p in diag) if monomial else None
    return EquivalenceReport(exact, global_phase or exact, monomial, fidelity, table)


def phase_insensitive_fidelity(u: np.ndarray, target: np.ndarray) -> float:
    """``sum_j |(target^dagger u)_jj| / dim``.

    Equals 1 exactly when ``u`` matches ``target`` up to a phase per basis state,
    so diagonal (z-rotation and frame) phases on either side are ignored.
    """
    if u.shape != target.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {target.shape}")
    w = target.conj().T @ u
    return float(np.abs(np.diag(w)).sum() / u.shape[0])

