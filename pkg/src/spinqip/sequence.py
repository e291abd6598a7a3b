"""Pulse sequences acting on density matrices.

All events of a :class:`Sequence` are composed in one common rotating frame at
``Sequence.frame`` Hz. A square soft pulse is exact in its own carrier frame
(constant Hamiltonian, a single exponential) and is carried into the common frame
by z-rotations evaluated at the accumulated sequence time, which keeps the RF phase
continuous across carrier switches. Counter-rotating terms are neglected.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence as Seq, Union

import numpy as np

from . import _kernels
from .core import (HERMITIAN_TOL, SpinSystem, angular_momentum, expm_hermitian, is_unitary,
                   total_z_diagonal)
from .gates import GateSpec, fredkin_sequence, ideal_gate, phase_insensitive_fidelity, rotation
from .spectrometer import transitions

PULSE_LENGTH = 66.56e-3


@dataclass(frozen=True)
class Ideal:
    gate: GateSpec


@dataclass(frozen=True)
class SoftPulse:
    """Square pulse. ``amplitude`` is the nutation frequency in Hz; ``None`` means
    ``1/(2*duration)``, a pi nutation on resonance."""

    carrier: float
    amplitude: float | None
    phase: float  # degrees
    duration: float
    ideal: GateSpec | None = None  # what the pulse is meant to implement
    label: str = ""

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("pulse duration must be non-negative")
        if self.amplitude is not None and self.amplitude < 0:
            raise ValueError("pulse amplitude must be non-negative")

    @property
    def nutation(self) -> float:
        if self.amplitude is not None:
            return self.amplitude
        if self.duration == 0:
            return 0.0
        return 1.0 / (2.0 * self.duration)


@dataclass(frozen=True)
class Delay:
    duration: float

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("delay must be non-negative")


PulseEvent = Union[Ideal, SoftPulse, Delay]


@dataclass(frozen=True)
class Sequence:
    system: SpinSystem
    events: tuple[PulseEvent, ...] = ()
    frame: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        for ev in self.events:
            gate = ev.gate if isinstance(ev, Ideal) else getattr(ev, "ideal", None)
            if gate is not None and gate.n != self.system.n:
                raise ValueError(f"gate for {gate.n} spins in a {self.system.n}-spin sequence")


def equilibrium_state(n: int, epsilon: float = 1.0) -> np.ndarray:
    """``I/2**n + epsilon * sum_k I^k_z``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rho = np.eye(2 ** n, dtype=complex) / 2 ** n
    return rho + epsilon * sum(angular_momentum("z", k, n) for k in range(1, n + 1))


def prepare_input(epsilon: float = 1.0) -> np.ndarray:
    """Three-spin equilibrium state after ideal R_y(pi/2) on spins 1 and 3.

    Equals ``I/8 + epsilon * (I1x + I2z + I3x)``.
    """
    u = rotation(3, "y", np.pi / 2, 3) @ rotation(1, "y", np.pi / 2, 3)
    return apply_unitary(equilibrium_state(3, epsilon), u)


def apply_unitary(rho: np.ndarray, u: np.ndarray) -> np.ndarray:
    if rho.shape != u.shape:
        raise ValueError(f"dimension mismatch: rho {rho.shape} vs U {u.shape}")
    if not is_unitary(u, HERMITIAN_TOL):
        raise ValueError("propagator is not unitary")
    return u @ rho @ u.conj().T


def _frame_rotation(n: int, rate: float, t: float) -> np.ndarray:
    """Diagonal of ``exp(-2i*pi*rate*t * sum Iz)``."""
    return np.exp(-2j * np.pi * rate * t * total_z_diagonal(n))


def soft_pulse_unitary(system: SpinSystem, pulse: SoftPulse, frame: float = 0.0,
                       start: float = 0.0, b1_scale: float = 1.0) -> np.ndarray:
    """Propagator of a square pulse in the common frame rotating at ``frame`` Hz.

    In the carrier frame ``H = sum (nu_k - carrier) Iz_k + sum J_kl Iz_k Iz_l
    + b1_scale * amp * sum (cos(phase) Ix_k + sin(phase) Iy_k)``, constant over
    the pulse. ``start`` is the sequence time at which the pulse begins.
    """
    n = system.n
    phi = np.radians(pulse.phase)
    amp = b1_scale * pulse.nutation
    h = system.hamiltonian(pulse.carrier, "weak")
    for k in range(1, n + 1):
        h = h + amp * (np.cos(phi) * angular_momentum("x", k, n)
                       + np.sin(phi) * angular_momentum("y", k, n))
    u_carrier = expm_hermitian(h, -2 * np.pi * pulse.duration)
    rate = pulse.carrier - frame
    q_end = _frame_rotation(n, rate, start + pulse.duration)
    q_start = _frame_rotation(n, rate, start)
    return q_end[:, None] * u_carrier * q_start.conj()[None, :]


def soft_pulse_unitary_sliced(system: SpinSystem, pulse: SoftPulse, frame: float = 0.0,
                              start: float = 0.0, b1_scale: float = 1.0,
                              steps: int = 20000) -> np.ndarray:
    """Same propagator, integrated directly in the common frame by time slicing.

    There the drive phase advances at ``carrier - frame``; each slice is a Strang
    split of the diagonal internal Hamiltonian and the drive. Second order in the
    slice length, so it is a cross-check rather than the production path.
    """
    diag = system.weak_diagonal(frame)
    return _kernels.sliced_drive(
        np.ascontiguousarray(diag, dtype=np.float64), float(b1_scale * pulse.nutation),
        float(np.radians(pulse.phase)), float(pulse.carrier - frame), float(start),
        float(pulse.duration), int(steps), system.n)


def delay_unitary(system: SpinSystem, duration: float, frame: float = 0.0) -> np.ndarray:
    return np.diag(np.exp(-2j * np.pi * duration * system.weak_diagonal(frame)))


class SequenceResult(NamedTuple):
    rho: np.ndarray | None
    unitary: np.ndarray
    elapsed: float


def event_unitaries(seq: Sequence, model: str = "ideal", b1_scale: float = 1.0):
    """Yield ``(event, propagator)`` in application order."""
    if model not in ("ideal", "soft"):
        raise ValueError(f"unknown model {model!r}")
    t = 0.0
    for ev in seq.events:
        if isinstance(ev, Ideal):
            u = ideal_gate(ev.gate)
        elif isinstance(ev, Delay):
            u = delay_unitary(seq.system, ev.duration, seq.frame)
            t += ev.duration
        elif model == "soft":
            u = soft_pulse_unitary(seq.system, ev, seq.frame, t, b1_scale)
            t += ev.duration
        elif ev.ideal is None:
            raise ValueError("soft pulse has no ideal counterpart; run it with model='soft'")
        else:
            u = ideal_gate(ev.ideal)
        yield ev, u


def run_sequence(seq: Sequence, rho0: np.ndarray | None = None, model: str = "ideal",
                 b1_scale: float = 1.0) -> SequenceResult:
    """Apply the events left to right; return final state, total propagator, elapsed time.

    Ideal events are instantaneous. Delays evolve under the weak-coupling internal
    Hamiltonian in the common frame. Soft pulses are simulated for ``model='soft'``;
    for ``model='ideal'`` they are replaced by their declared ideal gate.
    """
    dim = seq.system.dim
    if rho0 is not None and rho0.shape != (dim, dim):
        raise ValueError(f"initial state has shape {rho0.shape}, expected {(dim, dim)}")
    total = np.eye(dim, dtype=complex)
    elapsed = 0.0
    for ev, u in event_unitaries(seq, model, b1_scale):
        total = u @ total
        if isinstance(ev, Delay) or (model == "soft" and isinstance(ev, SoftPulse)):
            elapsed += ev.duration
    rho = None if rho0 is None else apply_unitary(rho0, total)
    return SequenceResult(rho, total, elapsed)


@dataclass(frozen=True)
class PulsePlan:
    target_spin: int
    target_lines: tuple[float, ...]
    carrier: float  # centre of the target lines
    spread: float
    required_selectivity: float  # smallest gap from a target line to any other line
    single_pulse_feasible: bool
    resolution: float
    pulses: tuple[float, ...] = field(default=())  # carriers, one per pulse needed

    @property
    def pulse_count(self) -> int:
        return len(self.pulses)


def plan_transition_pulse(system: SpinSystem, gate: GateSpec,
                          resolution: float = 0.5) -> PulsePlan:
    """Lines a transition-selective gate must invert, and whether one pulse covers them.

    A single pulse is judged feasible when the target lines spread by no more than
    ``resolution`` and every other line lies farther than ``spread + resolution``
    from the nearest target line. Otherwise one single-line pulse per target line
    is planned.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    if gate.kind not in ("transition_cnot", "transition_toffoli"):
        raise ValueError(f"{gate.kind} is not a transition-selective gate")
    if gate.n != system.n:
        raise ValueError(f"gate is for {gate.n} spins, system has {system.n}")
    target = gate.targets[0]
    wanted = dict(zip(gate.controls, gate.states))
    others = [l for l in range(1, system.n + 1) if l != target]
    targets, rest = [], []
    for line in transitions(system):
        spectators = dict(zip(others, line.spectator_states))
        hit = line.flipping_spin == target and all(
            spectators[c] == s for c, s in wanted.items())
        (targets if hit else rest).append(line.freq)
    targets.sort()
    spread = targets[-1] - targets[0]
    gap = min((abs(f - g) for f in targets for g in rest), default=np.inf)
    feasible = spread <= resolution and gap > spread + resolution
    carrier = (targets[0] + targets[-1]) / 2
    pulses = (carrier,) if feasible else tuple(targets)
    return PulsePlan(target, tuple(targets), carrier, spread, float(gap), bool(feasible),
                     resolution, pulses)


def fredkin_pulse_sequence(system: SpinSystem, phases: Seq[float] = (0.0, 90.0, 180.0),
                           interval: float = 0.0, duration: float = PULSE_LENGTH,
                           frame: float = 0.0) -> Sequence:
    """Three square transition pulses with ``interval`` of free evolution around the middle one.

    Carriers are the centres of the lines each pulse must invert. The outer pulses
    implement opposite-sense controlled flips when their phases differ by 180
    degrees and the same flip otherwise.
    """
    if system.n != 3:
        raise ValueError("the three-pulse controlled swap needs a 3-spin system")
    p1, p2, p3 = phases
    flip_first = GateSpec("transition_cnot", (3, 2), 3, sense=-1)
    flip_last = GateSpec("transition_cnot", (3, 2), 3,
                         sense=1 if (p3 - p1) % 360 == 180 else -1)
    tof = GateSpec("transition_toffoli", (1, 2, 3), 3)
    c_flip = plan_transition_pulse(system, flip_first).carrier
    c_tof = plan_transition_pulse(system, tof).carrier
    events: list[PulseEvent] = [SoftPulse(c_flip, None, p1, duration, flip_first, "TP1")]
    if interval:
        events.append(Delay(interval))
    events.append(SoftPulse(c_tof, None, p2, duration, tof, "TP2"))
    if interval:
        events.append(Delay(interval))
    events.append(SoftPulse(c_flip, None, p3, duration, flip_last, "TP3"))
    return Sequence(system, tuple(events), frame)


class PhaseCancellation(NamedTuple):
    fid_inverted: float
    fid_same: float


def phase_cancellation_experiment(system: SpinSystem, shift_interval: float,
                                  model: str = "soft", duration: float = PULSE_LENGTH,
                                  b1_scale: float = 1.0) -> PhaseCancellation:
    """Outer-pulse phases (0, 90, 180) versus (0, 90, 0), with ``shift_interval``
    seconds of free evolution before and after the middle pulse.

    Each total propagator is scored with :func:`phase_insensitive_fidelity` against
    the ideal three-pulse product.
    """
    if shift_interval < 0:
        raise ValueError("shift_interval must be non-negative")
    target = fredkin_sequence()
    scores = []
    for phases in ((0.0, 90.0, 180.0), (0.0, 90.0, 0.0)):
        seq = fredkin_pulse_sequence(system, phases, shift_interval, duration)
        u = run_sequence(seq, model=model, b1_scale=b1_scale).unitary
        scores.append(phase_insensitive_fidelity(u, target))
    return PhaseCancellation(*scores)

