"""Spectrum synthesis: Hamiltonians, line templates, FID, DFT, peak picking.

Detection uses ``I^k_- = I^k_x - i I^k_y``. A single-quantum coherence precessing
at ``+nu`` therefore gives a signal ``exp(-2i*pi*nu*t)``, and :func:`spectrum`
transforms with the ``exp(+2i*pi*f*t)`` kernel so the line appears at ``+nu``.
With that convention an ``I_x`` coherence gives an absorptive line with phase 0
and an ``I_y`` coherence gives phase -90 degrees.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .core import SpinSystem, angular_momentum, is_hermitian, num_spins
from .gates import rotation_phase


@dataclass(frozen=True)
class Hamiltonian:
    operator: np.ndarray  # H/h in Hz
    mode: str = "weak"
    frame: float = 0.0


def hamiltonian(system: SpinSystem, mode: str = "weak", frame: float = 0.0) -> Hamiltonian:
    """``sum nu_k Iz_k + sum_{k<l} J_kl Iz_k Iz_l`` (weak) or with ``J I_k.I_l`` (full)."""
    return Hamiltonian(system.hamiltonian(frame, mode), mode, frame)


@dataclass(frozen=True)
class SpectrumLine:
    freq: float
    amplitude: complex = 1.0
    phase_deg: float = 0.0
    flipping_spin: int | None = None
    # bits of the other spins in spin order, e.g. (0, 1) for spin 1 with |.01>
    spectator_states: tuple[int, ...] = ()
    ambiguous: bool = False

    @property
    def spectators(self) -> str:
        if self.ambiguous:
            return "ambiguous"
        return "".join(str(b) for b in self.spectator_states)


def transitions(system: SpinSystem) -> list[SpectrumLine]:
    """All ``n * 2**(n-1)`` weak-coupling single-quantum lines, unit amplitude.

    The spin-k line with spectators in states ``s`` sits at
    ``nu_k + sum_l J_kl m_l`` with ``m_l = +1/2`` for ``|0>`` and ``-1/2`` for ``|1>``.
    """
    n = system.n
    lines = []
    for k in range(1, n + 1):
        others = [l for l in range(1, n + 1) if l != k]
        for pattern in range(2 ** (n - 1)):
            bits = tuple((pattern >> (n - 2 - i)) & 1 for i in range(n - 1))
            freq = system.offsets[k - 1] + sum(
                system.coupling(k, l) * (0.5 - b) for l, b in zip(others, bits))
            lines.append(SpectrumLine(freq, 1.0, 0.0, k, bits))
    return lines


def line_amplitudes(rho: np.ndarray, system: SpinSystem,
                    observe: Sequence[int] | None = None) -> list[SpectrumLine]:
    """Complex amplitude ``rho_ab * (I_-)_ba`` of every weak-coupling line.

    This is the t=0 weight of each line in :func:`fid`, read off the density
    matrix directly, so it carries no leakage or broadening.
    """
    n = system.n
    if rho.shape != (system.dim, system.dim):
        raise ValueError(f"rho has shape {rho.shape}, expected {(system.dim, system.dim)}")
    out = []
    for line in transitions(system):
        k = line.flipping_spin
        if observe is not None and k not in observe:
            continue
        others = [l for l in range(1, n + 1) if l != k]
        a = sum(b << (n - l) for l, b in zip(others, line.spectator_states))
        b = a | (1 << (n - k))  # same state with spin k in |1>
        amp = complex(rho[a, b])  # (I_-)_{b,a} = 1 is the only nonzero factor
        phase = math.degrees(math.atan2(amp.imag, amp.real)) if abs(amp) > 0 else 0.0
        out.append(SpectrumLine(line.freq, amp, phase, k, line.spectator_states))
    return out


@dataclass(frozen=True)
class FidParams:
    dwell: float
    points: int = 8192
    line_broadening: float = 0.2
    observe: tuple[int, ...] = (1,)
    # receiver reference (Hz); spectrum frequencies are reported on the absolute axis
    frame: float = 0.0

    def __post_init__(self):
        if not self.dwell > 0:
            raise ValueError("dwell must be positive")
        if self.points < 256 or self.points & (self.points - 1):
            raise ValueError("points must be a power of two >= 256")
        if self.line_broadening < 0:
            raise ValueError("line broadening must be non-negative")
        object.__setattr__(self, "observe", tuple(self.observe))


def default_fid_params(system: SpinSystem, observe: Sequence[int], points: int = 8192,
                       line_broadening: float = 0.2, margin: float = 0.2) -> FidParams:
    """Receiver centred on the observed lines, spectral width covering them with margin."""
    observe = tuple(observe)
    freqs = [ln.freq for ln in transitions(system) if ln.flipping_spin in observe]
    lo, hi = min(freqs), max(freqs)
    center = (lo + hi) / 2
    half_width = max((hi - lo) / 2, 5.0)
    sw = 2 * half_width * (1 + margin)
    return FidParams(1.0 / sw, points, line_broadening, observe, center)


def detection_operator(observe: Sequence[int], n: int) -> np.ndarray:
    return sum(angular_momentum("x", k, n) - 1j * angular_momentum("y", k, n)
               for k in observe)


def fid(rho: np.ndarray, h: Hamiltonian, params: FidParams) -> np.ndarray:
    """``s(t_j) = Tr[rho(t_j) I_-] * exp(-pi*LB*t_j)`` with ``t_j = j * dwell``.

    Frequencies are measured relative to ``params.frame``.
    """
    n = num_spins(rho)
    if h.operator.shape != rho.shape:
        raise ValueError(f"dimension mismatch: rho {rho.shape} vs H {h.operator.shape}")
    detect = detection_operator(params.observe, n)
    op = h.operator
    shift = params.frame - h.frame
    if np.count_nonzero(op - np.diag(np.diag(op))) == 0:
        energies = np.diag(op).real
        r, d = rho, detect
    else:
        energies, v = np.linalg.eigh(op)
        r = v.conj().T @ rho @ v
        d = v.conj().T @ detect @ v
    # Tr[rho(t) D] = sum_ab r_ab d_ba exp(-2i pi (E_a - E_b) t)
    weights = r * d.T
    a, b = np.nonzero(np.abs(weights) > 1e-15)
    amps = np.ascontiguousarray(weights[a, b], dtype=np.complex128)
    freqs = np.ascontiguousarray(energies[a] - energies[b], dtype=np.float64)
    freqs = freqs - shift  # demodulate at the receiver reference
    return _kernels.fid_sum(amps, freqs, float(params.dwell),
                            float(params.line_broadening), int(params.points))


class Spectrum(NamedTuple):
    freq: np.ndarray
    value: np.ndarray


def spectrum(signal: np.ndarray, params: FidParams) -> Spectrum:
    """Discrete Fourier transform of an FID onto an absolute Hz axis.

    ``X(f_k) = dwell * sum_j s_j exp(+2i*pi*f_k*t_j)`` for ``f_k`` spanning
    ``+-1/(2*dwell)`` around ``params.frame``. With this scaling
    ``sum |X|^2 * df == sum |s|^2 * dwell`` (``df = 1/(points*dwell)``).
    """
    signal = np.asarray(signal, dtype=complex)
    if signal.size < 256:
        raise ValueError("spectrum needs at least 256 points")
    npts = signal.size
    value = np.fft.fftshift(np.fft.ifft(signal)) * npts * params.dwell
    freq = np.fft.fftshift(np.fft.fftfreq(npts, params.dwell)) + params.frame
    return Spectrum(freq, value)


def _wrap_phase(deg: float) -> float:
    """Map to (-180, 180]."""
    w = math.fmod(deg, 360.0)
    if w <= -180:
        w += 360
    elif w > 180:
        w -= 360
    return w


def peaks(spec: Spectrum, system: SpinSystem | None = None,
          min_amplitude_fraction: float = 0.05, phase_correction: float = 0.0,
          observe: Sequence[int] | None = None) -> list[SpectrumLine]:
    """Local maxima of ``|value|`` above ``fraction * max``, sorted by frequency.

    Each peak's phase is ``arg(value) + phase_correction``. With a ``system``, peaks
    are assigned to the nearest template line (restricted to ``observe`` spins when
    given) within half the smallest template gap; a tie is flagged as ambiguous.
    """
    if not 0 < min_amplitude_fraction < 1:
        raise ValueError("min_amplitude_fraction must lie in (0, 1)")
    mag = np.abs(spec.value)
    top = mag.max(initial=0.0)
    if top == 0:
        return []
    inner = (mag[1:-1] > mag[:-2]) & (mag[1:-1] >= mag[2:]) & (mag[1:-1] > min_amplitude_fraction * top)
    idx = np.nonzero(inner)[0] + 1

    template = []
    if system is not None:
        lo, hi = spec.freq[0], spec.freq[-1]
        template = [ln for ln in transitions(system) if lo <= ln.freq <= hi
                    and (observe is None or ln.flipping_spin in observe)]
    freqs = np.array(sorted({ln.freq for ln in template}))
    gaps = np.diff(freqs)
    bin_width = abs(spec.freq[1] - spec.freq[0])
    window = gaps.min() / 2 if gaps.size else math.inf
    window = max(window, bin_width)

    out = []
    for i in idx:
        f = float(spec.freq[i])
        v = complex(spec.value[i])
        phase = _wrap_phase(math.degrees(math.atan2(v.imag, v.real)) + phase_correction)
        line = SpectrumLine(f, v, phase)
        if template:
            dist = np.array([abs(ln.freq - f) for ln in template])
            best = dist.min()
            if best <= window:
                tied = [ln for ln, d in zip(template, dist) if d - best <= 1e-9 * max(1.0, abs(f))]
                if len(tied) == 1:
                    line = SpectrumLine(f, v, phase, tied[0].flipping_spin,
                                        tied[0].spectator_states)
                else:
                    line = SpectrumLine(f, v, phase, None, (), ambiguous=True)
        out.append(line)
    return out


def readout_pulse(rho: np.ndarray, spins: Sequence[int], angle: float = np.pi / 2,
                  phase_axis: str | float = "y") -> np.ndarray:
    """Conjugate ``rho`` by simultaneous ideal rotations of ``spins``.

    ``phase_axis`` is ``'x'``, ``'y'`` or a transverse phase in degrees.
    """
    n = num_spins(rho)
    phase = {"x": 0.0, "y": 90.0, "-x": 180.0, "-y": 270.0}.get(phase_axis, phase_axis)
    u = np.eye(2 ** n, dtype=complex)
    for k in spins:
        u = rotation_phase(k, float(phase), angle, n) @ u
    return u @ rho @ u.conj().T


def window_spectrum(rho: np.ndarray, system: SpinSystem, spin: int, points: int = 8192,
                    line_broadening: float = 0.2, mode: str = "weak"):
    """FID and spectrum observing one spin, receiver centred on its multiplet."""
    if not is_hermitian(rho):
        raise ValueError("density matrix is not Hermitian")
    params = default_fid_params(system, (spin,), points, line_broadening)
    h = hamiltonian(system, mode)
    return spectrum(fid(rho, h, params), params), params


def _num(x: float) -> str:
    return repr(float(x))


def write_spectrum_csv(path, spec: Spectrum) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["freq_hz", "re", "im", "magnitude", "phase_deg"])
        for f, v in zip(spec.freq, spec.value):
            w.writerow([_num(f), _num(v.real), _num(v.imag), _num(abs(v)),
                        _num(_wrap_phase(math.degrees(math.atan2(v.imag, v.real))))])


def write_peaks_csv(path, lines: Sequence[SpectrumLine], window: int | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["spin", "freq_hz", "magnitude", "phase_deg", "spectators"])
        for ln in lines:
            spin = ln.flipping_spin if ln.flipping_spin is not None else window
            w.writerow(["" if spin is None else spin, _num(ln.freq), _num(abs(ln.amplitude)),
                        _num(ln.phase_deg), ln.spectators])
