"""Hot inner loops, compiled with numba when available.

Set ``SPINQIP_DISABLE_NUMBA=1`` before import to force the pure-numpy path.
Both implementations of every kernel stay importable (``*_numpy`` / ``*_numba``)
so they can be compared directly; the unsuffixed names are the selected path.
"""
import os

import numpy as np

_DISABLED = os.environ.get("SPINQIP_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    if _DISABLED:
        raise ImportError("numba disabled by SPINQIP_DISABLE_NUMBA")
    from numba import njit
    NUMBA_AVAILABLE = True
except ImportError:
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

_CHUNK = 2048


def fid_sum_numpy(amps, freqs, dwell, lb, points):
    """``s_j = exp(-pi*lb*t_j) * sum_m amps[m] * exp(-2i*pi*freqs[m]*t_j)``, ``t_j = j*dwell``."""
    t = np.arange(points) * dwell
    out = np.zeros(points, dtype=np.complex128)
    for start in range(0, amps.size, _CHUNK):
        f = freqs[start:start + _CHUNK]
        out += np.exp(-2j * np.pi * np.outer(t, f)) @ amps[start:start + _CHUNK]
    return out * np.exp(-np.pi * lb * t)


@njit(cache=True)
def _fid_sum_jit(amps, freqs, dwell, lb, points):
    out = np.zeros(points, dtype=np.complex128)
    for j in range(points):
        t = j * dwell
        re = 0.0
        im = 0.0
        for m in range(amps.size):
            ang = -2.0 * np.pi * freqs[m] * t
            c = np.cos(ang)
            s = np.sin(ang)
            re += amps[m].real * c - amps[m].imag * s
            im += amps[m].real * s + amps[m].imag * c
        decay = np.exp(-np.pi * lb * t)
        out[j] = complex(re * decay, im * decay)
    return out


def _apply_single_numpy(u, r, k, n):
    """Left-multiply ``u`` by the 2x2 matrix ``r`` acting on spin ``k`` (0-based, MSB first)."""
    dim = u.shape[0]
    v = u.reshape(2 ** k, 2, dim // 2 ** (k + 1), dim)
    return np.einsum("ab,ibjc->iajc", r, v).reshape(dim, dim)


def sliced_drive_numpy(diag_h, amp, phase0, rate, start, duration, steps, n):
    """Strang-split propagator for ``H(t) = diag(diag_h) + amp * sum_k (cos p Ix + sin p Iy)``.

    ``p(t) = phase0 + 2*pi*rate*t`` (radians); frequencies in Hz. Returns the
    propagator from ``start`` to ``start + duration``.
    """
    dim = 2 ** n
    dt = duration / steps
    half = np.exp(-1j * np.pi * diag_h * dt)
    u = np.eye(dim, dtype=np.complex128)
    theta = np.pi * amp * dt  # rotation angle / 2 for exp(-i 2pi amp dt (c Ix + s Iy))
    for step in range(steps):
        p = phase0 + 2 * np.pi * rate * (start + (step + 0.5) * dt)
        r = _drive_step_py(theta, p)
        u = half[:, None] * u
        for k in range(n):
            u = _apply_single_numpy(u, r, k, n)
        u = half[:, None] * u
    return u


def _drive_step_py(theta, p):
    c = np.cos(theta)
    s = np.sin(theta)
    r = np.empty((2, 2), dtype=np.complex128)
    r[0, 0] = c
    r[1, 1] = c
    r[0, 1] = -1j * s * np.exp(-1j * p)
    r[1, 0] = -1j * s * np.exp(1j * p)
    return r


_drive_step = njit(cache=True)(_drive_step_py)


@njit(cache=True)
def _sliced_drive_jit(diag_h, amp, phase0, rate, start, duration, steps, n):
    dim = 2 ** n
    dt = duration / steps
    half = np.exp(-1j * np.pi * diag_h * dt)
    u = np.eye(dim, dtype=np.complex128)
    theta = np.pi * amp * dt
    for step in range(steps):
        p = phase0 + 2 * np.pi * rate * (start + (step + 0.5) * dt)
        r = _drive_step(theta, p)
        for i in range(dim):
            for col in range(dim):
                u[i, col] *= half[i]
        for k in range(n):
            stride = 1 << (n - 1 - k)
            for i in range(dim):
                if i & stride:
                    continue
                i1 = i | stride
                for col in range(dim):
                    a = u[i, col]
                    b = u[i1, col]
                    u[i, col] = r[0, 0] * a + r[0, 1] * b
                    u[i1, col] = r[1, 0] * a + r[1, 1] * b
        for i in range(dim):
            for col in range(dim):
                u[i, col] *= half[i]
    return u


if NUMBA_AVAILABLE:
    fid_sum_numba = _fid_sum_jit
    sliced_drive_numba = _sliced_drive_jit
    fid_sum = _fid_sum_jit
    sliced_drive = _sliced_drive_jit
else:
    fid_sum_numba = sliced_drive_numba = None
    fid_sum = fid_sum_numpy
    sliced_drive = sliced_drive_numpy
