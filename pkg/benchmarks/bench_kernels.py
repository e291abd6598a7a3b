"""Time the numba and numpy paths of each hot kernel.

    python benchmarks/bench_kernels.py [--repeat 5]

The first numba call includes compilation and is reported separately.
"""
import argparse
import time

import numpy as np

from spinqip import _kernels


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    m = 64
    amps = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    freqs = rng.uniform(-25, 25, m)
    yield "fid_sum (64 lines, 8192 pts)", "fid_sum", (amps, freqs, 1 / 45.0, 0.2, 8192)
    diag = rng.uniform(-60, 60, 8)
    yield "sliced_drive (3 spins, 20000 steps)", "sliced_drive", (
        diag, 7.5, 0.0, 15753.0, 0.0, 0.06656, 20000, 3)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    print(f"numba available: {_kernels.NUMBA_AVAILABLE}")
    print(f"{'kernel':40s} {'numpy s':>10s} {'numba s':>10s} {'compile s':>10s} {'speed-up':>9s}")
    for title, name, call in cases():
        np_fn = getattr(_kernels, f"{name}_numpy")
        t_np = best_of(np_fn, call, args.repeat)
        nb_fn = getattr(_kernels, f"{name}_numba")
        if nb_fn is None:
            print(f"{title:40s} {t_np:10.4f} {'-':>10s} {'-':>10s} {'-':>9s}")
            continue
        t0 = time.perf_counter()
        out = nb_fn(*call)
        first = time.perf_counter() - t0
        t_nb = best_of(nb_fn, call, args.repeat)
        err = np.max(np.abs(out - np_fn(*call)))
        print(f"{title:40s} {t_np:10.4f} {t_nb:10.4f} {first:10.3f} {t_np / t_nb:8.1f}x"
              f"  (max diff {err:.1e})")


if __name__ == "__main__":
    main()
