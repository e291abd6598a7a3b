"""``spinqip`` command line.

Exit codes: 0 success, 1 verification failed or plan infeasible, 2 input error,
3 I/O error. Reports are ``key: value`` lines under a ``# spinqip <version>`` header.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import basis_label
from .fileio import (BUILTIN_PREFIX, InputError, load_config, load_matrix, load_sequence,
                     load_terms, parse_gate)
from .gates import equivalence, fredkin
from .product_operator import compose, decompose
from .sequence import equilibrium_state, plan_transition_pulse, prepare_input, run_sequence
from .spectrometer import peaks, window_spectrum, write_peaks_csv, write_spectrum_csv

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_IO = 0, 1, 2, 3

DEFAULT_CONFIG = BUILTIN_PREFIX + "alanine.cfg"
DEFAULT_SEQUENCE = BUILTIN_PREFIX + "fredkin3.seq"


class _IOFailure(Exception):
    pass


def _fmt(x: float) -> str:
    x = float(x)
    if x == 0:
        x = 0.0  # no "-0"
    return format(x, ".12g")


def _fmt_complex(z: complex) -> str:
    re, im = _fmt(round(z.real, 12)), _fmt(round(z.imag, 12))
    if float(im) == 0:
        return re
    if float(re) == 0:
        return f"{im}i"
    return f"{re}{'' if im.startswith('-') else '+'}{im}i"


class Report:
    def __init__(self, command: str):
        self.lines = [f"# spinqip {__version__}", f"command: {command}"]

    def add(self, key: str, value) -> None:
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, (float, np.floating)):
            value = _fmt(value)
        self.lines.append(f"{key}: {value}")

    def emit(self, stream) -> None:
        stream.write("\n".join(self.lines) + "\n")


def _config(args):
    cfg = load_config(args.config)
    if args.epsilon is None:
        args.epsilon = cfg.epsilon
    if args.tolerance is None:
        args.tolerance = cfg.tolerance
    return cfg


def _initial_state(args, n: int) -> np.ndarray:
    choice = args.initial
    if choice == "eq":
        return equilibrium_state(n, args.epsilon)
    if choice == "in":
        if n != 3:
            raise InputError("initial state 'in' is defined for 3 spins")
        return prepare_input(args.epsilon)
    if choice == "mixed":
        return np.eye(2 ** n, dtype=complex) / 2 ** n
    return compose(load_terms(choice, n))


def _final_state(args, cfg) -> tuple[np.ndarray, float]:
    seq = load_sequence(args.sequence, cfg.system, cfg.frame)
    rho0 = _initial_state(args, cfg.system.n)
    result = run_sequence(seq, rho0, args.model, args.b1_scale)
    rho = result.rho
    if getattr(args, "readout", None):
        readout = load_sequence(args.readout, cfg.system, cfg.frame)
        rho = run_sequence(readout, rho, "ideal").rho
    return rho, result.elapsed


def cmd_verify_gate(args, out) -> int:
    cfg = _config(args)
    seq = load_sequence(args.sequence, cfg.system, cfg.frame)
    n = cfg.system.n
    if args.target == "fredkin":
        if n < 3:
            raise InputError("fredkin target needs at least 3 spins")
        target = fredkin(1, 2, 3, n)
    else:
        target = load_matrix(args.target)
        if target.shape != (2 ** n, 2 ** n):
            raise InputError(f"target matrix has shape {target.shape}, "
                             f"expected {(2 ** n, 2 ** n)}", args.target)
    u = run_sequence(seq, model=args.model, b1_scale=args.b1_scale).unitary
    rep = equivalence(target, u, args.tolerance)
    r = Report("verify-gate")
    r.add("target", args.target)
    r.add("model", args.model)
    r.add("events", len(seq.events))
    r.add("tolerance", args.tolerance)
    r.add("exact", rep.exact)
    r.add("global_phase", rep.global_phase)
    r.add("monomial_phase", rep.monomial_phase)
    r.add("fidelity", rep.fidelity)
    if rep.phase_table is not None:
        for j, p in enumerate(rep.phase_table):
            r.add(f"phase {basis_label(j, n)}", _fmt_complex(p))
    r.add("verified", rep.monomial_phase)
    r.emit(out)
    return EXIT_OK if rep.monomial_phase else EXIT_FAILED


def cmd_simulate(args, out) -> int:
    cfg = _config(args)
    rho, elapsed = _final_state(args, cfg)
    d = decompose(rho, args.tolerance)
    r = Report("simulate")
    r.add("model", args.model)
    r.add("initial", args.initial)
    r.add("epsilon", args.epsilon)
    r.add("elapsed_s", elapsed)
    r.add("identity", d.identity_part)
    r.add("terms", len(d.terms))
    for term in d.terms:
        r.add(term.label, term.coefficient)
    if args.out:
        path = _out_dir(args.out) / "rho.txt"
        _write(path, "\n".join(" ".join(_fmt_complex(z) for z in row) for row in rho) + "\n")
        r.add("matrix", path.as_posix())
    r.emit(out)
    return EXIT_OK


def cmd_spectrum(args, out) -> int:
    cfg = _config(args)
    n = cfg.system.n
    windows = args.window or list(range(1, n + 1))
    for k in windows:
        if not 1 <= k <= n:
            raise InputError(f"window spin {k} not in 1..{n}")
    rho, _ = _final_state(args, cfg)
    outdir = _out_dir(args.out or ".")
    r = Report("spectrum")
    r.add("model", args.model)
    r.add("initial", args.initial)
    r.add("phase_correction_deg", args.phase_correction)
    for k in windows:
        spec, params = window_spectrum(rho, cfg.system, k, cfg.points, cfg.line_broadening)
        lines = []
        if np.abs(spec.value).max() > args.tolerance:
            lines = peaks(spec, cfg.system, phase_correction=args.phase_correction,
                          observe=(k,))
        spec_path = outdir / f"spectrum_spin{k}.csv"
        peak_path = outdir / f"peaks_spin{k}.csv"
        try:
            write_spectrum_csv(spec_path, spec)
            write_peaks_csv(peak_path, lines, window=k)
        except OSError as exc:
            raise _IOFailure(f"{exc.filename}: {exc.strerror}") from exc
        r.add(f"spin{k} receiver_hz", params.frame)
        r.add(f"spin{k} peaks", len(lines))
        for ln in lines:
            r.add(f"spin{k} peak", f"{_fmt(ln.freq)} Hz phase {_fmt(round(ln.phase_deg, 6))} "
                                   f"spectators {ln.spectators or '-'}")
        r.add(f"spin{k} spectrum_csv", spec_path.as_posix())
        r.add(f"spin{k} peaks_csv", peak_path.as_posix())
    r.emit(out)
    return EXIT_OK


def cmd_plan(args, out) -> int:
    cfg = _config(args)
    try:
        gate = parse_gate(args.gate, cfg.system.n)
        plan = plan_transition_pulse(cfg.system, gate, args.resolution)
    except ValueError as exc:
        raise InputError(str(exc), "--gate") from exc
    r = Report("plan")
    r.add("gate", args.gate)
    r.add("target_spin", plan.target_spin)
    r.add("target_lines_hz", " ".join(_fmt(f) for f in plan.target_lines))
    r.add("spread_hz", plan.spread)
    r.add("nearest_other_line_hz", plan.required_selectivity)
    r.add("resolution_hz", plan.resolution)
    r.add("single_pulse_feasible", plan.single_pulse_feasible)
    r.add("pulse_count", plan.pulse_count)
    for f in plan.pulses:
        r.add("pulse_carrier_hz", f)
    r.emit(out)
    return EXIT_OK if plan.single_pulse_feasible else EXIT_FAILED


def _out_dir(path) -> Path:
    p = Path(path)
    try:
        p.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _IOFailure(f"{p}: {exc.strerror}") from exc
    return p


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise _IOFailure(f"{path}: {exc.strerror}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=DEFAULT_CONFIG,
                        help="spin-system INI file, or builtin:NAME (default %(default)s)")
    common.add_argument("--model", choices=("ideal", "soft"), default="ideal")
    common.add_argument("--epsilon", type=float, help="polarisation (config default)")
    common.add_argument("--tolerance", type=float, help="comparison / cutoff tolerance")
    common.add_argument("--out", help="output directory")
    common.add_argument("--b1-scale", type=float, default=1.0,
                        help="RF amplitude miscalibration factor for soft pulses")

    state = argparse.ArgumentParser(add_help=False)
    state.add_argument("--sequence", default=DEFAULT_SEQUENCE)
    state.add_argument("--initial", default="in",
                       help="eq, in, mixed, or a product-operator terms file")

    p = argparse.ArgumentParser(prog="spinqip", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"spinqip {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify-gate", parents=[common], help="compare a sequence to a target gate")
    v.add_argument("--sequence", default=DEFAULT_SEQUENCE)
    v.add_argument("--target", default="fredkin", help="'fredkin' or a matrix file")
    v.set_defaults(func=cmd_verify_gate)

    s = sub.add_parser("simulate", parents=[common, state], help="product-operator terms of the final state")
    s.add_argument("--readout", help="ideal sequence applied after the main one")
    s.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("spectrum", parents=[common, state], help="write spectrum and peak CSVs")
    sp.add_argument("--window", type=int, action="append", help="observed spin (repeatable)")
    sp.add_argument("--phase-correction", type=float, default=0.0, help="degrees")
    sp.add_argument("--readout", help="ideal sequence applied before acquisition")
    sp.set_defaults(func=cmd_spectrum)

    pl = sub.add_parser("plan", parents=[common], help="selective-pulse feasibility")
    pl.add_argument("--gate", required=True, help="e.g. 'tcnot 3 2 -' or 'ttoffoli 1 2 3'")
    pl.add_argument("--resolution", type=float, default=0.5, help="Hz")
    pl.set_defaults(func=cmd_plan)
    return p


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except InputError as exc:
        err.write(f"spinqip: error: {exc}\n")
        return EXIT_INPUT
    except _IOFailure as exc:
        err.write(f"spinqip: I/O error: {exc}\n")
        return EXIT_IO
    except ValueError as exc:
        err.write(f"spinqip: error: {exc}\n")
        return EXIT_INPUT


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
