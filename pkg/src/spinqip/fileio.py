"""Readers for spin-system configs, sequence scripts, term lists and matrix files.

Config (INI)::

    [system]
    labels = C1 C2 C3
    reference_mhz = 125.76
    offsets_hz = 2139.0 22180.25 6444.97
    frame_hz = 0

    [couplings]
    1-2 = -1.27
    1-3 = 35.98

    [defaults]
    epsilon = 1.0
    points = 8192
    line_broadening = 0.2
    tolerance = 1e-10

Sequence script, one event per line, ``#`` starts a comment::

    frame 0
    ideal tcnot 3 2 -
    soft 22153.34 auto 0 0.06656 as tcnot 3 2 -
    delay 0.001

Gate specs: ``tcnot C T [+|-] [ctrl=0|1]``, ``ttoffoli C1 C2 T [ctrl=11]``,
``rot K x|y|z DEG``, ``cnot C T``, ``toffoli C1 C2 T``, ``fredkin C T1 T2``,
``matrix PATH``.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .core import SpinSystem, num_spins
from .gates import GateSpec
from .product_operator import Decomposition, terms_from_pairs
from .sequence import Delay, Ideal, Sequence, SoftPulse

BUILTIN_PREFIX = "builtin:"


class InputError(Exception):
    """Malformed user input, with an optional ``path:line:column`` location."""

    def __init__(self, message: str, path=None, line: int | None = None,
                 column: int | None = None):
        self.message = message
        self.path, self.line, self.column = path, line, column
        super().__init__(str(self))

    def __str__(self):
        where = [str(p) for p in (self.path, self.line, self.column) if p is not None]
        return ":".join(where) + (": " if where else "") + self.message


def resolve(path) -> Path:
    """Map ``builtin:NAME`` to a file shipped with the package."""
    text = str(path)
    if text.startswith(BUILTIN_PREFIX):
        ref = resources.files("spinqip") / "data" / text[len(BUILTIN_PREFIX):]
        return Path(str(ref))
    return Path(text)


def _read(path) -> tuple[Path, str]:
    p = resolve(path)
    try:
        return p, p.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read file ({exc.strerror})", path) from exc


@dataclass(frozen=True)
class Config:
    system: SpinSystem
    epsilon: float = 1.0
    points: int = 8192
    line_broadening: float = 0.2
    tolerance: float = 1e-10
    frame: float = 0.0
    extra: dict = field(default_factory=dict)


def _floats(text: str, what: str, path) -> list[float]:
    try:
        return [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise InputError(f"{what}: expected numbers, got {text!r}", path) from None


def load_config(path) -> Config:
    p, text = _read(path)
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=str(p))
    except configparser.Error as exc:
        raise InputError(str(exc).splitlines()[0], p) from exc
    if not cp.has_section("system"):
        raise InputError("missing [system] section", p)
    sysec = cp["system"]
    if "offsets_hz" not in sysec:
        raise InputError("[system] offsets_hz is required", p)
    offsets = _floats(sysec["offsets_hz"], "[system] offsets_hz", p)
    labels = tuple(sysec.get("labels", "").replace(",", " ").split())
    reference = sysec.get("reference_mhz")
    couplings = {}
    if cp.has_section("couplings"):
        for key, value in cp["couplings"].items():
            try:
                k, l = (int(x) for x in key.split("-"))
            except ValueError:
                raise InputError(f"[couplings] key {key!r} must look like 1-2", p) from None
            pair = (min(k, l), max(k, l))
            if pair in couplings:
                raise InputError(f"[couplings] {key} given twice", p)
            couplings[pair] = _floats(value, f"[couplings] {key}", p)[0]
    metadata = dict(cp["metadata"]) if cp.has_section("metadata") else {}
    try:
        system = SpinSystem.from_couplings(
            offsets, couplings, labels=labels,
            reference_mhz=None if reference is None else float(reference), metadata=metadata)
    except ValueError as exc:
        raise InputError(str(exc), p) from exc
    d = cp["defaults"] if cp.has_section("defaults") else {}
    try:
        return Config(system,
                      epsilon=float(d.get("epsilon", 1.0)),
                      points=int(d.get("points", 8192)),
                      line_broadening=float(d.get("line_broadening", 0.2)),
                      tolerance=float(d.get("tolerance", 1e-10)),
                      frame=float(sysec.get("frame_hz", 0.0)))
    except ValueError as exc:
        raise InputError(f"[defaults] {exc}", p) from exc


def dump_config(cfg: Config) -> str:
    s = cfg.system
    lines = ["[system]"]
    lines.append("labels = " + " ".join(s.labels))
    if s.reference_mhz is not None:
        lines.append(f"reference_mhz = {s.reference_mhz!r}")
    lines.append("offsets_hz = " + " ".join(repr(v) for v in s.offsets))
    lines.append(f"frame_hz = {cfg.frame!r}")
    lines += ["", "[couplings]"]
    for k in range(1, s.n + 1):
        for l in range(k + 1, s.n + 1):
            if s.coupling(k, l):
                lines.append(f"{k}-{l} = {s.coupling(k, l)!r}")
    lines += ["", "[defaults]", f"epsilon = {cfg.epsilon!r}", f"points = {cfg.points}",
              f"line_broadening = {cfg.line_broadening!r}", f"tolerance = {cfg.tolerance!r}"]
    return "\n".join(lines) + "\n"


class _Tokens:
    """Whitespace tokens of one script line, remembering 1-based columns."""

    def __init__(self, text: str, path, lineno: int):
        self.path, self.lineno = path, lineno
        self.items = []
        col = 0
        for tok in text.split():
            col = text.index(tok, col)
            self.items.append((tok, col + 1))
            col += len(tok)
        self.pos = 0

    def error(self, message: str, index: int | None = None) -> InputError:
        i = self.pos if index is None else index
        col = self.items[i][1] if i < len(self.items) else (
            self.items[-1][1] + len(self.items[-1][0]) if self.items else 1)
        return InputError(message, self.path, self.lineno, col)

    def take(self, what: str) -> str:
        if self.pos >= len(self.items):
            raise self.error(f"expected {what}")
        tok = self.items[self.pos][0]
        self.pos += 1
        return tok

    def peek(self) -> str | None:
        return self.items[self.pos][0] if self.pos < len(self.items) else None

    def number(self, what: str) -> float:
        tok = self.take(what)
        try:
            return float(tok)
        except ValueError:
            raise self.error(f"{what}: {tok!r} is not a number", self.pos - 1) from None

    def spin(self, n: int) -> int:
        tok = self.take("spin index")
        if not tok.isdigit() or not 1 <= int(tok) <= n:
            raise self.error(f"spin index {tok!r} not in 1..{n}", self.pos - 1)
        return int(tok)

    def done(self) -> None:
        if self.pos < len(self.items):
            raise self.error(f"unexpected {self.items[self.pos][0]!r}")


def _parse_gate(tk: _Tokens, n: int, base: Path | None) -> GateSpec:
    start = tk.pos
    kind = tk.take("gate name")
    try:
        if kind == "tcnot":
            c, t = tk.spin(n), tk.spin(n)
            sense = 1
            if tk.peek() in ("+", "-", "+1", "-1"):
                sense = -1 if tk.take("sense").startswith("-") else 1
            states = None
            if tk.peek() and tk.peek().startswith("ctrl="):
                states = (_ctrl_bits(tk, 1),)
            return GateSpec("transition_cnot", (c, t), n, sense=sense,
                            control_states=states[0] if states else None)
        if kind == "ttoffoli":
            spins = (tk.spin(n), tk.spin(n), tk.spin(n))
            states = _ctrl_bits(tk, 2) if tk.peek() and tk.peek().startswith("ctrl=") else None
            return GateSpec("transition_toffoli", spins, n, control_states=states)
        if kind == "rot":
            k = tk.spin(n)
            axis = tk.take("axis")
            if axis not in ("x", "y", "z"):
                raise tk.error(f"axis must be x, y or z, got {axis!r}", tk.pos - 1)
            angle = tk.number("angle in degrees")
            return GateSpec.rotation_of(k, axis, np.radians(angle), n)
        if kind in ("cnot", "toffoli", "fredkin"):
            arity = 2 if kind == "cnot" else 3
            return GateSpec(kind, tuple(tk.spin(n) for _ in range(arity)), n)
        if kind == "matrix":
            ref = tk.take("matrix file")
            target = Path(ref) if base is None or Path(ref).is_absolute() else base / ref
            m = load_matrix(target)
            if m.shape != (2 ** n, 2 ** n):
                raise tk.error(f"matrix has shape {m.shape}, expected {(2 ** n, 2 ** n)}",
                               tk.pos - 1)
            return GateSpec.raw_of(m)
    except ValueError as exc:
        raise tk.error(str(exc), start) from None
    raise tk.error(f"unknown gate {kind!r}", start)


def _ctrl_bits(tk: _Tokens, count: int) -> tuple[int, ...]:
    tok = tk.take("ctrl=")
    bits = tok[len("ctrl="):]
    if len(bits) != count or any(b not in "01" for b in bits):
        raise tk.error(f"ctrl= needs {count} bits of 0/1, got {bits!r}", tk.pos - 1)
    return tuple(int(b) for b in bits)


def parse_gate(text: str, n: int) -> GateSpec:
    tk = _Tokens(text, "<gate>", 1)
    gate = _parse_gate(tk, n, None)
    tk.done()
    return gate


def parse_sequence(text: str, system: SpinSystem, path="<sequence>",
                   frame: float = 0.0) -> Sequence:
    n = system.n
    base = Path(str(path)).parent if path != "<sequence>" else None
    events = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        tk = _Tokens(line, path, lineno)
        verb = tk.take("event")
        if verb == "ideal":
            events.append(Ideal(_parse_gate(tk, n, base)))
        elif verb == "delay":
            dur = tk.number("delay in seconds")
            if dur < 0:
                raise tk.error("delay must be non-negative", tk.pos - 1)
            events.append(Delay(dur))
        elif verb == "soft":
            carrier = tk.number("carrier in Hz")
            amp_tok = tk.peek()
            if amp_tok == "auto":
                tk.take("amplitude")
                amp = None
            else:
                amp = tk.number("amplitude in Hz")
                if amp < 0:
                    raise tk.error("amplitude must be non-negative", tk.pos - 1)
            phase = tk.number("phase in degrees")
            dur = tk.number("duration in seconds")
            if dur <= 0:
                raise tk.error("pulse duration must be positive", tk.pos - 1)
            ideal = None
            if tk.peek() == "as":
                tk.take("as")
                ideal = _parse_gate(tk, n, base)
            events.append(SoftPulse(carrier, amp, phase, dur, ideal))
        elif verb == "frame":
            frame = tk.number("frame in Hz")
        else:
            raise tk.error(f"unknown event {verb!r}", 0)
        tk.done()
    return Sequence(system, tuple(events), frame)


def load_sequence(path, system: SpinSystem, frame: float = 0.0) -> Sequence:
    p, text = _read(path)
    return parse_sequence(text, system, p, frame)


def load_terms(path, n: int) -> Decomposition:
    """Lines of ``LABEL COEFFICIENT``; ``identity VALUE`` sets the trace (default 1)."""
    p, text = _read(path)
    pairs, identity = [], 1.0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        tk = _Tokens(line, p, lineno)
        label = tk.take("term label")
        value = tk.number("coefficient")
        tk.done()
        if label == "identity":
            identity = value
            continue
        try:
            from .product_operator import ProductTerm
            ProductTerm.from_label(label, n)
        except ValueError as exc:
            raise tk.error(str(exc), 0) from None
        pairs.append((label, value))
    return terms_from_pairs(pairs, n, identity)


def load_matrix(path) -> np.ndarray:
    """``.npy`` array, or text with one row per line of Python complex literals."""
    p = resolve(path)
    if p.suffix == ".npy":
        try:
            m = np.load(p)
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot load matrix ({exc})", p) from exc
    else:
        p, text = _read(p)
        rows = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0]
            if not line.strip():
                continue
            tk = _Tokens(line, p, lineno)
            row = []
            for i, (tok, _) in enumerate(tk.items):
                try:
                    row.append(complex(tok))
                except ValueError:
                    raise tk.error(f"{tok!r} is not a complex number", i) from None
            rows.append(row)
        if not rows or any(len(r) != len(rows) for r in rows):
            raise InputError("matrix must be square", p)
        m = np.array(rows, dtype=complex)
    try:
        num_spins(m)
    except ValueError as exc:
        raise InputError(str(exc), p) from exc
    return np.asarray(m, dtype=complex)


def example_config() -> Config:
    return load_config(BUILTIN_PREFIX + "alanine.cfg")
