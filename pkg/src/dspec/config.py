"""Configuration files (JSON or TOML) to :class:`OperatorSpec` and back.

Schema::

    partition : {"points": [...]}
              | {"generator": {"kind": "arithmetic", "start": a, "step": h, "count": N}}
              | {"generator": {"kind": "sum_power", "exponent": p, "count": N}}
    strengths : {"values": [..., "inf", ...]}
              | {"generator": {"kind": "linear", "slope": s}}        # beta_k = s*k
              | {"generator": {"kind": "constant", "value": v}}
    potential : {"pieces": [{"from": x, "to": y | "inf", "c0": c, "c1": c'}],
                 "repeat": period (optional)}
    tail      : {"d_limit", "d_tolerance", "beta_coupling_limit", "q_mean_limit",
                 "recurrent_lengths", "c0_sup", "c1_sup", "pattern"}

Series in a ``pattern`` are lists of ``[coefficient, exponent]`` pairs in the
block counter ``j`` (a bare number is a constant).  A final potential piece with
``"to": "inf"`` extends to infinity.  Generated partitions, strengths and
potentials also produce a tail pattern when their continuation is exact.
"""

from __future__ import annotations

import hashlib
import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from .asymptotics import Series, as_fraction
from .errors import ConfigError
from .model import (
    OperatorSpec,
    Partition,
    Piece,
    Potential,
    Strengths,
    TailCell,
    TailPattern,
    TailPiece,
    TailSpec,
    build_spec,
)

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


def read_config(path) -> dict:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}", path=str(path)) from exc
    try:
        if path.suffix.lower() == ".toml":
            return tomllib.loads(raw.decode("utf-8"))
        return json.loads(raw.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}", path=str(path)) from exc


def load_spec(path) -> OperatorSpec:
    return spec_from_dict(read_config(path))


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def _real(value, what: str) -> float:
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "+inf", "infinity"):
            return math.inf
        try:
            return float(Fraction(value))
        except ValueError as exc:
            raise ConfigError(f"{what}: cannot read {value!r}") from exc
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{what}: expected a number, got {value!r}")
    return float(value)


def _series(value, what: str) -> Series:
    try:
        if isinstance(value, (int, float, str)):
            return Series.const(as_fraction(value))
        return Series([(as_fraction(e), as_fraction(c)) for c, e in value])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what}: malformed series {value!r}") from exc


def spec_from_dict(cfg: dict) -> OperatorSpec:
    if not isinstance(cfg, dict):
        raise ConfigError("configuration must be a mapping")
    for key in ("partition", "strengths", "potential"):
        if key not in cfg:
            raise ConfigError(f"missing section {key!r}", section=key)
    points, part_rule = _parse_partition(cfg["partition"])
    betas, beta_rule = _parse_strengths(cfg["strengths"], len(points))
    pieces, q_rule = _parse_potential(cfg["potential"], points[-1] if points else 0.0)
    tail = _parse_tail(cfg.get("tail"), part_rule, beta_rule, q_rule)
    return build_spec(Partition(tuple(points), tail), Strengths(tuple(betas)), Potential(tuple(pieces)))


def _parse_partition(sec):
    if "points" in sec:
        return [_real(x, "partition.points") for x in sec["points"]], None
    gen = sec.get("generator")
    if not isinstance(gen, dict):
        raise ConfigError("partition needs 'points' or 'generator'")
    kind = gen.get("kind")
    count = int(gen.get("count", 0))
    if count < 1:
        raise ConfigError("partition.generator.count must be positive")
    if kind == "arithmetic":
        step = _real(gen["step"], "step")
        start = _real(gen.get("start", gen["step"]), "start")
        # multiply rather than accumulate: keeps points reproducible
        pts = [start + step * i for i in range(count)]
        return pts, ("arithmetic", as_fraction(gen["step"]), as_fraction(gen.get("start", gen["step"])))
    if kind == "sum_power":
        p = as_fraction(gen["exponent"])
        pts, acc = [], 0.0
        for k in range(1, count + 1):
            acc += k ** (-float(p))
            pts.append(acc)
        return pts, ("sum_power", p)
    raise ConfigError(f"unknown partition generator {kind!r}")


def _parse_strengths(sec, count: int):
    if "values" in sec:
        return [_real(b, "strengths.values") for b in sec["values"]], None
    gen = sec.get("generator")
    if not isinstance(gen, dict):
        raise ConfigError("strengths needs 'values' or 'generator'")
    kind = gen.get("kind")
    if kind == "linear":
        s = _real(gen["slope"], "slope")
        return [s * k for k in range(1, count + 1)], ("linear", as_fraction(gen["slope"]))
    if kind == "constant":
        v = _real(gen["value"], "value")
        rule = ("constant", "inf" if math.isinf(v) else as_fraction(gen["value"]))
        return [v] * count, rule
    raise ConfigError(f"unknown strengths generator {kind!r}")


def _parse_potential(sec, x_end: float):
    raw = sec.get("pieces")
    if not raw:
        raise ConfigError("potential needs a non-empty 'pieces' list")
    pieces = []
    open_end = False
    for i, p in enumerate(raw):
        a = _real(p["from"], "potential.from")
        b = _real(p["to"], "potential.to")
        if math.isinf(b):
            if i != len(raw) - 1:
                raise ConfigError("only the last potential piece may extend to infinity")
            open_end = True
        pieces.append(Piece(a, b, _real(p.get("c0", 0.0), "c0"), _real(p.get("c1", 0.0), "c1")))
    period = sec.get("repeat")
    rule = None
    if period is not None:
        if open_end:
            raise ConfigError("'repeat' and an infinite piece are exclusive")
        T = _real(period, "repeat")
        base = sorted(pieces, key=lambda q: q.a)
        if abs(base[0].a) > 0 or abs(base[-1].b - T) > 1e-12 * T:
            raise ConfigError("repeated pieces must tile [0, period)")
        tiled, shift = [], 0
        while shift * T < x_end:
            for q in base:
                o = shift * T
                # global affine coefficients of q(x - o)
                tiled.append(Piece(q.a + o, q.b + o, q.c0 - q.c1 * o, q.c1))
            shift += 1
        pieces = tiled
        rule = ("repeat", as_fraction(period), [(as_fraction(str(q.a)), as_fraction(str(q.b)),
                                                 as_fraction(str(q.c0)), as_fraction(str(q.c1)))
                                                for q in base])
    elif open_end:
        last = raw[-1]
        rule = ("affine", as_fraction(last["from"]), as_fraction(last.get("c0", 0)),
                as_fraction(last.get("c1", 0)))
    return pieces, rule


def _parse_tail(sec, part_rule, beta_rule, q_rule) -> Optional[TailSpec]:
    sec = dict(sec or {})
    pattern = None
    if "pattern" in sec:
        pattern = _parse_pattern(sec.pop("pattern"))
    else:
        pattern = _generated_pattern(part_rule, beta_rule, q_rule)
    opt = lambda key: None if sec.get(key) is None else _real(sec[key], f"tail.{key}")  # noqa: E731
    rec = sec.get("recurrent_lengths")
    tail = TailSpec(
        d_limit=opt("d_limit"),
        d_tolerance=opt("d_tolerance"),
        beta_coupling_limit=opt("beta_coupling_limit"),
        q_mean_limit=opt("q_mean_limit"),
        recurrent_lengths=None if rec is None else tuple(_real(r, "recurrent_lengths") for r in rec),
        c0_sup=opt("c0_sup"),
        c1_sup=opt("c1_sup"),
        pattern=pattern,
    )
    if tail == TailSpec():
        return None
    return tail


def _parse_pattern(sec) -> TailPattern:
    cells = []
    for i, c in enumerate(sec["cells"]):
        what = f"tail.pattern.cells[{i}]"
        beta = c.get("beta", "inf")
        if isinstance(beta, str) and beta.strip().lower() in ("inf", "+inf"):
            beta = "inf"
        elif not isinstance(beta, list) and _real(beta, what) == 0.0:
            beta = 0
        else:
            beta = _series(beta, what + ".beta")
        pieces = None
        if "pieces" in c:
            pieces = tuple(TailPiece(_series(p["length"], what), _series(p.get("c0", 0), what),
                                     _series(p.get("c1", 0), what)) for p in c["pieces"])
        length = _series(c["length"], what + ".length") if "length" in c else sum(
            (p.length for p in pieces), Series())
        cells.append(TailCell(length, beta, pieces))
    return TailPattern(tuple(cells), int(sec.get("first_block", 1)), int(sec.get("start_cell", 1)),
                       str(sec.get("origin", "declared")))


def _generated_pattern(part_rule, beta_rule, q_rule) -> Optional[TailPattern]:
    """Exact tail pattern for recognized generators, or None."""
    if part_rule is None or beta_rule is None:
        return None
    j = Series.index()
    if part_rule[0] == "arithmetic":
        _, step, start = part_rule
        period_cells = 1
        if q_rule is not None and q_rule[0] == "repeat":
            ratio = step / q_rule[1]
            if ratio.denominator > 64:
                q_rule = None
            else:
                period_cells = ratio.denominator
        cells = []
        for r in range(period_cells):
            # cell index k = period_cells*(j-1) + r + 1; its left end is start + (k-2)*step
            k = period_cells * (j - 1) + (r + 1)
            left = k * step + (start - 2 * step)
            cells.append((Series.const(step), _beta_series(beta_rule, k),
                          _cell_pieces_arith(q_rule, start, step, r, left)))
    elif part_rule[0] == "sum_power":
        p = part_rule[1]
        k = j
        cells = [(Series.power(1, -p), _beta_series(beta_rule, k), _constant_pieces(q_rule, Series.power(1, -p)))]
    else:
        return None
    out = tuple(TailCell(length, beta, pcs) for length, beta, pcs in cells)
    return TailPattern(out, first_block=1, start_cell=1, origin=f"generator:{part_rule[0]}")


def _beta_series(rule, k: Series):
    if rule[0] == "linear":
        return k * rule[1]
    if rule[1] == "inf":
        return "inf"
    if rule[1] == 0:
        return 0
    return Series.const(rule[1])


def _constant_pieces(q_rule, length: Series):
    if q_rule is None:
        return None
    if q_rule[0] == "affine" and q_rule[3] == 0:
        return (TailPiece(length, Series.const(q_rule[2])),)
    if q_rule[0] == "repeat" and all(c1 == 0 for *_, c1 in q_rule[2]) and len({c0 for *_, c0, _ in q_rule[2]}) == 1:
        return (TailPiece(length, Series.const(q_rule[2][0][2])),)
    return None


def _cell_pieces_arith(q_rule, start, step, r, left: Series):
    if q_rule is None:
        return None
    if q_rule[0] == "affine":
        _, _, c0, c1 = q_rule
        return (TailPiece(Series.const(step), Series.const(c0) + left * c1, Series.const(c1)),)
    T, base = q_rule[1], q_rule[2]
    # offset of this residue's left end inside one period
    u = (start - 2 * step + (r + 1) * step) % T
    pcs = []
    m = -1
    while m * T < u + step:
        for a, b, c0, c1 in base:
            lo, hi = max(a + m * T, u), min(b + m * T, u + step)
            if hi > lo:
                # local coordinate s = x - u with x inside the shifted copy
                val = c0 + c1 * (lo - m * T)
                pcs.append(TailPiece(Series.const(hi - lo), Series.const(val), Series.const(c1)))
        m += 1
    return tuple(pcs)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _num(x: float):
    if math.isinf(x):
        return "inf"
    return x


def _series_out(s: Series):
    return s.to_json()


def spec_to_dict(spec: OperatorSpec) -> dict:
    """Explicit config reproducing ``spec`` bit-for-bit on reload."""
    out: dict[str, Any] = {
        "partition": {"points": [float(x) for x in spec.partition.points]},
        "strengths": {"values": [_num(b) for b in spec.strengths.values]},
        "potential": {"pieces": [{"from": p.a, "to": p.b, "c0": p.c0, "c1": p.c1}
                                 for p in spec.potential.pieces]},
    }
    tail = spec.tail
    if tail is not None:
        t: dict[str, Any] = {}
        for key in ("d_limit", "d_tolerance", "beta_coupling_limit", "q_mean_limit", "c0_sup", "c1_sup"):
            v = getattr(tail, key)
            if v is not None:
                t[key] = _num(v)
        if tail.recurrent_lengths is not None:
            t["recurrent_lengths"] = list(tail.recurrent_lengths)
        if tail.pattern is not None:
            t["pattern"] = pattern_to_dict(tail.pattern)
        out["tail"] = t
    return out


def pattern_to_dict(pattern: TailPattern) -> dict:
    cells = []
    for c in pattern.cells:
        if c.decoupled:
            beta = "inf"
        elif c.continuous:
            beta = 0
        else:
            beta = _series_out(c.beta)
        entry: dict[str, Any] = {"length": _series_out(c.length), "beta": beta}
        if c.pieces is not None:
            entry["pieces"] = [{"length": _series_out(p.length), "c0": _series_out(p.c0),
                                "c1": _series_out(p.c1)} for p in c.pieces]
        cells.append(entry)
    return {"cells": cells, "first_block": pattern.first_block,
            "start_cell": pattern.start_cell, "origin": pattern.origin}


def canonical_json(cfg: dict) -> str:
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(canonical_json(cfg).encode("utf-8")).hexdigest()


def dump_spec(spec: OperatorSpec, path) -> None:
    Path(path).write_text(json.dumps(spec_to_dict(spec), indent=2) + "\n", encoding="utf-8")
