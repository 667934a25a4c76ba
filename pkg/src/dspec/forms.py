"""Quadratic form of the operator evaluated on piecewise functions.

The form of a function ``f`` supported in ``[0, x_K]`` (extended by zero) is::

    t[f] = int |f'|^2 + int q |f|^2 + sum_k |f(x_k+) - f(x_k-)|^2 / beta_k

where decoupled points (beta = +inf) contribute nothing and continuity points
(beta = 0) require a vanishing jump.  The jump sum is reported split by sign of
beta as ``jump_plus - jump_minus``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainViolation, IndexOutOfRange, JumpAtContinuityPoint, UnsupportedKind, ZeroFunction
from .model import OperatorSpec, cell_integrals

# Gauss-Legendre rules: 5 points integrate polynomials up to degree 9 exactly.
_GAUSS_POLY = np.polynomial.legendre.leggauss(5)
_GAUSS_SMOOTH = np.polynomial.legendre.leggauss(40)

DOMAIN_TOL = 1e-12


# ---------------------------------------------------------------------------
# function representation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Segment:
    """Polynomial ``sum coeffs[i] * (x - a)**i`` on ``[a, b]``, degree at most 3."""

    a: float
    b: float
    coeffs: Tuple[float, ...]

    def __post_init__(self):
        if len(self.coeffs) > 4:
            raise UnsupportedKind("polynomial degree is capped at 3", degree=len(self.coeffs) - 1)

    quad = _GAUSS_POLY

    def value(self, x):
        s = np.asarray(x, dtype=float) - self.a
        out = np.zeros_like(s)
        for c in reversed(self.coeffs):
            out = out * s + c
        return out

    def deriv(self, x, order: int = 1):
        c = np.polynomial.polynomial.polyder(np.asarray(self.coeffs, dtype=float), order) \
            if len(self.coeffs) > order else np.zeros(1)
        return Segment(self.a, self.b, tuple(c)).value(x)

    def scaled(self, factor: float) -> "Segment":
        return Segment(self.a, self.b, tuple(factor * c for c in self.coeffs))


@dataclass(frozen=True)
class CosineSegment:
    """``amp * cos(freq * (x - x0))`` on ``[a, b]``; integrated by high-order quadrature."""

    a: float
    b: float
    amp: float
    freq: float
    x0: float = 0.0

    quad = _GAUSS_SMOOTH

    def value(self, x):
        return self.amp * np.cos(self.freq * (np.asarray(x, dtype=float) - self.x0))

    def deriv(self, x, order: int = 1):
        t = self.freq * (np.asarray(x, dtype=float) - self.x0)
        w = self.amp * self.freq ** order
        return w * [np.cos, lambda u: -np.sin(u), lambda u: -np.cos(u), np.sin][order % 4](t)

    def scaled(self, factor: float) -> "CosineSegment":
        return CosineSegment(self.a, self.b, factor * self.amp, self.freq, self.x0)


@dataclass(frozen=True)
class Trace:
    """One-sided values and derivatives at a partition point."""

    left: float = 0.0
    right: float = 0.0
    dleft: float = 0.0
    dright: float = 0.0

    @property
    def jump(self) -> float:
        return self.right - self.left


ZERO_TRACE = Trace()


@dataclass(frozen=True)
class PiecewiseFunction:
    segments: Tuple[object, ...]
    traces: Mapping[int, Trace] = field(default_factory=dict)
    support: Tuple[float, float] = (0.0, 0.0)

    def trace(self, k: int) -> Trace:
        return self.traces.get(k, ZERO_TRACE)

    def scaled(self, factor: float) -> "PiecewiseFunction":
        tr = {k: Trace(factor * t.left, factor * t.right, factor * t.dleft, factor * t.dright)
              for k, t in self.traces.items()}
        return PiecewiseFunction(tuple(s.scaled(factor) for s in self.segments), tr, self.support)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for s in self.segments:
            mask = (x >= s.a) & (x < s.b)
            out[mask] = s.value(x[mask])
        return out


def _quad(seg, integrand) -> float:
    nodes, weights = seg.quad
    half = 0.5 * (seg.b - seg.a)
    x = seg.a + half * (nodes + 1.0)
    return float(half * np.dot(weights, integrand(x)))


def derive_traces(spec: OperatorSpec, segments: Sequence) -> Dict[int, Trace]:
    """One-sided traces at every partition point touched by the segments."""
    out = {}
    for k in range(1, spec.K + 1):
        x = float(spec.nodes[k])
        left = right = dleft = dright = 0.0
        touched = False
        for s in segments:
            if s.b == x:
                left, dleft = float(s.value(x)), float(s.deriv(x))
                touched = True
            if s.a == x:
                right, dright = float(s.value(x)), float(s.deriv(x))
                touched = True
            if s.a < x < s.b:
                left = right = float(s.value(x))
                dleft = dright = float(s.deriv(x))
                touched = True
        if touched:
            out[k] = Trace(left, right, dleft, dright)
    return out


def make_function(spec: OperatorSpec, segments: Sequence) -> PiecewiseFunction:
    segs = tuple(sorted(segments, key=lambda s: s.a))
    if not segs:
        return PiecewiseFunction((), {}, (0.0, 0.0))
    return PiecewiseFunction(segs, derive_traces(spec, segs), (segs[0].a, segs[-1].b))


# ---------------------------------------------------------------------------
# breakdown of the form
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FormBreakdown:
    dirichlet: float
    potential: float
    jump_plus: float
    jump_minus: float
    total: float

    def as_dict(self) -> dict:
        return {"dirichlet": self.dirichlet, "potential": self.potential, "jump_plus": self.jump_plus,
                "jump_minus": self.jump_minus, "total": self.total}


def _potential_integral(spec: OperatorSpec, seg, weight) -> float:
    """int q * weight(x) over the segment, splitting at potential breakpoints."""
    total = 0.0
    for p in spec.potential.pieces:
        lo, hi = max(p.a, seg.a), min(p.b, seg.b)
        if hi <= lo:
            continue
        if p.c0 == 0.0 and p.c1 == 0.0:
            continue
        nodes, weights = seg.quad
        half = 0.5 * (hi - lo)
        x = lo + half * (nodes + 1.0)
        total += float(half * np.dot(weights, p.at(x) * weight(x)))
    return total


def _check_support(spec: OperatorSpec, f: PiecewiseFunction) -> None:
    lo, hi = f.support
    x_end = float(spec.nodes[-1])
    if f.segments and (lo < 0.0 or hi > x_end * (1 + 1e-15)):
        raise DomainViolation(f"support [{lo}, {hi}] leaves [0, {x_end}]", support=[lo, hi])
    # inside cells the function must be continuous (H^1 away from partition points)
    points = set(float(x) for x in spec.nodes[1:])
    ends = sorted({s.a for s in f.segments} | {s.b for s in f.segments})
    for x in ends:
        if x in points or x == 0.0:
            continue
        left = sum(float(s.value(x)) for s in f.segments if s.b == x)
        right = sum(float(s.value(x)) for s in f.segments if s.a == x)
        scale = 1.0 + abs(left) + abs(right)
        if abs(right - left) > 1e-9 * scale:
            raise DomainViolation(f"discontinuity at x={x}, not a partition point", x=x)


def form_energy(spec: OperatorSpec, f: PiecewiseFunction) -> FormBreakdown:
    """Exact evaluation of the form and its parts."""
    _check_support(spec, f)
    dirichlet = 0.0
    potential = 0.0
    for s in f.segments:
        dirichlet += _quad(s, lambda x, s=s: s.deriv(x) ** 2)
        potential += _potential_integral(spec, s, lambda x, s=s: s.value(x) ** 2)
    plus = minus = 0.0
    for k, tr in sorted(f.traces.items()):
        beta = spec.strengths.values[k - 1]
        jump = tr.jump
        if beta == 0.0:
            if abs(jump) > DOMAIN_TOL * (1.0 + abs(tr.left) + abs(tr.right)):
                raise JumpAtContinuityPoint(f"jump {jump} at continuity point x_{k}", k=k, jump=jump)
            continue
        if math.isinf(beta):
            continue
        if beta > 0:
            plus += jump * jump / beta
        else:
            minus += jump * jump / (-beta)
    total = dirichlet + potential + plus - minus
    return FormBreakdown(dirichlet, potential, plus, minus, total)


def l2_norm_sq(f: PiecewiseFunction) -> float:
    return sum(_quad(s, lambda x, s=s: s.value(x) ** 2) for s in f.segments)


def indicator_form_value(spec: OperatorSpec, k: int) -> float:
    """Closed form of the form on the normalized indicator of cell ``k``.

    There is no interaction at the origin, so the left coupling of cell 1 is 0.
    Returns ``+inf`` when either end is a continuity point.
    """
    if not (1 <= k <= spec.K):
        raise IndexOutOfRange(f"cell index {k} outside 1..{spec.K}", k=k)
    ib = spec.inv_beta
    left = 0.0 if k == 1 else float(ib[k - 2])
    right = float(ib[k - 1])
    d = float(spec.lengths[k - 1])
    return (cell_integrals(spec, k)[0] + left + right) / d


def rayleigh_quotient(spec: OperatorSpec, f: PiecewiseFunction) -> float:
    n2 = l2_norm_sq(f)
    if not n2 > 0.0:
        raise ZeroFunction("function has zero L2 norm")
    return form_energy(spec, f).total / n2


# ---------------------------------------------------------------------------
# named test functions
# ---------------------------------------------------------------------------

def _split(spec: OperatorSpec, a: float, b: float, coeffs_at) -> list:
    """Segments on [a, b] cut at partition points; ``coeffs_at(lo)`` gives local coefficients."""
    cuts = [a] + [float(x) for x in spec.nodes[1:] if a < x < b] + [b]
    return [Segment(lo, hi, tuple(coeffs_at(lo))) for lo, hi in zip(cuts[:-1], cuts[1:])]


def make_test_function(kind: str, params: Mapping) -> PiecewiseFunction:
    """Build a named test function.

    kinds and parameters (``spec`` is always required except for ``cosine``):

    * ``indicator``: ``k`` -- normalized indicator of cell k.
    * ``tent``: ``k``, optional ``width`` (1), ``height`` (1) -- decreasing ramp
      from ``height`` at ``x_k`` to 0 at ``x_k + width``.
    * ``step``: ``i``, ``j`` -- indicator of ``[x_i, x_j]`` (``i = 0`` means the origin).
    * ``ramp``: ``a`` -- ``(a_k/d_k)(x - x_{k-1})`` on cell k for the given ``a_1..a_n``.
    * ``custom``: ``segments`` -- iterable of ``(a, b, coeffs)`` with local coefficients.
    * ``cosine``: ``a``, ``b``, ``freq``, optional ``amp``, ``x0``.
    """
    spec: Optional[OperatorSpec] = params.get("spec")
    if kind == "cosine":
        seg = CosineSegment(float(params["a"]), float(params["b"]), float(params.get("amp", 1.0)),
                            float(params["freq"]), float(params.get("x0", params["a"])))
        if spec is None:
            return PiecewiseFunction((seg,), {}, (seg.a, seg.b))
        return make_function(spec, [seg])
    if kind not in ("indicator", "tent", "step", "ramp", "custom"):
        raise UnsupportedKind(f"unknown test function kind {kind!r}", kind=kind)
    if spec is None:
        raise UnsupportedKind(f"test function {kind!r} needs a spec")
    nodes = spec.nodes
    if kind == "indicator":
        k = int(params["k"])
        lo, hi = spec.cell(k)
        h = 1.0 / math.sqrt(hi - lo)
        return make_function(spec, [Segment(lo, hi, (h,))])
    if kind == "tent":
        k = int(params["k"])
        if not 1 <= k <= spec.K:
            raise IndexOutOfRange(f"point index {k} outside 1..{spec.K}", k=k)
        width = float(params.get("width", 1.0))
        height = float(params.get("height", 1.0))
        a = float(nodes[k])
        slope = -height / width
        return make_function(spec, _split(spec, a, a + width, lambda lo: (height + slope * (lo - a), slope)))
    if kind == "step":
        i, j = int(params["i"]), int(params["j"])
        if not 0 <= i < j <= spec.K:
            raise IndexOutOfRange(f"step needs 0 <= i < j <= {spec.K}", i=i, j=j)
        return make_function(spec, _split(spec, float(nodes[i]), float(nodes[j]), lambda lo: (1.0,)))
    if kind == "ramp":
        a = [float(v) for v in params["a"]]
        if len(a) > spec.K:
            raise IndexOutOfRange("more ramp coefficients than cells", n=len(a))
        segs = []
        for k, ak in enumerate(a, start=1):
            lo, hi = float(nodes[k - 1]), float(nodes[k])
            segs.append(Segment(lo, hi, (0.0, ak / (hi - lo))))
        return make_function(spec, segs)
    segs = [Segment(float(a), float(b), tuple(float(c) for c in coeffs)) for a, b, coeffs in params["segments"]]
    return make_function(spec, segs)


def hermite_segment(a: float, b: float, fa: float, dfa: float, fb: float, dfb: float) -> Segment:
    """Cubic with prescribed values and slopes at both ends."""
    h = b - a
    c2 = (3.0 * (fb - fa) / h - 2.0 * dfa - dfb) / h
    c3 = (dfa + dfb - 2.0 * (fb - fa) / h) / (h * h)
    return Segment(a, b, (fa, dfa, c2, c3))


# ---------------------------------------------------------------------------
# operator/form identity
# ---------------------------------------------------------------------------

def check_domain(spec: OperatorSpec, f: PiecewiseFunction, tol: float = DOMAIN_TOL) -> None:
    """Raise DomainViolation unless ``f`` satisfies every boundary and interface condition."""
    _check_support(spec, f)
    scale = 1.0 + max((abs(t.left) + abs(t.right) + abs(t.dleft) + abs(t.dright)
                       for t in f.traces.values()), default=0.0)
    first = [s for s in f.segments if s.a == 0.0]
    if first and abs(float(first[0].deriv(0.0))) > tol * scale:
        raise DomainViolation("f'(0) != 0", derivative=float(first[0].deriv(0.0)))
    # C^1 across joints that are not partition points
    points = set(float(x) for x in spec.nodes[1:])
    for s in f.segments:
        if s.b in points:
            continue
        nxt = [t for t in f.segments if t.a == s.b]
        dr = float(nxt[0].deriv(s.b)) if nxt else 0.0
        vr = float(nxt[0].value(s.b)) if nxt else 0.0
        if abs(dr - float(s.deriv(s.b))) > tol * scale or abs(vr - float(s.value(s.b))) > tol * scale:
            raise DomainViolation(f"f is not C^1 at x={s.b}", x=s.b)
    for k in range(1, spec.K + 1):
        tr = f.trace(k)
        beta = spec.strengths.values[k - 1]
        if math.isinf(beta):
            if abs(tr.dleft) > tol * scale or abs(tr.dright) > tol * scale:
                raise DomainViolation(f"decoupled point x_{k} needs f'=0 on both sides", k=k)
            continue
        if abs(tr.dright - tr.dleft) > tol * scale:
            raise DomainViolation(f"f' is discontinuous at x_{k}", k=k,
                                  residual=tr.dright - tr.dleft)
        if abs(tr.jump - beta * tr.dleft) > tol * scale:
            raise DomainViolation(f"jump at x_{k} differs from beta_k f'(x_k)", k=k,
                                  residual=tr.jump - beta * tr.dleft)


def operator_pairing(spec: OperatorSpec, f: PiecewiseFunction) -> float:
    """``int (-f'' + q f) f`` over the support."""
    out = 0.0
    for s in f.segments:
        out -= _quad(s, lambda x, s=s: s.deriv(x, 2) * s.value(x))
        out += _potential_integral(spec, s, lambda x, s=s: s.value(x) ** 2)
    return out


def operator_form_identity_check(spec: OperatorSpec, f: PiecewiseFunction) -> float:
    """Return ``|(H f, f) - t[f]|`` for ``f`` in the operator domain."""
    check_domain(spec, f)
    return abs(operator_pairing(spec, f) - form_energy(spec, f).total)
