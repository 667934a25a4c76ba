"""Operator data: partition, interaction strengths, piecewise-affine potential.

An :class:`OperatorSpec` holds a finite truncation ``0 = x_0 < x_1 < ... < x_K``
together with optional tail information (:class:`TailSpec`) describing how the
infinite sequences continue.  Cells are indexed ``k = 1..K`` in the public API,
cell ``k`` being ``[x_{k-1}, x_k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np

from .asymptotics import INF, Series
from .errors import (
    IndexOutOfRange,
    LengthMismatch,
    NonMonotonePartition,
    PieceGap,
    TailMismatch,
)

# Relative slack when matching piece endpoints against each other and the partition.
_SNAP = 1e-12


# ---------------------------------------------------------------------------
# Tail description
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TailPiece:
    """Affine piece ``q = c0 + c1*s`` with ``s`` measured from the piece's left end."""

    length: Series
    c0: Series
    c1: Series = field(default_factory=lambda: Series())


@dataclass(frozen=True)
class TailCell:
    """One cell of a repeating block; ``beta`` is a Series, ``"inf"`` or ``0``."""

    length: Series
    beta: object = "inf"
    pieces: Optional[Tuple[TailPiece, ...]] = None

    @property
    def decoupled(self) -> bool:
        return isinstance(self.beta, str) and self.beta == "inf"

    @property
    def continuous(self) -> bool:
        return not isinstance(self.beta, (Series, str)) and self.beta == 0

    @cached_property
    def inv_beta(self) -> Optional[Series]:
        """1/beta as a series; exact zero when decoupled, None at continuity points."""
        if self.decoupled:
            return Series()
        if self.continuous:
            return None
        return self.beta.reciprocal()


@dataclass(frozen=True)
class TailPattern:
    """Block-periodic description of the tail in terms of a block counter ``j``.

    Block ``j`` consists of ``len(cells)`` consecutive cells whose lengths,
    strengths and potential coefficients are series in ``j``.  ``first_block``
    is the value of ``j`` for the block starting at ``start_cell`` (1-based cell
    index in the truncation); both only matter for evaluating the pattern.
    """

    cells: Tuple[TailCell, ...]
    first_block: int = 1
    start_cell: int = 1
    origin: str = "declared"

    @property
    def period(self) -> int:
        return len(self.cells)

    @property
    def has_potential(self) -> bool:
        return all(c.pieces is not None for c in self.cells)


@dataclass(frozen=True)
class TailSpec:
    """Declared asymptotics of the infinite sequences.

    ``d_limit``, ``beta_coupling_limit`` and ``q_mean_limit`` are declared limits
    (``math.inf`` allowed).  ``c0_sup``/``c1_sup`` are declared suprema over all
    cells.  ``pattern`` is an exact block description used to derive limits.
    """

    d_limit: Optional[float] = None
    d_tolerance: Optional[float] = None
    beta_coupling_limit: Optional[float] = None
    q_mean_limit: Optional[float] = None
    recurrent_lengths: Optional[Tuple[float, ...]] = None
    c0_sup: Optional[float] = None
    c1_sup: Optional[float] = None
    pattern: Optional[TailPattern] = None


# ---------------------------------------------------------------------------
# Finite data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Partition:
    points: Tuple[float, ...]
    tail: Optional[TailSpec] = None


@dataclass(frozen=True)
class Strengths:
    values: Tuple[float, ...]


@dataclass(frozen=True)
class Piece:
    """``q(x) = c0 + c1*x`` on ``[a, b)`` (global coordinate)."""

    a: float
    b: float
    c0: float
    c1: float = 0.0

    def at(self, x):
        return self.c0 + self.c1 * x


@dataclass(frozen=True)
class Potential:
    pieces: Tuple[Piece, ...]

    @classmethod
    def constant(cls, c: float, upto: float) -> "Potential":
        return cls((Piece(0.0, float(upto), float(c), 0.0),))


@dataclass(frozen=True)
class OperatorSpec:
    partition: Partition
    strengths: Strengths
    potential: Potential

    @property
    def K(self) -> int:
        return len(self.partition.points)

    @property
    def tail(self) -> Optional[TailSpec]:
        return self.partition.tail

    @property
    def pattern(self) -> Optional[TailPattern]:
        return None if self.tail is None else self.tail.pattern

    @cached_property
    def nodes(self) -> np.ndarray:
        """``[x_0, x_1, ..., x_K]`` with ``x_0 = 0``."""
        return np.concatenate(([0.0], np.asarray(self.partition.points, dtype=float)))

    @cached_property
    def lengths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @cached_property
    def beta(self) -> np.ndarray:
        return np.asarray(self.strengths.values, dtype=float)

    @cached_property
    def inv_beta(self) -> np.ndarray:
        """1/beta_k with +inf at continuity points (beta_k = 0) and 0 when decoupled."""
        with np.errstate(divide="ignore"):
            out = np.where(self.beta == 0.0, np.inf, 1.0 / self.beta)
        out[np.isinf(self.beta)] = 0.0
        return out

    @cached_property
    def interfaces(self) -> Tuple[int, ...]:
        """1-based indices of genuine interaction points (beta_k != 0)."""
        return tuple(k + 1 for k, b in enumerate(self.strengths.values) if b != 0.0)

    @cached_property
    def cell_pieces(self) -> Tuple[Tuple[Piece, ...], ...]:
        """Potential pieces clipped to each cell (index 0 holds cell 1)."""
        out = []
        pieces = self.potential.pieces
        i = 0
        for k in range(self.K):
            lo, hi = self.nodes[k], self.nodes[k + 1]
            acc = []
            while i < len(pieces) and pieces[i].b <= lo:
                i += 1
            m = i
            while m < len(pieces) and pieces[m].a < hi:
                p = pieces[m]
                acc.append(Piece(max(p.a, lo), min(p.b, hi), p.c0, p.c1))
                if p.b > hi:
                    break
                m += 1
            out.append(tuple(acc))
        return tuple(out)

    def cell(self, k: int) -> Tuple[float, float]:
        _check_index(self, k)
        return float(self.nodes[k - 1]), float(self.nodes[k])

    def q_at(self, x: float) -> float:
        for p in self.potential.pieces:
            if p.a <= x < p.b:
                return p.at(x)
        if x == self.nodes[-1] and self.potential.pieces:
            return self.potential.pieces[-1].at(x)
        raise IndexOutOfRange(f"x={x} outside [0, x_K]", x=x)

    @property
    def is_piecewise_constant(self) -> bool:
        return all(p.c1 == 0.0 for p in self.potential.pieces)


def _check_index(spec: OperatorSpec, k: int) -> None:
    if not (1 <= k <= spec.K):
        raise IndexOutOfRange(f"cell index {k} outside 1..{spec.K}", k=k, K=spec.K)


def build_spec(partition: Partition, strengths: Strengths, potential: Potential) -> OperatorSpec:
    """Validate the triple and return an immutable spec.

    Potential pieces are clipped to ``[0, x_K)`` and split at every partition
    point, so that each piece lies in a single cell.
    """
    pts = tuple(float(x) for x in partition.points)
    if not pts:
        raise NonMonotonePartition("partition needs at least one point")
    if any(not math.isfinite(x) for x in pts):
        raise NonMonotonePartition("partition points must be finite")
    prev = 0.0
    for i, x in enumerate(pts):
        if not x > prev:
            raise NonMonotonePartition(
                f"x_{i + 1}={x} does not exceed x_{i}={prev}", index=i + 1, value=x)
        prev = x
    vals = tuple(float(b) for b in strengths.values)
    if len(vals) != len(pts):
        raise LengthMismatch(
            f"{len(vals)} strengths for {len(pts)} points", strengths=len(vals), points=len(pts))
    for i, b in enumerate(vals):
        if math.isnan(b) or b == -math.inf:
            raise LengthMismatch(f"beta_{i + 1}={b} is not in R or +inf", index=i + 1)
    x_end = pts[-1]
    pieces = _tile(potential.pieces, pts, x_end)
    tail = partition.tail
    spec = OperatorSpec(Partition(pts, tail), Strengths(vals), Potential(pieces))
    if tail is not None:
        _validate_tail(spec, tail)
    return spec


def _tile(pieces: Sequence[Piece], pts: Sequence[float], x_end: float) -> Tuple[Piece, ...]:
    ordered = sorted(pieces, key=lambda p: p.a)
    tol = _SNAP * max(1.0, x_end)
    if not ordered:
        raise PieceGap("potential has no pieces")
    cursor = 0.0
    clipped = []
    for p in ordered:
        if p.b <= p.a:
            raise PieceGap(f"empty piece [{p.a}, {p.b})", a=p.a, b=p.b)
        if cursor >= x_end:
            break
        if abs(p.a - cursor) > tol:
            kind = "gap" if p.a > cursor else "overlap"
            raise PieceGap(f"potential pieces leave a {kind} at x={cursor}", x=cursor)
        b = min(p.b, x_end)
        if b > cursor:
            clipped.append(Piece(cursor, b, float(p.c0), float(p.c1)))
        cursor = max(cursor, p.b)
    if cursor < x_end - tol:
        raise PieceGap(f"potential pieces end at {cursor} before x_K={x_end}", x=cursor)
    last = clipped[-1]
    clipped[-1] = Piece(last.a, x_end, last.c0, last.c1)
    # split at partition points
    cuts = list(pts)
    out = []
    ci = 0
    for p in clipped:
        a = p.a
        while ci < len(cuts) and cuts[ci] <= a + tol:
            ci += 1
        while ci < len(cuts) and cuts[ci] < p.b - tol:
            out.append(Piece(a, cuts[ci], p.c0, p.c1))
            a = cuts[ci]
            ci += 1
        out.append(Piece(a, p.b, p.c0, p.c1))
    # snap piece endpoints onto partition points exactly
    nodes = [0.0] + list(pts)
    snapped = []
    for p in out:
        a, b = _snap(p.a, nodes, tol), _snap(p.b, nodes, tol)
        if b > a:
            snapped.append(Piece(a, b, p.c0, p.c1))
    return tuple(snapped)


def _snap(x: float, nodes: Sequence[float], tol: float) -> float:
    i = int(np.searchsorted(nodes, x))
    for m in (i - 1, i):
        if 0 <= m < len(nodes) and abs(nodes[m] - x) <= tol:
            return nodes[m]
    return x


def _validate_tail(spec: OperatorSpec, tail: TailSpec) -> None:
    d = spec.lengths
    if tail.d_limit is not None and tail.d_tolerance is not None and math.isfinite(tail.d_limit):
        m = max(1, len(d) // 10)
        worst = float(np.max(np.abs(d[-m:] - tail.d_limit)))
        if worst > tail.d_tolerance:
            raise TailMismatch(
                f"last cells deviate from declared d_limit by {worst}",
                d_limit=tail.d_limit, tolerance=tail.d_tolerance, deviation=worst)
    if tail.recurrent_lengths:
        d_sup = extent_stats(spec)[1]
        for r in tail.recurrent_lengths:
            if not (0 < r <= d_sup):
                raise TailMismatch(f"recurrent length {r} outside (0, d^*]", length=r)


# ---------------------------------------------------------------------------
# Per-cell quantities
# ---------------------------------------------------------------------------

def piece_parts(q_a: float, q_b: float, length: float) -> Tuple[float, float]:
    """Exact ``(int q_-, int q_+)`` of an affine function with end values q_a, q_b."""
    if q_a >= 0.0 and q_b >= 0.0:
        return 0.0, 0.5 * (q_a + q_b) * length
    if q_a <= 0.0 and q_b <= 0.0:
        return -0.5 * (q_a + q_b) * length, 0.0
    span = abs(q_b - q_a)
    neg = q_a if q_a < 0.0 else q_b
    pos = q_b if q_a < 0.0 else q_a
    return length * neg * neg / (2.0 * span), length * pos * pos / (2.0 * span)


def cell_integrals(spec: OperatorSpec, k: int) -> Tuple[float, float, float, float]:
    """``(int q, int q_-, int q_+, int |q|)`` over cell ``k``."""
    _check_index(spec, k)
    minus = plus = 0.0
    for p in spec.cell_pieces[k - 1]:
        m, pl = piece_parts(p.at(p.a), p.at(p.b), p.b - p.a)
        minus += m
        plus += pl
    return plus - minus, minus, plus, plus + minus


@dataclass(frozen=True)
class ExtentStats:
    d_inf: float
    d_sup: float
    nonincreasing: bool
    nondecreasing: bool
    source: str

    def __iter__(self):
        return iter((self.d_inf, self.d_sup, {"nonincreasing": self.nonincreasing,
                                              "nondecreasing": self.nondecreasing}))

    def __getitem__(self, i):
        return tuple(self)[i]


def extent_stats(spec: OperatorSpec) -> ExtentStats:
    """``(d_*, d^*)`` over the truncation combined with tail information."""
    d = spec.lengths
    lo, hi = float(d.min()), float(d.max())
    source = "truncation"
    tail = spec.tail
    if tail is not None and tail.d_limit is not None:
        lo, hi = min(lo, tail.d_limit), max(hi, tail.d_limit)
        source = "declaration"
    elif tail is not None and tail.pattern is not None:
        lims = [c.length.limit() for c in tail.pattern.cells]
        if all(v is not None for v in lims):
            lo = min([lo] + [float(v) for v in lims])
            hi = max([hi] + [float(v) for v in lims])
            source = "pattern"
    diffs = np.diff(d)
    return ExtentStats(lo, hi, bool(np.all(diffs <= 0)), bool(np.all(diffs >= 0)), source)


def pattern_cells(pattern: TailPattern, blocks: int, j0: Optional[int] = None):
    """Evaluate ``blocks`` consecutive blocks: yields ``(length, beta, pieces)`` per cell.

    ``pieces`` is a list of ``(length, c0, c1)`` in local coordinates or None.
    """
    j_start = pattern.first_block if j0 is None else j0
    for j in range(j_start, j_start + blocks):
        for c in pattern.cells:
            if c.decoupled:
                beta = INF
            elif c.continuous:
                beta = 0.0
            else:
                beta = c.beta(j)
            pcs = None
            if c.pieces is not None:
                pcs = [(p.length(j), p.c0(j), p.c1(j)) for p in c.pieces]
            yield c.length(j), beta, pcs


def truncate(spec: OperatorSpec, xmax: Optional[float] = None, K: Optional[int] = None) -> OperatorSpec:
    """Keep the cells ending at or before ``xmax`` (or the first ``K`` cells)."""
    n = spec.K
    if K is not None:
        n = min(n, int(K))
    if xmax is not None:
        n = min(n, int(np.searchsorted(spec.nodes[1:], xmax * (1 + 1e-14), side="right")))
    if n < 1:
        raise IndexOutOfRange("truncation keeps no cell", xmax=xmax, K=K)
    if n == spec.K:
        return spec
    x_end = float(spec.nodes[n])
    pieces = tuple(p for p in spec.potential.pieces if p.a < x_end)
    return OperatorSpec(Partition(spec.partition.points[:n], spec.tail),
                        Strengths(spec.strengths.values[:n]),
                        Potential(pieces[:-1] + (Piece(pieces[-1].a, x_end, pieces[-1].c0, pieces[-1].c1),)))
