"""Three-valued evaluation of semiboundedness, discreteness and
essential-spectrum conditions.

Every condition is a statement about an infinite sequence, so a verdict is
only ``Holds`` or ``Fails`` when the tail is pinned down: either by an explicit
declaration in :class:`~dspec.model.TailSpec` or by an exact block pattern
whose terms are :class:`~dspec.asymptotics.Series` in the block counter.  The
finite truncation supplies witnesses and trend evidence, never the decision
itself (the one exception is the plateau rule for suprema, see
:func:`sup_C0`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .asymptotics import INF, Series, ext_max, fmt_limit
from .forms import make_test_function, rayleigh_quotient
from .model import OperatorSpec, cell_integrals, extent_stats, piece_parts

HOLDS = "Holds"
FAILS = "Fails"
INCONCLUSIVE = "Inconclusive"

DEFAULT_EPSILONS = (Fraction(1), Fraction(1, 2), Fraction(1, 4), Fraction(1, 8))

CONDITIONS = ("C0_finite", "C1_finite", "molchanov", "mean_q_divergence", "combined_divergence",
              "coupling_vanishes", "q_mean_vanishes", "nec_inf_b", "nec_1", "nec_2", "nec_3")
THEOREMS = ("semibounded", "self_adjoint", "discrete", "ess_spectrum_transfer", "ess_equals_free_N",
            "negative_discrete", "h_stable")


@dataclass(frozen=True)
class Verdict:
    status: str
    witness: Optional[dict] = None
    evidence: dict = field(default_factory=dict)
    source: str = ""
    reason: str = ""

    def __post_init__(self):
        if self.status == FAILS and self.witness is None:
            raise ValueError("a failing verdict needs a witness")
        if self.status == INCONCLUSIVE and not self.reason:
            raise ValueError("an inconclusive verdict needs a reason")

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    @property
    def fails(self) -> bool:
        return self.status == FAILS

    def as_dict(self) -> dict:
        out = {"status": self.status, "source": self.source}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.evidence:
            out["evidence"] = self.evidence
        if self.reason:
            out["reason"] = self.reason
        return out


def _holds(source: str, **evidence) -> Verdict:
    return Verdict(HOLDS, None, evidence, source)


def _fails(source: str, witness: dict, **evidence) -> Verdict:
    return Verdict(FAILS, witness, evidence, source)


def _unknown(reason: str, source: str = "", **evidence) -> Verdict:
    return Verdict(INCONCLUSIVE, None, evidence, source, reason)


def _safe(fn: Callable):
    try:
        return fn()
    except ZeroDivisionError:
        return None


def _jsonable(x):
    if isinstance(x, Fraction):
        return fmt_limit(x)
    if isinstance(x, float) and math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    return x


# ---------------------------------------------------------------------------
# per-cell sequences over the truncation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CellSequences:
    """Numeric per-cell sequences of the truncation (index 0 is cell 1)."""

    d: np.ndarray
    d_next: np.ndarray
    int_q: np.ndarray
    int_neg: np.ndarray
    int_abs: np.ndarray
    inv_beta: np.ndarray        # +inf at continuity points, 0 when decoupled
    inv_beta_prev: np.ndarray

    @property
    def min_adjacent(self) -> np.ndarray:
        return np.minimum(self.d, self.d_next)

    @property
    def neg_inv_beta(self) -> np.ndarray:
        ib = self.inv_beta
        return np.where(np.isfinite(ib) & (ib < 0), -ib, 0.0)

    def c0_terms(self) -> np.ndarray:
        return self.int_neg / self.d

    def c1_terms(self) -> np.ndarray:
        return self.neg_inv_beta / self.min_adjacent

    def mean_q(self) -> np.ndarray:
        return self.int_q / self.d

    def mean_abs_q(self) -> np.ndarray:
        return self.int_abs / self.d

    def combined(self) -> np.ndarray:
        return (self.int_q + self.inv_beta_prev + self.inv_beta) / self.d

    def coupling(self) -> np.ndarray:
        return np.abs(self.inv_beta) / self.min_adjacent


def cell_sequences(spec: OperatorSpec) -> CellSequences:
    K = spec.K
    ints = np.array([cell_integrals(spec, k) for k in range(1, K + 1)])
    d = spec.lengths.astype(float)
    nxt = _pattern_value(spec, K + 1)
    d_next = np.concatenate((d[1:], [nxt if nxt is not None else d[-1]]))
    ib = spec.inv_beta.astype(float)
    return CellSequences(d, d_next, ints[:, 0], ints[:, 1], ints[:, 3], ib,
                         np.concatenate(([0.0], ib[:-1])))


def _pattern_value(spec: OperatorSpec, k: int) -> Optional[float]:
    pat = spec.pattern
    if pat is None or k < pat.start_cell:
        return None
    r = (k - pat.start_cell) % pat.period
    j = pat.first_block + (k - pat.start_cell) // pat.period
    return pat.cells[r].length(j)


def _trend(values: np.ndarray) -> dict:
    v = np.asarray(values, dtype=float)
    n = v.size
    tail = v[-max(1, n // 10):]
    return {"K": int(n), "last": _jsonable(float(v[-1])),
            "last_decile_max": _jsonable(float(tail.max())),
            "last_decile_min": _jsonable(float(tail.min()))}


# ---------------------------------------------------------------------------
# asymptotic sequences from an exact block pattern
# ---------------------------------------------------------------------------

@dataclass
class _Residue:
    length: Series
    next_length: Series
    inv_beta: Optional[Series]          # None at continuity points
    inv_beta_prev: Optional[Series]
    pieces: Optional[List[Tuple[Series, Series, Series]]]   # (length, left value, right value)
    int_q: Optional[Series]
    int_neg: Optional[Series]


def _neg_part_integral(length: Series, a: Series, b: Series) -> Optional[Series]:
    sa, sb = a.sign(), b.sign()
    if sa is None or sb is None:
        return None
    if sa >= 0 and sb >= 0:
        return Series()
    if sa <= 0 and sb <= 0:
        return -(a + b) * length * Fraction(1, 2)
    neg = a if sa < 0 else b
    span = (b - a) if sb > sa else (a - b)
    return _safe(lambda: neg * neg * length / (span * 2))


def _residues(spec: OperatorSpec) -> Optional[List[_Residue]]:
    pat = spec.pattern
    if pat is None:
        return None
    p = pat.period
    out = []
    for r, cell in enumerate(pat.cells):
        nxt = pat.cells[r + 1].length if r + 1 < p else pat.cells[0].length.shift(1)
        prev = pat.cells[r - 1].inv_beta if r > 0 else pat.cells[p - 1].inv_beta
        if r == 0 and prev is not None:
            prev = prev.shift(-1)
        pieces = int_q = int_neg = None
        if cell.pieces is not None:
            pieces = [(tp.length, tp.c0, tp.c0 + tp.c1 * tp.length) for tp in cell.pieces]
            int_q = sum(((a + b) * ell * Fraction(1, 2) for ell, a, b in pieces), Series())
            negs = [_neg_part_integral(ell, a, b) for ell, a, b in pieces]
            int_neg = None if any(x is None for x in negs) else sum(negs, Series())
        out.append(_Residue(cell.length, nxt, cell.inv_beta, prev, pieces, int_q, int_neg))
    return out


def _neg_series(s: Series) -> Optional[Series]:
    sg = s.sign()
    if sg is None:
        return None
    return -s if sg < 0 else Series()


def _abs_series(s: Series) -> Optional[Series]:
    sg = s.sign()
    if sg is None:
        return None
    return -s if sg < 0 else s


def _ratio_limit(num: Optional[Series], den: Series):
    if num is None:
        return None
    q = _safe(lambda: num / den)
    return None if q is None else q.limit()


def _over_min_limit(num: Optional[Series], res: _Residue):
    """Limit of ``num / min(d_k, d_{k+1})`` for a nonnegative numerator."""
    if num is None:
        return None
    return ext_max([_ratio_limit(num, res.length), _ratio_limit(num, res.next_length)])


# residue-wise limit functions; INF stands for sequences that are +inf termwise
def _lim_c0(res: _Residue):
    return _ratio_limit(res.int_neg, res.length)


def _lim_c1(res: _Residue):
    if res.inv_beta is None:
        return Fraction(0)
    return _over_min_limit(_neg_series(res.inv_beta), res)


def _lim_mean_q(res: _Residue):
    return _ratio_limit(res.int_q, res.length)


def _lim_mean_abs(res: _Residue):
    if res.int_q is None or res.int_neg is None:
        return None
    return _ratio_limit(res.int_q + res.int_neg * 2, res.length)


def _lim_combined(res: _Residue):
    if res.inv_beta is None or res.inv_beta_prev is None:
        return INF
    if res.int_q is None:
        return None
    return _ratio_limit(res.int_q + res.inv_beta_prev + res.inv_beta, res.length)


def _lim_coupling(res: _Residue):
    if res.inv_beta is None:
        return INF
    return _over_min_limit(_abs_series(res.inv_beta), res)


def _lim_length(res: _Residue):
    return res.length.limit()


# ---------------------------------------------------------------------------
# generic limit verdicts
# ---------------------------------------------------------------------------

def _residue_witness(spec: OperatorSpec, r: int, limit, seq: np.ndarray) -> dict:
    pat = spec.pattern
    w = {"residue": r, "period": pat.period, "limit": _jsonable(limit),
         "subsequence": f"k = {pat.start_cell + r} + {pat.period}*n"}
    ks = [k for k in range(pat.start_cell + r, spec.K + 1, pat.period)]
    if ks:
        w["k"] = ks[-1]
        w["value"] = _jsonable(float(seq[ks[-1] - 1]))
    return w


def _pattern_limits(spec: OperatorSpec, fn) -> Optional[list]:
    res = _residues(spec)
    if res is None:
        return None
    return [fn(r) for r in res]


def _limit_verdict(spec: OperatorSpec, seq: np.ndarray, fn, target: str) -> Verdict:
    """Decide ``lim seq = +inf`` (target "inf") or ``lim seq = 0`` (target "zero")."""
    evidence = _trend(seq)
    lims = _pattern_limits(spec, fn)
    if lims is None:
        return _unknown("no tail declaration or pattern decides the limit", "truncation", **evidence)
    evidence["residue_limits"] = [_jsonable(x) for x in lims]
    want = INF if target == "inf" else Fraction(0)
    for r, lim in enumerate(lims):
        if lim is not None and lim != want:
            return _fails("pattern", _residue_witness(spec, r, lim, seq), **evidence)
    if all(lim == want for lim in lims):
        return _holds("pattern", **evidence)
    return _unknown("the pattern leaves a residue limit undecided", "pattern", **evidence)


def _sup_verdict(spec: OperatorSpec, seq: np.ndarray, fn, declared: Optional[float],
                 name: str) -> Verdict:
    value = float(np.max(seq))
    evidence = {"value": _jsonable(value), **_trend(seq)}
    if declared is not None:
        evidence["declared"] = _jsonable(declared)
        if math.isinf(declared):
            return _fails(f"declaration:{name}", {"declared": "+inf"}, **evidence)
        return _holds(f"declaration:{name}", **evidence)
    if not math.isfinite(value):
        k = int(np.argmax(seq)) + 1
        return _fails("truncation", {"k": k, "value": "+inf"}, **evidence)
    lims = _pattern_limits(spec, fn)
    if lims is not None:
        evidence["residue_limits"] = [_jsonable(x) for x in lims]
        for r, lim in enumerate(lims):
            if lim == INF:
                return _fails("pattern", _residue_witness(spec, r, lim, seq), **evidence)
        if all(lim is not None for lim in lims):
            return _holds("pattern", **evidence)
        return _unknown("the pattern leaves a residue limit undecided", "pattern", **evidence)
    n = seq.size
    if n >= 2 and float(np.max(seq[n // 2:])) <= float(np.max(seq[:n // 2])):
        return _holds("truncation (plateau)", **evidence)
    return _unknown("no declaration and the truncated sequence does not plateau", "truncation",
                    **evidence)


# ---------------------------------------------------------------------------
# individual conditions
# ---------------------------------------------------------------------------

def sup_C0(spec: OperatorSpec) -> Tuple[float, Verdict]:
    """``sup_k (1/d_k) int q_-`` and whether it is finite.

    Without tail information a supremum counts as finite when the second half
    of the truncation does not exceed the first half (plateau rule).
    """
    seq = cell_sequences(spec).c0_terms()
    tail = spec.tail
    v = _sup_verdict(spec, seq, _lim_c0, None if tail is None else tail.c0_sup, "c0_sup")
    return float(np.max(seq)), v


def sup_C1(spec: OperatorSpec) -> Tuple[float, Verdict]:
    """``sup_k (1/beta_k)_- / min(d_k, d_{k+1})`` and whether it is finite."""
    seq = cell_sequences(spec).c1_terms()
    tail = spec.tail
    v = _sup_verdict(spec, seq, _lim_c1, None if tail is None else tail.c1_sup, "c1_sup")
    return float(np.max(seq)), v


def sup_mean_abs_q(spec: OperatorSpec) -> Tuple[float, Verdict]:
    seq = cell_sequences(spec).mean_abs_q()
    return float(np.max(seq)), _sup_verdict(spec, seq, _lim_mean_abs, None, "q_abs_sup")


def check_mean_q_divergence(spec: OperatorSpec) -> Verdict:
    return _limit_verdict(spec, cell_sequences(spec).mean_q(), _lim_mean_q, "inf")


def check_combined_divergence(spec: OperatorSpec) -> Verdict:
    return _limit_verdict(spec, cell_sequences(spec).combined(), _lim_combined, "inf")


def _declared_limit_verdict(declared: float, name: str, seq: np.ndarray) -> Verdict:
    evidence = {"declared": _jsonable(declared), **_trend(seq)}
    if declared == 0:
        return _holds(f"declaration:{name}", **evidence)
    return _fails(f"declaration:{name}", {"declared": _jsonable(declared)}, **evidence)


def check_coupling_vanishes(spec: OperatorSpec) -> Verdict:
    """``|beta_k|^{-1} / min(d_k, d_{k+1}) -> 0``; continuity points count as ``+inf``."""
    seq = cell_sequences(spec).coupling()
    tail = spec.tail
    if tail is not None and tail.beta_coupling_limit is not None:
        return _declared_limit_verdict(tail.beta_coupling_limit, "beta_coupling_limit", seq)
    return _limit_verdict(spec, seq, _lim_coupling, "zero")


def check_negative_coupling_vanishes(spec: OperatorSpec) -> Verdict:
    """``(1/beta_k)_- / min(d_k, d_{k+1}) -> 0``."""
    return _limit_verdict(spec, cell_sequences(spec).c1_terms(), _lim_c1, "zero")


def check_q_mean_vanishes(spec: OperatorSpec) -> Verdict:
    seq = cell_sequences(spec).mean_abs_q()
    tail = spec.tail
    if tail is not None and tail.q_mean_limit is not None:
        return _declared_limit_verdict(tail.q_mean_limit, "q_mean_limit", seq)
    return _limit_verdict(spec, seq, _lim_mean_abs, "zero")


def check_negative_q_mean_vanishes(spec: OperatorSpec) -> Verdict:
    return _limit_verdict(spec, cell_sequences(spec).c0_terms(), _lim_c0, "zero")


def check_finite_extent(spec: OperatorSpec) -> Verdict:
    """``d^* < inf`` from declarations or the pattern."""
    tail = spec.tail
    stats = extent_stats(spec)
    evidence = {"d_inf": stats.d_inf, "d_sup": stats.d_sup}
    if tail is not None and tail.d_limit is not None:
        if math.isinf(tail.d_limit):
            return _fails("declaration:d_limit", {"declared": "+inf"}, **evidence)
        return _holds("declaration:d_limit", **evidence)
    if tail is not None and tail.recurrent_lengths and tail.pattern is None:
        return _unknown("recurrent lengths alone do not bound the cell lengths", "declaration",
                        **evidence)
    lims = _pattern_limits(spec, _lim_length)
    if lims is None:
        return _unknown("no tail information on the cell lengths", "truncation", **evidence)
    if any(x == INF for x in lims):
        return _fails("pattern", {"limit": "+inf"}, **evidence)
    if all(x is not None for x in lims):
        return _holds("pattern", **evidence)
    return _unknown("the pattern leaves a length limit undecided", "pattern", **evidence)


# ---------------------------------------------------------------------------
# window integrals of the potential
# ---------------------------------------------------------------------------

def window_integral(spec: OperatorSpec, x: float, width: float, part: str = "q") -> float:
    """``int_x^{x+width}`` of ``q`` (``part="q"``) or of ``q_-`` (``part="neg"``)."""
    lo, hi = x, x + width
    total = 0.0
    for p in spec.potential.pieces:
        a, b = max(p.a, lo), min(p.b, hi)
        if b <= a:
            continue
        qa, qb = p.at(a), p.at(b)
        if part == "q":
            total += 0.5 * (qa + qb) * (b - a)
        else:
            total += piece_parts(qa, qb, b - a)[0]
    return total


def _neg_breaks(spec: OperatorSpec) -> List[float]:
    pts = []
    for p in spec.potential.pieces:
        pts += [p.a, p.b]
        if p.c1 != 0.0:
            z = -p.c0 / p.c1
            if p.a < z < p.b:
                pts.append(z)
    return sorted(set(pts))


@dataclass(frozen=True)
class WindowSup:
    value: float
    x: float
    width: float
    tail_value: float
    tail_from: float


def window_sup(spec: OperatorSpec, width: float = 1.0, part: str = "neg",
               tail_from: Optional[float] = None) -> WindowSup:
    """Supremum over ``x in [0, x_K - width]`` of the window integral.

    The integrand is affine between consecutive breakpoints of ``q_-`` (or
    ``q``), so the window integral is piecewise quadratic in ``x`` and its
    maximum sits at a breakpoint-aligned position or at a zero of its
    derivative ``g(x + width) - g(x)``, all of which are enumerated.
    ``tail_value`` is the same supremum restricted to ``x >= tail_from``
    (default: the midpoint of the truncation).
    """
    x_end = float(spec.nodes[-1])
    top = x_end - width
    if top < 0:
        raise ValueError("window wider than the truncation")
    breaks = _neg_breaks(spec)
    cand = {0.0, top}
    for b in breaks:
        for c in (b, b - width):
            if 0.0 <= c <= top:
                cand.add(c)
    cs = sorted(cand)

    def g(t: float) -> float:
        v = spec.q_at(min(t, x_end))
        return max(-v, 0.0) if part == "neg" else v

    extra = []
    for c0, c1 in zip(cs[:-1], cs[1:]):
        eps = 1e-12 * max(1.0, abs(c1))
        d0 = g(c0 + width + eps) - g(c0 + eps)
        d1 = g(c1 + width - eps) - g(c1 - eps)
        if d0 > 0.0 > d1:
            extra.append(c0 + (c1 - c0) * d0 / (d0 - d1))
    cs = sorted(set(cs) | set(extra))
    vals = np.array([window_integral(spec, c, width, part) for c in cs])
    i = int(np.argmax(vals))
    start = 0.5 * top if tail_from is None else tail_from
    mask = np.array(cs) >= start
    tail_val = float(vals[mask].max()) if mask.any() else float("nan")
    return WindowSup(float(vals[i]), float(cs[i]), width, tail_val, start)


# ---------------------------------------------------------------------------
# Molchanov windows from the pattern
# ---------------------------------------------------------------------------

POS, BDD, NEG = "pos", "bounded", "neg"


def _classify(a: Series, b: Series) -> Optional[str]:
    la, lb = a.limit(), b.limit()
    if la is None or lb is None:
        return None
    if min(la, lb) == INF:
        return POS
    if max(la, lb) == -INF:
        return NEG
    if abs(la) != INF and abs(lb) != INF:
        return BDD
    return None


def _min_pos_measure(lengths: Sequence[Fraction], classes: Sequence[str], eps: Fraction) -> Fraction:
    """Least measure of positive pieces in a window of width ``eps`` (periodic pattern)."""
    T = sum(lengths, Fraction(0))
    starts, acc = [], Fraction(0)
    for ell in lengths:
        starts.append(acc)
        acc += ell
    reps = int(eps // T) + 2

    def pos_measure(x: Fraction) -> Fraction:
        lo, hi = x, x + eps
        m = Fraction(0)
        for rep in range(-1, reps + 1):
            off = rep * T
            for s, ell, cls in zip(starts, lengths, classes):
                if cls != POS:
                    continue
                a, b = max(s + off, lo), min(s + off + ell, hi)
                if b > a:
                    m += b - a
        return m

    cands = set()
    for s in starts + [T]:
        cands.add(s % T)
        cands.add((s - eps) % T)
    return min(pos_measure(c) for c in cands)


def _molchanov_one(spec: OperatorSpec, eps: Fraction) -> Verdict:
    pat = spec.pattern
    if pat is None or not pat.has_potential:
        return _unknown("no pattern describes the potential on the tail", "truncation")
    pieces = []   # (residue, index, length, left, right)
    for r, cell in enumerate(pat.cells):
        for i, tp in enumerate(cell.pieces):
            pieces.append((r, i, tp.length, tp.c0, tp.c0 + tp.c1 * tp.length))
    classes = [_classify(a, b) for *_, a, b in pieces]
    if any(c is None for c in classes):
        return _unknown("a pattern piece has no decided growth class", "pattern")
    lims = [ell.limit() for _, _, ell, _, _ in pieces]
    if any(x is None or x == INF for x in lims):
        return _unknown("a pattern piece length has no finite limit", "pattern")
    n = len(pieces)
    evidence = {"classes": classes}

    if all(x == 0 for x in lims):
        if all(c == POS for c in classes):
            return _holds("pattern", **evidence)
        if all(c == BDD for c in classes):
            return _fails("pattern", {"epsilon": str(eps), "reason": "bounded potential"}, **evidence)
        return _unknown("cells shrink to zero with mixed growth classes", "pattern", **evidence)

    if all(c != POS for c in classes):
        return _fails("pattern", {"epsilon": str(eps), "reason": "no piece grows to +inf",
                                  **_run_location(spec, pieces, 0, eps)}, **evidence)
    # cyclic runs of non-growing pieces
    first_pos = classes.index(POS)
    i = 0
    while i < n:
        idx = (first_pos + i) % n
        if classes[idx] == POS:
            i += 1
            continue
        run = []
        while i < n and classes[(first_pos + i) % n] != POS:
            run.append((first_pos + i) % n)
            i += 1
        total = Series()
        for m in run:
            ell = pieces[m][2]
            total = total + (ell.shift(1) if m < run[0] else ell)
        sg = (total - Series.const(eps)).sign()
        if sg is not None and sg >= 0:
            w = {"epsilon": str(eps), "run": [f"cell residue {pieces[m][0]}, piece {pieces[m][1]}" for m in run],
                 "run_length_limit": _jsonable(total.limit())}
            w.update(_run_location(spec, pieces, run[0], eps))
            return _fails("pattern", w, **evidence)
    if NEG in classes:
        return _unknown("pieces tending to -inf are present", "pattern", **evidence)
    mu = _min_pos_measure([Fraction(x) for x in lims], classes, eps)
    evidence["min_growing_measure"] = str(mu)
    if mu > 0:
        return _holds("pattern", **evidence)
    return _unknown("windows of this width may miss every growing piece", "pattern", **evidence)


def _run_location(spec: OperatorSpec, pieces, m: int, eps: Fraction) -> dict:
    """Last position in the truncation where piece ``m`` of the pattern starts."""
    pat = spec.pattern
    r, i = pieces[m][0], pieces[m][1]
    x_end = float(spec.nodes[-1])
    best = None
    for k in range(pat.start_cell + r, spec.K + 1, pat.period):
        j = pat.first_block + (k - pat.start_cell) // pat.period
        x = float(spec.nodes[k - 1]) + sum(pat.cells[r].pieces[t].length(j) for t in range(i))
        if x + float(eps) <= x_end:
            best = x
    if best is None:
        return {}
    return {"x": best, "window_integral": window_integral(spec, best, float(eps))}


def check_molchanov(spec: OperatorSpec, epsilons: Sequence = DEFAULT_EPSILONS) -> Verdict:
    """``int_x^{x+eps} q -> +inf`` for every listed ``eps``; one failing width suffices."""
    per = {}
    failing = None
    for e in epsilons:
        eps = Fraction(e) if not isinstance(e, float) else Fraction(repr(e))
        v = _molchanov_one(spec, eps)
        per[str(eps)] = v
        if v.fails and failing is None:
            failing = v
    evidence = {"per_epsilon": {k: v.status for k, v in per.items()}}
    if failing is not None:
        return _fails(failing.source, failing.witness, **evidence)
    if all(v.holds for v in per.values()):
        return _holds("pattern", **evidence)
    reasons = sorted({v.reason for v in per.values() if v.reason})
    return _unknown("; ".join(reasons), "pattern", **evidence)


def molchanov_by_epsilon(spec: OperatorSpec, epsilons: Sequence = DEFAULT_EPSILONS) -> Dict[str, Verdict]:
    return {str(Fraction(e)): _molchanov_one(spec, Fraction(e)) for e in epsilons}


def q_bounded(spec: OperatorSpec) -> Verdict:
    """Whether ``q`` stays bounded on the tail (every pattern piece has finite limits)."""
    pat = spec.pattern
    if pat is None or not pat.has_potential:
        return _unknown("no pattern describes the potential on the tail", "truncation")
    classes = [_classify(tp.c0, tp.c0 + tp.c1 * tp.length) for c in pat.cells for tp in c.pieces]
    if all(c == BDD for c in classes):
        return _holds("pattern")
    if any(c in (POS, NEG) for c in classes):
        return _fails("pattern", {"classes": classes})
    return _unknown("a pattern piece has no decided growth class", "pattern")


def q_nonnegative(spec: OperatorSpec) -> Verdict:
    """``q >= 0`` on the truncation and eventually on every pattern piece."""
    for p in spec.potential.pieces:
        if min(p.at(p.a), p.at(p.b)) < 0:
            return _fails("truncation", {"x": p.a if p.at(p.a) < 0 else p.b})
    pat = spec.pattern
    if pat is None or not pat.has_potential:
        return _unknown("no pattern describes the potential on the tail", "truncation")
    signs = [(tp.c0.sign(), (tp.c0 + tp.c1 * tp.length).sign()) for c in pat.cells for tp in c.pieces]
    if all(a is not None and b is not None and a >= 0 and b >= 0 for a, b in signs):
        return _holds("pattern")
    if any(a is not None and a < 0 or b is not None and b < 0 for a, b in signs):
        return _fails("pattern", {"signs": [list(s) for s in signs]})
    return _unknown("the sign of a pattern piece is undecided", "pattern")


# ---------------------------------------------------------------------------
# necessary conditions for semiboundedness
# ---------------------------------------------------------------------------

def _tent_potential(spec: OperatorSpec, a: float) -> float:
    """``int q f^2`` for the unit tent ``f = 1 - (x - a)`` on ``[a, a + 1]``."""
    total = 0.0
    for p in spec.potential.pieces:
        lo, hi = max(p.a, a), min(p.b, a + 1.0)
        if hi <= lo:
            continue
        # integrate (c0 + c1 x)(1 - (x - a))^2 exactly via substitution t = x - a
        c0, c1 = p.c0 + p.c1 * a, p.c1
        F = lambda t: c0 * (t - t * t + t ** 3 / 3) + c1 * (t * t / 2 - 2 * t ** 3 / 3 + t ** 4 / 4)  # noqa: E731
        total += F(hi - a) - F(lo - a)
    return total


def _step_energy(spec: OperatorSpec, a: int, b: int, cum_q: np.ndarray) -> Optional[float]:
    """Form value of the indicator of ``[x_a, x_b]``; None if an end is a continuity point."""
    ib = spec.inv_beta
    left = 0.0 if a == 0 else float(ib[a - 1])
    right = float(ib[b - 1])
    if not (math.isfinite(left) and math.isfinite(right)):
        return None
    return float(cum_q[b] - cum_q[a]) + left + right


def _nec_result(name: str, violations: list, checked: int, C: float, note: str = "") -> Verdict:
    evidence = {"checked": checked, "C": C}
    if note:
        evidence["note"] = note
    if violations:
        worst = max(violations, key=lambda v: v["excess"])
        return _fails("truncation", {**worst, "violations": len(violations)}, **evidence)
    return _holds("truncation", **evidence)


def check_necessary_semibounded(spec: OperatorSpec, C: float = 1.0) -> Dict[str, Verdict]:
    """Necessary inequalities for ``t >= -C`` evaluated over the truncation.

    Each family compares the form on an explicit test function with
    ``-C * ||f||^2``: unit tents at negative points (``nec_inf_b``), steps
    between consecutive negative points (``nec_1``, only meaningful for
    ``q = 0``), and steps starting or ending at a negative point
    (``nec_2``/``nec_3``).  Potential contributions are included exactly.
    """
    if C < 0:
        raise ValueError("C must be nonnegative")
    nodes = spec.nodes
    ib = spec.inv_beta
    K = spec.K
    cum_q = np.concatenate(([0.0], np.cumsum([cell_integrals(spec, k)[0] for k in range(1, K + 1)])))
    negative = [k for k in range(1, K + 1) if np.isfinite(ib[k - 1]) and ib[k - 1] < 0]
    x_end = float(nodes[-1])
    q_zero = all(p.c0 == 0.0 and p.c1 == 0.0 for p in spec.potential.pieces)

    # tents of width one at every negative point
    viol, checked = [], 0
    for k in negative:
        a = float(nodes[k])
        if a + 1.0 > x_end:
            continue
        checked += 1
        lhs = 1.0 + _tent_potential(spec, a) + float(ib[k - 1])
        rhs = -C / 3.0
        if lhs < rhs:
            viol.append({"k": k, "inequality": "tent energy >= -C/3", "lhs": lhs, "rhs": rhs,
                         "excess": rhs - lhs})
    inf_b = _nec_result("nec_inf_b", viol, checked, C)

    # consecutive negative points, x_{k_0} = 0
    if q_zero:
        viol, checked = [], 0
        xs = [0.0] + [float(nodes[k]) for k in negative]
        for j, k in enumerate(negative, start=1):
            gaps = [xs[j] - xs[j - 1]]
            if j < len(negative):
                gaps.append(xs[j + 1] - xs[j])
            checked += 1
            lhs = -float(ib[k - 1])
            rhs = C * min(gaps)
            if lhs > rhs:
                viol.append({"k": k, "j": j, "inequality": "1/|beta| <= C min(d_j^-, d_{j+1}^-)",
                             "lhs": lhs, "rhs": rhs, "excess": lhs - rhs})
        nec1 = _nec_result("nec_1", viol, checked, C)
    elif not negative:
        nec1 = _holds("truncation", checked=0, C=C)
    else:
        nec1 = _unknown("the spacing inequality between negative points is stated for q = 0",
                        "truncation", C=C)

    # steps from a negative point forward to the next one, and backward to the previous one
    def steps(forward: bool) -> Verdict:
        viol, checked = [], 0
        bounds = [0] + negative + [K]
        for j, k in enumerate(negative, start=1):
            other = range(k + 1, bounds[j + 1] + 1) if forward else range(k - 1, bounds[j - 1] - 1, -1)
            for m in other:
                a, b = (k, m) if forward else (m, k)
                if a == b:
                    continue
                e = _step_energy(spec, a, b, cum_q)
                if e is None:
                    continue
                checked += 1
                rhs = -C * float(nodes[b] - nodes[a])
                if e < rhs:
                    viol.append({"from": a, "to": b, "inequality": "step energy >= -C (x_b - x_a)",
                                 "lhs": e, "rhs": rhs, "excess": rhs - e})
        return _nec_result("nec_2" if forward else "nec_3", viol, checked, C)

    return {"nec_inf_b": inf_b, "nec_1": nec1, "nec_2": steps(True), "nec_3": steps(False)}


def necessary_semibounded_verdict(spec: OperatorSpec, C: float = 1.0) -> Verdict:
    fams = check_necessary_semibounded(spec, C)
    evidence = {k: v.status for k, v in fams.items()}
    for name, v in fams.items():
        if v.fails:
            return _fails("truncation", {"family": name, **v.witness}, **evidence)
    if all(v.holds for v in fams.values()):
        return _holds("truncation", **evidence)
    return _unknown("some families do not apply to this potential", "truncation", **evidence)


# ---------------------------------------------------------------------------
# unboundedness certificate
# ---------------------------------------------------------------------------

@dataclass
class Certificate:
    family: str                       # "step" or "tent"
    description: str
    supports: List[Tuple[int, int]]   # (i, j) partition indices of each member
    quotients: List[float]
    predicted_limit: str
    verified: bool

    def as_dict(self) -> dict:
        return {"family": self.family, "description": self.description,
                "supports": [list(s) for s in self.supports], "quotients": self.quotients,
                "predicted_limit": self.predicted_limit, "verified": self.verified}


def _step_series(res: List[_Residue], r: int, m: int) -> Optional[Series]:
    """Rayleigh quotient of the step from the right end of residue ``r`` across ``m`` cells."""
    p = len(res)
    ib_a = res[r].inv_beta
    total_q, total_len = Series(), Series()
    for t in range(1, m + 1):
        idx = r + t
        shift, rr = divmod(idx, p)
        cell = res[rr]
        if cell.int_q is None:
            return None
        total_q = total_q + cell.int_q.shift(shift)
        total_len = total_len + cell.length.shift(shift)
    shift, rr = divmod(r + m, p)
    ib_b = res[rr].inv_beta
    if ib_a is None or ib_b is None:
        return None
    return _safe(lambda: (total_q + ib_a + ib_b.shift(shift)) / total_len)


def unboundedness_certificate(spec: OperatorSpec, reach: Optional[int] = None) -> Optional[Certificate]:
    """Test-function family whose Rayleigh quotients tend to ``-inf``.

    Searches steps ``chi_[x_a, x_b]`` spanning up to ``reach`` cells (default
    two periods) and, for ``q = 0``, unit tents at interaction points.  The
    limit is decided on the pattern; the members inside the truncation are
    then evaluated with the form and must decrease strictly.
    """
    pat = spec.pattern
    res = _residues(spec)
    if res is None:
        return None
    p = pat.period
    reach = reach or 2 * p
    found = None
    for m in range(1, reach + 1):
        for r in range(p):
            s = _step_series(res, r, m)
            if s is not None and s.limit() == -INF:
                found = ("step", r, m)
                break
        if found:
            break
    if found is None and pat.has_potential and all(
            tp.c0.is_exact_zero() and tp.c1.is_exact_zero() for c in pat.cells for tp in c.pieces):
        for r in range(p):
            ib = res[r].inv_beta
            if ib is not None and ib.limit() == -INF:
                found = ("tent", r, 0)
                break
    if found is None:
        return None
    kind, r, m = found
    supports, quotients = [], []
    x_end = float(spec.nodes[-1])
    for k in range(pat.start_cell + r, spec.K + 1, p):
        if kind == "step":
            if k + m > spec.K:
                break
            f = make_test_function("step", {"spec": spec, "i": k, "j": k + m})
            supports.append((k, k + m))
        else:
            if float(spec.nodes[k]) + 1.0 > x_end:
                break
            f = make_test_function("tent", {"spec": spec, "k": k})
            supports.append((k, k))
        quotients.append(rayleigh_quotient(spec, f))
    verified = len(quotients) >= 2 and all(b < a for a, b in zip(quotients, quotients[1:]))
    if kind == "step":
        desc = f"indicators of [x_k, x_(k+{m})] for k = {pat.start_cell + r} + {p}*n"
    else:
        desc = f"unit tents starting at x_k for k = {pat.start_cell + r} + {p}*n"
    return Certificate(kind, desc, supports, quotients, "-inf", verified)


# ---------------------------------------------------------------------------
# theorem-level composition
# ---------------------------------------------------------------------------

@dataclass
class CriterionReport:
    conditions: Dict[str, Verdict]
    theorems: Dict[str, Verdict]
    values: Dict[str, float]
    certificate: Optional[Certificate] = None
    extras: Dict[str, Verdict] = field(default_factory=dict)

    def __getitem__(self, key: str) -> Verdict:
        if key in self.conditions:
            return self.conditions[key]
        if key in self.theorems:
            return self.theorems[key]
        return self.extras[key]

    def as_dict(self) -> dict:
        return {
            "conditions": {k: v.as_dict() for k, v in self.conditions.items()},
            "theorems": {k: v.as_dict() for k, v in self.theorems.items()},
            "auxiliary": {k: v.as_dict() for k, v in self.extras.items()},
            "values": {k: _jsonable(v) for k, v in self.values.items()},
            "certificate": None if self.certificate is None else self.certificate.as_dict(),
        }


def _all_hold(*vs: Verdict) -> bool:
    return all(v.holds for v in vs)


def _names(**vs: Verdict) -> dict:
    return {k: v.status for k, v in vs.items()}


def theorem_verdicts(spec: OperatorSpec, C: float = 1.0,
                     epsilons: Sequence = DEFAULT_EPSILONS) -> CriterionReport:
    c0_val, c0 = sup_C0(spec)
    c1_val, c1 = sup_C1(spec)
    molch = check_molchanov(spec, epsilons)
    mean_q = check_mean_q_divergence(spec)
    combined = check_combined_divergence(spec)
    coupling = check_coupling_vanishes(spec)
    q_mean = check_q_mean_vanishes(spec)
    nec = check_necessary_semibounded(spec, C)
    conditions = {"C0_finite": c0, "C1_finite": c1, "molchanov": molch,
                  "mean_q_divergence": mean_q, "combined_divergence": combined,
                  "coupling_vanishes": coupling, "q_mean_vanishes": q_mean, **nec}

    extent = check_finite_extent(spec)
    neg_coupling = check_negative_coupling_vanishes(spec)
    neg_mean = check_negative_q_mean_vanishes(spec)
    bounded = q_bounded(spec)
    abs_val, abs_sup = sup_mean_abs_q(spec)
    nonneg = q_nonnegative(spec)
    extras = {"finite_extent": extent, "negative_coupling_vanishes": neg_coupling,
              "negative_q_mean_vanishes": neg_mean, "q_bounded": bounded,
              "mean_abs_q_finite": abs_sup, "q_nonnegative": nonneg}

    cert = unboundedness_certificate(spec)
    th: Dict[str, Verdict] = {}

    # lower semiboundedness
    if _all_hold(c0, c1):
        semi = _holds("C0 and C1 finite", **_names(C0_finite=c0, C1_finite=c1))
    elif cert is not None and cert.verified:
        semi = _fails("certificate", {"certificate": cert.description,
                                      "last_quotient": cert.quotients[-1]})
    else:
        semi = _unknown("the sufficient conditions are not established and no certificate was found",
                        "table", **_names(C0_finite=c0, C1_finite=c1))
    th["semibounded"] = semi

    if semi.holds:
        th["self_adjoint"] = _holds("semibounded")
    else:
        th["self_adjoint"] = _unknown("self-adjointness is only derived from semiboundedness", "table")

    # discreteness
    base = _all_hold(extent, c0, c1)
    sufficient = base and _all_hold(molch, mean_q)
    witness = None
    if semi.holds and combined.fails:
        witness = {"grounds": "semibounded with non-divergent indicator energies",
                   "combined_divergence": combined.witness}
    elif base and molch.fails:
        witness = {"grounds": "Molchanov windows stay bounded", "molchanov": molch.witness}
    elif semi.holds and bounded.holds:
        witness = {"grounds": "bounded potential"}
    deps = _names(finite_extent=extent, C0_finite=c0, C1_finite=c1, molchanov=molch,
                  mean_q_divergence=mean_q, combined_divergence=combined)
    if sufficient and witness is not None:
        th["discrete"] = _unknown("sufficient and necessary conditions conflict", "table", **deps)
    elif sufficient:
        th["discrete"] = _holds("d* < inf, C0, C1, Molchanov and mean divergence", **deps)
    elif witness is not None:
        th["discrete"] = _fails("table", witness, **deps)
    elif base and molch.holds and combined.holds and mean_q.fails:
        th["discrete"] = _unknown("only the necessary conditions hold; sufficiency needs the cell "
                                  "means of q to diverge", "table", **deps)
    else:
        th["discrete"] = _unknown("the hypotheses of neither direction are established", "table", **deps)

    # essential spectrum
    deps = _names(finite_extent=extent, C0_finite=c0, coupling_vanishes=coupling)
    if _all_hold(extent, c0, coupling):
        th["ess_spectrum_transfer"] = _holds("d* < inf, C0 and vanishing coupling", **deps)
        if q_mean.holds:
            th["ess_equals_free_N"] = _holds("transfer and vanishing mean |q|", **deps)
        else:
            th["ess_equals_free_N"] = _unknown("mean of |q| over cells is not shown to vanish",
                                               "table", q_mean_vanishes=q_mean.status)
    else:
        why = ("coupling does not vanish; the transfer theorem is only sufficient" if coupling.fails
               else "hypotheses of the transfer theorem are not established")
        th["ess_spectrum_transfer"] = _unknown(why, "table", **deps)
        th["ess_equals_free_N"] = _unknown(why, "table", **deps)

    # negative spectrum
    deps = _names(finite_extent=extent, negative_q_mean_vanishes=neg_mean,
                  negative_coupling_vanishes=neg_coupling)
    if _all_hold(extent, neg_mean, neg_coupling):
        th["negative_discrete"] = _holds("vanishing means of q_- and (1/beta)_-", **deps)
    else:
        th["negative_discrete"] = _unknown("hypotheses for a discrete negative spectrum are not "
                                           "established", "table", **deps)

    # stability under beta -> h beta
    deps = _names(finite_extent=extent, mean_abs_q_finite=abs_sup, q_nonnegative=nonneg,
                  negative_coupling_vanishes=neg_coupling)
    hyp = _all_hold(extent, abs_sup, nonneg)
    all_negative = bool(np.all(np.isfinite(spec.inv_beta) & (spec.inv_beta < 0)))
    pat = spec.pattern
    if pat is not None:
        all_negative = all_negative and all(
            c.inv_beta is not None and c.inv_beta.sign() == -1 for c in pat.cells)
    else:
        all_negative = False
    if hyp and neg_coupling.holds:
        th["h_stable"] = _holds("vanishing negative coupling", **deps)
    elif hyp and neg_coupling.fails and all_negative and semi.holds:
        th["h_stable"] = _fails("table", {"grounds": "all strengths negative; the vanishing of the "
                                          "negative coupling is necessary",
                                          "negative_coupling": neg_coupling.witness}, **deps)
    else:
        th["h_stable"] = _unknown("hypotheses of the stability statement are not established",
                                  "table", **deps)

    values = {"C0": c0_val, "C1": c1_val, "mean_abs_q_sup": abs_val, "C": C}
    return CriterionReport(conditions, th, values, cert, extras)
