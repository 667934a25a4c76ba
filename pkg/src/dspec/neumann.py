"""Decoupled comparison operator: the direct sum of per-cell Neumann problems.

Cutting every interaction point with ``f' = 0`` on both sides turns the
operator into a direct sum over cells.  Constant-potential cells have the
closed-form lattice ``(pi n / d)^2 + c``; affine cells go through the shooting
engine.  The predicted essential spectrum of the infinite direct sum is
``{0} U {(pi n / L)^2 : L in D}`` where ``D`` collects the cell lengths that
recur infinitely often together with nonzero accumulation points of the
length sequence; ``D`` is read from tail declarations, never guessed from the
finite truncation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple


from .asymptotics import INF
from .errors import CutoffTooLow, HypothesisNotMet, UndecidableTail
from .eigensolver.problem import NEUMANN, Block
from .eigensolver.shooting import cell_lattice, solve_block
from .model import OperatorSpec, _check_index

ANALYTIC = "analytic-constant"
SHOOTING = "shooting-affine"


@dataclass(frozen=True)
class CellSpectrum:
    k: int
    eigenvalues: Tuple[float, ...]
    method: str
    err_est: Tuple[float, ...] = ()


def cell_neumann_eigs(spec: OperatorSpec, k: int, lambda_max: float, tol: float = 1e-13) -> CellSpectrum:
    _check_index(spec, k)
    pieces = spec.cell_pieces[k - 1]
    q_min = min(min(p.at(p.a), p.at(p.b)) for p in pieces)
    if not lambda_max > q_min:
        raise CutoffTooLow(f"cutoff {lambda_max} does not exceed min q = {q_min} on cell {k}",
                           k=k, lambda_max=lambda_max, q_min=q_min)
    lo, hi = spec.cell(k)
    if len({(p.c0, p.c1) for p in pieces}) == 1 and pieces[0].c1 == 0.0:
        vals = cell_lattice(hi - lo, pieces[0].c0, lambda_max)
        return CellSpectrum(k, tuple(float(v) for v in vals), ANALYTIC, (0.0,) * len(vals))
    block = Block(k, k, lo, hi, (pieces,), (), NEUMANN)
    vals, errs, _ = solve_block(block, q_min - 1.0, lambda_max, tol, check=False)
    return CellSpectrum(k, tuple(float(v) for v in vals), SHOOTING, tuple(float(e) for e in errs))


@dataclass(frozen=True)
class DirectSumEntry:
    value: float
    multiplicity: int
    cells: Tuple[int, ...]


def direct_sum_spectrum(spec: OperatorSpec, lambda_max: float, jobs: int = 1) -> List[DirectSumEntry]:
    """Merged multiset of all cell eigenvalues up to ``lambda_max``.

    Cells whose minimum potential lies above the cutoff contribute nothing.
    Equal values (bitwise) merge; the result is independent of ``jobs``.
    """
    def one(k: int) -> Optional[CellSpectrum]:
        pieces = spec.cell_pieces[k - 1]
        if min(min(p.at(p.a), p.at(p.b)) for p in pieces) >= lambda_max:
            return None
        return cell_neumann_eigs(spec, k, lambda_max)

    ks = range(1, spec.K + 1)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            spectra = list(pool.map(one, ks))
    else:
        spectra = [one(k) for k in ks]
    table: Dict[float, List[int]] = {}
    for cs in spectra:
        if cs is None:
            continue
        for v in cs.eigenvalues:
            table.setdefault(v, []).append(cs.k)
    return [DirectSumEntry(v, len(table[v]), tuple(table[v])) for v in sorted(table)]


# ---------------------------------------------------------------------------
# essential spectrum prediction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EssSpectrumModel:
    D: Tuple[float, ...]
    points: Tuple[float, ...]
    lambda_max: float
    provenance: str
    recurrent: Tuple[float, ...] = ()
    accumulation: Tuple[float, ...] = ()

    def as_dict(self) -> dict:
        return {"D": list(self.D), "points": list(self.points), "lambda_max": self.lambda_max,
                "provenance": self.provenance, "recurrent": list(self.recurrent),
                "accumulation": list(self.accumulation)}


@dataclass(frozen=True)
class LengthSet:
    recurrent: Tuple[float, ...]
    accumulation: Tuple[float, ...]
    provenance: str

    @property
    def values(self) -> Tuple[float, ...]:
        return tuple(sorted(set(self.recurrent) | set(self.accumulation)))


def length_set(spec: OperatorSpec) -> LengthSet:
    """Recurrent lengths and nonzero accumulation points of the cell lengths."""
    tail = spec.tail
    if tail is None:
        raise UndecidableTail("no tail information: recurrent lengths cannot be inferred from finite data")
    recurrent: set = set(tail.recurrent_lengths or ())
    accumulation: set = set()
    sources = []
    if tail.recurrent_lengths is not None:
        sources.append("recurrent_lengths")
    if tail.d_limit is not None:
        if math.isinf(tail.d_limit):
            raise UndecidableTail("unbounded cell lengths are outside the model", d_limit=tail.d_limit)
        if tail.d_limit > 0:
            accumulation.add(float(tail.d_limit))
        sources.append("d_limit")
    elif tail.pattern is not None:
        for cell in tail.pattern.cells:
            lim = cell.length.limit()
            if lim is None:
                raise UndecidableTail("pattern length has no decided limit", length=repr(cell.length))
            if lim == INF:
                raise UndecidableTail("unbounded cell lengths are outside the model")
            if lim == 0:
                continue
            if cell.length.is_constant():
                recurrent.add(float(lim))
            else:
                accumulation.add(float(lim))
        sources.append(f"pattern ({tail.pattern.origin})")
    if not sources:
        raise UndecidableTail("tail declares neither lengths, a limit nor a pattern")
    # a recurrent value is also an accumulation point of the sequence; report it once
    accumulation -= recurrent
    return LengthSet(tuple(sorted(recurrent)), tuple(sorted(accumulation)), ", ".join(sources))


def compute_D(spec: OperatorSpec) -> Tuple[float, ...]:
    return length_set(spec).values


def lattice_points(lengths: Sequence[float], lambda_max: float) -> Tuple[float, ...]:
    """``{0} U {(pi n / L)^2 : L in lengths, n >= 1}`` up to ``lambda_max``, deduplicated."""
    pts = [0.0] if lambda_max >= 0 else []
    for L in lengths:
        n = 1
        while (math.pi * n / L) ** 2 <= lambda_max:
            pts.append((math.pi * n / L) ** 2)
            n += 1
    pts.sort()
    out: List[float] = []
    for p in pts:
        if out and abs(p - out[-1]) <= 1e-12 * max(1.0, p):
            continue
        out.append(p)
    return tuple(out)


def ess_spectrum_N(spec: OperatorSpec, lambda_max: float) -> EssSpectrumModel:
    from .criteria import HOLDS, check_q_mean_vanishes

    verdict = check_q_mean_vanishes(spec)
    if verdict.status != HOLDS:
        raise HypothesisNotMet("mean of |q| over cells must vanish in the limit",
                               q_mean_vanishes=verdict.status, reason=verdict.reason)
    ls = length_set(spec)
    return EssSpectrumModel(ls.values, lattice_points(ls.values, lambda_max), float(lambda_max),
                            ls.provenance, ls.recurrent, ls.accumulation)


def periodic_prediction(a: float, c: float, lambda_max: float) -> Tuple[float, ...]:
    """Spectrum of the periodic decoupled operator: the single-cell lattice shifted by ``c``."""
    return tuple(float(v) for v in cell_lattice(a, c, lambda_max))
