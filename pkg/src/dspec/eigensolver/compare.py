"""Cross-validation of the three engines on the lowest eigenvalues."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .galerkin import counts_for, galerkin_spectrum
from .oracle import dense_oracle_all
from .problem import TruncatedProblem
from .shooting import eigenvalues_shooting, oscillation_count

ENGINES = ("shooting", "galerkin", "oracle")


def _count(problem: TruncatedProblem, lam: float) -> int:
    return int(sum(int(oscillation_count(b, [lam])[0]) for b in problem.blocks))


def spectral_bracket(problem: TruncatedProblem, n: int) -> tuple:
    """``(lo, hi)`` with no eigenvalue below ``lo`` and at least ``n`` below ``hi``."""
    q_min = min(b.q_min for b in problem.blocks)
    betas = [x for b in problem.blocks for x in b.betas if x < 0]
    lo = q_min - 1.0 - sum(4.0 / (x * x) for x in betas)
    step = 1.0 + abs(lo)
    while _count(problem, lo) > 0:
        lo -= step
        step *= 2
    hi = max(q_min, 0.0) + 1.0
    step = 10.0
    while _count(problem, hi) < n:
        hi += step
        step *= 2
    return lo, hi


def resolution_step(lo: float, hi: float, q_abs: float, resolution: float = 0.05) -> float:
    return resolution / math.sqrt(max(abs(lo), abs(hi)) + q_abs + 1.0)


@dataclass
class EngineComparison:
    n: int
    values: Dict[str, List[float]]
    errors: Dict[str, List[float]]
    counts: Dict[str, int]
    worst_relative: float
    h: float
    window: tuple
    notes: List[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        rows = []
        for i in range(self.n):
            rows.append({e: {"value": self.values[e][i], "err_est": self.errors[e][i]} for e in ENGINES})
        return {"n": self.n, "eigenvalues": rows, "inertia_counts": self.counts,
                "worst_relative": self.worst_relative, "h": self.h,
                "window": list(self.window), "notes": self.notes}


def compare_engines(problem: TruncatedProblem, n: int = 8, h: Optional[float] = None,
                    tol: float = 1e-12) -> EngineComparison:
    """Lowest ``n`` eigenvalues from all engines; relative gaps use ``max(1, |lam|)``."""
    lo, hi = spectral_bracket(problem, n)
    q_abs = max(max(abs(b.q_min), abs(b.q_max)) for b in problem.blocks)
    if h is None:
        h = resolution_step(lo, hi, q_abs)
    shoot = eigenvalues_shooting(problem, (lo, hi), tol)
    s_vals = shoot.eigenvalues[:n]
    s_err = np.repeat(shoot.err_est, shoot.multiplicities)[:n]
    # Galerkin values sit above the exact ones; widen the window for the coarse mesh
    gal = galerkin_spectrum(problem, h, (lo, hi + 0.05 * (abs(hi) + 1.0)), tol, extrapolate=True)
    g_vals = gal.eigenvalues[:n]
    g_err = np.repeat(gal.err_est, gal.multiplicities)[:n]
    ora = dense_oracle_all(problem, h)
    o_all = np.concatenate([v for v, _ in ora])
    o_errs = np.concatenate([e for _, e in ora])
    order = np.argsort(o_all, kind="stable")[:n]
    o_vals, o_err = o_all[order], o_errs[order]
    values = {"shooting": s_vals, "galerkin": g_vals, "oracle": o_vals}
    worst = 0.0
    if min(len(v) for v in values.values()) < n:
        worst = math.inf
    else:
        for a in ENGINES:
            for b in ENGINES:
                if a < b:
                    rel = np.abs(values[a] - values[b]) / np.maximum(1.0, np.abs(values[a]))
                    worst = max(worst, float(rel.max()))
    mid = 0.5 * (s_vals[n - 1] + shoot.eigenvalues[n]) if shoot.count > n else hi
    counts = {
        "shooting": _count(problem, mid),
        "galerkin": int(counts_for(problem, [mid], h / 4)[0]),
        "oracle": int(np.sum(o_all < mid)),
    }
    return EngineComparison(
        n=n,
        values={k: [float(x) for x in v] for k, v in values.items()},
        errors={"shooting": [float(x) for x in s_err], "galerkin": [float(x) for x in g_err],
                "oracle": [float(x) for x in o_err]},
        counts=counts, worst_relative=worst, h=h, window=(lo, hi), notes=shoot.notes)
