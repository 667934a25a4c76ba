"""Dense finite-difference reference solver.

Three-point differences on a grid that contains every potential breakpoint.
At a cell end the outer neighbour is a ghost value eliminated through the
one-sided derivative, and at an interaction point the common derivative is
replaced by ``(u_right - u_left) / beta``; after scaling each row by its
half-cell width the matrix is symmetric.  Two nested grids are solved densely
and combined by Richardson extrapolation.
"""

from __future__ import annotations

from typing import List, Tuple

import numpy as np

from ..errors import TooLarge
from .galerkin import element_counts
from .problem import DIRICHLET, Block, SpectralResult, TruncatedProblem, merge_blocks

MAX_POINTS = 20000


def difference_matrix(block: Block, h: float, refine: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """Symmetric difference operator ``S`` and diagonal row weights ``w``."""
    counts = element_counts(block, h)
    steps: List[Tuple] = []
    for ci, cell in enumerate(block.cells):
        for p, n in zip(cell, counts[ci]):
            xs = np.linspace(p.a, p.b, refine * n + 1)
            for x0, x1 in zip(xs[:-1], xs[1:]):
                steps.append((x1 - x0, p.at(x0), p.at(x1)))
        if ci < len(block.betas) and block.betas[ci] != 0.0:
            steps.append((None, block.betas[ci]))
    n = len(steps) + 1
    S = np.zeros((n, n))
    w = np.zeros(n)
    for i, st in enumerate(steps):
        if st[0] is None:
            c = 1.0 / st[1]
            S[i, i] += c
            S[i + 1, i + 1] += c
            S[i, i + 1] -= c
            S[i + 1, i] -= c
            continue
        e, q0, q1 = st
        S[i, i] += 1.0 / e + 0.5 * e * q0
        S[i + 1, i + 1] += 1.0 / e + 0.5 * e * q1
        S[i, i + 1] -= 1.0 / e
        S[i + 1, i] -= 1.0 / e
        w[i] += 0.5 * e
        w[i + 1] += 0.5 * e
    if block.right_bc == DIRICHLET:
        S, w = S[:-1, :-1], w[:-1]
    return S, w


def _dense_eigs(block: Block, h: float, refine: int) -> np.ndarray:
    S, w = difference_matrix(block, h, refine)
    r = 1.0 / np.sqrt(w)
    return np.linalg.eigvalsh(S * r[:, None] * r[None, :])


def grid_points(problem: TruncatedProblem, h: float, refine: int = 2) -> int:
    return sum(refine * sum(map(sum, element_counts(b, h))) + 1 for b in problem.blocks)


def dense_oracle_all(problem: TruncatedProblem, h: float) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Extrapolated eigenvalues and error estimates of every block (all indices)."""
    total = grid_points(problem, h)
    if total > MAX_POINTS:
        raise TooLarge(f"{total} grid points exceed {MAX_POINTS}", points=total, h=h)
    out = []
    for block in problem.blocks:
        coarse = _dense_eigs(block, h, 1)
        fine = _dense_eigs(block, h, 2)[:coarse.size]
        ext = (4.0 * fine - coarse) / 3.0
        out.append((ext, np.abs(ext - fine)))
    return out


def dense_oracle(problem: TruncatedProblem, h: float,
                 window: Tuple[float, float] = (-np.inf, np.inf)) -> SpectralResult:
    lo, hi = window
    parts = []
    for ext, err in dense_oracle_all(problem, h):
        keep = (ext >= lo) & (ext <= hi)
        parts.append((ext[keep], err[keep]))
    res = merge_blocks(parts, "oracle", window)
    res.notes.append(f"h={h}")
    return res
