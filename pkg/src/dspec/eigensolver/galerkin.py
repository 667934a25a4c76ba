"""Piecewise-linear Galerkin discretization of the quadratic form.

Each block becomes a symmetric tridiagonal pencil ``(A, M)``.  Nodes are
duplicated at interaction points (one trace per side) and the two copies are
coupled through ``[[1, -1], [-1, 1]] / beta``; because the copies are adjacent
in the node ordering, the pencil stays tridiagonal and its inertia follows from
an ``L D L^T`` sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import solve_banded

from ..errors import InconsistentCount, NearEigenvalue, SingularMass
from .problem import DIRICHLET, Block, SpectralResult, TruncatedProblem, merge_blocks
from .slicing import edge_above, isolate

# Pivots smaller than this (relative to the row scale) are nudged in counts.
PIVOT_FLOOR = 1e-300


@dataclass(frozen=True)
class Pencil:
    a_diag: np.ndarray
    a_off: np.ndarray
    m_diag: np.ndarray
    m_off: np.ndarray
    h: float

    @property
    def size(self) -> int:
        return self.a_diag.size

    def scale(self) -> float:
        return float(np.max(np.abs(self.a_diag)) + np.max(self.m_diag))


def element_counts(block: Block, h: float) -> List[List[int]]:
    """Elements per potential piece for target size ``h`` (at least one each)."""
    return [[max(1, math.ceil((p.b - p.a) / h - 1e-9)) for p in cell] for cell in block.cells]


def assemble(block: Block, h: float, refine: int = 1) -> Pencil:
    """Stiffness and mass of one block.

    Each piece gets ``refine`` times the element count implied by ``h``, so
    meshes for ``refine = 1, 2`` are nested with exact ratio two.
    """
    if not h > 0:
        raise SingularMass("mesh size must be positive", h=h)
    # links between consecutive nodes: (kind, length, q_left, q_right) or ("jump", beta)
    links: List[Tuple] = []
    counts = element_counts(block, h)
    for ci, cell in enumerate(block.cells):
        for p, n_el in zip(cell, counts[ci]):
            n_el *= refine
            xs = np.linspace(p.a, p.b, n_el + 1)
            qs = p.c0 + p.c1 * xs
            for i in range(n_el):
                links.append(("el", xs[i + 1] - xs[i], qs[i], qs[i + 1]))
        if ci < len(block.betas) and block.betas[ci] != 0.0:
            links.append(("jump", block.betas[ci]))
    n = len(links) + 1
    ad = np.zeros(n)
    md = np.zeros(n)
    ao = np.zeros(n - 1)
    mo = np.zeros(n - 1)
    for i, link in enumerate(links):
        if link[0] == "jump":
            w = 1.0 / link[1]
            ad[i] += w
            ad[i + 1] += w
            ao[i] = -w
            continue
        _, e, q0, q1 = link
        ad[i] += 1.0 / e + e * (3 * q0 + q1) / 12.0
        ad[i + 1] += 1.0 / e + e * (q0 + 3 * q1) / 12.0
        ao[i] = -1.0 / e + e * (q0 + q1) / 12.0
        md[i] += e / 3.0
        md[i + 1] += e / 3.0
        mo[i] = e / 6.0
    if block.right_bc == DIRICHLET:
        ad, md, ao, mo = ad[:-1], md[:-1], ao[:-1], mo[:-1]
    if np.any(md <= 0):
        raise SingularMass("mass matrix has an empty row", h=h)
    return Pencil(ad, ao, md, mo, h / refine)


def inertia_counts(pencil: Pencil, lams) -> np.ndarray:
    """Number of negative pivots of ``A - lam M`` for every entry of ``lams``."""
    lam = np.atleast_1d(np.asarray(lams, dtype=float))
    d = pencil.a_diag[:, None] - pencil.m_diag[:, None] * lam[None, :]
    o = pencil.a_off[:, None] - pencil.m_off[:, None] * lam[None, :]
    o2 = o * o
    floor = PIVOT_FLOOR * max(1.0, pencil.scale())
    p = d[0].copy()
    neg = (p < 0).astype(np.int64)
    for i in range(1, d.shape[0]):
        p = np.where(np.abs(p) < floor, -floor, p)
        p = d[i] - o2[i - 1] / p
        neg += p < 0
    return neg


def _pivots(pencil: Pencil, lam: float) -> Tuple[int, float]:
    d = (pencil.a_diag - lam * pencil.m_diag).tolist()
    o = (pencil.a_off - lam * pencil.m_off).tolist()
    p = d[0]
    neg = int(p < 0)
    smallest = abs(p)
    for i in range(1, len(d)):
        if p == 0.0:
            p = -PIVOT_FLOOR
        p = d[i] - o[i - 1] * o[i - 1] / p
        neg += p < 0
        smallest = min(smallest, abs(p))
    return neg, smallest


def _rqi(pencil: Pencil, a: float, b: float, index: int, tol: float) -> float:
    """Eigenvalue number ``index`` known to lie in ``[a, b)``."""
    n = pencil.size
    ab = np.zeros((3, n))
    x = np.cos(np.linspace(0.0, 3.0, n)) + 1.5
    sigma = 0.5 * (a + b)
    prev = math.inf
    for it in range(60):
        ab[0, 1:] = pencil.a_off - sigma * pencil.m_off
        ab[1] = pencil.a_diag - sigma * pencil.m_diag
        ab[2, :-1] = ab[0, 1:]
        mx = pencil.m_diag * x
        mx[:-1] += pencil.m_off * x[1:]
        mx[1:] += pencil.m_off * x[:-1]
        try:
            y = solve_banded((1, 1), ab, mx, check_finite=False)
        except np.linalg.LinAlgError:
            return sigma
        if not np.all(np.isfinite(y)):
            return sigma
        x = y / np.linalg.norm(y)
        ax = pencil.a_diag * x
        ax[:-1] += pencil.a_off * x[1:]
        ax[1:] += pencil.a_off * x[:-1]
        mx = pencil.m_diag * x
        mx[:-1] += pencil.m_off * x[1:]
        mx[1:] += pencil.m_off * x[:-1]
        rho = float(x @ ax) / float(x @ mx)
        if not (a <= rho < b):
            # step outside the bracket: fall back to one bisection step
            mid = 0.5 * (a + b)
            if _pivots(pencil, mid)[0] > index:
                b = mid
            else:
                a = mid
            rho = 0.5 * (a + b)
        if abs(rho - prev) <= tol * max(1.0, abs(rho)) or b - a <= tol * max(1.0, abs(rho)):
            return rho
        prev = rho
        if it >= 2:
            sigma = rho
    return sigma


def block_eigenvalues(pencil: Pencil, lo: float, hi: float, tol: float) -> Tuple[np.ndarray, int]:
    """Discrete eigenvalues in ``[lo, hi]`` and the count below ``lo``."""
    brackets, below = isolate(lambda lam: inertia_counts(pencil, lam), lo, hi)
    vals = np.array([_rqi(pencil, a, b, i, tol) for a, b, i in brackets])
    return vals, below


def eigenvalues_by_index(pencil: Pencil, first: int, last: int, guess: Tuple[float, float],
                         tol: float) -> np.ndarray:
    """Eigenvalues with 0-based indices ``first..last-1`` (expanding the guess window)."""
    lo, hi = guess
    width = max(1.0, hi - lo)
    for _ in range(80):
        c = inertia_counts(pencil, [lo, edge_above(hi)])
        if c[0] <= first and c[1] >= last:
            break
        if c[0] > first:
            lo -= width
        if c[1] < last:
            hi += width
        width *= 2
    vals, below = block_eigenvalues(pencil, lo, hi, tol)
    return vals[first - below:last - below]


def mesh_for(block: Block, lam_max: float, resolution: float = 0.05) -> float:
    """Element size with ``h * sqrt(|lam| + |q| + 1) <= resolution``."""
    scale = abs(lam_max) + max(abs(block.q_min), abs(block.q_max)) + 1.0
    negative = [b for b in block.betas if b < 0]
    if negative:
        scale += 4.0 / min(b * b for b in negative)
    return resolution / math.sqrt(scale)


def galerkin_spectrum(problem: TruncatedProblem, h: float, window: Tuple[float, float],
                      tol: float = 1e-12, extrapolate: bool = False) -> SpectralResult:
    """Galerkin eigenvalues in ``window``.

    With ``extrapolate`` the pencil is solved at ``h`` and ``h/2`` and the values
    are combined as ``(4 lam_{h/2} - lam_h) / 3``, with ``|lam_ext - lam_{h/2}|``
    as error estimate.  Otherwise ``err_est`` is the a-priori scale
    ``h**2 * max(1, lam**2)``.
    """
    lo, hi = window
    parts = []
    for block in problem.blocks:
        fine = assemble(block, h, 2 if extrapolate else 1)
        vals, below = block_eigenvalues(fine, lo, hi, tol)
        if not extrapolate:
            errs = h * h * np.maximum(1.0, vals * vals)
            parts.append((vals, errs))
            continue
        coarse = assemble(block, h)
        cvals = eigenvalues_by_index(coarse, below, below + vals.size, (lo, hi), tol)
        if cvals.size != vals.size:
            raise InconsistentCount("coarse and fine meshes disagree on the index range",
                                    fine=int(vals.size), coarse=int(cvals.size))
        ext = (4.0 * vals - cvals) / 3.0
        errs = np.abs(ext - vals)
        keep = (ext >= lo) & (ext <= hi)
        parts.append((ext[keep], errs[keep]))
    res = merge_blocks(parts, "galerkin-extrapolated" if extrapolate else "galerkin", window)
    res.notes.append(f"h={h}")
    return res


def counting_function(problem: TruncatedProblem, lam: float, h: Optional[float] = None,
                      tol: float = 1e-10) -> int:
    """Number of eigenvalues below ``lam`` from the inertia of ``A - lam M``.

    Raises NearEigenvalue when the smallest pivot signals that ``lam`` is
    (numerically) an eigenvalue of the discrete pencil.
    """
    total = 0
    for block in problem.blocks:
        pencil = assemble(block, h if h is not None else mesh_for(block, lam))
        neg, smallest = _pivots(pencil, lam)
        if smallest <= tol * pencil.scale() * pencil.h:
            raise NearEigenvalue("lambda is too close to an eigenvalue", lam=lam)
        total += neg
    return total


def counts_for(problem: TruncatedProblem, lams: Sequence[float], h: Optional[float] = None) -> np.ndarray:
    """Counting function sampled at several points (no proximity check)."""
    lams = np.asarray(lams, dtype=float)
    total = np.zeros(lams.size, dtype=np.int64)
    lam_max = float(np.max(np.abs(lams))) if lams.size else 0.0
    for block in problem.blocks:
        pencil = assemble(block, h if h is not None else mesh_for(block, lam_max))
        total += inertia_counts(pencil, lams)
    return total
