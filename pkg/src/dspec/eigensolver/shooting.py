"""Shooting through transfer matrices with an exact oscillation count.

The state ``(f, f')`` is propagated across constant slabs and interaction
points.  Alongside it a continuous angle ``theta`` with ``f = r sin(theta)``,
``f' = r cos(theta)`` is tracked; it is increasing in ``lam`` and passes the
terminal lattice (``pi/2 + pi Z`` for ``f' = 0``, ``pi Z`` for ``f = 0``) exactly
at eigenvalues, which gives the number of eigenvalues below ``lam`` without
discretization.  Below the spectrum the terminal angle sits just above
``-n_neg * pi``, where ``n_neg`` counts the negative strengths of the block.
"""

from __future__ import annotations

import math
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from ..errors import InconsistentCount, InfiniteBeta
from . import galerkin
from .problem import NEUMANN, Block, SpectralResult, TruncatedProblem, merge_blocks
from .slicing import edge_above, isolate

SERIES_CUTOFF = 1e-6
RESCALE = 1e150
GALERKIN_REFINEMENTS = 3


def _coefficients(ell, c, lam):
    """``(C, S, T)`` with transfer matrix ``[[C, S], [T, C]]`` up to a positive factor.

    The hyperbolic branch is returned divided by ``cosh``-scale ``exp(k ell)``
    to avoid overflow; the factor is positive and common to all entries.
    """
    lam = np.asarray(lam, dtype=float)
    w2 = lam - c
    z = w2 * ell * ell
    small = np.abs(z) < SERIES_CUTOFF
    osc = (w2 > 0) & ~small
    hyp = (w2 < 0) & ~small
    C = np.empty_like(w2)
    S = np.empty_like(w2)
    T = np.empty_like(w2)
    if np.any(small):
        zs = z[small]
        C[small] = 1 - zs / 2 + zs * zs / 24
        S[small] = ell * (1 - zs / 6 + zs * zs / 120)
        T[small] = -w2[small] * ell * (1 - zs / 6 + zs * zs / 120)
    if np.any(osc):
        w = np.sqrt(w2[osc])
        C[osc] = np.cos(w * ell)
        S[osc] = np.sin(w * ell) / w
        T[osc] = -w * np.sin(w * ell)
    if np.any(hyp):
        k = np.sqrt(-w2[hyp])
        e = np.exp(-2 * k * ell)
        C[hyp] = 0.5 * (1 + e)
        S[hyp] = 0.5 * (1 - e) / k
        T[hyp] = 0.5 * (1 - e) * k
    return C, S, T, w2


def transfer_matrix(ell: float, c: float, lam: float) -> np.ndarray:
    """Propagator of ``(f, f')`` across a slab of length ``ell`` with potential ``c``."""
    if not ell > 0:
        raise ValueError("slab length must be positive")
    w2 = lam - c
    z = w2 * ell * ell
    if abs(z) < SERIES_CUTOFF:
        C = 1 - z / 2 + z * z / 24
        S = ell * (1 - z / 6 + z * z / 120)
        T = -w2 * S
    elif w2 > 0:
        w = math.sqrt(w2)
        C, S, T = math.cos(w * ell), math.sin(w * ell) / w, -w * math.sin(w * ell)
    else:
        k = math.sqrt(-w2)
        C, S, T = math.cosh(k * ell), math.sinh(k * ell) / k, k * math.sinh(k * ell)
    return np.array([[C, S], [T, C]])


def interface_matrix(beta: float) -> np.ndarray:
    if math.isinf(beta) or math.isnan(beta):
        raise InfiniteBeta("decoupled points are handled by block splitting", beta=beta)
    return np.array([[1.0, beta], [0.0, 1.0]])


def _wrap(d):
    return np.mod(d + np.pi, 2 * np.pi) - np.pi


def _shoot(program, lams, bc: str, angle: bool = True):
    """Terminal state and angle for every entry of ``lams``."""
    lengths, values, after = program
    lam = np.atleast_1d(np.asarray(lams, dtype=float))
    f = np.ones_like(lam)
    g = np.zeros_like(lam)
    theta = np.full_like(lam, np.pi / 2)
    for ell, c, beta in zip(lengths.tolist(), values.tolist(), after.tolist()):
        C, S, T, w2 = _coefficients(ell, c, lam)
        f1 = C * f + S * g
        g1 = T * f + C * g
        if angle:
            osc = w2 > 0
            base1 = np.arctan2(f1, g1)
            if np.any(osc):
                w = np.sqrt(w2[osc])
                phi0 = theta[osc] + _wrap(np.arctan2(w * f[osc], g[osc]) - np.arctan2(f[osc], g[osc]))
                phi1 = phi0 + w * ell
                theta[osc] = phi1 + _wrap(base1[osc] - np.arctan2(w * f1[osc], g1[osc]))
            rest = ~osc
            if np.any(rest):
                theta[rest] += _wrap(base1[rest] - np.arctan2(f[rest], g[rest]))
        f, g = f1, g1
        if beta == beta and beta != 0.0:
            f1 = f + beta * g
            if angle:
                theta += _wrap(np.arctan2(f1, g) - np.arctan2(f, g))
            f = f1
        r = np.maximum(np.abs(f), np.abs(g))
        big = (r > RESCALE) | (r < 1.0 / RESCALE)
        if np.any(big):
            f = np.where(big, f / r, f)
            g = np.where(big, g / r, g)
    return f, g, theta


def secular(problem: TruncatedProblem, block: int, lam):
    """Terminal ``f'`` (Neumann end) or ``f`` (Dirichlet end) of block ``block`` (0-based).

    The value is defined up to a positive factor: its zeros and sign are those
    of the exact boundary mismatch.
    """
    b = problem.blocks[block]
    f, g, _ = _shoot(b.slabs(), lam, b.right_bc, angle=False)
    out = g if b.right_bc == NEUMANN else f
    return float(out[0]) if np.ndim(lam) == 0 else out


def oscillation_count(block: Block, lams, refine: int = 1) -> np.ndarray:
    """Number of eigenvalues of the block strictly below each ``lam``."""
    _, _, theta = _shoot(block.slabs(refine), lams, block.right_bc)
    offset = np.pi / 2 if block.right_bc == NEUMANN else 0.0
    first = -block.negative_interfaces + (0 if block.right_bc == NEUMANN else 1)
    n = np.ceil((theta - offset) / np.pi - 1e-12).astype(np.int64) - first
    return np.maximum(n, 0)


def _terminal(lam: float, program, neumann: bool) -> float:
    """Scalar secular value; the same recurrence as ``_shoot`` without the angle."""
    f, g = 1.0, 0.0
    for ell, c, beta in zip(*program):
        w2 = lam - c
        z = w2 * ell * ell
        if abs(z) < SERIES_CUTOFF:
            C = 1 - z / 2 + z * z / 24
            S = ell * (1 - z / 6 + z * z / 120)
            T = -w2 * S
        elif w2 > 0:
            w = math.sqrt(w2)
            sn = math.sin(w * ell)
            C, S, T = math.cos(w * ell), sn / w, -w * sn
        else:
            k = math.sqrt(-w2)
            e = math.exp(-2 * k * ell)
            C, S, T = 0.5 * (1 + e), 0.5 * (1 - e) / k, 0.5 * (1 - e) * k
        f, g = C * f + S * g, T * f + C * g
        if beta == beta and beta != 0.0:
            f += beta * g
        r = max(abs(f), abs(g))
        if r > RESCALE or r < 1.0 / RESCALE:
            f, g = f / r, g / r
    return g if neumann else f


def _polish(block: Block, brackets, tol: float, refine: int) -> Tuple[np.ndarray, np.ndarray]:
    """Brent iteration where the secular sign brackets the root, bisection otherwise."""
    program = block.slabs(refine)
    scalar = tuple(a.tolist() for a in program)
    neumann = block.right_bc == NEUMANN
    vals = np.empty(len(brackets))
    errs = np.empty(len(brackets))
    rest = []
    for i, (lo, hi, _) in enumerate(brackets):
        fa, fb = _terminal(lo, scalar, neumann), _terminal(hi, scalar, neumann)
        if fa * fb < 0:
            xtol = tol * max(1.0, abs(lo))
            vals[i] = brentq(_terminal, lo, hi, args=(scalar, neumann), xtol=xtol, maxiter=200)
            errs[i] = xtol
        else:
            rest.append(i)
    if rest:
        v, e = _bisect(block, program, [brackets[i] for i in rest], tol, refine)
        vals[rest], errs[rest] = v, e
    return vals, errs


def _bisect(block: Block, program, brackets, tol: float, refine: int) -> Tuple[np.ndarray, np.ndarray]:
    """Bisection on the secular sign (count-guided where the sign is flat)."""
    a = np.array([x[0] for x in brackets])
    b = np.array([x[1] for x in brackets])
    idx = np.array([x[2] for x in brackets])

    def evaluate(lam):
        f, g, theta = _shoot(program, lam, block.right_bc)
        s = g if block.right_bc == NEUMANN else f
        return np.sign(s)

    sa = evaluate(a)
    for _ in range(200):
        width = b - a
        active = width > tol * np.maximum(1.0, np.abs(a))
        if not np.any(active):
            break
        mid = 0.5 * (a + b)
        sm = evaluate(mid)
        cm = oscillation_count(block, mid, refine)
        # secular sign decides when it brackets; the count decides otherwise
        sign_ok = (sa != 0) & (sm != 0)
        left = np.where(sign_ok & (sa * sm < 0), True, cm > idx)
        left = np.where(sign_ok & (sa * sm > 0), False, left)
        left = np.where(sm == 0, True, left)
        b = np.where(active & left, mid, b)
        a = np.where(active & ~left, mid, a)
        sa = np.where(active & ~left, sm, sa)
    return 0.5 * (a + b), 0.5 * (b - a)


def cell_lattice(d: float, c: float, hi: float, lo: float = -math.inf, shift: float = 0.0) -> np.ndarray:
    """``((n + shift) pi / d)^2 + c`` for ``n >= 0`` inside ``[lo, hi]``.

    ``shift = 0`` is the Neumann-Neumann cell, ``shift = 1/2`` Neumann-Dirichlet.
    """
    if hi < c + (shift * math.pi / d) ** 2:
        return np.zeros(0)
    n_max = int(math.floor(d * math.sqrt(max(hi - c, 0.0)) / math.pi - shift)) + 1
    vals = np.array([((n + shift) * math.pi / d) ** 2 + c for n in range(n_max + 1)])
    return vals[(vals >= lo) & (vals <= hi)]


def _analytic_cell(block: Block, lo: float, hi: float) -> Optional[np.ndarray]:
    if block.n_cells != 1 or len(block.cells[0]) != 1 or block.cells[0][0].c1 != 0.0:
        return None
    p = block.cells[0][0]
    return cell_lattice(p.b - p.a, p.c0, hi, lo, 0.0 if block.right_bc == NEUMANN else 0.5)


def _block_roots(block: Block, lo: float, hi: float, tol: float, refine: int):
    brackets, below = isolate(lambda lam: oscillation_count(block, lam, refine), lo, hi)
    if not brackets:
        return np.zeros(0), np.zeros(0), below
    vals, errs = _polish(block, brackets, tol, refine)
    return vals, errs, below


def _check_inertia(block: Block, lo: float, hi: float, refine: int) -> List[str]:
    """Compare oscillation counts with Galerkin inertia at the window edges.

    Galerkin eigenvalues lie above the exact ones by at most ``delta``, so the
    inertia at ``e`` must fall between the exact counts at ``e - delta`` and ``e``.
    """
    edges = np.array([lo, edge_above(hi)])
    h = galerkin.mesh_for(block, max(abs(lo), abs(hi)))
    for _ in range(GALERKIN_REFINEMENTS + 1):
        pencil = galerkin.assemble(block, h)
        inertia = galerkin.inertia_counts(pencil, edges)
        scale = np.abs(edges) + max(abs(block.q_min), abs(block.q_max)) + 1.0
        delta = h * h * scale * scale
        upper = oscillation_count(block, edges, refine)
        lower = oscillation_count(block, edges - delta, refine)
        if np.all((lower <= inertia) & (inertia <= upper)):
            return []
        h /= 2
    raise InconsistentCount(
        "shooting count disagrees with Galerkin inertia",
        block=[block.first, block.last], window=[lo, hi],
        shooting=[int(x) for x in upper], inertia=[int(x) for x in inertia])


def solve_block(block: Block, lo: float, hi: float, tol: float = 1e-12,
                check: bool = True) -> Tuple[np.ndarray, np.ndarray, List[str]]:
    """Eigenvalues of one block in ``[lo, hi]`` with error estimates.

    Affine potentials are solved on ``m`` and ``2m`` slabs and extrapolated in
    ``m^-2``; the slab difference enters the error estimate.
    """
    exact = _analytic_cell(block, lo, hi)
    if exact is not None:
        return exact, np.zeros(exact.size), []
    notes: List[str] = []
    vals, errs, below = _block_roots(block, lo, hi, tol, 1)
    if block.is_affine:
        coarse = vals
        fine, ferr, fbelow = _block_roots(block, lo, hi, tol, 2)
        if fbelow != below or fine.size != coarse.size:
            notes.append(f"slab refinement changed the count in cells {block.first}..{block.last}")
            vals, errs = fine, ferr
        else:
            vals = (4.0 * fine - coarse) / 3.0
            errs = np.abs(vals - fine) + ferr
    if check:
        notes += _check_inertia(block, lo, hi, 1)
    return vals, errs, notes


def eigenvalues_shooting(problem: TruncatedProblem, window: Tuple[float, float],
                         tol: float = 1e-12, check: bool = True) -> SpectralResult:
    """Eigenvalues of the truncated problem in ``[lo, hi]``, merged over blocks."""
    lo, hi = window
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError("window must be a finite interval lo < hi")
    parts = []
    notes: List[str] = []
    for block in problem.blocks:
        vals, errs, extra = solve_block(block, lo, hi, tol, check)
        parts.append((vals, errs))
        notes += extra
    res = merge_blocks(parts, "shooting", window, rel=max(tol, 1e-14) * 4)
    res.notes += notes
    return res


def shooting_count(problem: TruncatedProblem, lam: float) -> int:
    """Exact oscillation count of eigenvalues below ``lam`` (constant slabs)."""
    return int(sum(int(oscillation_count(b, [lam])[0]) for b in problem.blocks))
