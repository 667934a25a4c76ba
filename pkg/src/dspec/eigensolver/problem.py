"""Truncated eigenvalue problems on ``[0, x_K]`` and their decoupled blocks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Sequence, Tuple

import numpy as np

from ..model import OperatorSpec, Piece

NEUMANN = "neumann"
DIRICHLET = "dirichlet"

# Affine pieces are cut into constant slabs with (|c1| * s) * s**2 <= SLAB_TOL,
# s being the slab length.
SLAB_TOL = 1e-8


@dataclass(frozen=True)
class Block:
    """Cells ``first..last`` (1-based) between two decoupled points.

    ``betas`` holds the finite strengths at the interior points
    ``x_first .. x_{last-1}``; the left end always carries ``f' = 0``.
    """

    first: int
    last: int
    left: float
    right: float
    cells: Tuple[Tuple[Piece, ...], ...]
    betas: Tuple[float, ...]
    right_bc: str

    @property
    def n_cells(self) -> int:
        return self.last - self.first + 1

    @property
    def negative_interfaces(self) -> int:
        return sum(1 for b in self.betas if b < 0)

    @property
    def q_min(self) -> float:
        return min(min(p.at(p.a), p.at(p.b)) for c in self.cells for p in c)

    @property
    def q_max(self) -> float:
        return max(max(p.at(p.a), p.at(p.b)) for c in self.cells for p in c)

    @property
    def is_affine(self) -> bool:
        return any(p.c1 != 0.0 for c in self.cells for p in c)

    def slabs(self, refine: int = 1) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Constant-potential program for shooting.

        Returns ``(lengths, potentials, betas_after)``: slab ``i`` is followed by an
        interface of strength ``betas_after[i]`` (NaN when none).
        """
        lengths: List[float] = []
        values: List[float] = []
        after: List[float] = []
        for ci, cell in enumerate(self.cells):
            for pi, p in enumerate(cell):
                ell = p.b - p.a
                if p.c1 == 0.0:
                    m = 1
                else:
                    m = max(1, math.ceil((abs(p.c1) * ell ** 3 / SLAB_TOL) ** (1.0 / 3.0)))
                m *= refine
                s = ell / m
                for i in range(m):
                    lengths.append(s)
                    values.append(p.at(p.a + (i + 0.5) * s))
                    after.append(math.nan)
            if ci < len(self.betas):
                after[-1] = self.betas[ci]
        return np.array(lengths), np.array(values), np.array(after)


@dataclass(frozen=True)
class TruncatedProblem:
    spec: OperatorSpec
    right_bc: str = NEUMANN

    def __post_init__(self):
        if self.right_bc not in (NEUMANN, DIRICHLET):
            raise ValueError(f"unknown boundary condition {self.right_bc!r}")

    @cached_property
    def blocks(self) -> Tuple[Block, ...]:
        spec = self.spec
        beta = spec.beta
        out = []
        start = 1
        for k in range(1, spec.K + 1):
            decoupled = math.isinf(beta[k - 1]) and k < spec.K
            if decoupled or k == spec.K:
                bc = self.right_bc if k == spec.K else NEUMANN
                out.append(Block(
                    first=start, last=k,
                    left=float(spec.nodes[start - 1]), right=float(spec.nodes[k]),
                    cells=spec.cell_pieces[start - 1:k],
                    betas=tuple(float(b) for b in beta[start - 1:k - 1]),
                    right_bc=bc))
                start = k + 1
        return tuple(out)


@dataclass
class SpectralResult:
    """Distinct eigenvalues with multiplicities and per-value error estimates."""

    values: np.ndarray
    multiplicities: np.ndarray
    err_est: np.ndarray
    method: str
    window: Tuple[float, float]
    counting: List[Tuple[float, int]] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues repeated according to multiplicity."""
        return np.repeat(self.values, self.multiplicities)

    @property
    def count(self) -> int:
        return int(self.multiplicities.sum())

    def rows(self) -> List[dict]:
        return [{"index": i, "lambda": float(v), "multiplicity": int(m), "engine": self.method,
                 "err_est": float(e)}
                for i, (v, m, e) in enumerate(zip(self.values, self.multiplicities, self.err_est))]


def merge_blocks(parts: Sequence[Tuple[np.ndarray, np.ndarray]], method: str,
                 window: Tuple[float, float], rel: float = 0.0) -> SpectralResult:
    """Merge per-block ``(values, errors)``; values closer than ``rel*max(1,|v|)`` coincide."""
    if parts:
        vals = np.concatenate([np.asarray(p[0], dtype=float) for p in parts])
        errs = np.concatenate([np.asarray(p[1], dtype=float) for p in parts])
    else:
        vals = errs = np.zeros(0)
    order = np.lexsort((errs, vals))
    vals, errs = vals[order], errs[order]
    out_v: List[float] = []
    out_m: List[int] = []
    out_e: List[float] = []
    for v, e in zip(vals, errs):
        if out_v and abs(v - out_v[-1]) <= rel * max(1.0, abs(v)):
            out_m[-1] += 1
            out_e[-1] = max(out_e[-1], e)
            continue
        out_v.append(float(v))
        out_m.append(1)
        out_e.append(float(e))
    return SpectralResult(np.array(out_v), np.array(out_m, dtype=int), np.array(out_e),
                          method, (float(window[0]), float(window[1])))
