"""Spectrum slicing: isolate eigenvalues of a counting function into unit brackets."""

from __future__ import annotations

from typing import Callable, List, Tuple

import numpy as np

from ..errors import InconsistentCount, WindowTooWide

CountFn = Callable[[np.ndarray], np.ndarray]

INITIAL_INTERVALS = 256
MAX_HALVINGS = 60
MAX_EVALUATIONS = 2_000_000


def edge_above(hi: float) -> float:
    """Point just above ``hi`` so that an eigenvalue equal to ``hi`` is counted."""
    return hi + 1e-13 * max(1.0, abs(hi))


def isolate(count: CountFn, lo: float, hi: float) -> Tuple[List[Tuple[float, float, int]], int]:
    """Brackets ``[a, b)`` holding exactly one eigenvalue each, in ``[lo, hi]``.

    ``count(lams)`` returns the number of eigenvalues strictly below each entry.
    The scan starts on a uniform grid of ``INITIAL_INTERVALS`` steps and halves
    only those steps that still hold more than one eigenvalue.  Returns the
    brackets (with the count at their left end) and the count below ``lo``.
    """
    top = edge_above(hi)
    grid = np.linspace(lo, top, INITIAL_INTERVALS + 1)
    n = np.asarray(count(grid), dtype=np.int64)
    if np.any(np.diff(n) < 0):
        raise InconsistentCount("counting function is not monotone", lo=lo, hi=hi)
    evaluations = grid.size
    a, b = grid[:-1], grid[1:]
    na, nb = n[:-1], n[1:]
    keep = nb > na
    a, b, na, nb = a[keep], b[keep], na[keep], nb[keep]
    done: List[Tuple[float, float, int]] = []
    for _ in range(MAX_HALVINGS + 1):
        single = nb - na == 1
        done += [(float(x), float(y), int(c)) for x, y, c in zip(a[single], b[single], na[single])]
        a, b, na, nb = a[~single], b[~single], na[~single], nb[~single]
        if a.size == 0:
            break
        mid = 0.5 * (a + b)
        stuck = (mid <= a) | (mid >= b)
        if np.any(stuck):
            i = int(np.argmax(stuck))
            raise InconsistentCount(
                "eigenvalues within one block could not be separated",
                at=float(a[i]), multiplicity=int(nb[i] - na[i]))
        nm = np.asarray(count(mid), dtype=np.int64)
        evaluations += mid.size
        if evaluations > MAX_EVALUATIONS:
            raise WindowTooWide("scan budget exceeded", lo=lo, hi=hi, evaluations=evaluations)
        if np.any(nm < na) or np.any(nm > nb):
            raise InconsistentCount("counting function is not monotone", lo=lo, hi=hi)
        a, b, na, nb = (np.concatenate((a, mid)), np.concatenate((mid, b)),
                        np.concatenate((na, nm)), np.concatenate((nm, nb)))
        keep = nb > na
        a, b, na, nb = a[keep], b[keep], na[keep], nb[keep]
    else:
        raise InconsistentCount("halving limit reached before isolation", lo=lo, hi=hi)
    done.sort()
    return done, int(n[0])
