from __future__ import annotations

import math

import numpy as np
import pytest

from dspec.config import spec_from_dict
from dspec.forms import hermite_segment, make_function

ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_spec(points, betas, pieces=None, tail=None):
    """Small explicit spec; ``pieces`` defaults to ``q = 0``."""
    cfg = {
        "partition": {"points": list(points)},
        "strengths": {"values": ["inf" if (isinstance(b, float) and math.isinf(b)) else b for b in betas]},
        "potential": {"pieces": pieces or [{"from": 0, "to": points[-1], "c0": 0, "c1": 0}]},
    }
    if tail is not None:
        cfg["tail"] = tail
    return spec_from_dict(cfg)


def generated(partition, strengths, c0=0.0, c1=0.0, count=None):
    part = dict(partition)
    if count is not None:
        part["count"] = count
    return spec_from_dict({
        "partition": {"generator": part},
        "strengths": {"generator": strengths},
        "potential": {"pieces": [{"from": 0, "to": "inf", "c0": c0, "c1": c1}]},
    })


def random_small_spec(rng: np.random.Generator, n_cells: int = None, affine: bool = False):
    """Piecewise-constant (or affine) q in [-5, 5] and |beta| in [0.2, 3] with random signs."""
    n = int(rng.integers(1, 7)) if n_cells is None else n_cells
    d = rng.uniform(0.3, 1.5, n)
    x = np.cumsum(d)
    betas = rng.uniform(0.2, 3.0, n) * rng.choice([-1.0, 1.0], n)
    pieces, left = [], 0.0
    for right in x:
        c1 = float(rng.uniform(-2, 2)) if affine else 0.0
        c0 = float(rng.uniform(-5, 5)) - c1 * left
        pieces.append({"from": left, "to": float(right), "c0": c0, "c1": c1})
        left = float(right)
    return make_spec([float(v) for v in x], [float(b) for b in betas], pieces)


def random_domain_function(spec, rng: np.random.Generator):
    """Piecewise cubic satisfying f'(0) = 0, every interface condition and f = f' = 0 at x_K."""
    nodes = spec.nodes
    segs = []
    v_right, s_right = float(rng.normal()), 0.0
    for k in range(1, spec.K + 1):
        a, b = float(nodes[k - 1]), float(nodes[k])
        if k == spec.K:
            v_left, s_left = 0.0, 0.0
        else:
            beta = spec.strengths.values[k - 1]
            v_left = float(rng.normal())
            s_left = 0.0 if math.isinf(beta) else float(rng.normal())
        segs.append(hermite_segment(a, b, v_right, s_right, v_left, s_left))
        if k < spec.K:
            beta = spec.strengths.values[k - 1]
            if math.isinf(beta):
                v_right, s_right = float(rng.normal()), 0.0
            else:
                v_right, s_right = v_left + beta * s_left, s_left
    return make_function(spec, segs)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
