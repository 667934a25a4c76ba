from __future__ import annotations

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_spec, random_domain_function, random_small_spec
from dspec.eigensolver import TruncatedProblem
from dspec.eigensolver.shooting import shooting_count
from dspec.forms import (
    Segment,
    form_energy,
    indicator_form_value,
    l2_norm_sq,
    make_function,
    make_test_function,
)
from dspec.model import cell_integrals, piece_parts

seeds = st.integers(0, 2 ** 32 - 1)
SETTINGS = settings(max_examples=40, deadline=None)


def _combine(spec, f, g, a, b):
    segs = []
    for s, t in zip(f.segments, g.segments):
        cs = list(s.coeffs) + [0.0] * (4 - len(s.coeffs))
        ct = list(t.coeffs) + [0.0] * (4 - len(t.coeffs))
        segs.append(Segment(s.a, s.b, tuple(a * x + b * y for x, y in zip(cs, ct))))
    return make_function(spec, segs)


def _close(x, y, tol=1e-9):
    return abs(x - y) <= tol * max(1.0, abs(x), abs(y))


@SETTINGS
@given(seeds, st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3))
def test_form_is_quadratic(seed, c):
    rng = np.random.default_rng(seed)
    spec = random_small_spec(rng, affine=True)
    f = random_domain_function(spec, rng)
    assert _close(form_energy(spec, f.scaled(c)).total, c * c * form_energy(spec, f).total)


@SETTINGS
@given(seeds)
def test_parallelogram_law(seed):
    rng = np.random.default_rng(seed)
    spec = random_small_spec(rng, affine=True)
    f, g = random_domain_function(spec, rng), random_domain_function(spec, rng)
    lhs = form_energy(spec, _combine(spec, f, g, 1, 1)).total + form_energy(spec, _combine(spec, f, g, 1, -1)).total
    rhs = 2 * form_energy(spec, f).total + 2 * form_energy(spec, g).total
    assert _close(lhs, rhs)


@SETTINGS
@given(seeds)
def test_sign_split_of_the_form(seed):
    rng = np.random.default_rng(seed)
    spec = random_small_spec(rng)
    fb = form_energy(spec, random_domain_function(spec, rng))
    assert fb.dirichlet >= 0 and fb.jump_plus >= 0 and fb.jump_minus >= 0
    assert _close(fb.total, fb.dirichlet + fb.potential + fb.jump_plus - fb.jump_minus)


@SETTINGS
@given(seeds)
def test_indicator_closed_form(seed):
    rng = np.random.default_rng(seed)
    spec = random_small_spec(rng, affine=True)
    k = int(rng.integers(1, spec.K + 1))
    f = make_test_function("indicator", {"spec": spec, "k": k})
    assert _close(form_energy(spec, f).total / l2_norm_sq(f), indicator_form_value(spec, k))


@SETTINGS
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.01, 2))
def test_piece_parts_split_the_integral(qa, qb, length):
    minus, plus = piece_parts(qa, qb, length)
    assert minus >= 0 and plus >= 0
    assert _close(plus - minus, 0.5 * (qa + qb) * length, 1e-12)


@SETTINGS
@given(seeds)
def test_cell_integrals_telescope(seed):
    rng = np.random.default_rng(seed)
    spec = random_small_spec(rng, affine=True)
    total = sum(cell_integrals(spec, k)[0] for k in range(1, spec.K + 1))
    exact = sum(0.5 * (p.at(p.a) + p.at(p.b)) * (p.b - p.a) for p in spec.potential.pieces)
    assert _close(total, exact, 1e-12)


@SETTINGS
@given(seeds)
def test_cell_absolute_integral_by_quadrature(seed):
    rng = np.random.default_rng(seed)
    spec = random_small_spec(rng, affine=True)
    k = int(rng.integers(1, spec.K + 1))
    a, b = float(spec.nodes[k - 1]), float(spec.nodes[k])
    n = 200000
    x = a + (np.arange(n) + 0.5) * (b - a) / n
    q = np.zeros_like(x)
    for p in spec.potential.pieces:
        mask = (x >= p.a) & (x < p.b)
        q[mask] = p.at(x[mask])
    assert abs(np.abs(q).sum() * (b - a) / n - cell_integrals(spec, k)[3]) < 1e-6


@settings(max_examples=25, deadline=None)
@given(seeds, st.floats(1.1, 4.0))
def test_stronger_positive_coupling_lowers_spectrum(seed, factor):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    points = list(np.cumsum(rng.uniform(0.4, 1.2, n)))
    betas = list(rng.uniform(0.2, 2.0, n))
    weak = TruncatedProblem(make_spec(points, betas))
    strong = TruncatedProblem(make_spec(points, [b * factor for b in betas[:-1]] + betas[-1:]))
    for lam in (0.5, 5.0, 30.0):
        assert shooting_count(strong, lam) >= shooting_count(weak, lam)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_count_monotone_in_lambda(seed):
    rng = np.random.default_rng(seed)
    problem = TruncatedProblem(random_small_spec(rng))
    counts = [shooting_count(problem, lam) for lam in np.linspace(-60, 60, 25)]
    assert all(a <= b for a, b in zip(counts, counts[1:]))
