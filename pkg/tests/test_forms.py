from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import make_spec, random_domain_function
from dspec.errors import DomainViolation, JumpAtContinuityPoint, UnsupportedKind, ZeroFunction
from dspec.forms import (
    Segment,
    check_domain,
    form_energy,
    hermite_segment,
    indicator_form_value,
    l2_norm_sq,
    make_function,
    make_test_function,
    operator_form_identity_check,
    rayleigh_quotient,
)
from dspec.scenarios import brinck_gap_spec


def test_tent_energy_parts():
    spec = make_spec([1, 2, 3, 4], [1, 0.5, 2, 1])
    f = make_test_function("tent", {"spec": spec, "k": 2})
    fb = form_energy(spec, f)
    assert fb.dirichlet == pytest.approx(1.0, abs=1e-14)
    assert l2_norm_sq(f) == pytest.approx(1 / 3, abs=1e-14)
    assert fb.jump_plus == pytest.approx(1 / 0.5, abs=1e-14)
    assert fb.total == pytest.approx(1.0 + 2.0, abs=1e-13)


def test_step_energy_is_boundary_couplings():
    spec = make_spec([1, 2, 3, 4], [1, -0.5, 2, 1])
    f = make_test_function("step", {"spec": spec, "i": 1, "j": 3})
    fb = form_energy(spec, f)
    assert fb.total == pytest.approx(1 / 1 + 1 / 2, abs=1e-14)
    assert f.trace(1).jump == 1.0 and f.trace(3).jump == -1.0


def test_interior_bump_has_no_jump_terms():
    spec = make_spec([2, 4], [0.7, 1])
    seg = [hermite_segment(0.5, 1.0, 0.0, 0.0, 1.0, 0.0), hermite_segment(1.0, 1.5, 1.0, 0.0, 0.0, 0.0)]
    f = make_function(spec, seg)
    fb = form_energy(spec, f)
    assert fb.jump_plus == fb.jump_minus == 0.0
    # int of (6 s (1 - s) / h)^2 h over two halves of width h = 1/2
    assert fb.total == pytest.approx(2 * 6 / 5 / 0.5, rel=1e-13)


@pytest.mark.parametrize("betas, pieces, k, expected", [
    ([1, 1, 1], None, 2, 2.0),
    ([float("inf"), -1, 1], [{"from": 0, "to": 5, "c0": 3.0}], 2, 3.0 - 0.5),
])
def test_indicator_closed_form(betas, pieces, k, expected):
    points = [1, 2, 3] if pieces is None else [1, 3, 5]
    spec = make_spec(points, betas, pieces)
    assert indicator_form_value(spec, k) == pytest.approx(expected, abs=1e-15)
    h = make_test_function("indicator", {"spec": spec, "k": k})
    assert form_energy(spec, h).total == pytest.approx(expected, abs=1e-13)


def test_indicator_first_cell_has_no_origin_coupling():
    spec = make_spec([1, 2], [2, 1])
    assert indicator_form_value(spec, 1) == pytest.approx(0.5, abs=0)


def test_indicator_on_short_negative_cells():
    spec = brinck_gap_spec(20)
    for k in range(2, 21, 2):
        assert indicator_form_value(spec, k) == pytest.approx(-k / 2, rel=1e-13)


def test_indicator_value_is_half_on_length_four():
    spec = make_spec([1, 2, 6], [1, 1, 1])
    f = make_test_function("indicator", {"spec": spec, "k": 3})
    assert f(np.array([3.0, 5.5])) == pytest.approx([0.5, 0.5])


def test_ramp_norm_uses_one_third():
    d = 1.0 / np.sqrt(np.arange(1, 21))
    spec = make_spec(list(np.cumsum(d)), [1.0] * 20)
    f = make_test_function("ramp", {"spec": spec, "a": list(d)})
    assert l2_norm_sq(f) == pytest.approx(np.sum(d ** 3) / 3, rel=1e-13)
    assert form_energy(spec, f).dirichlet == pytest.approx(np.sum(d), rel=1e-13)


def test_cosine_quotient_is_pi_squared():
    spec = make_spec([1], [float("inf")])
    f = make_test_function("cosine", {"spec": spec, "a": 0.0, "b": 1.0, "freq": math.pi})
    assert rayleigh_quotient(spec, f) == pytest.approx(math.pi ** 2, rel=1e-12)


def test_indicator_quotient_equals_closed_form():
    spec = make_spec([1, 2.5, 3], [0.3, -2, 4], [{"from": 0, "to": 3, "c0": -1.0, "c1": 0.5}])
    for k in (1, 2, 3):
        h = make_test_function("indicator", {"spec": spec, "k": k})
        assert rayleigh_quotient(spec, h) == pytest.approx(indicator_form_value(spec, k), rel=1e-13)


def _fd_form(spec, f, n):
    """Midpoint-rule form on ``n`` subintervals per cell: an independent discretization."""
    total = 0.0
    nodes = spec.nodes
    for k in range(1, spec.K + 1):
        a, b = float(nodes[k - 1]), float(nodes[k])
        x = np.linspace(a, b, n + 1)
        seg = [s for s in f.segments if s.a <= 0.5 * (a + b) < s.b][0]
        v = seg.value(x)
        h = (b - a) / n
        mid = 0.5 * (x[1:] + x[:-1])
        q = np.array([spec.q_at(t) for t in mid])
        total += np.sum(np.diff(v) ** 2) / h + h * np.sum(q * seg.value(mid) ** 2)
    for k, tr in f.traces.items():
        beta = spec.strengths.values[k - 1]
        if math.isfinite(beta) and beta != 0.0:
            total += tr.jump ** 2 / beta
    return total


def test_random_cubic_matches_finite_difference_form(rng):
    spec = make_spec([0.7, 1.6, 2.4], [0.8, -1.5, 1.0],
                     [{"from": 0, "to": 0.7, "c0": 2.0}, {"from": 0.7, "to": 1.6, "c0": -3.0},
                      {"from": 1.6, "to": 2.4, "c0": 1.0}])
    f = random_domain_function(spec, rng)
    coarse, fine = _fd_form(spec, f, 400), _fd_form(spec, f, 800)
    oracle = (4 * fine - coarse) / 3
    t = form_energy(spec, f).total
    assert abs(t - oracle) <= 1e-6 * max(1.0, abs(t))


def test_identity_inside_one_cell():
    spec = make_spec([3], [float("inf")], [{"from": 0, "to": 3, "c0": 1.0, "c1": -0.3}])
    f = make_function(spec, [hermite_segment(0.5, 1.5, 0, 0, 1, 0), hermite_segment(1.5, 2.5, 1, 0, 0, 0)])
    assert operator_form_identity_check(spec, f) <= 1e-12


def test_identity_with_jump():
    spec = make_spec([1, 2], [-0.7, 1.0])
    s = 0.4
    f = make_function(spec, [hermite_segment(0, 1, 1.0, 0.0, 1.0, s),
                             hermite_segment(1, 2, 1.0 - 0.7 * s, s, 0.0, 0.0)])
    assert operator_form_identity_check(spec, f) <= 1e-9


def test_derivative_mismatch_is_domain_violation():
    spec = make_spec([1, 2], [1.0, 1.0])
    f = make_function(spec, [hermite_segment(0, 1, 1.0, 0.0, 1.0, 0.5),
                             hermite_segment(1, 2, 1.5, 0.2, 0.0, 0.0)])
    with pytest.raises(DomainViolation):
        check_domain(spec, f)


def test_jump_at_continuity_point_rejected():
    spec = make_spec([1, 2], [0.0, 1.0])
    f = make_test_function("step", {"spec": spec, "i": 1, "j": 2})
    with pytest.raises(JumpAtContinuityPoint):
        form_energy(spec, f)


def test_support_outside_truncation():
    spec = make_spec([1, 2], [1.0, 1.0])
    f = make_test_function("tent", {"spec": spec, "k": 2})
    with pytest.raises(DomainViolation):
        form_energy(spec, f)


def test_zero_function_quotient():
    spec = make_spec([1], [1.0])
    f = make_function(spec, [Segment(0.0, 1.0, (0.0,))])
    with pytest.raises(ZeroFunction):
        rayleigh_quotient(spec, f)


def test_unknown_kind():
    with pytest.raises(UnsupportedKind):
        make_test_function("wavelet", {"spec": make_spec([1], [1.0])})
