from __future__ import annotations

import json
import math

import pytest

from dspec.config import spec_from_dict, spec_to_dict
from dspec.criteria import theorem_verdicts
from dspec.scenarios import (
    SCENARIOS,
    Stabilization,
    brinck_gap_spec,
    kronig_penney_spec,
    molchanov_gap_spec,
    run_brinck_gap,
    run_embedding_failure,
    run_h_stability,
    run_kronig_penney,
    run_molchanov_gap,
    run_shrinking_cells,
    run_unbounded_steps,
    scale_strengths,
    unbounded_steps_spec,
    window_counts,
)

ZETA_3_2 = 2.6123753486854883


def test_stabilization_rule():
    rule = Stabilization()
    assert rule.stable(10, 12)
    assert not rule.stable(10, 13)
    assert rule.stable(100, 105)
    assert not rule.stable(100, 106)


def test_window_counts():
    near, gaps = window_counts([0.1, 0.9, 2.0, 3.95], [0.0, 4.0], 0.5, 5.0)
    assert near == {"0": 1, "4": 1}
    assert sum(gaps.values()) == 2


@pytest.mark.parametrize("name", ["shrinking-cells", "unbounded-steps", "brinck-gap",
                                  "embedding-failure", "h-stability"])
def test_default_scenarios_pass(name):
    result = SCENARIOS[name]()
    assert result.passed, {k: v for k, v in result.checks.items() if not v}


@pytest.mark.parametrize("variant", ["i", "ii"])
def test_molchanov_variants(variant):
    assert run_molchanov_gap(variant).passed


def test_kronig_penney_default():
    result = run_kronig_penney()
    assert result.passed
    assert len(result.rungs) == 3


def test_kronig_penney_longer_cells():
    result = run_kronig_penney(a=2.0, truncations=(25, 50))
    assert result.passed
    assert result.data["ess_model"]["points"][1] == pytest.approx((math.pi / 2) ** 2, rel=1e-12)


def test_kronig_penney_shifted_potential():
    result = run_kronig_penney(c=1.0, truncations=(25, 50))
    assert result.passed
    assert result.data["ess_model"]["points"][0] == pytest.approx(1.0)


def test_shrinking_cells_constant_strength_claims_nothing():
    result = run_shrinking_cells(beta="constant", truncations=(100, 200))
    assert result.passed
    assert set(result.checks) == {"transfer_not_claimed"}


def test_unbounded_steps_lowest_decreases():
    result = run_unbounded_steps()
    lows = result.data["lowest_eigenvalues"]
    assert lows[1] < lows[0] < -10


def test_brinck_literal_window_bound_recorded():
    result = run_brinck_gap()
    assert result.passed
    assert result.data["window_sup_le_half"] is False


def test_embedding_failure_norm_limit():
    result = run_embedding_failure(sizes=(10 ** 4,), check_K=100)
    assert result.data["l2_limit"] == pytest.approx(1 / 20 + ZETA_3_2 / 3, rel=1e-15)


def test_h_stability_with_negative_constant_strengths():
    spec = kronig_penney_spec(1.0, 0.0, 50, beta_constant=-1.0)
    result = run_h_stability(spec, K=50)
    assert result.passed
    assert "necessity_flagged" in result.checks


def test_scale_strengths_keeps_partition():
    spec = unbounded_steps_spec(10)
    scaled = scale_strengths(spec, 2.0)
    assert list(scaled.nodes) == list(spec.nodes)
    for a, b in zip(spec.strengths.values, scaled.strengths.values):
        assert b == 2.0 * a or (math.isinf(a) and math.isinf(b))


@pytest.mark.parametrize("build", [brinck_gap_spec, unbounded_steps_spec,
                                   lambda: molchanov_gap_spec("i"), lambda: molchanov_gap_spec("ii")])
def test_spec_round_trip_keeps_verdicts(build):
    spec = build()
    again = spec_from_dict(json.loads(json.dumps(spec_to_dict(spec))))
    before = theorem_verdicts(spec).as_dict()
    after = theorem_verdicts(again).as_dict()
    assert before == after
