from __future__ import annotations

import math

import pytest

from conftest import generated, make_spec
from dspec.config import spec_from_dict
from dspec.eigensolver.problem import TruncatedProblem
from dspec.eigensolver.shooting import eigenvalues_shooting
from dspec.errors import CutoffTooLow, HypothesisNotMet, UndecidableTail
from dspec.neumann import (
    ANALYTIC,
    SHOOTING,
    cell_neumann_eigs,
    compute_D,
    direct_sum_spectrum,
    ess_spectrum_N,
    periodic_prediction,
)

PI2 = math.pi ** 2
# lowest Neumann eigenvalue of -f'' + x f on [0, 1]; root of the Airy cross product
# Ai'(-l) Bi'(1-l) - Ai'(1-l) Bi'(-l) computed with mpmath at 30 digits
AIRY_LOWEST = 0.49167256999894964
AIRY_SECOND = 10.376200680073663


def test_free_unit_cell():
    cs = cell_neumann_eigs(make_spec([1], [1.0]), 1, 50)
    assert cs.method == ANALYTIC
    assert cs.eigenvalues == pytest.approx((0.0, PI2, 4 * PI2), rel=1e-15)


def test_shifted_half_cell():
    spec = make_spec([0.5], [1.0], [{"from": 0, "to": 0.5, "c0": 1.0}])
    assert cell_neumann_eigs(spec, 1, 50).eigenvalues == pytest.approx((1.0, 4 * PI2 + 1.0), rel=1e-15)


def test_linear_cell_matches_airy_oracle():
    spec = make_spec([1], [1.0], [{"from": 0, "to": 1, "c0": 0, "c1": 1}])
    cs = cell_neumann_eigs(spec, 1, 20)
    assert cs.method == SHOOTING
    assert cs.eigenvalues[0] == pytest.approx(AIRY_LOWEST, rel=1e-10)
    assert cs.eigenvalues[1] == pytest.approx(AIRY_SECOND, rel=1e-10)


def test_cutoff_below_potential():
    spec = make_spec([1], [1.0], [{"from": 0, "to": 1, "c0": 5.0}])
    with pytest.raises(CutoffTooLow):
        cell_neumann_eigs(spec, 1, 4.0)


def _multiset(entries):
    return [(round(e.value, 12), e.multiplicity) for e in entries]


def test_direct_sum_two_unit_cells():
    entries = direct_sum_spectrum(make_spec([1, 2], [1, 1]), 50)
    assert _multiset(entries) == [(0.0, 2), (round(PI2, 12), 2), (round(4 * PI2, 12), 2)]
    assert entries[0].cells == (1, 2)


def test_direct_sum_unequal_cells():
    entries = direct_sum_spectrum(make_spec([1, 3], [1, 1]), 12)
    assert _multiset(entries) == [(0.0, 2), (round(PI2 / 4, 12), 1), (round(PI2, 12), 2)]


def test_direct_sum_periodic_multiplicity():
    spec = generated({"kind": "arithmetic", "start": 1, "step": 1}, {"kind": "linear", "slope": 1}, c0=1.0, count=5)
    assert _multiset(direct_sum_spectrum(spec, 12)) == [(1.0, 5), (round(PI2 + 1, 12), 5)]


def test_direct_sum_independent_of_jobs():
    spec = generated({"kind": "sum_power", "exponent": 0.5}, {"kind": "linear", "slope": 1}, c1=0.1, count=60)
    assert direct_sum_spectrum(spec, 80, jobs=1) == direct_sum_spectrum(spec, 80, jobs=4)


def test_constant_cells_agree_with_shooting():
    spec = make_spec([1, 2.7, 3.1], [float("inf")] * 3,
                     [{"from": 0, "to": 1, "c0": 2.0}, {"from": 1, "to": 2.7, "c0": -1.0},
                      {"from": 2.7, "to": 3.1, "c0": 0.5}])
    for k in (1, 2, 3):
        cs = cell_neumann_eigs(spec, k, 200)
        lo, hi = spec.cell(k)
        single = make_spec([hi - lo], [1.0], [{"from": 0, "to": hi - lo, "c0": spec.cell_pieces[k - 1][0].c0}])
        ref = eigenvalues_shooting(TruncatedProblem(single), (-10, 200)).eigenvalues
        assert list(cs.eigenvalues) == pytest.approx(list(ref), rel=1e-10)


def test_D_constant_lengths():
    spec = generated({"kind": "arithmetic", "start": 2, "step": 2}, {"kind": "linear", "slope": 1}, count=10)
    assert compute_D(spec) == (2.0,)


def test_D_shrinking_lengths():
    spec = generated({"kind": "sum_power", "exponent": 0.5}, {"kind": "linear", "slope": 1}, count=100)
    assert compute_D(spec) == ()


def test_D_alternating_lengths():
    points = []
    x = 0.0
    for k in range(20):
        x += 1.0 if k % 2 == 0 else 2.0
        points.append(x)
    spec = spec_from_dict({
        "partition": {"points": points}, "strengths": {"values": [1.0] * 20},
        "potential": {"pieces": [{"from": 0, "to": x, "c0": 0}]},
        "tail": {"pattern": {"cells": [{"length": 1, "beta": 1, "pieces": [{"length": 1}]},
                                       {"length": 2, "beta": 1, "pieces": [{"length": 2}]}]}},
    })
    assert compute_D(spec) == (1.0, 2.0)
    assert ess_spectrum_N(spec, 12).points == pytest.approx((0.0, PI2 / 4, PI2), rel=1e-15)


def test_D_needs_tail():
    with pytest.raises(UndecidableTail):
        compute_D(make_spec([1, 2], [1, 1]))


def test_ess_unit_lattice():
    spec = generated({"kind": "arithmetic", "start": 1, "step": 1}, {"kind": "linear", "slope": 1}, count=10)
    assert ess_spectrum_N(spec, 50).points == pytest.approx((0.0, PI2, 4 * PI2), rel=1e-15)


def test_ess_shrinking_is_zero():
    spec = generated({"kind": "sum_power", "exponent": 0.5}, {"kind": "linear", "slope": 1}, count=100)
    assert ess_spectrum_N(spec, 50).points == (0.0,)


def test_ess_requires_vanishing_mean():
    spec = generated({"kind": "arithmetic", "start": 1, "step": 1}, {"kind": "linear", "slope": 1}, c0=1.0, count=10)
    with pytest.raises(HypothesisNotMet):
        ess_spectrum_N(spec, 50)


def test_periodic_prediction_shift():
    assert periodic_prediction(1.0, 1.0, 12) == pytest.approx((1.0, PI2 + 1), rel=1e-15)
    assert periodic_prediction(2.0, 0.0, 10) == pytest.approx((0.0, PI2 / 4, PI2), rel=1e-15)
