"""End-to-end acceptance runs; each test records one summary line before asserting."""

from __future__ import annotations

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, make_spec, random_domain_function, random_small_spec
from dspec.criteria import molchanov_by_epsilon, theorem_verdicts, window_sup
from dspec.eigensolver import TruncatedProblem, eigenvalues_shooting, galerkin_spectrum
from dspec.eigensolver.compare import compare_engines, spectral_bracket
from dspec.eigensolver.oracle import dense_oracle
from dspec.eigensolver.shooting import shooting_count
from dspec.forms import form_energy, indicator_form_value, make_test_function, operator_form_identity_check
from dspec.model import cell_integrals, truncate
from dspec.neumann import ess_spectrum_N
from dspec.scenarios import (
    brinck_gap_spec,
    kronig_penney_spec,
    molchanov_gap_spec,
    shrinking_cells_spec,
    unbounded_steps_spec,
)

PI2 = math.pi ** 2
# deficit of the K=20 dense-oracle count in [pi^2 - 1, pi^2 + 1] (16 of 20)
KP_DEFICIT = 4


def _record(label: str, ok: bool, start: float, detail: str = "") -> None:
    elapsed = time.perf_counter() - start
    line = f"{label}: {'PASS' if ok else 'FAIL'} ({elapsed:.2f}s)"
    if detail:
        line += f" {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def test_criterion_1_free_interval():
    t0 = time.perf_counter()
    problem = TruncatedProblem(make_spec([10], [1.0]))
    exact = np.array([(math.pi * n / 10) ** 2 for n in range(20)])
    shot = eigenvalues_shooting(problem, (-1.0, exact[-1] + 0.1)).eigenvalues
    rel = np.abs(shot - exact) / np.maximum(exact, 1e-300)
    shoot_ok = shot.size == 20 and shot[0] == pytest.approx(0.0, abs=1e-12) and rel[1:].max() <= 1e-10
    errs = []
    for h in (1 / 128, 1 / 256):
        g = galerkin_spectrum(problem, h, (-1.0, exact[-1] + 1.0)).eigenvalues[:20]
        errs.append(g[1:] - exact[1:])
    order = np.log2(errs[0] / errs[1])
    elapsed = time.perf_counter() - t0
    ok = shoot_ok and order.min() >= 1.9 and elapsed < 1.0
    _record("criterion 1 free spectrum", ok, t0,
            f"shoot rel {rel[1:].max():.1e}, galerkin order min {order.min():.3f}")
    assert shoot_ok
    assert order.min() >= 1.9
    assert elapsed < 1.0


def test_criterion_2_decoupling():
    t0 = time.perf_counter()
    spec = make_spec(list(range(1, 51)), [math.inf] * 50)
    res = eigenvalues_shooting(TruncatedProblem(spec), (-1.0, 50.0))
    expected = [(math.pi * n) ** 2 for n in range(3)]
    values_ok = res.values.tolist() == pytest.approx(expected, rel=1e-15, abs=0.0)
    mult_ok = res.multiplicities.tolist() == [50, 50, 50]
    elapsed = time.perf_counter() - t0
    _record("criterion 2 decoupling", values_ok and mult_ok and elapsed < 1.0, t0,
            f"multiplicities {res.multiplicities.tolist()}")
    assert values_ok and mult_ok
    assert elapsed < 1.0


def _kp_counts(K: int, lam_max: float):
    vals = eigenvalues_shooting(TruncatedProblem(truncate(kronig_penney_spec(1.0, 0.0, K), K=K)),
                                (-1.0, lam_max)).eigenvalues
    near = int(np.sum((vals >= PI2 - 1) & (vals <= PI2 + 1)))
    band = int(np.sum((vals >= PI2 + 1) & (vals <= lam_max)))
    return near, band


def test_kronig_penney_deficit_from_oracle():
    spec = kronig_penney_spec(1.0, 0.0, 20)
    vals = dense_oracle(TruncatedProblem(spec), 0.02, (PI2 - 1, PI2 + 1)).eigenvalues
    assert 20 - vals.size == KP_DEFICIT


def test_criterion_3_kronig_penney():
    t0 = time.perf_counter()
    lam_max = 4 * PI2 - 1
    near_50, band_50 = _kp_counts(50, lam_max)
    near_100, band_100 = _kp_counts(100, lam_max)
    elapsed = time.perf_counter() - t0
    cluster_ok = near_100 >= 100 - KP_DEFICIT
    band_ok = abs(band_100 - band_50) <= 2
    _record("criterion 3 Kronig-Penney clustering", cluster_ok and band_ok and elapsed < 30, t0,
            f"near {near_50}->{near_100} (need >= {100 - KP_DEFICIT}), band {band_50}->{band_100}")
    assert cluster_ok and band_ok
    assert elapsed < 30


def test_criterion_4_shrinking_cells():
    t0 = time.perf_counter()
    spec = shrinking_cells_spec(0.5, 400)
    counts = []
    for K in (200, 400):
        problem = TruncatedProblem(truncate(spec, K=K))
        n1, n50 = shooting_count(problem, 1.0), shooting_count(problem, 50.0)
        counts.append((n1, n50 - n1))
    model = ess_spectrum_N(spec, 50.0)
    elapsed = time.perf_counter() - t0
    grows = counts[1][0] > counts[0][0]
    band_ok = abs(counts[1][1] - counts[0][1]) <= 2
    pred_ok = model.points == (0.0,)
    _record("criterion 4 shrinking cells", grows and band_ok and pred_ok and elapsed < 60, t0,
            f"N(1) {counts[0][0]}->{counts[1][0]}, count[1,50] {counts[0][1]}->{counts[1][1]}, "
            f"prediction {list(model.points)}")
    assert grows and band_ok and pred_ok
    assert elapsed < 60


def test_criterion_5_verdict_patterns():
    t0 = time.perf_counter()
    quarter = Fraction(1, 4)
    eps = (Fraction(1), Fraction(1, 2), quarter)
    first = theorem_verdicts(molchanov_gap_spec("i"), epsilons=eps)
    second_spec = molchanov_gap_spec("ii")
    second = theorem_verdicts(second_spec, epsilons=eps)
    at_quarter = molchanov_by_epsilon(second_spec, [quarter])["1/4"]
    steps = theorem_verdicts(unbounded_steps_spec(20))
    brinck = brinck_gap_spec(40)
    means = [cell_integrals(brinck, 2 * j)[1] / float(brinck.lengths[2 * j - 1]) for j in range(1, 20)]
    checks = {
        "first molchanov Holds": first["molchanov"].holds,
        "first mean_q Fails": first["mean_q_divergence"].fails,
        "second molchanov Fails at 1/4": at_quarter.fails,
        "second mean_q Holds": second["mean_q_divergence"].holds,
        "steps semibounded Fails": steps["semibounded"].fails,
        "steps nec_2 witness": steps["nec_2"].fails and bool(steps["nec_2"].witness),
        "brinck cell means": all(abs(m - j) <= 1e-12 * j for j, m in enumerate(means, start=1)),
    }
    elapsed = time.perf_counter() - t0
    ok = all(checks.values()) and elapsed < 1.0
    _record("criterion 5 verdict patterns", ok, t0,
            ", ".join(k for k, v in checks.items() if not v) or "all patterns match")
    assert all(checks.values()), checks
    assert elapsed < 1.0


def test_criterion_5_literal_window_bound():
    t0 = time.perf_counter()
    ws = window_sup(brinck_gap_spec(40), 1.0, "neg")
    ok = ws.value <= 0.5
    _record("criterion 5 window sup <= 1/2", ok, t0,
            f"sup {ws.value:.4f} at x={ws.x:.4f}; tail sup {ws.tail_value:.4f}")
    assert ws.value <= 0.5


def test_criterion_6_form_identity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    worst = 0.0
    for i in range(100):
        spec = random_small_spec(rng, 4, affine=bool(i % 2))
        f = random_domain_function(spec, rng)
        t = form_energy(spec, f).total
        worst = max(worst, operator_form_identity_check(spec, f) / (1.0 + abs(t)))
    ok = worst <= 1e-9
    _record("criterion 6 form identity", ok, t0, f"worst scaled residual {worst:.1e}")
    assert ok


def test_criterion_7_engine_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst, mismatched = 0.0, 0
    for _ in range(50):
        cmp = compare_engines(TruncatedProblem(random_small_spec(rng)), n=8)
        worst = max(worst, cmp.worst_relative)
        mismatched += len(set(cmp.counts.values())) != 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and mismatched == 0 and elapsed < 120
    _record("criterion 7 engine equivalence", ok, t0,
            f"worst relative {worst:.1e}, count mismatches {mismatched}")
    assert worst <= 1e-6 and mismatched == 0
    assert elapsed < 120


def _dilated(spec, s):
    pts = [s * float(x) for x in spec.nodes[1:]]
    betas = [s * float(b) for b in spec.strengths.values]
    pieces = [{"from": s * p.a, "to": s * p.b, "c0": p.at(p.a) / s ** 2, "c1": 0.0}
              for p in spec.potential.pieces]
    return make_spec(pts, betas, pieces)


def test_criterion_8_dilation():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(10):
        spec = random_small_spec(rng)
        base = TruncatedProblem(spec)
        lo, hi = spectral_bracket(base, 8)
        ref = eigenvalues_shooting(base, (lo, hi)).eigenvalues[:8]
        for s in (0.5, 2.0):
            got = eigenvalues_shooting(TruncatedProblem(_dilated(spec, s)), (lo / s ** 2, hi / s ** 2))
            scaled = got.eigenvalues[:8] * s ** 2
            worst = max(worst, float(np.max(np.abs(scaled - ref) / np.maximum(1.0, np.abs(ref)))))
    ok = worst <= 1e-8
    _record("criterion 8 dilation covariance", ok, t0, f"worst relative {worst:.1e}")
    assert ok


def test_criterion_9_indicator_closed_form():
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    choices = ("inf", "pos", "neg")
    worst = 0.0
    for _ in range(1000):
        d = rng.uniform(0.05, 3.0, 3)
        pts = list(np.cumsum(d))
        betas = []
        for kind in rng.choice(choices, 3):
            mag = float(rng.uniform(0.1, 5.0))
            betas.append(math.inf if kind == "inf" else (mag if kind == "pos" else -mag))
        c1 = float(rng.uniform(-3, 3)) if rng.random() < 0.5 else 0.0
        c0 = float(rng.uniform(-10, 10))
        spec = make_spec(pts, betas, [{"from": 0, "to": pts[-1], "c0": c0, "c1": c1}])
        k = int(rng.integers(1, 4))
        f = make_test_function("indicator", {"spec": spec, "k": k})
        v = indicator_form_value(spec, k)
        worst = max(worst, abs(form_energy(spec, f).total - v) / max(1.0, abs(v)))
    ok = worst <= 1e-12
    _record("criterion 9 indicator closed form", ok, t0, f"worst scaled difference {worst:.1e}")
    assert ok
