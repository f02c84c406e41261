"""End-to-end acceptance checks at full scale (several minutes on one core).

Each check prints one ``CRITERION n: PASS|FAIL`` line with the numbers it
was judged on, then asserts.
"""

import time

import numpy as np
import pytest
from scipy import stats

from seqdiff.core import Rng
from seqdiff.dtest import TestConfig, monte_carlo_pvalue
from seqdiff.experiments import (ExperimentSweep, binomial_band, mc_confidence_band,
                                 oracle_posterior_difference, run_local_validity, run_lpd_recovery,
                                 run_power, run_validity)
from seqdiff.labelmodel import fit_markov
from seqdiff.regressors import fit_nw

from test_eventlabel import _ri, _walk, prose_labels
from test_labelmodel import count_oracle
from test_regressors import direct_nw

pytestmark = pytest.mark.slow

LEVEL = 0.05
BOOT = TestConfig(null_model="mc_bootstrap", B=200, k=4)
PERM = TestConfig(null_model="permutation", B=200)


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} - {detail}")
    return emit


@pytest.fixture(scope="module")
def band():
    return mc_confidence_band(500, 10_000, 0.95, Rng(0).child(99), replicates=BOOT.B)


def test_criterion_1_bootstrap_valid_setting_c(report, band):
    res = run_validity(ExperimentSweep(setting="C", trials=500, test=BOOT))
    lo, hi = binomial_band(500, LEVEL)
    inside = band.contains(res.qq.deviations)
    pointwise_out = int(np.count_nonzero(~band.contains(res.qq.deviations, simultaneous=False)))
    ok = lo <= res.rejection_rate <= hi and inside.all()
    report(1, ok, f"rate={res.rejection_rate:.3f} band=[{lo:.3f},{hi:.3f}] "
                  f"qq_outside_simultaneous={int((~inside).sum())} qq_outside_pointwise={pointwise_out}/500")
    assert ok


def test_criterion_2_permutation_invalid_setting_c(report):
    res = run_validity(ExperimentSweep(setting="C", trials=500, test=PERM))
    _, hi = binomial_band(500, LEVEL)
    ok = res.rejection_rate > hi
    report(2, ok, f"rate={res.rejection_rate:.3f} must exceed {hi:.3f}")
    assert ok


def test_criterion_3_permutation_valid_settings_a_b(report):
    lo, hi = binomial_band(500, LEVEL)
    rates = {s: run_validity(ExperimentSweep(setting=s, trials=500, test=PERM)).rejection_rate
             for s in ("A", "B")}
    ok = all(lo <= r <= hi for r in rates.values())
    report(3, ok, " ".join(f"{s}={r:.3f}" for s, r in rates.items()) + f" band=[{lo:.3f},{hi:.3f}]")
    assert ok


def _overlap(a, b):
    return a.ci_low <= b.ci_high and b.ci_low <= a.ci_high


def test_criterion_4_power_increases_with_signal(report):
    rows = run_power(ExperimentSweep(setting="C", param="gamma", values=(0, 0.25, 0.5, 0.75, 1.0),
                                     trials=1000, test=BOOT))
    lo, hi = binomial_band(1000, LEVEL)
    monotone = all(b.power >= a.power or _overlap(a, b) for a, b in zip(rows, rows[1:]))
    size_ok = lo <= rows[0].power <= hi
    separated = rows[-1].ci_low > rows[0].ci_high
    ok = monotone and size_ok and separated
    report(4, ok, " ".join(f"g{r.value:g}={r.power:.3f}[{r.ci_low:.3f},{r.ci_high:.3f}]" for r in rows))
    assert ok


def test_criterion_5_power_vs_dependence(report):
    phi = run_power(ExperimentSweep(setting="A", param="phi", values=(0, 0.4, 0.8), gamma=0.5,
                                    trials=1000, test=BOOT))
    phip = run_power(ExperimentSweep(setting="A", param="phi_prime", values=(0, 0.4, 0.8), gamma=0.5,
                                     trials=1000, test=BOOT))
    flat = all(_overlap(a, b) for i, a in enumerate(phi) for b in phi[i + 1:])
    drop = phip[0].ci_low > phip[-1].ci_high
    ok = flat and drop
    fmt = lambda rs, n: " ".join(f"{n}{r.value:g}={r.power:.3f}[{r.ci_low:.3f},{r.ci_high:.3f}]" for r in rs)
    report(5, ok, f"{fmt(phi, 'phi')} | {fmt(phip, 'phi_prime')}")
    assert ok


def test_criterion_6_lpd_recovery(report):
    sweep = ExperimentSweep(setting="A", gamma=0.5, delta=0.25, trials=200, test=BOOT)
    c = run_lpd_recovery(sweep, (250, 4000), np.linspace(-2, 2, 81))
    mid = np.abs(c.grid) < 0.25
    worst = float(np.abs(c.mean[1, mid]).max())
    frac = float(np.mean(c.sd[1] < c.sd[0]))
    ok = worst <= 0.05 and frac >= 0.9
    report(6, ok, f"max|mean LPD| on (-0.25,0.25) at 4000 = {worst:.4f}; sd(4000)<sd(250) at {frac:.0%} of grid")
    assert ok


def test_criterion_7_oracle_suite(report):
    g = np.random.default_rng(7)
    timings = {}

    t = time.perf_counter()
    for _ in range(100):
        m = int(g.integers(2, 12))
        p1, p0, prior = g.dirichlet(np.ones(m)), g.dirichlet(np.ones(m)), float(g.uniform(0.01, 0.99))
        for s in range(m):
            b, sc = oracle_posterior_difference(p1, p0, prior, s)
            assert abs(b - sc) <= 1e-12
    timings["posterior_identity"] = time.perf_counter() - t

    t = time.perf_counter()
    for _ in range(1000):
        k = int(g.integers(0, 5))
        seq = g.integers(0, 2, int(g.integers(k + 1, 60))).tolist()
        np.testing.assert_allclose(fit_markov(seq, k, 0.5).prob_one, count_oracle(seq, k, 0.5), atol=1e-15)
    timings["markov_counts"] = time.perf_counter() - t

    t = time.perf_counter()
    for _ in range(1000):
        w = _walk(g, int(g.integers(1, 31)))
        assert _ri(w).tolist() == prose_labels(w.tolist(), 25.0)
    timings["event_labels"] = time.perf_counter() - t

    t = time.perf_counter()
    for B in (1, 2, 3, 4):
        for reps in np.array(np.meshgrid(*[[0.0, 1.0, 2.0]] * B)).T.reshape(-1, B):
            for lam in (0.0, 1.0, 2.0):
                assert monte_carlo_pvalue(lam, reps) == (1 + np.sum(reps > lam)) / (B + 1)
    timings["pvalue_formula"] = time.perf_counter() - t

    t = time.perf_counter()
    s, y = g.standard_normal(50), g.integers(0, 2, 50)
    reg = fit_nw(s, y)
    q = g.uniform(-3, 3, 1000)
    want = [direct_nw(s, y, reg.h, x, reg.fallback) for x in q]
    np.testing.assert_allclose(reg.predict(q), want, rtol=0, atol=1e-12)
    timings["nw_direct_sum"] = time.perf_counter() - t

    ok = max(timings.values()) < 1.0
    report(7, ok, " ".join(f"{k}={v:.2f}s" for k, v in timings.items()))
    assert ok


def test_criterion_8_local_test_uniform(report):
    sweep = ExperimentSweep(setting="B", gamma=0.0, trials=500, test=TestConfig(B=200, k=0))
    pv = run_local_validity(sweep, center=0.0, epsilon=0.5)
    ks = stats.kstest(pv, "uniform")
    ok = ks.pvalue > 0.05
    report(8, ok, f"KS D={ks.statistic:.4f} p={ks.pvalue:.3f} rate={np.mean(pv <= LEVEL):.3f}")
    assert ok
