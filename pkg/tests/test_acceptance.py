"""End-to-end acceptance checks.

Each test prints exactly one PASS/FAIL line on the terminal (bypassing
capture) before asserting, so a full run yields an eleven-line scorecard.
Scenario replications are shared through session fixtures.
"""

import math
import time

import numpy as np
import pytest
from scipy import stats

from prmix import (
    EProcessRun,
    IndexGrid,
    KernelFamily,
    PrState,
    SimpleNull,
    WeightSchedule,
    growth_rate,
    make_null_model,
)
from prmix.confidence import confidence_set, gaussian_mean_candidates
from prmix.null_models import grenander_loglik, logconcave_loglik
from prmix.oracles import (
    oracle_grenander_loglik,
    oracle_logconcave,
    oracle_marginal_replay,
)
from prmix.simulate import (
    ScenarioSpec,
    default_burn_in,
    estimate_slope,
    replication_rng,
    run_replications,
    terminal_log_e,
    true_density,
)

WORKERS = 4

GAUSS_GRID = IndexGrid([-10.0, 0.01], [20.0, 3.0], [40, 40])
GAMMA_GRID = IndexGrid([1.0, 1e-5], [15.0, 5.0], [40, 40], ["linear", "log"])
SCHEDULE = WeightSchedule.power(0.67)


@pytest.fixture
def verdict(capsys):
    def _verdict(label, ok, detail):
        with capsys.disabled():
            print(f"criterion {label}: {'PASS' if ok else 'FAIL'} ({detail})",
                  flush=True)
        assert ok, f"criterion {label}: {detail}"

    return _verdict


def _scenario(**kw):
    return ScenarioSpec.from_config(kw)


def _slope_run(spec):
    rows, failures = run_replications(spec, workers=WORKERS)
    assert failures == [], failures
    return rows, estimate_slope(rows, default_burn_in(spec.max_n))


@pytest.fixture(scope="session")
def null_streams():
    """500 standard-normal streams against the matching singleton null.

    Returns (max over n <= 500 of log evidence, log evidence at n = 200)
    per stream, plus the wall time of the whole sweep.
    """
    fam = KernelFamily("gaussian")
    logpdf = stats.norm().logpdf
    max_log_e = np.empty(500)
    log_e_200 = np.empty(500)
    t0 = time.perf_counter()
    for rep in range(500):
        xs = replication_rng(101, rep).normal(size=500)
        pr = PrState(fam, GAUSS_GRID, WeightSchedule.power(0.67))
        inc = pr.update_many(xs)
        num = np.cumsum(inc)
        den = np.cumsum(logpdf(xs))
        log_e = num - den
        max_log_e[rep] = float(np.max(log_e))
        log_e_200[rep] = float(log_e[199])
    return max_log_e, log_e_200, time.perf_counter() - t0


@pytest.fixture(scope="session")
def gamma_scenarios():
    out = {}
    for shape, seed in ((2.0, 11), (5.0, 12)):
        spec = _scenario(
            generator="gamma", gen_params={"shape": shape}, null="monotone",
            family="gamma", grid=GAMMA_GRID.spec(), schedule_gamma=0.67,
            n_reps=20, max_n=2000, checkpoint_stride=100, seed=seed,
        )
        _, slope = _slope_run(spec)
        pdf, domain = true_density(spec)
        report = growth_rate(pdf, "monotone", KernelFamily("gamma"),
                             GAMMA_GRID, domain)
        out[shape] = (slope, report.delta)
    return out


@pytest.fixture(scope="session")
def mixture_scenarios():
    out = {}
    for mu, seed in ((6.0, 21), (10.0, 22)):
        spec = _scenario(
            generator="normal_mixture", gen_params={"mu": mu}, null="gaussian",
            family="gaussian", grid=GAUSS_GRID.spec(), schedule_gamma=0.67,
            n_reps=20, max_n=2000, checkpoint_stride=100, seed=seed,
        )
        _, slope = _slope_run(spec)
        pdf, domain = true_density(spec)
        report = growth_rate(pdf, "gaussian", KernelFamily("gaussian"),
                             GAUSS_GRID, domain)
        out[mu] = (slope, report.delta)
    return out


def test_criterion_01_ville_frequency(null_streams, verdict):
    max_log_e, _, elapsed = null_streams
    frac = float(np.mean(max_log_e >= math.log(20.0)))
    bound = 0.05 + 3.0 * math.sqrt(0.05 * 0.95 / 500.0)
    verdict(
        "1 (ville frequency)",
        frac <= bound and elapsed < 300.0,
        f"crossing fraction {frac:.4f} <= {bound:.4f}, {elapsed:.0f}s",
    )


def test_criterion_02_mean_e_value(null_streams, verdict):
    _, log_e_200, _ = null_streams
    e_vals = np.exp(log_e_200)
    mean = float(np.mean(e_vals))
    se = float(np.std(e_vals, ddof=1)) / math.sqrt(e_vals.size)
    verdict(
        "2 (mean e-value)",
        mean <= 1.0 + 3.0 * se,
        f"mean {mean:.4f} <= 1 + 3se = {1.0 + 3.0 * se:.4f}",
    )


def test_criterion_03_gamma_growth_rates(gamma_scenarios, verdict):
    s2, d2 = gamma_scenarios[2.0]
    s5, d5 = gamma_scenarios[5.0]
    r2 = s2.mean / d2
    r5 = s5.mean / d5
    ok = (0.85 <= r2 <= 1.15) and (0.85 <= r5 <= 1.15) and (s5.mean > s2.mean)
    verdict(
        "3 (gamma growth rates)",
        ok,
        f"shape2 slope {s2.mean:.5f} / delta {d2:.5f} = {r2:.3f}; "
        f"shape5 slope {s5.mean:.5f} / delta {d5:.5f} = {r5:.3f}; "
        f"ordering {'ok' if s5.mean > s2.mean else 'violated'}",
    )


def test_criterion_04_mixture_growth_rates(mixture_scenarios, verdict):
    s6, d6 = mixture_scenarios[6.0]
    s10, _ = mixture_scenarios[10.0]
    r6 = s6.mean / d6
    ok = (0.85 <= r6 <= 1.15) and (s10.mean > s6.mean)
    verdict(
        "4 (mixture growth rates)",
        ok,
        f"mu6 slope {s6.mean:.5f} / delta {d6:.5f} = {r6:.3f}; "
        f"mu10 slope {s10.mean:.5f} > mu6 {'ok' if s10.mean > s6.mean else 'violated'}",
    )


def test_criterion_05_logconcave_test(verdict):
    spec = _scenario(
        generator="normal_mixture", gen_params={"mu": 10.0}, null="logconcave",
        family="gaussian", grid=GAUSS_GRID.spec(), schedule_gamma=0.67,
        n_reps=10, max_n=1000, checkpoint_stride=100, seed=31,
    )
    rows, slope = _slope_run(spec)
    pdf, domain = true_density(spec)
    report = growth_rate(pdf, "logconcave", KernelFamily("gaussian"),
                         GAUSS_GRID, domain)
    terminal_sd = float(np.std(list(terminal_log_e(rows, spec.max_n).values()),
                               ddof=1))
    verdict(
        "5 (log-concave null)",
        slope.mean > 0.0,
        f"mean slope {slope.mean:.5f} > 0; slope/delta {slope.mean / report.delta:.3f} "
        f"(delta {report.delta:.5f}); terminal log-e sd {terminal_sd:.2f}",
    )


def test_criterion_06_null_true_vanishing(verdict):
    fam = KernelFamily("gaussian")
    terminals = []
    for rep in range(20):
        xs = replication_rng(41, rep).normal(size=2000)
        run = EProcessRun(fam, GAUSS_GRID, WeightSchedule.power(0.67),
                          make_null_model("gaussian"), record_every=2000)
        run.extend(xs)
        terminals.append(run.records[-1].log_e)
    med = float(np.median(terminals))
    verdict(
        "6 (vanishing under the null)",
        med < 0.0,
        f"median log evidence at n=2000 is {med:.2f} < 0",
    )


def test_criterion_07_constant_time_updates(verdict):
    fam = KernelFamily("gaussian")
    rng = np.random.default_rng(51)
    pr = PrState(fam, GAUSS_GRID, WeightSchedule.power(0.67))
    pr.update_many(rng.normal(size=8))  # warm any compilation outside timing

    def mean_update_time(state, upto, window):
        state.update_many(rng.normal(size=upto - state.step))
        xs = rng.normal(size=window)
        t0 = time.perf_counter()
        state.update_many(xs)
        return (time.perf_counter() - t0) / window

    pr = PrState(fam, GAUSS_GRID, WeightSchedule.power(0.67))
    early = mean_update_time(pr, 100, 1000)
    late = mean_update_time(pr, 100_000, 1000)
    verdict(
        "7 (constant-time updates)",
        late <= 2.0 * early,
        f"per-update {late * 1e6:.1f}us at n=1e5 vs {early * 1e6:.1f}us at n=1e2",
    )


def test_criterion_08_multiplicative_identity(verdict):
    fam = KernelFamily("gaussian")
    grid = IndexGrid([-5.0, 0.5], [5.0, 3.0], [8, 6])
    worst = 0.0
    for seed in range(50):
        xs = np.random.default_rng(seed).normal(size=120)
        sched = WeightSchedule.power(0.67)
        state = PrState(fam, grid, sched)
        state.update_many(xs)
        replay = oracle_marginal_replay(xs, fam, grid, sched).value
        worst = max(worst, abs(state.log_marginal - replay))
    verdict(
        "8 (multiplicative identity)",
        worst <= 1e-10,
        f"worst engine-vs-replay gap {worst:.2e} <= 1e-10 over 50 streams",
    )


def test_criterion_09_shape_oracles(verdict):
    rng = np.random.default_rng(61)
    worst_g = 0.0
    for _ in range(30):
        n = int(rng.integers(1, 9))
        x = rng.gamma(2.0, size=n).round(3) + 0.001
        worst_g = max(worst_g, abs(grenander_loglik(x).log_lik_sup
                                   - oracle_grenander_loglik(x).value))
    worst_lc = -np.inf
    for _ in range(5):
        n = int(rng.integers(3, 6))
        x = np.unique(rng.normal(size=n).round(2))
        if x.size < 2:
            continue
        worst_lc = max(worst_lc, oracle_logconcave(x).value
                       - logconcave_loglik(x).log_lik_sup)
    verdict(
        "9 (shape-constrained oracles)",
        worst_g <= 1e-9 and worst_lc <= 1e-3,
        f"monotone gap {worst_g:.2e} <= 1e-9; "
        f"log-concave oracle excess {worst_lc:.2e} <= 1e-3",
    )


def test_criterion_10_coverage(verdict):
    fam = KernelFamily("gaussian")
    grid = IndexGrid([-3.0, 0.5], [3.0, 2.0], [20, 10])
    cands = gaussian_mean_candidates(np.linspace(-0.5, 0.5, 21))
    hits = 0
    reps = 200
    for rep in range(reps):
        xs = replication_rng(71, rep).normal(size=500)
        cs = confidence_set(xs, cands, 0.05, fam, grid,
                            WeightSchedule.power(0.67))
        hits += cs.contains(0.0)
    coverage = hits / reps
    bound = 0.95 - 3.0 * math.sqrt(0.05 * 0.95 / reps)
    verdict(
        "10 (confidence coverage)",
        coverage >= bound,
        f"coverage {coverage:.3f} >= {bound:.3f}",
    )


def test_criterion_11_checkpoint_determinism(verdict):
    fam = KernelFamily("gaussian")
    grid = IndexGrid([-5.0, 0.5], [5.0, 3.0], [8, 6])
    worst = 0.0
    for seed in range(10):
        xs = np.random.default_rng(1000 + seed).normal(size=60)
        full = EProcessRun(fam, grid, WeightSchedule.power(0.67),
                           make_null_model("gaussian"), record_every=10)
        full.extend(xs)
        part = EProcessRun(fam, grid, WeightSchedule.power(0.67),
                           make_null_model("gaussian"), record_every=10)
        part.extend(xs[:30])
        resumed = EProcessRun.from_checkpoint(part.to_checkpoint(),
                                              make_null_model("gaussian"))
        resumed.extend(xs[30:])
        for ra, rb in zip(full.records, resumed.records):
            assert ra.n == rb.n
            for fa, fb in ((ra.log_numerator, rb.log_numerator),
                           (ra.log_denominator, rb.log_denominator),
                           (ra.log_e, rb.log_e),
                           (ra.anytime_p, rb.anytime_p)):
                if not (math.isnan(fa) and math.isnan(fb)):
                    worst = max(worst, abs(fa - fb))
    verdict(
        "11 (checkpoint determinism)",
        worst <= 1e-12,
        f"worst resumed-vs-uninterrupted gap {worst:.2e} <= 1e-12 over 10 streams",
    )
