import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import logsumexp

from prmix import (
    IndexGrid,
    KernelFamily,
    NumericalDegeneracy,
    PrState,
    UnsupportedObservation,
    WeightSchedule,
    mixture_log_density,
    pr_update,
)


def test_power_schedule_values():
    sched = WeightSchedule.power(0.67)
    assert sched.weight_at(1) == pytest.approx(2.0 ** (-0.67), abs=1e-12)
    assert WeightSchedule.power(1.0).weight_at(9) == pytest.approx(0.1, abs=1e-15)


def test_power_schedule_decreasing_to_zero():
    sched = WeightSchedule.power(0.67)
    w = sched.weights(1, 5000)
    assert np.all(np.diff(w) < 0)
    assert w[-1] < 0.01


def test_schedule_exponent_bounds_enforced():
    for gamma in (0.5, 0.49, 1.01, 0.0, -1.0):
        with pytest.raises(ValueError):
            WeightSchedule.power(gamma)
    WeightSchedule.power(0.51)
    WeightSchedule.power(1.0)


def test_explicit_schedule_warns_and_bounds():
    with pytest.warns(UserWarning):
        sched = WeightSchedule(explicit=[0.0, 0.5, 0.9])
    assert sched.weight_at(1) == 0.0
    assert sched.weight_at(3) == 0.9
    with pytest.raises(ValueError):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            WeightSchedule(explicit=[1.0])
    with pytest.raises(ValueError):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            WeightSchedule(explicit=[-0.1])


def test_fresh_state_has_zero_marginal(gaussian_family, small_gaussian_grid, schedule):
    state = PrState(gaussian_family, small_gaussian_grid, schedule)
    assert state.log_marginal == 0.0
    assert state.step == 0


def test_single_update_adds_predictive_density(
    gaussian_family, small_gaussian_grid, schedule
):
    state = PrState(gaussian_family, small_gaussian_grid, schedule)
    expected = mixture_log_density(state.mixing, gaussian_family, 0.3)
    inc = state.update(0.3)
    assert inc == pytest.approx(expected, abs=1e-12)
    assert state.log_marginal == pytest.approx(expected, abs=1e-12)
    assert state.step == 1


def test_zero_weight_leaves_mixing_unchanged(gaussian_family, small_gaussian_grid):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sched = WeightSchedule(explicit=[0.0])
    state = PrState(gaussian_family, small_gaussian_grid, sched)
    before = state.mixing.log_weights.copy()
    inc = state.update(0.3)
    np.testing.assert_allclose(state.mixing.log_weights, before, atol=1e-12)
    assert inc == pytest.approx(
        mixture_log_density(state.mixing, gaussian_family, 0.3), abs=1e-12
    )


def test_two_node_update_by_hand():
    # two kernels with densities 2 and 1 at x and step size one half:
    # posterior node masses are 7/12 and 5/12, increment log(3/2)
    grid = IndexGrid([0.0], [1.0], [2])
    # a one-dimensional grid is not supported by the kernel families, so
    # replicate the arithmetic directly on the backend
    from prmix._backend import get_impl

    for name in ("numpy",):
        impl = get_impl(name)
        lw = np.log([0.5, 0.5])
        # gaussian nodes chosen so the density ratio at x is exactly 2
        x = 0.0
        sd = np.array([1.0, 1.0])
        mu = np.array([0.0, math.sqrt(2.0 * math.log(2.0))])
        inc, status = impl.pr_recurse(0, mu, sd, lw, np.array([x]), np.array([0.5]))
        assert status == -1
        w = np.exp(lw)
        d2 = math.exp(-0.5 * mu[1] ** 2)
        mix = 0.5 * 1.0 + 0.5 * d2
        assert np.exp(inc[0] + 0.5 * math.log(2.0 * math.pi)) == pytest.approx(
            mix, abs=1e-12
        )
        np.testing.assert_allclose(
            w,
            [0.5 * (0.5 + 0.5 / mix), 0.5 * (0.5 + 0.5 * d2 / mix)],
            atol=1e-12,
        )
    assert grid.n_nodes == 2


def test_uniform_likelihood_leaves_weights_unchanged(schedule):
    # means symmetric about the observation and near-identical scales, so
    # every kernel density at x = 0 is equal up to rounding
    grid = IndexGrid([-1.0, 1.0], [1.0, 1.0 + 1e-9], [2, 2])
    fam = KernelFamily("gaussian")
    state = PrState(fam, grid, schedule)
    before = state.mixing.log_weights.copy()
    state.update(0.0)
    np.testing.assert_allclose(state.mixing.log_weights, before, atol=1e-6)


def test_normalization_preserved_over_many_updates(
    gaussian_family, small_gaussian_grid, schedule
):
    state = PrState(gaussian_family, small_gaussian_grid, schedule)
    xs = np.random.default_rng(11).normal(size=500)
    state.update_many(xs)
    assert abs(logsumexp(state.mixing.log_weights)) < 1e-10
    assert np.all(np.isfinite(state.mixing.log_weights))


def test_batch_equals_streaming(gaussian_family, small_gaussian_grid, schedule):
    xs = np.random.default_rng(3).normal(size=60)
    a = PrState(gaussian_family, small_gaussian_grid, schedule)
    b = PrState(gaussian_family, small_gaussian_grid, schedule)
    a.update_many(xs)
    for x in xs:
        b.update(x)
    assert a.log_marginal == b.log_marginal
    np.testing.assert_array_equal(a.mixing.log_weights, b.mixing.log_weights)


def test_order_matters_but_replay_is_bitwise(
    gaussian_family, small_gaussian_grid, schedule
):
    xs = np.random.default_rng(5).normal(size=40)
    a = PrState(gaussian_family, small_gaussian_grid, schedule)
    a.update_many(xs)
    b = PrState(gaussian_family, small_gaussian_grid, schedule)
    b.update_many(xs)
    assert a.log_marginal == b.log_marginal
    c = PrState(gaussian_family, small_gaussian_grid, schedule)
    c.update_many(xs[::-1])
    assert c.log_marginal != a.log_marginal


def test_out_of_support_observation_rejected(gamma_family, small_gamma_grid, schedule):
    state = PrState(gamma_family, small_gamma_grid, schedule)
    with pytest.raises(UnsupportedObservation):
        state.update(-1.0)
    assert state.step == 0


def test_degenerate_update_raises(gaussian_family, schedule):
    # a tight grid far from the observation underflows every kernel
    grid = IndexGrid([0.0, 0.001], [1.0, 0.01], [3, 3])
    state = PrState(gaussian_family, grid, schedule)
    with pytest.raises(NumericalDegeneracy) as exc:
        state.update(1e200)
    assert exc.value.step == 1


def test_functional_update_wrapper(gaussian_family, small_gaussian_grid, schedule):
    state = PrState(gaussian_family, small_gaussian_grid, schedule)
    out = pr_update(state, 0.1)
    assert out is state
    assert state.step == 1


def test_checkpoint_round_trip(gaussian_family, small_gaussian_grid, schedule, tmp_path):
    state = PrState(gaussian_family, small_gaussian_grid, schedule)
    xs = np.random.default_rng(9).normal(size=30)
    state.update_many(xs)
    path = tmp_path / "state.json"
    state.save(path)
    loaded = PrState.load(path)
    assert loaded.step == state.step
    assert loaded.log_marginal == state.log_marginal
    np.testing.assert_array_equal(loaded.mixing.log_weights,
                                  state.mixing.log_weights)
    more = np.random.default_rng(10).normal(size=10)
    state.update_many(more)
    loaded.update_many(more)
    assert loaded.log_marginal == state.log_marginal


def test_checkpoint_version_guard(gaussian_family, small_gaussian_grid, schedule):
    state = PrState(gaussian_family, small_gaussian_grid, schedule)
    ckpt = state.to_checkpoint()
    ckpt["version"] = 99
    with pytest.raises(ValueError):
        PrState.from_checkpoint(ckpt)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-4.0, 4.0), min_size=1, max_size=20))
def test_marginal_is_sum_of_increments(xs):
    fam = KernelFamily("gaussian")
    grid = IndexGrid([-5.0, 0.5], [5.0, 3.0], [6, 4])
    state = PrState(fam, grid, WeightSchedule.power(0.67))
    inc = state.update_many(np.asarray(xs))
    assert state.log_marginal == pytest.approx(float(np.sum(inc)), abs=1e-12)
    assert abs(logsumexp(state.mixing.log_weights)) < 1e-10
