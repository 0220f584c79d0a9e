import math

import numpy as np
import pytest
from scipy.integrate import quad

from prmix import KernelFamily, UnsupportedObservation, log_density
from prmix.kernels import log_density_nodes


def test_standard_normal_mode():
    fam = KernelFamily("gaussian")
    assert log_density(fam, (0.0, 1.0), 0.0) == pytest.approx(
        -0.5 * math.log(2.0 * math.pi), abs=1e-12
    )


def test_exponential_kernel_at_one():
    fam = KernelFamily("gamma")
    assert log_density(fam, (1.0, 1.0), 1.0) == pytest.approx(-1.0, abs=1e-12)


@pytest.mark.parametrize("sigma", [0.3, 1.0, 2.5])
def test_gaussian_mode_height(sigma):
    fam = KernelFamily("gaussian")
    mu = 1.7
    assert log_density(fam, (mu, sigma), mu) == pytest.approx(
        -math.log(sigma) - 0.5 * math.log(2.0 * math.pi), abs=1e-12
    )


def test_gamma_rejects_nonpositive_observation():
    fam = KernelFamily("gamma")
    with pytest.raises(UnsupportedObservation):
        log_density(fam, (2.0, 1.0), 0.0)
    with pytest.raises(UnsupportedObservation):
        log_density(fam, (2.0, 1.0), -1.0)


def test_nonfinite_observation_rejected():
    fam = KernelFamily("gaussian")
    with pytest.raises(UnsupportedObservation):
        log_density(fam, (0.0, 1.0), math.nan)
    with pytest.raises(UnsupportedObservation):
        log_density(fam, (0.0, 1.0), math.inf)


def test_invalid_kernel_points_rejected():
    gau = KernelFamily("gaussian")
    gam = KernelFamily("gamma")
    with pytest.raises(ValueError):
        log_density(gau, (0.0, 0.0), 1.0)
    with pytest.raises(ValueError):
        log_density(gam, (-1.0, 1.0), 1.0)
    with pytest.raises(ValueError):
        log_density(gam, (1.0, 0.0), 1.0)


def test_unknown_family_rejected():
    with pytest.raises(ValueError):
        KernelFamily("cauchy")


@pytest.mark.parametrize(
    "family,u,lo,hi",
    [
        ("gaussian", (0.5, 1.3), -np.inf, np.inf),
        ("gaussian", (-2.0, 0.4), -np.inf, np.inf),
        ("gamma", (2.0, 1.5), 0.0, np.inf),
        ("gamma", (0.8, 3.0), 0.0, np.inf),
    ],
)
def test_densities_integrate_to_one(family, u, lo, hi):
    fam = KernelFamily(family)

    def pdf(x):
        return math.exp(log_density(fam, u, x))

    total, _ = quad(pdf, lo, hi)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_continuity_in_the_index():
    fam = KernelFamily("gamma")
    x = 2.3
    base = log_density(fam, (3.0, 1.2), x)
    for h in (1e-5, 1e-6):
        assert abs(log_density(fam, (3.0 + h, 1.2), x) - base) < 10.0 * h
        assert abs(log_density(fam, (3.0, 1.2 + h), x) - base) < 10.0 * h


def test_vectorized_node_evaluation_matches_scalar():
    fam = KernelFamily("gaussian")
    p1 = np.array([-1.0, 0.0, 2.0])
    p2 = np.array([0.5, 1.0, 2.0])
    out = log_density_nodes(fam, p1, p2, 0.7)
    for j in range(3):
        assert out[j] == pytest.approx(
            log_density(fam, (p1[j], p2[j]), 0.7), abs=1e-14
        )
