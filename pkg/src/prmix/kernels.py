"""Parametric kernel families for the mixture numerator.

Two families are supported: Gaussian indexed by (mean, standard deviation)
on the real line, and gamma indexed by (shape, rate) on the positive
half-line.  All evaluation is in log space.
"""

import math

import numpy as np
from scipy.special import gammaln

from .errors import UnsupportedObservation

GAUSSIAN = "gaussian"
GAMMA = "gamma"

# integer codes shared with the compiled backend
FAMILY_CODES = {GAUSSIAN: 0, GAMMA: 1}

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class KernelFamily:
    """A named kernel family with its support and index-validity rules."""

    def __init__(self, name):
        if name not in FAMILY_CODES:
            raise ValueError(f"unknown kernel family {name!r}")
        self.name = name
        self.code = FAMILY_CODES[name]

    @property
    def support(self):
        return "positive-half-line" if self.name == GAMMA else "real-line"

    @property
    def index_dim(self):
        return 2

    def in_support(self, x):
        if not np.isfinite(x):
            return False
        if self.name == GAMMA:
            return x > 0.0
        return True

    def check_observation(self, x):
        if not self.in_support(x):
            raise UnsupportedObservation(
                f"observation {x!r} outside the {self.support} support of the "
                f"{self.name} family"
            )

    def check_point(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape != (2,):
            raise ValueError(f"{self.name} kernel index must have 2 components")
        if not np.all(np.isfinite(u)):
            raise ValueError("kernel index components must be finite")
        if self.name == GAUSSIAN:
            if u[1] <= 0.0:
                raise ValueError("Gaussian kernel standard deviation must be > 0")
        else:
            if u[0] <= 0.0 or u[1] <= 0.0:
                raise ValueError("gamma kernel shape and rate must be > 0")
        return u

    def __repr__(self):
        return f"KernelFamily({self.name!r})"

    def __eq__(self, other):
        return isinstance(other, KernelFamily) and other.name == self.name

    def __hash__(self):
        return hash(self.name)


def log_density_nodes(family, p1, p2, x):
    """Log kernel density at a single observation, vectorized over nodes.

    ``p1``/``p2`` are the per-node index components: (mean, sd) for the
    Gaussian family, (shape, rate) for the gamma family.
    """
    family.check_observation(x)
    if family.name == GAUSSIAN:
        z = (x - p1) / p2
        return -np.log(p2) - _LOG_SQRT_2PI - 0.5 * z * z
    return p1 * np.log(p2) + (p1 - 1.0) * np.log(x) - p2 * x - gammaln(p1)


def log_density(family, u, x):
    """Scalar log p_u(x) for a single kernel index."""
    u = family.check_point(u)
    out = log_density_nodes(family, np.array([u[0]]), np.array([u[1]]), x)
    return float(out[0])
