"""Discrete mixing distributions over a tensor grid on a compact index rectangle."""

import numpy as np
from scipy.special import logsumexp

from .kernels import log_density_nodes

LINEAR = "linear"
LOG = "log"


class IndexGrid:
    """Tensor grid over the kernel index rectangle.

    Nodes are materialized eagerly as two aligned per-node coordinate
    arrays (first and second index component).
    """

    def __init__(self, lower, upper, counts, spacing=None):
        lower = tuple(float(v) for v in lower)
        upper = tuple(float(v) for v in upper)
        counts = tuple(int(c) for c in counts)
        d = len(lower)
        if not (len(upper) == len(counts) == d):
            raise ValueError("grid bounds and counts must have equal length")
        if spacing is None:
            spacing = (LINEAR,) * d
        spacing = tuple(spacing)
        if len(spacing) != d:
            raise ValueError("spacing must name one rule per dimension")
        for lo, hi, c, sp in zip(lower, upper, counts, spacing):
            if not (np.isfinite(lo) and np.isfinite(hi)):
                raise ValueError("grid bounds must be finite")
            if not lo < hi:
                raise ValueError("grid lower bound must be strictly below upper")
            if c < 2:
                raise ValueError("grid needs at least 2 nodes per dimension")
            if sp not in (LINEAR, LOG):
                raise ValueError(f"unknown spacing rule {sp!r}")
            if sp == LOG and lo <= 0.0:
                raise ValueError("log spacing requires a positive lower bound")
        self.lower = lower
        self.upper = upper
        self.counts = counts
        self.spacing = spacing
        axes = []
        for lo, hi, c, sp in zip(lower, upper, counts, spacing):
            if sp == LOG:
                axes.append(np.geomspace(lo, hi, c))
            else:
                axes.append(np.linspace(lo, hi, c))
        self.axes = axes
        mesh = np.meshgrid(*axes, indexing="ij")
        self.node_coords = tuple(m.ravel() for m in mesh)

    @property
    def n_nodes(self):
        return int(np.prod(self.counts))

    def spec(self):
        return {
            "lower": list(self.lower),
            "upper": list(self.upper),
            "counts": list(self.counts),
            "spacing": list(self.spacing),
        }

    @classmethod
    def from_spec(cls, spec):
        return cls(spec["lower"], spec["upper"], spec["counts"], spec["spacing"])

    def __eq__(self, other):
        return isinstance(other, IndexGrid) and self.spec() == other.spec()


class MixingState:
    """Grid plus normalized log weights (log-sum-exp zero)."""

    def __init__(self, grid, log_weights, check=True):
        log_weights = np.asarray(log_weights, dtype=float)
        if log_weights.shape != (grid.n_nodes,):
            raise ValueError("log_weights length must match grid node count")
        if check:
            if not np.all(np.isfinite(log_weights)):
                raise ValueError("all mixing weights must be finite")
            z = logsumexp(log_weights)
            if abs(z) > 1e-10:
                raise ValueError(f"mixing weights not normalized (log-sum-exp {z:g})")
        self.grid = grid
        self.log_weights = log_weights

    def copy(self):
        return MixingState(self.grid, self.log_weights.copy(), check=False)


def uniform_init(grid):
    """Uniform mixing distribution over the grid nodes."""
    return MixingState(grid, np.full(grid.n_nodes, -np.log(grid.n_nodes)))


def mixture_log_density(state, family, x):
    """log of the grid-discretized mixture density at one observation."""
    p1, p2 = state.grid.node_coords
    lk = log_density_nodes(family, p1, p2, x)
    return float(logsumexp(state.log_weights + lk))
