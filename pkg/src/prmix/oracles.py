"""Brute-force reference implementations, test-only and size-capped.

These recompute answers by exhaustive enumeration or dense grid search,
independently of the production code paths they validate.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OracleSizeExceeded
from .kernels import log_density_nodes
from .mixing import IndexGrid  # noqa: F401  (checkpoint configs reference grids)

ISOTONIC_CAP = 12
LOGCONCAVE_CAP = 5


@dataclass
class OracleResult:
    value: float
    method: str
    meta: dict = field(default_factory=dict)


def oracle_isotonic(masses, widths):
    """Best decreasing step density by exhaustive search over block partitions.

    Cells are ordered with per-cell probability mass and width; every
    composition of the cells into contiguous blocks is tried, each block
    pooled to mass/width, and infeasible (non-decreasing) partitions
    discarded.
    """
    masses = np.asarray(masses, dtype=float)
    widths = np.asarray(widths, dtype=float)
    n = masses.size
    if n > ISOTONIC_CAP:
        raise OracleSizeExceeded(f"isotonic oracle capped at {ISOTONIC_CAP} cells")
    total = masses.sum()
    best_ll = -np.inf
    best_heights = None
    # each composition = choice of block boundaries among the n-1 gaps
    for cuts in itertools.product((False, True), repeat=n - 1):
        bounds = [0] + [i + 1 for i, c in enumerate(cuts) if c] + [n]
        heights = []
        ok = True
        prev = np.inf
        for a, b in zip(bounds[:-1], bounds[1:]):
            h = masses[a:b].sum() / total / widths[a:b].sum()
            if h > prev:
                ok = False
                break
            prev = h
            heights.extend([h] * (b - a))
        if not ok:
            continue
        hh = np.array(heights)
        pos = masses > 0.0
        if np.any(pos & (hh <= 0.0)):
            continue
        ll = float(np.sum(masses[pos] * np.log(hh[pos])))
        if ll > best_ll:
            best_ll = ll
            best_heights = hh
    return OracleResult(best_ll, "exhaustive-partition",
                        {"heights": best_heights})


def oracle_grenander_loglik(x):
    """Exhaustive monotone-density MLE log-likelihood for tiny samples."""
    x = np.asarray(x, dtype=float)
    n = x.size
    vals, counts = np.unique(x, return_counts=True)
    widths = np.diff(np.concatenate(([0.0], vals)))
    res = oracle_isotonic(counts / n, widths)
    return OracleResult(n * res.value, res.method, res.meta)


def oracle_logconcave(x, rounds=5, grid_points=13, slope_range=12.0):
    """Best concave piecewise-linear log-density by refined grid search.

    Parameterized by the segment slopes (enforced non-increasing) with
    the level fixed by exact normalization; searched coarse-to-fine.
    """
    x = np.unique(np.asarray(x, dtype=float))
    m = x.size
    if m > LOGCONCAVE_CAP:
        raise OracleSizeExceeded(f"log-concave oracle capped at {LOGCONCAVE_CAP}")
    xs = np.asarray(sorted(np.asarray(x, dtype=float)))
    counts = np.ones(m)  # callers pass distinct points; ties fold upstream
    dx = np.diff(xs)

    def objective(slopes):
        # phi up to an additive constant, then normalize exactly
        phi = np.concatenate(([0.0], np.cumsum(slopes * dx)))
        z = _exact_integral(xs, phi)
        phi = phi - math.log(z)
        return float(np.sum(counts * phi))

    centers = np.zeros(m - 1)
    width = slope_range
    best = (-np.inf, None)
    for _ in range(rounds):
        axes = [np.linspace(c - width, c + width, grid_points) for c in centers]
        for combo in itertools.product(*axes):
            s = np.asarray(combo)
            if np.any(np.diff(s) > 0.0):
                continue
            val = objective(s)
            if val > best[0]:
                best = (val, s)
        centers = best[1]
        width = width * 2.0 / (grid_points - 1) * 1.5
    return OracleResult(best[0], "grid-search", {"slopes": best[1],
                                                 "rounds": rounds})


def _exact_integral(knots, phi):
    dx = np.diff(knots)
    a, b = phi[:-1], phi[1:]
    d = b - a
    out = 0.0
    for k in range(dx.size):
        if abs(d[k]) < 1e-12:
            out += dx[k] * math.exp(0.5 * (a[k] + b[k]))
        else:
            out += dx[k] * math.exp(a[k]) * math.expm1(d[k]) / d[k]
    return out


def oracle_marginal_replay(xs, family, grid, schedule):
    """Recompute the joint log marginal from scratch by replaying the
    recursion with plain numpy, independent of the engine accumulator."""
    xs = np.asarray(xs, dtype=float)
    p1, p2 = grid.node_coords
    w = np.full(p1.size, 1.0 / p1.size)
    total = 0.0
    for i, x in enumerate(xs, start=1):
        dens = np.exp(log_density_nodes(family, p1, p2, x))
        mix = float(np.dot(w, dens))
        total += math.log(mix)
        wi = schedule.weight_at(i)
        w = (1.0 - wi) * w + wi * w * dens / mix
        w = w / w.sum()
    return OracleResult(total, "direct-replay", {"n": int(xs.size)})
