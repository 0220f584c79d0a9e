"""Maximized null log-likelihoods for each supported null class.

Each class exposes both a single-prefix fit and a vectorized series
evaluation at several prefix lengths; the series form marks degenerate
prefixes (unbounded supremum) with NaN instead of raising, so streaming
callers can flag-and-abstain.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import (
    DegenerateNull,
    SolverDidNotConverge,
    UnsupportedObservation,
)

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass
class NullFit:
    """Supremum of the null log-likelihood on a data prefix."""

    log_lik_sup: float
    n: int
    null_class: str
    params: dict = field(default_factory=dict)


@dataclass
class GrenanderFit:
    """Decreasing step density: heights on intervals (knot_{k-1}, knot_k]."""

    knots: np.ndarray
    heights: np.ndarray

    def density_at(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.knots, x, side="left")
        out = np.zeros(x.shape)
        inside = (x > 0) & (idx < self.knots.size)
        out[inside] = self.heights[idx[inside]]
        return out

    def to_json(self):
        return {"knots": self.knots.tolist(), "heights": self.heights.tolist()}


@dataclass
class LogConcaveFit:
    """Concave piecewise-linear log density with knots at the data points."""

    knots: np.ndarray
    log_values: np.ndarray

    def log_density_at(self, x):
        x = np.asarray(x, dtype=float)
        out = np.interp(x, self.knots, self.log_values, left=-np.inf, right=-np.inf)
        out = np.where((x < self.knots[0]) | (x > self.knots[-1]), -np.inf, out)
        return out

    def to_json(self):
        return {"knots": self.knots.tolist(), "log_values": self.log_values.tolist()}


def gaussian_null_loglik(x):
    """Closed-form sup over all Gaussian densities (MLE with variance over n)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 2 or np.all(x == x[0]):
        raise DegenerateNull(
            "Gaussian null supremum diverges with fewer than 2 distinct points"
        )
    mu = float(np.mean(x))
    var = float(np.mean((x - mu) ** 2))
    ll = -0.5 * n * (_LOG_2PI + math.log(var)) - 0.5 * n
    return NullFit(ll, n, "gaussian", {"mean": mu, "var": var})


def grenander_loglik(x):
    """Sup over decreasing densities on (0, inf): the monotone-density MLE.

    Slopes of the least concave majorant of the empirical CDF anchored at
    (0, 0), computed with pool-adjacent-violators.
    """
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise DegenerateNull("monotone null needs at least one observation")
    if np.any(x <= 0.0) or not np.all(np.isfinite(x)):
        raise UnsupportedObservation("monotone null requires strictly positive data")
    n = x.size
    vals, counts = np.unique(x, return_counts=True)
    widths = np.diff(np.concatenate(([0.0], vals)))
    raw = (counts / n) / widths
    fitted = _backend.pava_decreasing(raw, widths)
    ll = float(np.sum(counts * np.log(fitted)))
    keep = np.ones(vals.size, dtype=bool)
    keep[:-1] = ~np.isclose(fitted[:-1], fitted[1:], rtol=1e-12, atol=0.0)
    fit = GrenanderFit(knots=vals[keep], heights=fitted[keep])
    return NullFit(ll, n, "monotone", {"fit": fit})


def _merge_close_knots(knots, mass, tol):
    """Pool knots separated by less than tol into their mass-weighted mean.

    Near-duplicate knots put 1/dx factors on the order of 1/tol into the
    concavity constraints, which stalls interior-point solvers.
    """
    groups = np.concatenate(([0], np.cumsum(np.diff(knots) >= tol)))
    merged_mass = np.bincount(groups, weights=mass)
    merged_knots = np.bincount(groups, weights=mass * knots) / merged_mass
    return merged_knots, merged_mass


def _logconcave_solve(knots, mass, max_iters=500):
    """Maximize sum(mass * phi) - integral(exp phi) over concave pw-linear phi.

    ``mass`` sums to 1 (counts/n for the MLE; cell masses for KL
    projections).  Returns phi at the knots, exactly normalized.
    """
    import cvxpy as cp

    knots_in = knots
    tol = 1e-7 * (knots[-1] - knots[0])
    if np.diff(knots).min() < tol:
        knots, mass = _merge_close_knots(knots, mass, tol)
    m = knots.size
    dx = np.diff(knots)
    # quadrature points: knots plus evenly interpolated interior points,
    # all affine in phi so the integral stays DCP-representable
    subdiv = max(1, int(round(max(240, 2 * m) / max(m - 1, 1))))
    rows, cols, data, qpts = [], [], [], []
    r = 0
    for k in range(m - 1):
        for s in range(subdiv):
            a = s / subdiv
            qpts.append(knots[k] + a * dx[k])
            rows += [r, r]
            cols += [k, k + 1]
            data += [1.0 - a, a]
            r += 1
    qpts.append(knots[-1])
    rows.append(r)
    cols.append(m - 1)
    data.append(1.0)
    qpts = np.asarray(qpts)
    import scipy.sparse as sp

    A = sp.csr_matrix((data, (rows, cols)), shape=(qpts.size, m))
    qw = np.empty(qpts.size)
    qw[0] = (qpts[1] - qpts[0]) / 2
    qw[-1] = (qpts[-1] - qpts[-2]) / 2
    qw[1:-1] = (qpts[2:] - qpts[:-2]) / 2

    phi = cp.Variable(m)
    slopes = cp.multiply(1.0 / dx, cp.diff(phi))
    objective = cp.Maximize(mass @ phi - qw @ cp.exp(A @ phi))
    constraints = [cp.diff(slopes) <= 0] if m > 2 else []
    prob = cp.Problem(objective, constraints)
    try:
        prob.solve(solver=cp.CLARABEL, max_iter=max_iters)
    except cp.error.SolverError:
        prob.status = None
    if prob.status not in ("optimal", "optimal_inaccurate"):
        # second attempt with a first-order solver before giving up
        try:
            prob.solve(solver=cp.SCS, max_iters=20000)
        except cp.error.SolverError as exc:
            raise SolverDidNotConverge(f"log-concave solver failed: {exc}") from exc
        if prob.status not in ("optimal", "optimal_inaccurate"):
            raise SolverDidNotConverge(
                f"log-concave solver status {prob.status!r}", last_value=prob.value
            )
    phi_hat = np.asarray(phi.value, dtype=float)
    # repair tiny concavity violations from solver tolerance, then
    # renormalize with the exact piecewise-exponential integral
    sl = np.diff(phi_hat) / dx
    sl = _backend.pava_decreasing(sl, dx)
    phi_hat = np.concatenate(([phi_hat[0]], phi_hat[0] + np.cumsum(sl * dx)))
    phi_hat -= math.log(_pw_exp_integral(knots, phi_hat))
    if knots is not knots_in:
        phi_hat = np.interp(knots_in, knots, phi_hat)
    return phi_hat


def _pw_exp_integral(knots, phi):
    """Exact integral of exp(phi) for piecewise-linear phi."""
    dx = np.diff(knots)
    a, b = phi[:-1], phi[1:]
    d = b - a
    small = np.abs(d) < 1e-12
    seg = np.where(
        small,
        dx * np.exp((a + b) / 2.0),
        dx * np.exp(a) * np.where(small, 1.0, np.expm1(d) / np.where(small, 1.0, d)),
    )
    return float(np.sum(seg))


def logconcave_loglik(x, max_iters=500):
    """Sup over log-concave densities: concave pw-linear log-density MLE."""
    x = np.asarray(x, dtype=float)
    n = x.size
    vals, counts = np.unique(x, return_counts=True)
    if vals.size < 2:
        raise DegenerateNull(
            "log-concave null supremum diverges with fewer than 2 distinct points"
        )
    phi = _logconcave_solve(vals, counts / n, max_iters=max_iters)
    ll = float(np.sum(counts * phi))
    fit = LogConcaveFit(knots=vals, log_values=phi)
    return NullFit(ll, n, "logconcave", {"fit": fit})


def simple_null_loglik(log_pdf, x):
    """Log-likelihood of an explicitly given null density."""
    x = np.asarray(x, dtype=float)
    ll = np.asarray(log_pdf(x), dtype=float) if x.size else np.empty(0)
    if np.any(np.isneginf(ll)) or np.any(np.isnan(ll)):
        raise UnsupportedObservation("observation outside the support of the null")
    return NullFit(float(np.sum(ll)), int(x.size), "simple")


class NullModel:
    """Streaming-friendly wrapper around a null class."""

    name = "base"

    def fit(self, x):
        raise NotImplementedError

    def loglik_series(self, x, ns):
        """Sup log-likelihood at each prefix length in ns; NaN if degenerate."""
        out = np.empty(len(ns))
        for i, n in enumerate(ns):
            try:
                out[i] = self.fit(x[:n]).log_lik_sup
            except DegenerateNull:
                out[i] = np.nan
        return out


class SimpleNull(NullModel):
    name = "simple"

    def __init__(self, log_pdf, label="simple"):
        self.log_pdf = log_pdf
        self.label = label

    def fit(self, x):
        return simple_null_loglik(self.log_pdf, x)

    def loglik_series(self, x, ns):
        x = np.asarray(x, dtype=float)
        ll = np.asarray(self.log_pdf(x), dtype=float) if x.size else np.empty(0)
        if np.any(np.isneginf(ll)) or np.any(np.isnan(ll)):
            raise UnsupportedObservation("observation outside the support of the null")
        cum = np.concatenate(([0.0], np.cumsum(ll)))
        return cum[np.asarray(ns, dtype=int)]


class GaussianNull(NullModel):
    name = "gaussian"

    def fit(self, x):
        return gaussian_null_loglik(x)

    def loglik_series(self, x, ns):
        x = np.asarray(x, dtype=float)
        ns = np.asarray(ns, dtype=int)
        cs = np.concatenate(([0.0], np.cumsum(x)))
        cs2 = np.concatenate(([0.0], np.cumsum(x * x)))
        nn = ns.astype(float)
        with np.errstate(invalid="ignore", divide="ignore"):
            mu = cs[ns] / nn
            var = cs2[ns] / nn - mu * mu
            out = -0.5 * nn * (_LOG_2PI + np.log(var)) - 0.5 * nn
        out[(ns < 2) | ~(var > 0.0)] = np.nan
        return out


class MonotoneNull(NullModel):
    name = "monotone"

    def fit(self, x):
        return grenander_loglik(x)


class LogConcaveNull(NullModel):
    name = "logconcave"

    def fit(self, x):
        return logconcave_loglik(x)


def make_null_model(name, params=None):
    """Construct a null model from its config name."""
    params = params or {}
    if name == "gaussian":
        return GaussianNull()
    if name == "monotone":
        return MonotoneNull()
    if name == "logconcave":
        return LogConcaveNull()
    if name == "simple":
        from scipy import stats

        dist = params.get("distribution", "normal")
        if dist == "normal":
            loc = float(params.get("mean", 0.0))
            scale = float(params.get("sd", 1.0))
            frozen = stats.norm(loc=loc, scale=scale)
        elif dist == "exponential":
            frozen = stats.expon(scale=1.0 / float(params.get("rate", 1.0)))
        else:
            raise ValueError(f"unknown simple-null distribution {dist!r}")
        return SimpleNull(frozen.logpdf, label=dist)
    raise ValueError(f"unknown null class {name!r}")
