"""Anytime-valid confidence sets by inverting singleton-null evidence ratios.

The mixture-marginal numerator is computed once per data prefix and shared
across all candidate denominators.
"""

from dataclasses import dataclass

import numpy as np

from .engine import PrState
from .eprocess import anytime_p_from_log_e
from .errors import ConfigError, UnsupportedObservation


@dataclass
class Candidate:
    """An explicit candidate distribution paired with its feature value."""

    feature: float
    log_pdf: object  # vectorized callable

    def __post_init__(self):
        if not np.isfinite(self.feature):
            raise ConfigError("candidate feature values must be finite")


@dataclass
class ConfidenceSet:
    alpha: float
    features: np.ndarray  # retained feature values
    hull: tuple  # (min, max) of retained values, or None when empty
    log_numerator: float
    anytime_ps: np.ndarray  # aligned with the supplied candidate list

    def contains(self, value):
        return bool(np.any(np.isclose(self.features, value)))


def gaussian_mean_candidates(values, sd=1.0):
    """Candidates N(theta, sd^2) with the mean as the extracted feature."""
    from scipy import stats

    return [
        Candidate(float(v), stats.norm(loc=float(v), scale=float(sd)).logpdf)
        for v in values
    ]


def confidence_set(data, candidates, alpha, family, grid, schedule):
    """Feature values whose singleton-null anytime p-value exceeds alpha."""
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError("alpha must lie in [0, 1]")
    if not candidates:
        raise ConfigError("candidate list must be nonempty")
    data = np.asarray(data, dtype=float)
    pr = PrState(family, grid, schedule)
    pr.update_many(data)
    log_num = pr.log_marginal
    feats, ps = [], []
    for cand in candidates:
        ll = np.asarray(cand.log_pdf(data), dtype=float)
        if np.any(np.isnan(ll)):
            raise UnsupportedObservation(
                f"observation outside candidate support (feature {cand.feature})"
            )
        log_den = float(np.sum(ll))
        feats.append(cand.feature)
        ps.append(anytime_p_from_log_e(log_num - log_den) if np.isfinite(log_den)
                  else 0.0)
    feats = np.asarray(feats)
    ps = np.asarray(ps)
    retained = feats[ps > alpha]
    hull = (float(retained.min()), float(retained.max())) if retained.size else None
    return ConfidenceSet(alpha, retained, hull, log_num, ps)
