"""The one-pass mixing-distribution recursion and its accumulated log marginal.

Each observation costs O(grid size) regardless of how many observations
came before it.  The per-step predictive log density increments are summed
into ``log_marginal``; replaying the same data in the same order
reproduces it bitwise for a fixed backend.
"""

import json
import warnings

import numpy as np

from . import _backend
from .errors import NumericalDegeneracy
from .kernels import KernelFamily
from .mixing import IndexGrid, MixingState, uniform_init

CHECKPOINT_VERSION = 1


class WeightSchedule:
    """Step sizes for the recursion.

    The power form w_i = (i+1)^-gamma with gamma in (0.5, 1] guarantees
    the divergent-sum / convergent-square-sum step-size conditions.
    Explicit sequences are accepted but those conditions cannot be checked
    from finitely many terms.
    """

    def __init__(self, gamma=None, explicit=None):
        if (gamma is None) == (explicit is None):
            raise ValueError("provide exactly one of gamma or explicit")
        if gamma is not None:
            gamma = float(gamma)
            if not 0.5 < gamma <= 1.0:
                raise ValueError(
                    "schedule exponent must lie in (0.5, 1] for valid step sizes"
                )
            self.gamma = gamma
            self.explicit = None
        else:
            seq = np.asarray(explicit, dtype=float)
            if seq.ndim != 1 or seq.size == 0:
                raise ValueError("explicit schedule must be a nonempty sequence")
            if np.any(seq < 0.0) or np.any(seq >= 1.0):
                raise ValueError("explicit weights must lie in [0, 1)")
            warnings.warn(
                "explicit weight sequences cannot be verified to satisfy the "
                "step-size summability conditions",
                stacklevel=2,
            )
            self.gamma = None
            self.explicit = seq

    @classmethod
    def power(cls, gamma=0.67):
        return cls(gamma=gamma)

    def weight_at(self, i):
        """Step size for update i (1-based)."""
        if i < 1:
            raise ValueError("step index starts at 1")
        if self.gamma is not None:
            return (i + 1.0) ** (-self.gamma)
        if i > self.explicit.size:
            raise ValueError("explicit schedule exhausted")
        return float(self.explicit[i - 1])

    def weights(self, start, count):
        """Vector of step sizes for updates start .. start+count-1."""
        idx = np.arange(start, start + count, dtype=float)
        if self.gamma is not None:
            return (idx + 1.0) ** (-self.gamma)
        if start + count - 1 > self.explicit.size:
            raise ValueError("explicit schedule exhausted")
        return self.explicit[start - 1 : start - 1 + count].copy()

    def spec(self):
        if self.gamma is not None:
            return {"type": "power", "gamma": self.gamma}
        return {"type": "explicit", "weights": self.explicit.tolist()}

    @classmethod
    def from_spec(cls, spec):
        if spec["type"] == "power":
            return cls(gamma=spec["gamma"])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return cls(explicit=spec["weights"])


class PrState:
    """Mixing state, step counter, and accumulated log marginal for one stream."""

    def __init__(self, family, grid, schedule, mixing=None, step=0, log_marginal=0.0):
        if not isinstance(family, KernelFamily):
            family = KernelFamily(family)
        self.family = family
        self.grid = grid
        self.schedule = schedule
        self.mixing = mixing if mixing is not None else uniform_init(grid)
        self.step = int(step)
        self._log_marginal = float(log_marginal)

    @property
    def log_marginal(self):
        """log of the accumulated predictive joint density; 0 before any data."""
        return self._log_marginal

    def update(self, x):
        """Consume one observation; returns the predictive log density increment."""
        return float(self.update_many(np.array([float(x)]))[0])

    def update_many(self, xs):
        """Consume a batch of observations; returns per-step increments."""
        xs = np.asarray(xs, dtype=float)
        if xs.size == 0:
            return np.empty(0)
        for x in xs:
            self.family.check_observation(x)
        ws = self.schedule.weights(self.step + 1, xs.size)
        p1, p2 = self.grid.node_coords
        inc, status = _backend.pr_recurse(
            self.family.code, p1, p2, self.mixing.log_weights, xs, ws
        )
        if status >= 0:
            raise NumericalDegeneracy(
                f"all kernel densities underflowed at observation "
                f"{xs[status]!r} (step {self.step + status + 1}); widen the grid",
                step=self.step + status + 1,
            )
        self.step += xs.size
        # accumulate one step at a time so a batched call reproduces the
        # streaming call bitwise
        for v in inc:
            self._log_marginal += float(v)
        return inc

    def to_checkpoint(self):
        return {
            "version": CHECKPOINT_VERSION,
            "family": self.family.name,
            "grid": self.grid.spec(),
            "schedule": self.schedule.spec(),
            "step": self.step,
            "log_marginal": self._log_marginal,
            "log_weights": self.mixing.log_weights.tolist(),
        }

    @classmethod
    def from_checkpoint(cls, ckpt):
        if ckpt.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {ckpt.get('version')!r}")
        grid = IndexGrid.from_spec(ckpt["grid"])
        mixing = MixingState(grid, np.asarray(ckpt["log_weights"], dtype=float))
        return cls(
            family=KernelFamily(ckpt["family"]),
            grid=grid,
            schedule=WeightSchedule.from_spec(ckpt["schedule"]),
            mixing=mixing,
            step=ckpt["step"],
            log_marginal=ckpt["log_marginal"],
        )

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_checkpoint(), fh)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_checkpoint(json.load(fh))


def pr_update(state, x):
    """Functional spelling of the single-observation update."""
    state.update(x)
    return state
