"""Sequential evidence ratio: mixture marginal over maximized null likelihood.

A run advances the recursion-based numerator one observation at a time
and re-evaluates the null denominator on the full prefix at each record
point.  Records where the null supremum is unbounded are flagged and the
test abstains there.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .engine import PrState, WeightSchedule
from .errors import ConfigError
from .kernels import KernelFamily
from .mixing import IndexGrid
from .null_models import make_null_model


@dataclass
class EProcessRecord:
    """Snapshot of the evidence process at one prefix length."""

    n: int
    log_numerator: float
    log_denominator: float
    log_e: float
    anytime_p: float
    degenerate: bool = False

    @classmethod
    def make(cls, n, log_num, log_den):
        if n == 0:
            return cls(0, 0.0, 0.0, 0.0, 1.0)
        if log_den is None or (isinstance(log_den, float) and math.isnan(log_den)):
            # unbounded denominator: flag and abstain (no finite evidence value)
            return cls(n, log_num, math.nan, -math.inf, 1.0, degenerate=True)
        log_e = log_num - log_den
        return cls(n, log_num, log_den, log_e, anytime_p_from_log_e(log_e))


def anytime_p_from_log_e(log_e):
    """min(1, exp(-log_e)); valid simultaneously over stopping rules."""
    if log_e <= 0.0:
        return 1.0
    return math.exp(-log_e)


def anytime_p(record):
    return record.anytime_p


def test_at_level(record, alpha):
    """Reject iff the evidence ratio is at least 1/alpha (boundary inclusive)."""
    if not 0.0 < alpha < 1.0:
        raise ConfigError("alpha must lie in (0, 1)")
    if record.degenerate:
        return False
    return record.log_e >= -math.log(alpha)


class EProcessRun:
    """One data stream: numerator state, cached prefix, records, crossings."""

    def __init__(self, family, grid, schedule, null_model, alphas=(0.05,),
                 record_every=1):
        for a in alphas:
            if not 0.0 < a < 1.0:
                raise ConfigError("monitored alpha levels must lie in (0, 1)")
        if record_every < 1:
            raise ConfigError("record_every must be >= 1")
        self.pr = PrState(family, grid, schedule)
        self.null_model = null_model
        self.alphas = tuple(alphas)
        self.record_every = int(record_every)
        self.data = np.empty(0)
        self.records = [EProcessRecord.make(0, 0.0, 0.0)]
        self.first_crossing = {a: None for a in self.alphas}

    @property
    def n(self):
        return self.pr.step

    def step(self, x):
        """Advance by one observation; returns the newest record."""
        recs = self.extend([x])
        return recs[-1] if recs else self.records[-1]

    def extend(self, xs):
        """Advance by a batch; returns the records appended.

        Records land at multiples of ``record_every`` plus the final
        prefix length of the batch.
        """
        xs = np.asarray(xs, dtype=float)
        if xs.size == 0:
            return []
        start_n = self.pr.step
        base_num = self.pr.log_marginal
        inc = self.pr.update_many(xs)
        # accumulate sequentially from the running base so a resumed run
        # reproduces the uninterrupted numerators bitwise
        num_cum = np.empty(inc.size)
        acc = base_num
        for i, v in enumerate(inc):
            acc += float(v)
            num_cum[i] = acc
        self.data = np.concatenate([self.data, xs])
        record_ns = [
            n
            for n in range(start_n + 1, self.pr.step + 1)
            if n % self.record_every == 0 or n == self.pr.step
        ]
        dens = self.null_model.loglik_series(self.data, record_ns)
        new_records = []
        for n, den in zip(record_ns, dens):
            rec = EProcessRecord.make(n, float(num_cum[n - start_n - 1]), float(den))
            new_records.append(rec)
            self.records.append(rec)
            if not rec.degenerate:
                for a in self.alphas:
                    if self.first_crossing[a] is None and rec.log_e >= -math.log(a):
                        self.first_crossing[a] = n
        return new_records

    def to_checkpoint(self):
        return {
            "pr": self.pr.to_checkpoint(),
            "data": self.data.tolist(),
            "alphas": list(self.alphas),
            "record_every": self.record_every,
            "first_crossing": {repr(a): n for a, n in self.first_crossing.items()},
            "records": [
                [r.n, r.log_numerator, r.log_denominator, r.log_e, r.anytime_p,
                 r.degenerate]
                for r in self.records
            ],
        }

    @classmethod
    def from_checkpoint(cls, ckpt, null_model):
        run = cls.__new__(cls)
        run.pr = PrState.from_checkpoint(ckpt["pr"])
        run.null_model = null_model
        run.alphas = tuple(float(a) for a in ckpt["alphas"])
        run.record_every = int(ckpt["record_every"])
        run.data = np.asarray(ckpt["data"], dtype=float)
        run.records = [
            EProcessRecord(int(n), num, den, log_e, p, bool(flag))
            for n, num, den, log_e, p, flag in ckpt["records"]
        ]
        run.first_crossing = {
            a: ckpt["first_crossing"].get(repr(a)) for a in run.alphas
        }
        if run.data.size != run.pr.step:
            raise ConfigError("checkpoint data prefix inconsistent with step count")
        return run

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_checkpoint(), fh)

    @classmethod
    def load(cls, path, null_model):
        with open(path) as fh:
            return cls.from_checkpoint(json.load(fh), null_model)


def run_stream(data, config):
    """Build a run from a validated config mapping and feed it a data source.

    ``config`` keys: family, grid, schedule, null (name or mapping with
    name/params), alphas, record_every.
    """
    known = {"family", "grid", "schedule", "null", "alphas", "record_every"}
    unknown = set(config) - known
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    try:
        family = KernelFamily(config["family"])
        grid = IndexGrid.from_spec(config["grid"])
        schedule = WeightSchedule.from_spec(config["schedule"])
        null_cfg = config["null"]
        if isinstance(null_cfg, str):
            null_model = make_null_model(null_cfg)
        else:
            null_model = make_null_model(null_cfg["name"], null_cfg.get("params"))
    except KeyError as exc:
        raise ConfigError(f"missing config field: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    run = EProcessRun(
        family,
        grid,
        schedule,
        null_model,
        alphas=tuple(config.get("alphas", (0.05,))),
        record_every=int(config.get("record_every", 1)),
    )
    xs = np.asarray(list(data), dtype=float)
    run.extend(xs)
    return run
