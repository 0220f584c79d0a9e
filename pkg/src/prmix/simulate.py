"""Replication harness: data generators, replicated runs, slope estimation.

Streams are seeded with numpy SeedSequence(entropy=seed, spawn_key=(rep,))
so replication r of a scenario is reproducible independently of how many
replications run or in what order.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .engine import WeightSchedule
from .eprocess import EProcessRun
from .errors import ConfigError, InsufficientCheckpoints
from .kernels import KernelFamily
from .mixing import IndexGrid
from .null_models import make_null_model

GENERATORS = ("gamma", "normal_mixture")


@dataclass
class ScenarioSpec:
    generator: str
    gen_params: dict
    null: str
    family: str
    grid: dict
    schedule_gamma: float = 0.67
    n_reps: int = 20
    max_n: int = 2000
    checkpoint_stride: int = 100
    seed: int = 0
    null_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ConfigError(f"unknown generator {self.generator!r}")
        if self.generator == "gamma" and self.gen_params.get("shape", 1.0) <= 0:
            raise ConfigError("gamma generator shape must be > 0")
        if self.n_reps < 1:
            raise ConfigError("replication count must be >= 1")
        if self.max_n < self.checkpoint_stride:
            raise ConfigError("max_n must be at least the checkpoint stride")

    @classmethod
    def from_config(cls, cfg):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(cfg) - known
        if unknown:
            raise ConfigError(f"unknown scenario fields: {sorted(unknown)}")
        try:
            return cls(**cfg)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def replication_rng(seed, rep):
    """Named stream-splitting rule: one child stream per replication index."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                        spawn_key=(rep,)))


def gen_gamma(shape, n, seed, rep=0):
    """n iid draws from gamma(shape, rate=1)."""
    if shape <= 0:
        raise ConfigError("gamma shape must be > 0")
    return replication_rng(seed, rep).gamma(shape, 1.0, size=n)


def gen_normal_mixture(mu, n, seed, rep=0):
    """n iid draws from 0.75 N(0, 2) + 0.25 N(mu, 2) (variance-2 components)."""
    rng = replication_rng(seed, rep)
    comp = rng.random(n) < 0.25
    z = rng.normal(0.0, math.sqrt(2.0), size=n)
    return z + np.where(comp, mu, 0.0)


def generate(spec, rep):
    if spec.generator == "gamma":
        return gen_gamma(spec.gen_params["shape"], spec.max_n, spec.seed, rep)
    return gen_normal_mixture(spec.gen_params["mu"], spec.max_n, spec.seed, rep)


def _run_one_rep(spec, rep):
    xs = generate(spec, rep)
    run = EProcessRun(
        KernelFamily(spec.family),
        IndexGrid.from_spec(spec.grid),
        WeightSchedule.power(spec.schedule_gamma),
        make_null_model(spec.null, spec.null_params),
        record_every=spec.checkpoint_stride,
    )
    run.extend(xs)
    return [
        (rep, rec.n, rec.log_e)
        for rec in run.records[1:]
        if rec.n % spec.checkpoint_stride == 0
    ]


def run_replications(spec, on_error="record", workers=1):
    """Run all replications; returns (rows, failures).

    rows: list of (rep, n, log_e) at the checkpoint stride, merged in
    replication order regardless of worker scheduling.
    failures: list of (rep, message) for replications that errored.
    """
    rows = []
    failures = []
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {
                rep: pool.submit(_run_one_rep, spec, rep)
                for rep in range(spec.n_reps)
            }
            for rep in range(spec.n_reps):
                try:
                    rows.extend(futures[rep].result())
                except Exception as exc:  # noqa: BLE001 - recorded per rep
                    if on_error == "raise":
                        raise
                    failures.append((rep, f"{type(exc).__name__}: {exc}"))
        return rows, failures
    for rep in range(spec.n_reps):
        try:
            rows.extend(_run_one_rep(spec, rep))
        except Exception as exc:  # noqa: BLE001 - recorded per rep
            if on_error == "raise":
                raise
            failures.append((rep, f"{type(exc).__name__}: {exc}"))
    return rows, failures


@dataclass
class SlopeSummary:
    per_rep: dict  # rep -> slope
    mean: float
    sd: float
    n_min: int


def estimate_slope(rows, n_min):
    """Least-squares slope of log_e against n per replication, past burn-in."""
    by_rep = {}
    for rep, n, log_e in rows:
        if n >= n_min and np.isfinite(log_e):
            by_rep.setdefault(rep, []).append((n, log_e))
    slopes = {}
    for rep, pts in sorted(by_rep.items()):
        if len(pts) < 3:
            continue
        ns = np.array([p[0] for p in pts], dtype=float)
        ys = np.array([p[1] for p in pts], dtype=float)
        slopes[rep] = float(np.polyfit(ns, ys, 1)[0])
    if not slopes:
        raise InsufficientCheckpoints(
            f"need at least 3 checkpoints with n >= {n_min} in some replication"
        )
    vals = np.array(list(slopes.values()))
    return SlopeSummary(
        per_rep=slopes,
        mean=float(np.mean(vals)),
        sd=float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0,
        n_min=int(n_min),
    )


def true_density(spec):
    """Density evaluator and quadrature domain for a scenario's generator."""
    from scipy import stats

    if spec.generator == "gamma":
        dist = stats.gamma(a=spec.gen_params["shape"], scale=1.0)
        lo = max(dist.ppf(1e-8), 1e-9)
        return dist.pdf, (lo, dist.ppf(1.0 - 1e-8))
    mu = spec.gen_params["mu"]
    sd = math.sqrt(2.0)
    c0 = stats.norm(0.0, sd)
    c1 = stats.norm(mu, sd)

    def pdf(x):
        return 0.75 * c0.pdf(x) + 0.25 * c1.pdf(x)

    lo = min(c0.ppf(1e-8), c1.ppf(1e-8))
    hi = max(c0.ppf(1.0 - 1e-8), c1.ppf(1.0 - 1e-8))
    return pdf, (lo, hi)


def default_burn_in(max_n):
    """Burn-in before slope fitting: 20% of the horizon."""
    return int(0.2 * max_n)


def write_rows_csv(rows, path):
    """rep,n,log_e with shortest round-trip decimal formatting."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rep", "n", "log_e"])
        for rep, n, log_e in rows:
            writer.writerow([rep, n, repr(float(log_e))])


def terminal_log_e(rows, max_n):
    """rep -> log_e at the final checkpoint."""
    out = {}
    for rep, n, log_e in rows:
        if n == max_n:
            out[rep] = log_e
    return out
