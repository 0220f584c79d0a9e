"""Command-line surface: test, simulate, growth-rate, confset.

Configuration comes from a JSON file with selected flag overrides.  All
decimal output uses shortest round-trip formatting (17 significant
digits), so identical configs and inputs yield byte-identical artifacts.

Exit codes: 0 success, 2 configuration error, 3 data error,
4 numerical error.
"""

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from .confidence import confidence_set, gaussian_mean_candidates
from .engine import WeightSchedule
from .eprocess import EProcessRun
from .errors import (
    ConfigError,
    NumericalDegeneracy,
    PrmixError,
    SolverDidNotConverge,
    UnsupportedObservation,
)
from .kernels import KernelFamily
from .kl import growth_rate
from .mixing import IndexGrid
from .null_models import make_null_model
from .simulate import (
    ScenarioSpec,
    default_burn_in,
    estimate_slope,
    run_replications,
    true_density,
    write_rows_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


class DataError(PrmixError):
    pass


def _load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc


def _check_fields(cfg, known, where):
    unknown = set(cfg) - set(known)
    if unknown:
        raise ConfigError(f"unknown fields in {where}: {sorted(unknown)}")


def _build_run(cfg, alphas=None, record_every=None):
    _check_fields(
        cfg, {"family", "grid", "schedule", "null", "alphas", "record_every"},
        "run config",
    )
    try:
        family = KernelFamily(cfg["family"])
        grid = IndexGrid.from_spec(cfg["grid"])
        schedule = WeightSchedule.from_spec(cfg["schedule"])
        null_cfg = cfg["null"]
        if isinstance(null_cfg, str):
            null_model = make_null_model(null_cfg)
        else:
            null_model = make_null_model(null_cfg["name"], null_cfg.get("params"))
    except KeyError as exc:
        raise ConfigError(f"missing config field: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    alphas = tuple(alphas if alphas is not None else cfg.get("alphas", [0.05]))
    record_every = int(
        record_every if record_every is not None else cfg.get("record_every", 1)
    )
    return EProcessRun(family, grid, schedule, null_model, alphas=alphas,
                       record_every=record_every)


def _read_observations(path):
    if path == "-":
        lines = sys.stdin.read().splitlines()
    else:
        try:
            with open(path) as fh:
                lines = fh.read().splitlines()
        except OSError as exc:
            raise DataError(f"cannot read input {path}: {exc}") from exc
    xs = []
    for lineno, line in enumerate(lines, start=1):
        s = line.strip()
        if not s:
            continue
        try:
            xs.append(float(s))
        except ValueError as exc:
            raise DataError(f"line {lineno}: malformed observation {s!r}") from exc
    return np.asarray(xs, dtype=float)


def _fmt(v):
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def _write_records(records, out):
    writer = csv.writer(out)
    writer.writerow(["n", "log_num", "log_den", "log_e", "anytime_p", "flag"])
    for rec in records:
        writer.writerow([
            rec.n,
            _fmt(rec.log_numerator),
            _fmt(rec.log_denominator),
            _fmt(rec.log_e),
            _fmt(rec.anytime_p),
            "degenerate" if rec.degenerate else "ok",
        ])


def cmd_test(args):
    cfg = _load_config(args.config)
    if args.resume_from:
        with open(args.resume_from) as fh:
            ckpt = json.load(fh)
        null_cfg = cfg["null"]
        if isinstance(null_cfg, str):
            null_model = make_null_model(null_cfg)
        else:
            null_model = make_null_model(null_cfg["name"], null_cfg.get("params"))
        run = EProcessRun.from_checkpoint(ckpt, null_model)
    else:
        run = _build_run(cfg, alphas=args.alpha or None,
                         record_every=args.record_every)
    xs = _read_observations(args.input)
    run.extend(xs)
    if args.checkpoint_out:
        run.save(args.checkpoint_out)
    records = run.records
    if args.output:
        with open(args.output, "w", newline="") as fh:
            _write_records(records, fh)
    else:
        _write_records(records, sys.stdout)
    for alpha, n in run.first_crossing.items():
        if n is not None:
            print(f"crossing alpha={alpha:g} n={n}", file=sys.stderr)
    return EXIT_OK


def cmd_simulate(args):
    cfg = _load_config(args.config)
    if args.reps is not None:
        cfg["n_reps"] = args.reps
    if args.max_n is not None:
        cfg["max_n"] = args.max_n
    if args.seed is not None:
        cfg["seed"] = args.seed
    spec = ScenarioSpec.from_config(cfg)
    workers = args.workers or int(os.environ.get("PRMIX_WORKERS", "1"))
    rows, failures = run_replications(spec, workers=workers)
    write_rows_csv(rows, args.output)
    slope = estimate_slope(rows, default_burn_in(spec.max_n))
    pdf, domain = true_density(spec)
    try:
        report = growth_rate(
            pdf, spec.null, KernelFamily(spec.family),
            IndexGrid.from_spec(spec.grid), domain,
        )
        delta = report.delta
    except PrmixError as exc:
        report = None
        delta = None
        print(f"growth-rate computation failed: {exc}", file=sys.stderr)
    summary = {
        "scenario": cfg,
        "mean_slope": slope.mean,
        "sd_slope": slope.sd,
        "burn_in": slope.n_min,
        "theoretical_delta": delta,
        "failures": failures,
    }
    with open(args.summary, "w") as fh:
        json.dump(summary, fh, indent=2)
    return EXIT_OK


def cmd_growth_rate(args):
    cfg = _load_config(args.config)
    _check_fields(
        cfg,
        {"generator", "gen_params", "null", "family", "grid", "domain", "cells"},
        "growth-rate config",
    )
    try:
        spec = ScenarioSpec.from_config({
            "generator": cfg["generator"],
            "gen_params": cfg["gen_params"],
            "null": cfg["null"],
            "family": cfg["family"],
            "grid": cfg["grid"],
        })
        family = KernelFamily(cfg["family"])
        grid = IndexGrid.from_spec(cfg["grid"])
    except KeyError as exc:
        raise ConfigError(f"missing config field: {exc}") from exc
    pdf, domain = true_density(spec)
    if "domain" in cfg:
        domain = tuple(cfg["domain"])
    report = growth_rate(pdf, cfg["null"], family, grid, domain,
                         cells=int(cfg.get("cells", 4096)))
    payload = json.dumps(report.to_json(), indent=2)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)
    return EXIT_OK


def cmd_confset(args):
    cfg = _load_config(args.config)
    _check_fields(
        cfg, {"family", "grid", "schedule", "candidates", "alpha"},
        "confset config",
    )
    try:
        family = KernelFamily(cfg["family"])
        grid = IndexGrid.from_spec(cfg["grid"])
        schedule = WeightSchedule.from_spec(cfg["schedule"])
        cand_cfg = cfg["candidates"]
        alpha = float(cfg["alpha"])
    except KeyError as exc:
        raise ConfigError(f"missing config field: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cand_cfg.get("type") != "gaussian_mean":
        raise ConfigError("only gaussian_mean candidate grids are supported")
    candidates = gaussian_mean_candidates(cand_cfg["values"],
                                          sd=cand_cfg.get("sd", 1.0))
    xs = _read_observations(args.input)
    cs = confidence_set(xs, candidates, alpha, family, grid, schedule)
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(["feature", "anytime_p", "retained"])
        for cand, p in zip(candidates, cs.anytime_ps):
            writer.writerow([
                _fmt(cand.feature), _fmt(float(p)),
                "yes" if p > alpha else "no",
            ])
    finally:
        if args.output:
            out.close()
    if cs.hull is not None:
        print(f"hull {_fmt(cs.hull[0])} {_fmt(cs.hull[1])}", file=sys.stderr)
    else:
        print("hull empty", file=sys.stderr)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="prmix",
        description="Anytime-valid sequential testing with mixture "
                    "marginal likelihoods",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="run the sequential test on a stream")
    p_test.add_argument("--config", required=True)
    p_test.add_argument("--input", default="-",
                        help="observations, one per line ('-' for stdin)")
    p_test.add_argument("--output", help="records CSV path (default stdout)")
    p_test.add_argument("--alpha", type=float, action="append",
                        help="monitored level (repeatable)")
    p_test.add_argument("--record-every", type=int, default=None)
    p_test.add_argument("--checkpoint-out")
    p_test.add_argument("--resume-from")
    p_test.set_defaults(func=cmd_test)

    p_sim = sub.add_parser("simulate", help="replicated experiment harness")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--output", required=True, help="rows CSV path")
    p_sim.add_argument("--summary", required=True, help="summary JSON path")
    p_sim.add_argument("--reps", type=int)
    p_sim.add_argument("--max-n", type=int, dest="max_n")
    p_sim.add_argument("--seed", type=int)
    p_sim.add_argument("--workers", type=int,
                       help="parallel replications (default $PRMIX_WORKERS or 1)")
    p_sim.set_defaults(func=cmd_simulate)

    p_gr = sub.add_parser("growth-rate", help="theoretical growth-rate report")
    p_gr.add_argument("--config", required=True)
    p_gr.add_argument("--output")
    p_gr.set_defaults(func=cmd_growth_rate)

    p_cs = sub.add_parser("confset", help="grid confidence set for a feature")
    p_cs.add_argument("--config", required=True)
    p_cs.add_argument("--input", default="-")
    p_cs.add_argument("--output")
    p_cs.set_defaults(func=cmd_confset)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, UnsupportedObservation) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalDegeneracy, SolverDidNotConverge) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
