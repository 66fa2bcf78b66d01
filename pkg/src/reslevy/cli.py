"""Command-line entry point.

::

    reslevy classify --family stable --alpha 1.5 --rhobar 0.5
    reslevy criteria-map --family stable --alpha-grid 0.1:2.0:0.1 --rho-grid 0.05:0.95:0.05
    reslevy lifetime --family stable-subordinator --alpha 0.5 --starts 0.5,1,2 --n-paths 10000
    reslevy verify --config run.cfg

Every option can also come from a ``--config`` file (see
:mod:`reslevy.config`); command-line values win.  Exit codes: 0 success,
1 configuration error, 2 failed check, 3 numerical-method or I/O error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from functools import partial

import numpy as np

from . import mc_verify
from .analytics import classify, criteria_map
from .config import KEY_PARSERS, COMMANDS, MODEL_KEYS, RunConfig, parse_config
from .errors import (
    ConfigurationError,
    DomainError,
    NumericalMethodError,
    ParameterError,
    PreconditionError,
    UnsupportedOperationError,
)
from .levy_models import Family, LevyModel, as_stable_subordinator, make_model, resolve_family
from .path_engine import SimParams, auto_relative_cutoff
from .plotting import plot_criteria_map, plot_lifetimes, plot_trace, plot_verify
from .reporting import make_header, to_jsonable, write_csv, write_json
from .resurrection import AbsorptionPolicy, Status, resurrect_batch, resurrect_path, simulate_lifetimes
from .rng import map_chunks, substream

__all__ = ["main", "run", "build_parser"]

EXIT_OK, EXIT_CONFIG, EXIT_FAILED, EXIT_NUMERICAL = 0, 1, 2, 3


class CheckFailed(Exception):
    """Raised after reports are written when a verification check failed."""


# ----------------------------------------------------------------------------
# config -> objects


def model_from_config(cfg: RunConfig) -> LevyModel:
    if cfg.family is None:
        raise ConfigurationError("family: missing required key")
    return make_model(resolve_family(cfg.family), dict(cfg.params))


def sim_from_config(cfg: RunConfig, model: LevyModel) -> SimParams:
    rel = cfg.relative_truncation
    if rel == "auto":
        rel = auto_relative_cutoff(model)
    elif rel == "none":
        rel = None
    return SimParams(cfg.grid_dt, cfg.truncation_delta, rel, cfg.budget)


def policy_from_config(cfg: RunConfig) -> AbsorptionPolicy:
    return AbsorptionPolicy(cfg.eps_abs, cfg.eps_time, cfg.window, cfg.n_max, cfg.wall_time, cfg.max_time)


def _validate(cfg: RunConfig) -> LevyModel | None:
    """Check every precondition of the requested work before sampling."""
    if cfg.command == "criteria-map":
        if cfg.family is not None and resolve_family(cfg.family) is not Family.STABLE:
            raise ConfigurationError("family: criteria-map needs the stable family")
        for key in ("alpha_grid", "rho_grid"):
            if getattr(cfg, key) is None:
                raise ConfigurationError(f"{key}: missing required key")
        return None
    model = model_from_config(cfg)
    if cfg.command in ("simulate", "lifetime", "verify"):
        sim_from_config(cfg, model)
        policy_from_config(cfg)
    if cfg.command == "simulate" and cfg.horizon is None:
        raise ConfigurationError("horizon: simulate needs a finite horizon")
    if cfg.command == "verify":
        for name in cfg.checks or _default_checks(model):
            mc_verify.check_preconditions(name, model)
        if cfg.checks and "feynman_kac" in cfg.checks:
            mc_verify.test_function(cfg.f)
    return model


def _default_checks(model: LevyModel) -> tuple[str, ...]:
    names = []
    for name in ("exponential_law", "stochastic_domination", "kernel_law", "lifetime_bound", "scaling_stable"):
        try:
            mc_verify.check_preconditions(name, model)
        except PreconditionError:
            continue
        names.append(name)
    if not names:
        raise ConfigurationError("checks: no default check applies to this model; list them explicitly")
    return tuple(names)


# ----------------------------------------------------------------------------
# commands


def _out(cfg: RunConfig, name: str) -> str:
    return os.path.join(cfg.output_dir, name)


def _header(cfg: RunConfig) -> dict:
    return make_header(cfg.seed, cfg.tolerances(), cfg.command)


def _cmd_classify(cfg: RunConfig, model: LevyModel) -> dict:
    verdict = classify(model).to_dict()
    write_json(_out(cfg, "classify.json"), _header(cfg), verdict)
    return verdict


def _cmd_criteria_map(cfg: RunConfig, model) -> dict:
    c = cfg.params.get("c", 1.0)
    rows = criteria_map(cfg.alpha_grid.values(), cfg.rho_grid.values(), c=c)
    header = _header(cfg)
    write_csv(
        _out(cfg, "criteria_map.csv"),
        header,
        ["alpha", "rhobar", "B", "verdict", "rule"],
        [(r["alpha"], r["rhobar"], r["B"], r["verdict"], r["rule"]) for r in rows],
    )
    counts: dict[str, int] = {}
    for r in rows:
        counts[r["verdict"]] = counts.get(r["verdict"], 0) + 1
    summary = {"points": len(rows), "counts": dict(sorted(counts.items()))}
    write_json(_out(cfg, "criteria_map.json"), header, summary)
    if cfg.plots:
        plot_criteria_map(rows, _out(cfg, "criteria_map.png"))
    return summary


def _cmd_simulate(cfg: RunConfig, model: LevyModel) -> dict:
    sim, policy = sim_from_config(cfg, model), policy_from_config(cfg)
    header = _header(cfg)
    trace_rows = []
    summary = []
    for i, x in enumerate(cfg.starts):
        trace = resurrect_path(model, x, substream(cfg.seed, "simulate-path", i), cfg.horizon, sim, policy)
        trace_rows.extend((x, n, t, z) for n, t, z in trace.rows())
        if cfg.plots:
            plot_trace(
                trace.path.times, trace.path.values, trace.tau_seq, trace.pos_seq,
                _out(cfg, f"trace_{i}.png"), title=f"{model!r}, x = {x:g}",
            )
        batch = resurrect_batch(
            model, np.full(cfg.n_paths, x), substream(cfg.seed, "simulate-batch", i), cfg.horizon, sim, policy
        )
        summary.append(
            {
                "start": x,
                "trace_status": trace.status.value,
                "trace_resurrections": len(trace.tau_seq),
                "status_counts": {s.value: batch.count(s) for s in Status},
                "mean_resurrections": float(batch.n_resurrections.mean()),
            }
        )
    write_csv(_out(cfg, "trace.csv"), header, ["start", "n", "tau_n", "Z_tau_n"], trace_rows)
    write_json(_out(cfg, "simulate.json"), header, summary)
    return {"starts": summary}


def _lifetime_chunk(size, rng, model, x, policy, sim):
    lb = simulate_lifetimes(model, x, size, rng, policy=policy, sim=sim)
    return {"zeta": lb.zeta, "censored": lb.censored, "n_res": lb.n_resurrections}


def _cmd_lifetime(cfg: RunConfig, model: LevyModel) -> dict:
    sim, policy = sim_from_config(cfg, model), policy_from_config(cfg)
    header = _header(cfg)
    rows, summary, samples = [], [], {}
    for i, x in enumerate(cfg.starts):
        out = map_chunks(
            partial(_lifetime_chunk, model=model, x=x, policy=policy, sim=sim),
            cfg.n_paths, cfg.seed, f"lifetime-{i}", workers=cfg.workers,
        )
        zeta, cens = out["zeta"], out["censored"]
        rows.extend((k, x, z, bool(c), int(n)) for k, (z, c, n) in enumerate(zip(zeta, cens, out["n_res"])))
        samples[x] = zeta[~cens]
        est = mc_verify.EstimateWithCI.from_samples(zeta[~cens], cens) if np.any(~cens) else None
        summary.append(
            {
                "start": x,
                "mean_zeta_uncensored": est.to_dict() if est else None,
                "censored_fraction": float(cens.mean()),
                "mean_resurrections": float(out["n_res"].mean()),
            }
        )
    write_csv(_out(cfg, "lifetimes.csv"), header, ["replica", "start", "zeta_or_censor", "censored", "n_resurrections"], rows)
    write_json(_out(cfg, "lifetime.json"), header, summary)
    if cfg.plots and any(s.size for s in samples.values()):
        stable = as_stable_subordinator(model)
        exponent = stable.params["alpha"] if stable is not None else None
        plot_lifetimes({x: s for x, s in samples.items() if s.size}, _out(cfg, "lifetimes.png"), exponent)
    return {"starts": summary}


def _run_check(name: str, cfg: RunConfig, model: LevyModel) -> mc_verify.CheckReport:
    x, xs, n = cfg.starts[0], cfg.starts, cfg.n_paths
    common = {"n": n, "seed": cfg.seed, "workers": cfg.workers}
    sim = sim_from_config(cfg, model) if cfg.budget is not None or cfg.relative_truncation != "auto" else None
    policy = policy_from_config(cfg)
    if name == "feynman_kac":
        return mc_verify.check_feynman_kac(model, x, cfg.t, cfg.f, sim=sim, policy=policy, **common)
    if name == "exponential_law":
        return mc_verify.check_exponential_law(model, x, sim=sim, **common)
    if name == "stochastic_domination":
        return mc_verify.check_stochastic_domination(
            model, x, cfg.n_res, n, cfg.seed, horizon=cfg.horizon, sim=sim, policy=policy, workers=cfg.workers
        )
    if name == "kernel_law":
        return mc_verify.check_kernel_law(model, x, sim=sim, **common)
    if name == "kernel_invariance":
        return mc_verify.check_kernel_invariance(model, xs, lam=cfg.lam, policy=policy, **common)
    if name == "lifetime_bound":
        return mc_verify.check_lifetime_bound(model, x, policy=policy, sim=sim, **common)
    if name == "overshoot":
        return mc_verify.check_overshoot(model, x, sim=sim, **common)
    if name == "scaling_stable":
        return mc_verify.check_scaling_stable(model, xs, policy=policy, **common)
    return mc_verify.probe_zero_one_conjecture(model, xs, horizon=cfg.horizon, sim=sim, policy=policy, **common)


def _cmd_verify(cfg: RunConfig, model: LevyModel) -> dict:
    blocks = [_run_check(name, cfg, model).to_dict() for name in cfg.checks or _default_checks(model)]
    passed = all(b["pass"] for b in blocks)
    header = _header(cfg)
    write_json(_out(cfg, "verify.json"), header, {"checks": blocks, "pass": passed})
    write_csv(_out(cfg, "verify.csv"), header, ["check", "n", "seed", "pass"], [(b["check"], b["n"], b["seed"], b["pass"]) for b in blocks])
    if cfg.plots:
        plot_verify(blocks, _out(cfg, "verify.png"))
    if not passed:
        raise CheckFailed(", ".join(b["check"] for b in blocks if not b["pass"]))
    return {"pass": passed, "checks": [b["check"] for b in blocks]}


_COMMANDS = {
    "classify": _cmd_classify,
    "criteria-map": _cmd_criteria_map,
    "simulate": _cmd_simulate,
    "lifetime": _cmd_lifetime,
    "verify": _cmd_verify,
}


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Execute a configuration and return the process exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        model = _validate(cfg)
    except (ConfigurationError, ParameterError, PreconditionError, DomainError, UnsupportedOperationError) as exc:
        print(f"reslevy: configuration error: {exc}", file=stderr)
        return EXIT_CONFIG
    try:
        result = _COMMANDS[cfg.command](cfg, model)
    except CheckFailed as exc:
        print(f"reslevy: failed checks: {exc}", file=stderr)
        return EXIT_FAILED
    except NumericalMethodError as exc:
        print(f"reslevy: numerical error: {exc} {exc.diagnostics}", file=stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"reslevy: cannot write report: {exc}", file=stderr)
        return EXIT_NUMERICAL
    print(json.dumps(to_jsonable(result), sort_keys=True, indent=2), file=stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reslevy", description="Resurrected Lévy processes: classify, simulate, verify.")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        p = sub.add_parser(command)
        p.add_argument("--config", help="flat key = value config file")
        for key in sorted(set(KEY_PARSERS) - {"command"}) + list(MODEL_KEYS):
            p.add_argument("--" + key.replace("_", "-"), dest=key, default=None, metavar="VALUE")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    raw: dict[str, str] = {}
    try:
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                base = parse_config(fh.read(), env={})
            raw.update(_raw_from_config(base))
        for key, value in vars(args).items():
            if key in ("config", "command") or value is None:
                continue
            raw[key] = value
        raw["command"] = args.command
        cfg = RunConfig.from_mapping(raw)
    except (ConfigurationError, OSError) as exc:
        print(f"reslevy: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


def _raw_from_config(cfg: RunConfig) -> dict[str, str]:
    # serialize and re-read so file values merge with command-line overrides
    raw = {}
    for line in cfg.serialize().splitlines():
        key, value = (part.strip() for part in line.split("=", 1))
        raw[key] = value
    return raw


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
