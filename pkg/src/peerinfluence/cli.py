"""Command-line interface.

Subcommands:

* ``fit``       estimate on real data files
* ``simulate``  generate one synthetic dataset and write its files
* ``replicate`` generate-and-fit a batch of synthetic replicates
* ``sweep``     scenario-3 grid over the scale factor
* ``lnam``      autocorrelation baseline only

Every run writes its artifacts under ``--out``; failures leave a
machine-readable ``error.json`` there and exit nonzero (2 for input
errors, 3 for numerical failures).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .autocorr import behavior_counts, fit_lnam
from .io import (
    load_network,
    load_responses,
    save_network,
    save_responses,
    write_error_record,
    write_summary,
)
from .lsm import McmcConfig
from .model import DataError, Hyperparams, NumericalError
from .pipeline import RunConfig, run_pipeline
from .simulate import LAMBDA_GRID, ScenarioSpec, generate_pair

log = logging.getLogger("peerinfluence")

REAL_DATA_DEFAULTS = {"total_iters": 60_000, "burn_in": 10_000, "thin": 5}
SIMULATION_DEFAULTS = {"total_iters": 30_000, "burn_in": 5_000, "thin": 5}
STEP2_SEED_STRIDE = 500_009

REPLICATE_COLUMNS = ["replicate", "seed", "delta.mean", "delta.hpd_low",
                     "delta.hpd_high", "gamma.mean", "alpha.mean",
                     "lnam.rho", "fit.p_diff.mean", "fit.p_diff.q25",
                     "fit.p_diff.q75"]


def _add_common(parser):
    parser.add_argument("--out", type=Path, required=True,
                        help="output directory for artifacts")
    parser.add_argument("--seed", type=int, default=0)


def _add_mcmc_flags(parser):
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON file with step1/step2/hyper settings")
    parser.add_argument("--chains", type=int, default=1)
    parser.add_argument("--iters", type=int, default=None,
                        help="total iterations for both steps")
    parser.add_argument("--burn", type=int, default=None,
                        help="burn-in iterations for both steps")
    parser.add_argument("--thin", type=int, default=None)
    parser.add_argument("--emit-plots", action="store_true")


def _add_scenario_flags(parser):
    parser.add_argument("--scenario", choices=["1.1", "1.2", "1.3", "2", "3"],
                        required=True)
    parser.add_argument("--lambda", dest="lam", type=float, default=None,
                        help=f"scale factor for scenario 3, one of {LAMBDA_GRID}")


def _load_config_file(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise DataError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"config file {path} is not valid JSON: {exc}") from None


def _mcmc_configs(args, defaults) -> tuple[McmcConfig, McmcConfig, Hyperparams, int]:
    """Defaults, then config file, then command-line flags."""
    file_cfg = _load_config_file(getattr(args, "config", None))
    step_settings = {}
    for label in ("step1", "step2"):
        settings = dict(defaults)
        settings.update(file_cfg.get(label, {}))
        if args.iters is not None:
            settings["total_iters"] = args.iters
        if args.burn is not None:
            settings["burn_in"] = args.burn
        if args.thin is not None:
            settings["thin"] = args.thin
        step_settings[label] = settings
    step_settings["step1"].setdefault("seed", args.seed)
    step_settings["step2"].setdefault("seed", args.seed + STEP2_SEED_STRIDE)
    hp = Hyperparams(**file_cfg.get("hyper", {}))
    chains = file_cfg.get("chains", args.chains)
    return (McmcConfig(**step_settings["step1"]),
            McmcConfig(**step_settings["step2"]), hp, chains)


def _print_headline(summary: dict) -> None:
    for key in ("delta.mean", "delta.hpd_low", "delta.hpd_high", "gamma.mean",
                "rhat.delta", "rhat.gamma", "lnam.rho", "fit.p_diff.mean"):
        if key in summary:
            print(f"{key} = {summary[key]:.6g}")


def cmd_fit(args) -> int:
    step1, step2, hp, chains = _mcmc_configs(args, REAL_DATA_DEFAULTS)
    cfg = RunConfig(step1=step1, step2=step2, hp=hp, chains=chains,
                    network_path=args.network, responses_path=args.responses,
                    out_dir=args.out, emit_plots=args.emit_plots)
    result = run_pipeline(cfg)
    _print_headline(result.summary)
    print(f"artifacts written to {result.out_dir}")
    return 0


def _scenario_from_args(args, seed) -> ScenarioSpec:
    return ScenarioSpec(args.scenario, seed=seed, lam=args.lam)


def cmd_simulate(args) -> int:
    spec = _scenario_from_args(args, args.seed)
    pair = generate_pair(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_network(out / "network.csv", pair.net)
    save_responses(out / "responses.csv", pair.resp)
    t = pair.truth
    truth_record = {
        "scenario": spec.scenario, "seed": spec.seed, "lambda": spec.lam,
        "alpha": t.alpha, "gamma": t.gamma, "delta": t.delta,
        "beta": t.beta.tolist(), "theta": t.theta.tolist(),
        "z_social": t.z_social.tolist(), "z_item_side": t.z_item_side.tolist(),
        "w": t.w.tolist(),
        "person_clusters": t.person_clusters.tolist(),
        "item_clusters": t.item_clusters.tolist(),
    }
    with open(out / "truth.json", "w") as fh:
        json.dump(truth_record, fh)
    print(f"wrote network.csv, responses.csv, truth.json to {out}")
    return 0


def _fit_scenario(args, spec, out_dir, step1, step2, hp, chains) -> dict:
    cfg = RunConfig(step1=step1, step2=step2, hp=hp, chains=chains,
                    scenario=spec, out_dir=out_dir, emit_plots=args.emit_plots)
    return run_pipeline(cfg).summary


def cmd_replicate(args) -> int:
    step1, step2, hp, chains = _mcmc_configs(args, SIMULATION_DEFAULTS)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for rep in range(args.replicates):
        seed = args.seed + rep
        spec = _scenario_from_args(args, seed)
        rep_dir = out / f"rep{rep + 1:03d}"
        s1 = dataclasses.replace(step1, seed=step1.seed + rep)
        s2 = dataclasses.replace(step2, seed=step2.seed + rep)
        summary = _fit_scenario(args, spec, rep_dir, s1, s2, hp, chains)
        rows.append([rep + 1, seed] + [summary.get(k, "")
                                       for k in REPLICATE_COLUMNS[2:]])
        log.info("replicate %d/%d: delta.mean=%.4g", rep + 1, args.replicates,
                 summary["delta.mean"])
    with open(out / "replicates_summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPLICATE_COLUMNS)
        writer.writerows(rows)
    print(f"wrote {args.replicates} replicate fits to {out}")
    return 0


def cmd_sweep(args) -> int:
    step1, step2, hp, chains = _mcmc_configs(args, SIMULATION_DEFAULTS)
    lambdas = [float(v) for v in args.lambdas.split(",")]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for lam in lambdas:
        means = []
        hpd_excludes_zero = []
        for rep in range(args.replicates):
            seed = args.seed + rep
            spec = ScenarioSpec("3", seed=seed, lam=lam)
            rep_dir = out / f"lam{lam:g}_rep{rep + 1:03d}"
            s1 = dataclasses.replace(step1, seed=step1.seed + rep)
            s2 = dataclasses.replace(step2, seed=step2.seed + rep)
            summary = _fit_scenario(args, spec, rep_dir, s1, s2, hp, chains)
            means.append(summary["delta.mean"])
            hpd_excludes_zero.append(
                summary["delta.hpd_low"] > 0 or summary["delta.hpd_high"] < 0)
        rows.append([lam, float(np.mean(means)), float(np.min(means)),
                     float(np.max(means)), int(sum(hpd_excludes_zero))])
        log.info("lambda=%g: mean of delta means %.4g", lam, rows[-1][1])
    with open(out / "sweep_summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lambda", "delta_mean", "delta_min", "delta_max",
                         "hpd_excludes_zero_count"])
        writer.writerows(rows)
    print(f"wrote sweep over lambdas {lambdas} to {out}")
    return 0


def cmd_lnam(args) -> int:
    net = load_network(args.network)
    resp = load_responses(args.responses)
    if net.n != resp.n:
        raise DataError(f"dimension mismatch: network has {net.n} respondents "
                        f"but responses have {resp.n} rows")
    fit = fit_lnam(behavior_counts(resp), net.adjacency,
                   row_normalize=args.row_normalize)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = {
        "lnam.rho": fit.rho, "lnam.rho_ci_low": fit.rho_ci[0],
        "lnam.rho_ci_high": fit.rho_ci[1], "lnam.sigma2": fit.sigma2,
        "lnam.loglik": fit.log_lik, "lnam.at_boundary": fit.at_boundary,
    }
    write_summary(out / "summary.txt", summary)
    for key, value in summary.items():
        print(f"{key} = {value}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="peerinfluence",
        description="social influence estimation from paired network and "
                    "item-response data")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit the two-step model to data files")
    p_fit.add_argument("--network", type=Path, required=True)
    p_fit.add_argument("--responses", type=Path, required=True)
    _add_common(p_fit)
    _add_mcmc_flags(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_sim = sub.add_parser("simulate", help="generate one synthetic dataset")
    _add_scenario_flags(p_sim)
    _add_common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_rep = sub.add_parser("replicate", help="generate and fit R replicates")
    _add_scenario_flags(p_rep)
    p_rep.add_argument("--replicates", type=int, default=10)
    _add_common(p_rep)
    _add_mcmc_flags(p_rep)
    p_rep.set_defaults(func=cmd_replicate)

    p_sweep = sub.add_parser("sweep", help="scenario-3 grid over the scale factor")
    p_sweep.add_argument("--lambdas", default="0.01,0.2,0.6,1.0",
                         help="comma-separated scale factors")
    p_sweep.add_argument("--replicates", type=int, default=5)
    _add_common(p_sweep)
    _add_mcmc_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_lnam = sub.add_parser("lnam", help="autocorrelation baseline only")
    p_lnam.add_argument("--network", type=Path, required=True)
    p_lnam.add_argument("--responses", type=Path, required=True)
    p_lnam.add_argument("--row-normalize", action="store_true")
    _add_common(p_lnam)
    p_lnam.set_defaults(func=cmd_lnam)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    out_dir = getattr(args, "out", Path("."))
    try:
        return args.func(args)
    except DataError as exc:
        log.error("input error: %s", exc)
        write_error_record(out_dir, 2, exc)
        return 2
    except NumericalError as exc:
        log.error("numerical failure: %s", exc)
        write_error_record(out_dir, 3, exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
