"""Two-step estimation pipeline and artifact writing.

Step 1 fits the network model, the retained position draws are
Procrustes-matched and averaged into the fixed respondent estimate,
Step 2 fits the adapted response model on top of it, and the
autocorrelation baseline runs on the activity counts. Multiple chains
share the data and the Step-1 position estimate; they differ only in
their seeds, so they can run concurrently.
"""

from __future__ import annotations

import dataclasses
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .autocorr import AutocorrFit, behavior_counts, fit_lnam
from .diagnostics import summarize_scalar
from .io import (
    save_network,
    save_responses,
    write_latent_draws,
    write_scalar_draws,
    write_summary,
)
from .lsirm import LsirmDraws, fit_statistic, run_adapted_lsirm_chain
from .lsm import LsmDraws, McmcConfig, point_estimate_z, run_lsm_chain
from .model import (
    AdaptedLsirmParams,
    DataError,
    Hyperparams,
    ItemResponseData,
    NetworkData,
)
from .procrustes import align_draw_sequence, align_joint_draws
from .simulate import ScenarioSpec, Truth, generate_pair

log = logging.getLogger(__name__)

# offset between per-chain seeds; any fixed constant works, a large prime
# keeps accidental seed collisions with user-chosen values unlikely
CHAIN_SEED_STRIDE = 1_000_003


@dataclass(frozen=True)
class RunConfig:
    """Everything one pipeline invocation needs."""

    step1: McmcConfig
    step2: McmcConfig
    out_dir: Path
    hp: Hyperparams = Hyperparams()
    network_path: Path | None = None
    responses_path: Path | None = None
    scenario: ScenarioSpec | None = None
    chains: int = 1
    emit_plots: bool = False
    lnam_row_normalize: bool = False

    def __post_init__(self):
        have_paths = self.network_path is not None or self.responses_path is not None
        if self.scenario is not None and have_paths:
            raise DataError("give either data paths or a scenario, not both")
        if self.scenario is None:
            if self.network_path is None or self.responses_path is None:
                raise DataError("real-data mode needs both --network and --responses")
        if self.chains < 1:
            raise DataError("chains must be >= 1")


@dataclass
class TwoStepFit:
    """In-memory result of one two-step estimation."""

    step1: list            # aligned LsmDraws, one per chain
    step2: list            # LsirmDraws with aligned item positions
    zhat: np.ndarray
    summaries: dict        # name -> ParamSummary
    point_params: AdaptedLsirmParams
    fitted_prob: np.ndarray
    lnam: AutocorrFit | None
    lnam_error: str | None


def _chain_cfg(cfg: McmcConfig, chain_index: int) -> McmcConfig:
    return dataclasses.replace(cfg, seed=cfg.seed + CHAIN_SEED_STRIDE * chain_index)


def _run_step1(args):
    net, hp, cfg = args
    return run_lsm_chain(net, hp, cfg)


def _run_step2(args):
    resp, zhat, hp, cfg = args
    return run_adapted_lsirm_chain(resp, zhat, hp, cfg)


def _dispatch(fn, arg_list):
    if len(arg_list) > 1 and os.cpu_count() and os.cpu_count() > 1:
        with ProcessPoolExecutor(max_workers=min(len(arg_list), os.cpu_count())) as ex:
            return list(ex.map(fn, arg_list))
    return [fn(args) for args in arg_list]


def _align_step1(chains: list[LsmDraws]) -> tuple[list[LsmDraws], LsmDraws]:
    z_all = np.concatenate([c.z for c in chains], axis=0)
    logpost_all = np.concatenate([c.log_posterior for c in chains])
    aligned, _ = align_draw_sequence(z_all, log_posterior=logpost_all)
    out = []
    start = 0
    for c in chains:
        stop = start + c.n_retained
        out.append(dataclasses.replace(c, z=aligned[start:stop], aligned=True))
        start = stop
    pooled = dataclasses.replace(
        chains[0], z=aligned, aligned=True,
        alpha=np.concatenate([c.alpha for c in chains]),
        gamma=np.concatenate([c.gamma for c in chains]),
        log_posterior=logpost_all,
        accepted={b: sum(c.accepted[b] for c in chains) for b in chains[0].accepted},
        proposed={b: sum(c.proposed[b] for c in chains) for b in chains[0].proposed})
    return out, pooled


def _align_step2(chains: list[LsirmDraws], zhat) -> list[LsirmDraws]:
    w_all = np.concatenate([c.w for c in chains], axis=0)
    logpost_all = np.concatenate([c.log_posterior for c in chains])
    aligned, _ = align_joint_draws(zhat, w_all, logpost_all)
    out = []
    start = 0
    for c in chains:
        stop = start + c.n_retained
        out.append(dataclasses.replace(c, w=aligned[start:stop], aligned=True))
        start = stop
    return out


def fit_two_step(net: NetworkData, resp: ItemResponseData, hp: Hyperparams,
                 step1_cfg: McmcConfig, step2_cfg: McmcConfig,
                 chains: int = 1, lnam_row_normalize: bool = False) -> TwoStepFit:
    """Full estimation on in-memory data; the library-level entry point."""
    if net.n != resp.n:
        raise DataError(f"dimension mismatch: network has {net.n} respondents, "
                        f"responses have {resp.n} rows")

    log.info("step 1: %d chain(s) of %d iterations on n=%d",
             chains, step1_cfg.total_iters, net.n)
    step1_raw = _dispatch(_run_step1, [(net, hp, _chain_cfg(step1_cfg, i))
                                       for i in range(chains)])
    step1_aligned, pooled = _align_step1(step1_raw)
    zhat = point_estimate_z(pooled)

    log.info("step 2: %d chain(s) of %d iterations on n=%d, p=%d",
             chains, step2_cfg.total_iters, resp.n, resp.p)
    step2_raw = _dispatch(_run_step2, [(resp, zhat, hp, _chain_cfg(step2_cfg, i))
                                       for i in range(chains)])
    step2_aligned = _align_step2(step2_raw, zhat)

    summaries = {
        "alpha": summarize_scalar([c.alpha for c in step1_aligned]),
        "gamma": summarize_scalar([c.gamma for c in step1_aligned]),
        "delta": summarize_scalar([c.delta for c in step2_aligned]),
        "sigma2": summarize_scalar([c.sigma2 for c in step2_aligned]),
    }

    beta_mean = np.concatenate([c.beta for c in step2_aligned]).mean(axis=0)
    theta_mean = np.concatenate([c.theta for c in step2_aligned]).mean(axis=0)
    w_mean = np.concatenate([c.w for c in step2_aligned]).mean(axis=0)
    point_params = AdaptedLsirmParams(
        beta=beta_mean, theta=theta_mean, sigma2=summaries["sigma2"].mean,
        delta=summaries["delta"].mean, w=w_mean)
    fitted = fit_statistic(resp, zhat, point_params)

    lnam_fit, lnam_error = None, None
    try:
        lnam_fit = fit_lnam(behavior_counts(resp), net.adjacency,
                            row_normalize=lnam_row_normalize)
    except DataError as exc:
        lnam_error = str(exc)
        log.warning("baseline fit skipped: %s", exc)

    return TwoStepFit(step1=step1_aligned, step2=step2_aligned, zhat=zhat,
                      summaries=summaries, point_params=point_params,
                      fitted_prob=fitted, lnam=lnam_fit, lnam_error=lnam_error)


def _summary_dict(fit: TwoStepFit, cfg: RunConfig, net, resp,
                  truth: Truth | None) -> dict:
    out = {
        "data.n": net.n,
        "data.p": resp.p,
        "data.n_edges": net.n_edges,
        "config.chains": cfg.chains,
    }
    for label, mc in (("step1", cfg.step1), ("step2", cfg.step2)):
        out[f"config.{label}.total_iters"] = mc.total_iters
        out[f"config.{label}.burn_in"] = mc.burn_in
        out[f"config.{label}.thin"] = mc.thin
        out[f"config.{label}.seed"] = mc.seed
    for name, s in fit.summaries.items():
        out[f"{name}.mean"] = s.mean
        out[f"{name}.sd"] = s.sd
        out[f"{name}.hpd_low"] = s.hpd_low
        out[f"{name}.hpd_high"] = s.hpd_high
        if cfg.chains >= 2:
            out[f"rhat.{name}"] = s.rhat
    pooled_rates = {}
    for chains, label in ((fit.step1, "step1"), (fit.step2, "step2")):
        acc = {b: sum(c.accepted[b] for c in chains) for b in chains[0].accepted}
        prop = {b: sum(c.proposed[b] for c in chains) for b in chains[0].proposed}
        for b in acc:
            if prop[b]:
                pooled_rates[f"accept.{label}.{b}"] = acc[b] / prop[b]
    out.update(sorted(pooled_rates.items()))
    for i, b in enumerate(fit.point_params.beta, start=1):
        out[f"beta.{i}.mean"] = float(b)
    if fit.lnam is not None:
        out["lnam.rho"] = fit.lnam.rho
        out["lnam.rho_ci_low"] = fit.lnam.rho_ci[0]
        out["lnam.rho_ci_high"] = fit.lnam.rho_ci[1]
        out["lnam.sigma2"] = fit.lnam.sigma2
        out["lnam.loglik"] = fit.lnam.log_lik
    else:
        out["lnam.error"] = fit.lnam_error
    if truth is not None:
        out["truth.alpha"] = truth.alpha
        out["truth.gamma"] = truth.gamma
        out["truth.delta"] = truth.delta
        diff = truth.response_probabilities() - fit.fitted_prob
        q25, q75 = np.quantile(diff, [0.25, 0.75])
        out["fit.p_diff.mean"] = float(diff.mean())
        out["fit.p_diff.q25"] = float(q25)
        out["fit.p_diff.q75"] = float(q75)
    return out


def _write_draw_tables(out_dir: Path, fit: TwoStepFit) -> None:
    for idx, chain in enumerate(fit.step1, start=1):
        write_scalar_draws(out_dir / f"step1_draws_chain{idx}.csv",
                           {"alpha": chain.alpha, "gamma": chain.gamma,
                            "log_posterior": chain.log_posterior})
        write_latent_draws(out_dir / f"step1_z_chain{idx}.csv", chain.z)
    for idx, chain in enumerate(fit.step2, start=1):
        cols = {"delta": chain.delta, "sigma2": chain.sigma2,
                "log_posterior": chain.log_posterior}
        for i in range(chain.beta.shape[1]):
            cols[f"beta_{i + 1}"] = chain.beta[:, i]
        write_scalar_draws(out_dir / f"step2_draws_chain{idx}.csv", cols)
        write_latent_draws(out_dir / f"step2_w_chain{idx}.csv", chain.w)


def _write_person_estimates(out_dir: Path, fit: TwoStepFit) -> None:
    theta = np.concatenate([c.theta for c in fit.step2], axis=0)
    with open(out_dir / "step2_theta_mean.csv", "w") as fh:
        fh.write("person,mean,sd\n")
        means = theta.mean(axis=0)
        sds = theta.std(axis=0, ddof=1)
        for k in range(theta.shape[1]):
            fh.write(f"{k + 1},{repr(float(means[k]))},{repr(float(sds[k]))}\n")


@dataclass
class PipelineResult:
    fit: TwoStepFit
    summary: dict
    out_dir: Path
    truth: Truth | None


def run_pipeline(cfg: RunConfig) -> PipelineResult:
    """Load or generate the data, estimate, and write every artifact.

    The summary report is always written before any plot so a plotting
    failure can never corrupt it; plot errors are logged and swallowed.
    """
    from .io import load_network, load_responses  # local import to keep cycles out

    truth = None
    if cfg.scenario is not None:
        pair = generate_pair(cfg.scenario)
        net, resp, truth = pair.net, pair.resp, pair.truth
    else:
        net = load_network(cfg.network_path)
        resp = load_responses(cfg.responses_path)
        if net.n != resp.n:
            raise DataError(f"dimension mismatch: network has {net.n} respondents "
                            f"but responses have {resp.n} rows")

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    fit = fit_two_step(net, resp, cfg.hp, cfg.step1, cfg.step2,
                       chains=cfg.chains, lnam_row_normalize=cfg.lnam_row_normalize)

    if cfg.scenario is not None:
        save_network(out_dir / "network.csv", net)
        save_responses(out_dir / "responses.csv", resp)

    _write_draw_tables(out_dir, fit)
    _write_person_estimates(out_dir, fit)
    summary = _summary_dict(fit, cfg, net, resp, truth)
    write_summary(out_dir / "summary.txt", summary)

    if cfg.emit_plots:
        try:
            from .plots import save_maps
            save_maps(out_dir, fit.zhat,
                      np.concatenate([c.w for c in fit.step2]).mean(axis=0),
                      clusters=None if truth is None else truth.person_clusters)
        except Exception as exc:  # summary is already on disk
            log.warning("plot emission failed: %s", exc)

    return PipelineResult(fit=fit, summary=summary, out_dir=out_dir, truth=truth)
