"""Step 1: random-walk Metropolis sampling of the network latent space model.

Per iteration, in fixed order: every respondent position gets its own
Gaussian proposal and accept/reject decision, then the intercept, then
the log of the distance weight. Proposal step sizes adapt during
burn-in toward a 0.2-0.5 acceptance band and freeze afterwards, so the
retained draws come from a fixed kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _mcmc_kernels as kernels
from .model import (
    DataError,
    Hyperparams,
    LsmParams,
    NetworkData,
    NumericalError,
    log_priors_lsm,
)

LSM_STEP_DEFAULTS = {"z": 0.5, "alpha": 0.1, "gamma": 0.1}

ACCEPT_BAND = (0.2, 0.5)


@dataclass(frozen=True)
class McmcConfig:
    """Chain length, thinning, seed, and proposal settings for one run."""

    total_iters: int
    burn_in: int
    thin: int = 1
    seed: int = 0
    step_sizes: dict | None = None
    adapt: bool = True
    adapt_window: int = 50

    def __post_init__(self):
        if self.burn_in < 0 or self.burn_in >= self.total_iters:
            raise DataError("need 0 <= burn_in < total_iters")
        if self.thin < 1:
            raise DataError("thin must be >= 1")
        if self.adapt_window < 1:
            raise DataError("adapt_window must be >= 1")
        if self.step_sizes is not None:
            for name, value in self.step_sizes.items():
                if not value > 0:
                    raise DataError(f"step size for block {name!r} must be positive")

    @property
    def n_retained(self) -> int:
        return (self.total_iters - self.burn_in) // self.thin

    def resolved_steps(self, defaults) -> dict:
        steps = dict(defaults)
        if self.step_sizes:
            unknown = set(self.step_sizes) - set(defaults)
            if unknown:
                raise DataError(f"unknown step-size blocks: {sorted(unknown)}")
            steps.update(self.step_sizes)
        return steps


def tune_step_sizes(step_sizes, acceptance_rates, stage,
                    low=ACCEPT_BAND[0], high=ACCEPT_BAND[1]) -> dict:
    """One adaptation update from a window of acceptance history.

    Blocks accepting above the band get a larger step, blocks below get a
    smaller one, by a factor exp(kappa) with kappa shrinking in the
    adaptation stage; blocks inside the band are left alone.
    """
    kappa = 1.0 / (stage + 1.0) ** 0.6
    tuned = {}
    for name, step in step_sizes.items():
        rate = acceptance_rates[name]
        if rate > high:
            step = step * math.exp(kappa)
        elif rate < low:
            step = step * math.exp(-kappa)
        tuned[name] = min(max(step, 1e-5), 100.0)
    return tuned


@dataclass(frozen=True)
class LsmDraws:
    """Retained, thinned draws of one network-model chain."""

    alpha: np.ndarray          # (S,)
    gamma: np.ndarray          # (S,)
    z: np.ndarray              # (S, n, 2)
    log_posterior: np.ndarray  # (S,)
    accepted: dict
    proposed: dict
    step_sizes: dict           # frozen post-burn-in values
    seed: int
    aligned: bool = False

    @property
    def n_retained(self) -> int:
        return self.alpha.shape[0]

    @property
    def acceptance_rates(self) -> dict:
        return {name: self.accepted[name] / self.proposed[name]
                for name in self.accepted}


def run_lsm_chain(net: NetworkData, hp: Hyperparams, cfg: McmcConfig,
                  likelihood_scale: float = 1.0) -> LsmDraws:
    """Run one chain and return the retained draws.

    Deterministic given (data, hp, cfg): all randomness comes from a
    generator seeded with ``cfg.seed``, consumed in a fixed order.
    """
    y = np.ascontiguousarray(net.adjacency, dtype=np.float64)
    n = net.n
    steps = cfg.resolved_steps(LSM_STEP_DEFAULTS)
    rng = np.random.default_rng(cfg.seed)

    alpha = 0.0
    log_gamma = 0.0
    z = rng.standard_normal((n, 2))
    d = kernels.pair_distances(z)
    cur_ll = kernels.lsm_loglik(y, d, alpha, math.exp(log_gamma))
    cur_lp = log_priors_lsm(LsmParams(alpha, math.exp(log_gamma), z), hp)
    if not np.isfinite(cur_ll + cur_lp):
        raise NumericalError(
            f"non-finite posterior at initialization (ll={cur_ll}, lp={cur_lp})")

    n_retained = cfg.n_retained
    out_alpha = np.empty(n_retained)
    out_gamma = np.empty(n_retained)
    out_z = np.empty((n_retained, n, 2))
    out_logpost = np.empty(n_retained)

    accepted = {"z": 0, "alpha": 0, "gamma": 0}
    proposed = {"z": 0, "alpha": 0, "gamma": 0}
    win_accepted = {"z": 0, "alpha": 0, "gamma": 0}
    win_proposed = {"z": 0, "alpha": 0, "gamma": 0}
    stage = 0

    inv_two_var_alpha = 0.5 / hp.sigma_alpha ** 2
    inv_two_var_gamma = 0.5 / hp.sigma_gamma ** 2
    d_buf = np.empty(n)
    keep = 0

    for it in range(1, cfg.total_iters + 1):
        gamma = math.exp(log_gamma)

        eps = steps["z"] * rng.standard_normal((n, 2))
        log_u = np.log(rng.random(n))
        acc, dll = kernels.lsm_z_sweep(y, z, d, alpha, gamma,
                                       likelihood_scale, eps, log_u, d_buf)
        cur_ll += dll
        accepted["z"] += acc
        proposed["z"] += n
        win_accepted["z"] += acc
        win_proposed["z"] += n

        a_new = alpha + steps["alpha"] * rng.standard_normal()
        ll_new = kernels.lsm_loglik(y, d, a_new, gamma)
        dlp = -(a_new * a_new - alpha * alpha) * inv_two_var_alpha
        if math.log(rng.random()) < likelihood_scale * (ll_new - cur_ll) + dlp:
            alpha = a_new
            cur_ll = ll_new
            accepted["alpha"] += 1
            win_accepted["alpha"] += 1
        proposed["alpha"] += 1
        win_proposed["alpha"] += 1

        lg_new = log_gamma + steps["gamma"] * rng.standard_normal()
        ll_new = kernels.lsm_loglik(y, d, alpha, math.exp(lg_new))
        # prior and walk both live in log space: no Jacobian term
        dlp = -(lg_new * lg_new - log_gamma * log_gamma) * inv_two_var_gamma
        if math.log(rng.random()) < likelihood_scale * (ll_new - cur_ll) + dlp:
            log_gamma = lg_new
            cur_ll = ll_new
            accepted["gamma"] += 1
            win_accepted["gamma"] += 1
        proposed["gamma"] += 1
        win_proposed["gamma"] += 1

        if cfg.adapt and it <= cfg.burn_in and it % cfg.adapt_window == 0:
            rates = {b: win_accepted[b] / win_proposed[b] for b in steps}
            steps = tune_step_sizes(steps, rates, stage)
            stage += 1
            win_accepted = {b: 0 for b in steps}
            win_proposed = {b: 0 for b in steps}

        if it > cfg.burn_in and (it - cfg.burn_in) % cfg.thin == 0:
            gamma = math.exp(log_gamma)
            cur_ll = kernels.lsm_loglik(y, d, alpha, gamma)  # resync drift
            out_alpha[keep] = alpha
            out_gamma[keep] = gamma
            out_z[keep] = z
            out_logpost[keep] = (likelihood_scale * cur_ll
                                 + log_priors_lsm(LsmParams(alpha, gamma, z), hp))
            keep += 1

    return LsmDraws(alpha=out_alpha, gamma=out_gamma, z=out_z,
                    log_posterior=out_logpost, accepted=accepted,
                    proposed=proposed, step_sizes=steps, seed=cfg.seed)


def point_estimate_z(draws: LsmDraws, aligned: bool = True) -> np.ndarray:
    """Element-wise posterior mean of the retained position draws.

    With ``aligned=True`` (the normal case) the draws must have been
    Procrustes-matched first; averaging raw draws mixes arbitrary
    rotations and shrinks the configuration toward the origin.
    """
    if draws.n_retained == 0:
        raise DataError("no retained draws")
    if aligned and not draws.aligned:
        raise DataError("draws are not aligned; run alignment first "
                        "or pass aligned=False")
    return draws.z.mean(axis=0)
