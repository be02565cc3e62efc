"""Step 2: sampling the adapted item response model with fixed positions.

Respondent positions stay pinned at the Step-1 estimate for the whole
chain. Per iteration, in fixed order: per-item position proposals,
per-item easiness proposals, per-person trait proposals, an exact
inverse-gamma Gibbs draw of the trait variance, and a Gaussian walk on
the influence weight (which is free in sign, so the walk runs on the
real line untransformed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _mcmc_kernels as kernels
from .lsm import McmcConfig, tune_step_sizes
from .model import (
    AdaptedLsirmParams,
    DataError,
    Hyperparams,
    ItemResponseData,
    NumericalError,
    check_coords,
    log_priors_adapted,
    response_probability,
)

LSIRM_STEP_DEFAULTS = {"w": 0.5, "beta": 0.2, "theta": 0.5, "delta": 0.1}


@dataclass(frozen=True)
class LsirmDraws:
    """Retained, thinned draws of one adapted response-model chain."""

    beta: np.ndarray           # (S, p)
    theta: np.ndarray          # (S, n)
    sigma2: np.ndarray         # (S,)
    delta: np.ndarray          # (S,)
    w: np.ndarray              # (S, p, 2)
    log_posterior: np.ndarray  # (S,)
    accepted: dict
    proposed: dict
    step_sizes: dict
    seed: int
    aligned: bool = False

    @property
    def n_retained(self) -> int:
        return self.delta.shape[0]

    @property
    def acceptance_rates(self) -> dict:
        return {name: self.accepted[name] / self.proposed[name]
                for name in self.accepted if self.proposed[name] > 0}


def gibbs_sigma2(theta, hp: Hyperparams, rng) -> float:
    """Exact conditional draw of the trait variance.

    Inverse-gamma with shape a + n/2 and rate b + sum(theta^2)/2; drawn
    as the reciprocal of a gamma variate. For near-zero shapes (only
    reachable with empty ``theta``) the distribution has substantial
    mass beyond float64 range; the overflowing draws come back as
    ``inf`` rather than raising.
    """
    theta = np.asarray(theta, dtype=float)
    if not np.isfinite(theta).all():
        raise DataError("theta contains non-finite values")
    shape = hp.a_sigma + 0.5 * theta.shape[0]
    rate = hp.b_sigma + 0.5 * float(theta @ theta)
    g = rng.gamma(shape, 1.0 / rate)
    return 1.0 / g if g > 0.0 else math.inf


def run_adapted_lsirm_chain(resp: ItemResponseData, zhat, hp: Hyperparams,
                            cfg: McmcConfig, likelihood_scale: float = 1.0,
                            fix_delta: float | None = None) -> LsirmDraws:
    """Run one chain with respondent positions fixed at ``zhat``.

    ``fix_delta`` pins the influence weight (no proposals are made for
    it); used by the reduction tests, e.g. ``fix_delta=0.0`` turns the
    model into a main-effects-only item response model.
    """
    x = np.ascontiguousarray(resp.responses, dtype=np.float64)
    n, p = resp.n, resp.p
    zhat = np.ascontiguousarray(check_coords(zhat, n_rows=n, name="zhat"))
    steps = cfg.resolved_steps(LSIRM_STEP_DEFAULTS)
    rng = np.random.default_rng(cfg.seed)

    beta = np.zeros(p)
    theta = np.zeros(n)
    sigma2 = 1.0
    delta = 0.0 if fix_delta is None else float(fix_delta)
    w = rng.standard_normal((p, 2))
    d = kernels.cross_dists(zhat, w)
    cur_ll = kernels.lsirm_loglik(x, d, beta, theta, delta)
    cur_lp = log_priors_adapted(
        AdaptedLsirmParams(beta, theta, sigma2, delta, w), hp)
    if not np.isfinite(cur_ll + cur_lp):
        raise NumericalError(
            f"non-finite posterior at initialization (ll={cur_ll}, lp={cur_lp})")

    n_retained = cfg.n_retained
    out_beta = np.empty((n_retained, p))
    out_theta = np.empty((n_retained, n))
    out_sigma2 = np.empty(n_retained)
    out_delta = np.empty(n_retained)
    out_w = np.empty((n_retained, p, 2))
    out_logpost = np.empty(n_retained)

    blocks = ("w", "beta", "theta", "delta")
    accepted = {b: 0 for b in blocks}
    proposed = {b: 0 for b in blocks}
    win_accepted = {b: 0 for b in blocks}
    win_proposed = {b: 0 for b in blocks}
    stage = 0

    inv_two_var_delta = 0.5 / hp.sigma_delta ** 2
    col_buf = np.empty(n)
    keep = 0

    for it in range(1, cfg.total_iters + 1):
        eps_w = steps["w"] * rng.standard_normal((p, 2))
        log_u = np.log(rng.random(p))
        acc, dll = kernels.lsirm_w_sweep(x, zhat, w, d, beta, theta, delta,
                                         likelihood_scale, eps_w, log_u, col_buf)
        cur_ll += dll
        accepted["w"] += acc
        proposed["w"] += p
        win_accepted["w"] += acc
        win_proposed["w"] += p

        eps_b = steps["beta"] * rng.standard_normal(p)
        log_u = np.log(rng.random(p))
        acc, dll = kernels.lsirm_beta_sweep(x, d, beta, theta, delta,
                                            likelihood_scale, eps_b, log_u,
                                            hp.sigma_beta)
        cur_ll += dll
        accepted["beta"] += acc
        proposed["beta"] += p
        win_accepted["beta"] += acc
        win_proposed["beta"] += p

        eps_t = steps["theta"] * rng.standard_normal(n)
        log_u = np.log(rng.random(n))
        acc, dll = kernels.lsirm_theta_sweep(x, d, beta, theta, delta,
                                             likelihood_scale, eps_t, log_u,
                                             sigma2)
        cur_ll += dll
        accepted["theta"] += acc
        proposed["theta"] += n
        win_accepted["theta"] += acc
        win_proposed["theta"] += n

        sigma2 = gibbs_sigma2(theta, hp, rng)

        if fix_delta is None:
            d_new = delta + steps["delta"] * rng.standard_normal()
            ll_new = kernels.lsirm_loglik(x, d, beta, theta, d_new)
            dlp = -(d_new * d_new - delta * delta) * inv_two_var_delta
            if math.log(rng.random()) < likelihood_scale * (ll_new - cur_ll) + dlp:
                delta = d_new
                cur_ll = ll_new
                accepted["delta"] += 1
                win_accepted["delta"] += 1
            proposed["delta"] += 1
            win_proposed["delta"] += 1

        if cfg.adapt and it <= cfg.burn_in and it % cfg.adapt_window == 0:
            tunable = {b: steps[b] for b in blocks if win_proposed[b] > 0}
            rates = {b: win_accepted[b] / win_proposed[b] for b in tunable}
            tuned = tune_step_sizes(tunable, rates, stage)
            steps.update(tuned)
            stage += 1
            win_accepted = {b: 0 for b in blocks}
            win_proposed = {b: 0 for b in blocks}

        if it > cfg.burn_in and (it - cfg.burn_in) % cfg.thin == 0:
            cur_ll = kernels.lsirm_loglik(x, d, beta, theta, delta)  # resync drift
            out_beta[keep] = beta
            out_theta[keep] = theta
            out_sigma2[keep] = sigma2
            out_delta[keep] = delta
            out_w[keep] = w
            params = AdaptedLsirmParams(beta, theta, sigma2, delta, w)
            out_logpost[keep] = (likelihood_scale * cur_ll
                                 + log_priors_adapted(params, hp))
            keep += 1

    return LsirmDraws(beta=out_beta, theta=out_theta, sigma2=out_sigma2,
                      delta=out_delta, w=out_w, log_posterior=out_logpost,
                      accepted=accepted, proposed=proposed, step_sizes=steps,
                      seed=cfg.seed)


def fit_statistic(resp: ItemResponseData, zhat,
                  point_params: AdaptedLsirmParams) -> np.ndarray:
    """Cell-wise fitted response probabilities at the point estimates.

    Returns the (n, p) matrix of predicted probabilities; subtract it
    from the true probabilities (when known) to get the fit residuals.
    """
    zhat = check_coords(zhat, n_rows=resp.n, name="zhat")
    if point_params.p != resp.p or point_params.n != resp.n:
        raise DataError("parameter dimensions do not match the response matrix")
    d = kernels.cross_dists(np.ascontiguousarray(zhat),
                            np.ascontiguousarray(point_params.w))
    return response_probability(point_params.beta[None, :],
                                point_params.theta[:, None],
                                point_params.delta, d)
