"""Core data types and the log-likelihood / log-prior kernels.

Everything here is a pure function over immutable inputs: no sampling
logic, no shared state. The two samplers, the simulator, and the tests
all evaluate the same expressions through this module.

Conventions fixed project-wide:

* latent spaces are two-dimensional; a configuration is an (m, 2) array;
* the network likelihood sums each unordered pair once (k < l);
* the weight of the network distance term has its prior placed on the
  log scale and is evaluated as a density in log-space (the sampler
  random-walks in the same space, so no Jacobian term appears);
* Bernoulli-logit terms are computed as ``y*eta - log1p(exp(eta))`` with
  the overflow-safe branch for large ``eta``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, gammaln

LOG_2PI = float(np.log(2.0 * np.pi))


class DataError(ValueError):
    """Invalid input data, dimensions, or configuration."""


class NumericalError(RuntimeError):
    """Non-finite values arose where finite ones are required."""


def _softplus(eta):
    # log(1 + exp(eta)), stable for eta -> +/- inf
    return np.logaddexp(0.0, eta)


def _normal_logpdf(x, sd):
    return -0.5 * LOG_2PI - np.log(sd) - 0.5 * (x / sd) ** 2


def check_coords(coords, n_rows=None, name="coords"):
    """Validate an (m, 2) latent configuration and return it as float64."""
    c = np.asarray(coords, dtype=float)
    if c.ndim != 2 or c.shape[1] != 2:
        raise DataError(f"{name} must be an (m, 2) array, got shape {c.shape}")
    if n_rows is not None and c.shape[0] != n_rows:
        raise DataError(f"{name} must have {n_rows} rows, got {c.shape[0]}")
    if not np.isfinite(c).all():
        raise DataError(f"{name} contains non-finite coordinates")
    return c


def _check_binary(a, name):
    if not np.isfinite(a).all():
        raise DataError(f"{name} contains missing or non-finite entries")
    if not np.isin(a, (0.0, 1.0)).all():
        raise DataError(f"{name} entries must all be 0 or 1")


@dataclass(frozen=True)
class NetworkData:
    """Symmetric binary peer network over n respondents, no self-ties."""

    adjacency: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DataError(f"adjacency must be square, got shape {a.shape}")
        _check_binary(a, "adjacency")
        if np.diag(a).any():
            raise DataError("adjacency has nonzero diagonal (self-ties)")
        if not np.array_equal(a, a.T):
            raise DataError("adjacency must be symmetric")
        object.__setattr__(self, "adjacency", a)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_edges(self) -> int:
        return int(self.adjacency.sum()) // 2


@dataclass(frozen=True)
class ItemResponseData:
    """n x p binary matrix of item-level behavior responses."""

    responses: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.responses, dtype=float)
        if x.ndim != 2:
            raise DataError(f"responses must be 2-d, got shape {x.shape}")
        _check_binary(x, "responses")
        object.__setattr__(self, "responses", x)

    @property
    def n(self) -> int:
        return self.responses.shape[0]

    @property
    def p(self) -> int:
        return self.responses.shape[1]


@dataclass(frozen=True)
class LsmParams:
    """Network-model parameters: intercept, distance weight, respondent positions.

    The distance weight is positive under the model; the value 0.0 is
    accepted by the likelihood only (independence reduction), the prior
    rejects it.
    """

    alpha: float
    gamma: float
    z: np.ndarray

    def __post_init__(self):
        if not np.isfinite(self.alpha):
            raise DataError("alpha must be finite")
        if not (np.isfinite(self.gamma) and self.gamma >= 0):
            raise DataError("gamma must be finite and non-negative")
        object.__setattr__(self, "z", check_coords(self.z, name="z"))


@dataclass(frozen=True)
class AdaptedLsirmParams:
    """Response-model parameters with respondent positions held fixed.

    ``delta`` is the influence weight and is free in sign; its sign gives
    the direction of the network's effect on responses.
    """

    beta: np.ndarray
    theta: np.ndarray
    sigma2: float
    delta: float
    w: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.beta, dtype=float)
        t = np.asarray(self.theta, dtype=float)
        if b.ndim != 1 or t.ndim != 1:
            raise DataError("beta and theta must be 1-d vectors")
        if not (np.isfinite(b).all() and np.isfinite(t).all()):
            raise DataError("beta/theta contain non-finite values")
        if not (np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise DataError("sigma2 must be positive")
        if not np.isfinite(self.delta):
            raise DataError("delta must be finite")
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "theta", t)
        object.__setattr__(self, "w", check_coords(self.w, n_rows=b.shape[0], name="w"))

    @property
    def n(self) -> int:
        return self.theta.shape[0]

    @property
    def p(self) -> int:
        return self.beta.shape[0]


@dataclass(frozen=True)
class Hyperparams:
    """Prior scales. Defaults match the values used for all analyses."""

    sigma_alpha: float = 2.5
    sigma_beta: float = 2.5
    sigma_gamma: float = 1.0
    sigma_delta: float = 1.0
    a_sigma: float = 0.001
    b_sigma: float = 0.001

    def __post_init__(self):
        for name in ("sigma_alpha", "sigma_beta", "sigma_gamma",
                     "sigma_delta", "a_sigma", "b_sigma"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise DataError(f"{name} must be strictly positive")


def pairwise_distances(z) -> np.ndarray:
    """Full (m, m) Euclidean distance matrix of a 2-d configuration."""
    z = np.asarray(z, dtype=float)
    diff = z[:, None, :] - z[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=2))


def cross_distances(z, w) -> np.ndarray:
    """(n, p) Euclidean distances between two 2-d configurations."""
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    diff = z[:, None, :] - w[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=2))


def lsm_log_likelihood(net: NetworkData, params: LsmParams,
                       double_count_pairs: bool = False) -> float:
    """Log-likelihood of the network under the distance model.

    Sums ``y*eta - log(1+exp(eta))`` with ``eta = alpha - gamma*||z_k - z_l||``
    over unordered pairs k < l. ``double_count_pairs`` is a testing switch
    that restores the k != l double sum (exactly twice the value).
    """
    z = check_coords(params.z, n_rows=net.n, name="z")
    iu = np.triu_indices(net.n, k=1)
    d = np.hypot(z[iu[0], 0] - z[iu[1], 0], z[iu[0], 1] - z[iu[1], 1])
    eta = params.alpha - params.gamma * d
    y = net.adjacency[iu]
    ll = float(np.sum(y * eta - _softplus(eta)))
    if not np.isfinite(ll):
        raise NumericalError("non-finite network log-likelihood")
    return 2.0 * ll if double_count_pairs else ll


def adapted_lsirm_log_likelihood(resp: ItemResponseData, zhat,
                                 params: AdaptedLsirmParams) -> float:
    """Log-likelihood of the responses given fixed respondent positions.

    ``eta_ki = beta_i + theta_k - delta*||zhat_k - w_i||``; the sum runs
    over all n*p cells.
    """
    zhat = check_coords(zhat, n_rows=resp.n, name="zhat")
    if params.p != resp.p or params.n != resp.n:
        raise DataError("parameter dimensions do not match the response matrix")
    d = cross_distances(zhat, params.w)
    eta = params.beta[None, :] + params.theta[:, None] - params.delta * d
    ll = float(np.sum(resp.responses * eta - _softplus(eta)))
    if not np.isfinite(ll):
        raise NumericalError("non-finite response log-likelihood")
    return ll


def log_priors_lsm(params: LsmParams, hp: Hyperparams) -> float:
    """Joint log-prior of the network model.

    Normal(0, sigma_alpha^2) on the intercept, standard bivariate normal
    on every respondent position, Normal(0, sigma_gamma^2) on the log of
    the distance weight (evaluated in log space; see module docstring).
    """
    if params.gamma <= 0:
        raise DataError("gamma must be positive under the prior")
    lp = _normal_logpdf(params.alpha, hp.sigma_alpha)
    z = params.z
    lp += -z.shape[0] * LOG_2PI - 0.5 * float((z ** 2).sum())
    lp += _normal_logpdf(np.log(params.gamma), hp.sigma_gamma)
    return float(lp)


def _invgamma_logpdf(x, a, b):
    return a * np.log(b) - gammaln(a) - (a + 1.0) * np.log(x) - b / x


def log_priors_adapted(params: AdaptedLsirmParams, hp: Hyperparams) -> float:
    """Joint log-prior of the adapted response model.

    Normal(0, sigma_beta^2) on each item easiness, Normal(0, sigma2) on
    each person trait, Inv-Gamma(a, b) on sigma2, standard bivariate
    normal on every item position, Normal(0, sigma_delta^2) on the
    influence weight.
    """
    if params.sigma2 <= 0:
        raise DataError("sigma2 must be positive under the prior")
    sd_theta = np.sqrt(params.sigma2)
    lp = float(np.sum(_normal_logpdf(params.beta, hp.sigma_beta)))
    lp += float(np.sum(_normal_logpdf(params.theta, sd_theta)))
    lp += float(_invgamma_logpdf(params.sigma2, hp.a_sigma, hp.b_sigma))
    w = params.w
    lp += -w.shape[0] * LOG_2PI - 0.5 * float((w ** 2).sum())
    lp += float(_normal_logpdf(params.delta, hp.sigma_delta))
    return lp


def response_probability(beta_i, theta_k, delta, dist):
    """Probability of a positive response at one cell (or an array of cells)."""
    dist = np.asarray(dist, dtype=float)
    if (dist < 0).any():
        raise DataError("distances must be non-negative")
    out = expit(beta_i + theta_k - delta * dist)
    return float(out) if out.ndim == 0 else out
