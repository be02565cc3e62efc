"""Linear network autocorrelation baseline fitted by maximum likelihood.

The comparison estimator of peer effects: regress each respondent's
activity count on the counts of their network neighbors,

    (I - rho*W) y = X beta + eps,   eps ~ N(0, sigma2 I),

with W the binary adjacency by default (a row-normalized variant is
available). ``rho`` is profiled by golden-section search inside the
spectral stability interval of W.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DataError, ItemResponseData, NumericalError

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def behavior_counts(resp: ItemResponseData) -> np.ndarray:
    """Per-respondent count of positive responses (row sums)."""
    return resp.responses.sum(axis=1)


@dataclass(frozen=True)
class AutocorrFit:
    rho: float
    sigma2: float
    beta: np.ndarray | None
    rho_ci: tuple
    log_lik: float
    rho_bounds: tuple
    at_boundary: bool


def _profile_loglik(rho, y, wy, eigs, x):
    # log|det(I - rho W)| via the eigenvalues, Gaussian errors profiled out
    n = y.shape[0]
    with np.errstate(divide="ignore"):
        logdet = float(np.sum(np.log(np.abs(1.0 - rho * eigs))))
    r = y - rho * wy
    if x is not None:
        beta, *_ = np.linalg.lstsq(x, r, rcond=None)
        r = r - x @ beta
    sigma2 = float(r @ r) / n
    if sigma2 <= 0.0:
        return math.inf, 0.0, None
    ll = logdet - 0.5 * n * math.log(2.0 * math.pi * sigma2) - 0.5 * n
    if x is not None:
        return ll, sigma2, beta
    return ll, sigma2, None


def lnam_log_likelihood(y, w_mat, rho, x=None) -> float:
    """Profile log-likelihood of the autocorrelation model at one rho."""
    y = np.asarray(y, dtype=float)
    w_mat = np.asarray(w_mat, dtype=float)
    eigs = _eigenvalues(w_mat)
    return _profile_loglik(rho, y, w_mat @ y, eigs, _design(x))[0]


def _design(x):
    if x is None:
        return None
    x = np.asarray(x, dtype=float)
    return x[:, None] if x.ndim == 1 else x


def _eigenvalues(w_mat):
    if np.array_equal(w_mat, w_mat.T):
        return np.linalg.eigvalsh(w_mat)
    eigs = np.linalg.eigvals(w_mat)
    if np.abs(eigs.imag).max() > 1e-10:
        raise NumericalError("weight matrix has complex spectrum; "
                             "stability interval undefined")
    return eigs.real


def _golden_max(fn, lo, hi, tol):
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def fit_lnam(y, w_mat, x=None, row_normalize=False) -> AutocorrFit:
    """Maximum-likelihood fit of the network autocorrelation model.

    ``y`` is the response vector (e.g. activity counts), ``w_mat`` the
    square weight matrix with zero diagonal, ``x`` an optional design
    matrix of covariates. The CI for rho comes from the curvature of the
    profile log-likelihood at the maximum.
    """
    y = np.asarray(y, dtype=float)
    w_mat = np.asarray(w_mat, dtype=float)
    if w_mat.ndim != 2 or w_mat.shape[0] != w_mat.shape[1]:
        raise DataError("weight matrix must be square")
    if np.diag(w_mat).any():
        raise DataError("weight matrix must have a zero diagonal")
    if y.shape != (w_mat.shape[0],):
        raise DataError("response length does not match the weight matrix")
    if not w_mat.any():
        raise DataError("weight matrix is all zero: rho is unidentified")
    if row_normalize:
        rowsums = w_mat.sum(axis=1, keepdims=True)
        rowsums[rowsums == 0.0] = 1.0
        w_mat = w_mat / rowsums

    eigs = _eigenvalues(w_mat)
    lam_min, lam_max = float(eigs.min()), float(eigs.max())
    lo = 1.0 / lam_min if lam_min < 0 else -1e6
    hi = 1.0 / lam_max if lam_max > 0 else 1e6
    span = hi - lo
    lo += 1e-6 * span
    hi -= 1e-6 * span

    x_mat = _design(x)
    wy = w_mat @ y

    def objective(rho):
        return _profile_loglik(rho, y, wy, eigs, x_mat)[0]

    rho_hat = _golden_max(objective, lo, hi, tol=1e-10 * span)
    ll, sigma2, beta = _profile_loglik(rho_hat, y, wy, eigs, x_mat)
    at_boundary = min(rho_hat - lo, hi - rho_hat) < 1e-3 * span

    # observed information of the profile likelihood
    h = 1e-5 * span
    curv = (objective(rho_hat + h) - 2.0 * ll + objective(rho_hat - h)) / h ** 2
    if curv < 0:
        se = math.sqrt(-1.0 / curv)
        ci = (rho_hat - 1.96 * se, rho_hat + 1.96 * se)
    else:
        ci = (math.nan, math.nan)

    return AutocorrFit(rho=rho_hat, sigma2=sigma2, beta=beta, rho_ci=ci,
                       log_lik=ll, rho_bounds=(lo, hi), at_boundary=at_boundary)
