"""Compiled inner loops for the two samplers.

Single-site Metropolis sweeps with incremental distance bookkeeping:
updating one latent position touches one row/column of the cached
distance matrix, so each site decision costs O(n) instead of O(n^2).
The Bernoulli-logit terms use the same stable softplus branch as the
reference kernels in :mod:`peerinfluence.model`; a unit test pins the
two paths together.

``lik_scale`` multiplies every log-likelihood difference inside the
acceptance ratios. It is 1.0 in normal operation; 0.0 turns the target
into the prior (used by the sampler-correctness tests).
"""

import numba as nb
import numpy as np


@nb.njit(cache=True)
def _softplus(x):
    # log(1 + exp(x)) without overflow
    if x > 0.0:
        return x + np.log1p(np.exp(-x))
    return np.log1p(np.exp(x))


@nb.njit(cache=True)
def pair_distances(z):
    n = z.shape[0]
    d = np.zeros((n, n))
    for k in range(n):
        for l in range(k + 1, n):
            dx = z[k, 0] - z[l, 0]
            dy = z[k, 1] - z[l, 1]
            v = np.sqrt(dx * dx + dy * dy)
            d[k, l] = v
            d[l, k] = v
    return d


@nb.njit(cache=True)
def cross_dists(z, w):
    n = z.shape[0]
    p = w.shape[0]
    d = np.empty((n, p))
    for k in range(n):
        for i in range(p):
            dx = z[k, 0] - w[i, 0]
            dy = z[k, 1] - w[i, 1]
            d[k, i] = np.sqrt(dx * dx + dy * dy)
    return d


@nb.njit(cache=True)
def lsm_loglik(y, d, alpha, gamma):
    # sum over unordered pairs k < l
    n = y.shape[0]
    total = 0.0
    for k in range(n):
        for l in range(k + 1, n):
            eta = alpha - gamma * d[k, l]
            total += y[k, l] * eta - _softplus(eta)
    return total


@nb.njit(cache=True)
def lsm_z_sweep(y, z, d, alpha, gamma, lik_scale, eps, log_u, d_buf):
    """One pass of per-respondent proposals in index order.

    Mutates ``z`` and ``d`` in place; returns (acceptances, summed
    log-likelihood change of the accepted moves).
    """
    n = z.shape[0]
    accepts = 0
    dll_total = 0.0
    for k in range(n):
        zx = z[k, 0] + eps[k, 0]
        zy = z[k, 1] + eps[k, 1]
        dll = 0.0
        for l in range(n):
            if l == k:
                d_buf[l] = 0.0
                continue
            dx = z[l, 0] - zx
            dy = z[l, 1] - zy
            dn = np.sqrt(dx * dx + dy * dy)
            d_buf[l] = dn
            eta_new = alpha - gamma * dn
            eta_old = alpha - gamma * d[k, l]
            dll += (y[k, l] * (eta_new - eta_old)
                    - _softplus(eta_new) + _softplus(eta_old))
        dlp = -0.5 * (zx * zx + zy * zy - z[k, 0] * z[k, 0] - z[k, 1] * z[k, 1])
        if log_u[k] < lik_scale * dll + dlp:
            z[k, 0] = zx
            z[k, 1] = zy
            for l in range(n):
                d[k, l] = d_buf[l]
                d[l, k] = d_buf[l]
            accepts += 1
            dll_total += dll
    return accepts, dll_total


@nb.njit(cache=True)
def lsirm_loglik(x, d, beta, theta, delta):
    n, p = x.shape
    total = 0.0
    for k in range(n):
        for i in range(p):
            eta = beta[i] + theta[k] - delta * d[k, i]
            total += x[k, i] * eta - _softplus(eta)
    return total


@nb.njit(cache=True)
def lsirm_w_sweep(x, zhat, w, d, beta, theta, delta, lik_scale, eps, log_u, col_buf):
    """Per-item position proposals; mutates ``w`` and the distance column."""
    n = x.shape[0]
    p = w.shape[0]
    accepts = 0
    dll_total = 0.0
    for i in range(p):
        wx = w[i, 0] + eps[i, 0]
        wy = w[i, 1] + eps[i, 1]
        dll = 0.0
        for k in range(n):
            dx = zhat[k, 0] - wx
            dy = zhat[k, 1] - wy
            dn = np.sqrt(dx * dx + dy * dy)
            col_buf[k] = dn
            eta_new = beta[i] + theta[k] - delta * dn
            eta_old = beta[i] + theta[k] - delta * d[k, i]
            dll += (x[k, i] * (eta_new - eta_old)
                    - _softplus(eta_new) + _softplus(eta_old))
        dlp = -0.5 * (wx * wx + wy * wy - w[i, 0] * w[i, 0] - w[i, 1] * w[i, 1])
        if log_u[i] < lik_scale * dll + dlp:
            w[i, 0] = wx
            w[i, 1] = wy
            for k in range(n):
                d[k, i] = col_buf[k]
            accepts += 1
            dll_total += dll
    return accepts, dll_total


@nb.njit(cache=True)
def lsirm_beta_sweep(x, d, beta, theta, delta, lik_scale, eps, log_u, sigma_beta):
    n, p = x.shape
    accepts = 0
    dll_total = 0.0
    inv_two_var = 0.5 / (sigma_beta * sigma_beta)
    for i in range(p):
        b_new = beta[i] + eps[i]
        shift = b_new - beta[i]
        dll = 0.0
        for k in range(n):
            eta_old = beta[i] + theta[k] - delta * d[k, i]
            eta_new = eta_old + shift
            dll += (x[k, i] * shift - _softplus(eta_new) + _softplus(eta_old))
        dlp = -(b_new * b_new - beta[i] * beta[i]) * inv_two_var
        if log_u[i] < lik_scale * dll + dlp:
            beta[i] = b_new
            accepts += 1
            dll_total += dll
    return accepts, dll_total


@nb.njit(cache=True)
def lsirm_theta_sweep(x, d, beta, theta, delta, lik_scale, eps, log_u, sigma2):
    n, p = x.shape
    accepts = 0
    dll_total = 0.0
    inv_two_var = 0.5 / sigma2
    for k in range(n):
        t_new = theta[k] + eps[k]
        shift = t_new - theta[k]
        dll = 0.0
        for i in range(p):
            eta_old = beta[i] + theta[k] - delta * d[k, i]
            eta_new = eta_old + shift
            dll += (x[k, i] * shift - _softplus(eta_new) + _softplus(eta_old))
        dlp = -(t_new * t_new - theta[k] * theta[k]) * inv_two_var
        if log_u[k] < lik_scale * dll + dlp:
            theta[k] = t_new
            accepts += 1
            dll_total += dll
    return accepts, dll_total
