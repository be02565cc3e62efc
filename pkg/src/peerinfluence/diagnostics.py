"""Convergence diagnostics and posterior summaries.

Potential scale reduction factor, highest-posterior-density intervals,
and the per-parameter summary records the reporting layer emits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DataError


def gelman_rubin(chains, split=False) -> float:
    """Potential scale reduction factor for one scalar parameter.

    With m chains of length n and chain means psi_j:
        W    = mean_j var(chain_j)          (within, ddof=1)
        B/n  = var_j(psi_j)                 (between, ddof=1)
        Rhat = sqrt( ((n-1)/n * W + B/n) / W )
    Computed on the chains as given (the original formulation); pass
    ``split=True`` to halve each chain first, which also flags
    within-chain drift.
    """
    chains = [np.asarray(c, dtype=float).ravel() for c in chains]
    if len(chains) < 2:
        raise DataError("need at least two chains")
    length = chains[0].shape[0]
    if any(c.shape[0] != length for c in chains):
        raise DataError("chains must have equal lengths")
    if split:
        half = length // 2
        chains = [part for c in chains for part in (c[:half], c[half:2 * half])]
        length = half
    if length < 2:
        raise DataError("chains must have length >= 2")
    means = np.array([c.mean() for c in chains])
    within = float(np.mean([c.var(ddof=1) for c in chains]))
    between_over_n = float(means.var(ddof=1))
    if within == 0.0:
        return 1.0 if between_over_n == 0.0 else math.inf
    var_plus = (length - 1) / length * within + between_over_n
    return math.sqrt(var_plus / within)


def hpd_interval(samples, mass=0.95):
    """Shortest contiguous interval covering ``mass`` of the samples.

    Scans order statistics for the narrowest window containing
    ceil(mass*N) points; ties break to the left-most window.
    """
    if not 0.0 < mass < 1.0:
        raise DataError("mass must be in (0, 1)")
    s = np.sort(np.asarray(samples, dtype=float).ravel())
    count = s.shape[0]
    if count < math.ceil(1.0 / (1.0 - mass)):
        raise DataError(f"need at least {math.ceil(1.0 / (1.0 - mass))} samples "
                        f"for mass={mass}, got {count}")
    m = math.ceil(mass * count)
    widths = s[m - 1:] - s[:count - m + 1]
    i = int(np.argmin(widths))  # first minimum: left-most tie-break
    return float(s[i]), float(s[i + m - 1])


@dataclass(frozen=True)
class ParamSummary:
    """Posterior summary for one scalar parameter."""

    mean: float
    sd: float
    hpd_low: float
    hpd_high: float
    rhat: float  # NaN when only one chain is available


def summarize_scalar(chains, mass=0.95) -> ParamSummary:
    """Pooled mean/SD/HPD across chains, plus Rhat when there are >= 2."""
    chains = [np.asarray(c, dtype=float).ravel() for c in chains]
    pooled = np.concatenate(chains)
    lo, hi = hpd_interval(pooled, mass)
    rhat = gelman_rubin(chains) if len(chains) >= 2 else math.nan
    return ParamSummary(mean=float(pooled.mean()), sd=float(pooled.std(ddof=1)),
                        hpd_low=lo, hpd_high=hi, rhat=rhat)
