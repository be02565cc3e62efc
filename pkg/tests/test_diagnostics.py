import math

import numpy as np
import pytest
from scipy import stats

from peerinfluence.diagnostics import (
    ParamSummary,
    gelman_rubin,
    hpd_interval,
    summarize_scalar,
)
from peerinfluence.model import DataError


def test_identical_chains_rhat_at_most_one():
    rng = np.random.default_rng(0)
    chain = rng.standard_normal(500)
    r = gelman_rubin([chain, chain.copy()])
    assert r <= 1.0
    # between-variance is exactly zero, so Rhat = sqrt((n-1)/n)
    assert r == pytest.approx(math.sqrt(499 / 500), abs=1e-12)


def test_same_stream_chains_converge():
    rng = np.random.default_rng(1)
    chains = [rng.standard_normal(10_000) for _ in range(2)]
    assert gelman_rubin(chains) < 1.01


def test_separated_chains_flagged():
    rng = np.random.default_rng(2)
    a = rng.standard_normal(1000)
    b = rng.standard_normal(1000) + 10.0
    r = gelman_rubin([a, b])
    assert r > 3.0
    # cross-check against the formula evaluated directly
    n = 1000
    means = np.array([a.mean(), b.mean()])
    w = (a.var(ddof=1) + b.var(ddof=1)) / 2
    expected = math.sqrt(((n - 1) / n * w + means.var(ddof=1)) / w)
    assert r == pytest.approx(expected, rel=1e-12)


def test_rhat_requires_two_equal_chains():
    with pytest.raises(DataError):
        gelman_rubin([np.zeros(10)])
    with pytest.raises(DataError):
        gelman_rubin([np.zeros(10), np.zeros(9)])


def test_split_rhat_catches_drift():
    # a chain drifting upward looks fine unsplit but not split
    trend = np.linspace(0.0, 5.0, 4000)
    rng = np.random.default_rng(3)
    chains = [trend + 0.1 * rng.standard_normal(4000) for _ in range(2)]
    assert gelman_rubin(chains) < 1.01
    assert gelman_rubin(chains, split=True) > 1.5


def test_hpd_enumerable_case():
    # 3 of 5 points needed; all windows have width 2, left-most wins
    assert hpd_interval([5, 3, 1, 2, 4], mass=0.6) == (1.0, 3.0)


def test_hpd_against_normal_quantiles():
    rng = np.random.default_rng(4)
    s = rng.standard_normal(100_000)
    lo, hi = hpd_interval(s, 0.95)
    assert lo == pytest.approx(-1.96, abs=0.05)
    assert hi == pytest.approx(1.96, abs=0.05)


def test_hpd_brute_force_minimality():
    rng = np.random.default_rng(5)
    for count in (21, 100, 537, 1000):
        s = np.sort(rng.gamma(2.0, size=count))
        lo, hi = hpd_interval(s, 0.95)
        m = math.ceil(0.95 * count)
        best = None
        for i in range(count - m + 1):
            width = s[i + m - 1] - s[i]
            if best is None or width < best[0]:
                best = (width, s[i], s[i + m - 1])
        assert (lo, hi) == (best[1], best[2])


def test_hpd_insufficient_samples():
    with pytest.raises(DataError):
        hpd_interval([1.0, 2.0], mass=0.95)
    with pytest.raises(DataError):
        hpd_interval(np.arange(100), mass=1.0)


def test_hpd_asymmetric_distribution():
    # for a skewed posterior the HPD must be narrower than the central CI
    rng = np.random.default_rng(6)
    s = rng.gamma(2.0, size=200_000)
    lo, hi = hpd_interval(s, 0.95)
    central = np.quantile(s, [0.025, 0.975])
    assert (hi - lo) < (central[1] - central[0])
    # compare against the analytic shortest interval for Gamma(2, 1)
    grid_lo = stats.gamma.ppf(np.linspace(1e-6, 0.05, 2000), 2.0)
    widths = stats.gamma.ppf(stats.gamma.cdf(grid_lo, 2.0) + 0.95, 2.0) - grid_lo
    i = np.argmin(widths)
    assert lo == pytest.approx(grid_lo[i], abs=0.05)
    assert hi == pytest.approx(grid_lo[i] + widths[i], abs=0.1)


def test_summarize_scalar_fields():
    rng = np.random.default_rng(7)
    chains = [rng.normal(0.826, 0.07, size=4000) for _ in range(2)]
    summary = summarize_scalar(chains)
    assert isinstance(summary, ParamSummary)
    assert summary.mean == pytest.approx(0.826, abs=0.01)
    assert summary.hpd_low < summary.mean < summary.hpd_high
    assert summary.rhat < 1.05
    single = summarize_scalar(chains[:1])
    assert math.isnan(single.rhat)
