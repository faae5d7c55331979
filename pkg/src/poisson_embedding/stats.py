"""Goodness-of-fit and moment estimators used by the verification experiments.

Critical values are fixed at the asymptotic Kolmogorov quantile for
``alpha ~= 0.001``: ``1.95 / sqrt(N)`` for one sample, ``1.95 * sqrt(2 / N)``
for two samples of size ``N`` each.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as _sps

from . import kernels
from .errors import DomainError

KS_COEFF = 1.95
TAIL_LEVEL = 0.999


def ks_one_sample_threshold(n: int) -> float:
    return KS_COEFF / math.sqrt(n)


def ks_two_sample_threshold(n: int, m: int | None = None) -> float:
    m = n if m is None else m
    return KS_COEFF * math.sqrt((n + m) / (n * m))


def ks_one_sample(samples, cdf) -> float:
    """Kolmogorov-Smirnov distance between the ECDF of ``samples`` and ``cdf``.

    ``cdf`` is called once on the sorted sample array.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise DomainError("ks_one_sample needs at least one sample")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1) / n)
    return float(max(d_plus, d_minus, 0.0))


def ks_two_sample(a, b) -> float:
    """Sup distance between the ECDFs of ``a`` and ``b``; ties handled exactly."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise DomainError("ks_two_sample needs two nonempty samples")
    return kernels.ks_two_sample_sorted(a, b)


@dataclass(frozen=True)
class MomentSummary:
    count: int
    mean: float
    raw2: float
    raw4: float
    central2: float
    central4: float
    se_mean: float
    se_raw2: float
    se_raw4: float
    se_central2: float
    se_central4: float

    @property
    def variance(self) -> float:
        """Unbiased sample variance."""
        return self.central2 * self.count / (self.count - 1)


def _se(values, n):
    return float(np.std(values, ddof=1) / math.sqrt(n))


def moment_summary(samples) -> MomentSummary:
    """Mean, raw and central 2nd/4th moments, each with a standard error.

    Higher moments are plug-in estimates; each standard error is the sample
    standard deviation of the corresponding power divided by ``sqrt(N)``.
    """
    x = np.asarray(samples, dtype=float).ravel()
    n = x.size
    if n < 2:
        raise DomainError("moment_summary needs at least two samples")
    mean = float(np.mean(x))
    x2 = x * x
    x4 = x2 * x2
    c = x - mean
    c2 = c * c
    c4 = c2 * c2
    return MomentSummary(
        count=n,
        mean=mean,
        raw2=float(np.mean(x2)),
        raw4=float(np.mean(x4)),
        central2=float(np.mean(c2)),
        central4=float(np.mean(c4)),
        se_mean=_se(x, n),
        se_raw2=_se(x2, n),
        se_raw4=_se(x4, n),
        se_central2=_se(c2, n),
        se_central4=_se(c4, n),
    )


def merge_means(summaries) -> float:
    """Count-weighted mean of chunk means, reduced in the given order."""
    total = 0
    acc = 0.0
    for s in summaries:
        acc += s.mean * s.count
        total += s.count
    return acc / total


def clopper_pearson_upper(k: int, trials: int, level: float = TAIL_LEVEL) -> float:
    """One-sided exact binomial upper confidence bound for ``k / trials``."""
    if k >= trials:
        return 1.0
    return float(_sps.beta.ppf(level, k + 1, trials - k))


def tail_estimate(exceed_count: int, trials: int, level: float = TAIL_LEVEL):
    """Point estimate and one-sided upper bound (level ``level``) of a tail probability."""
    if trials < 1:
        raise DomainError(f"trials must be positive, got {trials}")
    if not 0 <= exceed_count <= trials:
        raise DomainError(f"need 0 <= exceed_count <= trials, got {exceed_count}, {trials}")
    return exceed_count / trials, clopper_pearson_upper(exceed_count, trials, level)


def chi_square_geometric(gaps, p: float = 0.5, alpha: float = 0.001, min_expected: float = 5.0):
    """Chi-square test of integer ``gaps`` against Geometric(p) on {1, 2, ...}.

    Cells with expected count below ``min_expected`` are pooled into the tail.
    Returns ``(statistic, critical_value, dof)``.
    """
    g = np.asarray(gaps, dtype=np.int64)
    n = g.size
    if n == 0:
        raise DomainError("no gaps to test")
    if g.min() < 1:
        raise DomainError("geometric gaps start at 1")
    # last separate cell K: expected count n * p * (1-p)^(K-1) >= min_expected
    kmax = 1
    while n * p * (1 - p) ** kmax >= min_expected:
        kmax += 1
    probs = p * (1 - p) ** np.arange(kmax)
    probs = np.append(probs, (1 - p) ** kmax)
    counts = np.bincount(np.minimum(g, kmax + 1), minlength=kmax + 2)[1:]
    expected = n * probs
    stat = float(np.sum((counts - expected) ** 2 / expected))
    dof = probs.size - 1
    return stat, float(_sps.chi2.ppf(1 - alpha, dof)), dof
