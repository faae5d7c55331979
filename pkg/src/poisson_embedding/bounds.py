"""Tail bounds for the maximal deviation of Poisson arrival times from their means.

For arrivals ``tau_1, tau_2, ...`` of a rate-``2n^2`` Poisson process, the
event ``max_{i <= 2n^2} |tau_i - i/(2n^2)| > beta* delta*_n`` with
``beta* = exp(2q + 2)`` and ``delta*_n = floor(log n) / n`` is controlled through
Doob's maximal inequality by the ``2 floor(log n)``-th central moment of
``tau_{2n^2} ~ Erlang(2n^2, 2n^2)``.  This module evaluates that chain exactly
(the moment in integer arithmetic, everything else in log space) and compares
``delta*_n`` with the older rate ``n^{-1} (log n)^{4 + 3/(4 log n)}``.

Logarithms are natural throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import DomainError
from .rng import exponential
from .stats import tail_estimate

MAX_MOMENT_ORDER = 200


@dataclass(frozen=True)
class RateParams:
    n: float
    q: float
    beta_star: float
    delta_star: float
    m: int

    @classmethod
    def create(cls, n, q: float) -> "RateParams":
        """Derive ``beta*``, ``delta*_n`` and ``m = floor(log n)``; needs ``log n >= 1``."""
        if not q > 0:
            raise DomainError(f"q must be positive, got {q}")
        log_n = math.log(n)
        if log_n < 1.0:
            raise DomainError(f"need n >= e so that floor(log n) >= 1, got n={n}")
        m = int(math.floor(log_n))
        return cls(n, float(q), math.exp(2 * q + 2), m / n, m)


@lru_cache(maxsize=None)
def _gamma_central_moment_int(k: int, m: int) -> int:
    """``E[(G - k)^m]`` for ``G ~ Gamma(k, 1)`` as an exact integer.

    Cumulants of ``G - k`` are ``0, k*1!, k*2!, k*3!, ...`` so the moment
    recursion ``M_j = sum_i C(j-1, i-1) kappa_i M_{j-i}`` has only
    nonnegative integer terms.
    """
    kappa = [0, 0] + [k * math.factorial(r - 1) for r in range(2, m + 1)]
    moments = [1] + [0] * m
    for j in range(1, m + 1):
        acc = 0
        for i in range(2, j + 1):
            term = math.comb(j - 1, i - 1) * kappa[i] * moments[j - i]
            if term < 0:
                raise ArithmeticError("negative term in cumulant recursion")
            acc += term
        moments[j] = acc
    return moments[m]


def _check_moment_args(k, m):
    if k < 1:
        raise DomainError(f"shape k must be at least 1, got {k}")
    if m < 2 or m % 2 or m > MAX_MOMENT_ORDER:
        raise DomainError(f"order m must be even with 2 <= m <= {MAX_MOMENT_ORDER}, got {m}")


def erlang_central_moment(k: int, m: int) -> float:
    """``E[(T - 1)^m]`` for ``T ~ Erlang(k, rate k)``, correctly rounded.

    >>> erlang_central_moment(200, 2)
    0.005
    """
    _check_moment_args(k, m)
    num = _gamma_central_moment_int(int(k), int(m))
    return num / int(k) ** m


def log_erlang_central_moment(k: int, m: int) -> float:
    """Natural log of :func:`erlang_central_moment`; never underflows."""
    _check_moment_args(k, m)
    return math.log(_gamma_central_moment_int(int(k), int(m))) - m * math.log(k)


def doob_chain_rhs(params: RateParams, c1: float = 1.0) -> float:
    """``c1 * n^2 * beta*^{-2(log n - 1)}``, cross-checked against ``c1 e^{4q+4} n^{-4q-2}``.

    Both forms are evaluated in log space and must agree to 1e-12 relative.
    """
    n, q = params.n, params.q
    log_n = math.log(n)
    direct = math.log(c1) + 2 * log_n - 2 * (log_n - 1) * math.log(params.beta_star)
    simplified = math.log(c1) + (4 * q + 4) - (4 * q + 2) * log_n
    a, b = math.exp(direct), math.exp(simplified)
    if not math.isclose(a, b, rel_tol=1e-12):
        raise ArithmeticError(f"doob_chain_rhs forms disagree: {a!r} vs {b!r}")
    return a


def doob_chain_rhs_forms(params: RateParams, c1: float = 1.0):
    """Both forms of :func:`doob_chain_rhs`, evaluated in plain floating point."""
    n, q = params.n, params.q
    direct = c1 * n**2 * params.beta_star ** (-2 * (math.log(n) - 1))
    simplified = c1 * math.exp(4 * q + 4) * n ** (-4 * q - 2)
    return direct, simplified


def log_intermediate_moment_bound(n) -> float:
    """``log(n^2 (floor(log n)/n)^{2 floor(log n)})`` without the constant."""
    m = int(math.floor(math.log(n)))
    return 2 * math.log(n) + 2 * m * (math.log(m) - math.log(n))


def log_exact_numerator(n: int) -> float:
    m = int(math.floor(math.log(n)))
    return log_erlang_central_moment(2 * n * n, 2 * m)


def calibrate_c1(ns) -> float:
    """Smallest constant making the exact moment <= ``c1 n^2 (m/n)^{2m}`` on ``ns``."""
    return math.exp(max(log_exact_numerator(int(n)) - log_intermediate_moment_bound(n) for n in ns))


@dataclass(frozen=True)
class DoobReport:
    n: int
    q: float
    m: int
    log_numerator: float
    log_denominator: float
    log_quotient: float
    log_intermediate: float
    log_rhs: float
    holds: bool

    @property
    def quotient(self) -> float:
        return math.exp(self.log_quotient)


def doob_lhs_over_rhs(n: int, q: float, c1: float) -> DoobReport:
    """Exact Doob quotient versus the intermediate moment bound at ``n``.

    The numerator is ``E[(tau_{2n^2} - 1)^{2m}]`` computed exactly, the
    denominator ``(beta* delta*_n)^{2m}``; ``holds`` says whether the exact
    numerator is within ``c1 n^2 (m/n)^{2m}``.
    """
    if n < 3:
        raise DomainError(f"n must be at least 3, got {n}")
    p = RateParams.create(n, q)
    if 2 * p.m > MAX_MOMENT_ORDER:
        raise DomainError(f"2 floor(log n) = {2 * p.m} exceeds {MAX_MOMENT_ORDER}")
    log_num = log_exact_numerator(n)
    log_den = 2 * p.m * math.log(p.beta_star * p.delta_star)
    log_inter = math.log(c1) + log_intermediate_moment_bound(n)
    log_rhs = math.log(c1) + 2 * math.log(n) - 2 * (math.log(n) - 1) * math.log(p.beta_star)
    return DoobReport(
        n=n,
        q=q,
        m=p.m,
        log_numerator=log_num,
        log_denominator=log_den,
        log_quotient=log_num - log_den,
        log_intermediate=log_inter - log_den,
        log_rhs=log_rhs,
        # slack absorbs exp/log round-off at the calibrating n
        holds=log_num <= log_inter + 1e-12,
    )


def delta_compare(n) -> tuple[float, float]:
    """``(delta*_n, delta_n)``: the new rate ``floor(log n)/n`` and the older one."""
    if n < 3:
        raise DomainError(f"n must be at least 3, got {n}")
    log_n = math.log(n)
    star = math.floor(log_n) / n
    old = log_n ** (4 + 3 / (4 * log_n)) / n
    return star, old


def log_sweep(lo: int, hi: int, points: int) -> list[int]:
    """Up to ``points`` distinct integers spaced logarithmically on ``[lo, hi]``."""
    return sorted({int(round(x)) for x in np.geomspace(lo, hi, points)})


def max_deviation(n: int, replications: int, rng, chunk: int | None = None) -> np.ndarray:
    """``max_{i <= 2n^2} |tau_i - i/(2n^2)|`` for independent Poisson(2n^2) streams."""
    k = 2 * n * n
    if chunk is None:
        chunk = max(1, min(replications, 2_000_000 // k))
    out = np.empty(replications)
    for start in range(0, replications, chunk):
        r = min(chunk, replications - start)
        out[start : start + r] = kernels.max_abs_centered(exponential(rng, k, (r, k)))
    return out


@dataclass(frozen=True)
class TailReport:
    n: int
    q: float
    threshold: float
    replications: int
    exceedances: int
    estimate: float
    upper_bound: float
    quantile_99: float
    target: float

    @property
    def passed(self) -> bool:
        return self.upper_bound < self.target


def tail_report(n: int, q: float, deviations: np.ndarray) -> TailReport:
    p = RateParams.create(n, q)
    threshold = p.beta_star * p.delta_star
    k = int(np.count_nonzero(deviations > threshold))
    est, ub = tail_estimate(k, deviations.size)
    return TailReport(
        n=n,
        q=q,
        threshold=threshold,
        replications=int(deviations.size),
        exceedances=k,
        estimate=est,
        upper_bound=ub,
        quantile_99=float(np.quantile(deviations, 0.99)),
        target=n ** (-q),
    )


def rate_experiment(n: int, q: float, replications: int, rng) -> TailReport:
    """Monte Carlo check of the maximal-deviation tail against ``n^{-q}``."""
    if n < 3:
        raise DomainError(f"n must be at least 3, got {n}")
    return tail_report(n, q, max_deviation(n, replications, rng))
