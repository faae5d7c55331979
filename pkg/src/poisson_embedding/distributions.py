"""Samplers and CDFs for the symmetric and asymmetric double exponential laws.

The symmetric law is parameterized by ``lam`` throughout, with density
``sqrt(lam) * exp(-2 sqrt(lam) |x|)``: an exponential of rate ``2 sqrt(lam)``
carrying a fair random sign.  Callers never pass the rate directly.

The asymmetric law is the two-sided exponential whose positive part has rate
``eta`` and negative part rate ``omega``, mixed with weights
``omega / (omega + eta)`` and ``eta / (omega + eta)``.  These are the rates of
Brownian motion with drift ``mu`` and volatility ``sigma`` sampled at an
independent exponential time of rate ``2 lam``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .rng import exponential, open_uniform


@dataclass(frozen=True)
class DriftParams:
    lam: float
    mu: float
    sigma: float
    eta: float
    omega: float

    @property
    def p_positive(self) -> float:
        """Probability that an increment is nonnegative."""
        return self.omega / (self.omega + self.eta)

    @property
    def intensity(self) -> float:
        """Poisson observation intensity ``2 lam``."""
        return 2.0 * self.lam

    @property
    def is_symmetric(self) -> bool:
        return self.mu == 0.0 and self.sigma == 1.0


def rates_from_drift(lam: float, mu: float = 0.0, sigma: float = 1.0) -> DriftParams:
    """Compute the exponential rates ``(eta, omega)`` of the drifted walk.

    ``eta = r - mu/sigma^2`` and ``omega = r + mu/sigma^2`` with
    ``r = sqrt(mu^2/sigma^4 + 4 lam/sigma^2)``.  The smaller of the two is
    obtained from ``eta * omega = 4 lam / sigma^2`` to avoid cancellation.

    >>> p = rates_from_drift(2.0, 1.0, 1.0)
    >>> (p.eta, p.omega)
    (2.0, 4.0)
    """
    if not (lam > 0 and math.isfinite(lam)):
        raise DomainError(f"lam must be positive and finite, got {lam}")
    if not (sigma > 0 and math.isfinite(sigma)):
        raise DomainError(f"sigma must be positive and finite, got {sigma}")
    if not math.isfinite(mu):
        raise DomainError(f"mu must be finite, got {mu}")
    s2 = sigma * sigma
    drift = mu / s2
    product = 4.0 * lam / s2
    root = math.sqrt(drift * drift + product)
    if drift == 0:
        eta = omega = root
    elif drift > 0:
        omega = root + drift
        eta = product / omega
    else:
        eta = root - drift
        omega = product / eta
    return DriftParams(float(lam), float(mu), float(sigma), eta, omega)


def _check_lam(lam):
    if not lam > 0:
        raise DomainError(f"lam must be positive, got {lam}")


def sample_laplace(lam: float, rng: np.random.Generator, size=None):
    """Draw from the centered double exponential law of parameter ``2 sqrt(lam)``.

    The magnitude and the sign each consume their own uniform, so every sample
    costs exactly two uniforms.  With ``size`` given, all magnitudes are drawn
    first, then all signs.
    """
    _check_lam(lam)
    magnitude = exponential(rng, 2.0 * math.sqrt(lam), size)
    negative = open_uniform(rng, size) < 0.5
    out = np.where(negative, -magnitude, magnitude)
    return float(out) if size is None else out


def sample_asym(params: DriftParams, rng: np.random.Generator, size=None):
    """Draw from the asymmetric double exponential law of ``params``.

    With probability ``omega/(omega+eta)`` the draw is an ``Exp(eta)`` value,
    otherwise the negative of an ``Exp(omega)`` value.
    """
    e = -np.log(open_uniform(rng, size))
    negative = open_uniform(rng, size) >= params.p_positive
    out = np.where(negative, -e / params.omega, e / params.eta)
    return float(out) if size is None else out


def laplace_pdf(lam: float, x):
    _check_lam(lam)
    r = math.sqrt(lam)
    return r * np.exp(-2.0 * r * np.abs(x))


def laplace_cdf(lam: float, x):
    """CDF of the centered double exponential law, vectorized over ``x``."""
    _check_lam(lam)
    rate = 2.0 * math.sqrt(lam)
    x = np.asarray(x, dtype=float)
    # exp argument clipped to <= 0 on each branch so nothing overflows
    neg = 0.5 * np.exp(rate * np.minimum(x, 0.0))
    pos = 1.0 - 0.5 * np.exp(-rate * np.maximum(x, 0.0))
    out = np.where(x < 0, neg, pos)
    return float(out) if out.ndim == 0 else out


def asym_pdf(params: DriftParams, x):
    x = np.asarray(x, dtype=float)
    c = params.eta * params.omega / (params.eta + params.omega)
    out = np.where(
        x >= 0,
        c * np.exp(-params.eta * np.maximum(x, 0.0)),
        c * np.exp(params.omega * np.minimum(x, 0.0)),
    )
    return float(out) if out.ndim == 0 else out


def asym_cdf(params: DriftParams, x):
    """CDF of the asymmetric double exponential law, vectorized over ``x``."""
    x = np.asarray(x, dtype=float)
    p_pos = params.p_positive
    neg = (1.0 - p_pos) * np.exp(params.omega * np.minimum(x, 0.0))
    pos = 1.0 - p_pos * np.exp(-params.eta * np.maximum(x, 0.0))
    out = np.where(x < 0, neg, pos)
    return float(out) if out.ndim == 0 else out


def exponential_cdf(rate: float, x):
    x = np.asarray(x, dtype=float)
    out = -np.expm1(-rate * np.maximum(x, 0.0))
    return float(out) if out.ndim == 0 else out
