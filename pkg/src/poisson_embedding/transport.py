"""Uniform transport processes: piecewise-linear paths with alternating slopes.

Three constructions are provided:

* :func:`transport_direct` integrates a symmetric two-state jump process with
  flip rate ``lam`` at speed ``sqrt(lam)``;
* :func:`transport_from_skeleton` couples such a path to a Brownian skeleton by
  turning the sign changes of the observed walk into the path's turning points;
* :func:`transport_drifted` integrates the asymmetric two-state process whose
  long-run velocity is ``mu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .distributions import DriftParams, rates_from_drift
from .embedding import ArrivalStream, FineGridPath, SkeletonPath, brownian_skeleton, poisson_arrivals
from .errors import CoverageError, DomainError
from .rng import exponential, open_uniform


@dataclass(frozen=True)
class TransportPath:
    """Continuous piecewise-linear path started at 0.

    ``epochs`` are the turning points (all > 0), ``values`` the path at those
    points and ``slopes[j]`` the signed slope on the segment that starts at
    ``knots[j]``; the last segment runs up to ``horizon``.
    """

    epochs: np.ndarray
    values: np.ndarray
    slopes: np.ndarray
    horizon: float

    @property
    def knots(self) -> np.ndarray:
        return np.concatenate([[0.0], self.epochs])

    @property
    def knot_values(self) -> np.ndarray:
        return np.concatenate([[0.0], self.values])

    @property
    def initial_sign(self) -> int:
        return 1 if self.slopes[0] > 0 else -1

    @property
    def slope_magnitudes(self) -> np.ndarray:
        return np.abs(self.slopes)

    def __call__(self, t):
        return eval_transport(self, t)


def inflection_epochs(skeleton: SkeletonPath) -> np.ndarray:
    """Indices ``l(1) < l(2) < ...`` where the observed walk changes direction.

    Index ``i`` is selected when the increments into and out of ``values[i]``
    have opposite signs.  An increment that is exactly zero raises
    :class:`~.errors.ZeroIncrementError`.
    """
    if skeleton.values.size < 3:
        raise DomainError("need at least three skeleton values")
    return kernels.inflection_indices(skeleton.values)


def theta_points(skeleton: SkeletonPath):
    """Times and values of the skeleton at its inflection epochs."""
    idx = inflection_epochs(skeleton)
    return skeleton.epochs[idx], skeleton.values[idx]


def transport_from_skeleton(skeleton: SkeletonPath, lam: float, horizon: float | None = None) -> TransportPath:
    """Couple a speed-``sqrt(lam)`` transport path to a symmetric skeleton.

    The path turns at ``chi_k`` with ``chi_k - chi_{k-1} = |B(theta_k) -
    B(theta_{k-1})| / sqrt(lam)`` and takes exactly the skeleton's values there.
    The first segment heads towards ``B(theta_1)``.  After the last turning
    point the path keeps the direction the walk took after its last inflection,
    up to ``horizon`` (default: the last turning point).
    """
    p = skeleton.params
    if not p.is_symmetric:
        raise DomainError("transport_from_skeleton needs a driftless unit-volatility skeleton")
    if not math.isclose(skeleton.arrivals.intensity, 2.0 * lam, rel_tol=1e-12):
        raise DomainError(
            f"skeleton intensity {skeleton.arrivals.intensity} does not match 2*lam = {2.0 * lam}"
        )
    idx = inflection_epochs(skeleton)
    speed = math.sqrt(lam)
    values = skeleton.values[idx].copy()
    jumps = np.diff(np.concatenate([[0.0], values]))
    epochs = np.cumsum(np.abs(jumps) / speed)
    first = skeleton.values[1] - skeleton.values[0]
    if idx.size:
        signs = np.where(jumps > 0, 1.0, -1.0)
        tail = -signs[-1]
    else:
        signs = np.empty(0)
        tail = 1.0 if first > 0 else -1.0
    slopes = np.concatenate([signs, [tail]]) * speed
    last = float(epochs[-1]) if epochs.size else 0.0
    if horizon is None:
        horizon = last
    elif horizon < last:
        raise DomainError(f"horizon {horizon} precedes the last turning point {last}")
    return TransportPath(epochs, values, slopes, float(horizon))


def _integrate(switch_times, slopes, horizon) -> TransportPath:
    durations = np.diff(np.concatenate([[0.0], switch_times]))
    values = np.cumsum(slopes[:-1] * durations)
    return TransportPath(switch_times, values, slopes, float(horizon))


def transport_direct(lam: float, horizon: float, rng: np.random.Generator) -> TransportPath:
    """Speed-``sqrt(lam)`` path whose direction flips at rate ``lam``.

    The initial direction is fair; one uniform decides it before any flip time
    is drawn.
    """
    if not lam > 0 or not horizon > 0:
        raise DomainError(f"lam and horizon must be positive, got {lam}, {horizon}")
    sign = 1.0 if open_uniform(rng) < 0.5 else -1.0
    flips = _switch_times(lambda n: exponential(rng, lam, n), horizon, lam * horizon)
    k = flips.size
    slopes = sign * math.sqrt(lam) * np.where(np.arange(k + 1) % 2 == 0, 1.0, -1.0)
    return _integrate(flips, slopes, horizon)


def _switch_times(draw, horizon, expected):
    block = int(expected + 6.0 * math.sqrt(expected) + 16)
    chunks = []
    last = 0.0
    while last <= horizon:
        c = last + np.cumsum(draw(block))
        chunks.append(c)
        last = float(c[-1])
    t = np.concatenate(chunks)
    return t[: np.searchsorted(t, horizon, side="left")]


def transport_drifted(params: DriftParams, horizon: float, rng: np.random.Generator) -> TransportPath:
    """Asymmetric transport path tracking ``mu t + sigma B_t``.

    In state ``+`` the slope is ``2 lam / eta`` and the holding rate
    ``2 lam eta / (omega + eta)``; in state ``-`` the slope is
    ``-2 lam / omega`` and the holding rate ``2 lam omega / (omega + eta)``.
    The initial state is ``+`` with probability ``omega / (omega + eta)``.
    """
    if not horizon > 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    lam, eta, omega = params.lam, params.eta, params.omega
    start_plus = bool(open_uniform(rng) < params.p_positive)
    rate = np.array([2 * lam * eta / (omega + eta), 2 * lam * omega / (omega + eta)])
    slope = np.array([2 * lam / eta, -2 * lam / omega])
    offset = 0 if start_plus else 1
    # holding-time rates alternate with the state, starting from the initial one
    mean_rate = 2.0 / (1.0 / rate[0] + 1.0 / rate[1])
    count = [0]

    def draw(n):
        states = (offset + count[0] + np.arange(n)) % 2
        count[0] += n
        return -np.log(open_uniform(rng, n)) / rate[states]

    switches = _switch_times(draw, horizon, mean_rate * horizon)
    states = (offset + np.arange(switches.size + 1)) % 2
    return _integrate(switches, slope[states], horizon)


def eval_transport(path: TransportPath, t):
    """Value of the path at ``t`` (scalar or array); exact at turning points."""
    t_arr = np.asarray(t, dtype=float)
    if t_arr.size and (t_arr.min() < 0 or t_arr.max() > path.horizon):
        raise CoverageError(f"t outside the covered interval [0, {path.horizon}]")
    out = kernels.eval_piecewise(path.knots, path.knot_values, path.slopes, t_arr)
    out = np.asarray(out)
    return float(out) if t_arr.ndim == 0 else out


def interpolant(times, values) -> TransportPath:
    """Piecewise-linear interpolant through ``(times, values)``, ``times[0] == 0``."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times[0] != 0.0 or values[0] != 0.0:
        raise DomainError("interpolant must start at (0, 0)")
    slopes = np.diff(values) / np.diff(times)
    slopes = np.append(slopes, slopes[-1])
    return TransportPath(times[1:].copy(), values[1:].copy(), slopes, float(times[-1]))


@dataclass(frozen=True)
class SupDistance:
    mesh_max: float
    slack: float
    argmax_time: float


def sup_distance(transport: TransportPath, fine: FineGridPath, window: float = 1.0) -> SupDistance:
    """Max of ``|F(t) - B(t)|`` over fine-mesh points in ``[0, window]``.

    ``slack`` bounds how much the true supremum can exceed ``mesh_max`` between
    mesh points: on each mesh interval ``F`` moves at most ``max|slope| * dt``
    and ``B`` is proxied by its increment across the interval.
    """
    if transport.horizon < window:
        raise CoverageError(f"transport covers [0, {transport.horizon}], need [0, {window}]")
    if fine.horizon < window:
        raise CoverageError(f"fine path covers [0, {fine.horizon}], need [0, {window}]")
    gap, i = kernels.sup_abs_gap(
        transport.knots, transport.knot_values, transport.slopes, fine.times, fine.values, window
    )
    stop = np.searchsorted(fine.times, window, side="right")
    dt = np.diff(fine.times[:stop])
    db = np.abs(np.diff(fine.values[:stop]))
    smax = float(np.max(np.abs(transport.slopes)))
    slack = float(np.max(smax * dt + db)) if dt.size else 0.0
    return SupDistance(gap, slack, float(fine.times[i]))


def coupled_transport(lam: float, horizon: float, rng: np.random.Generator, block: int | None = None):
    """Skeleton-coupled transport path extended until it covers ``[0, horizon]``.

    Arrivals are simulated in blocks; each new block continues the same
    Brownian skeleton.  Returns ``(path, skeleton)``.
    """
    params = rates_from_drift(lam)
    if block is None:
        block = int(2.0 * lam * horizon * 1.5) + 64
    epochs = [np.zeros(1)]
    values = [np.zeros(1)]
    while True:
        arr = poisson_arrivals(params.intensity, block, rng)
        sk = brownian_skeleton(arr, params, rng)
        epochs.append(epochs[-1][-1] + arr.epochs[1:])
        values.append(values[-1][-1] + sk.values[1:])
        ep = np.concatenate(epochs)
        va = np.concatenate(values)
        skeleton = SkeletonPath(ArrivalStream(params.intensity, ep), va, params)
        path = transport_from_skeleton(skeleton, lam)
        if path.epochs.size and path.epochs[-1] >= horizon:
            return TransportPath(path.epochs, path.values, path.slopes, float(path.epochs[-1])), skeleton
