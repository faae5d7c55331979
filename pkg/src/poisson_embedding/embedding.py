"""Poisson observation times, Brownian skeletons, and the walks they embed.

Observing ``mu t + sigma B_t`` at the arrivals of an independent Poisson
process of intensity ``2 lam`` produces a random walk whose increments follow
the (a)symmetric double exponential law of :mod:`.distributions`.  This module
simulates that walk exactly, together with a direct i.i.d. construction to
compare it against, and a fine-mesh version of the Brownian path needed for
sup-norm comparisons with transport processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import DriftParams, sample_asym, sample_laplace
from .errors import DomainError
from .rng import exponential, standard_normal

FUSE_TOL = 1e-15


@dataclass(frozen=True)
class ArrivalStream:
    intensity: float
    epochs: np.ndarray  # epochs[0] == 0

    @property
    def spacings(self) -> np.ndarray:
        return np.diff(self.epochs)

    @property
    def count(self) -> int:
        return self.epochs.size - 1


@dataclass(frozen=True)
class SkeletonPath:
    arrivals: ArrivalStream
    values: np.ndarray
    params: DriftParams

    @property
    def epochs(self) -> np.ndarray:
        return self.arrivals.epochs

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)


@dataclass(frozen=True)
class FineGridPath:
    """Brownian path on a uniform mesh merged with Poisson arrival epochs.

    ``arrival_indices[0] == 0`` stands for the epoch 0; the remaining entries
    locate each arrival in ``times``.
    """

    times: np.ndarray
    values: np.ndarray
    arrival_indices: np.ndarray
    params: DriftParams
    mesh_width: float

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def skeleton(self) -> SkeletonPath:
        """Restrict the path to the arrival epochs (values are copied, not resummed)."""
        arrivals = ArrivalStream(self.params.intensity, self.times[self.arrival_indices])
        return SkeletonPath(arrivals, self.values[self.arrival_indices], self.params)


def _exp_spacings(intensity, count, rng, size=None):
    shape = (count,) if size is None else (size, count)
    return exponential(rng, intensity, shape)


def poisson_arrivals(intensity: float, count: int, rng: np.random.Generator) -> ArrivalStream:
    """First ``count`` arrivals of a Poisson process, with the epoch 0 prepended."""
    if not intensity > 0:
        raise DomainError(f"intensity must be positive, got {intensity}")
    if count < 1:
        raise DomainError(f"count must be at least 1, got {count}")
    epochs = np.empty(count + 1)
    epochs[0] = 0.0
    np.cumsum(_exp_spacings(intensity, count, rng), out=epochs[1:])
    return ArrivalStream(float(intensity), epochs)


def poisson_arrivals_until(intensity: float, horizon: float, rng: np.random.Generator) -> ArrivalStream:
    """All arrivals in ``(0, horizon]``, with the epoch 0 prepended.

    Spacings are drawn in blocks until the running sum passes ``horizon``; the
    block size is a function of ``intensity * horizon`` only, so the stream is
    reproducible for a given generator state.
    """
    if not intensity > 0:
        raise DomainError(f"intensity must be positive, got {intensity}")
    if not horizon > 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    mean = intensity * horizon
    block = int(mean + 6.0 * math.sqrt(mean) + 16)
    chunks = []
    last = 0.0
    while last <= horizon:
        c = last + np.cumsum(_exp_spacings(intensity, block, rng))
        chunks.append(c)
        last = float(c[-1])
    epochs = np.concatenate([[0.0], *chunks])
    epochs = epochs[: np.searchsorted(epochs, horizon, side="right")]
    return ArrivalStream(float(intensity), epochs)


def _gaussian_increments(dt, params, rng, size=None):
    z = standard_normal(rng, dt.shape if size is None else size)
    return params.mu * dt + params.sigma * np.sqrt(dt) * z


def brownian_skeleton(arrivals: ArrivalStream, params: DriftParams, rng: np.random.Generator) -> SkeletonPath:
    """Exact values of ``mu t + sigma B_t`` at the arrival epochs."""
    inc = _gaussian_increments(arrivals.spacings, params, rng)
    values = np.empty(arrivals.epochs.size)
    values[0] = 0.0
    np.cumsum(inc, out=values[1:])
    return SkeletonPath(arrivals, values, params)


def embedded_values(params: DriftParams, step: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` independent copies of the skeleton value at arrival ``step``."""
    if step < 1:
        raise DomainError(f"step must be at least 1, got {step}")
    dt = _exp_spacings(params.intensity, step, rng, size)
    return _gaussian_increments(dt, params, rng).sum(axis=1)


def direct_walk(step_sampler: str, params: DriftParams, n: int, rng: np.random.Generator, size=None) -> np.ndarray:
    """Partial sums ``S_0 = 0, ..., S_n`` of i.i.d. double exponential steps.

    ``step_sampler`` is ``"laplace"`` (symmetric law of ``params.lam``) or
    ``"asym"`` (law of ``params``).  With ``size`` the result has shape
    ``(size, n + 1)``, one walk per row.
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    shape = (n,) if size is None else (size, n)
    if step_sampler == "laplace":
        steps = sample_laplace(params.lam, rng, shape)
    elif step_sampler == "asym":
        steps = sample_asym(params, rng, shape)
    else:
        raise DomainError(f"unknown step sampler {step_sampler!r}")
    out = np.zeros(shape[:-1] + (n + 1,))
    np.cumsum(steps, axis=-1, out=out[..., 1:])
    return out


def joint_fine_grid(params: DriftParams, mesh_width: float, horizon: float, rng: np.random.Generator) -> FineGridPath:
    """Simulate Poisson arrivals and a Brownian path on the merged grid.

    The uniform mesh ``0, h, 2h, ...`` (plus ``horizon`` itself) is merged with
    the arrivals of intensity ``2 lam`` on ``(0, horizon]``.  An arrival within
    ``FUSE_TOL`` of a mesh node is fused into that node.
    """
    if not 0 < mesh_width < horizon:
        raise DomainError(f"need 0 < mesh_width < horizon, got {mesh_width}, {horizon}")
    arrivals = poisson_arrivals_until(params.intensity, horizon, rng)
    m = int(math.floor(horizon / mesh_width))
    mesh = np.arange(m + 1) * mesh_width
    if mesh[-1] < horizon:
        mesh = np.append(mesh, horizon)

    arr = arrivals.epochs[1:]
    # nearest mesh node for each arrival
    k = np.clip(np.searchsorted(mesh, arr), 1, mesh.size - 1)
    left_closer = (arr - mesh[k - 1]) <= (mesh[k] - arr)
    nearest = np.where(left_closer, k - 1, k)
    fused = (np.abs(mesh[nearest] - arr) <= FUSE_TOL) & (nearest > 0)
    extra = arr[~fused]

    times = np.concatenate([mesh, extra])
    order = np.argsort(times, kind="stable")
    times = times[order]
    # position of every original node in the merged array
    where = np.empty_like(order)
    where[order] = np.arange(order.size)
    arrival_pos = np.empty(arr.size, dtype=np.intp)
    arrival_pos[fused] = where[nearest[fused]]
    arrival_pos[~fused] = where[mesh.size + np.arange(extra.size)]
    arrival_indices = np.concatenate([[0], arrival_pos]).astype(np.intp)

    inc = _gaussian_increments(np.diff(times), params, rng)
    values = np.empty(times.size)
    values[0] = 0.0
    np.cumsum(inc, out=values[1:])
    return FineGridPath(times, values, arrival_indices, params, float(mesh_width))
