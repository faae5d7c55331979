"""Pure-numpy implementations of the hot loops.

Every function here has a twin in ``_ckernels.pyx`` that evaluates the same
floating-point expression in the same order, so both backends return
bit-identical results.
"""

import numpy as np

from .errors import ZeroIncrementError


def inflection_indices(values):
    """Indices ``i`` with ``(v[i]-v[i-1]) * (v[i+1]-v[i]) < 0``, ascending."""
    v = np.ascontiguousarray(values, dtype=np.float64)
    d = np.diff(v)
    zero = np.flatnonzero(d == 0.0)
    if zero.size:
        raise ZeroIncrementError(f"walk increment {zero[0] + 1} is exactly zero")
    pos = d > 0
    return (np.flatnonzero(pos[:-1] != pos[1:]) + 1).astype(np.intp)


def eval_piecewise(knots, knot_values, slopes, t):
    """Evaluate a piecewise-linear path at the points ``t``.

    ``knots`` starts at 0 and is strictly increasing; segment ``j`` starts at
    ``knots[j]`` with value ``knot_values[j]`` and slope ``slopes[j]``.  The
    last segment extends to the right without bound; callers check coverage.
    """
    knots = np.asarray(knots, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    j = np.searchsorted(knots, t, side="right") - 1
    return knot_values[j] + slopes[j] * (t - knots[j])


def sup_abs_gap(knots, knot_values, slopes, mesh_t, mesh_v, t_max):
    """Max of ``|F(t) - B(t)|`` over mesh points ``t <= t_max``.

    Returns ``(gap, index)`` of the first maximizing mesh point.
    """
    mesh_t = np.asarray(mesh_t, dtype=np.float64)
    stop = np.searchsorted(mesh_t, t_max, side="right")
    f = eval_piecewise(knots, knot_values, slopes, mesh_t[:stop])
    gaps = np.abs(f - mesh_v[:stop])
    i = int(np.argmax(gaps))
    return float(gaps[i]), i


def max_abs_centered(spacings):
    """Per row of ``spacings`` (shape ``(r, k)``): ``max_i |tau_i - i/k|``.

    ``tau_i`` is the running sum of the row.
    """
    s = np.ascontiguousarray(spacings, dtype=np.float64)
    k = s.shape[1]
    tau = np.cumsum(s, axis=1)
    grid = np.arange(1, k + 1, dtype=np.float64) / k
    return np.abs(tau - grid).max(axis=1)


def ks_two_sample_sorted(a, b):
    """Sup distance between the ECDFs of two sorted samples."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    pooled = np.concatenate([a, b])
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))
