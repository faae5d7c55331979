"""Named, reproducible verification experiments.

Each experiment breaks its work into a fixed list of tasks that depends only on
the configuration.  Task ``j`` of experiment ``e`` draws from the stream
``derive_rng(seed, code(e), j)``, so results do not depend on how many workers
execute the tasks or in which order they finish; results are always reduced in
task order.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import __version__
from .bounds import (
    calibrate_c1,
    delta_compare,
    doob_chain_rhs,
    doob_chain_rhs_forms,
    doob_lhs_over_rhs,
    erlang_central_moment,
    log_sweep,
    max_deviation,
    tail_report,
    RateParams,
)
from .distributions import (
    asym_cdf,
    exponential_cdf,
    laplace_cdf,
    rates_from_drift,
    sample_asym,
    sample_laplace,
)
from .embedding import brownian_skeleton, direct_walk, embedded_values, joint_fine_grid, poisson_arrivals
from .rng import derive_rng
from .stats import (
    chi_square_geometric,
    ks_one_sample,
    ks_one_sample_threshold,
    ks_two_sample,
    ks_two_sample_threshold,
    moment_summary,
)
from .transport import (
    coupled_transport,
    eval_transport,
    inflection_epochs,
    sup_distance,
    transport_direct,
    transport_drifted,
    transport_from_skeleton,
)

CHUNK = 1 << 17
GRID_CHUNK_DRAWS = 2_000_000
DRIFT_HORIZON = 1000.0


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    lam: float | None = None
    mu: float | None = None
    sigma: float | None = None
    n: int | None = None
    q: float | None = None
    reps: int | None = None
    samples: int | None = None
    mesh: float | None = None
    seed: int = 0
    workers: int = 1
    out: str | None = None
    format: str = "json"

    # execution-only settings, left out of the report so that it is identical
    # for every worker count and destination
    EXECUTION_FIELDS = ("workers", "out", "format")

    def echo(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name not in self.EXECUTION_FIELDS}


@dataclass
class Metric:
    name: str
    estimate: float
    error_bound: float | None
    threshold: float | list
    passed: bool

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "estimate": self.estimate,
            "error_bound": self.error_bound,
            "threshold": self.threshold,
            "pass": self.passed,
        }


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    metrics: list[Metric]
    duration_seconds: float = 0.0
    version: str = __version__
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(m.passed for m in self.metrics)

    def as_dict(self, include_timing: bool = False) -> dict:
        d = {
            "experiment": self.config.experiment,
            "version": self.version,
            "config": self.config.echo(),
            "passed": self.passed,
            "metrics": [m.as_dict() for m in self.metrics],
            "series": self.extra,
        }
        if include_timing:
            d["duration_seconds"] = self.duration_seconds
        return d


# ---------------------------------------------------------------- registry

DEFAULTS = {
    "verify-embedding": dict(lam=1.0, samples=1_000_000),
    "verify-asym": dict(lam=2.0, mu=1.0, sigma=1.0, samples=1_000_000),
    "transport-invariants": dict(lam=1.0, samples=1_000_000, reps=10_000),
    "drift-transport": dict(lam=2.0, mu=1.0, sigma=1.0, reps=100),
    "sup-rate": dict(n=4, reps=200, mesh=1e-4),
    "grid-rate": dict(n=10, q=0.5, reps=10_000),
    "bounds-audit": dict(q=1.0, n=10_000),
}
CODES = {name: i + 1 for i, name in enumerate(DEFAULTS)}
EXPERIMENTS = tuple(DEFAULTS)


def resolve(config: ExperimentConfig) -> ExperimentConfig:
    """Fill experiment-specific defaults and validate numeric ranges."""
    if config.experiment not in DEFAULTS:
        raise ConfigError(f"unknown experiment {config.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
    updates = {k: v for k, v in DEFAULTS[config.experiment].items() if getattr(config, k) is None}
    c = replace(config, **updates)
    for name in ("lam", "sigma", "q", "mesh"):
        v = getattr(c, name)
        if v is not None and not (v > 0 and math.isfinite(v)):
            raise ConfigError(f"{name} must be positive and finite, got {v}")
    if c.mu is not None and not math.isfinite(c.mu):
        raise ConfigError(f"mu must be finite, got {c.mu}")
    for name in ("reps", "samples", "workers"):
        v = getattr(c, name)
        if v is not None and v < 1:
            raise ConfigError(f"{name} must be a positive integer, got {v}")
    if c.samples is not None and c.samples < 2:
        raise ConfigError(f"samples must be at least 2, got {c.samples}")
    if c.mesh is not None and not c.mesh < 1:
        raise ConfigError(f"mesh must be below 1, got {c.mesh}")
    if c.n is not None and c.n < 3:
        raise ConfigError(f"n must be at least 3, got {c.n}")
    if not 0 <= c.seed < 2**64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {c.seed}")
    if c.format not in ("json", "csv"):
        raise ConfigError(f"format must be json or csv, got {c.format!r}")
    return c


# ---------------------------------------------------------------- task plumbing


def _chunks(total, size=None):
    size = CHUNK if size is None else size
    return [min(size, total - s) for s in range(0, total, size)]


def _execute(fn, argsets, seed, code, workers):
    """Run ``fn(rng, *args)`` for each task, in order, with per-task streams."""
    jobs = [(fn, seed, code, j, args) for j, args in enumerate(argsets)]
    if workers <= 1 or len(jobs) <= 1:
        return [_call(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_call, jobs))


def _call(job):
    fn, seed, code, j, args = job
    return fn(derive_rng(seed, code, j), *args)


# --- task bodies (module level so worker processes can import them)


def _task_first_steps(rng, lam, count):
    params = rates_from_drift(lam)
    sk = brownian_skeleton(poisson_arrivals(params.intensity, count, rng), params, rng)
    return sk.arrivals.spacings, sk.increments


def _task_laplace(rng, lam, count):
    return sample_laplace(lam, rng, count)


def _task_step_pairs(rng, lam, mu, sigma, step, count, sampler):
    params = rates_from_drift(lam, mu, sigma)
    embedded = embedded_values(params, step, count, rng)
    direct = direct_walk(sampler, params, step, rng, size=count)[:, -1]
    return embedded, direct


def _task_drift_first_steps(rng, lam, mu, sigma, count):
    params = rates_from_drift(lam, mu, sigma)
    w = embedded_values(params, 1, count, rng)
    s = sample_asym(params, rng, count)
    return w, s


def _task_inflections(rng, lam, count):
    params = rates_from_drift(lam)
    arrivals = 2 * count + int(8 * math.sqrt(count)) + 64
    sk = brownian_skeleton(poisson_arrivals(params.intensity, arrivals, rng), params, rng)
    idx = inflection_epochs(sk)
    path = transport_from_skeleton(sk, lam)
    theta = sk.epochs[idx]
    b_theta = sk.values[idx]
    mismatches = int(np.count_nonzero(path.values != b_theta))
    alternation = int(np.count_nonzero(np.sign(path.slopes[1:]) == np.sign(path.slopes[:-1])))
    k = min(count, idx.size)
    return (
        np.diff(np.concatenate([[0.0], theta]))[:k],
        np.abs(np.diff(np.concatenate([[0.0], b_theta])))[:k],
        np.diff(path.knots)[:k],
        np.diff(np.concatenate([[0], idx]))[:k],
        mismatches,
        alternation,
        k,
    )


def _task_terminal_pair(rng, lam, count):
    direct = np.empty(count)
    coupled = np.empty(count)
    for i in range(count):
        direct[i] = eval_transport(transport_direct(lam, 1.0, rng), 1.0)
        coupled[i] = eval_transport(coupled_transport(lam, 1.0, rng)[0], 1.0)
    return direct, coupled


def _task_drift_velocity(rng, lam, mu, sigma, horizon):
    path = transport_drifted(rates_from_drift(lam, mu, sigma), horizon, rng)
    return eval_transport(path, horizon) / horizon, path.slope_magnitudes


def sup_rate_window_horizon(n: int) -> float:
    """Simulation horizon for the sup-rate coupling at level ``n``.

    The coupled path's time runs ahead of or behind Brownian time by
    ``O(1/n)``; simulating ``8/n`` past the window keeps its last turning
    point beyond 1 with overwhelming probability.
    """
    return 1.0 + 8.0 / n


def _task_sup_distance(rng, n, mesh):
    lam = float(n * n)
    params = rates_from_drift(lam)
    fine = joint_fine_grid(params, mesh, sup_rate_window_horizon(n), rng)
    path = transport_from_skeleton(fine.skeleton(), lam)
    if path.horizon < 1.0:
        path = transport_from_skeleton(fine.skeleton(), lam, horizon=1.0)
    d = sup_distance(path, fine, 1.0)
    return d.mesh_max, d.slack


def _task_max_deviation(rng, n, reps):
    return max_deviation(n, reps, rng)


# ---------------------------------------------------------------- experiments


def _within(name, estimate, target, se, k=4.0):
    return Metric(name, float(estimate), float(se), float(k * se), bool(abs(estimate - target) <= k * se))


def _ks_metric(name, d, threshold):
    return Metric(name, float(d), None, float(threshold), bool(d < threshold))


def _verify_embedding(c):
    lam, N = c.lam, c.samples
    code = CODES[c.experiment]
    parts = _execute(_task_first_steps, [(lam, k) for k in _chunks(N)], c.seed, code * 10 + 1, c.workers)
    spacings = np.concatenate([p[0] for p in parts])
    first = np.concatenate([p[1] for p in parts])
    x = np.concatenate(_execute(_task_laplace, [(lam, k) for k in _chunks(N)], c.seed, code * 10 + 2, c.workers))
    metrics = [_ks_metric("ks_first_step_vs_laplace", ks_one_sample(first, lambda v: laplace_cdf(lam, v)),
                          ks_one_sample_threshold(N))]
    sb = moment_summary(first)
    metrics.append(_within("var_first_step", sb.raw2, 1 / (2 * lam), sb.se_raw2))
    st, sx = moment_summary(spacings), moment_summary(x)
    se = math.hypot(st.se_mean, sx.se_raw2)
    metrics.append(_within("mean_spacing_minus_second_moment", st.mean - sx.raw2, 0.0, se))
    se2 = math.hypot(st.se_raw2, 4 * sx.se_raw4)
    margin = 4 * sx.raw4 - st.raw2
    metrics.append(Metric("fourth_moment_margin", float(margin), float(se2), float(10 * se2), bool(margin >= 10 * se2)))
    n2 = max(N // 10, 2)
    for step in (5, 50):
        pairs = _execute(_task_step_pairs, [(lam, 0.0, 1.0, step, k, "laplace") for k in _chunks(n2, max(1, CHUNK // step))],
                         c.seed, code * 10 + 2 + step, c.workers)
        a = np.concatenate([p[0] for p in pairs])
        b = np.concatenate([p[1] for p in pairs])
        metrics.append(_ks_metric(f"ks_two_sample_step_{step}", ks_two_sample(a, b), ks_two_sample_threshold(n2)))
    return metrics, {}


def _verify_asym(c):
    params = rates_from_drift(c.lam, c.mu, c.sigma)
    N = c.samples
    code = CODES[c.experiment]
    parts = _execute(_task_drift_first_steps, [(c.lam, c.mu, c.sigma, k) for k in _chunks(N)],
                     c.seed, code * 10 + 1, c.workers)
    w = np.concatenate([p[0] for p in parts])
    s = np.concatenate([p[1] for p in parts])
    product = 4 * c.lam / c.sigma**2
    rel = abs(params.eta * params.omega - product) / product
    # textbook formulas, compared with the cancellation-free ones used internally
    root = math.sqrt(c.mu**2 / c.sigma**4 + 4 * c.lam / c.sigma**2)
    eta_ref, omega_ref = root - c.mu / c.sigma**2, root + c.mu / c.sigma**2
    eta_err = abs(params.eta - eta_ref) / eta_ref
    omega_err = abs(params.omega - omega_ref) / omega_ref
    metrics = [
        Metric("eta", params.eta, eta_err, eta_ref, bool(eta_err <= 1e-9)),
        Metric("omega", params.omega, omega_err, omega_ref, bool(omega_err <= 1e-9)),
        Metric("rate_product_identity", rel, None, 1e-12, bool(rel <= 1e-12)),
        _ks_metric("ks_first_step_vs_asym", ks_one_sample(w, lambda v: asym_cdf(params, v)), ks_one_sample_threshold(N)),
    ]
    target = c.mu / (2 * c.lam)
    sw, ss = moment_summary(w), moment_summary(s)
    metrics.append(_within("mean_direct_step", ss.mean, target, ss.se_mean))
    metrics.append(_within("mean_embedded_step", sw.mean, target, sw.se_mean))
    return metrics, {}


def _transport_invariants(c):
    lam, N = c.lam, c.samples
    code = CODES[c.experiment]
    parts = _execute(_task_inflections, [(lam, k) for k in _chunks(N)], c.seed, code * 10 + 1, c.workers)
    theta = np.concatenate([p[0] for p in parts])
    jumps = np.concatenate([p[1] for p in parts])
    chi = np.concatenate([p[2] for p in parts])
    gaps = np.concatenate([p[3] for p in parts])
    mismatches = sum(p[4] for p in parts)
    alternation = sum(p[5] for p in parts)
    thr = ks_one_sample_threshold(theta.size)
    metrics = [
        _ks_metric("ks_theta_spacing_vs_exp_lam", ks_one_sample(theta, lambda v: exponential_cdf(lam, v)), thr),
        _ks_metric("ks_theta_jump_vs_exp_sqrt_lam",
                   ks_one_sample(jumps, lambda v: exponential_cdf(math.sqrt(lam), v)), thr),
        _ks_metric("ks_chi_spacing_vs_exp_lam", ks_one_sample(chi, lambda v: exponential_cdf(lam, v)), thr),
    ]
    stat, crit, _ = chi_square_geometric(gaps)
    metrics.append(Metric("chi2_inflection_gaps_geometric", stat, None, crit, bool(stat < crit)))
    metrics.append(Metric("coupling_value_mismatches", float(mismatches), None, 0.0, mismatches == 0))
    metrics.append(Metric("slope_alternation_violations", float(alternation), None, 0.0, alternation == 0))
    m = c.reps
    pairs = _execute(_task_terminal_pair, [(lam, k) for k in _chunks(m, 1000)], c.seed, code * 10 + 2, c.workers)
    a = np.concatenate([p[0] for p in pairs])
    b = np.concatenate([p[1] for p in pairs])
    metrics.append(_ks_metric("ks_direct_vs_coupled_at_1", ks_two_sample(a, b), ks_two_sample_threshold(m)))
    return metrics, {}


def _drift_transport(c):
    params = rates_from_drift(c.lam, c.mu, c.sigma)
    code = CODES[c.experiment]
    res = _execute(_task_drift_velocity, [(c.lam, c.mu, c.sigma, DRIFT_HORIZON)] * c.reps,
                   c.seed, code * 10 + 1, c.workers)
    v = np.array([r[0] for r in res])
    se = float(np.std(v, ddof=1) / math.sqrt(v.size))
    metrics = [_within("long_run_velocity", float(v.mean()), c.mu, se)]
    if c.mu == 0 and c.sigma == 1:
        dev = max(float(np.max(np.abs(r[1] - math.sqrt(c.lam)))) for r in res) / math.sqrt(c.lam)
        metrics.append(Metric("symmetric_slope_rel_error", dev, None, 1e-12, bool(dev <= 1e-12)))
    return metrics, {"p_plus": params.p_positive}


def sup_rate_levels(n0: int) -> list[int]:
    return [n0 * 2**j for j in range(5)]


def fit_rate_slope(ns, medians) -> float:
    """Least-squares slope of ``log median`` on ``log(n^{-1/2} log n)``."""
    x = np.log([n**-0.5 * math.log(n) for n in ns])
    return float(np.polyfit(x, np.log(medians), 1)[0])


def _sup_rate(c):
    code = CODES[c.experiment]
    ns = sup_rate_levels(c.n)
    argsets = [(n, c.mesh) for n in ns for _ in range(c.reps)]
    res = _execute(_task_sup_distance, argsets, c.seed, code * 10 + 1, c.workers)
    gaps = np.array([r[0] for r in res]).reshape(len(ns), c.reps)
    slack = np.array([r[1] for r in res]).reshape(len(ns), c.reps)
    medians = np.median(gaps, axis=1)
    metrics = []
    for i, n in enumerate(ns):
        ok = True if i == 0 else bool(medians[i] < medians[i - 1])
        prev = float(medians[i - 1]) if i else float(medians[i])
        metrics.append(Metric(f"median_sup_distance_n{n}", float(medians[i]), float(np.median(slack[i])), prev, ok))
    slope = fit_rate_slope(ns, medians)
    metrics.append(Metric("loglog_slope_vs_rate", slope, None, [0.8, 1.2], bool(0.8 <= slope <= 1.2)))
    series = {
        "n": ns,
        "median_sup_distance": [float(m) for m in medians],
        "rate_shape": [n**-0.5 * math.log(n) for n in ns],
        # descriptive only: slope against n^{-1/2} sqrt(log n)
        "slope_vs_sqrt_log_shape": float(
            np.polyfit(np.log([n**-0.5 * math.sqrt(math.log(n)) for n in ns]), np.log(medians), 1)[0]
        ),
    }
    return metrics, series


def _grid_rate(c):
    code = CODES[c.experiment]
    ns = [c.n * 2**j for j in range(4)]
    metrics, quantiles = [], []
    for i, n in enumerate(ns):
        chunk = max(1, min(c.reps, GRID_CHUNK_DRAWS // (2 * n * n)))
        parts = _execute(_task_max_deviation, [(n, k) for k in _chunks(c.reps, chunk)],
                         c.seed, code * 100 + i, c.workers)
        rep = tail_report(n, c.q, np.concatenate(parts))
        quantiles.append(rep.quantile_99)
        metrics.append(Metric(f"exceedance_upper_bound_n{n}", rep.upper_bound, rep.estimate, rep.target, rep.passed))
    for i in range(1, len(ns)):
        ratio = quantiles[i] / quantiles[i - 1]
        metrics.append(Metric(f"q99_ratio_n{ns[i]}_over_n{ns[i - 1]}", ratio, None, 1.0, bool(ratio < 1.0)))
    return metrics, {"n": ns, "quantile_99": quantiles}


def _bounds_audit(c):
    metrics = []
    ks = [1, 10, 200, 20_000]
    err = max(abs(erlang_central_moment(k, 2) * k - 1.0) for k in ks)
    metrics.append(Metric("erlang_variance_rel_error", err, None, 1e-12, bool(err <= 1e-12)))
    ns = log_sweep(3, c.n, 30)
    c1 = calibrate_c1(ns)
    metrics.append(Metric("calibrated_c1", c1, None, math.inf, bool(math.isfinite(c1) and c1 > 0)))
    reports = [doob_lhs_over_rhs(n, c.q, c1) for n in ns]
    bad = sum(not r.holds for r in reports)
    metrics.append(Metric("moment_bound_violations", float(bad), None, 0.0, bad == 0))
    rising = sum(reports[i].log_quotient > reports[i - 1].log_quotient + 1e-12 for i in range(1, len(reports)))
    metrics.append(Metric("doob_quotient_increases", float(rising), None, 0.0, rising == 0))
    worst = 0.0
    for n in np.geomspace(3, c.n, 5):
        for q in (0.25, 0.5, 1.0, 2.0):
            p = RateParams.create(float(n), q)
            direct, simplified = doob_chain_rhs_forms(p)
            doob_chain_rhs(p)
            worst = max(worst, abs(direct - simplified) / abs(simplified))
    metrics.append(Metric("boundaux_form_rel_diff", worst, None, 1e-12, bool(worst <= 1e-12)))
    sweep = sorted(set(ns) | set(log_sweep(3, 10**6, 200)))
    ratios = [delta_compare(n) for n in sweep]
    bad_delta = sum(s >= o for s, o in ratios)
    metrics.append(Metric("delta_star_not_below_delta", float(bad_delta), None, 0.0, bad_delta == 0))
    series = {
        "n": ns,
        "log_doob_quotient": [r.log_quotient for r in reports],
        "delta_star": [delta_compare(n)[0] for n in ns],
        "delta_old": [delta_compare(n)[1] for n in ns],
    }
    return metrics, series


RUNNERS = {
    "verify-embedding": _verify_embedding,
    "verify-asym": _verify_asym,
    "transport-invariants": _transport_invariants,
    "drift-transport": _drift_transport,
    "sup-rate": _sup_rate,
    "grid-rate": _grid_rate,
    "bounds-audit": _bounds_audit,
}


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    c = resolve(config)
    start = time.perf_counter()
    metrics, series = RUNNERS[c.experiment](c)
    return ExperimentReport(c, metrics, time.perf_counter() - start, extra=series)
