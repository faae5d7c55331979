import csv
import io
import json

import pytest

from poisson_embedding import experiments
from poisson_embedding.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_IO, EXIT_OK, main, parse_config_text
from poisson_embedding.experiments import (
    EXPERIMENTS,
    ConfigError,
    ExperimentConfig,
    fit_rate_slope,
    resolve,
    run_experiment,
)
from poisson_embedding.report import CSV_COLUMNS, to_csv, to_json

SMALL = {
    "verify-embedding": dict(samples=20_000),
    "verify-asym": dict(samples=20_000),
    "transport-invariants": dict(samples=20_000, reps=200),
    "drift-transport": dict(reps=6),
    "sup-rate": dict(reps=4, mesh=1e-3),
    "grid-rate": dict(reps=300),
    "bounds-audit": dict(n=500),
}


def test_spec_experiments_registered():
    for name in ("verify-embedding", "verify-asym", "transport-invariants", "sup-rate", "grid-rate", "bounds-audit"):
        assert name in EXPERIMENTS
    assert set(SMALL) == set(EXPERIMENTS)


def test_config_parsing():
    text = """
    # comment line
    lambda = 2.5   # trailing comment
    n=12
    seed = 18446744073709551615
    format = csv
    """
    assert parse_config_text(text) == {"lam": 2.5, "n": 12, "seed": 2**64 - 1, "format": "csv"}
    with pytest.raises(ConfigError):
        parse_config_text("lambda 2")
    with pytest.raises(ConfigError):
        parse_config_text("bogus = 1")
    with pytest.raises(ConfigError):
        parse_config_text("n = 1.5")


@pytest.mark.parametrize(
    "kwargs",
    [dict(lam=-1.0), dict(mesh=1.5), dict(reps=0), dict(n=2), dict(seed=2**64), dict(format="xml"), dict(samples=1)],
)
def test_resolve_rejects(kwargs):
    with pytest.raises(ConfigError):
        resolve(ExperimentConfig("verify-embedding", **kwargs))


def test_resolve_unknown():
    with pytest.raises(ConfigError):
        resolve(ExperimentConfig("nope"))


def test_exit_codes(tmp_path, capsys):
    assert main(["nope"]) == EXIT_CONFIG
    assert main(["verify-asym", "--lambda", "-2"]) == EXIT_CONFIG
    assert main(["verify-asym", "--config", str(tmp_path / "missing.cfg")]) == EXIT_IO
    bad = tmp_path / "bad.cfg"
    bad.write_text("lambda: 3\n")
    assert main(["verify-asym", "--config", str(bad)]) == EXIT_CONFIG
    assert main(["verify-asym", "--samples", "5000", "--out", str(tmp_path / "no" / "dir" / "r.json")]) == EXIT_IO
    out = tmp_path / "r.json"
    assert main(["verify-asym", "--samples", "5000", "--out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text())["passed"] is True
    with pytest.raises(SystemExit) as exc:
        main(["verify-asym", "--format", "xml"])
    assert exc.value.code == EXIT_CONFIG
    capsys.readouterr()


def test_metric_failure_exit(tmp_path, monkeypatch):
    def failing(c):
        return [experiments.Metric("always_fails", 1.0, None, 0.0, False)], {}

    monkeypatch.setitem(experiments.RUNNERS, "bounds-audit", failing)
    assert main(["bounds-audit", "--out", str(tmp_path / "r.csv"), "--format", "csv"]) == EXIT_FAIL


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("samples = 4000\nseed = 5\nlambda = 3\n")
    out = tmp_path / "r.json"
    main(["verify-asym", "--config", str(cfg), "--seed", "9", "--out", str(out)])
    echo = json.loads(out.read_text())["config"]
    assert echo["samples"] == 4000 and echo["seed"] == 9 and echo["lam"] == 3.0


def test_report_schemas():
    rep = run_experiment(ExperimentConfig("verify-asym", samples=5000, seed=3))
    d = json.loads(to_json(rep))
    assert list(d) == ["experiment", "version", "config", "passed", "metrics", "series"]
    for m in d["metrics"]:
        assert list(m) == ["name", "estimate", "error_bound", "threshold", "pass"]
    assert "duration_seconds" not in d
    assert "duration_seconds" in json.loads(to_json(rep, include_timing=True))
    rows = list(csv.reader(io.StringIO(to_csv(rep))))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 1 + len(rep.metrics)
    # 17 significant digits round-trip exactly
    for row, m in zip(rows[1:], rep.metrics):
        assert float(row[2]) == m.estimate


def test_report_rerunnable_from_echo():
    rep = run_experiment(ExperimentConfig("verify-asym", samples=3000, seed=77))
    again = run_experiment(ExperimentConfig(**rep.config.echo()))
    assert to_json(rep) == to_json(again)


@pytest.mark.parametrize("name", sorted(SMALL))
def test_worker_count_invariance(name, monkeypatch):
    # small chunks so that every experiment is split over several tasks
    monkeypatch.setattr(experiments, "CHUNK", 4096)
    monkeypatch.setattr(experiments, "GRID_CHUNK_DRAWS", 20_000)
    base = ExperimentConfig(name, seed=1234, **SMALL[name])
    a = to_json(run_experiment(base))
    b = to_json(run_experiment(ExperimentConfig(name, seed=1234, workers=3, **SMALL[name])))
    assert a == b
    assert to_csv(run_experiment(base)) == to_csv(run_experiment(ExperimentConfig(name, seed=1234, workers=2, **SMALL[name])))


def test_different_seeds_differ():
    a = to_json(run_experiment(ExperimentConfig("verify-asym", samples=3000, seed=1)))
    b = to_json(run_experiment(ExperimentConfig("verify-asym", samples=3000, seed=2)))
    assert a != b


# Operations carrying the paper-derived contracts, by defining module.
CORE_OPS = {
    "distributions": ["rates_from_drift", "sample_laplace", "sample_asym", "laplace_cdf", "asym_cdf"],
    "embedding": ["poisson_arrivals", "brownian_skeleton", "direct_walk", "joint_fine_grid", "embedded_values"],
    "transport": ["inflection_epochs", "transport_from_skeleton", "transport_direct", "transport_drifted",
                  "sup_distance", "coupled_transport"],
    "bounds": ["erlang_central_moment", "doob_chain_rhs", "doob_lhs_over_rhs", "delta_compare",
               "max_deviation", "tail_report"],
}


@pytest.mark.parametrize("name", sorted(SMALL))
def test_registry_audit(name, monkeypatch):
    calls = []
    for module, ops in CORE_OPS.items():
        for op in ops:
            if hasattr(experiments, op):
                real = getattr(experiments, op)

                def spy(*a, _real=real, _tag=f"{module}.{op}", **k):
                    calls.append(_tag)
                    return _real(*a, **k)

                monkeypatch.setattr(experiments, op, spy)
    run_experiment(ExperimentConfig(name, seed=1, **SMALL[name]))
    assert calls, f"{name} exercises no core operation"


def test_fit_rate_slope_exact_power():
    ns = [4, 8, 16, 32, 64]
    import math

    med = [3.0 * (n**-0.5 * math.log(n)) ** 1.1 for n in ns]
    assert math.isclose(fit_rate_slope(ns, med), 1.1, rel_tol=1e-12)
