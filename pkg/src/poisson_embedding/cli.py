"""Command-line front end: ``poisson-embedding <experiment> [options]``.

Exit status: 0 all metrics pass, 1 a metric failed, 2 configuration error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, resolve, run_experiment
from .report import render

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("poisson_embedding")

_TYPES = {
    "lam": float, "mu": float, "sigma": float, "n": int, "q": float, "reps": int,
    "samples": int, "mesh": float, "seed": int, "workers": int, "out": str, "format": str,
}
_ALIASES = {"lambda": "lam"}


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key == "experiment":
            out[key] = value
            continue
        if key not in _TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            out[key] = _TYPES[key](value)
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="poisson-embedding", description=__doc__.splitlines()[0])
    p.add_argument("experiment", help="one of: " + ", ".join(EXPERIMENTS))
    p.add_argument("--config", metavar="PATH", help="key=value file; flags override it")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--q", type=float)
    p.add_argument("--reps", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--mesh", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--timing", action="store_true", help="include wall-clock duration in the report")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def main(argv=None) -> int:
    parser = build_parser()
    parser.__class__ = _Parser
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")

    values = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return EXIT_IO
        try:
            values.update(parse_config_text(text))
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    values.pop("experiment", None)
    for key in _TYPES:
        v = getattr(args, key)
        if v is not None:
            values[key] = v

    try:
        config = resolve(ExperimentConfig(args.experiment, **values))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    report = run_experiment(config)
    log.info("%s finished in %.2f s", config.experiment, report.duration_seconds)
    text = render(report, config.format, args.timing)
    if config.out:
        try:
            with open(config.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write report: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    for m in report.metrics:
        log.info("%-40s %s", m.name, "PASS" if m.passed else "FAIL")
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
