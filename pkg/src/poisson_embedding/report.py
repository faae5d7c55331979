"""Serialization of experiment reports.

JSON: a single object with keys ``experiment``, ``version``, ``config``,
``passed``, ``metrics`` (list of ``{name, estimate, error_bound, threshold,
pass}``) and ``series`` (plot-ready columns), plus ``duration_seconds`` when
timing is requested.  Floats are written with ``repr`` and round-trip exactly.

CSV: header ``experiment,metric,estimate,error_bound,threshold,pass`` and one
row per metric; numbers use 17 significant digits, a missing error bound is an
empty cell and an interval threshold is written ``lo;hi``.
"""

import csv
import io
import json

CSV_COLUMNS = ("experiment", "metric", "estimate", "error_bound", "threshold", "pass")


def _num(x):
    if x is None:
        return ""
    if isinstance(x, (list, tuple)):
        return ";".join(_num(v) for v in x)
    return format(float(x), ".17g")


def _jsonable(x):
    if isinstance(x, float) and x == float("inf"):
        return "inf"
    if isinstance(x, list):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    return x


def to_json(report, include_timing: bool = False) -> str:
    return json.dumps(_jsonable(report.as_dict(include_timing)), indent=2, sort_keys=False) + "\n"


def to_csv(report, include_timing: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for m in report.metrics:
        w.writerow([report.config.experiment, m.name, _num(m.estimate), _num(m.error_bound),
                    _num(m.threshold), "true" if m.passed else "false"])
    if include_timing:
        w.writerow([report.config.experiment, "duration_seconds", _num(report.duration_seconds), "", "", "true"])
    return buf.getvalue()


def render(report, fmt: str, include_timing: bool = False) -> str:
    return to_csv(report, include_timing) if fmt == "csv" else to_json(report, include_timing)
