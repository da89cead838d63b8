"""Case files (JSON) and trial results (CSV)."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import MISSING, fields

from .model import CaseInputs, MarketParams, Resource, SystemRequirements

VERSION = "1"
RESULTS_HEADER = (
    "trial", "scale", "gamma_forecast", "gamma_rt", "isone_mu_cap", "isone_mu_per",
    "pjm_mu_cap", "pjm_mu_per", "miso_mu", "miso_mu_per",
)
TOP_LEVEL = ("version", "resources", "requirements", "params", "forecast_demand")


class CaseFileError(ValueError):
    pass


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise CaseFileError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise CaseFileError(f"{where}: non-finite number")
    return float(value)


def _build(cls, data, where):
    if not isinstance(data, dict):
        raise CaseFileError(f"{where}: expected an object")
    known = {f.name: f for f in fields(cls)}
    for key in data:
        if key not in known:
            raise CaseFileError(f"{where}: unknown field {key!r}")
    kwargs = {}
    for name, f in known.items():
        if name not in data:
            if f.default is MISSING:
                raise CaseFileError(f"{where}: missing field {name!r}")
            continue
        value = data[name]
        if f.type in ("bool", bool):
            if not isinstance(value, bool):
                raise CaseFileError(f"{where}.{name}: expected true/false")
        elif f.type in ("str", str):
            if not isinstance(value, str) or not value:
                raise CaseFileError(f"{where}.{name}: expected a non-empty string")
        else:
            value = _number(value, f"{where}.{name}")
        kwargs[name] = value
    return cls(**kwargs)


def case_from_dict(data) -> CaseInputs:
    if not isinstance(data, dict):
        raise CaseFileError("case file must be a JSON object")
    for key in data:
        if key not in TOP_LEVEL:
            raise CaseFileError(f"unknown field {key!r}")
    if data.get("version") != VERSION:
        raise CaseFileError(f"version: expected {VERSION!r}, got {data.get('version')!r}")
    if not isinstance(data.get("resources"), list):
        raise CaseFileError("resources: expected an array")
    resources = tuple(
        _build(Resource, r, f"resources[{k}]") for k, r in enumerate(data["resources"]))
    if "requirements" not in data:
        raise CaseFileError("missing field 'requirements'")
    requirements = _build(SystemRequirements, data["requirements"], "requirements")
    params = _build(MarketParams, data.get("params", {}), "params")
    forecast = data.get("forecast_demand")
    forecast = requirements.demand if forecast is None else _number(forecast, "forecast_demand")
    return CaseInputs(resources, requirements, params, forecast)


def case_to_dict(case: CaseInputs) -> dict:
    def dump(obj):
        return {f.name: getattr(obj, f.name) for f in fields(obj)}

    return {
        "version": VERSION,
        "resources": [dump(r) for r in case.resources],
        "requirements": dump(case.requirements),
        "params": dump(case.params),
        "forecast_demand": case.forecast_demand,
    }


def dumps_case(case: CaseInputs) -> str:
    return json.dumps(case_to_dict(case), indent=2) + "\n"


def loads_case(text: str) -> CaseInputs:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CaseFileError(f"not valid JSON: {exc}") from exc
    return case_from_dict(data)


def read_case(path) -> CaseInputs:
    with open(path, encoding="utf-8") as fh:
        return loads_case(fh.read())


def write_case(case: CaseInputs, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_case(case))


def _fmt(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "nan"
    out = f"{v:.4f}"
    return "0.0000" if out == "-0.0000" else out


def results_csv(rows) -> str:
    """Render ``(index, scale, series)`` rows; failed trials print ``nan``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULTS_HEADER)
    for k, scale, series in rows:
        vals = [None] * (len(RESULTS_HEADER) - 2) if series is None else \
            [series[name] for name in RESULTS_HEADER[2:]]
        w.writerow([k + 1, _fmt(scale), *(_fmt(v) for v in vals)])
    return buf.getvalue()


def write_results(rows, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(results_csv(rows))


def read_results(path):
    """Inverse of :func:`write_results` up to the 4-decimal rounding."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != RESULTS_HEADER:
            raise CaseFileError(f"{path}: unexpected results header {header!r}")
        rows = []
        for rec in reader:
            k, scale, *vals = rec
            nums = [float(v) for v in vals]
            series = None if any(math.isnan(v) for v in nums) else dict(zip(RESULTS_HEADER[2:], nums))
            rows.append((int(k) - 1, float(scale), series))
    return rows
