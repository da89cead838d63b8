"""Domain types shared by the three regulation market formulations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import NamedTuple


class RegClearError(Exception):
    pass


class InvalidCaseError(RegClearError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class MarketInfeasibleError(RegClearError):
    """A clearing LP has no feasible dispatch."""


class InfeasibleDemandError(MarketInfeasibleError):
    pass


@dataclass(frozen=True)
class Resource:
    id: str
    p_min: float
    p_max: float
    ramp: float  # MW/min
    offer_energy: float
    offer_reg_capacity: float
    offer_reg_performance: float
    offer_syn: float = 0.0
    offer_non: float = 0.0
    offer_sup: float = 0.0
    reg_offer_max: float = 0.0
    agc_qualified: bool = True

    def ramp_limit(self, minutes):
        """MW the resource can move within ``minutes``."""
        return self.ramp * minutes


@dataclass(frozen=True)
class SystemRequirements:
    demand: float
    reg_capacity_req: float = 0.0
    reg_mileage_req_hourly: float = 0.0
    syn_req: float = 0.0
    r10_req: float = 0.0
    r30_req: float = 0.0


@dataclass(frozen=True)
class MarketParams:
    mileage_ratio: float = 3.2
    dispatch_interval_min: float = 5.0
    agc_period_sec: float = 4.0
    loc_floor_at_zero: bool = True

    @property
    def intervals_per_hour(self):
        return 60.0 / self.dispatch_interval_min

    @property
    def beta(self):
        """Maximum mileage per MW of regulation capacity in one interval.

        Twice the number of AGC signals sent within a dispatch interval.
        """
        return 2.0 * (self.dispatch_interval_min * 60.0 / self.agc_period_sec)


@dataclass(frozen=True)
class CaseInputs:
    resources: tuple[Resource, ...]
    requirements: SystemRequirements
    params: MarketParams = field(default_factory=MarketParams)
    forecast_demand: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "resources", tuple(self.resources))
        if self.forecast_demand is None:
            object.__setattr__(self, "forecast_demand", self.requirements.demand)

    @property
    def demand(self):
        return self.requirements.demand

    @property
    def ids(self):
        return [r.id for r in self.resources]

    @property
    def mileage_req_interval(self):
        return self.requirements.reg_mileage_req_hourly / self.params.intervals_per_hour

    def with_forecast(self, forecast_demand):
        return replace(self, forecast_demand=float(forecast_demand))

    def with_requirements(self, **changes):
        return replace(self, requirements=replace(self.requirements, **changes))

    def without(self, resource_id):
        kept = tuple(r for r in self.resources if r.id != resource_id)
        if len(kept) == len(self.resources):
            raise KeyError(resource_id)
        return replace(self, resources=kept)


def _zeros(ids):
    return {i: 0.0 for i in ids}


@dataclass(frozen=True)
class ClearingResult:
    """Dispatch of every product and the resulting prices for one RTO.

    ``reg_mileage`` holds the optimised mileage for ISO-NE and the implied
    mileage ``alpha * R_cap / intervals_per_hour`` for PJM and MISO.
    MISO publishes no capacity price; its ``price_capacity`` carries the
    total regulation price.
    """

    market: str
    energy: dict[str, float]
    reg_capacity: dict[str, float]
    reg_mileage: dict[str, float]
    syn: dict[str, float]
    non: dict[str, float]
    sup: dict[str, float]
    lmp: float
    lmp_forecast: float | None
    price_total: float
    price_capacity: float
    price_performance: float
    duals: dict[str, float] = field(default_factory=dict)
    vickrey_payments: dict[str, float] = field(default_factory=dict)
    avoided_costs: dict[str, float] = field(default_factory=dict)
    loc_estimated: dict[str, float] = field(default_factory=dict)
    loc_realtime: dict[str, float] = field(default_factory=dict)
    reg_split: dict[str, tuple[float, float]] = field(default_factory=dict)
    objective: float = 0.0


class SeriesStats(NamedTuple):
    min: float
    mean: float
    max: float
    variance: float


TrialStats = dict[str, SeriesStats]


class Violation(NamedTuple):
    resource: str | None
    field: str
    message: str

    def __str__(self):
        where = f"resource {self.resource}: " if self.resource is not None else ""
        return f"{where}{self.field}: {self.message}"


def _finite(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def validate_case(case: CaseInputs) -> list[Violation]:
    """Return one entry per broken invariant; an empty list means valid."""
    out = []
    seen = set()
    for r in case.resources:
        if r.id in seen:
            out.append(Violation(r.id, "id", "duplicate resource id"))
        seen.add(r.id)
        for f in fields(Resource):
            v = getattr(r, f.name)
            if f.name in ("id", "agc_qualified"):
                continue
            if not _finite(v):
                out.append(Violation(r.id, f.name, f"non-finite value {v!r}"))
        if not all(_finite(getattr(r, n)) for n in ("p_min", "p_max", "ramp")):
            continue
        if r.p_min > r.p_max:
            out.append(Violation(r.id, "p_min", f"p_min {r.p_min} exceeds p_max {r.p_max}"))
        if r.ramp <= 0:
            out.append(Violation(r.id, "ramp", f"ramp must be positive, got {r.ramp}"))
        for name in ("offer_energy", "offer_reg_capacity", "offer_reg_performance",
                     "offer_syn", "offer_non", "offer_sup", "reg_offer_max"):
            v = getattr(r, name)
            if _finite(v) and v < 0:
                out.append(Violation(r.id, name, f"must be >= 0, got {v}"))

    req = case.requirements
    for f in fields(SystemRequirements):
        v = getattr(req, f.name)
        if not _finite(v) or v < 0:
            out.append(Violation(None, f"requirements.{f.name}", f"must be finite and >= 0, got {v!r}"))

    p = case.params
    for name in ("mileage_ratio", "dispatch_interval_min", "agc_period_sec"):
        v = getattr(p, name)
        if not _finite(v) or v <= 0:
            out.append(Violation(None, f"params.{name}", f"must be finite and > 0, got {v!r}"))
    if _finite(p.dispatch_interval_min) and p.dispatch_interval_min > 0:
        if not _divides(p.dispatch_interval_min, 60.0):
            out.append(Violation(None, "params.dispatch_interval_min", "must divide 60"))
        if _finite(p.agc_period_sec) and p.agc_period_sec > 0:
            if not _divides(p.agc_period_sec, p.dispatch_interval_min * 60.0):
                out.append(Violation(None, "params.agc_period_sec",
                                     "must divide the dispatch interval in seconds"))

    if not _finite(case.forecast_demand) or case.forecast_demand <= 0:
        out.append(Violation(None, "forecast_demand", f"must be > 0, got {case.forecast_demand!r}"))
    cap = sum(r.p_max for r in case.resources if _finite(r.p_max))
    if _finite(req.demand) and cap < req.demand:
        out.append(Violation(None, "requirements.demand",
                             f"total p_max {cap:g} below demand {req.demand:g}"))
    return out


def _divides(d, n):
    q = n / d
    return abs(q - round(q)) < 1e-9
