"""Forecast-error experiments across the three markets.

Each trial scales the forecast demand used for the estimated opportunity
costs while real-time demand, offers and requirements stay fixed.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .energy import clear_energy_only
from .isone import clear_isone
from .miso import clear_miso
from .model import (
    CaseInputs,
    ClearingResult,
    MarketInfeasibleError,
    MarketParams,
    RegClearError,
    Resource,
    SeriesStats,
    SystemRequirements,
)
from .pjm import clear_pjm

log = logging.getLogger(__name__)

SERIES = (
    "gamma_forecast",
    "gamma_rt",
    "isone_mu_cap",
    "isone_mu_per",
    "pjm_mu_cap",
    "pjm_mu_per",
    "miso_mu",
    "miso_mu_per",
)

# fraction of trials allowed to be infeasible before the run is abandoned
MAX_INFEASIBLE_FRACTION = 0.01

# generated fleets keep demand low enough that a 1.25x forecast still clears
SYNTHETIC_DEMAND_FRACTION = 0.75


class TrialFailure(MarketInfeasibleError):
    def __init__(self, scale, seed, cause):
        self.scale, self.seed, self.cause = scale, seed, cause
        super().__init__(f"trial at forecast scale {scale:.6f} (seed {seed}) infeasible: {cause}")


class TooManyInfeasibleTrials(RegClearError):
    def __init__(self, failures, n_trials):
        self.failures = failures
        self.n_trials = n_trials
        scales = ", ".join(f"{f.scale:.4f}" for f in failures[:10])
        more = "" if len(failures) <= 10 else f" (+{len(failures) - 10} more)"
        super().__init__(f"{len(failures)} of {n_trials} trials infeasible at scales {scales}{more}")


FIVE_UNIT_OFFERS = [
    # id, ramp, energy, reg capacity, reg performance
    ("A", 5.0, 10.0, 2.5, 1.0),
    ("B", 6.0, 20.0, 15.0, 1.5),
    ("C", 1.0, 15.0, 6.5, 0.5),
    ("D", 10.0, 18.0, 12.0, 2.0),
    ("E", 5.0, 12.0, 7.0, 2.0),
]


def five_unit_fleet():
    return [
        Resource(id=i, p_min=0.0, p_max=100.0, ramp=rho, offer_energy=cp,
                 offer_reg_capacity=ccap, offer_reg_performance=cper, reg_offer_max=50.0)
        for i, rho, cp, ccap, cper in FIVE_UNIT_OFFERS
    ]


def five_unit_case(forecast_demand=420.0):
    """Five generators, 420 MW demand, 25 MW regulation, 80 MW/h mileage."""
    return CaseInputs(
        resources=tuple(five_unit_fleet()),
        requirements=SystemRequirements(demand=420.0, reg_capacity_req=25.0,
                                        reg_mileage_req_hourly=80.0),
        params=MarketParams(mileage_ratio=3.2, dispatch_interval_min=5.0, agc_period_sec=4.0),
        forecast_demand=float(forecast_demand),
    )


def gen_synthetic_fleet(n_resources, seed):
    """Seeded fleet; ``(5, 0)`` returns the five-unit reference fleet itself.

    Every unit spans 0-100 MW with 50 MW of regulation offered. Offers are
    drawn uniformly and rounded to cents: energy 10-20, regulation capacity
    2.5-15, mileage 0.5-2 $/MWh; ramp rates are whole MW/min in 1-10.
    """
    if n_resources < 5:
        raise ValueError(f"need at least 5 resources, got {n_resources}")
    if n_resources == 5 and seed == 0:
        return five_unit_fleet()
    rng = np.random.default_rng(seed)
    c_p = np.round(rng.uniform(10.0, 20.0, n_resources), 2)
    c_cap = np.round(rng.uniform(2.5, 15.0, n_resources), 2)
    c_per = np.round(rng.uniform(0.5, 2.0, n_resources), 2)
    ramp = rng.integers(1, 11, n_resources)
    width = len(str(n_resources))
    return [
        Resource(id=f"G{k + 1:0{width}d}", p_min=0.0, p_max=100.0, ramp=float(ramp[k]),
                 offer_energy=float(c_p[k]), offer_reg_capacity=float(c_cap[k]),
                 offer_reg_performance=float(c_per[k]), reg_offer_max=50.0)
        for k in range(n_resources)
    ]


def synthetic_case(n_resources, seed, mileage_ratio=3.2):
    """Case around :func:`gen_synthetic_fleet` with requirements scaled like the five-unit case.

    Regulation is 5 % of fleet capacity and hourly mileage is
    ``mileage_ratio`` times that; demand is 75 % of capacity.
    """
    if n_resources == 5 and seed == 0:
        return five_unit_case()
    fleet = gen_synthetic_fleet(n_resources, seed)
    cap = sum(r.p_max for r in fleet)
    reg = 0.05 * cap
    demand = SYNTHETIC_DEMAND_FRACTION * cap
    return CaseInputs(
        resources=tuple(fleet),
        requirements=SystemRequirements(demand=demand, reg_capacity_req=reg,
                                        reg_mileage_req_hourly=mileage_ratio * reg),
        params=MarketParams(mileage_ratio=mileage_ratio),
        forecast_demand=demand,
    )


@dataclass(frozen=True)
class TrialSpec:
    case: CaseInputs
    scale_min: float = 0.5
    scale_max: float = 1.25
    seed: int = 0
    n_trials: int = 8760

    def __post_init__(self):
        if not 0 < self.scale_min <= self.scale_max:
            raise ValueError(f"need 0 < scale_min <= scale_max, got {self.scale_min}, {self.scale_max}")
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")

    def scales(self):
        rng = np.random.default_rng(self.seed)
        return rng.uniform(self.scale_min, self.scale_max, self.n_trials)


@dataclass(frozen=True)
class TrialResult:
    scale: float
    isone: ClearingResult
    pjm: ClearingResult
    miso: ClearingResult
    gamma_forecast: float
    gamma_rt: float

    @property
    def series(self):
        return {
            "gamma_forecast": self.gamma_forecast,
            "gamma_rt": self.gamma_rt,
            "isone_mu_cap": self.isone.price_capacity,
            "isone_mu_per": self.isone.price_performance,
            "pjm_mu_cap": self.pjm.price_capacity,
            "pjm_mu_per": self.pjm.price_performance,
            "miso_mu": self.miso.price_total,
            "miso_mu_per": self.miso.price_performance,
        }


def _clear_all(case, gamma_forecast):
    return (clear_isone(case, gamma_forecast), clear_pjm(case, gamma_forecast), clear_miso(case))


def run_trial(case: CaseInputs, forecast_scale, seed=None, _memo=None) -> TrialResult:
    """Clear all three markets with forecast demand ``forecast_scale * demand``.

    ``_memo`` maps an estimated LMP to already-cleared markets; the markets
    depend on the forecast only through that price.
    """
    trial_case = case.with_forecast(forecast_scale * case.demand)
    try:
        gamma_forecast = clear_energy_only(case.resources, trial_case.forecast_demand).lmp
        gamma_rt = clear_energy_only(case.resources, case.demand).lmp
        if _memo is not None and gamma_forecast in _memo:
            isone, pjm, miso = _memo[gamma_forecast]
        else:
            isone, pjm, miso = _clear_all(trial_case, gamma_forecast)
            if _memo is not None:
                _memo[gamma_forecast] = (isone, pjm, miso)
    except MarketInfeasibleError as exc:
        raise TrialFailure(float(forecast_scale), seed, exc) from exc
    return TrialResult(float(forecast_scale), isone, pjm, miso, gamma_forecast, gamma_rt)


def simulate(spec: TrialSpec):
    """Run every trial; return ``(rows, failures)``.

    ``rows`` has one entry per trial: ``(index, scale, series-dict or None)``.
    """
    memo = {}
    rows, failures = [], []
    budget = math.floor(MAX_INFEASIBLE_FRACTION * spec.n_trials)
    for k, scale in enumerate(spec.scales()):
        try:
            res = run_trial(spec.case, scale, spec.seed, memo)
        except TrialFailure as exc:
            failures.append(exc)
            rows.append((k, float(scale), None))
            if len(failures) > budget:
                raise TooManyInfeasibleTrials(failures, spec.n_trials) from exc
            continue
        rows.append((k, float(scale), res.series))
    log.info("%d trials, %d distinct forecast prices, %d infeasible",
             spec.n_trials, len(memo), len(failures))
    return rows, failures


def series_stats(values) -> SeriesStats:
    a = np.asarray(values, dtype=float)
    lo, hi = float(a.min()), float(a.max())
    if lo == hi:
        return SeriesStats(lo, lo, hi, 0.0)
    mean = min(max(math.fsum(a) / a.size, lo), hi)
    var = math.fsum((a - mean) ** 2) / a.size
    return SeriesStats(lo, mean, hi, var)


def summarize(rows):
    out = {}
    for name in SERIES:
        vals = [s[name] for _, _, s in rows if s is not None]
        if vals:
            out[name] = series_stats(vals)
    return out


def run_monte_carlo(spec: TrialSpec):
    rows, _ = simulate(spec)
    return summarize(rows)
