"""PJM: Ancillary Service Optimizer, real-time SCED, then RMCP formation."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._lpbuild import DISPATCH_TOL, EnergyDispatch, clean, pick, solve_or_raise
from .energy import clear_energy_only, incremental_loc
from .lp import EQ, GE, LE, LinearProgram
from .model import CaseInputs, ClearingResult


@dataclass(frozen=True)
class PjmAsoResult:
    reg_capacity: dict[str, float]
    aso_energy: dict[str, float]
    aso_objective: float
    lmp_forecast: float
    loc_estimated: dict[str, float]


def regulation_offer(resource, alpha):
    """Capability offer plus mileage offer scaled by the mileage ratio."""
    return resource.offer_reg_capacity + alpha * resource.offer_reg_performance


def pjm_aso(case: CaseInputs, lmp_forecast=None) -> PjmAsoResult:
    """Jointly optimise energy, reserves and regulation to commit regulation.

    Energy is balanced against real-time demand; only the lost opportunity
    cost uses the forecast price.
    """
    if lmp_forecast is None:
        lmp_forecast = clear_energy_only(case.resources, case.forecast_demand).lmp
    loc = incremental_loc(case.resources, lmp_forecast, case.params.loc_floor_at_zero)
    req = case.requirements
    t = case.params.dispatch_interval_min
    alpha = case.params.mileage_ratio
    lp = LinearProgram()
    demand, reg, syn_req, r10 = {}, {}, {}, {}
    for r in case.resources:
        p = lp.add_variable(f"p[{r.id}]", 0.0, math.inf, r.offer_energy)
        syn = lp.add_variable(f"syn[{r.id}]", 0.0, math.inf, r.offer_syn)
        non = lp.add_variable(f"non[{r.id}]", 0.0, r.p_max, r.offer_non)
        cap_terms = {p: 1.0, syn: 1.0}
        floor_terms = {p: 1.0}
        if r.agc_qualified:
            ub = max(0.0, min(r.reg_offer_max, r.ramp_limit(t)))
            rc = lp.add_variable(f"rcap[{r.id}]", 0.0, ub, regulation_offer(r, alpha) + loc[r.id])
            cap_terms[rc] = 1.0
            floor_terms[rc] = -1.0
            reg[rc] = 1.0
        lp.add_constraint(f"capacity[{r.id}]", cap_terms, LE, r.p_max)
        lp.add_constraint(f"floor[{r.id}]", floor_terms, GE, r.p_min)
        demand[p] = 1.0
        syn_req[syn] = 1.0
        r10[syn] = r10[non] = 1.0
    lp.add_constraint("demand", demand, EQ, req.demand)
    lp.add_constraint("reg", reg, GE, req.reg_capacity_req)
    lp.add_constraint("syn", syn_req, GE, req.syn_req)
    lp.add_constraint("r10", r10, GE, req.r10_req)
    sol = solve_or_raise(lp, "PJM ancillary service optimizer")
    ids = case.ids
    return PjmAsoResult(
        reg_capacity=clean(pick(sol, "rcap", ids)),
        aso_energy=clean(pick(sol, "p", ids)),
        aso_objective=sol.objective,
        lmp_forecast=lmp_forecast,
        loc_estimated=loc,
    )


def pjm_rtsced(case: CaseInputs, aso: PjmAsoResult) -> EnergyDispatch:
    req = case.requirements
    lp = LinearProgram()
    demand, syn_req, r10 = {}, {}, {}
    for r in case.resources:
        rcap = aso.reg_capacity.get(r.id, 0.0)
        p = lp.add_variable(f"p[{r.id}]", 0.0, math.inf, r.offer_energy)
        syn = lp.add_variable(f"syn[{r.id}]", 0.0, math.inf, r.offer_syn)
        non = lp.add_variable(f"non[{r.id}]", 0.0, r.p_max, r.offer_non)
        lp.add_constraint(f"capacity[{r.id}]", {p: 1.0, syn: 1.0}, LE, r.p_max - rcap)
        lp.add_constraint(f"floor[{r.id}]", {p: 1.0}, GE, r.p_min + rcap)
        demand[p] = 1.0
        syn_req[syn] = 1.0
        r10[syn] = r10[non] = 1.0
    lp.add_constraint("demand", demand, EQ, req.demand)
    lp.add_constraint("syn", syn_req, GE, req.syn_req)
    lp.add_constraint("r10", r10, GE, req.r10_req)
    sol = solve_or_raise(lp, "PJM real-time SCED")
    ids = case.ids
    return EnergyDispatch(
        energy=clean(pick(sol, "p", ids)),
        syn=clean(pick(sol, "syn", ids)),
        non=clean(pick(sol, "non", ids)),
        sup={i: 0.0 for i in ids},
        lmp=sol.duals["demand"],
        objective=sol.objective,
        duals=sol.duals,
    )


def pjm_prices(case: CaseInputs, aso: PjmAsoResult, lmp):
    """Return ``(mu, mu_cap, mu_per, loc_realtime)`` from the real-time LMP."""
    loc = incremental_loc(case.resources, lmp, case.params.loc_floor_at_zero)
    alpha = case.params.mileage_ratio
    committed = [r for r in case.resources if aso.reg_capacity.get(r.id, 0.0) > DISPATCH_TOL]
    if not committed:
        return 0.0, 0.0, 0.0, loc
    mu = max(regulation_offer(r, alpha) + loc[r.id] for r in committed)
    mu_per = max(r.offer_reg_performance for r in committed)
    return mu, mu - mu_per, mu_per, loc


def implied_mileage(reg_capacity, params):
    return {i: params.mileage_ratio * q / params.intervals_per_hour for i, q in reg_capacity.items()}


def clear_pjm(case: CaseInputs, lmp_forecast=None) -> ClearingResult:
    aso = pjm_aso(case, lmp_forecast)
    rt = pjm_rtsced(case, aso)
    mu, mu_cap, mu_per, loc_rt = pjm_prices(case, aso, rt.lmp)
    return ClearingResult(
        market="pjm",
        energy=rt.energy,
        reg_capacity=aso.reg_capacity,
        reg_mileage=implied_mileage(aso.reg_capacity, case.params),
        syn=rt.syn,
        non=rt.non,
        sup=rt.sup,
        lmp=rt.lmp,
        lmp_forecast=aso.lmp_forecast,
        price_total=mu,
        price_capacity=mu_cap,
        price_performance=mu_per,
        duals=rt.duals,
        loc_estimated=aso.loc_estimated,
        loc_realtime=loc_rt,
        objective=rt.objective,
    )
