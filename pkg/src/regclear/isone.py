"""ISO New England: hour-ahead regulation market, then energy and reserves.

Regulation capacity and mileage are cleared first against estimated lost
opportunity costs. The capacity award is then fixed in the co-optimised
energy and contingency reserve market. Capacity is priced from Vickrey
payments, mileage at the highest accepted mileage offer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._lpbuild import EnergyDispatch, clean, pick, solve_or_raise, DISPATCH_TOL
from .energy import clear_energy_only, incremental_loc
from .lp import EQ, GE, LE, LinearProgram, solve
from .model import CaseInputs, ClearingResult, MarketInfeasibleError


class AvoidedCostUndefinedError(MarketInfeasibleError):
    """Removing a resource leaves the regulation market infeasible."""


@dataclass(frozen=True)
class IsoNeRegDispatch:
    reg_capacity: dict[str, float]
    reg_mileage: dict[str, float]
    objective: float
    lmp_forecast: float
    loc_estimated: dict[str, float]


def forecast_lmp(case: CaseInputs) -> float:
    return clear_energy_only(case.resources, case.forecast_demand).lmp


def regulation_lp(case, loc, exclude=None):
    """Regulation capacity/mileage market with estimated LOC ``loc``."""
    t = case.params.dispatch_interval_min
    beta = case.params.beta
    lp = LinearProgram()
    cap_terms, per_terms = {}, {}
    for r in case.resources:
        if r.id == exclude or not r.agc_qualified:
            continue
        cap_ub = max(0.0, min(0.5 * (r.p_max - r.p_min), r.ramp_limit(t), r.reg_offer_max))
        cap = lp.add_variable(f"rcap[{r.id}]", 0.0, cap_ub, r.offer_reg_capacity + loc[r.id])
        per = lp.add_variable(f"rper[{r.id}]", 0.0, r.ramp_limit(t), r.offer_reg_performance)
        lp.add_constraint(f"beta[{r.id}]", {per: 1.0, cap: -beta}, LE, 0.0)
        cap_terms[cap] = 1.0
        per_terms[per] = 1.0
    lp.add_constraint("reg_capacity", cap_terms, GE, case.requirements.reg_capacity_req)
    lp.add_constraint("reg_mileage", per_terms, GE, case.mileage_req_interval)
    return lp


def _estimated_loc(case, lmp_forecast):
    if lmp_forecast is None:
        lmp_forecast = forecast_lmp(case)
    loc = incremental_loc(case.resources, lmp_forecast, case.params.loc_floor_at_zero)
    return lmp_forecast, loc


def isone_clear_regulation(case: CaseInputs, lmp_forecast=None) -> IsoNeRegDispatch:
    lmp_forecast, loc = _estimated_loc(case, lmp_forecast)
    sol = solve_or_raise(regulation_lp(case, loc), "ISO-NE regulation market")
    ids = case.ids
    return IsoNeRegDispatch(
        reg_capacity=clean(pick(sol, "rcap", ids)),
        reg_mileage=clean(pick(sol, "rper", ids)),
        objective=sol.objective,
        lmp_forecast=lmp_forecast,
        loc_estimated=loc,
    )


def isone_clear_energy(case: CaseInputs, reg: IsoNeRegDispatch) -> EnergyDispatch:
    """Energy and 10/30-minute reserves with ``reg.reg_capacity`` fixed."""
    req = case.requirements
    lp = LinearProgram()
    demand, r10, r30 = {}, {}, {}
    for r in case.resources:
        rcap = reg.reg_capacity.get(r.id, 0.0)
        p = lp.add_variable(f"p[{r.id}]", 0.0, math.inf, r.offer_energy)
        syn = lp.add_variable(f"syn[{r.id}]", 0.0, math.inf, r.offer_syn)
        non = lp.add_variable(f"non[{r.id}]", 0.0, r.p_max, r.offer_non)
        sup = lp.add_variable(f"sup[{r.id}]", 0.0, math.inf, r.offer_sup)
        lp.add_constraint(f"capacity[{r.id}]", {p: 1.0, syn: 1.0, sup: 1.0}, LE, r.p_max - rcap)
        lp.add_constraint(f"floor[{r.id}]", {p: 1.0}, GE, r.p_min + rcap)
        demand[p] = 1.0
        r10[non] = r10[syn] = 1.0
        r30[sup] = 1.0
    lp.add_constraint("demand", demand, EQ, req.demand)
    # forward-market reserve quantities are fixed at zero
    lp.add_constraint("r10", r10, GE, req.r10_req)
    lp.add_constraint("r30", r30, GE, req.r30_req)
    sol = solve_or_raise(lp, "ISO-NE energy and reserve market")
    ids = case.ids
    return EnergyDispatch(
        energy=clean(pick(sol, "p", ids)),
        syn=clean(pick(sol, "syn", ids)),
        non=clean(pick(sol, "non", ids)),
        sup=clean(pick(sol, "sup", ids)),
        lmp=sol.duals["demand"],
        objective=sol.objective,
        duals=sol.duals,
    )


def isone_avoided_cost(case: CaseInputs, resource_id, reg: IsoNeRegDispatch | None = None) -> float:
    """Increase in regulation market cost when ``resource_id`` is withdrawn.

    Both markets are cleared with the same estimated LOC values.
    """
    if reg is None:
        reg = isone_clear_regulation(case)
    loc = reg.loc_estimated
    if (reg.reg_capacity.get(resource_id, 0.0) <= DISPATCH_TOL
            and reg.reg_mileage.get(resource_id, 0.0) <= DISPATCH_TOL):
        # an idle resource's variables are zero in the full optimum
        return 0.0
    without = solve(regulation_lp(case, loc, exclude=resource_id))
    if not without.optimal:
        raise AvoidedCostUndefinedError(
            f"regulation market infeasible without resource {resource_id}")
    return max(0.0, without.objective - reg.objective)


def isone_vickrey(case: CaseInputs, reg: IsoNeRegDispatch, avoided) -> dict[str, float]:
    out = {}
    for r in case.resources:
        rcap = reg.reg_capacity.get(r.id, 0.0)
        rper = reg.reg_mileage.get(r.id, 0.0)
        out[r.id] = ((r.offer_reg_capacity + reg.loc_estimated[r.id]) * rcap
                     + r.offer_reg_performance * rper
                     + avoided.get(r.id, 0.0))
    return out


def isone_prices(case: CaseInputs, reg: IsoNeRegDispatch, vickrey):
    """Return ``(mu, mu_cap, mu_per)``.

    Mileage clears at the highest accepted mileage offer; capacity at the
    residual of total Vickrey payments after mileage is paid, per MW.
    """
    offers = {r.id: r.offer_reg_performance for r in case.resources}
    accepted = [offers[i] for i, q in reg.reg_mileage.items() if q > DISPATCH_TOL]
    mu_per = max(accepted) if accepted else 0.0
    total_cap = math.fsum(reg.reg_capacity.values())
    if total_cap <= DISPATCH_TOL:
        return 0.0, 0.0, 0.0
    total_per = math.fsum(reg.reg_mileage.values())
    mu_cap = (math.fsum(vickrey.values()) - total_per * mu_per) / total_cap
    return mu_cap + mu_per, mu_cap, mu_per


def clear_isone(case: CaseInputs, lmp_forecast=None) -> ClearingResult:
    reg = isone_clear_regulation(case, lmp_forecast)
    energy = isone_clear_energy(case, reg)
    avoided = {i: isone_avoided_cost(case, i, reg) for i in case.ids}
    vickrey = isone_vickrey(case, reg, avoided)
    mu, mu_cap, mu_per = isone_prices(case, reg, vickrey)
    return ClearingResult(
        market="isone",
        energy=energy.energy,
        reg_capacity=reg.reg_capacity,
        reg_mileage=reg.reg_mileage,
        syn=energy.syn,
        non=energy.non,
        sup=energy.sup,
        lmp=energy.lmp,
        lmp_forecast=reg.lmp_forecast,
        price_total=mu,
        price_capacity=mu_cap,
        price_performance=mu_per,
        duals=energy.duals,
        vickrey_payments=vickrey,
        avoided_costs=avoided,
        loc_estimated=reg.loc_estimated,
        loc_realtime=incremental_loc(case.resources, energy.lmp, case.params.loc_floor_at_zero),
        objective=reg.objective + energy.objective,
    )
