"""MISO: single co-optimised SCED over energy, regulation and reserves.

Regulation capacity is split into R1 (held for regulation, offered at the
capacity offer plus ``alpha`` times the mileage offer) and R2 (substituting
for spinning/supplemental reserve, offered at the capacity offer). The
regulation price is the sum of the three cascaded requirement duals.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from ._lpbuild import DISPATCH_TOL, clean, pick, solve_or_raise
from .lp import EQ, GE, LE, LinearProgram, solve
from .model import CaseInputs, ClearingResult
from .pjm import implied_mileage, regulation_offer

REG, REG_SPIN, REG_SPIN_SUP = "reg", "reg+spin", "reg+spin+sup"


class DegenerateDualWarning(UserWarning):
    pass


@dataclass(frozen=True)
class MisoScedResult:
    energy: dict[str, float]
    r1: dict[str, float]
    r2: dict[str, float]
    syn: dict[str, float]
    sup: dict[str, float]
    lmp: float
    duals: dict[str, float]
    objective: float

    @property
    def reg_split(self):
        return {i: (self.r1[i], self.r2[i]) for i in self.r1}


def sced_lp(case: CaseInputs) -> LinearProgram:
    req = case.requirements
    t = case.params.dispatch_interval_min
    alpha = case.params.mileage_ratio
    lp = LinearProgram()
    demand, e, f, g = {}, {}, {}, {}
    for r in case.resources:
        p = lp.add_variable(f"p[{r.id}]", 0.0, math.inf, r.offer_energy)
        syn = lp.add_variable(f"syn[{r.id}]", 0.0, math.inf, r.offer_syn)
        sup = lp.add_variable(f"sup[{r.id}]", 0.0, math.inf, r.offer_sup)
        cap_terms = {p: 1.0, syn: 1.0, sup: 1.0}
        floor_terms = {p: 1.0}
        if r.agc_qualified:
            r1 = lp.add_variable(f"r1[{r.id}]", 0.0, math.inf, regulation_offer(r, alpha))
            r2 = lp.add_variable(f"r2[{r.id}]", 0.0, math.inf, r.offer_reg_capacity)
            cap_terms[r1] = cap_terms[r2] = 1.0
            floor_terms[r1] = -1.0
            lp.add_constraint(f"reg_offer[{r.id}]", {r1: 1.0, r2: 1.0}, LE, r.reg_offer_max)
            lp.add_constraint(f"ramp[{r.id}]", {r1: 1.0, r2: 1.0}, LE, r.ramp_limit(t))
            e[r1] = 1.0
            f[r1] = f[r2] = 1.0
            g[r1] = g[r2] = 1.0
        lp.add_constraint(f"capacity[{r.id}]", cap_terms, LE, r.p_max)
        lp.add_constraint(f"floor[{r.id}]", floor_terms, GE, r.p_min)
        demand[p] = 1.0
        f[syn] = 1.0
        g[syn] = g[sup] = 1.0
    lp.add_constraint("demand", demand, EQ, req.demand)
    lp.add_constraint(REG, e, GE, req.reg_capacity_req)
    lp.add_constraint(REG_SPIN, f, GE, req.reg_capacity_req + req.syn_req)
    lp.add_constraint(REG_SPIN_SUP, g, GE, req.reg_capacity_req + req.syn_req + req.r30_req)
    return lp


def miso_sced(case: CaseInputs) -> MisoScedResult:
    """Clear the SCED. Never reads ``case.forecast_demand``."""
    sol = solve_or_raise(sced_lp(case), "MISO SCED")
    ids = case.ids
    return MisoScedResult(
        energy=clean(pick(sol, "p", ids)),
        r1=clean(pick(sol, "r1", ids)),
        r2=clean(pick(sol, "r2", ids)),
        syn=clean(pick(sol, "syn", ids)),
        sup=clean(pick(sol, "sup", ids)),
        lmp=sol.duals["demand"],
        duals=sol.duals,
        objective=sol.objective,
    )


def miso_prices(case: CaseInputs, result: MisoScedResult):
    """Return ``(mu, mu_per)``."""
    d = result.duals
    mu = d[REG] + d[REG_SPIN] + d[REG_SPIN_SUP]
    offers = {r.id: r.offer_reg_performance for r in case.resources}
    accepted = [offers[i] for i, q in result.r1.items() if q > DISPATCH_TOL]
    mu_per = max(accepted) if accepted else 0.0
    return mu, mu_per


def regulation_price_slope(case: CaseInputs, eps=1e-3):
    """Objective change per MW of extra regulation requirement, by re-solve."""
    base = solve_or_raise(sced_lp(case), "MISO SCED")
    bumped = case.with_requirements(reg_capacity_req=case.requirements.reg_capacity_req + eps)
    up = solve(sced_lp(bumped))
    if not up.optimal:
        return math.inf
    return (up.objective - base.objective) / eps


def check_duals(case: CaseInputs, mu, eps=1e-3, rel=0.01):
    """Warn when the reported price disagrees with a re-solve perturbation."""
    slope = regulation_price_slope(case, eps)
    if abs(slope - mu) > rel * max(1.0, abs(mu)):
        warnings.warn(
            f"MISO regulation dual {mu:.4f} differs from perturbation slope {slope:.4f}; "
            "alternate optimal duals exist",
            DegenerateDualWarning,
            stacklevel=2,
        )
        return False
    return True


def clear_miso(case: CaseInputs, verify_duals=False) -> ClearingResult:
    res = miso_sced(case)
    mu, mu_per = miso_prices(case, res)
    if verify_duals:
        check_duals(case, mu)
    return ClearingResult(
        market="miso",
        energy=res.energy,
        reg_capacity=res.r1,
        reg_mileage=implied_mileage(res.r1, case.params),
        syn=res.syn,
        non={i: 0.0 for i in case.ids},
        sup=res.sup,
        lmp=res.lmp,
        lmp_forecast=None,
        price_total=mu,
        price_capacity=mu,
        price_performance=mu_per,
        duals=res.duals,
        reg_split=res.reg_split,
        objective=res.objective,
    )
