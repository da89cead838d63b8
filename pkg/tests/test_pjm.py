from dataclasses import replace

import numpy as np
import pytest

from regclear.energy import clear_energy_only, incremental_loc
from regclear.harness import five_unit_case
from regclear.model import CaseInputs, Resource, SystemRequirements
from regclear.pjm import (
    PjmAsoResult,
    clear_pjm,
    implied_mileage,
    pjm_aso,
    pjm_prices,
    pjm_rtsced,
    regulation_offer,
)


def approx_dict(expected, abs=0.005):
    return {k: pytest.approx(v, abs=abs) for k, v in expected.items()}


def fixed_aso(case, reg_capacity):
    return PjmAsoResult(reg_capacity, {}, 0.0, 20.0, {})


def test_aso_matched(five_gen):
    aso = pjm_aso(five_gen)
    assert aso.reg_capacity == approx_dict({"A": 0, "B": 20, "C": 5, "D": 0, "E": 0})
    assert aso.lmp_forecast == 20.0


def test_aso_mismatched(five_gen_mismatched):
    aso = pjm_aso(five_gen_mismatched)
    assert aso.lmp_forecast == 12.0
    assert aso.reg_capacity == approx_dict({"A": 20, "B": 0, "C": 5, "D": 0, "E": 0})


def test_aso_zero_requirement_is_merit_order(five_gen):
    case = five_gen.with_requirements(reg_capacity_req=0.0, reg_mileage_req_hourly=0.0)
    aso = pjm_aso(case)
    assert set(aso.reg_capacity.values()) == {0.0}
    ref = clear_energy_only(case.resources, case.demand)
    assert aso.aso_energy == approx_dict(ref.dispatch, abs=1e-9)


@pytest.mark.parametrize("reg,energy", [
    ({"A": 0, "B": 20, "C": 5, "D": 0, "E": 0}, {"A": 100, "B": 25, "C": 95, "D": 100, "E": 100}),
    ({"A": 20, "B": 0, "C": 5, "D": 0, "E": 0}, {"A": 80, "B": 45, "C": 95, "D": 100, "E": 100}),
])
def test_rtsced_examples(five_gen, reg, energy):
    rt = pjm_rtsced(five_gen, fixed_aso(five_gen, reg))
    assert rt.energy == approx_dict(energy)
    assert rt.lmp == 20.0


def test_rtsced_zero_commitment_reduces_to_merit_order(five_gen):
    rt = pjm_rtsced(five_gen, fixed_aso(five_gen, {i: 0.0 for i in five_gen.ids}))
    ref = clear_energy_only(five_gen.resources, five_gen.demand)
    assert rt.energy == approx_dict(ref.dispatch, abs=1e-9)
    assert rt.lmp == ref.lmp


def test_rtsced_overcommitment_infeasible(five_gen):
    reg = {i: 45.0 for i in five_gen.ids}
    with pytest.raises(Exception, match="infeasible"):
        pjm_rtsced(five_gen, fixed_aso(five_gen, reg))


def test_prices_matched(five_gen):
    res = clear_pjm(five_gen)
    assert res.lmp == 20.0
    assert res.price_total == pytest.approx(19.80, abs=0.005)
    assert res.price_performance == pytest.approx(1.50, abs=0.005)
    assert res.price_capacity == pytest.approx(18.30, abs=0.005)
    assert res.reg_mileage == approx_dict({"A": 0, "B": 5.33, "C": 1.33, "D": 0, "E": 0})


def test_prices_mismatched(five_gen_mismatched):
    res = clear_pjm(five_gen_mismatched)
    assert res.lmp == 20.0
    assert res.energy == approx_dict({"A": 80, "B": 45, "C": 95, "D": 100, "E": 100})
    assert res.price_total == pytest.approx(15.70, abs=0.005)
    assert res.price_performance == pytest.approx(1.00, abs=0.005)
    assert res.price_capacity == pytest.approx(14.70, abs=0.005)


def test_price_components_add_up():
    for forecast in (168.0, 250.0, 330.0, 420.0, 500.0):
        res = clear_pjm(five_unit_case(forecast))
        assert res.price_capacity >= 0 and res.price_performance >= 0
        assert res.price_capacity + res.price_performance == res.price_total


def test_empty_commitment_prices(five_gen):
    aso = fixed_aso(five_gen, {i: 0.0 for i in five_gen.ids})
    mu, mu_cap, mu_per, _ = pjm_prices(five_gen, aso, 20.0)
    assert (mu, mu_cap, mu_per) == (0.0, 0.0, 0.0)


def test_single_commitment_formula():
    r = Resource("S", 0, 100, 10, 10, 4.0, 0.75, reg_offer_max=50)
    case = CaseInputs((r, Resource("T", 0, 100, 10, 30, 1, 1, agc_qualified=False)),
                      SystemRequirements(demand=50, reg_capacity_req=10, reg_mileage_req_hourly=32))
    res = clear_pjm(case)
    alpha = case.params.mileage_ratio
    assert res.loc_realtime["S"] == 0.0
    assert res.price_total == pytest.approx(4.0 + alpha * 0.75, abs=1e-12)
    assert res.price_capacity == pytest.approx(4.0 + (alpha - 1) * 0.75, abs=1e-12)


def test_pricing_loc_ignores_forecast(five_gen):
    aso = fixed_aso(five_gen, {"A": 20.0, "B": 0.0, "C": 5.0, "D": 0.0, "E": 0.0})
    baseline = None
    for forecast in (150.0, 168.0, 300.0, 420.0, 480.0):
        case = five_gen.with_forecast(forecast)
        rt = pjm_rtsced(case, aso)
        out = pjm_prices(case, aso, rt.lmp)
        baseline = baseline or out
        assert out == baseline
    assert baseline[3] == incremental_loc(five_gen.resources, 20.0)


def test_implied_mileage():
    case = five_unit_case()
    assert implied_mileage({"B": 20.0}, case.params)["B"] == pytest.approx(3.2 * 20 / 12)


def _energy_cost(lo, hi, offers, demand):
    """Vectorised merit-order cost for per-row bounds ``lo``/``hi``."""
    order = np.argsort(offers, kind="stable")
    lo, hi, c = lo[:, order], hi[:, order], offers[order]
    need = demand - lo.sum(axis=1)
    room = hi - lo
    cum = np.cumsum(room, axis=1)
    take = np.clip(np.minimum(room, need[:, None] - (cum - room)), 0.0, None)
    feasible = (need >= 0) & (cum[:, -1] >= need - 1e-9)
    return np.where(feasible, (lo + take) @ c, np.inf)


def test_aso_commitment_is_cheapest_on_grid(five_gen):
    # regulation carries a positive price, so the optimum holds the
    # requirement with equality; the last unit takes up the remainder
    case = five_gen
    res = case.resources
    req = case.requirements.reg_capacity_req
    t, alpha = case.params.dispatch_interval_min, case.params.mileage_ratio
    loc = incremental_loc(res, clear_energy_only(res, case.forecast_demand).lmp)
    caps = np.array([min(r.reg_offer_max, r.ramp_limit(t), req) for r in res])
    axes = [np.arange(0.0, cap + 0.25, 0.5) for cap in caps[:-1]]
    head = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    last = req - head.sum(axis=1)
    keep = (last >= 0) & (last <= caps[-1])
    rows = np.column_stack([head[keep], last[keep]])
    p_min = np.array([r.p_min for r in res])
    p_max = np.array([r.p_max for r in res])
    energy = _energy_cost(p_min + rows, p_max - rows,
                          np.array([r.offer_energy for r in res]), case.demand)
    adj = np.array([regulation_offer(r, alpha) + loc[r.id] for r in res])
    total = energy + rows @ adj
    assert len(rows) > 10_000
    aso = pjm_aso(case)
    assert aso.aso_objective == pytest.approx(total.min(), abs=1e-6)
    best = rows[int(np.argmin(total))]
    assert dict(zip(case.ids, best)) == approx_dict(aso.reg_capacity, abs=1e-9)


def test_unqualified_never_committed(five_gen):
    resources = tuple(replace(r, agc_qualified=r.id != "B") for r in five_gen.resources)
    res = clear_pjm(replace(five_gen, resources=resources))
    assert res.reg_capacity["B"] == 0.0
