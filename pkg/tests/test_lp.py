import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from regclear.lp import (
    EQ,
    GE,
    INFEASIBLE,
    LE,
    OPTIMAL,
    UNBOUNDED,
    IterationLimitError,
    LinearProgram,
    MalformedProgramError,
    solve,
)
from oracles import assert_certificate, random_lp, vertex_enumeration


def test_single_active_constraint():
    lp = LinearProgram()
    lp.add_variable("x", 0, 10, cost=1)
    lp.add_constraint("floor", {"x": 1}, GE, 1)
    sol = solve(lp)
    assert sol.status == OPTIMAL
    assert sol.primal["x"] == 1.0
    assert sol.duals["floor"] == 1.0
    assert sol.objective == 1.0


def test_random_lps_match_vertex_enumeration():
    rng = np.random.default_rng(20190815)
    n_optimal = 0
    for _ in range(1200):
        lp, c, rows, bounds = random_lp(rng)
        sol = solve(lp)
        ref = vertex_enumeration(c, rows, bounds)
        if ref is None:
            assert sol.status == INFEASIBLE
            continue
        assert sol.status == OPTIMAL
        n_optimal += 1
        assert abs(sol.objective - ref) <= 1e-7 * max(1.0, abs(ref))
        assert_certificate(lp, sol)
    assert n_optimal >= 300


def test_unbounded_detected():
    lp = LinearProgram()
    lp.add_variable("x", 0, math.inf, cost=-1)
    lp.add_variable("y", 0, 1, cost=0)
    lp.add_constraint("c", {"x": 1, "y": -1}, GE, 0)
    assert solve(lp).status == UNBOUNDED


def test_infeasible_detected():
    lp = LinearProgram()
    lp.add_variable("x", 0, 1, cost=1)
    lp.add_constraint("c", {"x": 1}, GE, 2)
    assert solve(lp).status == INFEASIBLE


def test_free_and_upper_only_variables():
    lp = LinearProgram()
    lp.add_variable("x", -math.inf, math.inf, cost=1)
    lp.add_variable("y", -math.inf, 3, cost=-1)
    lp.add_constraint("a", {"x": 1, "y": -1}, GE, -2)
    sol = solve(lp)
    assert sol.status == OPTIMAL
    assert sol.primal["y"] == pytest.approx(3)
    assert sol.primal["x"] == pytest.approx(1)
    assert sol.objective == pytest.approx(-2)
    assert_certificate(lp, sol)


def test_malformed_inputs():
    lp = LinearProgram()
    lp.add_variable("x")
    with pytest.raises(MalformedProgramError):
        lp.add_variable("x")
    lp.add_constraint("c", {"x": 1}, LE, 1)
    with pytest.raises(MalformedProgramError):
        lp.add_constraint("c", {"x": 1}, LE, 1)
    bad = LinearProgram()
    bad.add_variable("x")
    bad.add_constraint("c", {"x": math.nan}, LE, 1)
    with pytest.raises(MalformedProgramError):
        solve(bad)
    bad = LinearProgram()
    bad.add_variable("x", cost=math.inf)
    with pytest.raises(MalformedProgramError):
        solve(bad)
    bad = LinearProgram()
    bad.add_variable("x", 2, 1)
    with pytest.raises(MalformedProgramError):
        solve(bad)


def test_iteration_cap():
    rng = np.random.default_rng(3)
    lp, *_ = random_lp(rng)
    with pytest.raises(IterationLimitError):
        solve(lp, max_pivots=0)


def test_degenerate_ties_are_deterministic():
    # many identical offers: every vertex of the face is optimal
    lp = LinearProgram()
    for i in range(30):
        lp.add_variable(f"g{i}", 0, 10, cost=5)
    lp.add_constraint("demand", {f"g{i}": 1 for i in range(30)}, EQ, 95)
    for i in range(0, 30, 3):
        lp.add_constraint(f"pair{i}", {f"g{i}": 1, f"g{i+1}": 1}, LE, 12)
    first = solve(lp)
    for _ in range(5):
        again = solve(lp)
        assert again.primal == first.primal
        assert again.duals == first.duals
        assert again.objective == first.objective
    assert first.objective == pytest.approx(475)
    assert first.duals["demand"] == pytest.approx(5)


def test_rhs_perturbation_matches_dual():
    rng = np.random.default_rng(11)
    checked = 0
    eps = 1e-4
    while checked < 50:
        lp, *_ = random_lp(rng)
        sol = solve(lp)
        if not sol.optimal:
            continue
        for con in lp.constraints:
            if con.relation != GE or abs(sol.duals[con.name]) < 1e-6:
                continue
            up = solve(lp.set_rhs(con.name, con.rhs + eps))
            down = solve(lp.set_rhs(con.name, con.rhs - eps))
            if not (up.optimal and down.optimal):
                continue
            slope_up = (up.objective - sol.objective) / eps
            slope_down = (sol.objective - down.objective) / eps
            # non-degenerate optimum: both one-sided slopes agree
            if abs(slope_up - slope_down) > 1e-6 * max(1.0, abs(slope_up)):
                continue
            assert slope_up == pytest.approx(sol.duals[con.name], rel=0.01)
            checked += 1


@settings(max_examples=150, deadline=None)
@given(
    costs=st.lists(st.integers(-5, 5), min_size=2, max_size=4),
    rhs=st.integers(0, 8),
)
def test_knapsack_certificates(costs, rhs):
    lp = LinearProgram()
    for j, cj in enumerate(costs):
        lp.add_variable(f"x{j}", 0, 3, cj)
    lp.add_constraint("sum", {f"x{j}": 1 for j in range(len(costs))}, GE, min(rhs, 3 * len(costs)))
    sol = solve(lp)
    assert sol.status == OPTIMAL
    assert_certificate(lp, sol)
    assert solve(lp).primal == sol.primal
