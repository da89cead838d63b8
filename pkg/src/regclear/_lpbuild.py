from __future__ import annotations

from dataclasses import dataclass, field

from .lp import solve
from .model import MarketInfeasibleError

# dispatched quantities below this are reported as not dispatched
DISPATCH_TOL = 1e-9


def solve_or_raise(lp, what):
    sol = solve(lp)
    if not sol.optimal:
        raise MarketInfeasibleError(f"{what}: {sol.status}")
    return sol


def pick(sol, prefix, ids):
    return {i: sol.primal.get(f"{prefix}[{i}]", 0.0) for i in ids}


def clean(values):
    """Drop solver round-off so reported dispatch is non-negative."""
    return {k: (0.0 if abs(v) <= DISPATCH_TOL else v) for k, v in values.items()}


@dataclass(frozen=True)
class EnergyDispatch:
    """Energy and contingency reserve stage with regulation held fixed."""

    energy: dict[str, float]
    syn: dict[str, float]
    non: dict[str, float]
    sup: dict[str, float]
    lmp: float
    objective: float
    duals: dict[str, float] = field(default_factory=dict)
