"""Energy-only clearing and incremental lost opportunity costs."""

from __future__ import annotations

from dataclasses import dataclass

from .model import InfeasibleDemandError


@dataclass(frozen=True)
class EnergyClear:
    dispatch: dict[str, float]
    lmp: float


def clear_energy_only(resources, demand) -> EnergyClear:
    """Least-cost dispatch of ``demand`` ignoring every reserve product.

    Units start at ``p_min`` and are loaded in ascending energy offer (ties
    in declaration order). The price is the offer of the last unit that
    received energy above its minimum, i.e. the demand-balance dual taken as
    a left derivative; it is 0 when no incremental energy is needed.
    """
    demand = float(demand)
    dispatch = {r.id: float(r.p_min) for r in resources}
    left = demand - sum(dispatch.values())
    if left < -1e-9:
        raise InfeasibleDemandError(f"demand {demand:g} MW below total minimum output")
    lmp = 0.0
    for r in sorted(resources, key=lambda r: r.offer_energy):
        if left <= 0:
            break
        room = r.p_max - r.p_min
        if room <= 0:
            continue
        take = min(room, left)
        dispatch[r.id] += take
        left -= take
        lmp = float(r.offer_energy)
    if left > 1e-9:
        raise InfeasibleDemandError(f"demand {demand:g} MW exceeds total capacity")
    return EnergyClear(dispatch, lmp)


def incremental_loc(resources, lmp, floor=True) -> dict[str, float]:
    """Per-resource foregone energy margin ``lmp - offer_energy``."""
    out = {}
    for r in resources:
        loc = float(lmp) - r.offer_energy
        out[r.id] = max(loc, 0.0) if floor else loc
    return out
