"""Frequency regulation market clearing for ISO-NE, PJM and MISO."""

from .energy import EnergyClear, clear_energy_only, incremental_loc
from .harness import (
    TrialResult,
    TrialSpec,
    five_unit_case,
    gen_synthetic_fleet,
    run_monte_carlo,
    run_trial,
    simulate,
    summarize,
    synthetic_case,
)
from .isone import clear_isone
from .lp import LinearProgram, LpSolution, solve
from .miso import clear_miso
from .model import (
    CaseInputs,
    ClearingResult,
    MarketInfeasibleError,
    MarketParams,
    Resource,
    SystemRequirements,
    validate_case,
)
from .pjm import clear_pjm

__version__ = "0.1.0"
