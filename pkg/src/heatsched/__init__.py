"""Throughput-optimal power schedules for a transmitter whose temperature
follows a first-order thermal filter."""

from .combined import CombinedDiagnostics, check_monotone_condition, solve_combined
from .dispatch import select_explicit_regime, solve
from .errors import (BracketInvalid, DegenerateBudget, HeatschedError, HorizonTooLarge,
                     InfeasibleScenario, IterationLimitExceeded, NoStrictlyFeasiblePoint,
                     NotTemperatureLimited, NoValidHitSlot, ParseError, ValidationError)
from .explicit import (solve_energy_limited, solve_explicit, solve_temperature_limited,
                       temperature_limited_report)
from .implicit import (improve_heuristic, solve_high_sinr, solve_high_sinr_fixed_point,
                       solve_low_sinr, solve_signomial)
from .numerics import SolverConfig, grid_oracle
from .report import DualState, SolveReport
from .thermo import Scenario, ThermalParams, check_feasible, objective

__version__ = "0.1.0"

__all__ = [
    "BracketInvalid", "CombinedDiagnostics", "DegenerateBudget", "DualState",
    "HeatschedError", "HorizonTooLarge", "InfeasibleScenario", "IterationLimitExceeded",
    "NoStrictlyFeasiblePoint", "NotTemperatureLimited", "NoValidHitSlot", "ParseError",
    "Scenario", "SolveReport", "SolverConfig", "ThermalParams", "ValidationError",
    "check_feasible", "check_monotone_condition", "grid_oracle", "improve_heuristic",
    "objective", "select_explicit_regime", "solve", "solve_combined",
    "solve_energy_limited", "solve_explicit", "solve_high_sinr",
    "solve_high_sinr_fixed_point", "solve_low_sinr", "solve_signomial",
    "solve_temperature_limited", "temperature_limited_report",
]
