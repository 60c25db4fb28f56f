"""One entry point that routes a (model, regime) request to its solver."""

from __future__ import annotations

import logging
from dataclasses import replace

from . import combined, explicit, implicit, thermo
from .errors import ValidationError
from .numerics import SolverConfig

log = logging.getLogger(__name__)

REGIMES = ("auto", "general", "low-sinr", "high-sinr", "temp-limited", "energy-limited")


def select_explicit_regime(scenario):
    """``temp-limited`` if only the cap can bind, ``energy-limited`` if only
    the budgets can, ``general`` otherwise."""
    if thermo.is_temperature_limited(scenario):
        return "temp-limited"
    if thermo.is_energy_limited(scenario)[1]:
        return "energy-limited"
    return "general"


def solve(scenario, model="explicit", regime="auto", config=None, heuristic=False):
    """Solve ``scenario`` under ``model`` in the requested regime.

    For the implicit and combined models ``auto`` means ``general``.
    ``heuristic`` adds random restarts to the local (condensation) solvers.
    """
    cfg = config or SolverConfig()
    if regime not in REGIMES:
        raise ValidationError(f"unknown regime {regime!r}")
    if model == "explicit":
        scenario.params.require_critical()
        chosen = select_explicit_regime(scenario) if regime == "auto" else regime
        if chosen == "temp-limited":
            report = explicit.temperature_limited_report(scenario)
        elif chosen == "energy-limited":
            report = explicit.solve_energy_limited(scenario)
        elif chosen == "general":
            report = explicit.solve_explicit(scenario, cfg)
        else:
            raise ValidationError(f"regime {chosen!r} does not apply to the explicit model")
    elif model == "implicit":
        chosen = "general" if regime == "auto" else regime
        if chosen == "general":
            report = implicit.solve_signomial(scenario, "implicit", cfg)
            if heuristic:
                report = implicit.improve_heuristic(scenario, "implicit", report, cfg)
        elif chosen == "low-sinr":
            report = implicit.solve_low_sinr(scenario)
        elif chosen == "high-sinr":
            report = implicit.solve_high_sinr(scenario, cfg)
        else:
            raise ValidationError(f"regime {chosen!r} does not apply to the implicit model")
    elif model == "combined":
        chosen = "general" if regime == "auto" else regime
        if chosen not in combined.REGIMES:
            raise ValidationError(f"regime {chosen!r} does not apply to the combined model")
        report, _ = combined.solve_combined(scenario, chosen, cfg, heuristic=heuristic)
    else:
        raise ValidationError(f"unknown model {model!r}")
    log.info("solved %s/%s in %d iterations", model, report.regime, report.iterations)
    return replace(report, diagnostics=dict(report.diagnostics, requested_regime=regime))
