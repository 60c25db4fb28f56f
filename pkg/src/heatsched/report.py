"""Result containers returned by every solver."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import thermo


@dataclass
class DualState:
    """Temperature multipliers ``lam`` and energy multipliers ``mu``.

    Multipliers are scaled for the un-halved rate ``sum log(1 + .)``, so a
    single active budget ``P <= 5`` on ``log P`` carries multiplier 0.2.
    """

    lam: np.ndarray
    mu: np.ndarray

    def as_dict(self):
        return {"lambda": self.lam.tolist(), "mu": self.mu.tolist()}


@dataclass
class SolveReport:
    powers: np.ndarray
    temperatures: np.ndarray
    sinrs: Optional[np.ndarray]
    objective: float
    duals: Optional[DualState]
    iterations: int
    kkt_residual: float
    regime: str
    model: str
    form: str
    local_only: bool = False
    diagnostics: dict = field(default_factory=dict)
    cumulative_energy: Optional[np.ndarray] = None

    @property
    def D(self):
        return self.powers.size


def make_report(scenario, powers, *, model, form, regime, duals=None, iterations=0,
                kkt_residual=0.0, local_only=False, **diagnostics):
    """Assemble a report, recomputing temperatures, SINRs and objective from
    the schedule itself."""
    p = np.maximum(np.asarray(powers, dtype=float), 0.0)
    sinrs = None
    if model != "explicit" and scenario.params.kappa > 0:
        sinrs = thermo.compute_sinr(scenario, p)
    return SolveReport(
        powers=p,
        temperatures=thermo.temperature_trajectory(scenario.params, p),
        sinrs=sinrs,
        objective=float(thermo.objective(scenario, p, form)),
        duals=duals,
        iterations=int(iterations),
        kkt_residual=float(kkt_residual),
        regime=regime,
        model=model,
        form=form,
        local_only=local_only,
        diagnostics=dict(diagnostics),
        cumulative_energy=scenario.cumulative,
    )
