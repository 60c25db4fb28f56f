"""Peak-temperature cap and temperature-dependent noise together.

Every regime reuses the implicit machinery with the filtered-power rows
``sum_{i<=k} alpha**(k-i) P_i <= cap`` appended to the energy budgets.
When the whole harvest fits under the cap the temperature rows can never
bind and the problem is handed to the implicit solvers unchanged.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import implicit, thermo
from .errors import DegenerateBudget, IterationLimitExceeded, ValidationError
from .numerics import (PosynomialSet, SolverConfig, barrier_maximize,
                       gp_program, strict_start)
from .report import DualState, make_report

log = logging.getLogger(__name__)

REGIMES = ("general", "low-sinr", "high-sinr")
HIT_TOL = 1e-7


@dataclass(frozen=True)
class CombinedDiagnostics:
    condition_holds: bool
    reduction_to_implicit: bool
    first_hit_slot: Optional[int]
    reentry: bool = False

    @classmethod
    def from_schedule(cls, scenario, powers):
        hit = first_hit_slot(scenario, powers)
        return cls(condition_holds=check_monotone_condition(scenario),
                   reduction_to_implicit=reduces_to_implicit(scenario),
                   first_hit_slot=hit, reentry=has_reentry(scenario, powers, hit))

    def as_dict(self):
        return {"condition_holds": self.condition_holds,
                "reduction_to_implicit": self.reduction_to_implicit,
                "first_hit_slot": self.first_hit_slot, "reentry": self.reentry}


def _require(scenario):
    params = scenario.params
    params.require_critical()
    params.require_implicit()
    return params


def check_monotone_condition(scenario):
    """``alpha <= beta*Gamma0 / (T_c - T_e + beta*Gamma0)`` (non-strict)."""
    p = _require(scenario)
    bg = p.beta * p.gamma0
    return bool(p.alpha <= bg / (p.T_c - p.T_e + bg))


def reduces_to_implicit(scenario):
    """The whole harvest fits under the cap, so no slot can get too hot."""
    p = _require(scenario)
    return bool(np.sum(scenario.energies) <= p.cap)


def first_hit_slot(scenario, powers, tol=HIT_TOL):
    """1-based first slot whose filtered power reaches the cap, or ``None``."""
    cap = scenario.params.cap
    filt = thermo.filtered_power(scenario.params.alpha, np.asarray(powers, dtype=float))
    hit = np.flatnonzero(filt >= cap * (1.0 - tol))
    return int(hit[0]) + 1 if hit.size else None


def has_reentry(scenario, powers, hit=None, tol=1e-6):
    """Whether the temperature falls back below the cap after first reaching it."""
    hit = first_hit_slot(scenario, powers) if hit is None else hit
    if hit is None:
        return False
    filt = thermo.filtered_power(scenario.params.alpha, np.asarray(powers, dtype=float))
    return bool(np.any(filt[hit:] < scenario.params.cap * (1.0 - tol)))


def prehit_recursion_residual(scenario, powers, hit=None):
    """Largest relative mismatch of ``P_{i+1} = alpha*(1 + P_i/(alpha*I_i + Gamma0))*P_i``
    over the slots before the first hit."""
    p = scenario.params
    pw = np.asarray(powers, dtype=float)
    hit = first_hit_slot(scenario, pw) if hit is None else hit
    last = pw.size if hit is None else hit
    if last < 2:
        return 0.0
    inter = thermo.interference(p.alpha, pw)
    i = np.arange(last - 1)
    pred = p.alpha * (1.0 + pw[i] / (p.alpha * inter[i] + p.gamma0)) * pw[i]
    return float(np.max(np.abs(pred - pw[i + 1]) / pw[i + 1]))


def high_sinr_kkt_residual(scenario, powers, duals):
    """Stationarity ``1/P_i - G_i - price_i`` with both multiplier families."""
    p = scenario.params
    pw = np.asarray(powers, dtype=float)
    denom = thermo.interference(p.alpha, pw) + p.gamma0
    price, parts = implicit.marginal_prices(scenario, pw, duals, "combined")
    parts.append(np.max(np.abs(1.0 / pw - implicit._tail_gains(p.alpha, denom) - price)))
    return float(max(parts))


def low_sinr_kkt_residual(scenario, powers, duals):
    """Log-domain stationarity ``P_i*(dR/dP_i - price_i)`` for ``R = sum SINR``."""
    p = scenario.params
    pw = np.asarray(powers, dtype=float)
    n = p.kappa * (thermo.interference(p.alpha, pw) + p.gamma0)
    grad = 1.0 / n - p.kappa * implicit._tail_sum(p.alpha, pw / n ** 2)
    price, parts = implicit.marginal_prices(scenario, pw, duals, "combined")
    parts.append(np.max(np.abs(pw * (grad - price))))
    return float(max(parts))


# -- regimes ----------------------------------------------------------------

def _relabel(scenario, report, regime, diag):
    """Re-issue an implicit-model report under the combined model."""
    form = thermo.objective_form("combined", regime)
    return make_report(scenario, report.powers, model="combined", form=form,
                       regime=report.regime, duals=report.duals,
                       iterations=report.iterations, kkt_residual=report.kkt_residual,
                       local_only=report.local_only,
                       **dict(report.diagnostics, **diag.as_dict()))


def _solve_high_sinr(scenario, cfg):
    if np.any(scenario.cumulative <= 0):
        raise DegenerateBudget("a zero cumulative budget forces a zero power")
    res = barrier_maximize(implicit.high_sinr_program(scenario, "combined"), cfg)
    powers = np.exp(res.x)
    duals = implicit.split_duals(scenario, "combined", res.multipliers)
    return powers, duals, res.iterations, high_sinr_kkt_residual(scenario, powers, duals), {
        "barrier_residual": res.kkt_residual, "polished": res.polished}


def _link_constraints(params, D):
    """``r_i * kappa*(I_i + Gamma0) / P_i <= 1`` over ``z = (log P, log r)``."""
    kap, alpha = params.kappa, params.alpha
    rows = []
    for i in range(D):
        row = []
        for k in range(i):
            a = np.zeros(2 * D)
            a[D + i], a[k], a[i] = 1.0, 1.0, -1.0
            row.append((kap * alpha ** (i - 1 - k), a))
        a = np.zeros(2 * D)
        a[D + i], a[i] = 1.0, -1.0
        row.append((kap * params.gamma0, a))
        rows.append(row)
    return PosynomialSet.from_rows(rows, 2 * D)


def _widen(pset, n_extra):
    """Pad a posynomial set on ``log P`` with zero exponents for ``log r``."""
    expo = np.hstack([pset.expo, np.zeros((pset.expo.shape[0], n_extra))])
    return PosynomialSet(pset.coef, expo, pset.owner, pset.m)


def _low_sinr_round(scenario, powers, cons, rhs, cfg, warm):
    """One condensation round of ``max sum_i SINR_i``.

    ``sum r`` is replaced by its AGM monomial with weights ``r_i / sum r``,
    leaving a geometric program with a linear objective in ``log r``.
    """
    D = scenario.D
    sinr = thermo.compute_sinr(scenario, powers)
    phi = sinr / np.sum(sinr)
    x0 = implicit.interior_log_point(scenario, "combined", powers)
    r0 = thermo.compute_sinr(scenario, np.exp(x0)) * (1.0 - 1e-6)
    z0 = np.concatenate([x0, np.log(r0)])
    w = np.concatenate([np.zeros(D), phi])
    prog = gp_program(w, None, cons, rhs, z0)
    res = barrier_maximize(prog, cfg, t_start=implicit.WARM_T if warm else None)
    return np.exp(res.x[:D]), res.multipliers, res.iterations


def _solve_low_sinr(scenario, cfg, init=None):
    z = thermo.zero_prefix(scenario)
    sub = scenario.with_energies(scenario.energies[z:])
    n = sub.D
    base, base_rhs = implicit.feasible_set(sub, "combined")
    cons = implicit._stack(_widen(base, n), _link_constraints(sub.params, n))
    rhs = np.concatenate([base_rhs, np.ones(n)])
    powers = strict_start(sub, "combined") if init is None else np.asarray(init, dtype=float)[z:]
    value = float(np.sum(thermo.compute_sinr(sub, powers)))
    history = [value]
    mult = np.zeros(3 * n)
    iterations = 0
    converged = False
    for r in range(cfg.condensation_max_rounds):
        cand, m, its = _low_sinr_round(sub, powers, cons, rhs, cfg, warm=r > 0)
        iterations += its
        cand_value = float(np.sum(thermo.compute_sinr(sub, cand)))
        if cand_value >= value * (1.0 - 1e-12):
            powers, mult = cand, m
        converged = abs(cand_value - value) <= cfg.condensation_tol * value
        value = max(value, cand_value)
        history.append(value)
        if converged:
            break
    # multipliers of log(sum r); rescale to the un-logged objective
    duals = DualState(value * mult[n:2 * n], value * mult[:n])
    kkt = low_sinr_kkt_residual(sub, powers, duals)
    out = (implicit._pad(scenario, z, powers), implicit._pad_duals(scenario, z, duals),
           iterations, kkt, {"rounds": len(history) - 1, "history": history})
    if not converged:
        raise IterationLimitExceeded(
            f"condensation did not settle in {cfg.condensation_max_rounds} rounds", partial=out)
    return out


def low_sinr_score(scenario, powers):
    """``1 / sum SINR``, the quantity the low-SINR condensation minimises."""
    total = float(np.sum(thermo.compute_sinr(scenario, powers)))
    return math.inf if total <= 0 else 1.0 / total


def _solve_once(scenario, regime, cfg, init=None):
    if regime == "general":
        rep = implicit.solve_signomial(scenario, "combined", cfg, init=init)
        powers, duals = rep.powers, rep.duals
        iterations, kkt, extra = rep.iterations, rep.kkt_residual, rep.diagnostics
    elif regime == "low-sinr":
        try:
            powers, duals, iterations, kkt, extra = _solve_low_sinr(scenario, cfg, init)
        except IterationLimitExceeded as exc:
            raise IterationLimitExceeded(
                str(exc), partial=_as_report(scenario, regime, *exc.partial)) from exc
    else:
        powers, duals, iterations, kkt, extra = _solve_high_sinr(scenario, cfg)
    return _as_report(scenario, regime, powers, duals, iterations, kkt, extra)


def _as_report(scenario, regime, powers, duals, iterations, kkt, extra):
    return make_report(scenario, powers, model="combined",
                       form=thermo.objective_form("combined", regime), regime=regime,
                       duals=duals, iterations=iterations, kkt_residual=kkt,
                       local_only=regime != "high-sinr", **extra)


def solve_combined(scenario, regime="general", config=None, heuristic=False):
    """Solve under both temperature constraints.

    The general and low-SINR regimes return local optima; ``heuristic=True``
    adds random restarts (see ``implicit.improve_heuristic``).

    Returns
    -------
    (SolveReport, CombinedDiagnostics)
    """
    cfg = config or SolverConfig()
    _require(scenario)
    if regime not in REGIMES:
        raise ValidationError(f"combined regime must be one of {REGIMES}, got {regime!r}")
    if reduces_to_implicit(scenario):
        if regime == "general":
            rep = implicit.solve_signomial(scenario, "implicit", cfg)
            if heuristic:
                rep = implicit.improve_heuristic(scenario, "implicit", rep, cfg)
        elif regime == "low-sinr":
            rep = implicit.solve_low_sinr(scenario)
        else:
            rep = implicit.solve_high_sinr(scenario, cfg)
        diag = CombinedDiagnostics.from_schedule(scenario, rep.powers)
        return _relabel(scenario, rep, regime, diag), diag

    rep = _solve_once(scenario, regime, cfg)
    if heuristic and regime != "high-sinr":
        low = regime == "low-sinr"
        rep = implicit.improve_heuristic(
            scenario, "combined", rep, cfg,
            solver=lambda init, conf: _solve_once(scenario, regime, conf, init),
            score=(lambda powers: low_sinr_score(scenario, powers)) if low else None)
    diag = CombinedDiagnostics.from_schedule(scenario, rep.powers)
    if diag.reentry:
        log.warning("temperature re-entered below the cap after slot %d", diag.first_hit_slot)
    rep.diagnostics.update(diag.as_dict())
    return rep, diag
