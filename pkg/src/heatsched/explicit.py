"""Explicit peak-temperature model: ``max sum 1/2 log(1 + P_i/sigma2)``
under cumulative energy budgets and ``T_k <= T_c`` in every slot."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import thermo
from .errors import InfeasibleScenario, NotTemperatureLimited, NoValidHitSlot, ValidationError
from .numerics import ConvexProgram, SolverConfig, barrier_maximize, strict_start
from .report import DualState, make_report


@dataclass
class TempLimitedSolution:
    i_star: int
    W: float
    powers: np.ndarray
    lam: np.ndarray


def filter_matrix(alpha, D):
    """Lower-triangular ``M[k, i] = alpha**(k-i)`` so that ``M @ P`` is the
    filtered power."""
    k = np.arange(D)
    expo = k[:, None] - k[None, :]
    return np.where(expo >= 0, alpha ** np.maximum(expo, 0), 0.0)


def explicit_program(scenario):
    """Linear-domain program over ``P``; constraint rows are ordered
    temperature (if ``T_c`` is finite), energy, nonnegativity."""
    p = scenario.params
    D = scenario.D
    s2 = p.sigma2
    blocks, rhs = [], []
    if math.isfinite(p.cap):
        blocks.append(filter_matrix(p.alpha, D))
        rhs.append(np.full(D, p.cap))
    blocks.append(np.tril(np.ones((D, D))))
    rhs.append(scenario.cumulative)
    blocks.append(-np.eye(D))
    rhs.append(np.zeros(D))
    A = np.vstack(blocks)
    b = np.concatenate(rhs)

    def objective(x):
        y = s2 + x
        if np.any(y <= 0):
            return -math.inf, np.zeros(D), np.zeros((D, D))
        return float(np.sum(np.log(y))), 1.0 / y, np.diag(-1.0 / y ** 2)

    def constraints(x):
        return A @ x - b, A

    return ConvexProgram(n=D, objective=objective, constraints=constraints,
                         x0=strict_start(scenario, "explicit"), domain="linear")


def waterfill_powers(params, duals):
    """``1/(sum_{k>=i} lam_k alpha**(k-i) + sum_{k>=i} mu_k) - sigma2``."""
    alpha = params.alpha
    lam = np.asarray(duals.lam, dtype=float)
    level = np.zeros_like(lam)
    acc = 0.0
    for i in range(lam.size - 1, -1, -1):
        acc = lam[i] + alpha * acc
        level[i] = acc
    level = level + np.cumsum(np.asarray(duals.mu, dtype=float)[::-1])[::-1]
    with np.errstate(divide="ignore"):
        return 1.0 / level - params.sigma2


def waterfill_residual(scenario, powers, duals):
    """Largest mismatch to the water-filling form over slots with ``P_i > 0``."""
    wf = waterfill_powers(scenario.params, duals)
    on = np.asarray(powers) > 0
    if not on.any():
        return 0.0
    return float(np.max(np.abs(wf[on] - np.asarray(powers)[on])))


def _zero_report(scenario, regime):
    D = scenario.D
    return make_report(scenario, np.zeros(D), model="explicit", form=thermo.EXPLICIT,
                       regime=regime, duals=DualState(np.zeros(D), np.zeros(D)),
                       trivial=True)


def solve_explicit(scenario, config=None):
    """Global maximiser of the explicit problem via the barrier kernel."""
    cfg = config or SolverConfig()
    params = scenario.params
    params.require_critical()
    D = scenario.D
    z = thermo.zero_prefix(scenario)
    if z == D:
        return _zero_report(scenario, "general")
    sub = scenario.with_energies(scenario.energies[z:])
    res = barrier_maximize(explicit_program(sub), cfg)
    n = sub.D
    powers = np.zeros(D)
    powers[z:] = np.maximum(res.x, 0.0)
    lam = np.zeros(D)
    mu = np.zeros(D)
    off = 0
    if math.isfinite(params.cap):
        lam[z:] = res.multipliers[:n]
        off = n
    mu[z:] = res.multipliers[off:off + n]
    duals = DualState(lam, mu)
    return make_report(scenario, powers, model="explicit", form=thermo.EXPLICIT,
                       regime="general", duals=duals, iterations=res.iterations,
                       kkt_residual=res.kkt_residual, polished=res.polished,
                       waterfill_residual=waterfill_residual(scenario, powers, duals))


def solve_energy_limited(scenario):
    """Taut-string schedule for a scenario whose peak constraint never binds.

    Repeatedly spends the smallest average of the remaining cumulative
    budget; equal rates over each stretch maximise the concave objective.
    """
    params = scenario.params
    params.require_critical()
    if not thermo.is_energy_limited(scenario)[1]:
        raise ValidationError("scenario is not energy limited")
    cum = np.concatenate([[0.0], scenario.cumulative])
    D = scenario.D
    powers = np.zeros(D)
    i = 0
    while i < D:
        k = np.arange(i + 1, D + 1)
        rates = (cum[k] - cum[i]) / (k - i)
        best = rates.min()
        # last slot attaining the minimum closes the stretch
        j = int(k[np.flatnonzero(rates <= best * (1 + 1e-15) + 1e-300)[-1]])
        powers[i:j] = best
        i = j
    level = 1.0 / (powers + params.sigma2)
    mu = level - np.append(level[1:], 0.0)
    duals = DualState(np.zeros(D), mu)
    return make_report(scenario, powers, model="explicit", form=thermo.EXPLICIT,
                       regime="energy-limited", duals=duals,
                       waterfill_residual=waterfill_residual(scenario, powers, duals))


def _hit_candidate(params, D, i_star):
    """Schedule and multipliers when slot ``i_star`` (1-based) is the first
    to reach ``T_c``; ``W`` follows from tightness at that slot."""
    alpha, cap, s2 = params.alpha, params.cap, params.sigma2
    geo = i_star if alpha == 1 else (1 - alpha ** i_star) / (1 - alpha)
    W = i_star * alpha ** i_star / (cap + s2 * geo)
    idx = np.arange(1, D + 1)
    powers = np.where(idx <= i_star, alpha ** idx / W - s2, params.tail_power)
    # S_i = sum_{k>=i} lam_k alpha**k, constant (= W) up to i_star
    S = np.where(idx <= i_star, W, alpha ** idx / (params.tail_power + s2))
    lam = (S - np.append(S[1:], 0.0)) / alpha ** idx
    return W, powers, lam


def solve_temperature_limited(scenario):
    """Line search for the first-hit slot, from ``D`` down to 1.

    A candidate is accepted when, in this order, its powers are positive,
    the peak constraint is slack before the hit, the hit power strictly
    exceeds the holding power, and the implied multipliers are nonnegative.
    """
    params = scenario.params
    params.require_critical()
    if not thermo.is_temperature_limited(scenario):
        raise NotTemperatureLimited("energy budget may bind; use solve_explicit")
    D = scenario.D
    cap, tail = params.cap, params.tail_power
    for i_star in range(D, 0, -1):
        W, powers, lam = _hit_candidate(params, D, i_star)
        head = powers[:i_star]
        if not np.all(head > 0):
            continue
        filt = thermo.filtered_power(params.alpha, powers)
        if np.any(filt[:i_star - 1] >= cap * (1 - 1e-12)):
            continue
        if not powers[i_star - 1] > tail * (1 + 1e-12):
            continue
        if np.any(lam < -1e-12 * W * params.alpha ** -np.arange(1, D + 1)):
            continue
        if not thermo.check_feasible(scenario, powers, "explicit").feasible:
            raise InfeasibleScenario("temperature-limited schedule violates its budget")
        return TempLimitedSolution(i_star, W, powers, np.maximum(lam, 0.0))
    raise NoValidHitSlot("no first-hit slot satisfies the KKT conditions")


def temperature_limited_report(scenario):
    sol = solve_temperature_limited(scenario)
    duals = DualState(sol.lam, np.zeros(scenario.D))
    return make_report(scenario, sol.powers, model="explicit", form=thermo.EXPLICIT,
                       regime="temp-limited", duals=duals, i_star=sol.i_star, W=sol.W,
                       waterfill_residual=waterfill_residual(scenario, sol.powers, duals))
