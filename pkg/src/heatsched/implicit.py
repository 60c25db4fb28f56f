"""Implicit model: past transmissions heat the device and raise the noise
floor of later slots, so ``SINR_i = P_i / (kappa*(I_i + Gamma0))``.

The general problem is a signomial program solved locally by single
condensation; the low-SINR limit has a closed form and the high-SINR
limit is a geometric program with a unique optimum.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import thermo
from .errors import DegenerateBudget, IterationLimitExceeded, NoStrictlyFeasiblePoint, ValidationError
from .numerics import (PosynomialSet, SolverConfig, barrier_maximize,
                       fixed_point_iterate, gp_program, strict_start)
from .report import DualState, make_report

log = logging.getLogger(__name__)

# barrier parameter for condensation rounds after the first
WARM_T = 1e4
# condensation tolerance used inside heuristic restarts
RESTART_TOL = 1e-6
RESTART_ROUNDS = 40
# lower bound on every power in the condensed programs, relative to the
# total budget; without it an optimum at P_i = 0 drives log P_i to -inf
FLOOR_REL = 1e-12
# slots below this share of the total budget are probed for switching off
IDLE_REL = 1e-2


@dataclass
class CondensationState:
    round: int
    powers: np.ndarray
    theta: list
    u: np.ndarray
    v: list
    objective: float
    multipliers: Optional[np.ndarray] = None


@dataclass
class HeuristicState:
    t0: float
    t: float
    round: int


# -- posynomial building blocks (log variables x = log P) -----------------

def _unit(n, k):
    e = np.zeros(n)
    e[k] = 1.0
    return e


def interference_denominators(params, D):
    """``q_i(x) = sum_{k<i} alpha**(i-1-k) e^{x_k} + Gamma0`` for every slot."""
    alpha, g0 = params.alpha, params.gamma0
    rows = [[(alpha ** (i - 1 - k), _unit(D, k)) for k in range(i)] + [(g0, np.zeros(D))]
            for i in range(D)]
    return PosynomialSet.from_rows(rows, D)


def energy_constraints(D):
    return PosynomialSet.from_rows([[(1.0, _unit(D, i)) for i in range(k + 1)]
                                    for k in range(D)], D)


def temperature_constraints(alpha, D):
    return PosynomialSet.from_rows([[(alpha ** (k - i), _unit(D, i)) for i in range(k + 1)]
                                    for k in range(D)], D)


def _stack(a, b):
    return PosynomialSet(np.concatenate([a.coef, b.coef]), np.vstack([a.expo, b.expo]),
                         np.concatenate([a.owner, b.owner + a.m]), a.m + b.m)


def feasible_set(scenario, model):
    """Constraint posynomials and right-hand sides, energy rows first."""
    D = scenario.D
    cons, rhs = energy_constraints(D), scenario.cumulative
    if model == "combined":
        cons = _stack(cons, temperature_constraints(scenario.params.alpha, D))
        rhs = np.concatenate([rhs, np.full(D, scenario.params.cap)])
    return cons, rhs


def power_floor(scenario):
    """Monomial rows ``floor / P_i <= 1``."""
    D = scenario.D
    f = FLOOR_REL * scenario.cumulative[-1]
    return PosynomialSet.from_rows([[(f, -_unit(D, i))] for i in range(D)], D), np.ones(D)


def restricted_set(scenario, model, free):
    """Floored constraint set over the free slots; the other slots are held
    at zero.  Also returns the indices of the surviving rows."""
    cons, rhs = feasible_set(scenario, model)
    low, ones = power_floor(scenario)
    cons, kept = _stack(cons, low).restrict(free)
    return cons, np.concatenate([rhs, ones])[kept], kept


def drop_idle(scenario, powers, score, model="implicit"):
    """Switch near-idle slots off while that lowers ``score``.

    Condensation only creeps towards a zero power, so each round tries the
    jump directly: the slot's power is either discarded or handed to one
    later slot, whichever scores best and stays feasible.
    """
    total = scenario.cumulative[-1]
    powers = np.asarray(powers, dtype=float)
    value = score(powers)
    for i in np.argsort(powers):
        if powers[i] > IDLE_REL * total:
            break
        if powers[i] == 0:
            continue
        best = None
        for j in [None, *range(i + 1, powers.size)]:
            trial = powers.copy()
            trial[i] = 0.0
            if j is not None:
                trial[j] += powers[i]
                if model == "combined" and not thermo.check_feasible(
                        scenario, trial, "combined").feasible:
                    continue
            v = score(trial)
            if v < value:
                best, value = trial, v
        if best is not None:
            powers = best
    return powers, value


def snap_floor(scenario, powers):
    """Report powers resting on the floor as exact zeros."""
    return np.where(powers <= 2.5 * FLOOR_REL * scenario.cumulative[-1], 0.0, powers)


def split_duals(scenario, model, mult):
    D = scenario.D
    lam = mult[D:2 * D] if model == "combined" else np.zeros(D)
    return DualState(np.asarray(lam, dtype=float), np.asarray(mult[:D], dtype=float))


def interior_log_point(scenario, model, powers, free=None):
    """Log of a strictly feasible copy of ``powers`` (scaled towards 0).

    With a ``free`` mask only those slots are returned, kept above the
    floor; the others stay at zero.
    """
    p = np.asarray(powers, dtype=float)
    if free is None:
        cons, rhs = feasible_set(scenario, model)
        p = np.maximum(p, 1e-300)
    else:
        cons, rhs, _ = restricted_set(scenario, model, free)
        p = np.maximum(p[free], 4.0 * FLOOR_REL * scenario.cumulative[-1])
    for shrink in (1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2, 0.1, 0.5):
        x = np.log(p * (1.0 - shrink))
        if np.all(cons.values(x) < rhs):
            return x
    raise NoStrictlyFeasiblePoint("cannot move the schedule into the interior")


def _pad(scenario, z, sub_powers):
    out = np.zeros(scenario.D)
    out[z:] = sub_powers
    return out


def _pad_duals(scenario, z, duals):
    D = scenario.D
    lam, mu = np.zeros(D), np.zeros(D)
    lam[z:] = duals.lam
    mu[z:] = duals.mu
    return DualState(lam, mu)


# -- low SINR --------------------------------------------------------------

def solve_low_sinr(scenario):
    """Save every arrival for the last slot.

    With ``log(1+x) ~ x`` the interference terms only lower the objective,
    so ``sum_i SINR_i <= sum_i P_i/(kappa*Gamma0) <= sum_i E_i/(kappa*Gamma0)``
    and the bound is met by spending everything in slot ``D``.
    """
    scenario.params.require_implicit()
    powers = np.zeros(scenario.D)
    powers[-1] = float(np.sum(scenario.energies))
    return make_report(scenario, powers, model="implicit", form=thermo.LOW_SINR,
                       regime="low-sinr",
                       upper_bound=float(np.sum(scenario.energies)) / (
                           scenario.params.kappa * scenario.params.gamma0))


# -- high SINR -------------------------------------------------------------

def _tail_sum(alpha, values):
    """``out_i = sum_{j>i} alpha**(j-1-i) * values_j`` along the last axis."""
    out = np.zeros_like(values)
    acc = np.zeros(values.shape[:-1])
    for i in range(values.shape[-1] - 2, -1, -1):
        acc = values[..., i + 1] + alpha * acc
        out[..., i] = acc
    return out


def _tail_gains(alpha, denom):
    return _tail_sum(alpha, 1.0 / denom)


def interference_update(powers, mu, scenario):
    """One step of the standard interference map for fixed multipliers.

    ``P_i <- 1 / (sum_{k>=i} mu_k + sum_{j>i} alpha**(j-1-i)/(I_j + Gamma0))``.
    """
    p = scenario.params
    mu = np.asarray(mu, dtype=float)
    if not mu[-1] > 0:
        raise ValidationError("the last multiplier must be positive")
    if np.any(mu < 0):
        raise ValidationError("multipliers must be nonnegative")
    pw = np.asarray(powers, dtype=float)
    denom = thermo.interference(p.alpha, pw) + p.gamma0
    tail_mu = np.cumsum(mu[::-1])[::-1]
    return 1.0 / (tail_mu + _tail_gains(p.alpha, denom))


def high_sinr_kkt_residual(scenario, powers, mu):
    """Stationarity ``1/P_i - G_i - sum_{k>=i} mu_k`` plus complementary
    slackness of the energy budgets."""
    p = scenario.params
    pw = np.asarray(powers, dtype=float)
    mu = np.asarray(mu, dtype=float)
    denom = thermo.interference(p.alpha, pw) + p.gamma0
    stat = 1.0 / pw - _tail_gains(p.alpha, denom) - np.cumsum(mu[::-1])[::-1]
    slack = scenario.cumulative - np.cumsum(pw)
    return float(max(np.max(np.abs(stat)), np.max(np.abs(mu * slack)),
                     np.max(-mu, initial=0.0)))


def high_sinr_program(scenario, model, x0=None):
    """``max sum_i [x_i - log(I_i(e^x) + Gamma0)]`` over the budgets."""
    D = scenario.D
    cons, rhs = feasible_set(scenario, model)
    if x0 is None:
        x0 = np.log(strict_start(scenario, model))
    return gp_program(np.ones(D), interference_denominators(scenario.params, D),
                      cons, rhs, x0)


def solve_high_sinr(scenario, config=None):
    """Unique optimum of the high-SINR problem via its log-domain convex
    equivalent; the energy multipliers carry over unchanged to the power
    domain."""
    cfg = config or SolverConfig()
    scenario.params.require_implicit()
    if np.any(scenario.cumulative <= 0):
        raise DegenerateBudget("a zero cumulative budget forces a zero power")
    res = barrier_maximize(high_sinr_program(scenario, "implicit"), cfg)
    powers = np.exp(res.x)
    duals = split_duals(scenario, "implicit", res.multipliers)
    return make_report(scenario, powers, model="implicit", form=thermo.HIGH_SINR,
                       regime="high-sinr", duals=duals, iterations=res.iterations,
                       kkt_residual=high_sinr_kkt_residual(scenario, powers, duals.mu),
                       barrier_residual=res.kkt_residual, polished=res.polished)


def solve_high_sinr_fixed_point(scenario, mu, config=None, init=None):
    """Fixed point of ``interference_update`` for the given multipliers."""
    cfg = config or SolverConfig()
    mu = np.asarray(mu, dtype=float)
    p0 = np.ones(scenario.D) if init is None else np.asarray(init, dtype=float)
    point, _ = fixed_point_iterate(lambda q: interference_update(q, mu, scenario), p0,
                                   tol=cfg.tol_step, max_iter=cfg.max_iter * 10)
    return point


# -- general SINR: single condensation ------------------------------------

def posynomial_terms(scenario, powers):
    """Terms ``v^i`` of each denominator ``u_i = kappa*I_i + P_i + kappa*Gamma0``.

    ``v^i`` lists the interference terms of slots ``1..i-1``, then ``P_i``,
    then the noise floor.
    """
    p = scenario.params
    pw = np.asarray(powers, dtype=float)
    v = []
    for i in range(pw.size):
        inter = p.kappa * p.alpha ** (i - 1 - np.arange(i)) * pw[:i]
        v.append(np.concatenate([inter, [pw[i], p.kappa * p.gamma0]]))
    u = np.array([vi.sum() for vi in v])
    return u, v


def agm_weights(scenario, powers):
    u, v = posynomial_terms(scenario, powers)
    return [vi / ui for vi, ui in zip(v, u)]


def condensed_monomial(scenario, theta, powers):
    """Evaluate ``prod_k (v_k/theta_k)**theta_k`` for each slot at ``powers``;
    never exceeds ``u_i(powers)``."""
    _, v = posynomial_terms(scenario, powers)
    out = np.empty(len(v))
    for i, (vi, th) in enumerate(zip(v, theta)):
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(th > 0, th * (np.log(vi) - np.log(th)), 0.0)
        out[i] = math.exp(float(np.sum(terms)))
    return out


def signomial_objective(scenario, powers):
    """``prod_i 1/(1 + SINR_i)``, to be minimised."""
    sinr = thermo.compute_sinr(scenario, powers)
    return float(np.exp(-np.sum(np.log1p(sinr), axis=-1)))


def _condensed_weights(scenario, theta):
    """Linear coefficients and constant of ``log`` of the product of the
    condensed monomials, as a function of ``x = log P``."""
    p = scenario.params
    D = len(theta)
    w = np.zeros(D)
    const = 0.0
    for i, th in enumerate(theta):
        w[:i + 1] += th[:i + 1]
        coef = np.concatenate([p.kappa * p.alpha ** (i - 1 - np.arange(i)), [1.0, p.kappa * p.gamma0]])
        pos = th > 0
        const += float(np.sum(th[pos] * (np.log(coef[pos]) - np.log(th[pos]))))
        # the monomial has no x dependence through the noise-floor term
    return w, const - D * math.log(p.kappa)


def initial_state(scenario, powers):
    pw = np.asarray(powers, dtype=float)
    u, v = posynomial_terms(scenario, pw)
    return CondensationState(0, pw, [vi / ui for vi, ui in zip(v, u)], u, v,
                             signomial_objective(scenario, pw))


def condense_once(state, scenario, model, config=None):
    """Replace each ``u_i`` by its AGM monomial at the current powers and
    solve the resulting geometric program over the slots that are on.

    A round that would raise the signomial objective keeps the current
    powers.  Near-idle slots are then switched off when that helps.
    """
    cfg = config or SolverConfig()
    D = scenario.D
    free = state.powers > 0
    w, const = _condensed_weights(scenario, state.theta)
    cons, rhs, kept = restricted_set(scenario, model, free)
    dens, _ = interference_denominators(scenario.params, D).restrict(free)
    x0 = interior_log_point(scenario, model, state.powers, free)
    prog = gp_program(w[free], dens, cons, rhs, x0, const=const)
    res = barrier_maximize(prog, cfg, t_start=WARM_T if state.round > 0 else None)
    powers = np.zeros(D)
    powers[free] = np.exp(res.x)
    obj = signomial_objective(scenario, powers)
    mult = np.zeros(D * (3 if model == "combined" else 2))
    mult[kept] = res.multipliers
    # roundoff-level increases are accepted so the multipliers stay current
    if obj > state.objective * (1.0 + 1e-12):
        powers, obj, mult = state.powers, state.objective, state.multipliers
    powers, obj = drop_idle(scenario, powers, lambda q: signomial_objective(scenario, q),
                            model)
    nxt = initial_state(scenario, powers)
    nxt.round = state.round + 1
    nxt.objective = obj
    nxt.multipliers = mult
    return nxt


def rate_gradient(scenario, powers):
    """Gradient of ``sum log(1 + SINR)`` with respect to the powers."""
    p = scenario.params
    pw = np.asarray(powers, dtype=float)
    kap = p.kappa
    n = kap * (thermo.interference(p.alpha, pw) + p.gamma0)
    u = n + pw
    return 1.0 / u + kap * _tail_sum(p.alpha, 1.0 / u - 1.0 / n)


def _rate_hessian(scenario, powers):
    """Central differences of the analytic gradient."""
    n = powers.size
    H = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1e-6 * (1.0 + powers[j])
        H[:, j] = (rate_gradient(scenario, powers + e) - rate_gradient(scenario, powers - e)) / (
            2.0 * e[j])
    return 0.5 * (H + H.T)


def _linear_rows(scenario, model):
    D = scenario.D
    A, b = np.tril(np.ones((D, D))), scenario.cumulative
    if model == "combined":
        k = np.arange(D)
        expo = k[:, None] - k[None, :]
        T = np.where(expo >= 0, scenario.params.alpha ** np.maximum(expo, 0), 0.0)
        A, b = np.vstack([A, T]), np.concatenate([b, np.full(D, scenario.params.cap)])
    return A, b


def polish_kkt(scenario, powers, duals, model, iters=30):
    """Newton on the KKT equations of the face the condensation settled on.

    Switched-off slots stay off and the tight rows hold with equality.
    Returns ``(powers, duals)``, or ``None`` when the refined point fails
    the sign, feasibility or objective checks.
    """
    D = scenario.D
    pw = np.asarray(powers, dtype=float)
    free = pw > 0
    A, b = _linear_rows(scenario, model)
    scale = float(np.max(b))
    act = np.flatnonzero((b - A @ pw <= 1e-6 * scale) & np.any(A[:, free] != 0, axis=1))
    mult = np.concatenate([duals.mu, duals.lam]) if model == "combined" else duals.mu.copy()
    Af, bf = A[act][:, free], b[act]
    x, nu = pw[free].copy(), mult[act].copy()
    n = x.size
    full = pw.copy()
    for _ in range(iters):
        full[free] = x
        g = rate_gradient(scenario, full)[free]
        r = np.concatenate([g - Af.T @ nu, Af @ x - bf])
        if not np.all(np.isfinite(r)):
            return None
        if np.max(np.abs(r)) <= 1e-14 * (1.0 + np.max(np.abs(g))):
            break
        K = np.zeros((n + act.size, n + act.size))
        K[:n, :n] = _rate_hessian(scenario, full)[free][:, free]
        K[:n, n:] = -Af.T
        K[n:, :n] = Af
        step = np.linalg.lstsq(K, -r, rcond=None)[0]
        x, nu = x + step[:n], nu + step[n:]
    full[free] = x
    if np.any(x <= 0) or np.any(nu < -1e-12 * (1.0 + np.max(np.abs(nu), initial=0.0))):
        return None
    if np.any(A @ full > b + 1e-12 * scale):
        return None
    if signomial_objective(scenario, full) > signomial_objective(scenario, pw) * (1.0 + 1e-12):
        return None
    mult[:] = 0.0
    mult[act] = np.maximum(nu, 0.0)
    lam = mult[D:] if model == "combined" else np.zeros(D)
    return full, DualState(lam, mult[:D])


def blocked_slots(scenario, powers, duals, model, tol=1e-9):
    """Switched-off slots whose marginal rate beats their price."""
    price, _ = marginal_prices(scenario, powers, duals, model)
    gain = rate_gradient(scenario, powers) - price
    return np.flatnonzero((np.asarray(powers) == 0) & (gain > tol * (1.0 + np.abs(price))))


def release(scenario, model, state, slots):
    """Switch ``slots`` back on at a small power if the objective drops;
    returns the new state or ``None``."""
    total = scenario.cumulative[-1]
    for share in (1e-3, 1e-5, 1e-7):
        trial = state.powers.copy()
        trial[slots] = share * total
        free = trial > 0
        try:
            x = interior_log_point(scenario, model, trial, free)
        except NoStrictlyFeasiblePoint:
            continue
        trial[free] = np.exp(x)
        nxt = initial_state(scenario, trial)
        if nxt.objective < state.objective:
            nxt.round = state.round
            nxt.multipliers = state.multipliers
            return nxt
    return None


def general_kkt_residual(scenario, powers, duals, model):
    """Log-domain stationarity ``P_i * (dR/dP_i - price_i)`` of the rate
    ``R = sum log(1 + SINR)``, dual feasibility at switched-off slots and
    complementary slackness."""
    pw = np.asarray(powers, dtype=float)
    grad = rate_gradient(scenario, pw)
    price, parts = marginal_prices(scenario, pw, duals, model)
    parts.append(np.max(np.abs(pw * (grad - price))))
    parts.append(np.max(np.where(pw == 0, grad - price, 0.0), initial=0.0))
    return float(max(parts))


def marginal_prices(scenario, powers, duals, model):
    """Price of one unit of power in each slot, ``sum_{k>=i} mu_k`` plus
    ``sum_{k>=i} lam_k alpha**(k-i)`` for the combined model, and the
    complementary-slackness violations of the active families."""
    p = scenario.params
    pw = np.asarray(powers, dtype=float)
    price = np.cumsum(duals.mu[::-1])[::-1]
    parts = [np.max(np.abs(duals.mu * (scenario.cumulative - np.cumsum(pw)))),
             np.max(-duals.mu, initial=0.0)]
    if model == "combined":
        lam_tail = np.zeros_like(pw)
        acc = 0.0
        for i in range(pw.size - 1, -1, -1):
            acc = duals.lam[i] + p.alpha * acc
            lam_tail[i] = acc
        price = price + lam_tail
        filt = thermo.filtered_power(p.alpha, pw)
        parts.append(np.max(np.abs(duals.lam * (p.cap - filt))))
        parts.append(np.max(-duals.lam, initial=0.0))
    return price, parts


def solve_signomial(scenario, model="implicit", config=None, init=None):
    """Local optimum of the general-SINR problem by repeated condensation.

    Stops when the relative change of the signomial objective falls below
    ``config.condensation_tol``.
    """
    cfg = config or SolverConfig()
    params = scenario.params
    params.require_implicit()
    if model == "combined":
        params.require_critical()
    elif model != "implicit":
        raise ValidationError(f"condensation supports implicit/combined, got {model!r}")
    form = thermo.GENERAL if model == "implicit" else thermo.COMBINED
    D = scenario.D
    z = thermo.zero_prefix(scenario)
    if z == D:
        return make_report(scenario, np.zeros(D), model=model, form=form, regime="general",
                           duals=DualState(np.zeros(D), np.zeros(D)), local_only=True,
                           rounds=0, history=[1.0])
    sub = scenario.with_energies(scenario.energies[z:])
    start = strict_start(sub, model) if init is None else np.asarray(init, dtype=float)[z:]
    state = initial_state(sub, start)
    history = [state.objective]
    iterations = 0
    converged = False
    releases = 0
    for _ in range(cfg.condensation_max_rounds):
        nxt = condense_once(state, sub, model, cfg)
        history.append(nxt.objective)
        converged = abs(state.objective - nxt.objective) <= cfg.condensation_tol * state.objective
        state = nxt
        iterations += 1
        if converged and state.multipliers is not None and releases < sub.D:
            # a slot switched off too eagerly is worth one more pass
            blocked = blocked_slots(sub, state.powers, split_duals(sub, model, state.multipliers),
                                    model)
            back = release(sub, model, state, blocked) if blocked.size else None
            if back is not None:
                releases += 1
                state = back
                history.append(state.objective)
                converged = False
        if converged:
            break
    mult = state.multipliers if state.multipliers is not None else np.zeros(
        sub.D * (2 if model == "combined" else 1))
    duals = split_duals(sub, model, mult)
    powers = snap_floor(sub, state.powers)
    kkt = general_kkt_residual(sub, powers, duals, model)
    polished = polish_kkt(sub, powers, duals, model) if converged else None
    if polished is not None:
        kkt_p = general_kkt_residual(sub, *polished, model)
        if kkt_p < kkt:
            (powers, duals), kkt = polished, kkt_p
            history.append(signomial_objective(sub, powers))
    report = make_report(scenario, _pad(scenario, z, powers), model=model, form=form,
                         regime="general", duals=_pad_duals(scenario, z, duals),
                         iterations=iterations, kkt_residual=kkt, local_only=True,
                         rounds=iterations, history=history)
    if not converged:
        raise IterationLimitExceeded(
            f"condensation did not settle in {cfg.condensation_max_rounds} rounds",
            partial=report)
    return report


def random_interior(scenario, model, rng, idle=1.0 / 3.0):
    """Random strictly feasible schedule built slot by slot; each slot is
    nearly idle with probability ``idle`` so restarts also probe the
    boundary where many local optima sit."""
    p = scenario.params
    cum = scenario.cumulative
    temp = model == "combined"
    out = np.zeros(scenario.D)
    used = filt = 0.0
    for k in range(scenario.D):
        room = cum[k] - used
        if temp:
            room = min(room, p.cap - p.alpha * filt)
        frac = 1e-3 if rng.random() < idle else rng.uniform(0.02, 0.98)
        out[k] = frac * room
        used += out[k]
        filt = p.alpha * filt + out[k]
    return out


def improve_heuristic(scenario, model, report, config=None, solver=None, score=None):
    """Try to beat a local optimum: restart from random interior schedules
    and keep a restart only when its score is at most ``t0 / heuristic_alpha``;
    ``t0`` then drops to that value.

    ``solver(init, config)`` returns a report and ``score(powers)`` is minimised;
    they default to condensation and the signomial objective.  The
    returned report carries the ``t0`` sequence in
    ``diagnostics["t0_history"]``.
    """
    cfg = config or SolverConfig()
    if scenario.D == 1 or thermo.zero_prefix(scenario) >= scenario.D - 1:
        return report
    if solver is None:
        def solver(init, conf):
            return solve_signomial(scenario, model, conf, init=init)
    if score is None:
        def score(powers):
            return signomial_objective(scenario, powers)
    t0 = score(report.powers)
    best = report
    history = [t0]
    rng = np.random.default_rng(cfg.seed)
    # restarts only locate a basin; the winner is refined at full tolerance
    rough = replace(cfg, condensation_tol=max(cfg.condensation_tol, RESTART_TOL),
                    condensation_max_rounds=min(cfg.condensation_max_rounds, RESTART_ROUNDS))
    for r in range(cfg.heuristic_rounds):
        start = random_interior(scenario, model, rng)
        try:
            cand = solver(start, rough)
        except IterationLimitExceeded as exc:
            # a slow restart still yields a feasible schedule worth scoring
            cand = exc.partial
        except NoStrictlyFeasiblePoint as exc:
            cand = None
            log.debug("heuristic round %d failed: %s", r, exc)
        if cand is None:
            history.append(t0)
            continue
        t = score(cand.powers)
        if t <= t0 / cfg.heuristic_alpha:
            t0, best = t, cand
        history.append(t0)
    if best is not report:
        try:
            fine = solver(best.powers, cfg)
            if score(fine.powers) <= t0:
                best = fine
        except IterationLimitExceeded as exc:
            log.debug("refining the heuristic winner stopped early: %s", exc)
            if exc.partial is not None and score(exc.partial.powers) <= t0:
                best = exc.partial
        except NoStrictlyFeasiblePoint as exc:
            log.debug("refining the heuristic winner failed: %s", exc)
    return replace(best, diagnostics=dict(best.diagnostics, t0_history=history,
                                          improved=best is not report))
