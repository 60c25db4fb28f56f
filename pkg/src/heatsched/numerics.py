"""Solver kernels: log-barrier interior point, bisection, fixed point
iteration and the exhaustive grid oracle used for verification."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import thermo
from .errors import (BracketInvalid, HorizonTooLarge, IterationLimitExceeded,
                     NoStrictlyFeasiblePoint, ValidationError)


@dataclass(frozen=True)
class SolverConfig:
    tol_kkt: float = 1e-8
    tol_step: float = 1e-10
    max_iter: int = 10000
    barrier_t0: float = 1.0
    barrier_mult: float = 10.0
    backtrack_alpha: float = 0.25
    backtrack_beta: float = 0.5
    condensation_tol: float = 1e-9
    condensation_max_rounds: int = 500
    heuristic_alpha: float = 1.05
    heuristic_rounds: int = 20
    seed: int = 0

    def __post_init__(self):
        for name in ("tol_kkt", "tol_step", "barrier_t0", "condensation_tol"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive")
        if self.max_iter < 1 or self.condensation_max_rounds < 1:
            raise ValidationError("iteration caps must be positive")
        if not self.barrier_mult > 1:
            raise ValidationError("barrier_mult must exceed 1")
        if not 0 < self.backtrack_alpha < 0.5 or not 0 < self.backtrack_beta < 1:
            raise ValidationError("invalid backtracking constants")
        if not self.heuristic_alpha > 1:
            raise ValidationError("heuristic_alpha must exceed 1")


@dataclass
class ConvexProgram:
    """``max f(x)  s.t.  g_j(x) <= 0`` with ``f`` concave and ``g_j`` convex.

    ``objective(x)`` returns ``(f, grad, hess)``; ``constraints(x)`` returns
    ``(g, jac)`` with ``jac`` of shape ``(m, n)``.  ``constraint_hessian(x, w)``
    returns ``sum_j w_j * hess g_j(x)`` and may be omitted for affine
    constraints.  ``domain`` is ``"linear"`` (powers) or ``"log"``
    (log-powers).
    """

    n: int
    objective: Callable
    constraints: Callable
    constraint_hessian: Optional[Callable] = None
    x0: Optional[np.ndarray] = None
    domain: str = "linear"
    value: Optional[Callable] = None
    constraint_value: Optional[Callable] = None

    def objective_value(self, x):
        if self.value is not None:
            return self.value(x)
        return self.objective(x)[0]

    def constraint_values(self, x):
        if self.constraint_value is not None:
            return self.constraint_value(x)
        return self.constraints(x)[0]

    def lagrangian_hessian(self, x, lam):
        h = self.objective(x)[2]
        if self.constraint_hessian is not None:
            h = h - self.constraint_hessian(x, lam)
        return h


@dataclass
class BarrierResult:
    x: np.ndarray
    multipliers: np.ndarray
    kkt_residual: float
    iterations: int
    polished: bool = False


def kkt_residual(program, x, lam):
    """Largest of stationarity, complementarity, primal and dual violation."""
    _, df, _ = program.objective(x)
    g, J = program.constraints(x)
    parts = [np.max(np.abs(df - J.T @ lam), initial=0.0),
             np.max(np.abs(lam * g), initial=0.0),
             np.max(g, initial=0.0),
             np.max(-lam, initial=0.0)]
    return float(max(parts))


def _solve_sym(H, rhs):
    try:
        return np.linalg.solve(H, rhs)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(H, rhs, rcond=None)[0]


def _center(program, x, t, cfg, budget, dec_tol=1e-12):
    """Newton centering of ``-t f - sum log(-g)``; returns (x, newton steps)."""
    def phi(z):
        g = program.constraint_values(z)
        if np.any(g >= 0) or not np.all(np.isfinite(g)):
            return math.inf
        f = program.objective_value(z)
        if not math.isfinite(f):
            return math.inf
        return -t * f - np.sum(np.log(-g))

    steps = 0
    while steps < budget:
        f, df, d2f = program.objective(x)
        g, J = program.constraints(x)
        d = 1.0 / (-g)
        grad = -t * df + J.T @ d
        H = -t * d2f + (J.T * d ** 2) @ J
        if program.constraint_hessian is not None:
            H = H + program.constraint_hessian(x, d)
        dx = _solve_sym(H, -grad)
        dec2 = float(-grad @ dx)
        steps += 1
        if dec2 / 2.0 <= dec_tol or not np.isfinite(dec2):
            break
        phi0 = phi(x)
        slope = float(grad @ dx)
        s = 1.0
        while phi(x + s * dx) > phi0 + cfg.backtrack_alpha * s * slope:
            s *= cfg.backtrack_beta
            if s < 1e-20:
                break
        if s < 1e-20:
            break
        x = x + s * dx
        if s * np.max(np.abs(dx)) <= cfg.tol_step * (1.0 + np.max(np.abs(x))):
            break
    return x, steps


def _polish(program, x, lam):
    """Newton on the KKT equations of the identified active set.

    Returns ``(x, lam)`` or ``None`` when the refined point fails the sign
    or feasibility checks."""
    g, _ = program.constraints(x)
    active = lam > -g
    n = program.n
    idx = np.flatnonzero(active)
    z = x.copy()
    la = lam[idx].copy()
    full = np.zeros_like(lam)
    for _ in range(30):
        full[:] = 0.0
        full[idx] = la
        _, df, _ = program.objective(z)
        g, J = program.constraints(z)
        JA = J[idx]
        r = np.concatenate([df - JA.T @ la, g[idx]])
        if not np.all(np.isfinite(r)):
            return None
        if np.max(np.abs(r), initial=0.0) <= 1e-15 * (1.0 + np.max(np.abs(df))):
            break
        K = np.zeros((n + idx.size, n + idx.size))
        K[:n, :n] = program.lagrangian_hessian(z, full)
        K[:n, n:] = -JA.T
        K[n:, :n] = JA
        step = np.linalg.lstsq(K, -r, rcond=None)[0]
        z = z + step[:n]
        la = la + step[n:]
    if not np.all(np.isfinite(z)):
        return None
    lam_scale = 1.0 + np.max(np.abs(la), initial=0.0)
    if np.any(la < -1e-9 * lam_scale):
        return None
    full[:] = 0.0
    full[idx] = np.maximum(la, 0.0)
    g, _ = program.constraints(z)
    if not np.all(np.isfinite(g)) or not math.isfinite(program.objective_value(z)):
        return None
    if np.any(g > 1e-12 * (1.0 + np.max(np.abs(z)))):
        return None
    return z, full


def _barrier_path(program, x, t, m, cfg):
    iters = 0
    while True:
        last = m == 0 or 1.0 / t < cfg.tol_kkt
        # intermediate centres only steer the path; the last one is solved tightly
        x, steps = _center(program, x, t, cfg, cfg.max_iter - iters,
                           dec_tol=1e-12 if last else 1e-3)
        iters += steps
        if iters >= cfg.max_iter:
            raise IterationLimitExceeded(f"barrier method exceeded {cfg.max_iter} Newton steps")
        if last:
            return x, t, iters
        t *= cfg.barrier_mult


def barrier_maximize(program, config=None, x0=None, t_start=None):
    """Maximise a concave program with the log-barrier method.

    Multipliers are read off the barrier terms, ``lam_j = 1/(t * -g_j)``,
    then an active-set Newton refinement is attempted on the KKT equations
    and kept when it verifies.

    Raises
    ------
    NoStrictlyFeasiblePoint
        The starting point does not satisfy every constraint strictly.
    IterationLimitExceeded
        More than ``config.max_iter`` Newton steps were needed.
    """
    cfg = config or SolverConfig()
    x = np.array(program.x0 if x0 is None else x0, dtype=float)
    g, _ = program.constraints(x)
    if not np.all(np.isfinite(x)) or np.any(g >= 0):
        raise NoStrictlyFeasiblePoint("starting point is not strictly feasible")
    m = g.size
    t = cfg.barrier_t0 if t_start is None else t_start
    # trial points far outside a log domain overflow to inf and are rejected
    with np.errstate(over="ignore", invalid="ignore"):
        x, t, iters = _barrier_path(program, x, t, m, cfg)
        g, _ = program.constraints(x)
        lam = 1.0 / (t * -g) if m else np.zeros(0)
        res = kkt_residual(program, x, lam)
        refined = _polish(program, x, lam)
    if refined is not None:
        z, la = refined
        res_z = kkt_residual(program, z, la)
        if res_z <= max(res, cfg.tol_kkt):
            return BarrierResult(z, la, res_z, iters, polished=True)
    return BarrierResult(x, lam, res, iters)


def bisect_root(f, lo, hi, tol=1e-12, max_iter=200):
    """Root of a continuous ``f`` on ``[lo, hi]`` with ``f(lo)*f(hi) <= 0``."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if flo * fhi > 0 or not lo < hi:
        raise BracketInvalid(f"f does not change sign on [{lo}, {hi}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def fixed_point_iterate(mapping, init, tol=1e-12, max_iter=10000):
    """Iterate ``P <- mapping(P)`` until ``||mapping(P) - P||_inf <= tol``.

    Returns the point and the number of updates applied.
    """
    p = np.asarray(init, dtype=float)
    for k in range(max_iter + 1):
        nxt = np.asarray(mapping(p), dtype=float)
        if np.max(np.abs(nxt - p), initial=0.0) <= tol:
            return p, k
        p = nxt
    raise IterationLimitExceeded(
        f"fixed point not reached in {max_iter} iterations; the map may not be standard")


class PosynomialSet:
    """A stack of posynomials in log variables, ``q_j(z) = sum_t c_t exp(A_t z)``.

    Terms are stored flat; ``owner[t]`` names the posynomial term ``t``
    belongs to.
    """

    def __init__(self, coef, expo, owner, m):
        self.coef = np.asarray(coef, dtype=float)
        self.expo = np.asarray(expo, dtype=float)
        self.owner = np.asarray(owner, dtype=np.int64)
        self.m = int(m)
        if np.any(self.coef <= 0):
            raise ValidationError("posynomial coefficients must be positive")
        self._log_coef = np.log(self.coef)
        self._gather = np.zeros((self.m, self.coef.size))
        self._gather[self.owner, np.arange(self.coef.size)] = 1.0

    @classmethod
    def from_rows(cls, rows, n):
        """``rows`` is a list of posynomials, each a list of ``(c, a)``."""
        coef, expo, owner = [], [], []
        for j, row in enumerate(rows):
            for c, a in row:
                coef.append(c)
                expo.append(a)
                owner.append(j)
        return cls(coef, np.reshape(expo, (-1, n)), owner, len(rows))

    def restrict(self, free):
        """Send the variables outside ``free`` to ``-inf``.

        Terms involving them vanish and posynomials left empty are dropped.
        Returns the set over the free variables and the indices of the
        surviving posynomials.
        """
        free = np.asarray(free, dtype=bool)
        keep = ~np.any(self.expo[:, ~free] != 0, axis=1)
        rows = np.unique(self.owner[keep])
        remap = np.full(self.m, -1)
        remap[rows] = np.arange(rows.size)
        return (PosynomialSet(self.coef[keep], self.expo[keep][:, free],
                              remap[self.owner[keep]], rows.size), rows)

    def terms(self, z):
        return np.exp(self._log_coef + self.expo @ z)

    def values(self, z):
        return self._gather @ self.terms(z)

    def jacobian(self, z):
        return self._gather @ (self.terms(z)[:, None] * self.expo)

    def evaluate(self, z):
        e = self.terms(z)
        return self._gather @ e, self._gather @ (e[:, None] * self.expo)

    def weighted_hessian(self, z, w):
        e = self.terms(z) * np.asarray(w)[self.owner]
        return (self.expo.T * e) @ self.expo

    def log_values(self, z):
        return float(np.sum(np.log(self.values(z))))

    def log_sum(self, z):
        """``sum_j log q_j(z)`` with gradient and Hessian."""
        e = self.terms(z)
        q = self._gather @ e
        p = e / q[self.owner]
        G = self._gather @ (p[:, None] * self.expo)
        H = (self.expo.T * p) @ self.expo - G.T @ G
        return float(np.sum(np.log(q))), G.sum(axis=0), H


def gp_program(weights, denominators, constraints, rhs, x0, const=0.0):
    """Log-domain program ``max w.z - sum_j log q_j(z) + const`` subject to
    ``constraints(z) <= rhs`` (a convex geometric program)."""
    w = np.asarray(weights, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    n = w.size

    def objective(z):
        if denominators is None:
            return float(w @ z) + const, w.copy(), np.zeros((n, n))
        v, g, h = denominators.log_sum(z)
        return float(w @ z) - v + const, w - g, -h

    def value(z):
        v = 0.0 if denominators is None else denominators.log_values(z)
        return float(w @ z) - v + const

    def cons(z):
        g, J = constraints.evaluate(z)
        return g - rhs, J

    def cons_value(z):
        return constraints.values(z) - rhs

    return ConvexProgram(n=n, objective=objective, constraints=cons,
                         constraint_hessian=constraints.weighted_hessian,
                         x0=np.asarray(x0, dtype=float), domain="log",
                         value=value, constraint_value=cons_value)


def strict_start(scenario, model):
    """Uniform strictly feasible schedule, halved until strictly interior.

    Slots must have a positive cumulative budget; callers drop leading
    zero-energy slots first.
    """
    e = scenario.energies
    cum = scenario.cumulative
    if cum[0] <= 0:
        raise NoStrictlyFeasiblePoint("first slot has no energy")
    level = float(e.min()) if e.min() > 0 else float(np.min(cum / np.arange(1, e.size + 1)))
    if model in ("explicit", "combined") and math.isfinite(scenario.params.cap):
        level = min(level, scenario.params.tail_power) / 2.0
    p = np.full(e.size, level)
    for _ in range(2000):
        ok = np.all(np.cumsum(p) < cum) and p[0] > 0
        if ok and model in ("explicit", "combined"):
            ok = np.all(thermo.filtered_power(scenario.params.alpha, p) < scenario.params.cap)
        if ok:
            return p
        p = p / 2.0
    raise NoStrictlyFeasiblePoint("could not construct an interior schedule")


@dataclass
class OracleResult:
    powers: np.ndarray
    objective: float
    gap: float
    gap_is_bound: bool
    step: float
    points: int


def _grid_points(scenario, model, step, positive):
    """All grid schedules ``P = n*step`` satisfying the constraints."""
    alpha = scenario.params.alpha
    cum = scenario.cumulative
    cap = scenario.params.cap if model != "implicit" else math.inf
    slack = 1.0 + thermo.EPS_FEAS
    lo = 1 if positive else 0
    idx = np.zeros((1, 0), dtype=np.int64)
    used = np.zeros(1)
    filt = np.zeros(1)
    for k in range(scenario.D):
        room = cum[k] * slack - used
        if math.isfinite(cap):
            room = np.minimum(room, cap * slack - alpha * filt)
        top = np.floor(np.maximum(room, -step) / step + 1e-9).astype(np.int64)
        counts = np.maximum(top - lo + 1, 0)
        rows = np.repeat(np.arange(idx.shape[0]), counts)
        offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        new = lo + offsets
        idx = np.column_stack([idx[rows], new])
        used = used[rows] + new * step
        filt = alpha * filt[rows] + new * step
        if idx.shape[0] == 0:
            break
    return idx * step


def oracle_gap(scenario, form, step, best=None):
    """Upper bound on ``optimum - best grid value`` (an estimate for the
    high-SINR form, which is not Lipschitz at zero power)."""
    p = scenario.params
    D = scenario.D
    if form == thermo.EXPLICIT:
        return D * 0.5 * math.log1p(step / p.sigma2), True
    floor = p.kappa * p.gamma0
    if form == thermo.LOW_SINR:
        return D * step / floor, True
    if form == thermo.HIGH_SINR:
        b = np.maximum(np.asarray(best, dtype=float), step)
        return float(np.sum(0.5 * np.log1p(step / b))), False
    return D * 0.5 * math.log1p(step / floor), True


def grid_oracle(scenario, model, regime="general", resolution=0.01, chunk=200000):
    """Exhaustive search over ``P_i = n_i * resolution * max(E)``.

    Raises
    ------
    HorizonTooLarge
        For more than four slots.
    """
    if scenario.D > 4:
        raise HorizonTooLarge(f"grid oracle supports D <= 4, got {scenario.D}")
    if not resolution > 0:
        raise ValidationError("resolution must be positive")
    if model in ("explicit", "combined"):
        scenario.params.require_critical()
    form = thermo.objective_form(model, regime)
    emax = float(scenario.energies.max())
    if emax == 0:
        zero = np.zeros(scenario.D)
        val = float(thermo.objective(scenario, zero, form))
        return OracleResult(zero, val, 0.0, True, 0.0, 1)
    step = resolution * emax
    pts = _grid_points(scenario, model, step, positive=form == thermo.HIGH_SINR)
    if pts.shape[0] == 0:
        raise ValidationError("no feasible grid point; resolution too coarse")
    best_val, best = -math.inf, None
    for start in range(0, pts.shape[0], chunk):
        block = pts[start:start + chunk]
        vals = thermo.objective(scenario, block, form)
        j = int(np.argmax(vals))
        if vals[j] > best_val:
            best_val, best = float(vals[j]), block[j].copy()
    gap, exact = oracle_gap(scenario, form, step, best)
    return OracleResult(best, best_val, gap, exact, step, int(pts.shape[0]))
