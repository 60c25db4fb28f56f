"""Slotted thermal dynamics, SINR and objective evaluation.

The transmitter temperature at the end of slot ``k`` follows the first
order recursion ``T_k = alpha*T_{k-1} + beta*P_k + gamma`` with
``T_0 = T_e``.  Every helper here works on the last axis of its power
argument so that whole batches of schedules (grid searches, random
sampling) can be evaluated at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

EPS_FEAS = 1e-9
EPS_NORM = 1e-300

MODELS = ("explicit", "implicit", "combined")

# objective forms
EXPLICIT = "explicit"
GENERAL = "implicit-general"
LOW_SINR = "implicit-low-sinr"
HIGH_SINR = "implicit-high-sinr"
COMBINED = "combined"
OBJECTIVE_FORMS = (EXPLICIT, GENERAL, LOW_SINR, HIGH_SINR, COMBINED)


def derive_params(a, b, delta, T_e):
    """Return the discrete filter coefficients ``(alpha, beta, gamma)``.

    Parameters
    ----------
    a : float
        Heating coefficient, ``a >= 0``.
    b : float
        Cooling rate, ``b > 0``.
    delta : float
        Slot duration, ``delta > 0``.
    T_e : float
        Environment temperature.
    """
    if not b > 0:
        raise ValidationError(f"cooling rate b must be positive, got {b}")
    if not delta > 0:
        raise ValidationError(f"slot duration delta must be positive, got {delta}")
    if a < 0:
        raise ValidationError(f"heating coefficient a must be nonnegative, got {a}")
    alpha = math.exp(-b * delta)
    # -expm1 keeps 1 - alpha accurate for short slots
    one_minus = -math.expm1(-b * delta)
    return alpha, (a / b) * one_minus, T_e * one_minus


@dataclass(frozen=True)
class ThermalParams:
    """Physical constants of the transmitter and its noise model.

    ``T_c`` defaults to infinity for the implicit-only model and ``c``
    defaults to zero for the explicit-only model.
    """

    a: float
    b: float
    delta: float
    T_e: float
    T_c: float = math.inf
    sigma2: float = 1.0
    c: float = 0.0

    def __post_init__(self):
        for name in ("a", "b", "delta", "T_e", "sigma2", "c"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if math.isnan(self.T_c):
            raise ValidationError("T_c must not be NaN")
        if self.c < 0:
            raise ValidationError(f"c must be nonnegative, got {self.c}")
        if self.sigma2 < 0:
            raise ValidationError(f"sigma2 must be nonnegative, got {self.sigma2}")
        derive_params(self.a, self.b, self.delta, self.T_e)

    @classmethod
    def from_coefficients(cls, alpha, beta, *, T_e=0.0, T_c=math.inf,
                          sigma2=1.0, gamma0=None, delta=1.0):
        """Build parameters from the discrete filter coefficients.

        When ``gamma0`` is given the implicit model is switched on with the
        normalisation ``c*beta = 1`` and ``sigma2`` is chosen so that the
        normalised noise floor equals ``gamma0``.
        """
        if not 0 < alpha < 1:
            raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
        if beta <= 0:
            raise ValidationError(f"beta must be positive, got {beta}")
        b = -math.log(alpha) / delta
        a = beta * b / (-math.expm1(-b * delta))
        c = 0.0
        if gamma0 is not None:
            c = 1.0 / beta
            sigma2 = gamma0 - c * T_e
            if sigma2 < 0:
                raise ValidationError("gamma0 is below the thermal noise c*T_e")
        return cls(a=a, b=b, delta=delta, T_e=T_e, T_c=T_c, sigma2=sigma2, c=c)

    @property
    def alpha(self):
        return math.exp(-self.b * self.delta)

    @property
    def beta(self):
        return derive_params(self.a, self.b, self.delta, self.T_e)[1]

    @property
    def gamma(self):
        return self.T_e * -math.expm1(-self.b * self.delta)

    @property
    def kappa(self):
        return self.c * self.beta

    @property
    def gamma0(self):
        """Noise floor in interference units, ``(c*T_e + sigma2)/kappa``."""
        kappa = self.kappa
        if kappa > 0:
            return (self.c * self.T_e + self.sigma2) / max(kappa, EPS_NORM)
        return self.sigma2

    def gamma_j(self, j):
        return self.gamma0 / self.alpha ** j

    @property
    def cap(self):
        """Filtered-power budget ``(T_c - T_e)/beta`` of the peak constraint."""
        if math.isinf(self.T_c):
            return math.inf
        beta = self.beta
        if beta == 0:
            return math.inf
        return (self.T_c - self.T_e) / beta

    @property
    def tail_power(self):
        """Power that holds the temperature exactly at ``T_c``."""
        return (1.0 - self.alpha) * self.cap

    def require_critical(self):
        if not self.T_c > self.T_e:
            raise ValidationError(
                f"critical temperature T_c={self.T_c} must exceed T_e={self.T_e}")

    def require_implicit(self):
        if not self.kappa > 0:
            raise ValidationError("implicit model needs c*beta > 0")


@dataclass(frozen=True)
class Scenario:
    params: ThermalParams
    energies: np.ndarray = field(repr=False)

    def __post_init__(self):
        e = np.array(self.energies, dtype=float).reshape(-1)
        if e.size < 1:
            raise ValidationError("scenario needs at least one slot")
        if not np.all(np.isfinite(e)):
            raise ValidationError("energies must be finite")
        if np.any(e < 0):
            raise ValidationError("energies must be nonnegative")
        e.setflags(write=False)
        object.__setattr__(self, "energies", e)

    @property
    def D(self):
        return self.energies.size

    @property
    def cumulative(self):
        return np.cumsum(self.energies)

    def with_energies(self, energies):
        return Scenario(self.params, energies)


@dataclass(frozen=True)
class FeasibilityReport:
    energy_ok: np.ndarray
    temperature_ok: np.ndarray
    max_violation: float
    sign_ok: bool = True

    @property
    def feasible(self):
        return bool(self.sign_ok and self.energy_ok.all() and self.temperature_ok.all())


def filtered_power(alpha, powers):
    """Return ``F_k = sum_{i<=k} alpha**(k-i) * P_i`` along the last axis."""
    p = np.asarray(powers, dtype=float)
    out = np.empty_like(p)
    acc = np.zeros(p.shape[:-1])
    for k in range(p.shape[-1]):
        acc = alpha * acc + p[..., k]
        out[..., k] = acc
    return out


def interference(alpha, powers):
    """Return ``I_i = sum_{k<i} alpha**(i-1-k) * P_k`` (zero in slot 1)."""
    f = filtered_power(alpha, powers)
    out = np.zeros_like(f)
    out[..., 1:] = f[..., :-1]
    return out


def temperature_trajectory(params, powers):
    """End-of-slot temperatures ``T_1..T_D`` from ``T_0 = T_e``."""
    p = np.asarray(powers, dtype=float)
    if np.any(p < 0):
        raise ValidationError("powers must be nonnegative")
    alpha, beta, gamma = params.alpha, params.beta, params.gamma
    temps = np.empty_like(p)
    t = np.full(p.shape[:-1], float(params.T_e))
    for k in range(p.shape[-1]):
        t = alpha * t + beta * p[..., k] + gamma
        temps[..., k] = t
    return temps


def max_temperature(scenario):
    return scenario.params.beta * float(np.sum(scenario.energies)) + scenario.params.T_e


def is_energy_limited(scenario):
    """Per-slot flags ``S_j <= cap`` and the overall flag (last slot)."""
    p = scenario.params
    p.require_critical()
    flags = scenario.cumulative <= p.cap
    return flags, bool(flags[-1])


def is_temperature_limited(scenario):
    p = scenario.params
    p.require_critical()
    k = np.arange(1, scenario.D + 1)
    return bool(np.all(p.cap < scenario.cumulative / k))


def compute_sinr(scenario, powers):
    p = scenario.params
    if not p.kappa > 0:
        raise ValidationError("SINR is only defined when c*beta > 0")
    pw = np.asarray(powers, dtype=float)
    return pw / (p.kappa * (interference(p.alpha, pw) + p.gamma0))


def objective_form(model, regime="general"):
    """Map a (model, regime) pair onto one of the objective forms."""
    if model == "explicit":
        return EXPLICIT
    if model not in ("implicit", "combined"):
        raise ValidationError(f"unknown model {model!r}")
    if regime in ("low-sinr", LOW_SINR):
        return LOW_SINR
    if regime in ("high-sinr", HIGH_SINR):
        return HIGH_SINR
    return GENERAL if model == "implicit" else COMBINED


def objective(scenario, powers, regime):
    """Throughput in nats (without the slot-duration factor).

    Returns ``-inf`` for the high-SINR form when some power is zero.
    """
    if regime not in OBJECTIVE_FORMS:
        raise ValidationError(f"unknown objective form {regime!r}")
    pw = np.asarray(powers, dtype=float)
    if regime == EXPLICIT:
        return np.sum(0.5 * np.log1p(pw / scenario.params.sigma2), axis=-1)
    sinr = compute_sinr(scenario, pw)
    if regime == LOW_SINR:
        return np.sum(sinr, axis=-1)
    if regime == HIGH_SINR:
        with np.errstate(divide="ignore"):
            return np.sum(0.5 * np.log(sinr), axis=-1)
    return np.sum(0.5 * np.log1p(sinr), axis=-1)


def _relative_excess(lhs, rhs, floor):
    scale = np.maximum(np.abs(rhs), floor)
    return (lhs - rhs) / scale


def check_feasible(scenario, powers, model):
    """Check cumulative-energy and (for explicit/combined) peak-temperature
    constraints with relative tolerance ``EPS_FEAS``.  Never raises on
    violations."""
    if model not in MODELS:
        raise ValidationError(f"unknown model {model!r}")
    pw = np.asarray(powers, dtype=float)
    cum = scenario.cumulative
    floor = max(float(cum[-1]), EPS_NORM)
    e_excess = _relative_excess(np.cumsum(pw, axis=-1), cum, floor)
    sign_excess = np.max(-pw, axis=-1) / floor
    worst = np.maximum(np.max(e_excess, axis=-1), sign_excess)
    if model == "implicit":
        t_excess = np.full(pw.shape, -np.inf)
    else:
        cap = scenario.params.cap
        t_excess = _relative_excess(filtered_power(scenario.params.alpha, pw), cap,
                                    max(abs(cap), EPS_NORM))
        worst = np.maximum(worst, np.max(t_excess, axis=-1))
    if pw.ndim == 1:
        return FeasibilityReport(
            energy_ok=e_excess <= EPS_FEAS,
            temperature_ok=t_excess <= EPS_FEAS,
            max_violation=float(max(worst, 0.0)),
            sign_ok=bool(sign_excess <= EPS_FEAS),
        )
    return FeasibilityReport(
        energy_ok=e_excess <= EPS_FEAS,
        temperature_ok=t_excess <= EPS_FEAS,
        max_violation=np.maximum(worst, 0.0),
        sign_ok=sign_excess <= EPS_FEAS,
    )


def feasible_mask(scenario, powers, model):
    """Vectorised feasibility test over a batch of schedules (rows)."""
    rep = check_feasible(scenario, np.atleast_2d(powers), model)
    return rep.energy_ok.all(axis=-1) & rep.temperature_ok.all(axis=-1) & rep.sign_ok


def zero_prefix(scenario):
    """Number of leading slots with zero cumulative energy (forced to zero
    power)."""
    return int(np.count_nonzero(scenario.cumulative <= 0))
