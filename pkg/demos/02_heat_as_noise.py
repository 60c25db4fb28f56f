# %% [markdown]
# # When heat turns into noise
#
# Here there is no hard cap.  Instead the receiver noise grows with the
# device temperature, so power sent early degrades every later slot.  The
# three solvers cover the low-SINR limit, the high-SINR limit and the general
# case in between.

# %%
import numpy as np

from heatsched import Scenario, ThermalParams, grid_oracle, solve, thermo

params = ThermalParams.from_coefficients(0.5, 1.0, T_e=0.0, gamma0=1.0)
energies = [1.0, 2.0, 3.0]
sc = Scenario(params, energies)

# %% [markdown]
# ## Low SINR: wait until the end
#
# The rate is linear in SINR, and any earlier transmission only raises the
# noise for later slots.  So the best plan saves everything for the last
# slot.

# %%
low = solve(sc, "implicit", "low-sinr")
print("powers   :", low.powers)
print("objective:", low.objective, "(total energy / noise floor =", sum(energies) / params.gamma0, ")")

# %% [markdown]
# ## High SINR: a unique, rising schedule
#
# With a log-SINR objective the problem turns into a convex geometric
# program.  Its optimum is unique and never decreases over time.  The
# multipliers it returns drive a fixed-point iteration that lands on the same
# powers from any start.

# %%
from heatsched import solve_high_sinr_fixed_point

high = solve(sc, "implicit", "high-sinr")
print("powers     :", np.round(high.powers, 6))
print("multipliers:", np.round(high.duals.mu, 6))
for seed in (1, 2):
    start = np.random.default_rng(seed).uniform(0.1, 5.0, sc.D)
    p = solve_high_sinr_fixed_point(sc, high.duals.mu, init=start)
    print(f"fixed point from seed {seed}:", np.round(p, 6))

# %% [markdown]
# ## General SINR: successive condensation
#
# The full objective is a signomial.  Each round replaces the awkward
# denominators by their arithmetic-geometric-mean monomial bound and solves
# the resulting geometric program.  The objective never rises from round to
# round; random restarts then look for a better local optimum.

# %%
gen = solve(sc, "implicit", "general", heuristic=True)
hist = np.asarray(gen.diagnostics["history"])
print("powers         :", np.round(gen.powers, 6))
print("rounds         :", gen.diagnostics["rounds"], " KKT residual:", f"{gen.kkt_residual:.1e}")
print("never rises    :", bool(np.all(np.diff(hist) <= 1e-12 * hist[:-1])))

oracle = grid_oracle(sc, "implicit", "general", resolution=0.02)
print("oracle best    :", np.round(oracle.powers, 3), f"rate {oracle.objective:.6f}")
print("solver rate    :", f"{gen.objective:.6f}")

# %% [markdown]
# The three regimes pick very different plans for the same harvest:

# %%
for name, rep in (("low", low), ("high", high), ("general", gen)):
    rate = thermo.objective(sc, rep.powers, thermo.GENERAL)
    print(f"{name:>8}: {np.round(rep.powers, 3)}  true rate {rate:.4f}")
