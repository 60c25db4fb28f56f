# %% [markdown]
# # Both effects at once
#
# Now the device has a hard temperature cap and its noise also follows the
# temperature.  If the cap can never be reached the problem is the noise-only
# one.  When the leak rate is small enough relative to the noise floor, the
# optimum has a simple shape: powers fall until the cap is hit, then hold at
# the power that keeps the temperature flat.

# %%
import numpy as np

from heatsched import Scenario, ThermalParams, check_monotone_condition, solve_combined

params = ThermalParams.from_coefficients(0.4, 1.0, T_e=0.0, T_c=1.0, gamma0=1.0)
sc = Scenario(params, [10.0, 10.0, 10.0, 10.0, 10.0])
print("monotone condition holds:", check_monotone_condition(sc))
print("holding power           :", params.tail_power)

# %% [markdown]
# ## The high-SINR optimum

# %%
rep, diag = solve_combined(sc, "high-sinr")
print("powers      :", np.round(rep.powers, 6))
print("temperatures:", np.round(rep.temperatures, 6))
print("first hit   :", diag.first_hit_slot, " re-entry:", diag.reentry)

# %% [markdown]
# ## The general and low-SINR regimes
#
# Both are solved locally by condensation, so the report marks them as local
# optima.  ``heuristic=True`` adds random restarts.

# %%
for regime in ("general", "low-sinr"):
    rep, diag = solve_combined(sc, regime, heuristic=True)
    print(f"{regime:>9}: {np.round(rep.powers, 6)}  first hit {diag.first_hit_slot}")

# %% [markdown]
# ## A cap that is never reached
#
# If the whole harvest cannot heat the device to the cap, the solver hands
# the problem to the noise-only model.

# %%
cool = Scenario(ThermalParams.from_coefficients(0.4, 1.0, T_e=0.0, T_c=100.0, gamma0=1.0),
                [1.0, 2.0, 3.0])
rep, diag = solve_combined(cool, "general")
print("reduced to noise-only model:", diag.reduction_to_implicit)
print("powers:", np.round(rep.powers, 6))
