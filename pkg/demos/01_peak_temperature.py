# %% [markdown]
# # Scheduling under a hard temperature cap
#
# A transmitter harvests energy and must keep its temperature below a
# critical value.  The temperature is a leaky sum of past powers, so a burst
# early on still counts several slots later.  This walk-through builds two
# small scenarios and compares the general solver with the closed-form
# schedules for the regimes where only one constraint family can bind.

# %%
import numpy as np

from heatsched import Scenario, ThermalParams, solve, thermo

params = ThermalParams.from_coefficients(0.5, 1.0, T_e=0.0, T_c=3.0, sigma2=1.0)
print(f"alpha={params.alpha:.3f}  cap={params.cap:.3f}  holding power={params.tail_power:.3f}")

# %% [markdown]
# ## Plenty of energy: the cap decides
#
# With ten units per slot the battery never runs dry.  The first slot heats
# the device straight to the cap and every later slot only replaces the heat
# that leaked away.

# %%
hot = Scenario(params, [10.0, 10.0, 10.0, 10.0])
rep = solve(hot, "explicit", "auto")
print("regime     :", rep.regime)
print("powers     :", np.round(rep.powers, 6))
print("temperature:", np.round(rep.temperatures, 6))
print("first hit  :", rep.diagnostics["i_star"])

general = solve(hot, "explicit", "general")
print("barrier solver agrees to", float(np.max(np.abs(general.powers - rep.powers))))

# %% [markdown]
# ## Scarce energy: the budget decides
#
# When the whole harvest stays below the cap the problem is classic
# water-filling over cumulative budgets: spend the smallest running average
# first, then move on.

# %%
lean = Scenario(params, [0.4, 0.1, 1.5, 0.2])
rep = solve(lean, "explicit", "auto")
print("regime :", rep.regime)
print("powers :", np.round(rep.powers, 6))
print("budgets:", lean.cumulative)

# %% [markdown]
# ## In between
#
# Mixed cases go to the log-barrier solver.  The water-filling form
# ``1/(tail sums of multipliers) - sigma2`` should reproduce the powers of
# every active slot.

# %%
mixed = Scenario(params, [1.0, 6.0, 0.5, 4.0])
rep = solve(mixed, "explicit", "auto")
print("regime            :", rep.regime)
print("powers            :", np.round(rep.powers, 6))
print("peak multipliers  :", np.round(rep.duals.lam, 6))
print("budget multipliers:", np.round(rep.duals.mu, 6))
print("water-filling gap :", rep.diagnostics["waterfill_residual"])
print("feasible          :", thermo.check_feasible(mixed, rep.powers, "explicit").feasible)
