import numpy as np
import pytest

from heatsched import (NotTemperatureLimited, Scenario, ValidationError, explicit, grid_oracle,
                       solve, solve_energy_limited, solve_explicit, solve_temperature_limited,
                       thermo)
from conftest import explicit_params


def test_hand_instance_powers_and_multipliers(hand_explicit):
    rep = solve_explicit(hand_explicit)
    np.testing.assert_allclose(rep.powers, [3.0, 1.5], atol=1e-8)
    np.testing.assert_allclose(rep.duals.lam, [0.05, 0.4], atol=1e-8)
    np.testing.assert_allclose(rep.duals.mu, [0.0, 0.0], atol=1e-8)
    assert rep.kkt_residual <= 1e-8
    assert rep.diagnostics["waterfill_residual"] <= 1e-8


def test_line_search_on_hand_instance(hand_explicit):
    sol = solve_temperature_limited(hand_explicit)
    assert sol.i_star == 1
    np.testing.assert_allclose(sol.powers, [3.0, 1.5], rtol=1e-14)
    np.testing.assert_allclose(sol.lam, [0.05, 0.4], rtol=1e-12)


@pytest.mark.parametrize("energies,expect", [
    ([10.0, 10.0, 10.0], [3.0, 1.5, 1.5]),
    ([4.0], [3.0]),
])
def test_temperature_limited_small_cases(energies, expect):
    sc = Scenario(explicit_params(cap=3.0), energies)
    np.testing.assert_allclose(solve_explicit(sc).powers, expect, atol=1e-8)
    np.testing.assert_allclose(solve_temperature_limited(sc).powers, expect, rtol=1e-13)


def test_energy_limited_spends_evenly():
    sc = Scenario(explicit_params(cap=5.0), [1.0, 1.0])
    np.testing.assert_allclose(solve_explicit(sc).powers, [1.0, 1.0], atol=1e-8)
    np.testing.assert_allclose(solve_energy_limited(sc).powers, [1.0, 1.0], rtol=1e-15)


def test_taut_string_matches_barrier():
    sc = Scenario(explicit_params(alpha=0.3, cap=50.0), [2.0, 0.5, 4.0])
    taut = solve_energy_limited(sc)
    np.testing.assert_allclose(taut.powers, [1.25, 1.25, 4.0], rtol=1e-14)
    np.testing.assert_allclose(solve_explicit(sc).powers, taut.powers, atol=1e-7)
    np.testing.assert_allclose(taut.duals.mu, [0.0, 1 / 2.25 - 1 / 5.0, 0.2], rtol=1e-12)


def test_matches_frozen_reference(reference):
    for name in ("explicit_mixed_d3", "explicit_energy_d3"):
        case = reference[name]
        sc = Scenario(explicit_params(case["alpha"], case["cap"], case["sigma2"]),
                      case["energies"])
        rep = solve_explicit(sc)
        np.testing.assert_allclose(rep.powers, case["powers"], atol=1e-6)
        assert rep.objective == pytest.approx(case["objective"], abs=1e-9)


def test_zero_energy_is_trivial():
    rep = solve_explicit(Scenario(explicit_params(), [0.0, 0.0]))
    assert rep.powers.tolist() == [0.0, 0.0]
    assert rep.diagnostics["trivial"]


def test_leading_zero_energy_slots_stay_off():
    sc = Scenario(explicit_params(cap=3.0), [0.0, 2.0, 2.0])
    rep = solve_explicit(sc)
    assert rep.powers[0] == 0.0
    o = grid_oracle(sc, "explicit", resolution=0.01)
    assert rep.objective >= o.objective - 1e-9


def test_line_search_requires_temperature_limited():
    with pytest.raises(NotTemperatureLimited):
        solve_temperature_limited(Scenario(explicit_params(cap=3.0), [1.0, 10.0]))
    with pytest.raises(ValidationError):
        solve_energy_limited(Scenario(explicit_params(cap=3.0), [10.0, 10.0]))


def test_waterfill_form(hand_explicit):
    rep = solve_explicit(hand_explicit)
    np.testing.assert_allclose(explicit.waterfill_powers(hand_explicit.params, rep.duals),
                               rep.powers, atol=1e-8)


def test_line_search_agrees_with_barrier_on_random_cases(rng):
    for _ in range(25):
        p = explicit_params(alpha=rng.uniform(0.05, 0.95), cap=rng.uniform(0.5, 3.0),
                            sigma2=rng.uniform(0.1, 3.0))
        D = int(rng.integers(1, 8))
        sc = Scenario(p, p.cap * rng.uniform(1.05, 4.0, D))
        assert thermo.is_temperature_limited(sc)
        np.testing.assert_allclose(solve_temperature_limited(sc).powers,
                                   solve_explicit(sc).powers, atol=1e-7)


@pytest.mark.parametrize("energies,tag", [([10.0, 10.0], "temp-limited"),
                                          ([1.0, 1.0], "energy-limited"),
                                          ([1.0, 10.0], "general")])
def test_auto_regime_selection(energies, tag):
    rep = solve(Scenario(explicit_params(cap=3.0), energies), "explicit", "auto")
    assert rep.regime == tag
    assert rep.diagnostics["requested_regime"] == "auto"


def test_explicit_needs_critical_above_ambient():
    p = explicit_params(cap=3.0)
    bad = type(p)(a=p.a, b=p.b, delta=p.delta, T_e=5.0, T_c=4.0)
    with pytest.raises(ValidationError):
        solve_explicit(Scenario(bad, [1.0]))
