import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heatsched import (BracketInvalid, HorizonTooLarge, IterationLimitExceeded,
                       NoStrictlyFeasiblePoint, Scenario, SolverConfig, ValidationError, thermo)
from heatsched.numerics import (ConvexProgram, PosynomialSet, barrier_maximize, bisect_root,
                                fixed_point_iterate, grid_oracle, strict_start)
from conftest import explicit_params, implicit_params


def _log_program(cap):
    """max log(x) s.t. x <= cap (multiplier 1/cap)."""
    return ConvexProgram(
        n=1,
        objective=lambda x: (math.log(x[0]) if x[0] > 0 else -math.inf,
                             np.array([1.0 / x[0]]), np.array([[-1.0 / x[0] ** 2]])),
        constraints=lambda x: (np.array([x[0] - cap]), np.array([[1.0]])),
        x0=np.array([1.0]))


def test_barrier_single_budget_multiplier():
    res = barrier_maximize(_log_program(5.0))
    assert res.x[0] == pytest.approx(5.0, abs=1e-8)
    assert res.multipliers[0] == pytest.approx(0.2, abs=1e-8)
    assert res.kkt_residual <= 1e-8


def test_barrier_rejects_infeasible_start():
    with pytest.raises(NoStrictlyFeasiblePoint):
        barrier_maximize(_log_program(5.0), x0=np.array([6.0]))


def test_barrier_iteration_cap():
    with pytest.raises(IterationLimitExceeded):
        barrier_maximize(_log_program(5.0), SolverConfig(max_iter=2))


def test_config_validation():
    with pytest.raises(ValidationError):
        SolverConfig(tol_kkt=0.0)
    with pytest.raises(ValidationError):
        SolverConfig(barrier_mult=1.0)
    with pytest.raises(ValidationError):
        SolverConfig(heuristic_alpha=1.0)


def test_bisect_root():
    assert bisect_root(lambda x: x * x - 2.0, 0.0, 2.0) == pytest.approx(math.sqrt(2.0), abs=1e-11)
    with pytest.raises(BracketInvalid):
        bisect_root(lambda x: x * x + 1.0, 0.0, 2.0)


def test_fixed_point_counts_updates():
    p, k = fixed_point_iterate(lambda q: np.full_like(q, 3.0), np.zeros(2))
    assert k == 1 and np.allclose(p, 3.0)
    p, _ = fixed_point_iterate(lambda q: 0.5 * q + 1.0, np.zeros(1), tol=1e-13)
    assert p[0] == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(IterationLimitExceeded):
        fixed_point_iterate(lambda q: q + 1.0, np.zeros(1), max_iter=10)


def test_posynomial_values_and_derivatives(rng):
    ps = PosynomialSet.from_rows([[(2.0, np.array([1.0, 0.0])), (1.0, np.array([0.5, -1.0]))],
                                  [(3.0, np.array([0.0, 2.0]))]], 2)
    z = rng.normal(size=2)
    v, J = ps.evaluate(z)
    expect = [2 * math.exp(z[0]) + math.exp(0.5 * z[0] - z[1]), 3 * math.exp(2 * z[1])]
    np.testing.assert_allclose(v, expect, rtol=1e-14)
    h = 1e-6
    num = np.column_stack([(ps.values(z + h * e) - ps.values(z - h * e)) / (2 * h)
                           for e in np.eye(2)])
    np.testing.assert_allclose(J, num, rtol=1e-7)
    _, g, H = ps.log_sum(z)
    num_h = np.column_stack([(ps.log_sum(z + h * e)[1] - ps.log_sum(z - h * e)[1]) / (2 * h)
                             for e in np.eye(2)])
    np.testing.assert_allclose(H, num_h, rtol=1e-6, atol=1e-8)


def test_posynomial_rejects_nonpositive_coefficient():
    with pytest.raises(ValidationError):
        PosynomialSet.from_rows([[(-1.0, np.zeros(1))]], 1)


def test_strict_start_is_interior():
    sc = Scenario(explicit_params(cap=1.0), [3.0, 0.5, 2.0])
    p = strict_start(sc, "explicit")
    assert np.all(p > 0)
    assert np.all(np.cumsum(p) < sc.cumulative)
    assert np.all(thermo.filtered_power(0.5, p) < 1.0)
    with pytest.raises(NoStrictlyFeasiblePoint):
        strict_start(Scenario(explicit_params(), [0.0, 1.0]), "explicit")


def test_grid_oracle_small_instances(hand_explicit, hand_high_sinr):
    res = grid_oracle(hand_explicit, "explicit", resolution=0.01)
    np.testing.assert_allclose(res.powers, [3.0, 1.5], atol=0.1 + 1e-12)
    assert res.gap_is_bound
    hs = grid_oracle(hand_high_sinr, "implicit", "high-sinr", resolution=0.01)
    np.testing.assert_allclose(hs.powers, [1.0, 2.0], atol=0.031)
    assert not hs.gap_is_bound


def test_grid_oracle_horizon_limit():
    with pytest.raises(HorizonTooLarge):
        grid_oracle(Scenario(explicit_params(), np.ones(5)), "explicit")


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(0.1, 3.0), min_size=1, max_size=3), st.floats(0.2, 0.8))
def test_grid_refinement_never_hurts(energies, alpha):
    """A grid nested inside a finer one cannot find a better point."""
    sc = Scenario(implicit_params(alpha=alpha), energies)
    coarse = grid_oracle(sc, "implicit", resolution=0.2)
    fine = grid_oracle(sc, "implicit", resolution=0.1)
    assert fine.objective >= coarse.objective - 1e-12


def test_restrict_drops_vanishing_terms():
    from heatsched.numerics import PosynomialSet
    # q0 = e^{z0} + e^{z1}, q1 = e^{-z1}, q2 = 2
    ps = PosynomialSet.from_rows([[(1.0, [1.0, 0.0]), (1.0, [0.0, 1.0])],
                                  [(1.0, [0.0, -1.0])],
                                  [(2.0, [0.0, 0.0])]], 2)
    sub, rows = ps.restrict([True, False])
    assert rows.tolist() == [0, 2]
    np.testing.assert_allclose(sub.values(np.array([0.0])), [1.0, 2.0])
