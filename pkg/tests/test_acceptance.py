"""Acceptance criteria 1-11.  Each test prints one PASS/FAIL line; the
collected lines are repeated in the terminal summary."""

import csv
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from heatsched import (Scenario, check_monotone_condition, cli, explicit,
                       grid_oracle, implicit, solve, solve_combined, solve_explicit,
                       solve_high_sinr, solve_high_sinr_fixed_point, solve_low_sinr,
                       solve_signomial, solve_temperature_limited, thermo)
from conftest import explicit_params, implicit_params


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


def random_explicit(rng, dmax=3):
    p = explicit_params(alpha=rng.uniform(0.05, 0.95), cap=rng.uniform(0.5, 4.0),
                        sigma2=rng.uniform(0.1, 3.0))
    return Scenario(p, rng.uniform(0.0, 4.0, int(rng.integers(1, dmax + 1))))


def random_combined(rng, dmax=3):
    p = implicit_params(alpha=rng.uniform(0.1, 0.9), gamma0=rng.uniform(0.3, 2.0),
                        cap=rng.uniform(0.5, 3.0))
    return Scenario(p, rng.uniform(0.2, 4.0, int(rng.integers(1, dmax + 1))))


def random_schedules(scenario, rng, n):
    """``n`` feasible schedules for the cumulative-budget constraints."""
    cum = scenario.cumulative
    out = np.zeros((n, scenario.D))
    used = np.zeros(n)
    for k in range(scenario.D):
        out[:, k] = rng.uniform(0, 1, n) * (cum[k] - used)
        used += out[:, k]
    return out


def test_c01_dynamics_equivalence(rng, verdict):
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(100):
        p = type(explicit_params())(a=rng.uniform(0.1, 5), b=rng.uniform(0.05, 3),
                                    delta=rng.uniform(0.1, 2), T_e=rng.uniform(-10, 40),
                                    T_c=math.inf)
        D = int(rng.integers(1, 51))
        P = rng.uniform(0, 10, D)
        rec = thermo.temperature_trajectory(p, P)
        direct = p.T_e + p.beta * (explicit.filter_matrix(p.alpha, D) @ P)
        worst = max(worst, float(np.max(np.abs(rec - direct) / np.maximum(np.abs(direct), 1e-300))))
    dt = time.perf_counter() - t0
    verdict(1, worst <= 1e-12 and dt < 1.0,
            f"max relative gap {worst:.2e} (tol 1e-12), {dt:.3f} s (limit 1 s)")


def test_c02_explicit_oracle(rng, verdict):
    t0 = time.perf_counter()
    short = []
    for _ in range(50):
        sc = random_explicit(rng)
        rep = solve_explicit(sc)
        o = grid_oracle(sc, "explicit", resolution=0.02)
        if rep.objective < o.objective - o.gap:
            short.append(o.objective - rep.objective)
    dt = time.perf_counter() - t0
    verdict(2, not short and dt < 60.0,
            f"{len(short)}/50 below oracle minus gap, {dt:.2f} s (limit 60 s)")


def test_c03_temperature_limited_structure(rng, verdict):
    bad = []
    for n in range(50):
        p = explicit_params(alpha=rng.uniform(0.05, 0.95), cap=rng.uniform(0.5, 3.0),
                            sigma2=rng.uniform(0.1, 3.0))
        sc = Scenario(p, p.cap * rng.uniform(1.05, 4.0, int(rng.integers(1, 11))))
        assert thermo.is_temperature_limited(sc)
        sol = solve_temperature_limited(sc)
        P = sol.powers
        T = thermo.temperature_trajectory(p, P)
        hit = sol.i_star
        checks = [np.all(np.diff(P) <= 1e-12),
                  np.all(np.diff(T) >= -1e-12),
                  np.all(np.abs(P[hit:] - p.tail_power) <= 1e-8),
                  P[hit - 1] - p.tail_power >= 1e-8,
                  np.max(np.abs(P - solve_explicit(sc).powers)) <= 1e-7]
        if not all(checks):
            bad.append(n)
    verdict(3, not bad, f"{len(bad)}/50 instances violate the structure (tols 1e-8, 1e-7)")


def test_c04_hand_explicit(hand_explicit, verdict):
    rep = solve(hand_explicit, "explicit", "auto")
    dp = float(np.max(np.abs(rep.powers - [3.0, 1.5])))
    dl = float(np.max(np.abs(rep.duals.lam - [0.05, 0.4])))
    verdict(4, dp <= 1e-6 and dl <= 1e-4,
            f"P={rep.powers.tolist()} (err {dp:.1e}), lambda={rep.duals.lam.tolist()} "
            f"(err {dl:.1e})")


def test_c05_low_sinr(rng, verdict):
    worst_obj = worst_temp = 0.0
    beaten = 0
    for _ in range(20):
        sc = Scenario(implicit_params(alpha=rng.uniform(0.05, 0.95),
                                      gamma0=rng.uniform(0.2, 5.0)),
                      rng.uniform(0, 5, int(rng.integers(1, 8))))
        rep = solve_low_sinr(sc)
        target = sc.energies.sum() / sc.params.gamma0
        worst_obj = max(worst_obj, abs(rep.objective - target) / target)
        others = thermo.objective(sc, random_schedules(sc, rng, 10_000), thermo.LOW_SINR)
        beaten += int(np.sum(others > rep.objective * (1 + 1e-12)))
        T = thermo.temperature_trajectory(sc.params, rep.powers)[-1]
        worst_temp = max(worst_temp, abs(T - thermo.max_temperature(sc)))
    verdict(5, worst_obj <= 1e-14 and beaten == 0 and worst_temp <= 1e-10,
            f"objective rel err {worst_obj:.1e}, {beaten} random schedules better, "
            f"final temperature err {worst_temp:.1e} (tol 1e-10)")


def test_c06_high_sinr(rng, verdict):
    mono = kkt = fp = 0.0
    for _ in range(50):
        sc = Scenario(implicit_params(alpha=rng.uniform(0.05, 0.95), gamma0=rng.uniform(0.2, 5.0)),
                      np.concatenate([[rng.uniform(0.2, 4)],
                                      rng.uniform(0, 4, int(rng.integers(0, 10)))]))
        rep = solve_high_sinr(sc)
        mono = max(mono, float(np.max(-np.diff(rep.powers), initial=0.0)))
        kkt = max(kkt, implicit.high_sinr_kkt_residual(sc, rep.powers, rep.duals.mu))
        for _ in range(2):
            init = rng.uniform(0.01, 10.0, sc.D)
            p = solve_high_sinr_fixed_point(sc, rep.duals.mu, init=init)
            fp = max(fp, float(np.max(np.abs(p - rep.powers))))
    verdict(6, mono <= 1e-9 and kkt <= 1e-7 and fp <= 1e-6,
            f"max decrease {mono:.1e} (tol 1e-9), KKT {kkt:.1e} (tol 1e-7), "
            f"fixed-point gap {fp:.1e} (tol 1e-6)")


def test_c07_hand_high_sinr(hand_high_sinr, verdict):
    rep = solve_high_sinr(hand_high_sinr)
    err = float(np.max(np.abs(rep.powers - [1.0, 2.0])))
    verdict(7, err <= 1e-6, f"P={rep.powers.tolist()} (err {err:.1e}, tol 1e-6)")


def test_c08_interference_axioms(rng, verdict):
    fails = 0
    for _ in range(10_000):
        D = int(rng.integers(1, 7))
        sc = Scenario(implicit_params(alpha=rng.uniform(0.05, 0.95),
                                      gamma0=rng.uniform(0.1, 5.0)), np.ones(D))
        P = rng.uniform(0, 10, D)
        mu = rng.uniform(0, 3, D) * (rng.random(D) < 0.7)
        mu[-1] = rng.uniform(0.01, 3)
        f = implicit.interference_update(P, mu, sc)
        g = implicit.interference_update(P + rng.uniform(0, 5, D), mu, sc)
        s = rng.uniform(1.001, 10)
        h = implicit.interference_update(s * P, mu, sc)
        ok = np.all(f > 0) and np.all(g >= f) and np.all(s * f > h)
        fails += int(not ok)
    verdict(8, fails == 0, f"{fails} violations in 10000 samples")


def test_c09_condensation(rng, verdict):
    rises = 0
    for _ in range(50):
        sc = Scenario(implicit_params(alpha=rng.uniform(0.1, 0.9), gamma0=rng.uniform(0.3, 3)),
                      rng.uniform(0.3, 3.0, int(rng.integers(2, 5))))
        h = np.asarray(solve_signomial(sc).diagnostics["history"])
        rises += int(np.any(h[1:] > h[:-1] * (1 + 1e-12)))
    agm = 0
    for _ in range(10_000):
        D = int(rng.integers(1, 6))
        sc = Scenario(implicit_params(alpha=rng.uniform(0.05, 0.95),
                                      gamma0=rng.uniform(0.1, 5.0)), np.ones(D))
        theta = implicit.agm_weights(sc, rng.uniform(0.01, 10, D))
        at = rng.uniform(0.01, 10, D)
        u, _ = implicit.posynomial_terms(sc, at)
        agm += int(np.any(implicit.condensed_monomial(sc, theta, at) > u * (1 + 1e-12)))
    gaps = []
    for _ in range(5):
        E = rng.uniform(0.2, 3.0, 2)
        sc = Scenario(implicit_params(alpha=rng.uniform(0.1, 0.9),
                                      gamma0=100 * E.sum() * rng.uniform(1, 3)), E)
        rep = solve(sc, "implicit", "general", heuristic=True)
        o = grid_oracle(sc, "implicit", "general", resolution=0.01)
        gaps.append(abs(rep.objective - o.objective))
    verdict(9, rises == 0 and agm == 0 and max(gaps) <= 1e-3,
            f"{rises}/50 runs with a rising objective, {agm}/10000 AGM violations, "
            f"low-SINR-limit oracle gap {max(gaps):.1e} (tol 1e-3)")


def test_c10_combined(rng, verdict):
    red = 0.0
    for _ in range(10):
        E = rng.uniform(0.2, 3.0, int(rng.integers(1, 5)))
        a, g = rng.uniform(0.1, 0.9), rng.uniform(0.3, 3)
        sc = Scenario(implicit_params(a, g, cap=E.sum() * rng.uniform(1, 2)), E)
        plain = Scenario(implicit_params(a, g), E)
        for regime, ref in (("general", solve_signomial), ("low-sinr", solve_low_sinr),
                            ("high-sinr", solve_high_sinr)):
            rep, diag = solve_combined(sc, regime)
            assert diag.reduction_to_implicit
            red = max(red, float(np.max(np.abs(rep.powers - ref(plain).powers))))

    structure = 0
    for _ in range(50):
        g = rng.uniform(0.3, 3.0)
        cap = rng.uniform(0.5, 3.0)
        alpha = rng.uniform(0.05, 1.0) * g / (cap + g)
        sc = Scenario(implicit_params(alpha, g, cap), cap * rng.uniform(1.05, 3, int(rng.integers(1, 6))))
        assert check_monotone_condition(sc) and thermo.is_temperature_limited(sc)
        for regime in ("high-sinr", "general"):
            rep, diag = solve_combined(sc, regime)
            P, T = rep.powers, rep.temperatures
            hit = diag.first_hit_slot
            ok = (np.all(np.diff(P) <= 1e-9) and np.all(np.diff(T) >= -1e-9)
                  and hit is not None and np.all(np.abs(P[hit:] - sc.params.tail_power) <= 1e-8))
            structure += int(not ok)

    short = {}
    for regime, heuristic in (("general", False), ("high-sinr", False), ("low-sinr", True)):
        short[regime] = 0
        for _ in range(50):
            sc = random_combined(rng)
            rep, _ = solve_combined(sc, regime, heuristic=heuristic)
            o = grid_oracle(sc, "combined", regime, resolution=0.02)
            short[regime] += int(rep.objective < o.objective - o.gap)
    verdict(10, red <= 1e-7 and structure == 0 and not any(short.values()),
            f"reduction gap {red:.1e} (tol 1e-7), {structure}/100 structure failures, "
            f"oracle shortfalls {short}")


def test_c11_cli(tmp_path, rng, verdict):
    files = {}
    for name, sc in (("temp", Scenario(explicit_params(), [10.0, 10.0])),
                     ("low", Scenario(implicit_params(), [1.0, 2.0, 3.0])),
                     ("high", Scenario(implicit_params(), [3.0, 0.0]))):
        files[name] = str(tmp_path / f"{name}.json")
        cli.dump_scenario(sc, files[name])
    runs = [(["solve", "--model", "explicit", "--regime", "auto"], "temp", [3.0, 1.5], 1e-9),
            (["solve", "--model", "implicit", "--regime", "low-sinr"], "low", [0, 0, 6.0], 0.0),
            (["oracle", "--model", "implicit", "--regime", "high-sinr", "--resolution", "0.01"],
             "high", [1.0, 2.0], 0.031)]
    ok = True
    for k, (args, name, expect, tol) in enumerate(runs):
        out = tmp_path / f"r{k}"
        cmd = [sys.executable, "-m", "heatsched", *args, "--scenario", files[name],
               "--out", str(out)]
        code = subprocess.run(cmd, capture_output=True).returncode
        with open(f"{out}.csv", newline="") as fh:
            got = [float(r["power"]) for r in csv.DictReader(fh)]
        ok &= code == 0 and len(got) == len(expect) and np.allclose(got, expect, atol=tol, rtol=0)
    p = type(explicit_params())(a=rng.uniform(0.1, 5), b=rng.uniform(0.05, 3),
                                delta=rng.uniform(0.1, 2), T_e=rng.uniform(-5, 30),
                                T_c=50.0, sigma2=rng.uniform(0.1, 2), c=rng.uniform(0, 1))
    sc = Scenario(p, rng.uniform(0, 5, 7))
    cli.dump_scenario(sc, tmp_path / "rt.json")
    back = cli.load_scenario(tmp_path / "rt.json")
    trip = max([abs(getattr(back.params, f) - getattr(p, f)) / abs(getattr(p, f))
                for f in ("a", "b", "delta", "T_e", "T_c", "sigma2", "c") if getattr(p, f)]
               + list(np.abs(back.energies - sc.energies) / np.maximum(sc.energies, 1e-300)))
    verdict(11, bool(ok) and trip <= 1e-15,
            f"three runs exit 0 with expected schedules: {bool(ok)}; round-trip error {trip:.1e}")
