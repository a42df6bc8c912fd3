"""Acceptance criteria, one reported PASS/FAIL line each (see the terminal summary)."""

import time

import numpy as np

from offload_game.cli import main
from offload_game.dynamics import run_smbrd
from offload_game.equilibrium import (NEKind, brute_force_ne, build_linear_system,
                                      classify_two_player, gershgorin_bound,
                                      mixed_strategy_dominance_gap, solve_linear_ne,
                                      weak_interference_holds)
from offload_game.experiment import (Dynamic, compare_speed, get_scenario, monte_carlo,
                                     two_player_config)
from offload_game.game import (best_response, unconstrained_response, utility,
                               utility_derivative)

from helpers import (direct_utility, gains_as_pairs, random_config, sample_multiplier,
                     two_player_from_multipliers)

TRIALS = 1000
SEED = 2024


def test_ac1_two_player_classification(report):
    expected = {(0.4, 0.6): NEKind.UNIQUE_INTERIOR, (3.0, 4.0): NEKind.TWO_SINGULAR,
                (3.5, 4.0): NEKind.THREE, (3.0, 3.0): NEKind.INFINITE_SEGMENT}
    got = {pair: classify_two_player(two_player_config(*pair)).kind for pair in expected}
    ok = got == expected
    report("AC1 two-player classification of the four ratio pairs", ok,
           ", ".join(f"{p}->{k.value}" for p, k in got.items()))
    assert ok


def test_ac2_oracle_equivalence(report):
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    mismatches, worst, kinds = 0, 0.0, set()
    for _ in range(200):
        c = two_player_from_multipliers(rng, sample_multiplier(rng), sample_multiplier(rng))
        cls = classify_two_player(c)
        kinds.add(cls.kind)
        reps = brute_force_ne(c, 1e-3)
        if len(reps) != len(cls.equilibria):
            mismatches += 1
            continue
        for eq in cls.equilibria:
            d = min(float(np.max(np.abs(r - eq))) for r in reps)
            worst = max(worst, d)
            if d > 5e-3:
                mismatches += 1
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 60
    report("AC2 oracle agrees with classification on 200 configs", ok,
           f"mismatches={mismatches}, worst distance={worst:.2e} (tol 5e-3), "
           f"classes={len(kinds)}, {elapsed:.1f}s (limit 60s)")
    assert ok


def _cycling_start(name, rng):
    """Initial profile inside the region where simultaneous play cycles."""
    if name == "2p-three":
        return rng.random(2) * np.array([0.6, 0.8])  # below the interior NE
    return rng.random(2) / 3  # below both saturation points (1/3, 1/3)


def test_ac3_two_player_dynamics(report):
    names = ("2p-unique", "2p-two", "2p-three", "2p-infinite")
    ambrd = {n: monte_carlo(get_scenario(n), Dynamic.ALTERNATING, TRIALS, SEED).fraction_converged
             for n in names}
    smbrd = {n: monte_carlo(get_scenario(n), Dynamic.SIMULTANEOUS, TRIALS, SEED)
             for n in names}
    rng = np.random.default_rng(SEED)
    region_cycled = {}
    for n in names[1:]:
        c = get_scenario(n).config
        runs = [run_smbrd(c, _cycling_start(n, rng)).outcome for _ in range(200)]
        region_cycled[n] = sum(o.kind == "CYCLED" and o.period == 2 for o in runs) / len(runs)
    ok = (all(v == 1.0 for v in ambrd.values())
          and smbrd["2p-unique"].fraction_converged == 1.0
          and all(smbrd[n].fraction_converged < 1.0 and smbrd[n].fraction_cycled > 0
                  for n in names[1:])
          and all(v == 1.0 for v in region_cycled.values()))
    report("AC3 AMBRD always converges; SMBRD converges only with a unique NE", ok,
           "ambrd converged " + str(ambrd) + "; smbrd converged "
           + str({n: r.fraction_converged for n, r in smbrd.items()})
           + "; period-2 cycles in cycling regions " + str(region_cycled))
    assert ok


def test_ac4_weak_interference_four_players(report):
    s = get_scenario("4p-weak")
    c = s.config
    system = build_linear_system(c)
    x_star = solve_linear_ne(c)
    rho = gershgorin_bound(system)
    residual = system.residual(x_star)
    worst, slowest, converged = 0.0, 0, True
    for dyn in Dynamic:
        r = monte_carlo(s, dyn, TRIALS, SEED, tol=1e-2, max_steps=100)
        converged &= r.fraction_converged == 1.0
        worst = max(worst, max(float(np.max(np.abs(rec.final - x_star))) for rec in r.records))
        slowest = max(slowest, int(r.converged_steps.max()))
    ok = (bool(weak_interference_holds(c).all()) and rho < 1 and residual <= 1e-10
          and converged and worst <= 1e-2 and slowest <= 100)
    report("AC4 C1: weak interference, unique NE, both dynamics reach it", ok,
           f"bound={rho:.4f}, residual={residual:.1e}, all converged={converged}, "
           f"max |x - x*|={worst:.2e} (tol 1e-2), max steps={slowest}")
    assert ok


def test_ac5_speed_ordering(report):
    medians = {}
    for name in ("4p-weak", "4p-strong"):
        s = get_scenario(name)
        cmp = compare_speed(monte_carlo(s, Dynamic.SIMULTANEOUS, TRIALS, SEED),
                            monte_carlo(s, Dynamic.ALTERNATING, TRIALS, SEED))
        medians[name] = (cmp.median_a, cmp.median_b)
    ok = (medians["4p-weak"][0] < medians["4p-weak"][1]
          and medians["4p-strong"][1] < medians["4p-strong"][0])
    report("AC5 SMBRD faster under weak, AMBRD faster under strong interference", ok,
           "median steps (smbrd, ambrd): " + str(medians))
    assert ok


def _property_suite(rng):
    failures = []
    worst_fd = 0.0
    for _ in range(1000):
        K = int(rng.integers(1, 5))
        c = random_config(rng, K, cross_max=float(rng.choice([0.5, 2.0, 5.0])))
        x = rng.uniform(1e-3, 1 - 1e-3, size=K)
        k = int(rng.integers(K))
        # derivative vs central difference
        h = 1e-6
        lo, hi = x.copy(), x.copy()
        lo[k] -= h
        hi[k] += h
        fd = (utility(c, hi, k) - utility(c, lo, k)) / (2 * h)
        worst_fd = max(worst_fd, abs(utility_derivative(c, x, k) - fd))
        # chord concavity, evaluated through the independent formula
        a, m, b = np.sort(rng.random(3))
        if b - a > 1e-6:
            pairs = gains_as_pairs(c)
            vals = []
            for v in (a, m, b):
                y = x.copy()
                y[k] = v
                vals.append(direct_utility(c.alpha, c.beta, c.power, pairs,
                                           c.noise_density, y, k))
            chord = ((b - m) * vals[0] + (m - a) * vals[2]) / (b - a)
            if vals[1] < chord - 1e-12:
                failures.append("concavity")
        # best response: range, optimality on a grid, monotonicity in opponents
        br = best_response(c, x, k)
        if not c.private_share[k] - 1e-15 <= br <= 1.0:
            failures.append("br range")
        y = x.copy()
        y[k] = br
        best = utility(c, y, k)
        for v in np.linspace(0, 1, 51):
            y[k] = v
            if utility(c, y, k) > best + 1e-12:
                failures.append("br optimality")
                break
        if K > 1:
            j = (k + 1) % K
            y = x.copy()
            y[j] = min(1.0, x[j] + rng.random() * (1 - x[j]))
            if best_response(c, y, k) > br:
                failures.append("br monotonicity")
    if worst_fd > 1e-5:
        failures.append(f"derivative {worst_fd:.1e}")
    return failures, worst_fd


def _jensen(rng):
    gaps = []
    for _ in range(100):
        K = int(rng.integers(1, 4))
        c = random_config(rng, K)
        n = int(rng.integers(2, 6))
        values = rng.random(n)
        values[:2] = rng.uniform(0, 0.5), rng.uniform(0.5, 1)  # nonzero variance
        probs = rng.dirichlet(np.ones(n))
        k = int(rng.integers(K))
        gaps.append(mixed_strategy_dominance_gap(c, k, list(zip(values, probs / probs.sum())),
                                                 rng.random(K)))
    return min(gaps)


def _geometric_law(rng):
    worst, checked = 0.0, 0
    for _ in range(200):
        c = two_player_from_multipliers(rng, rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9))
        x_star = classify_two_player(c).equilibria[0]
        s = c.private_share
        b1 = s[0] * c.cross[0, 1] / c.signal[0]
        b2 = s[1] * c.cross[1, 0] / c.signal[1]
        x = rng.random(2)
        for _ in range(5):
            y = run_smbrd(c, x, tol=1e-300, max_steps=2).states
            unclamped = (unconstrained_response(c, y[0], 1) < 1
                         and unconstrained_response(c, y[1], 0) < 1)
            if unclamped:
                worst = max(worst, abs((y[2][0] - x_star[0]) - b1 * b2 * (x[0] - x_star[0])))
                checked += 1
            x = y[1]
    return worst, checked


def test_ac6_property_suites(report):
    rng = np.random.default_rng(SEED)
    failures, worst_fd = _property_suite(rng)
    min_gap = _jensen(rng)
    worst_geo, checked = _geometric_law(rng)
    ok = not failures and min_gap > 0 and worst_geo <= 1e-12 and checked > 0
    report("AC6 concavity, derivative, best response, Jensen gap, geometric law", ok,
           f"failures={sorted(set(failures))}, worst |d - fd|={worst_fd:.1e} (tol 1e-5), "
           f"min Jensen gap={min_gap:.2e} (> 0), geometric law worst={worst_geo:.1e} "
           f"over {checked} unclamped steps (tol 1e-12)")
    assert ok


def test_ac7_determinism(report, tmp_path):
    outputs = []
    for i, workers in enumerate((1, 1, 4)):
        out = tmp_path / f"r{i}.csv"
        code = main(["montecarlo", "--scenario", "4p-strong", "--dynamic", "smbrd",
                     "--trials", str(TRIALS), "--seed", str(SEED),
                     "--workers", str(workers), "--out", str(out)])
        assert code == 0
        outputs.append((out.read_bytes(), (tmp_path / f"r{i}_cdf.csv").read_bytes()))
    ok = outputs[0] == outputs[1] == outputs[2]
    report("AC7 Monte Carlo output files byte-identical across runs and worker counts", ok,
           f"{TRIALS} trials, workers 1/1/4")
    assert ok
