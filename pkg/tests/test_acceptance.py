"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line that is printed in the pytest terminal
summary (see conftest.py). Tolerances are fixed here and never tuned per run.
"""

import math
import time

import numpy as np
import pytest

from review_pricing import (
    BuyerModel,
    ExperimentConfig,
    FixedPrice,
    TwoPhasePricing,
    build_hard_instance,
    build_random_instance,
    fit_scaling_exponent,
    optimal_price,
    run_episode,
    run_sweep,
    validate_pessimism_coverage,
    validate_rev_oracle,
)
from review_pricing.cli import main as cli_main
from review_pricing.experiments import concentration_violations, episode_seed

RESULTS: list[str] = []

ETA = 0.1
SCALING_HORIZONS = [2**k for k in range(12, 18)]
SCALING_R = 30


def report(n, ok, msg):
    RESULTS.append(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {msg}")
    print(RESULTS[-1])
    assert ok, msg


def test_criterion_1_pessimism_coverage():
    start = time.perf_counter()
    inst = build_random_instance(3, seed=2024, T=300, noise="bernoulli")
    bound = ETA + 3 * math.sqrt(ETA * (1 - ETA) / 2000)
    rates = {}
    for name, policy in (
        ("two_phase", TwoPhasePricing(phase1_constant=0.5, eta=ETA)),
        ("fixed:0.3", FixedPrice(0.3)),
    ):
        rep = validate_pessimism_coverage(inst, policy, 2000, ETA, base_seed=1)
        assert rep.bound == pytest.approx(bound)
        rates[name] = rep.violation_rate
    elapsed = time.perf_counter() - start
    ok = all(r <= bound for r in rates.values()) and elapsed < 120
    report(1, ok, f"episode violation rates {rates} <= {bound:.4f}; {elapsed:.1f}s < 120s")


def test_criterion_2_structural_invariants():
    rng = np.random.default_rng(2)
    violations = []
    phase2_rounds = 0
    for ep in range(500):
        d = int(rng.integers(1, 9))
        T = int(rng.integers(2, 5001))
        inst = build_random_instance(d, seed=10_000 + ep, T=T)
        c = float(rng.choice([0.1, 0.5, 2.0]))
        state = {"prev": None}

        def observer(t, pol, p, i, tau, b, ep=ep, state=state):
            nonlocal phase2_rounds
            if t <= pol.t_lambda_:
                if p != 0.0 or b != 1:
                    violations.append((ep, t, "phase-1 price/purchase"))
                return
            phase2_rounds += 1
            S, Q = pol.S_, pol.Q_
            if i in S and b != 1:
                violations.append((ep, t, "active type did not buy"))
            if S != Q[len(Q) - len(S):]:
                violations.append((ep, t, "S not a suffix of Q"))
            prev = state["prev"]
            if prev is not None and not (set(S) <= set(prev) and (not S or not prev or S[0] >= prev[0])):
                violations.append((ep, t, "S grew"))
            state["prev"] = S

        tr = run_episode(inst, TwoPhasePricing(phase1_constant=c, eta=ETA), BuyerModel("exact_lb", ETA),
                         seed=ep, observer=observer)
        t_lam = tr.policy.t_lambda_
        if not np.all(tr.bought[:t_lam] == 1) or len(tr.reviews) < t_lam:
            violations.append((ep, 0, "phase-1 review missing"))
        if not np.array_equal(tr.revenue, tr.price * tr.bought):
            violations.append((ep, 0, "revenue increment"))
        if abs(tr.total_revenue - float(np.sum(tr.price * tr.bought))) > 1e-9:
            violations.append((ep, 0, "total revenue"))
        if abs(tr.regret - (T * tr.benchmark_per_round - tr.total_revenue)) > 1e-9:
            violations.append((ep, 0, "regret identity"))
        if np.any(np.isnan(tr.review) != (tr.bought == 0)):
            violations.append((ep, 0, "review iff bought"))
    report(2, not violations and phase2_rounds > 0,
           f"{len(violations)} violations over 500 episodes ({phase2_rounds} phase-2 rounds checked)")


def test_criterion_3_revenue_oracle():
    failures, worst = 0, 0.0
    for k in range(10):
        inst = build_random_instance(1 + k % 8, seed=300 + k)
        rep = validate_rev_oracle(inst, n=100_000, n_pairs=20, seed=k)
        failures += sum(not c.passed for c in rep.checks)
        worst = max([worst] + [c.deviation / c.band for c in rep.checks if c.band > 0])
    report(3, failures == 0, f"{failures} of 200 (p, Q) pairs outside 4-sigma; worst |dev|/band {worst:.2f}")


def test_criterion_4_benchmark_realisation():
    cfg = ExperimentConfig.from_dict({
        "instance": {"family": "explicit", "instance": {
            "d": 3, "horizon_T": 100000, "theta": [0.3, 0.6, 0.9], "q": [0.2, 0.3, 0.5],
            "value_dists": [{"kind": "bernoulli", "params": {"mean": m}} for m in (0.3, 0.6, 0.9)]}},
        "policies": ["oracle"], "buyer": "omniscient", "horizons": [100_000], "replicates": 20,
    })
    cell = run_sweep(cfg, write=False).cells[("oracle", 100_000)]
    ok = abs(cell.mean_regret) <= 4 * cell.std_err
    report(4, ok, f"mean regret {cell.mean_regret:.2f} within 4*SE = {4 * cell.std_err:.2f} of 0")


def test_criterion_5_fixed_prices_fail_on_hard_instance():
    horizons = [2**k for k in range(12, 17)]
    prices = [round(0.1 * k, 1) for k in range(1, 10)]
    buyer = BuyerModel("section5", ETA)
    best = []
    ok = True
    for T in horizons:
        inst = build_hard_instance(T, 3, ETA)
        p_star = optimal_price(inst)[0]
        regrets = []
        for p in prices:
            tr = run_episode(inst, FixedPrice(p), buyer, seed=episode_seed(0, f"fixed:{p}", T, 0))
            ok &= tr.total_revenue == 0.0 and abs(tr.regret / T - p_star) <= 1e-12
            regrets.append(tr.regret)
        best.append((T, min(regrets)))
    slope, _ = fit_scaling_exponent(best)
    ok &= slope >= 0.95
    report(5, ok, f"zero revenue for every p>0, regret/T = p*, best-fixed-price exponent {slope:.4f} >= 0.95")


@pytest.fixture(scope="module")
def hard_sweep():
    cfg = ExperimentConfig.from_dict({
        "instance": {"family": "hard", "d": 3, "eta": ETA},
        "policies": ["two_phase"], "buyer": "section5", "eta": ETA,
        "horizons": SCALING_HORIZONS, "replicates": SCALING_R, "base_seed": 6,
        "phase1_constant": 2, "lambda": "auto",
    })
    start = time.perf_counter()
    res = run_sweep(cfg, write=False)
    return res, time.perf_counter() - start


def test_criterion_6_two_phase_hard_regime(hard_sweep):
    res, elapsed = hard_sweep
    slope, _, n = res.exponents["two_phase"]
    ok = 0.50 <= slope <= 0.90 and n == len(SCALING_HORIZONS) and elapsed < 1800
    report(6, ok, f"fitted exponent {slope:.3f} in [0.50, 0.90] (theory 2/3); {elapsed:.0f}s < 1800s")


def test_criterion_7_two_phase_easy_regime(hard_sweep):
    hard, _ = hard_sweep
    cfg = ExperimentConfig.from_dict({
        "instance": {"family": "easy", "d": 3, "q_min": 0.25, "gap": 0.25, "seed": 0},
        "policies": ["two_phase"], "buyer": "exact_lb", "eta": ETA,
        "horizons": SCALING_HORIZONS, "replicates": SCALING_R, "base_seed": 7,
        "phase1_constant": 2, "lambda": "auto",
    })
    start = time.perf_counter()
    res = run_sweep(cfg, write=False)
    elapsed = time.perf_counter() - start
    slope = res.exponents["two_phase"][0]
    below = all(res.mean_regret("two_phase", T) < hard.mean_regret("two_phase", T) for T in SCALING_HORIZONS)
    ok = slope <= 0.75 and below and elapsed < 1800
    report(7, ok, f"fitted exponent {slope:.3f} <= 0.75; easy < hard at every T: {below}; {elapsed:.0f}s")


def test_criterion_8_determinism(tmp_path):
    import json

    cfg = {
        "instance": {"family": "hard", "d": 3, "eta": ETA},
        "policies": ["two_phase", "fixed:0.5"], "buyer": "section5",
        "horizons": [4096, 8192], "replicates": 3, "phase1_constant": 2, "output_dir": "out",
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    outputs = []
    for jobs in ("1", "2", "2"):
        cli_main(["sweep", str(path), "--jobs", jobs])
        cli_main(["run", "--config", str(path), "--out", str(tmp_path / "trace.csv")])
        files = sorted((tmp_path / "out").iterdir())
        outputs.append({f.name: f.read_bytes() for f in files} | {"trace": (tmp_path / "trace.csv").read_bytes()})
    ok = outputs[0] == outputs[1] == outputs[2]
    report(8, ok, "run + sweep CSVs byte-identical across 3 invocations (serial and 2 workers)")


def test_criterion_9_concentration():
    inst = build_random_instance(4, seed=99, T=5000)
    pol = TwoPhasePricing(phase1_constant=2, eta=ETA)
    buyer = BuyerModel("exact_lb", ETA)
    t_lam = pol.start(inst.theta, 5000).t_lambda_
    checkpoints = [t_lam + 100, 2500, 5000]
    assert t_lam + 100 < 2500
    counts = dict.fromkeys(checkpoints, 0)
    for r in range(200):
        snaps = concentration_violations(inst, pol, buyer, episode_seed(9, "two_phase", 5000, r), checkpoints)
        for t, bad in snaps.items():
            counts[t] += bad
    freqs = {t: c / 200 for t, c in counts.items()}
    ok = all(f <= 0.05 for f in freqs.values())
    report(9, ok, f"interval miss frequency per checkpoint {freqs} <= 0.05")
