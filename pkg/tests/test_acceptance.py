"""End-to-end acceptance checks; each test prints one PASS/FAIL line."""

import itertools
import math
import time
from pathlib import Path

import numpy as np
import pytest

from helpers import brute_force_choice, random_zonotope, toy_hybrid
from zonompc.cli import EXIT_OK, main
from zonompc.config import load_scenario
from zonompc.policy import ControllerState, PolicyLibrary, choose_policy
from zonompc.reduction import REDUCERS, reazor
from zonompc.simlab import PendulumPlantSpec, VertexPlantSpec, monte_carlo, volume_benchmark
from zonompc.synth import SynthesisConfig, synthesize
from zonompc.zonoset import (
    MatrixZonotope,
    Zonotope,
    contains,
    contains_point,
    convex_hull_pair,
    minkowski,
    minkowski_diag,
    mz_multiply,
    support,
)

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"
CERT_TOL = 1e-6


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[acceptance {number}] {'PASS' if ok else 'FAIL'} {title} {detail}".rstrip())
        assert ok, f"criterion {number} failed: {detail}"

    return emit


@pytest.fixture(scope="module")
def hybrid_tube():
    """The two-mode pendulum tube from the shipped scenario, solved by branch and bound."""
    sc = load_scenario(SCENARIOS / "pendulum_wall.yaml")
    t0 = time.perf_counter()
    res = synthesize(sc.system, sc.scenario, sc.synth)
    return sc, res, time.perf_counter() - t0


def test_reazor_worked_example(report):
    t0 = time.perf_counter()
    G = np.array([[4, 2, 2, 1, 1], [4, 1, 0, 2, 1]])
    red = reazor(G, 4)
    step = reazor(np.hstack([red.zonotope.generator, [[1], [1]]]), 4)
    elapsed = time.perf_counter() - t0
    ok = (
        np.array_equal(red.slacks, [4, 3])
        and np.array_equal(red.zonotope.generator, [[4, 0, 4, 2], [0, 3, 4, 1]])
        and np.array_equal(step.zonotope.generator, [[7, 0, 4, 0], [0, 6, 0, 3]])
    )
    report(1, "ReaZOR worked example", ok, f"({elapsed * 1e3:.2f} ms)")


def test_set_algebra_oracles(report):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    failures = []
    for i in range(500):
        n = int(rng.integers(1, 5))
        a = random_zonotope(rng, n, int(rng.integers(1, 11)))
        b = random_zonotope(rng, n, int(rng.integers(1, 11)))
        d = rng.normal(size=n)
        if not math.isclose(support(minkowski(a, b), d), support(a, d) + support(b, d), abs_tol=1e-9):
            failures.append(("support", i))
        da = Zonotope(a.center, np.hstack([np.diag(np.abs(rng.normal(size=n))), a.generator]))
        db = Zonotope(b.center, np.hstack([np.diag(np.abs(rng.normal(size=n))), b.generator]))
        if not math.isclose(support(minkowski_diag(da, db), d), support(minkowski(da, db), d), abs_tol=1e-9):
            failures.append(("minkowski_diag", i))
        H = convex_hull_pair(a, b)
        if not (contains(a, H, CERT_TOL)[0] and contains(b, H, CERT_TOL)[0]):
            failures.append(("hull", i))
        Z = a.padded(max(a.n_generators, n))
        p = int(rng.integers(n, Z.n_generators + 1))
        for name, reducer in REDUCERS.items():
            if not contains(Z, reducer(Z, p), CERT_TOL)[0]:
                failures.append((name, i))
    # 1000 samples spread over ten matrix zonotopes
    for _ in range(10):
        n = int(rng.integers(1, 5))
        MZ = MatrixZonotope(rng.normal(size=(n, n)), tuple(0.2 * rng.normal(size=(n, n)) for _ in range(2)))
        Z = random_zonotope(rng, n, int(rng.integers(1, 6)))
        out = mz_multiply(MZ, Z)
        for _ in range(100):
            x = Z.center + Z.generator @ rng.uniform(-1, 1, Z.n_generators)
            if not contains_point(out, MZ.sample(rng) @ x, tol=CERT_TOL):
                failures.append(("mz_multiply", n))
    elapsed = time.perf_counter() - t0
    report(2, "set-algebra oracle suite", not failures and elapsed < 60, f"({len(failures)} failures, {elapsed:.1f} s)")


def test_synthesis_audit(report, hybrid_tube):
    sc, res, elapsed = hybrid_tube
    audit = res.info.get("audit", {})
    inputs_ok = all(contains(U, Zonotope([0.0], [[20.0]]), CERT_TOL)[0] for U in res.U)
    terminal_ok = contains(res.X[-1], sc.scenario.goal, CERT_TOL)[0]
    ok = res.ok and audit["passed"] and audit["max_violation"] <= 1e-6 and inputs_ok and terminal_ok and elapsed < 600
    # the convex path with the mode schedule fixed
    t0 = time.perf_counter()
    fixed = synthesize(sc.system, sc.scenario, SynthesisConfig(mode_schedule=res.modes[1:]))
    fixed_time = time.perf_counter() - t0
    ok = ok and fixed.ok and fixed.info["audit"]["passed"] and fixed_time < 60
    detail = (
        f"(status {res.status}, gap {res.gap:.3g}, max violation {audit['max_violation']:.2e}, "
        f"{elapsed:.0f} s; fixed schedule {fixed_time:.1f} s)"
    )
    report(3, "hybrid synthesis audit", ok, detail)


def test_branch_and_bound_vs_enumeration(report):
    t0 = time.perf_counter()
    system, scenario = toy_hybrid(N=6)
    best = math.inf
    for sched in itertools.product((0, 1), repeat=5):
        r = synthesize(system, scenario, SynthesisConfig(mode_schedule=list(sched)))
        if r.ok:
            best = min(best, r.objective)
    res = synthesize(system, scenario)
    elapsed = time.perf_counter() - t0
    ok = res.ok and abs(res.objective - best) <= 1e-6 and elapsed < 60
    report(4, "branch and bound equals enumeration", ok, f"({res.objective:.9g} vs {best:.9g}, {elapsed:.1f} s)")


def test_monte_carlo_containment(report, hybrid_tube):
    sc, res, _ = hybrid_tube
    t0 = time.perf_counter()
    library = PolicyLibrary.from_result(res)
    linear = monte_carlo(PendulumPlantSpec(sc.model_config, "linear"), library, res, 200, seed=1)
    square = load_scenario(SCENARIOS / "pendulum_wall_square.yaml")
    sq_res = synthesize(square.system, square.scenario, square.synth)
    vertex = monte_carlo(
        VertexPlantSpec(square.system, square.model_config.q_c),
        PolicyLibrary.from_result(sq_res),
        sq_res,
        200,
        seed=1,
    )
    elapsed = time.perf_counter() - t0
    s_lin, s_vx = linear.summary(), vertex.summary()
    ok = s_lin["membership_time_indexed"] >= 0.95 and s_vx["propagation_containment"] == 1.0 and elapsed < 300
    detail = (
        f"(linear membership {s_lin['membership_time_indexed']:.4f}, "
        f"vertex propagation {s_vx['propagation_containment']:.4f}, {elapsed:.0f} s)"
    )
    report(5, "Monte-Carlo containment", ok, detail)


def test_volume_benchmark(report, hybrid_tube):
    sc, res, _ = hybrid_tube
    t0 = time.perf_counter()
    _, summary = volume_benchmark(res, sc.system, certify=True)
    elapsed = time.perf_counter() - t0
    below = all(s["mean"] < 5.0 and s["max"] < 5.0 for s in summary.values())
    ratio = summary["reazor"]["mean"] / summary["girard"]["mean"]
    ok = below and ratio <= 2.0 and elapsed < 120
    detail = ", ".join(f"{m} {s['mean']:.3f}/{s['max']:.3f}%" for m, s in summary.items())
    report(6, "volume benchmark", ok, f"(mean/max {detail}; {elapsed:.0f} s)")


def test_selection_oracle(report, hybrid_tube):
    _, res, _ = hybrid_tube
    library = PolicyLibrary.from_result(res)
    N = len(library)
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(10_000):
        k = int(rng.integers(0, N))
        x = res.X[k].center + res.X[k].generator @ rng.uniform(-1.5, 1.5, res.X[k].n_generators)
        last = None if rng.random() < 0.3 else int(rng.integers(0, N))
        if choose_policy(x, ControllerState(last), library, nn=N)[1] != brute_force_choice(x, last, library):
            mismatches += 1
    successor_misses = 0
    for _ in range(2_000):
        k = int(rng.integers(0, N - 1))
        P = library.entries[k + 1].bound
        x = P.center + P.generator @ rng.uniform(-1, 1, P.generator.shape[1])
        if choose_policy(x, ControllerState(k), library)[1] != k + 1:
            successor_misses += 1
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and successor_misses == 0 and elapsed < 30
    report(7, "selection rule oracle", ok, f"({mismatches} mismatches, {successor_misses} successor misses, {elapsed:.1f} s)")


def test_cli_determinism(report, tmp_path):
    scenario = str(SCENARIOS / "pendulum_wall_square.yaml")
    trees = []
    for run in ("a", "b"):
        lib, sim = tmp_path / run / "lib", tmp_path / run / "sim"
        assert main(["synth", "--scenario", scenario, "--out", str(lib)]) == EXIT_OK
        argv = ["simulate", "--scenario", scenario, "--library", str(lib), "--out", str(sim)]
        assert main(argv + ["--rollouts", "20", "--seed", "3"]) == EXIT_OK
        root = tmp_path / run
        trees.append({p.relative_to(root): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()})
    ok = trees[0] == trees[1] and len(trees[0]) > 0
    report(8, "CLI determinism", ok, f"({len(trees[0])} files compared)")
