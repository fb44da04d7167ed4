"""Command-line entry point.

Exit codes: 0 success, 2 infeasible, 3 configuration or input error,
4 solver budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import LoadedScenario, load_scenario
from .policy import DEFAULT_NN, ControllerState, PolicyLibrary, choose_policy
from .program import BUDGET
from .simlab import (
    METHODS,
    MixturePlantSpec,
    PendulumPlantSpec,
    VertexPlantSpec,
    format_benchmark_table,
    monte_carlo,
    volume_benchmark,
    write_benchmark_csv,
    write_rollouts,
)
from .synth import ConfigError, synthesize, write_result
from .sysmodel import ModelError
from .zonoset import ZonotopeError, vertices_2d

EXIT_OK, EXIT_INFEASIBLE, EXIT_CONFIG, EXIT_BUDGET = 0, 2, 3, 4

log = logging.getLogger("zonompc")


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def _schedule(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("mode schedule must be comma-separated integers") from None


def _state_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse state vector {text!r}") from None


def _write_json(path: Path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _projections(n: int):
    # position/velocity pairs for mechanical states (q1..qk, dq1..dqk)
    if n > 2 and n % 2 == 0:
        return [(i, i + n // 2) for i in range(n // 2)]
    return [(0, 1)]


def write_outlines(result, outdir: Path):
    """Ordered vertex lists of the 2-D projections of every tube set."""
    n = result.X[0].dim
    if n < 2:
        return
    for i, j in _projections(n):
        with open(outdir / f"outline_x{i}_x{j}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "vertex", f"x{i}", f"x{j}"])
            for k, Z in enumerate(result.X):
                for v, (a, b) in enumerate(vertices_2d(Z, (i, j))):
                    w.writerow([k, v, format(a, ".17g"), format(b, ".17g")])


def _load(args) -> LoadedScenario:
    return load_scenario(args.scenario, args.reduction_p, args.mode_schedule)


def cmd_synth(args) -> int:
    sc = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = synthesize(sc.system, sc.scenario, sc.synth)
    extra = {"scenario": sc.name, "model": sc.model, "reduction_p": sc.scenario.reduction_p}
    if not result.ok:
        write_result(result, out, extra)
        print(f"synthesis {result.status}", file=sys.stderr)
        return EXIT_BUDGET if result.status == BUDGET else EXIT_INFEASIBLE
    library = PolicyLibrary.from_result(result)
    library.save(out, result, extra)
    _write_json(out / "audit.json", result.info.get("audit", {}))
    write_outlines(result, out)
    audit = result.info.get("audit", {})
    verdict = "feasible" if audit.get("passed") else "audit-failed"
    print(f"{result.status} objective={result.objective:.6g} gap={result.gap:.3g} audit={verdict}")
    if result.status == BUDGET:
        return EXIT_BUDGET
    return EXIT_OK


def _plant_spec(sc: LoadedScenario, kind: str):
    if kind == "vertex":
        q_c = getattr(sc.model_config, "q_c", None)
        return VertexPlantSpec(sc.system, q_c)
    if sc.model == "pendulum_wall":
        return PendulumPlantSpec(sc.model_config, kind)
    if kind == "linear":
        return MixturePlantSpec(sc.system)
    raise ConfigError(f"plant kind {kind!r} is not available for model {sc.model}")


def cmd_simulate(args) -> int:
    sc = _load(args)
    lib_dir = Path(args.library)
    if not (lib_dir / "manifest.json").exists():
        raise ConfigError(f"library {lib_dir} not found (run synth first)")
    library, result = PolicyLibrary.load(lib_dir)
    if result.X[0].dim != sc.system.n:
        raise ConfigError("library and scenario dimensions differ")
    sim = sc.simulation
    n = args.rollouts if args.rollouts is not None else int(sim.get("rollouts", 200))
    kind = args.plant or sim.get("plant", "linear")
    spec = _plant_spec(sc, kind)
    stats, rollouts = monte_carlo(
        spec, library, result, n, seed=args.seed, workers=args.workers, nn=args.nn, return_rollouts=True
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_rollouts(rollouts, out / "rollouts", sc.scenario.dt)
    stats.write_csv(out / "membership_per_step.csv")
    _write_json(out / "summary.json", {"plant": kind, "seed": args.seed, **stats.summary()})
    s = stats.summary()
    print(
        f"rollouts={n} membership={s['membership_time_indexed']:.4f} "
        f"selected={s['membership_selected']:.4f} propagation={s['propagation_containment']:.4f}"
    )
    return EXIT_OK


def cmd_bench_reduce(args) -> int:
    sc = _load(args)
    lib_dir = Path(args.library)
    if not (lib_dir / "manifest.json").exists():
        raise ConfigError(f"library {lib_dir} not found (run synth first)")
    _, result = PolicyLibrary.load(lib_dir)
    methods = args.methods.split(",") if args.methods else list(METHODS)
    rows, summary = volume_benchmark(result, sc.system, methods, args.reduction_p)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_benchmark_csv(rows, out / "benchmark.csv")
    table = format_benchmark_table(summary)
    (out / "benchmark_summary.txt").write_text(table)
    print(table, end="")
    return EXIT_OK


def cmd_policy_eval(args) -> int:
    library, _ = PolicyLibrary.load(args.library)
    x = args.state
    if x.size != library.dim:
        raise ConfigError(f"state has {x.size} entries, library expects {library.dim}")
    state = ControllerState(args.last)
    u, k = choose_policy(x, state, library, args.nn)
    print(f"kappa={k} u={','.join(format(v, '.17g') for v in u)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zonompc", description="Robust explicit control with zonotopic tubes.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, library=False):
        sp.add_argument("--scenario", required=True, help="scenario YAML file")
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--seed", type=_u64, default=0)
        sp.add_argument("--reduction-p", type=int, default=None, help="generator columns after reduction")
        sp.add_argument("--mode-schedule", type=_schedule, default=None, help="comma-separated modes for steps 1..N-1")
        sp.add_argument("--workers", type=int, default=1)
        if library:
            sp.add_argument("--library", required=True, help="directory written by synth")

    sp = sub.add_parser("synth", help="synthesize a tube and its policy")
    common(sp)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("simulate", help="Monte-Carlo closed-loop rollouts")
    common(sp, library=True)
    sp.add_argument("--rollouts", type=int, default=None)
    sp.add_argument("--plant", choices=("linear", "nonlinear", "vertex"), default=None)
    sp.add_argument("--nn", type=int, default=DEFAULT_NN)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("bench-reduce", help="order-reduction volume benchmark")
    common(sp, library=True)
    sp.add_argument("--methods", default=None, help="comma-separated subset of " + ",".join(METHODS))
    sp.set_defaults(func=cmd_bench_reduce)

    sp = sub.add_parser("policy-eval", help="evaluate the policy at one state")
    sp.add_argument("--library", required=True)
    sp.add_argument("--state", type=_state_vector, required=True, help="comma-separated state")
    sp.add_argument("--last", type=int, default=None, help="index applied at the previous call")
    sp.add_argument("--nn", type=int, default=DEFAULT_NN)
    sp.set_defaults(func=cmd_policy_eval)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ModelError, ZonotopeError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
