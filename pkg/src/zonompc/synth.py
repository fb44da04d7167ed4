"""Optimal control over zonotopic state and input sets.

The decision variables per step are the state-set center and generator
``(c_k, G_k)``, the input-set center ``v_k`` and the feedback gain
``theta_k``. Under the feedback ``u = v - theta G^+ (x - c)`` the successor
of ``<c, G>`` under a vertex model is ``<A c + B v + d, A G - B theta>``.
Successors for all vertex models are hulled, reduced with ReaZOR and
inflated by the disturbance, which keeps the program convex.

Hybrid systems add one binary per step and mode and couple the mode-wise
hulls to a common set with big-M relaxed constraints.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import reduction, zonoset
from .program import (
    BUDGET,
    INFEASIBLE,
    OPTIMAL,
    BnBConfig,
    ClarabelAdapter,
    ConvexProgram,
    LinExpr,
    as_expr,
    branch_and_bound,
    hstack,
    pad_columns,
    vstack,
)
from .sysmodel import HybridUncertainSystem, Scenario, UncertainAffineSystem, matrix_models_from_vertices
from .zonoset import Zonotope, contains

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
PROPAGATIONS = ("vertex_hull", "matrix_zonotope")


class ConfigError(ValueError):
    """Raised for inconsistent synthesis inputs (shapes, schedules, targets)."""


@dataclass
class SynthesisConfig:
    """Options for building and solving the control problem.

    Parameters
    ----------
    propagation : {"vertex_hull", "matrix_zonotope"}
    reduce : bool
        Apply ReaZOR after every hull. Without it generator widths grow.
    big_m : float, optional
        Relaxation constant for hybrid problems; defaults to a scale derived
        from the scenario sets.
    mode_schedule : sequence of int, optional
        Fix the mode per step, which removes the binaries.
    """

    propagation: str = "vertex_hull"
    reduce: bool = True
    big_m: float | None = None
    mode_schedule: Sequence[int] | None = None
    bnb: BnBConfig = field(default_factory=BnBConfig)
    solver_tol: float = 1e-8
    max_iter: int = 500
    audit_tol: float = 1e-6

    def __post_init__(self):
        if self.propagation not in PROPAGATIONS:
            raise ConfigError(f"unknown propagation {self.propagation!r}")


@dataclass
class StepHandles:
    c: LinExpr
    G: LinExpr
    v: LinExpr | None = None
    theta: LinExpr | None = None
    a: LinExpr | None = None
    modes: LinExpr | None = None


@dataclass
class OCPBundle:
    program: ConvexProgram
    steps: list
    groups: list
    fixed_modes: list


# -- set propagation fragments -------------------------------------------------


def _hull_pair(x, X, y, Y):
    w = max(X.shape[1], Y.shape[1])
    X, Y = pad_columns(X, w), pad_columns(Y, w)
    G = hstack([(X + Y) * 0.5, (x - y) * 0.5, (X - Y) * 0.5])
    return (x + y) * 0.5, G


def hull_fragment(images: list) -> tuple[LinExpr, LinExpr]:
    """Symbolic iterated pairwise hull of ``[(center, generator), ...]``."""
    items = zonoset.pad_to_power_of_two(images)
    while len(items) > 1:
        items = [_hull_pair(*items[i], *items[i + 1]) for i in range(0, len(items), 2)]
    return items[0]


def propagate_vertex_hull(c, G, v, theta, vertices) -> tuple[LinExpr, LinExpr]:
    """Hull of the successor sets ``<A_i c + B_i v + d_i, A_i G - B_i theta>``."""
    images = [(v_.A @ c + v_.B @ v + v_.d, v_.A @ G - v_.B @ theta) for v_ in vertices]
    return hull_fragment(images)


def propagate_matrix_zonotope(c, G, v, theta, mz) -> tuple[LinExpr, LinExpr]:
    """Product of the augmented matrix set ``[A B d]`` with ``<(c, v, 1), (G, -theta, 0)>``."""
    p = G.shape[1]
    z = vstack([c, v, as_expr(np.ones(1))])
    Z = vstack([G, -theta, as_expr(np.zeros((1, p)))])
    blocks = [mz.center_matrix @ Z]
    for M in mz.generator_matrices:
        blocks += [M @ z, M @ Z]
    return mz.center_matrix @ z, hstack(blocks)


def _add_disturbance(G: LinExpr, W: Zonotope) -> LinExpr:
    n = W.dim
    if W.n_generators == 0:
        return G
    try:
        w = zonoset._leading_diagonal(W)
        diagonal = W.n_generators == n
    except zonoset.ZonotopeError:
        diagonal = False
    if diagonal and G.shape[1] >= n:
        return G + np.hstack([np.diag(w), np.zeros((n, G.shape[1] - n))])
    return hstack([G, W.generator])


# -- problem construction --------------------------------------------------------


class _Builder:
    def __init__(self, scenario: Scenario, config: SynthesisConfig, n: int, m: int, horizon: int):
        if scenario.horizon != horizon:
            raise ConfigError(f"scenario horizon {scenario.horizon} differs from system horizon {horizon}")
        if scenario.x0.dim != n or scenario.u_nominal.shape[1] != m:
            raise ConfigError("scenario dimensions do not match the system")
        if config.reduce and scenario.reduction_p < n:
            raise ConfigError("reduction target below the state dimension")
        self.sc, self.cfg = scenario, config
        self.n, self.m, self.N = n, m, horizon
        self.prog = ConvexProgram()
        self.steps = [StepHandles(as_expr(scenario.x0.center), as_expr(scenario.x0.generator))]

    def inputs(self, k: int):
        st = self.steps[k]
        st.v = self.prog.variable(f"v{k}", (self.m,), "input_center")
        st.theta = self.prog.variable(f"theta{k}", (self.m, st.G.shape[1]), "gain")
        self.prog.add_containment(st.v, st.theta, self.sc.input_bound(k), name=f"u{k}")

    def propagate(self, k: int, vertices=None, mz=None):
        st = self.steps[k]
        if self.cfg.propagation == "matrix_zonotope":
            return propagate_matrix_zonotope(st.c, st.G, st.v, st.theta, mz)
        return propagate_vertex_hull(st.c, st.G, st.v, st.theta, vertices)

    def close_step(self, k: int, c_star: LinExpr, G_star: LinExpr, W: Zonotope):
        """Reduce, add the disturbance and bind the result to fresh variables."""
        a = None
        if self.cfg.reduce:
            frag = reduction.reazor_fragment(self.prog, G_star, self.sc.reduction_p, name=f"red{k}")
            G_star, a = frag.generator, frag.slacks
            self.prog.add_linear_cost(frag.cost, self.sc.reduction_weight)
        G_next = _add_disturbance(G_star, W)
        c = self.prog.variable(f"c{k + 1}", (self.n,), "state_center")
        G = self.prog.variable(f"G{k + 1}", G_next.shape, "state_generator")
        self.prog.add_eq(c, c_star)
        self.prog.add_eq(G, G_next)
        self.steps[k].a = a
        self.steps.append(StepHandles(c, G))

    def finish(self):
        sc, prog = self.sc, self.prog
        last = self.steps[-1]
        prog.add_containment(last.c, last.G, sc.goal, name="goal")
        bounds = sc.state_bounds
        if bounds is not None:
            for k in range(1, self.N + 1):
                B = bounds[k - 1] if isinstance(bounds, list) else bounds
                prog.add_containment(self.steps[k].c, self.steps[k].G, B, name=f"path{k}")
        build_cost(prog, self.steps, sc)


def build_cost(program: ConvexProgram, steps: list, scenario: Scenario):
    """Center tracking, generator size and (already added) reduction cost."""
    sc = scenario
    for k, st in enumerate(steps):
        if k > 0:
            program.add_quadform_cost(st.c - sc.x_nominal[k], sc.Q_c)
            program.add_sq_cost(st.G.flatten(), sc.Q_g)
        if st.v is not None:
            program.add_quadform_cost(st.v - sc.u_nominal[k], sc.R_c)
            program.add_sq_cost(st.theta.flatten(), sc.R_g)


def build_ocp(system: UncertainAffineSystem, scenario: Scenario, config: SynthesisConfig | None = None) -> OCPBundle:
    """Convex program for an uncertain affine (non-hybrid) system."""
    cfg = config or SynthesisConfig()
    b = _Builder(scenario, cfg, system.n, system.m, system.horizon)
    mzs = None
    if cfg.propagation == "matrix_zonotope":
        mzs = system.matrix_models or matrix_models_from_vertices(system.vertices)
    for k in range(system.horizon):
        b.inputs(k)
        c_star, G_star = b.propagate(k, system.vertices[k], mzs[k] if mzs else None)
        b.close_step(k, c_star, G_star, system.disturbances[k])
    b.finish()
    return OCPBundle(b.prog, b.steps, [], [])


def initial_mode(system: HybridUncertainSystem, X0: Zonotope) -> int:
    for j, H in enumerate(system.regions):
        ok, _ = contains(X0, H)
        if ok:
            return j
    raise ConfigError("the initial set is not contained in any region")


def build_hybrid_ocp(
    system: HybridUncertainSystem, scenario: Scenario, config: SynthesisConfig | None = None
) -> OCPBundle:
    """Mixed-binary program for a piecewise system.

    ``b_{k,j} = 1`` selects mode ``j`` at step ``k``; the common successor set
    must match mode ``j``'s hull and ``X_k`` must lie in region ``j``, both
    relaxed by ``M (1 - b_{k,j})``. Step 0 uses the region holding ``X_0``.
    With ``config.mode_schedule`` (modes for steps ``1..N-1``; a full-length
    schedule must start with the initial mode) only the scheduled mode is
    built, with hard region constraints.
    """
    cfg = config or SynthesisConfig()
    N, J = system.horizon, system.n_modes
    mode0 = initial_mode(system, scenario.x0)
    schedule = None
    if cfg.mode_schedule is not None:
        schedule = [int(j) for j in cfg.mode_schedule]
        if len(schedule) == N - 1:
            schedule = [mode0, *schedule]
        if len(schedule) != N:
            raise ConfigError(f"mode schedule needs {N - 1} entries (steps 1..N-1), got {len(schedule)}")
        if any(not 0 <= j < J for j in schedule):
            raise ConfigError("mode schedule refers to an unknown mode")
        if schedule[0] != mode0:
            raise ConfigError(f"schedule starts in mode {schedule[0]} but the initial set lies in mode {mode0}")
    M = cfg.big_m if cfg.big_m is not None else scenario.big_m(system)
    b = _Builder(scenario, cfg, system.n, system.m, N)
    prog = b.prog
    mzs = None
    if cfg.propagation == "matrix_zonotope":
        mzs = [matrix_models_from_vertices(system.vertices[j]) for j in range(J)]
    groups, fixed = [], []
    for k in range(N):
        b.inputs(k)
        st = b.steps[k]
        if k == 0 or schedule is not None:
            j = mode0 if k == 0 else schedule[k]
            fixed.append(j)
            if k > 0:
                prog.add_containment(st.c, st.G, system.regions[j], name=f"reg{k}.{j}")
            c_star, G_star = b.propagate(k, system.vertices[j][k], mzs[j][k] if mzs else None)
        else:
            fixed.append(None)
            modes = prog.variable(f"mode{k}", (J,), "mode", binary=True)
            st.modes = modes
            groups.append(list(prog.block(f"mode{k}").index))
            prog.add_eq(modes.sum(), 1.0)
            hulls = [b.propagate(k, system.vertices[j][k], mzs[j][k] if mzs else None) for j in range(J)]
            w = max(G.shape[1] for _, G in hulls)
            c_star = prog.variable(f"cstar{k}", (system.n,), "hull_center")
            G_star = prog.variable(f"Gstar{k}", (system.n, w), "hull_generator")
            for j, (cj, Gj) in enumerate(hulls):
                relax = modes[j : j + 1] * (-M) + M
                diff = hstack([c_star - cj, G_star - pad_columns(Gj, w)])
                S = prog.abs_bound(diff, f"couple{k}.{j}", "coupling")
                prog.add_le(S.sum() - relax)
                prog.add_containment(st.c, st.G, system.regions[j], bound=1.0 + relax, name=f"reg{k}.{j}")
        b.close_step(k, c_star, G_star, system.disturbances[k])
    b.finish()
    return OCPBundle(prog, b.steps, groups, fixed)


# -- solving and results ---------------------------------------------------------


@dataclass
class SynthesisResult:
    """Solved state/input zonotope sequences.

    ``X`` has ``N + 1`` sets, ``U``, ``theta``, ``slacks`` and ``modes`` have ``N``.
    """

    status: str
    objective: float = float("nan")
    gap: float = 0.0
    X: list = field(default_factory=list)
    U: list = field(default_factory=list)
    theta: list = field(default_factory=list)
    slacks: list = field(default_factory=list)
    modes: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def horizon(self) -> int:
        return len(self.U)

    @property
    def ok(self) -> bool:
        return self.status in (OPTIMAL, BUDGET) and bool(self.X)

    def feedback_gain(self, k: int) -> np.ndarray:
        """``theta_k G_k^+`` mapping the state offset to the input offset."""
        return self.theta[k] @ np.linalg.pinv(self.X[k].generator)


def _extract(bundle: OCPBundle, x: np.ndarray) -> dict:
    X, U, th, sl, modes = [], [], [], [], []
    for k, st in enumerate(bundle.steps):
        X.append(Zonotope(st.c.value(x), st.G.value(x)))
        if st.v is None:
            continue
        theta = st.theta.value(x)
        th.append(theta)
        U.append(Zonotope(st.v.value(x), theta))
        sl.append(st.a.value(x) if st.a is not None else np.zeros(0))
        if bundle.fixed_modes:
            j = bundle.fixed_modes[k]
            modes.append(int(np.argmax(st.modes.value(x))) if j is None else j)
        else:
            modes.append(0)
    return dict(X=X, U=U, theta=th, slacks=sl, modes=modes)


def solve(bundle: OCPBundle, config: SynthesisConfig | None = None) -> SynthesisResult:
    cfg = config or SynthesisConfig()
    adapter = ClarabelAdapter(tol=cfg.solver_tol, max_iter=cfg.max_iter)
    prog = bundle.program
    if prog.has_binaries:
        out = branch_and_bound(prog, adapter, bundle.groups, cfg.bnb)
    else:
        out = adapter.solve(prog)
    info = {"n_vars": prog.n_vars, "n_binaries": int(prog.binary_index.size), **out.info}
    if out.x is None:
        return SynthesisResult(out.status, info=info)
    x = out.x
    if prog.has_binaries:
        # snap the binaries; the relaxation tolerance leaves them within 1e-8 of {0, 1}
        idx = prog.binary_index
        x = x.copy()
        x[idx] = np.round(x[idx])
    res = SynthesisResult(out.status, float(out.objective), float(out.info.get("gap", 0.0)), info=info)
    for key, val in _extract(bundle, x).items():
        setattr(res, key, val)
    res.info["max_constraint_violation"] = prog.max_violation(out.x)
    return res


def synthesize(system, scenario: Scenario, config: SynthesisConfig | None = None) -> SynthesisResult:
    """Build and solve the control problem for an affine or hybrid system."""
    cfg = config or SynthesisConfig()
    if isinstance(system, HybridUncertainSystem):
        bundle = build_hybrid_ocp(system, scenario, cfg)
    else:
        if cfg.mode_schedule is not None:
            raise ConfigError("a mode schedule needs a hybrid system")
        bundle = build_ocp(system, scenario, cfg)
    result = solve(bundle, cfg)
    if result.ok:
        result.info["audit"] = audit(result, system, scenario, cfg).summary()
    return result


# -- audit -------------------------------------------------------------------------


@dataclass
class AuditReport:
    """Independent re-check of a solution with fresh LPs."""

    tol: float
    checks: list = field(default_factory=list)

    def record(self, name: str, violation: float):
        self.checks.append((name, float(violation)))

    @property
    def max_violation(self) -> float:
        return max((v for _, v in self.checks), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol

    def summary(self) -> dict:
        worst = max(self.checks, key=lambda c: c[1], default=("none", 0.0))
        return {"passed": self.passed, "max_violation": self.max_violation, "worst": worst[0], "n_checks": len(self.checks)}


def _containment_violation(inner: Zonotope, outer: Zonotope) -> float:
    """How far ``inner`` may stick out of ``outer``, in state units (inf-norm).

    A margin ``t`` puts ``inner`` inside ``outer`` grown by ``(t - 1)`` times its
    generator, whose extent is bounded by the largest absolute row sum.
    """
    try:
        t, _ = zonoset.containment_margin(inner, outer)
    except zonoset.SolverError:
        # an LP that cannot be solved certifies nothing
        return math.inf
    if t <= 1.0:
        return 0.0
    if math.isinf(t):
        return math.inf
    return (t - 1.0) * float(np.abs(outer.generator).sum(axis=1).max(initial=0.0))


def _vertices_for(system, k: int, mode: int):
    if isinstance(system, HybridUncertainSystem):
        return system.vertices[mode][k]
    return system.vertices[k]


def vertex_images(system, X: Zonotope, v, theta, k: int, mode: int = 0) -> list:
    """Correlated successor sets ``<A_i c + B_i v + d_i, A_i G - B_i theta>``, one per vertex model."""
    return [
        Zonotope(m.A @ X.center + m.B @ v + m.d, m.A @ X.generator - m.B @ theta)
        for m in _vertices_for(system, k, mode)
    ]


def numeric_successor(system, X: Zonotope, v, theta, k: int, mode: int = 0, propagation="vertex_hull") -> Zonotope:
    """Numeric over-approximation of the successor set, before reduction and disturbance."""
    if propagation == "matrix_zonotope":
        mz = matrix_models_from_vertices([_vertices_for(system, k, mode)])[0]
        z = np.concatenate([X.center, v, [1.0]])
        Z = np.vstack([X.generator, -theta, np.zeros((1, X.n_generators))])
        return zonoset.mz_multiply(mz, Zonotope(z, Z))
    return zonoset.convex_hull_many(vertex_images(system, X, v, theta, k, mode))


def audit(result: SynthesisResult, system, scenario: Scenario, config: SynthesisConfig | None = None) -> AuditReport:
    """Re-verify a solution with fresh containment LPs.

    Checks, per step, that every vertex image inflated by the disturbance lies
    in ``X_{k+1}``, that the reduction slacks dominate the row sums of the
    recomputed successor, input containment and (hybrid) region containment,
    then the terminal and optional path containments.
    """
    cfg = config or SynthesisConfig()
    rep = AuditReport(cfg.audit_tol)
    if not result.X:
        return rep
    hybrid = isinstance(system, HybridUncertainSystem)
    for k in range(result.horizon):
        Xk, Uk, mode = result.X[k], result.U[k], result.modes[k]
        rep.record(f"input{k}", _containment_violation(Uk, scenario.input_bound(k)))
        if hybrid and k > 0:
            rep.record(f"region{k}", _containment_violation(Xk, system.regions[mode]))
        W = system.disturbances[k]
        for i, Z in enumerate(vertex_images(system, Xk, Uk.center, result.theta[k], k, mode)):
            rep.record(f"propagation{k}.{i}", _containment_violation(zonoset.minkowski(Z, W), result.X[k + 1]))
        if cfg.reduce:
            succ = numeric_successor(system, Xk, Uk.center, result.theta[k], k, mode, cfg.propagation)
            succ = succ.padded(max(succ.n_generators, scenario.reduction_p))
            red = reduction.reazor(succ.generator, scenario.reduction_p)
            rep.record(f"slack{k}", float(np.clip(red.slacks - result.slacks[k], 0, None).max()))
    rep.record("goal", _containment_violation(result.X[-1], scenario.goal))
    if scenario.state_bounds is not None:
        for k in range(1, result.horizon + 1):
            B = scenario.state_bounds[k - 1] if isinstance(scenario.state_bounds, list) else scenario.state_bounds
            rep.record(f"path{k}", _containment_violation(result.X[k], B))
    return rep


# -- serialization -----------------------------------------------------------------


def _fmt(v) -> str:
    return format(float(v), ".17g")


def _write_rows(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _centers_rows(sets):
    return [[k, *map(_fmt, Z.center)] for k, Z in enumerate(sets)]


def _generator_rows(mats):
    rows = []
    for k, G in enumerate(mats):
        for i in range(G.shape[0]):
            for j in range(G.shape[1]):
                rows.append([k, i, j, _fmt(G[i, j])])
    return rows


def write_result(result: SynthesisResult, outdir, extra: dict | None = None):
    """Write the manifest and per-sequence CSV files into ``outdir``."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "status": result.status,
        "objective": result.objective,
        "gap": result.gap,
        "horizon": result.horizon,
        "n": result.X[0].dim if result.X else None,
        "m": result.U[0].dim if result.U else None,
        "state_widths": [Z.n_generators for Z in result.X],
        "input_widths": [Z.n_generators for Z in result.U],
        # wall-clock fields would break byte-identical reruns
        "info": _jsonable({k: v for k, v in result.info.items() if k != "elapsed"}),
        **(extra or {}),
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if not result.X:
        return
    n, m = result.X[0].dim, result.U[0].dim
    _write_rows(out / "x_centers.csv", ["k", *(f"x{i}" for i in range(n))], _centers_rows(result.X))
    _write_rows(out / "x_generators.csv", ["k", "row", "col", "value"], _generator_rows([Z.generator for Z in result.X]))
    _write_rows(out / "u_centers.csv", ["k", *(f"u{i}" for i in range(m))], _centers_rows(result.U))
    _write_rows(out / "u_generators.csv", ["k", "row", "col", "value"], _generator_rows(result.theta))
    _write_rows(
        out / "reduction_slacks.csv",
        ["k", "row", "value"],
        [[k, i, _fmt(v)] for k, a in enumerate(result.slacks) for i, v in enumerate(a)],
    )
    _write_rows(out / "mode_schedule.csv", ["k", "mode"], [[k, j] for k, j in enumerate(result.modes)])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _read_rows(path: Path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader if row]


def _read_centers(path: Path) -> list:
    _, rows = _read_rows(path)
    return [np.array([float(v) for v in row[1:]]) for row in rows]


def _read_generators(path: Path, count: int, n: int, widths) -> list:
    mats = [np.zeros((n, w)) for w in widths[:count]]
    _, rows = _read_rows(path)
    for k, i, j, v in rows:
        mats[int(k)][int(i), int(j)] = float(v)
    return mats


def read_result(outdir) -> SynthesisResult:
    """Inverse of ``write_result``."""
    out = Path(outdir)
    with open(out / "manifest.json") as fh:
        man = json.load(fh)
    if man.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"unsupported result schema {man.get('schema_version')!r}")
    res = SynthesisResult(man["status"], man["objective"], man["gap"], info=man.get("info", {}))
    if not (out / "x_centers.csv").exists():
        return res
    n, m, N = man["n"], man["m"], man["horizon"]
    xc = _read_centers(out / "x_centers.csv")
    xg = _read_generators(out / "x_generators.csv", N + 1, n, man["state_widths"])
    uc = _read_centers(out / "u_centers.csv")
    ug = _read_generators(out / "u_generators.csv", N, m, man["input_widths"])
    res.X = [Zonotope(c, G) for c, G in zip(xc, xg)]
    res.theta = ug
    res.U = [Zonotope(c, G) for c, G in zip(uc, ug)]
    slacks = [[] for _ in range(N)]
    for k, _, v in _read_rows(out / "reduction_slacks.csv")[1]:
        slacks[int(k)].append(float(v))
    res.slacks = [np.array(s) for s in slacks]
    res.modes = [int(row[1]) for row in _read_rows(out / "mode_schedule.csv")[1]]
    return res


def result_files(outdir) -> list[str]:
    return sorted(os.listdir(outdir))
