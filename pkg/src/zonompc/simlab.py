"""Closed-loop simulation, Monte-Carlo tube containment and the reduction volume benchmark."""

from __future__ import annotations

import csv
import functools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import reduction, zonoset
from .policy import ControllerState, PolicyLibrary, choose_policy
from .sysmodel import (
    HybridUncertainSystem,
    PendulumConfig,
    UncertainAffineSystem,
    pendulum_models,
    rk4_step,
    vertex_models_from_intervals,
)
from .synth import SynthesisResult, vertex_images
from .zonoset import Zonotope, contains_point

RK4_SUBSTEPS = 10
BLOWUP = 1e6
MEMBERSHIP_TOL = 1e-7
CERTIFY_TOL = 1e-6


class SimulationError(RuntimeError):
    pass


def sample_in(Z: Zonotope, rng) -> np.ndarray:
    """Uniform sample of the generator coefficients (not of the set volume)."""
    return Z.center + Z.generator @ rng.uniform(-1.0, 1.0, Z.n_generators)


@dataclass
class PlantInstance:
    """One sampled plant: ``step(t, x, u, rng)`` returns the next state including the disturbance."""

    params: dict
    kind: str
    step_fn: object = field(repr=False)
    disturbance: Zonotope | None = None

    def step(self, t: int, x, u, rng) -> np.ndarray:
        x_next = self.step_fn(t, np.asarray(x, dtype=float), np.atleast_1d(u))
        if self.disturbance is not None:
            x_next = x_next + _disturbance_sample(self.disturbance, rng)
        return x_next


# -- plant families ------------------------------------------------------------------


@functools.lru_cache(maxsize=4)
def _cached_pendulum_models(gravity_sign: float):
    return pendulum_models(gravity_sign)


@dataclass
class PendulumPlantSpec:
    """Recipe for sampling pendulum-with-wall plants; picklable for worker pools.

    ``kind`` is ``"linear"`` (discretized linearization with the sampled
    parameters) or ``"nonlinear"`` (RK4 on the switched model with ``sin q``).
    ``params`` pins individual parameters instead of sampling them.
    """

    config: PendulumConfig = field(default_factory=PendulumConfig)
    kind: str = "linear"
    params: dict = field(default_factory=dict)
    disturbance: bool = True

    def sample(self, rng) -> PlantInstance:
        cfg = self.config
        p = {name: float(rng.uniform(lo, hi)) for name, (lo, hi) in sorted(cfg.intervals.items())}
        p.update(self.params)
        W = Zonotope.from_box(np.zeros(2), cfg.w_half_widths) if self.disturbance else None
        if self.kind == "linear":
            step = _pendulum_linear_step(cfg, p)
        elif self.kind == "nonlinear":
            step = _pendulum_nonlinear_step(cfg, p)
        else:
            raise ValueError(f"unknown plant kind {self.kind!r}")
        return PlantInstance(p, self.kind, step, W)


def _pendulum_linear_step(cfg: PendulumConfig, p: dict):
    free, contact = _cached_pendulum_models(cfg.gravity_sign)
    values = {**cfg.fixed, **p, "q_c": cfg.q_c}
    N = cfg.horizon
    x_nom = np.zeros((N + 1, 2)) if cfg.x_nominal is None else np.asarray(cfg.x_nominal, dtype=float)
    u_nom = np.zeros((N, 1)) if cfg.u_nominal is None else np.asarray(cfg.u_nominal, dtype=float).reshape(N, 1)
    models = {}

    def model(j, k):
        if (j, k) not in models:
            sm = free if j == 0 else contact
            models[j, k] = vertex_models_from_intervals(
                sm, {}, values, x_nom[k], u_nom[k], cfg.dt, cfg.scheme, cfg.stride
            )[0]
        return models[j, k]

    def step(t, x, u):
        j = 0 if x[0] < cfg.q_c else 1
        return model(j, min(t, N - 1)).step(x, u)

    return step


def _pendulum_nonlinear_step(cfg: PendulumConfig, p: dict):
    v = {**cfg.fixed, **p}
    I, m, l, g = v["I"], v["m"], v["l"], v["g"]
    mu_f, mu_c, k, c_tau = v["mu_f"], v["mu_c"], v["k"], v["c_tau"]
    s = cfg.gravity_sign

    def f(x, u):
        q, dq = x
        torque = c_tau * u[0] - s * m * g * l * math.sin(q)
        if q < cfg.q_c:
            torque -= mu_f * dq
        else:
            torque -= mu_c * dq + k * (q - cfg.q_c)
        return np.array([dq, torque / I])

    return lambda t, x, u: rk4_step(f, x, u, cfg.dt, RK4_SUBSTEPS)


@dataclass
class VertexPlantSpec:
    """Plants that use one vertex model per step, picked at random (adversarial corners)."""

    system: object
    q_c: float | None = None
    disturbance: bool = True
    extreme_disturbance: bool = True

    def sample(self, rng) -> PlantInstance:
        sys_ = self.system
        seed = int(rng.integers(2**63))
        pick = np.random.default_rng(seed)
        hybrid = isinstance(sys_, HybridUncertainSystem)
        N = sys_.horizon

        def step(t, x, u):
            k = min(t, N - 1)
            if hybrid:
                j = sys_.region_of(x)
                if j is None:
                    j = 0 if self.q_c is None or x[0] < self.q_c else 1
                vs = sys_.vertices[j][k]
            else:
                vs = sys_.vertices[k]
            return vs[int(pick.integers(len(vs)))].step(x, u)

        W = sys_.disturbances[0] if self.disturbance else None
        if W is not None and self.extreme_disturbance:
            W = _SignDisturbance(W)
        return PlantInstance({"seed": seed}, "vertex", step, W)


class _SignDisturbance(Zonotope):
    """Disturbance set whose samples sit on the vertices (coefficients +-1)."""

    __slots__ = ()

    def __init__(self, W: Zonotope):
        super().__init__(W.center, W.generator)


@dataclass
class MixturePlantSpec:
    """Linear plants drawn as one random convex combination of the vertex models per rollout."""

    system: UncertainAffineSystem
    disturbance: bool = True

    def sample(self, rng) -> PlantInstance:
        sys_ = self.system
        L = len(sys_.vertices[0])
        lam = rng.dirichlet(np.ones(L))
        N = sys_.horizon

        def step(t, x, u):
            vs = sys_.vertices[min(t, N - 1)]
            return sum(l_ * v.step(x, u) for l_, v in zip(lam, vs))

        return PlantInstance({"weights": lam.tolist()}, "mixture", step, sys_.disturbances[0] if self.disturbance else None)


def _disturbance_sample(W: Zonotope, rng) -> np.ndarray:
    if isinstance(W, _SignDisturbance):
        return W.center + W.generator @ rng.choice([-1.0, 1.0], W.n_generators)
    return sample_in(W, rng)


# -- rollouts ------------------------------------------------------------------------


@dataclass
class Rollout:
    x: np.ndarray
    u: np.ndarray
    kappa: np.ndarray
    member_selected: np.ndarray
    member_time: np.ndarray
    propagation: np.ndarray
    params: dict = field(default_factory=dict)

    def write_csv(self, path, dt: float):
        n, m = self.x.shape[1], self.u.shape[1]
        header = ["t", *(f"x{i}" for i in range(n)), *(f"u{i}" for i in range(m)), "kappa", "in_selected", "in_time"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for t in range(self.x.shape[0]):
                has_u = t < self.u.shape[0]
                row = [format(t * dt, ".17g"), *(format(v, ".17g") for v in self.x[t])]
                row += [format(v, ".17g") for v in self.u[t]] if has_u else [""] * m
                row += [int(self.kappa[t]) if has_u else "", int(self.member_selected[t]) if has_u else ""]
                row += [int(self.member_time[t])]
                w.writerow(row)


def simulate_closed_loop(
    plant: PlantInstance,
    library: PolicyLibrary,
    result: SynthesisResult,
    x0,
    steps: int | None = None,
    rng=None,
    nn: int = 8,
) -> Rollout:
    """Roll out ``choose_policy`` against ``plant`` and log tube membership.

    ``member_selected[t]`` is exact membership of ``x_t`` in the selected set
    ``X_kappa``; ``member_time[t]`` is membership in ``X_t`` (``t <= N``);
    ``propagation[t]`` is ``x_{t+1} in X_{kappa+1}``, meaningful where the
    selected membership holds.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    N = result.horizon
    steps = N if steps is None else steps
    x = np.asarray(x0, dtype=float)
    n, m = x.size, result.U[0].dim
    xs, us = np.zeros((steps + 1, n)), np.zeros((steps, m))
    kap = np.zeros(steps, dtype=int)
    sel, prop = np.zeros(steps, dtype=bool), np.zeros(steps, dtype=bool)
    tim = np.zeros(steps + 1, dtype=bool)
    xs[0] = x
    state = ControllerState()
    for t in range(steps):
        u, k = choose_policy(x, state, library, nn)
        us[t], kap[t] = u, k
        sel[t] = contains_point(result.X[k], x, MEMBERSHIP_TOL)
        step = plant.step(t, x, u, rng)
        if not np.all(np.isfinite(step)) or np.abs(step).max() > BLOWUP:
            raise SimulationError(f"state diverged at step {t}: {step}")
        x = step
        xs[t + 1] = x
        prop[t] = contains_point(result.X[k + 1], x, MEMBERSHIP_TOL)
    for t in range(steps + 1):
        tim[t] = t <= N and contains_point(result.X[t], xs[t], MEMBERSHIP_TOL)
    return Rollout(xs, us, kap, sel, tim, prop, dict(plant.params))


@dataclass
class MonteCarloStats:
    n_rollouts: int
    horizon: int
    member_time: np.ndarray
    member_selected: np.ndarray
    propagation_hits: int
    propagation_total: int
    per_step_time: np.ndarray = field(repr=False, default=None)

    @property
    def time_fraction(self) -> float:
        return float(self.member_time.mean())

    @property
    def selected_fraction(self) -> float:
        return float(self.member_selected.mean())

    @property
    def propagation_fraction(self) -> float:
        return self.propagation_hits / self.propagation_total if self.propagation_total else 1.0

    def summary(self) -> dict:
        return {
            "n_rollouts": self.n_rollouts,
            "horizon": self.horizon,
            "membership_time_indexed": self.time_fraction,
            "membership_selected": self.selected_fraction,
            "propagation_containment": self.propagation_fraction,
            "propagation_pairs": self.propagation_total,
        }

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "membership_time_indexed"])
            for k, v in enumerate(self.member_time.mean(axis=0)):
                w.writerow([k, format(float(v), ".17g")])


_WORKER = {}


def _init_worker(spec, library, result, x0_set, steps, nn):
    _WORKER.update(spec=spec, library=library, result=result, x0=x0_set, steps=steps, nn=nn)


def _one_rollout(seed_seq) -> Rollout:
    w = _WORKER
    rng = np.random.default_rng(seed_seq)
    plant = w["spec"].sample(rng)
    x0 = sample_in(w["x0"], rng)
    return simulate_closed_loop(plant, w["library"], w["result"], x0, w["steps"], rng, w["nn"])


def monte_carlo(
    spec,
    library: PolicyLibrary,
    result: SynthesisResult,
    n_rollouts: int,
    seed: int = 0,
    steps: int | None = None,
    workers: int = 1,
    nn: int = 8,
    x0_set: Zonotope | None = None,
    return_rollouts: bool = False,
):
    """Sampled closed-loop rollouts with exact membership statistics.

    Every rollout draws from its own child of ``SeedSequence(seed)``, so the
    statistics do not depend on ``workers``.
    """
    if n_rollouts < 1:
        raise ValueError("n_rollouts must be at least 1")
    x0_set = x0_set if x0_set is not None else result.X[0]
    seeds = np.random.SeedSequence(seed).spawn(n_rollouts)
    args = (spec, library, result, x0_set, steps, nn)
    if workers <= 1:
        _init_worker(*args)
        rollouts = [_one_rollout(s) for s in seeds]
    else:
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=args) as ex:
            rollouts = list(ex.map(_one_rollout, seeds, chunksize=max(1, n_rollouts // (4 * workers))))
    horizon = result.horizon
    mt = np.array([r.member_time[: horizon + 1] for r in rollouts])
    ms = np.array([r.member_selected for r in rollouts])
    hits = total = 0
    for r in rollouts:
        total += int(r.member_selected.sum())
        hits += int((r.member_selected & r.propagation).sum())
    stats = MonteCarloStats(n_rollouts, horizon, mt, ms, hits, total, mt.mean(axis=0))
    return (stats, rollouts) if return_rollouts else stats


# -- volume benchmark ------------------------------------------------------------------

METHODS = ("reazor", "girard", "combastel", "pca")


@dataclass(frozen=True)
class BenchmarkRow:
    k: int
    method: str
    volume: float
    reference: float
    error: float


def volume_error(v: float, v_ref: float) -> float:
    """Percentage volume difference ``|V - V_ref| / V_ref * 100``."""
    return abs(v - v_ref) / v_ref * 100.0


def volume_benchmark(
    result: SynthesisResult,
    system,
    methods=METHODS,
    p: int | None = None,
    certify: bool = False,
) -> tuple[list[BenchmarkRow], dict]:
    """Reduce the unreduced successor hull of every tube step with each method and compare volumes.

    Returns the rows and ``{method: {"mean": ..., "max": ...}}`` in percent.
    """
    bad = [mth for mth in methods if mth not in reduction.REDUCERS]
    if bad:
        raise ValueError(f"unknown reduction method {bad[0]!r}")
    rows = []
    for k in range(result.horizon):
        images = vertex_images(system, result.X[k], result.U[k].center, result.theta[k], k, result.modes[k])
        hull = zonoset.convex_hull_many(images)
        target = p if p is not None else result.X[k + 1].n_generators
        target = min(max(target, hull.dim), hull.n_generators)
        v_ref = zonoset.volume(hull)
        for mth in methods:
            Z = reduction.REDUCERS[mth](hull, target)
            if certify:
                # a tight reduction has margin exactly one, so allow LP noise at the audit level
                ok, _ = zonoset.contains(hull, Z, tol=CERTIFY_TOL)
                if not ok:
                    raise SimulationError(f"{mth} output does not contain its input at step {k}")
            v = zonoset.volume(Z)
            rows.append(BenchmarkRow(k, mth, v, v_ref, volume_error(v, v_ref)))
    summary = {}
    for mth in methods:
        errs = np.array([r.error for r in rows if r.method == mth])
        summary[mth] = {"mean": float(errs.mean()), "max": float(errs.max())}
    return rows, summary


def format_benchmark_table(summary: dict) -> str:
    lines = [f"{'method':<12}{'mean error %':>14}{'max error %':>14}"]
    for mth, s in summary.items():
        lines.append(f"{mth:<12}{s['mean']:>14.3f}{s['max']:>14.3f}")
    return "\n".join(lines) + "\n"


def write_benchmark_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "method", "volume", "reference", "error_percent"])
        for r in rows:
            w.writerow([r.k, r.method, format(r.volume, ".17g"), format(r.reference, ".17g"), format(r.error, ".17g")])


def write_rollouts(rollouts, outdir, dt: float):
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    for i, r in enumerate(rollouts):
        r.write_csv(out / f"rollout_{i:04d}.csv", dt)
