"""YAML scenario files.

A scenario file describes one case study: the model and its parameter
intervals, the sets, weights, reduction target and solver options. Paths in
the file are resolved relative to the file itself. See ``README.md`` for the
full schema.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .program import BnBConfig
from .sysmodel import (
    ModelError,
    PendubotConfig,
    PendulumConfig,
    build_pendubot,
    build_pendulum_wall,
    read_trajectory_csv,
    reduction_columns,
)
from .synth import ConfigError, SynthesisConfig

SCENARIO_SCHEMA_VERSION = 1
MODELS = ("pendulum_wall", "pendubot")


@dataclass
class LoadedScenario:
    name: str
    model: str
    system: object
    scenario: object
    synth: SynthesisConfig
    model_config: object
    simulation: dict = field(default_factory=dict)


def _pair_map(d: dict, what: str) -> dict:
    out = {}
    for k, v in (d or {}).items():
        if not isinstance(v, (list, tuple)) or len(v) != 2:
            raise ConfigError(f"{what}.{k} must be a [low, high] pair")
        out[str(k)] = (float(v[0]), float(v[1]))
    return out


def _box(d: dict | None, what: str):
    if d is None:
        return None
    if "half_widths" not in d:
        raise ConfigError(f"{what} needs half_widths")
    hw = tuple(float(v) for v in d["half_widths"])
    c = tuple(float(v) for v in d.get("center", [0.0] * len(hw)))
    if len(c) != len(hw):
        raise ConfigError(f"{what}: center and half_widths differ in length")
    return c, hw


def _reduction_target(d: dict | None, n: int, default: int) -> int:
    if not d:
        return default
    try:
        return reduction_columns(n, d.get("order"), d.get("columns"))
    except ModelError as exc:
        raise ConfigError(f"reduction: {exc}") from None


def _synth_config(d: dict | None) -> SynthesisConfig:
    d = dict(d or {})
    bnb = BnBConfig(
        max_nodes=int(d.pop("max_nodes", BnBConfig.max_nodes)),
        time_limit=float(d.pop("time_limit", BnBConfig.time_limit)),
    )
    known = {"propagation", "reduce", "big_m", "mode_schedule", "solver_tol", "max_iter", "audit_tol"}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"unknown solver option {sorted(unknown)[0]!r}")
    return SynthesisConfig(bnb=bnb, **d)


def _pendulum(doc: dict, base: Path):
    cfg = PendulumConfig()
    if "intervals" in doc:
        cfg.intervals = {**cfg.intervals, **_pair_map(doc["intervals"], "intervals")}
    cfg.fixed = {**cfg.fixed, **{k: float(v) for k, v in (doc.get("fixed") or {}).items()}}
    for key in ("q_c", "base_dt", "gravity_sign"):
        if key in doc:
            setattr(cfg, key, float(doc[key]))
    for key in ("stride", "horizon"):
        if key in doc:
            setattr(cfg, key, int(doc[key]))
    cfg.scheme = doc.get("scheme", cfg.scheme)
    regions = doc.get("regions") or {}
    for key in ("q_min", "q_max", "dq_max"):
        if key in regions:
            setattr(cfg, key, float(regions[key]))
    sets = doc.get("sets") or {}
    if (b := _box(sets.get("x0"), "sets.x0")) is not None:
        cfg.x0_center, cfg.x0_half_widths = b
    if (b := _box(sets.get("goal"), "sets.goal")) is not None:
        cfg.goal_center, cfg.goal_half_widths = b
    if (b := _box(sets.get("disturbance"), "sets.disturbance")) is not None:
        cfg.w_half_widths = b[1]
    if "input" in sets:
        cfg.u_max = float(sets["input"]["half_width"])
    w = doc.get("weights") or {}
    if "Q_c" in w:
        cfg.Q_c = tuple(float(v) for v in w["Q_c"])
    for key, attr in (("R_c", "R_c"), ("Q_g", "Q_g"), ("R_g", "R_g"), ("reduction", "reduction_weight")):
        if key in w:
            setattr(cfg, attr, float(w[key]))
    cfg.reduction_p = _reduction_target(doc.get("reduction"), 2, cfg.reduction_p)
    if "nominal" in doc:
        path = base / doc["nominal"]
        x, u = _read_pendulum_nominal(path)
        if x.shape[0] != cfg.horizon + 1:
            raise ConfigError(f"{path}: nominal needs horizon + 1 = {cfg.horizon + 1} rows, got {x.shape[0]}")
        cfg.x_nominal, cfg.u_nominal = x, u[:-1]
    if cfg.horizon < 2:
        raise ConfigError("N >= 2 required")
    system, scenario = build_pendulum_wall(cfg)
    return cfg, system, scenario


def _read_pendulum_nominal(path: Path):
    if not path.exists():
        raise ConfigError(f"nominal trajectory {path} not found")
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for col in ("q", "dq", "u"):
        if not rows or col not in rows[0]:
            raise ConfigError(f"{path}: missing nominal column {col!r}")
    try:
        x = np.array([[float(r["q"]), float(r["dq"])] for r in rows])
        u = np.array([float(r["u"]) for r in rows])
    except ValueError:
        raise ConfigError(f"{path}: malformed nominal row") from None
    return x, u


def _pendubot(doc: dict, base: Path):
    cfg = PendubotConfig()
    cfg.params = {**cfg.params, **{k: float(v) for k, v in (doc.get("params") or {}).items()}}
    if "extra_mass" in doc:
        lo, hi = doc["extra_mass"]
        cfg.extra_mass = (float(lo), float(hi))
    for key in ("stride", "substeps"):
        if key in doc:
            setattr(cfg, key, int(doc[key]))
    cfg.scheme = doc.get("scheme", cfg.scheme)
    sets = doc.get("sets") or {}
    if (b := _box(sets.get("x0"), "sets.x0")) is not None:
        cfg.x0_half_widths = b[1]
    if (b := _box(sets.get("goal"), "sets.goal")) is not None:
        cfg.goal_half_widths = b[1]
    if "disturbance" in sets:
        cfg.w_half_width = float(sets["disturbance"]["half_width"])
    if "input" in sets:
        cfg.u_max = float(sets["input"]["half_width"])
    w = doc.get("weights") or {}
    if "Q_c" in w:
        cfg.Q_c = tuple(float(v) for v in w["Q_c"])
    for key, attr in (("R_c", "R_c"), ("Q_g", "Q_g"), ("R_g", "R_g"), ("reduction", "reduction_weight")):
        if key in w:
            setattr(cfg, attr, float(w[key]))
    cfg.reduction_p = _reduction_target(doc.get("reduction"), 4, cfg.reduction_p)
    if "trajectory" not in doc:
        raise ConfigError("pendubot scenario needs a trajectory file")
    path = base / doc["trajectory"]
    if not path.exists():
        raise ConfigError(f"trajectory file {path} not found")
    t, x, u = read_trajectory_csv(path)
    if "horizon" in doc:
        keep = int(doc["horizon"]) * cfg.stride + 1
        t, x, u = t[:keep], x[:keep], u[:keep]
    if (t.size - 1) // cfg.stride < 2:
        raise ConfigError("N >= 2 required")
    system, scenario = build_pendubot(t, x, u, cfg)
    return cfg, system, scenario


def load_scenario(path, reduction_p: int | None = None, mode_schedule=None) -> LoadedScenario:
    """Parse a scenario file and build the system, scenario and solver options.

    ``reduction_p`` and ``mode_schedule`` override the file.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"scenario file {path} not found")
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML ({exc})") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    version = doc.get("schema_version")
    if version != SCENARIO_SCHEMA_VERSION:
        raise ConfigError(f"{path}: unsupported schema_version {version!r} (expected {SCENARIO_SCHEMA_VERSION})")
    model = doc.get("model")
    if model not in MODELS:
        raise ConfigError(f"{path}: model must be one of {', '.join(MODELS)}")
    if reduction_p is not None:
        doc["reduction"] = {"columns": int(reduction_p)}
    try:
        builder = _pendulum if model == "pendulum_wall" else _pendubot
        cfg, system, scenario = builder(doc, path.parent)
        synth = _synth_config(doc.get("solver"))
    except ModelError as exc:
        raise ConfigError(str(exc)) from None
    except (TypeError, KeyError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path}: {exc}") from None
    if mode_schedule is not None:
        synth.mode_schedule = list(mode_schedule)
    return LoadedScenario(doc.get("name", path.stem), model, system, scenario, synth, cfg, dict(doc.get("simulation") or {}))
