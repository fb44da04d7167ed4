"""Uncertain affine and hybrid systems, and the two case-study models.

Continuous-time models are written symbolically (sympy) with interval
parameters; one discrete affine vertex model is produced per interval corner
by linearizing at the nominal point and discretizing.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import sympy
from scipy.linalg import expm

from .zonoset import MatrixZonotope, Zonotope, ZonotopeError, contains, contains_point

MAX_CORNERS = 16
TRAJECTORY_COLUMNS = ("t", "q1", "q2", "dq1", "dq2", "u")


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class AffineVertexModel:
    """One vertex ``x+ = A x + B u + d`` of a polytopic model set."""

    A: np.ndarray
    B: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.asarray(self.B, dtype=float).reshape(A.shape[0], -1)
        d = np.asarray(self.d, dtype=float).reshape(-1)
        if A.shape[0] != A.shape[1] or d.size != A.shape[0]:
            raise ModelError(f"inconsistent vertex model shapes A{A.shape} B{B.shape} d{d.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "d", d)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    def step(self, x, u, w=None):
        out = self.A @ x + self.B @ np.atleast_1d(u) + self.d
        return out if w is None else out + w


def _check_vertex_lists(vertices, n=None, m=None):
    for k, vs in enumerate(vertices):
        if len(vs) < 1:
            raise ModelError(f"step {k} has no vertex models")
        for v in vs:
            n = v.n if n is None else n
            m = v.m if m is None else m
            if v.n != n or v.m != m:
                raise ModelError(f"inconsistent vertex model shapes at step {k}")
    return n, m


@dataclass
class UncertainAffineSystem:
    """Time-varying polytopic affine system over a horizon of ``len(vertices)`` steps.

    ``matrix_models`` optionally gives, per step, a matrix zonotope over the
    augmented matrices ``[A B d]`` for the matrix-zonotope propagation route.
    """

    vertices: list
    disturbances: list
    matrix_models: list | None = None

    def __post_init__(self):
        self.n, self.m = _check_vertex_lists(self.vertices)
        if isinstance(self.disturbances, Zonotope):
            self.disturbances = [self.disturbances] * self.horizon
        if len(self.disturbances) != self.horizon:
            raise ModelError("one disturbance set per step is required")
        for W in self.disturbances:
            if W.dim != self.n or np.any(W.center != 0):
                raise ModelError("disturbance sets must be zero-centered with the state dimension")

    @property
    def horizon(self) -> int:
        return len(self.vertices)


@dataclass
class HybridUncertainSystem:
    """Piecewise system: region ``regions[j]`` selects the vertex lists ``vertices[j][k]``."""

    regions: list
    vertices: list
    disturbances: list
    mode_names: list | None = None

    def __post_init__(self):
        if len(self.regions) != len(self.vertices):
            raise ModelError("one vertex list per region is required")
        horizons = {len(v) for v in self.vertices}
        if len(horizons) != 1:
            raise ModelError("all modes need the same horizon")
        n = m = None
        for vs in self.vertices:
            n, m = _check_vertex_lists(vs, n, m)
        self.n, self.m = n, m
        if isinstance(self.disturbances, Zonotope):
            self.disturbances = [self.disturbances] * self.horizon
        if self.mode_names is None:
            self.mode_names = [f"mode{j}" for j in range(self.n_modes)]

    @property
    def horizon(self) -> int:
        return len(self.vertices[0])

    @property
    def n_modes(self) -> int:
        return len(self.regions)

    def mode_system(self, j: int) -> UncertainAffineSystem:
        return UncertainAffineSystem(self.vertices[j], self.disturbances)

    def region_of(self, x) -> int | None:
        for j, H in enumerate(self.regions):
            if contains_point(H, x):
                return j
        return None

    def regions_disjoint(self, n_samples: int = 2000, seed: int = 0) -> bool:
        """Best-effort sampling check that no sampled point lies in two region interiors."""
        rng = np.random.default_rng(seed)
        for j, H in enumerate(self.regions):
            for _ in range(n_samples // max(1, self.n_modes)):
                x = H.center + H.generator @ rng.uniform(-0.999, 0.999, H.n_generators)
                hits = sum(contains_point(R, x, tol=-1e-6) for R in self.regions)
                if hits > 1:
                    return False
        return True


@dataclass
class Scenario:
    """Sets, nominal trajectory and weights for one synthesis problem."""

    x0: Zonotope
    goal: Zonotope
    input_bounds: Zonotope
    x_nominal: np.ndarray
    u_nominal: np.ndarray
    Q_c: np.ndarray
    R_c: np.ndarray
    Q_g: float = 1.0
    R_g: float = 1.0
    reduction_weight: float = 1.0
    reduction_p: int = 6
    dt: float = 0.02
    state_bounds: list | None = None

    def __post_init__(self):
        n = self.x0.dim
        self.x_nominal = np.asarray(self.x_nominal, dtype=float).reshape(-1, n)
        self.u_nominal = np.asarray(self.u_nominal, dtype=float).reshape(self.x_nominal.shape[0] - 1, -1)
        self.Q_c = np.atleast_2d(np.asarray(self.Q_c, dtype=float))
        self.R_c = np.atleast_2d(np.asarray(self.R_c, dtype=float))
        for name, W in (("Q_c", self.Q_c), ("R_c", self.R_c)):
            if np.linalg.eigvalsh((W + W.T) / 2).min() <= 0:
                raise ModelError(f"{name} must be positive definite")
        if self.Q_g <= 0 or self.R_g <= 0 or self.reduction_weight < 0:
            raise ModelError("generator weights must be positive")
        if self.goal.dim != n or self.Q_c.shape != (n, n):
            raise ModelError("scenario sets and weights must share the state dimension")
        if self.reduction_p < n:
            raise ModelError(f"reduction target {self.reduction_p} is below the state dimension {n}")

    @property
    def horizon(self) -> int:
        return self.x_nominal.shape[0] - 1

    def input_bound(self, k: int) -> Zonotope:
        return self.input_bounds[k] if isinstance(self.input_bounds, list) else self.input_bounds

    def big_m(self, system=None) -> float:
        sets = [self.x0, self.goal, self.input_bound(0)]
        if system is not None:
            sets += list(system.disturbances[:1])
        return 1e3 * max(float(np.abs(Z.generator).max(initial=0.0)) for Z in sets)


def reduction_columns(n: int, order: float | None = None, columns: int | None = None) -> int:
    """Generator column count from either an order (columns / n) or a column count."""
    if (order is None) == (columns is None):
        raise ModelError("give exactly one of order or columns")
    p = int(round(order * n)) if order is not None else int(columns)
    if p < n:
        raise ModelError(f"reduction target {p} is below the state dimension {n}")
    return p


# -- linearization and discretization ---------------------------------------


def linearize_discretize(
    vector_field: Callable,
    jacobians: Callable,
    x_star,
    u_star,
    dt: float,
    scheme: str = "euler",
    substeps: int = 1,
) -> AffineVertexModel:
    """Discrete affine model of ``dx/dt = f(x, u)`` about ``(x_star, u_star)``.

    ``jacobians(x, u)`` returns ``(df/dx, df/du)``. ``scheme`` is ``"euler"``
    (``substeps`` forward-Euler steps of ``dt / substeps`` with the input held)
    or ``"exact"`` (matrix exponential of the affine model over ``dt``).
    """
    if dt <= 0:
        raise ModelError("dt must be positive")
    x_star = np.atleast_1d(np.asarray(x_star, dtype=float))
    u_star = np.atleast_1d(np.asarray(u_star, dtype=float))
    n, m = x_star.size, u_star.size
    Ac, Bc = jacobians(x_star, u_star)
    Ac = np.asarray(Ac, dtype=float).reshape(n, n)
    Bc = np.asarray(Bc, dtype=float).reshape(n, m)
    dc = np.asarray(vector_field(x_star, u_star), dtype=float).reshape(n) - Ac @ x_star - Bc @ u_star
    if scheme == "euler":
        h = dt / substeps
        A1, B1, d1 = np.eye(n) + h * Ac, h * Bc, h * dc
        A, B, d = np.eye(n), np.zeros((n, m)), np.zeros(n)
        for _ in range(substeps):
            A, B, d = A1 @ A, A1 @ B + B1, A1 @ d + d1
    elif scheme == "exact":
        M = np.zeros((n + m + 1, n + m + 1))
        M[:n, :n], M[:n, n : n + m], M[:n, -1] = Ac, Bc, dc
        E = expm(M * dt)
        A, B, d = E[:n, :n], E[:n, n : n + m], E[:n, -1]
    else:
        raise ModelError(f"unknown discretization scheme {scheme!r}")
    return AffineVertexModel(A, B, d)


@dataclass
class SymbolicModel:
    """``dx/dt = f(x, u; params)`` with sympy expressions and lambdified Jacobians."""

    states: Sequence[sympy.Symbol]
    inputs: Sequence[sympy.Symbol]
    params: Sequence[sympy.Symbol]
    f: sympy.Matrix
    _fns: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.f = sympy.Matrix(self.f)
        x, u = sympy.Matrix(self.states), sympy.Matrix(self.inputs)
        args = (list(self.states), list(self.inputs), list(self.params))
        self._fns = {
            "f": sympy.lambdify(args, self.f, "numpy"),
            "A": sympy.lambdify(args, self.f.jacobian(x), "numpy"),
            "B": sympy.lambdify(args, self.f.jacobian(u), "numpy"),
        }

    @property
    def param_names(self):
        return [str(p) for p in self.params]

    def _pvec(self, values: dict):
        missing = set(self.param_names) - set(values)
        if missing:
            raise ModelError(f"missing model parameters: {sorted(missing)}")
        return [float(values[name]) for name in self.param_names]

    def vector_field(self, values: dict) -> Callable:
        pv = self._pvec(values)
        fn = self._fns["f"]
        return lambda x, u: np.asarray(fn(list(x), list(np.atleast_1d(u)), pv), dtype=float).reshape(-1)

    def jacobians(self, values: dict) -> Callable:
        pv = self._pvec(values)
        fa, fb = self._fns["A"], self._fns["B"]

        def jac(x, u):
            u = list(np.atleast_1d(u))
            return np.asarray(fa(list(x), u, pv), dtype=float), np.asarray(fb(list(x), u, pv), dtype=float)

        return jac

    def substitute(self, values: dict) -> sympy.Matrix:
        return self.f.subs({p: values[str(p)] for p in self.params})


def interval_corners(intervals: dict) -> list[dict]:
    """All corner combinations of interval parameters, in sorted-name, low-first order."""
    names = list(intervals)
    if 2 ** len(names) > MAX_CORNERS:
        raise ModelError(f"{len(names)} interval parameters exceed the corner cap {MAX_CORNERS}")
    for name, (lo, hi) in intervals.items():
        if hi < lo:
            raise ModelError(f"empty interval for {name}: [{lo}, {hi}]")
    return [dict(zip(names, combo)) for combo in itertools.product(*(intervals[k] for k in names))]


def vertex_models_from_intervals(
    model: SymbolicModel,
    intervals: dict,
    fixed: dict,
    x_star,
    u_star,
    dt: float,
    scheme: str = "euler",
    substeps: int = 1,
) -> list[AffineVertexModel]:
    """One discretized vertex model per corner of the interval box."""
    out = []
    for corner in interval_corners(intervals):
        values = {**fixed, **corner}
        out.append(
            linearize_discretize(
                model.vector_field(values), model.jacobians(values), x_star, u_star, dt, scheme, substeps
            )
        )
    return out


# -- pendulum with an elastic wall -------------------------------------------

PENDULUM_FIXED = {"m": 0.126, "mu_f": 0.001, "c_tau": 0.03, "g": 9.81}
PENDULUM_INTERVALS = {
    "I": (0.0116, 0.0203),
    "k": (116.1, 141.9),
    "mu_c": (0.41, 0.51),
    "l": (0.12, 0.18),
}


def pendulum_models(gravity_sign: float = 1.0) -> tuple[SymbolicModel, SymbolicModel]:
    """Free-motion and wall-contact pendulum models (state ``(q, dq)``, input current)."""
    q, dq, i = sympy.symbols("q dq i")
    I, m, l, g, mu_f, mu_c, k, c_tau, q_c = sympy.symbols("I m l g mu_f mu_c k c_tau q_c")
    grav = gravity_sign * m * g * l * sympy.sin(q)
    free = SymbolicModel([q, dq], [i], [I, m, l, g, mu_f, c_tau], [dq, (c_tau * i - mu_f * dq - grav) / I])
    contact = SymbolicModel(
        [q, dq],
        [i],
        [I, m, l, g, mu_c, k, c_tau, q_c],
        [dq, (c_tau * i - mu_c * dq - grav - k * (q - q_c)) / I],
    )
    return free, contact


@dataclass
class PendulumConfig:
    """Pendulum-with-wall scenario knobs; defaults follow the published setup where it gives them."""

    fixed: dict = field(default_factory=lambda: dict(PENDULUM_FIXED))
    intervals: dict = field(default_factory=lambda: dict(PENDULUM_INTERVALS))
    q_c: float = 0.1
    base_dt: float = 1 / 250
    stride: int = 5
    horizon: int = 40
    scheme: str = "euler"
    gravity_sign: float = 1.0
    q_min: float = -0.5
    q_max: float = 0.4
    dq_max: float = 5.0
    x0_half_widths: tuple = (0.02, 0.4)
    goal_half_widths: tuple = (0.02, 0.4)
    x0_center: tuple = (0.0, 0.0)
    goal_center: tuple = (0.0, 0.0)
    w_half_widths: tuple = (1e-4, 1e-3)
    u_max: float = 20.0
    reduction_p: int = 12
    Q_c: tuple = (1.0, 0.1)
    R_c: float = 1e-4
    Q_g: float = 1.0
    R_g: float = 1e-4
    reduction_weight: float = 1.0
    x_nominal: np.ndarray | None = None
    u_nominal: np.ndarray | None = None

    @property
    def dt(self) -> float:
        return self.base_dt * self.stride


def _midpoint(interval):
    return 0.5 * (interval[0] + interval[1])


def build_pendulum_wall(config: PendulumConfig | None = None):
    """Two-mode hybrid pendulum (free for ``q < q_c``, contact for ``q >= q_c``) and its scenario.

    Free-mode vertices vary ``(I, l)``; contact-mode vertices vary ``(k, mu_c)``
    with ``I`` and ``l`` at their interval midpoints.
    """
    cfg = config or PendulumConfig()
    iv = cfg.intervals
    for name in ("I", "l", "k", "mu_c"):
        if name not in iv:
            raise ModelError(f"missing interval for {name}")
        lo, hi = iv[name]
        if hi < lo:
            raise ModelError(f"empty interval for {name}")
    if not cfg.q_min < cfg.q_c < cfg.q_max:
        raise ModelError(f"q_c={cfg.q_c} lies outside the modeled range [{cfg.q_min}, {cfg.q_max}]")
    if cfg.base_dt <= 0 or cfg.stride < 1:
        raise ModelError("dt must be positive")
    N = cfg.horizon
    x_nom = np.zeros((N + 1, 2)) if cfg.x_nominal is None else np.asarray(cfg.x_nominal, dtype=float)
    u_nom = np.zeros((N, 1)) if cfg.u_nominal is None else np.asarray(cfg.u_nominal, dtype=float).reshape(N, 1)
    if x_nom.shape != (N + 1, 2):
        raise ModelError("nominal state trajectory must have horizon + 1 rows")

    free, contact = pendulum_models(cfg.gravity_sign)
    fixed_free = {**cfg.fixed}
    fixed_contact = {**cfg.fixed, "I": _midpoint(iv["I"]), "l": _midpoint(iv["l"]), "q_c": cfg.q_c}
    free_iv = {"I": iv["I"], "l": iv["l"]}
    contact_iv = {"k": iv["k"], "mu_c": iv["mu_c"]}
    v_free, v_contact = [], []
    for k in range(N):
        args = (x_nom[k], u_nom[k], cfg.dt, cfg.scheme, cfg.stride)
        v_free.append(vertex_models_from_intervals(free, free_iv, fixed_free, *args))
        v_contact.append(vertex_models_from_intervals(contact, contact_iv, fixed_contact, *args))

    free_region = Zonotope.from_box([(cfg.q_min + cfg.q_c) / 2, 0.0], [(cfg.q_c - cfg.q_min) / 2, cfg.dq_max])
    contact_region = Zonotope.from_box([(cfg.q_c + cfg.q_max) / 2, 0.0], [(cfg.q_max - cfg.q_c) / 2, cfg.dq_max])
    W = Zonotope.from_box([0.0, 0.0], cfg.w_half_widths)
    system = HybridUncertainSystem(
        [free_region, contact_region], [v_free, v_contact], W, mode_names=["free", "contact"]
    )
    scenario = Scenario(
        x0=Zonotope.from_box(cfg.x0_center, cfg.x0_half_widths),
        goal=Zonotope.from_box(cfg.goal_center, cfg.goal_half_widths),
        input_bounds=Zonotope([0.0], [[cfg.u_max]]),
        x_nominal=x_nom,
        u_nominal=u_nom,
        Q_c=np.diag(cfg.Q_c),
        R_c=[[cfg.R_c]],
        Q_g=cfg.Q_g,
        R_g=cfg.R_g,
        reduction_weight=cfg.reduction_weight,
        reduction_p=cfg.reduction_p,
        dt=cfg.dt,
    )
    return system, scenario


# -- pendubot ----------------------------------------------------------------

PENDUBOT_PARAMS = {
    "m1": 0.3,
    "m2": 0.2,
    "l1": 0.3,
    "lc1": 0.15,
    "lc2": 0.15,
    "I1": 0.0025,
    "I2": 0.0015,
    "g": 9.81,
    "bv1": 0.01,
    "bv2": 0.005,
    "bs1": 0.02,
    "bs2": 0.01,
}


def pendubot_model() -> SymbolicModel:
    """Two-link arm actuated at the first joint; angles measured from the downward vertical.

    Parameters ``s1, s2`` are the Coulomb-friction signs held constant per step
    and ``me`` is a point mass at the middle of the first link.
    """
    q1, q2, dq1, dq2, u = sympy.symbols("q1 q2 dq1 dq2 u")
    m1, m2, l1, lc1, lc2, I1, I2, g, me = sympy.symbols("m1 m2 l1 lc1 lc2 I1 I2 g me")
    bv1, bv2, bs1, bs2, s1, s2 = sympy.symbols("bv1 bv2 bs1 bs2 s1 s2")
    c2 = sympy.cos(q2)
    d11 = m1 * lc1**2 + I1 + me * (l1 / 2) ** 2 + m2 * (l1**2 + lc2**2 + 2 * l1 * lc2 * c2) + I2
    d12 = m2 * (lc2**2 + l1 * lc2 * c2) + I2
    d22 = m2 * lc2**2 + I2
    D = sympy.Matrix([[d11, d12], [d12, d22]])
    h = m2 * l1 * lc2 * sympy.sin(q2)
    C = sympy.Matrix([[-h * dq2, -h * (dq1 + dq2)], [h * dq1, 0]])
    grav = sympy.Matrix(
        [
            (m1 * lc1 + me * l1 / 2 + m2 * l1) * g * sympy.sin(q1) + m2 * lc2 * g * sympy.sin(q1 + q2),
            m2 * lc2 * g * sympy.sin(q1 + q2),
        ]
    )
    dq = sympy.Matrix([dq1, dq2])
    friction = sympy.Matrix([bs1 * s1 + bv1 * dq1, bs2 * s2 + bv2 * dq2])
    rhs = sympy.Matrix([u, 0]) - C * dq - grav - friction
    ddq = D.LUsolve(rhs)
    params = [m1, m2, l1, lc1, lc2, I1, I2, g, me, bv1, bv2, bs1, bs2, s1, s2]
    return SymbolicModel([q1, q2, dq1, dq2], [u], params, [dq1, dq2, ddq[0], ddq[1]])


def read_trajectory_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read a nominal trajectory with header ``t,q1,q2,dq1,dq2,u``.

    Returns ``(t, x, u)`` with ``x`` of shape (T, 4) and ``u`` of shape (T,).
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ModelError(f"{path}: empty trajectory file") from None
        missing = [c for c in TRAJECTORY_COLUMNS if c not in header]
        if missing:
            raise ModelError(f"{path}: missing trajectory column {missing[0]!r}")
        cols = [header.index(c) for c in TRAJECTORY_COLUMNS]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append([float(row[c]) for c in cols])
            except (ValueError, IndexError):
                raise ModelError(f"{path}:{lineno}: malformed trajectory row") from None
    data = np.array(rows)
    if data.shape[0] < 2:
        raise ModelError(f"{path}: trajectory needs at least two samples")
    return data[:, 0], data[:, 1:5], data[:, 5]


def write_trajectory_csv(path, t, x, u):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_COLUMNS)
        for tk, xk, uk in zip(t, x, u):
            w.writerow([repr(float(v)) for v in (tk, *xk, uk)])


def friction_signs(dq_now, dq_next) -> np.ndarray:
    """Velocity sign per joint, zero where the nominal velocity is zero or changes sign."""
    s_now, s_next = np.sign(dq_now), np.sign(dq_next)
    return np.where(s_now == s_next, s_now, 0.0)


@dataclass
class PendubotConfig:
    params: dict = field(default_factory=lambda: dict(PENDUBOT_PARAMS))
    extra_mass: tuple = (0.0, 0.06)
    stride: int = 1
    scheme: str = "euler"
    substeps: int = 1
    x0_half_widths: tuple = (0.2, 0.2, 2.0, 2.0)
    goal_half_widths: tuple = (0.2, 0.2, 2.0, 2.0)
    w_half_width: float = 9.5e-4
    u_max: float = 10.0
    reduction_p: int = 250
    Q_c: tuple = (1.0, 1.0, 0.1, 0.1)
    R_c: float = 1e-3
    Q_g: float = 1.0
    R_g: float = 1e-3
    reduction_weight: float = 1.0


def build_pendubot(t, x, u, config: PendubotConfig | None = None):
    """Time-varying uncertain pendubot linearized along a nominal trajectory.

    The trajectory is subsampled by ``config.stride``; each step gets one
    vertex model per endpoint of the extra-mass interval. Initial and goal sets
    are centered on the first and last nominal states.
    """
    cfg = config or PendubotConfig()
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float).reshape(-1)
    if x.ndim != 2 or x.shape[1] != 4 or x.shape[0] != t.size or u.size != t.size:
        raise ModelError("trajectory must provide t, four states and one input per sample")
    if t.size < 2:
        raise ModelError("trajectory needs at least two samples")
    idx = np.arange(0, t.size, cfg.stride)
    t, x, u = t[idx], x[idx], u[idx]
    if t.size < 2:
        raise ModelError("trajectory too short for the chosen stride")
    dts = np.diff(t)
    if np.any(dts <= 0):
        raise ModelError("trajectory time stamps must increase")
    model = pendubot_model()
    lo, hi = cfg.extra_mass
    intervals = {"me": (lo, hi)} if hi > lo else {}
    fixed = dict(cfg.params)
    if not intervals:
        fixed["me"] = lo
    vertices = []
    for k in range(t.size - 1):
        s = friction_signs(x[k, 2:], x[k + 1, 2:])
        fk = {**fixed, "s1": s[0], "s2": s[1]}
        for corner in interval_corners(intervals) or [{}]:
            _check_inertia(model, {**fk, **corner}, x[k])
        vertices.append(
            vertex_models_from_intervals(model, intervals, fk, x[k], u[k], dts[k], cfg.scheme, cfg.substeps)
        )
    W = Zonotope(np.zeros(4), cfg.w_half_width * np.eye(4))
    system = UncertainAffineSystem(vertices, W)
    scenario = Scenario(
        x0=Zonotope.from_box(x[0], cfg.x0_half_widths),
        goal=Zonotope.from_box(x[-1], cfg.goal_half_widths),
        input_bounds=Zonotope([0.0], [[cfg.u_max]]),
        x_nominal=x,
        u_nominal=u[:-1],
        Q_c=np.diag(cfg.Q_c),
        R_c=[[cfg.R_c]],
        Q_g=cfg.Q_g,
        R_g=cfg.R_g,
        reduction_weight=cfg.reduction_weight,
        reduction_p=cfg.reduction_p,
        dt=float(np.mean(dts)),
    )
    return system, scenario


def _check_inertia(model: SymbolicModel, values: dict, x):
    p = values
    c2 = np.cos(x[1])
    d11 = p["m1"] * p["lc1"] ** 2 + p["I1"] + p["me"] * (p["l1"] / 2) ** 2
    d11 += p["m2"] * (p["l1"] ** 2 + p["lc2"] ** 2 + 2 * p["l1"] * p["lc2"] * c2) + p["I2"]
    d12 = p["m2"] * (p["lc2"] ** 2 + p["l1"] * p["lc2"] * c2) + p["I2"]
    d22 = p["m2"] * p["lc2"] ** 2 + p["I2"]
    if abs(d11 * d22 - d12**2) < 1e-12:
        raise ModelError("singular inertia matrix along the trajectory")


def demo_pendubot_trajectory(duration: float = 0.4, dt: float = 0.01, amplitude: float = 0.3, freq: float = 1.5):
    """Dynamically consistent swing about the downward equilibrium (RK4 rollout of a sinusoidal torque).

    Stands in for a collocation-generated trajectory in examples and tests.
    """
    model = pendubot_model()
    values = {**PENDUBOT_PARAMS, "me": 0.0, "s1": 0.0, "s2": 0.0}
    f = model.vector_field(values)
    T = int(round(duration / dt)) + 1
    t = np.arange(T) * dt
    u = amplitude * np.sin(2 * np.pi * freq * t)
    x = np.zeros((T, 4))
    for k in range(T - 1):
        x[k + 1] = rk4_step(f, x[k], u[k], dt, 10)
    return t, x, u


def rk4_step(f, x, u, dt: float, substeps: int = 10):
    h = dt / substeps
    for _ in range(substeps):
        k1 = f(x, u)
        k2 = f(x + h / 2 * k1, u)
        k3 = f(x + h / 2 * k2, u)
        k4 = f(x + h * k3, u)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return x


def check_region_consistency(system: HybridUncertainSystem, Z: Zonotope) -> list[int]:
    """Indices of the regions that certifiably contain ``Z``."""
    out = []
    for j, H in enumerate(system.regions):
        try:
            ok, _ = contains(Z, H)
        except ZonotopeError:
            ok = False
        if ok:
            out.append(j)
    return out


def matrix_models_from_vertices(vertices: list) -> list:
    """Per-step interval-hull matrix zonotopes over the augmented matrices ``[A B d]``.

    Acting on ``(x, u, 1)`` the augmented matrix gives ``A x + B u + d``, so a
    varying affine term is covered as well.
    """
    return [MatrixZonotope.interval_hull_of([np.hstack([v.A, v.B, v.d[:, None]]) for v in vs]) for vs in vertices]
