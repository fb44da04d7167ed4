"""Solver-agnostic convex program with linear constraints and a convex quadratic cost.

Variables live in one flat vector. ``LinExpr`` is an affine function of that
vector with an array shape (row-major flattening), so zonotope centers and
generators can be manipulated symbolically with the same matrix algebra used
on numeric zonotopes.
"""

from __future__ import annotations

import heapq
import logging
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

logger = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
BUDGET = "budget_exceeded"
ERROR = "error"


def _widen(m: sp.csr_matrix, nv: int) -> sp.csr_matrix:
    if m.shape[1] == nv:
        return m
    return sp.csr_matrix((m.data, m.indices, m.indptr), shape=(m.shape[0], nv))


class LinExpr:
    """Affine expression ``coef @ x + const`` reshaped to ``shape``."""

    __array_priority__ = 1000

    def __init__(self, coef, const, shape):
        self.coef = sp.csr_matrix(coef)
        self.const = np.asarray(const, dtype=float).reshape(-1)
        self.shape = tuple(shape)
        if self.coef.shape[0] != self.const.size or self.const.size != int(np.prod(self.shape, dtype=int)):
            raise ValueError("inconsistent expression sizes")

    @classmethod
    def constant(cls, value) -> "LinExpr":
        value = np.asarray(value, dtype=float)
        return cls(sp.csr_matrix((value.size, 0)), value.reshape(-1), value.shape)

    @classmethod
    def variable(cls, index: np.ndarray, nv: int) -> "LinExpr":
        idx = np.asarray(index).reshape(-1)
        coef = sp.csr_matrix((np.ones(idx.size), (np.arange(idx.size), idx)), shape=(idx.size, nv))
        return cls(coef, np.zeros(idx.size), np.asarray(index).shape)

    @property
    def size(self) -> int:
        return self.const.size

    @property
    def is_constant(self) -> bool:
        return self.coef.nnz == 0

    def _aligned(self, other):
        nv = max(self.coef.shape[1], other.coef.shape[1])
        return _widen(self.coef, nv), _widen(other.coef, nv)

    def __add__(self, other):
        if not isinstance(other, LinExpr):
            other = LinExpr.constant(np.broadcast_to(np.asarray(other, dtype=float), self.shape))
        if other.shape != self.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        a, b = self._aligned(other)
        return LinExpr(a + b, self.const + other.const, self.shape)

    __radd__ = __add__

    def __neg__(self):
        return LinExpr(-self.coef, -self.const, self.shape)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return as_expr(other) - self

    def __mul__(self, s):
        if not np.isscalar(s):
            raise TypeError("LinExpr supports only scalar multiplication; use @ for matrices")
        return LinExpr(self.coef * s, self.const * s, self.shape)

    __rmul__ = __mul__

    def __truediv__(self, s):
        return self * (1.0 / s)

    def __rmatmul__(self, A):
        """Numeric matrix times expression."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if A.shape[1] != self.shape[0]:
            raise ValueError(f"cannot multiply {A.shape} by expression of shape {self.shape}")
        if len(self.shape) == 1:
            K = sp.csr_matrix(A)
            shape = (A.shape[0],)
        else:
            K = sp.kron(sp.csr_matrix(A), sp.identity(self.shape[1]), format="csr")
            shape = (A.shape[0], self.shape[1])
        return LinExpr(K @ self.coef, K @ self.const, shape)

    def __matmul__(self, M):
        """Expression (2-D) times numeric matrix."""
        M = np.atleast_2d(np.asarray(M, dtype=float))
        if len(self.shape) != 2 or M.shape[0] != self.shape[1]:
            raise ValueError(f"cannot multiply expression {self.shape} by {M.shape}")
        K = sp.kron(sp.identity(self.shape[0]), sp.csr_matrix(M.T), format="csr")
        return LinExpr(K @ self.coef, K @ self.const, (self.shape[0], M.shape[1]))

    def _rows(self, idx: np.ndarray, shape):
        idx = np.asarray(idx, dtype=int).reshape(-1)
        return LinExpr(self.coef[idx], self.const[idx], shape)

    def __getitem__(self, key):
        flat = np.arange(self.size).reshape(self.shape)[key]
        return self._rows(flat, flat.shape)

    def reshape(self, *shape):
        shape = shape[0] if len(shape) == 1 and isinstance(shape[0], tuple) else shape
        return LinExpr(self.coef, self.const, np.empty(self.shape).reshape(shape).shape)

    def column(self) -> "LinExpr":
        return self.reshape(self.size, 1)

    def flatten(self) -> "LinExpr":
        return self.reshape(self.size)

    def sum(self) -> "LinExpr":
        ones = sp.csr_matrix(np.ones((1, self.size)))
        return LinExpr(ones @ self.coef, [self.const.sum()], (1,))

    def value(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        coef = _widen(self.coef, x.size) if self.coef.shape[1] <= x.size else self.coef
        return (coef @ x + self.const).reshape(self.shape)


def as_expr(v) -> LinExpr:
    return v if isinstance(v, LinExpr) else LinExpr.constant(v)


def hstack(exprs) -> LinExpr:
    """Horizontal concatenation of 2-D expressions (or constants)."""
    exprs = [as_expr(e) for e in exprs]
    exprs = [e.column() if len(e.shape) == 1 else e for e in exprs]
    n = exprs[0].shape[0]
    if any(e.shape[0] != n for e in exprs):
        raise ValueError("hstack row mismatch")
    nv = max(e.coef.shape[1] for e in exprs)
    widths = [e.shape[1] for e in exprs]
    coef = sp.vstack([_widen(e.coef, nv) for e in exprs], format="csr")
    const = np.concatenate([e.const for e in exprs])
    offsets = np.concatenate([[0], np.cumsum([e.size for e in exprs])])
    order = []
    for i in range(n):
        for b, w in enumerate(widths):
            order.append(offsets[b] + i * w + np.arange(w))
    order = np.concatenate(order) if order else np.zeros(0, dtype=int)
    return LinExpr(coef[order], const[order], (n, sum(widths)))


def vstack(exprs) -> LinExpr:
    exprs = [as_expr(e) for e in exprs]
    nv = max(e.coef.shape[1] for e in exprs)
    coef = sp.vstack([_widen(e.coef, nv) for e in exprs], format="csr")
    const = np.concatenate([e.const for e in exprs])
    if all(len(e.shape) == 1 for e in exprs):
        return LinExpr(coef, const, (const.size,))
    w = exprs[0].shape[1]
    return LinExpr(coef, const, (const.size // w, w))


def diag(v: LinExpr) -> LinExpr:
    """Square diagonal matrix expression from a vector expression."""
    n = v.size
    K = sp.csr_matrix((np.ones(n), (np.arange(n) * (n + 1), np.arange(n))), shape=(n * n, n))
    return LinExpr(K @ v.coef, K @ v.const, (n, n))


def pad_columns(E: LinExpr, width: int) -> LinExpr:
    if E.shape[1] == width:
        return E
    return hstack([E, np.zeros((E.shape[0], width - E.shape[1]))])


@dataclass
class VariableBlock:
    name: str
    tag: str
    index: np.ndarray
    binary: bool = False


@dataclass
class ConvexProgram:
    """Variables, linear (in)equalities ``expr == 0`` / ``expr <= 0`` and cost ``x'Px/2 + q'x + r``."""

    n_vars: int = 0
    blocks: list = field(default_factory=list)
    eq: list = field(default_factory=list)
    ineq: list = field(default_factory=list)
    quad: list = field(default_factory=list)
    lin: list = field(default_factory=list)
    const_cost: float = 0.0
    lower: dict = field(default_factory=dict)
    upper: dict = field(default_factory=dict)

    def variable(self, name: str, shape, tag: str = "", binary: bool = False) -> LinExpr:
        shape = (shape,) if np.isscalar(shape) else tuple(shape)
        size = int(np.prod(shape, dtype=int))
        index = np.arange(self.n_vars, self.n_vars + size).reshape(shape)
        self.n_vars += size
        self.blocks.append(VariableBlock(name, tag, index, binary))
        if binary:
            for i in index.reshape(-1):
                self.lower[int(i)] = 0.0
                self.upper[int(i)] = 1.0
        return LinExpr.variable(index, self.n_vars)

    @property
    def binary_index(self) -> np.ndarray:
        idx = [b.index.reshape(-1) for b in self.blocks if b.binary]
        return np.concatenate(idx) if idx else np.zeros(0, dtype=int)

    @property
    def has_binaries(self) -> bool:
        return self.binary_index.size > 0

    def block(self, name: str) -> VariableBlock:
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)

    def add_eq(self, lhs, rhs=0.0):
        lhs = as_expr(lhs)
        rhs = rhs if isinstance(rhs, LinExpr) else as_expr(np.broadcast_to(rhs, lhs.shape))
        e = lhs - rhs
        if e.size:
            self.eq.append(e.flatten())

    def add_le(self, lhs, rhs=0.0):
        lhs = as_expr(lhs)
        rhs = as_expr(np.broadcast_to(rhs, lhs.shape)) if not isinstance(rhs, LinExpr) else rhs
        e = lhs - rhs
        if e.size:
            self.ineq.append(e.flatten())

    def abs_bound(self, E: LinExpr, name: str, tag: str = "slack") -> LinExpr:
        """Slack ``S`` with ``|E| <= S`` element-wise."""
        S = self.variable(name, E.shape, tag)
        self.add_le(E - S)
        self.add_le(-E - S)
        return S

    def add_containment(self, inner_c, inner_G, outer, bound=1.0, name="cont"):
        """Encode ``<inner_c, inner_G>`` inside the numeric zonotope ``outer``.

        ``bound`` may be an expression, which gives the relaxed row-norm bound
        used for big-M region constraints.
        """
        inner_c, inner_G = as_expr(inner_c), as_expr(inner_G)
        Y = outer.generator
        ny = Y.shape[1]
        gamma = self.variable(f"{name}.gamma", (ny, inner_G.shape[1]), "containment")
        beta = self.variable(f"{name}.beta", (ny,), "containment")
        self.add_eq(Y @ gamma - inner_G)
        self.add_eq(Y @ beta - (outer.center - inner_c))
        S = self.abs_bound(hstack([gamma, beta]), f"{name}.abs", "containment")
        rowsum = S @ np.ones((S.shape[1], 1))
        if isinstance(bound, LinExpr):
            self.add_le(rowsum.flatten() - vstack([bound] * ny))
        else:
            self.add_le(rowsum.flatten(), np.full(ny, float(bound)))
        return gamma, beta

    def add_sq_cost(self, E: LinExpr, weight: float = 1.0):
        """Add ``weight * ||E||^2``."""
        if weight == 0 or E.size == 0:
            return
        if E.is_constant:
            self.const_cost += weight * float(E.const @ E.const)
            return
        C = E.coef
        self.quad.append(2 * weight * (C.T @ C))
        self.lin.append((2 * weight * (C.T @ E.const), C.shape[1]))
        self.const_cost += weight * float(E.const @ E.const)

    def add_quadform_cost(self, E: LinExpr, Q):
        """Add ``E' Q E`` for a vector expression and symmetric PSD ``Q``."""
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        w, V = np.linalg.eigh(Q)
        if w.min() < -1e-12:
            raise ValueError("cost weight is not positive semidefinite")
        L = (V * np.sqrt(np.clip(w, 0, None))).T
        self.add_sq_cost(L @ E.flatten())

    def add_linear_cost(self, E: LinExpr, weight: float = 1.0):
        s = E.sum()
        self.lin.append((weight * np.asarray(s.coef.todense()).reshape(-1), s.coef.shape[1]))
        self.const_cost += weight * float(s.const[0])

    def _stack(self, rows):
        if not rows:
            return sp.csr_matrix((0, self.n_vars)), np.zeros(0)
        A = sp.vstack([_widen(r.coef, self.n_vars) for r in rows], format="csc")
        b = -np.concatenate([r.const for r in rows])
        return A, b

    def assemble(self):
        """Return ``(P, q, r, A_eq, b_eq, A_ub, b_ub)`` with ``A_eq x = b_eq`` and ``A_ub x <= b_ub``."""
        n = self.n_vars
        rows, cols, vals = [], [], []
        for Qm in self.quad:
            Qm = sp.coo_matrix(Qm)
            rows.append(Qm.row)
            cols.append(Qm.col)
            vals.append(Qm.data)
        if rows:
            P = sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
        else:
            P = sp.csc_matrix((n, n))
        q = np.zeros(n)
        for v, w in self.lin:
            q[:w] += np.asarray(v).reshape(-1)[:w]
        A_eq, b_eq = self._stack(self.eq)
        A_ub, b_ub = self._stack(self.ineq)
        return P.tocsc(), q, self.const_cost, A_eq, b_eq, A_ub, b_ub

    def objective(self, x) -> float:
        P, q, r, *_ = self.assemble()
        return float(0.5 * x @ (P @ x) + q @ x + r)

    def max_violation(self, x) -> float:
        _, _, _, A_eq, b_eq, A_ub, b_ub = self.assemble()
        v = 0.0
        if A_eq.shape[0]:
            v = max(v, float(np.abs(A_eq @ x - b_eq).max()))
        if A_ub.shape[0]:
            v = max(v, float(np.clip(A_ub @ x - b_ub, 0, None).max()))
        return v


@dataclass
class SolveOutput:
    status: str
    x: np.ndarray | None = None
    objective: float = np.inf
    info: dict = field(default_factory=dict)


class ClarabelAdapter:
    """Interior-point QP backend (continuous programs only)."""

    supports_qp = True
    supports_socp = True
    supports_binaries = False

    def __init__(self, tol: float = 1e-8, max_iter: int = 200, verbose: bool = False):
        self.tol = tol
        self.max_iter = max_iter
        self.verbose = verbose

    def solve(self, program: ConvexProgram, lower=None, upper=None) -> SolveOutput:
        P, q, r, A_eq, b_eq, A_ub, b_ub = program.assemble()
        lower = {**program.lower, **(lower or {})}
        upper = {**program.upper, **(upper or {})}
        return self.solve_assembled((P, q, r, A_eq, b_eq, A_ub, b_ub), program.n_vars, lower, upper)

    def solve_assembled(self, data, n, lower, upper) -> SolveOutput:
        import clarabel

        P, q, r, A_eq, b_eq, A_ub, b_ub = data
        rows, rhs = [A_ub], [b_ub]
        if upper:
            idx = np.array(sorted(upper))
            rows.append(sp.csc_matrix((np.ones(idx.size), (np.arange(idx.size), idx)), shape=(idx.size, n)))
            rhs.append(np.array([upper[i] for i in idx]))
        if lower:
            idx = np.array(sorted(lower))
            rows.append(sp.csc_matrix((-np.ones(idx.size), (np.arange(idx.size), idx)), shape=(idx.size, n)))
            rhs.append(-np.array([lower[i] for i in idx]))
        A_in = sp.vstack(rows, format="csc")
        b_in = np.concatenate(rhs)
        A = sp.vstack([A_eq, A_in], format="csc")
        b = np.concatenate([b_eq, b_in])
        cones = []
        if A_eq.shape[0]:
            cones.append(clarabel.ZeroConeT(A_eq.shape[0]))
        if A_in.shape[0]:
            cones.append(clarabel.NonnegativeConeT(A_in.shape[0]))
        settings = clarabel.DefaultSettings()
        settings.verbose = self.verbose
        settings.tol_gap_abs = self.tol
        settings.tol_gap_rel = self.tol
        settings.tol_feas = self.tol
        settings.max_iter = self.max_iter
        solver = clarabel.DefaultSolver(sp.triu(P, format="csc"), q, A, b, cones, settings)
        sol = solver.solve()
        status = str(sol.status)
        x = np.array(sol.x)
        if status in ("Solved", "AlmostSolved"):
            return SolveOutput(OPTIMAL, x, float(0.5 * x @ (P @ x) + q @ x + r), {"backend_status": status})
        if "PrimalInfeasible" in status:
            return SolveOutput(INFEASIBLE, info={"backend_status": status})
        if "DualInfeasible" in status:
            return SolveOutput(UNBOUNDED, info={"backend_status": status})
        return SolveOutput(ERROR, info={"backend_status": status})


class HighsLPAdapter:
    """LP-only backend via scipy's HiGHS (rejects quadratic costs)."""

    supports_qp = False
    supports_socp = False
    supports_binaries = False

    def solve(self, program: ConvexProgram, lower=None, upper=None) -> SolveOutput:
        from scipy.optimize import linprog

        P, q, r, A_eq, b_eq, A_ub, b_ub = program.assemble()
        if P.nnz:
            raise ValueError("HighsLPAdapter cannot handle quadratic costs")
        lower = {**program.lower, **(lower or {})}
        upper = {**program.upper, **(upper or {})}
        bounds = [(lower.get(i), upper.get(i)) for i in range(program.n_vars)]
        res = linprog(
            q,
            A_ub=A_ub if A_ub.shape[0] else None,
            b_ub=b_ub if A_ub.shape[0] else None,
            A_eq=A_eq if A_eq.shape[0] else None,
            b_eq=b_eq if A_eq.shape[0] else None,
            bounds=bounds,
            method="highs",
        )
        if res.status == 0:
            return SolveOutput(OPTIMAL, res.x, float(res.fun + r))
        if res.status == 2:
            return SolveOutput(INFEASIBLE)
        if res.status == 3:
            return SolveOutput(UNBOUNDED)
        return SolveOutput(ERROR, info={"message": res.message})


@dataclass
class BnBConfig:
    """Branch-and-bound budget and tolerances.

    ``groups`` lists, per branching step, the binary variable indices whose
    sum is one (an SOS1 group). Without groups every binary is its own group.
    """

    max_nodes: int = 10_000
    time_limit: float = 600.0
    integrality_tol: float = 1e-6
    gap_tol: float = 1e-9


@dataclass(order=True)
class _Node:
    bound: float
    seq: int
    fixed: dict = field(compare=False)


def branch_and_bound(program: ConvexProgram, adapter, groups=None, config: BnBConfig | None = None) -> SolveOutput:
    """Best-first branch and bound over QP relaxations with SOS1 branching.

    Each group of two or more binaries sums to one; branching on it creates
    one child per member fixing that member to one and the rest to zero. A
    single-binary group branches on zero and one. Groups and
    children are visited lowest index first on ties, so the search is
    deterministic.
    """
    config = config or BnBConfig()
    binaries = program.binary_index
    if binaries.size == 0:
        return adapter.solve(program)
    if groups is None:
        groups = [[int(i)] for i in binaries]
    groups = [list(map(int, g)) for g in groups]
    data = program.assemble()
    n = program.n_vars
    start = time.monotonic()

    def relax(fixed):
        lower = dict(program.lower)
        upper = dict(program.upper)
        for i, v in fixed.items():
            lower[i] = upper[i] = v
        return adapter.solve_assembled(data, n, lower, upper)

    def fractional_group(x, fixed):
        worst, pick = -1.0, None
        for gi, g in enumerate(groups):
            if all(i in fixed for i in g):
                continue
            vals = x[g]
            if len(g) == 1:
                frac = min(vals[0], 1 - vals[0])
            else:
                frac = 1.0 - vals.max()
            if frac > config.integrality_tol and frac > worst + 1e-12:
                worst, pick = frac, gi
        return pick

    def rounded(x, fixed):
        out = dict(fixed)
        for g in groups:
            if all(i in out for i in g):
                continue
            if len(g) == 1:
                out[g[0]] = float(round(x[g[0]]))
            else:
                best = g[int(np.argmax(x[g]))]
                for i in g:
                    out[i] = 1.0 if i == best else 0.0
        return out

    incumbent: SolveOutput | None = None
    nodes = 0
    seq = 0
    heap = []
    root = relax({})
    nodes += 1
    if root.status == INFEASIBLE:
        return SolveOutput(INFEASIBLE, info={"nodes": nodes})
    if root.status != OPTIMAL:
        return SolveOutput(root.status, info={"nodes": nodes, **root.info})
    heapq.heappush(heap, _Node(root.objective, seq, {}))
    cache = {(): root}
    exhausted = True

    def try_incumbent(x, fixed):
        nonlocal incumbent, nodes
        trial = relax(rounded(x, fixed))
        nodes += 1
        if trial.status == OPTIMAL and (incumbent is None or trial.objective < incumbent.objective - config.gap_tol):
            incumbent = trial

    try_incumbent(root.x, {})
    while heap:
        if nodes >= config.max_nodes or time.monotonic() - start > config.time_limit:
            exhausted = False
            break
        node = heapq.heappop(heap)
        if incumbent is not None and node.bound >= incumbent.objective - config.gap_tol:
            continue
        key = tuple(sorted(node.fixed.items()))
        sol = cache.pop(key, None)
        if sol is None:
            sol = relax(node.fixed)
            nodes += 1
        if sol.status != OPTIMAL:
            continue
        if incumbent is not None and sol.objective >= incumbent.objective - config.gap_tol:
            continue
        gi = fractional_group(sol.x, node.fixed)
        if gi is None:
            if incumbent is None or sol.objective < incumbent.objective - config.gap_tol:
                incumbent = SolveOutput(OPTIMAL, sol.x, sol.objective)
            continue
        g = groups[gi]
        # a lone binary branches on 0 and 1; a larger group on which member is one
        options = [{g[0]: 0.0}, {g[0]: 1.0}] if len(g) == 1 else [{i: float(i == m) for i in g} for m in g]
        for opt in options:
            child = {**node.fixed, **opt}
            csol = relax(child)
            nodes += 1
            if csol.status != OPTIMAL:
                continue
            if incumbent is not None and csol.objective >= incumbent.objective - config.gap_tol:
                continue
            seq += 1
            cache[tuple(sorted(child.items()))] = csol
            heapq.heappush(heap, _Node(csol.objective, seq, child))
        if nodes % 25 == 0:
            logger.info("bnb: %d nodes, open %d, incumbent %s", nodes, len(heap), incumbent and incumbent.objective)
    info = {"nodes": nodes, "open_nodes": len(heap), "elapsed": time.monotonic() - start}
    if incumbent is None:
        return SolveOutput(INFEASIBLE if exhausted else BUDGET, info=info)
    if exhausted:
        info["gap"] = 0.0
        return SolveOutput(OPTIMAL, incumbent.x, incumbent.objective, info)
    best_bound = min(h.bound for h in heap)
    info["gap"] = max(0.0, incumbent.objective - best_bound)
    info["budget_exceeded"] = True
    return SolveOutput(BUDGET, incumbent.x, incumbent.objective, info)
