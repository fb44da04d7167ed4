"""Vector and matrix zonotopes.

A zonotope ``<c, G>`` is the set ``{c + G b : ||b||_inf <= 1}``. All objects in
this module are immutable; every operation returns a new object.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

CERT_TOL = 1e-7
VOLUME_SUBSET_CAP = math.comb(24, 4)
PARALLELOTOPE_COND_CAP = 1e12


class ZonotopeError(ValueError):
    """Raised on malformed zonotopes or incompatible operands."""


class SolverError(RuntimeError):
    """Raised when an LP backend fails for reasons other than infeasibility."""


def _as_vector(v, name="vector"):
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    if arr.ndim != 1:
        raise ZonotopeError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


class Zonotope:
    """Zonotope with center ``c`` (n,) and generator ``G`` (n, p).

    Parameters
    ----------
    center : array_like, shape (n,)
    generator : array_like, shape (n, p), optional
        ``None`` or an empty array gives a point set.
    """

    __slots__ = ("_c", "_G")

    def __init__(self, center, generator=None):
        c = _as_vector(center, "center").copy()
        if generator is None:
            G = np.zeros((c.size, 0))
        else:
            G = np.asarray(generator, dtype=float)
            if G.ndim == 1:
                # a single row for 1-D zonotopes, otherwise a single column
                G = G.reshape(1, -1) if c.size == 1 else G.reshape(-1, 1)
            if G.size == 0:
                G = np.zeros((c.size, 0))
        if G.ndim != 2 or G.shape[0] != c.size:
            raise ZonotopeError(f"generator shape {G.shape} does not match center dimension {c.size}")
        c.setflags(write=False)
        G = np.array(G)
        G.setflags(write=False)
        self._c = c
        self._G = G

    @classmethod
    def from_box(cls, center, half_widths):
        return cls(center, np.diag(_as_vector(half_widths)))

    @property
    def center(self) -> np.ndarray:
        return self._c

    @property
    def generator(self) -> np.ndarray:
        return self._G

    @property
    def dim(self) -> int:
        return self._c.size

    @property
    def n_generators(self) -> int:
        return self._G.shape[1]

    @property
    def order(self) -> float:
        return self.n_generators / self.dim

    def padded(self, width: int) -> "Zonotope":
        """Append zero columns up to ``width`` generators."""
        if width < self.n_generators:
            raise ZonotopeError("cannot pad to a smaller width")
        extra = np.zeros((self.dim, width - self.n_generators))
        return Zonotope(self._c, np.hstack([self._G, extra]))

    def interval_hull(self):
        r = np.abs(self._G).sum(axis=1)
        return self._c - r, self._c + r

    def __repr__(self):
        return f"Zonotope(dim={self.dim}, n_generators={self.n_generators})"

    def __eq__(self, other):
        if not isinstance(other, Zonotope):
            return NotImplemented
        return (
            self._c.shape == other._c.shape
            and self._G.shape == other._G.shape
            and np.array_equal(self._c, other._c)
            and np.array_equal(self._G, other._G)
        )

    __hash__ = None


@dataclass(frozen=True)
class MatrixZonotope:
    """Set ``{A0 + sum_i b_i A_i : |b_i| <= 1}`` of equally shaped matrices."""

    center_matrix: np.ndarray
    generator_matrices: tuple = field(default_factory=tuple)

    def __post_init__(self):
        A0 = np.atleast_2d(np.asarray(self.center_matrix, dtype=float))
        gens = tuple(np.atleast_2d(np.asarray(A, dtype=float)) for A in self.generator_matrices)
        for A in gens:
            if A.shape != A0.shape:
                raise ZonotopeError(f"generator matrix shape {A.shape} differs from center {A0.shape}")
        object.__setattr__(self, "center_matrix", A0)
        object.__setattr__(self, "generator_matrices", gens)

    @property
    def shape(self):
        return self.center_matrix.shape

    @property
    def n_generators(self) -> int:
        return len(self.generator_matrices)

    def sample(self, rng) -> np.ndarray:
        b = rng.uniform(-1.0, 1.0, size=self.n_generators)
        return self.center_matrix + sum((bi * Ai for bi, Ai in zip(b, self.generator_matrices)), 0.0)

    @classmethod
    def interval_hull_of(cls, matrices) -> "MatrixZonotope":
        """Entry-wise interval hull of a list of matrices, one generator per varying entry."""
        stack = np.stack([np.atleast_2d(np.asarray(M, dtype=float)) for M in matrices])
        lo, hi = stack.min(axis=0), stack.max(axis=0)
        gens = []
        for idx in zip(*np.nonzero(hi - lo > 0)):
            E = np.zeros(lo.shape)
            E[idx] = (hi[idx] - lo[idx]) / 2
            gens.append(E)
        return cls((lo + hi) / 2, tuple(gens))


@dataclass(frozen=True)
class ContainmentCertificate:
    """Multipliers proving ``<x, X>`` is inside ``<y, Y>``: ``X = Y gamma``, ``y - x = Y beta``."""

    gamma: np.ndarray
    beta: np.ndarray

    @property
    def norm(self) -> float:
        """Max absolute row sum of ``(gamma, beta)``."""
        M = np.hstack([self.gamma, self.beta.reshape(-1, 1)])
        return float(np.abs(M).sum(axis=1).max()) if M.size else 0.0

    def verify(self, inner: Zonotope, outer: Zonotope, tol: float = CERT_TOL) -> bool:
        Y = outer.generator
        ok_gen = np.allclose(inner.generator, Y @ self.gamma, atol=tol, rtol=0)
        ok_cen = np.allclose(outer.center - inner.center, Y @ self.beta, atol=tol, rtol=0)
        return bool(ok_gen and ok_cen and self.norm <= 1 + tol)


class Parallelotope:
    """Order-one zonotope with square nonsingular generator and cached inverse."""

    __slots__ = ("center", "generator", "inverse")

    def __init__(self, center, generator, cond_cap: float = PARALLELOTOPE_COND_CAP):
        c = _as_vector(center, "center")
        P = np.asarray(generator, dtype=float)
        if P.shape != (c.size, c.size):
            raise ZonotopeError(f"parallelotope generator must be {c.size}x{c.size}, got {P.shape}")
        if not np.isfinite(np.linalg.cond(P)) or np.linalg.cond(P) > cond_cap:
            raise ZonotopeError("parallelotope generator is numerically singular")
        self.center = c
        self.generator = P
        self.inverse = np.linalg.inv(P)

    def as_zonotope(self) -> Zonotope:
        return Zonotope(self.center, self.generator)


def _check_dim(a: Zonotope, b: Zonotope):
    if a.dim != b.dim:
        raise ZonotopeError(f"dimension mismatch: {a.dim} vs {b.dim}")


def linear_map(A, Z: Zonotope) -> Zonotope:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[1] != Z.dim:
        raise ZonotopeError(f"matrix with {A.shape[1]} columns cannot act on dimension {Z.dim}")
    return Zonotope(A @ Z.center, A @ Z.generator)


def add(Zx: Zonotope, Zy: Zonotope) -> Zonotope:
    """Generator-wise sum ``<x + y, X + Y>``; widths must match (pad first)."""
    _check_dim(Zx, Zy)
    if Zx.n_generators != Zy.n_generators:
        raise ZonotopeError(
            f"generator widths differ ({Zx.n_generators} vs {Zy.n_generators}); pad with zero columns first"
        )
    return Zonotope(Zx.center + Zy.center, Zx.generator + Zy.generator)


def translate(Z: Zonotope, v) -> Zonotope:
    v = _as_vector(v)
    if v.size != Z.dim:
        raise ZonotopeError(f"vector of size {v.size} cannot translate dimension {Z.dim}")
    return Zonotope(Z.center + v, Z.generator)


def minkowski(Zx: Zonotope, Zy: Zonotope) -> Zonotope:
    _check_dim(Zx, Zy)
    return Zonotope(Zx.center + Zy.center, np.hstack([Zx.generator, Zy.generator]))


def _leading_diagonal(Z: Zonotope) -> np.ndarray:
    n = Z.dim
    if Z.n_generators < n:
        raise ZonotopeError("generator has fewer columns than the dimension")
    D = Z.generator[:, :n]
    d = np.diag(D)
    if not np.array_equal(D, np.diag(d)):
        raise ZonotopeError("leading generator block is not diagonal")
    if np.any(d < 0):
        raise ZonotopeError("leading diagonal block has a negative entry")
    return d


def minkowski_diag(Zx: Zonotope, Zy: Zonotope) -> Zonotope:
    """Minkowski sum that merges the leading nonnegative diagonal blocks."""
    _check_dim(Zx, Zy)
    dx, dy = _leading_diagonal(Zx), _leading_diagonal(Zy)
    n = Zx.dim
    G = np.hstack([np.diag(dx + dy), Zx.generator[:, n:], Zy.generator[:, n:]])
    return Zonotope(Zx.center + Zy.center, G)


def support(Z: Zonotope, direction) -> float:
    d = _as_vector(direction)
    if d.size != Z.dim:
        raise ZonotopeError("direction dimension mismatch")
    return float(d @ Z.center + np.abs(d @ Z.generator).sum())


def _linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=None):
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status in (0, 2):
        return res
    raise SolverError(f"LP solver failed: {res.message}")


def containment_margin(inner: Zonotope, outer: Zonotope):
    """Smallest row norm ``t`` of a containment certificate, and the certificate.

    Returns ``(inf, None)`` when ``X = Y gamma, y - x = Y beta`` has no solution.
    """
    _check_dim(inner, outer)
    Y = outer.generator
    n, ny = Y.shape
    if ny == 0:
        same = np.allclose(inner.center, outer.center, atol=CERT_TOL) and not np.any(
            np.abs(inner.generator) > CERT_TOL
        )
        if same:
            return 0.0, ContainmentCertificate(np.zeros((0, inner.n_generators)), np.zeros(0))
        return math.inf, None
    # unknowns: M = (gamma, beta) of shape (ny, k) row-major, S same shape, t
    X = np.hstack([inner.generator, (outer.center - inner.center).reshape(-1, 1)])
    # the certificate is scale free; unit-size data keeps the solver's absolute tolerances relative
    scale = np.abs(Y).max()
    if scale > 0:
        X, Y = X / scale, Y / scale
    k = X.shape[1]
    nm = ny * k
    A_eq = sp.hstack([sp.kron(sp.csr_matrix(Y), sp.identity(k)), sp.csr_matrix((n * k, nm + 1))])
    b_eq = X.reshape(-1)
    eye = sp.identity(nm, format="csr")
    rowsum = sp.kron(sp.identity(ny), np.ones((1, k)))
    A_ub = sp.vstack(
        [
            sp.hstack([eye, -eye, sp.csr_matrix((nm, 1))]),
            sp.hstack([-eye, -eye, sp.csr_matrix((nm, 1))]),
            sp.hstack([sp.csr_matrix((ny, nm)), rowsum, -np.ones((ny, 1))]),
        ]
    ).tocsr()
    b_ub = np.zeros(2 * nm + ny)
    cost = np.zeros(2 * nm + 1)
    cost[-1] = 1.0
    bounds = [(None, None)] * nm + [(0, None)] * (nm + 1)
    res = _linprog(cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq.tocsr(), b_eq=b_eq, bounds=bounds)
    if res.status == 2:
        return math.inf, None
    M = res.x[:nm].reshape(ny, k)
    cert = ContainmentCertificate(M[:, :-1], M[:, -1])
    return cert.norm, cert


def contains(inner: Zonotope, outer: Zonotope, tol: float = CERT_TOL):
    """Sufficient LP test for ``inner`` being a subset of ``outer``.

    Returns
    -------
    (bool, ContainmentCertificate or None)
        ``False`` does not prove non-containment.
    """
    _check_dim(inner, outer)
    if outer.n_generators < 1:
        raise ZonotopeError("outer zonotope needs at least one generator")
    t, cert = containment_margin(inner, outer)
    if cert is None or t > 1 + tol:
        return False, None
    return True, cert


def contains_point(Z: Zonotope, x, tol: float = CERT_TOL) -> bool:
    x = _as_vector(x)
    if x.size != Z.dim:
        raise ZonotopeError("point dimension mismatch")
    r = x - Z.center
    G = Z.generator
    p = G.shape[1]
    if p == 0:
        return bool(np.all(np.abs(r) <= tol))
    if p == Z.dim:
        try:
            b = np.linalg.solve(G, r)
        except np.linalg.LinAlgError:
            pass
        else:
            if np.allclose(G @ b, r, atol=1e-10):
                return bool(np.max(np.abs(b)) <= 1 + tol)
    # minimise ||b||_inf subject to G b = r
    cost = np.zeros(p + 1)
    cost[-1] = 1.0
    A_eq = np.hstack([G, np.zeros((Z.dim, 1))])
    I = np.eye(p)
    A_ub = np.vstack([np.hstack([I, -np.ones((p, 1))]), np.hstack([-I, -np.ones((p, 1))])])
    res = _linprog(cost, A_ub=A_ub, b_ub=np.zeros(2 * p), A_eq=A_eq, b_eq=r, bounds=[(None, None)] * (p + 1))
    if res.status == 2:
        return False
    return bool(res.x[-1] <= 1 + tol)


def convex_hull_pair(Zx: Zonotope, Zy: Zonotope) -> Zonotope:
    """Over-approximation of the convex hull of two zonotopes.

    The narrower operand is padded with zero columns.
    """
    _check_dim(Zx, Zy)
    w = max(Zx.n_generators, Zy.n_generators)
    Zx, Zy = Zx.padded(w), Zy.padded(w)
    x, X, y, Y = Zx.center, Zx.generator, Zy.center, Zy.generator
    G = np.hstack([(X + Y) / 2, ((x - y) / 2).reshape(-1, 1), (X - Y) / 2])
    return Zonotope((x + y) / 2, G)


def pad_to_power_of_two(items: list) -> list:
    items = list(items)
    target = 1 << max(0, (len(items) - 1).bit_length())
    return items + [items[-1]] * (target - len(items))


def convex_hull_many(zonotopes) -> Zonotope:
    """Iterated pairwise hulls; the list is padded with its last element to a power of two."""
    zs = list(zonotopes)
    if not zs:
        raise ZonotopeError("convex hull of an empty list")
    zs = pad_to_power_of_two(zs)
    while len(zs) > 1:
        zs = [convex_hull_pair(zs[i], zs[i + 1]) for i in range(0, len(zs), 2)]
    return zs[0]


def mz_multiply(MZ: MatrixZonotope, Z: Zonotope) -> Zonotope:
    """Over-approximation of ``{A z : A in MZ, z in Z}``."""
    if MZ.shape[1] != Z.dim:
        raise ZonotopeError(f"matrix zonotope with {MZ.shape[1]} columns cannot act on dimension {Z.dim}")
    c, G = Z.center, Z.generator
    blocks = [MZ.center_matrix @ G]
    for A in MZ.generator_matrices:
        blocks.append((A @ c).reshape(-1, 1))
        blocks.append(A @ G)
    return Zonotope(MZ.center_matrix @ c, np.hstack(blocks))


def volume(Z: Zonotope) -> float:
    """Exact volume ``2^n sum_S |det G_S|`` over all n-column subsets."""
    n, p = Z.dim, Z.n_generators
    if n > 4 or math.comb(p, n) > VOLUME_SUBSET_CAP:
        raise ZonotopeError(f"volume formula capped at n <= 4 and C(p, n) <= {VOLUME_SUBSET_CAP}; got n={n}, p={p}")
    if p < n:
        return 0.0
    G = Z.generator
    if n == 2:
        i, j = np.triu_indices(p, k=1)
        dets = G[0, i] * G[1, j] - G[1, i] * G[0, j]
        return float(4.0 * np.abs(dets).sum())
    subsets = np.array(list(itertools.combinations(range(p), n)))
    mats = np.transpose(G[:, subsets], (1, 0, 2))
    return float(2.0**n * np.abs(np.linalg.det(mats)).sum())


def vertices_2d(Z: Zonotope, dims=(0, 1)) -> np.ndarray:
    """Counter-clockwise vertex list of the projection onto two coordinates."""
    c = Z.center[list(dims)]
    G = Z.generator[list(dims), :]
    G = G[:, np.linalg.norm(G, axis=0) > 0]
    if G.shape[1] == 0:
        return c.reshape(1, 2)
    # orient every generator into the upper half plane, then walk by angle
    flip = (G[1] < 0) | ((G[1] == 0) & (G[0] < 0))
    G = np.where(flip, -G, G)
    G = G[:, np.argsort(np.arctan2(G[1], G[0]), kind="stable")]
    start = c - G.sum(axis=1)
    steps = np.hstack([2 * G, -2 * G])
    return start + np.vstack([np.zeros(2), np.cumsum(steps.T, axis=0)[:-1]])
