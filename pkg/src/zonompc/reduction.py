"""Zonotope order reduction.

``reazor`` boxes the trailing generator columns into a nonnegative diagonal
block that is placed in front, and pushes the kept leading columns to the
back. Because it is linear in the generator except for the row absolute sums,
it can also be emitted as constraints of a convex program
(``reazor_fragment``). The Girard, Combastel and PCA reducers are the usual
sort-and-box baselines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .program import ConvexProgram, LinExpr, diag, hstack, pad_columns
from .zonoset import Parallelotope, Zonotope, ZonotopeError

BOX_EPS = 1e-9


@dataclass(frozen=True)
class ReducedZonotope:
    zonotope: Zonotope
    slacks: np.ndarray


@dataclass
class ReductionFragment:
    """Symbolic output of ``reazor_fragment``.

    ``generator`` is the reduced generator ``(diag(a), kept columns)``;
    ``cost`` is the expression ``sum(a)``.
    """

    generator: LinExpr
    slacks: LinExpr
    cost: LinExpr


def _check_target(n: int, p: int, z: int):
    if not n <= p <= z:
        raise ZonotopeError(f"reduction target must satisfy n <= p <= z, got n={n}, p={p}, z={z}")


def reazor(G, p: int, center=None) -> ReducedZonotope:
    """Closed-form ReaZOR of generator ``G`` (n x z) down to ``p`` columns.

    Examples
    --------
    >>> G = np.array([[4, 2, 2, 1, 1], [4, 1, 0, 2, 1]])
    >>> reazor(G, 4).zonotope.generator
    array([[4., 0., 4., 2.],
           [0., 3., 4., 1.]])
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    n, z = G.shape
    _check_target(n, p, z)
    a = np.abs(G[:, p - n :]).sum(axis=1)
    G_red = np.hstack([np.diag(a), G[:, : p - n]])
    c = np.zeros(n) if center is None else center
    return ReducedZonotope(Zonotope(c, G_red), a)


def reduce_reazor(Z: Zonotope, p: int) -> Zonotope:
    return reazor(Z.generator, p, Z.center).zonotope


def reazor_fragment(program: ConvexProgram, generator: LinExpr, p: int, name: str = "reazor") -> ReductionFragment:
    """Emit ReaZOR as constraints on a symbolic generator.

    Adds slacks ``s >= |G_ij|`` for the trailing columns and ``a_i >= sum_j s_ij``.
    The caller adds ``cost`` (times its weight) to the objective; at the optimum
    ``a`` equals the row absolute sums.
    """
    n, z = generator.shape
    if z < p:
        # fewer columns than the target: zero-pad so the kept block is intact
        generator = pad_columns(generator, p)
        z = p
    _check_target(n, p, z)
    tail = generator[:, p - n :]
    S = program.abs_bound(tail, f"{name}.abs", "reduction")
    a = program.variable(f"{name}.a", (n,), "reduction")
    program.add_le(S @ np.ones((z - p + n, 1)) - a.column())
    D = diag(a)
    G_red = hstack([D, generator[:, : p - n]]) if p > n else D
    return ReductionFragment(G_red, a, a.sum())


def _box(G: np.ndarray, n: int) -> np.ndarray:
    return np.diag(np.abs(G).sum(axis=1)) if G.shape[1] else np.zeros((n, n))


def _sorted_reduce(Z: Zonotope, p: int, score) -> Zonotope:
    n, z = Z.dim, Z.n_generators
    _check_target(n, p, z)
    if p == z:
        return Z
    G = Z.generator
    order = np.argsort(-score(G), kind="stable")
    keep, rest = order[: p - n], order[p - n :]
    return Zonotope(Z.center, np.hstack([G[:, np.sort(keep)], _box(G[:, rest], n)]))


def _girard_score(G):
    return np.abs(G).sum(axis=0) - np.abs(G).max(axis=0, initial=0.0)


def reduce_girard(Z: Zonotope, p: int) -> Zonotope:
    """Keep the ``p - n`` generators with the largest 1-norm minus inf-norm; box the rest."""
    return _sorted_reduce(Z, p, _girard_score)


def reduce_combastel(Z: Zonotope, p: int) -> Zonotope:
    """Keep the ``p - n`` longest generators (2-norm); box the rest."""
    return _sorted_reduce(Z, p, lambda G: np.linalg.norm(G, axis=0))


def reduce_pca(Z: Zonotope, p: int) -> Zonotope:
    """Bound the generators picked by the Girard criterion in their PCA frame."""
    n, z = Z.dim, Z.n_generators
    _check_target(n, p, z)
    if p == z:
        return Z
    G = Z.generator
    order = np.argsort(-_girard_score(G), kind="stable")
    keep, rest = order[: p - n], order[p - n :]
    R = G[:, rest]
    U, _, _ = np.linalg.svd(R)
    B = U @ np.diag(np.abs(U.T @ R).sum(axis=1))
    return Zonotope(Z.center, np.hstack([G[:, np.sort(keep)], B]))


REDUCERS = {
    "reazor": reduce_reazor,
    "girard": reduce_girard,
    "combastel": reduce_combastel,
    "pca": reduce_pca,
}


def parallelotope_bound(Z: Zonotope, eps: float = BOX_EPS) -> Parallelotope:
    """Bounding parallelotope aligned with the principal axes of the generators."""
    n = Z.dim
    if n < 1:
        raise ZonotopeError("parallelotope bound needs n >= 1")
    G = Z.generator
    if G.shape[1] == 0 or not np.any(G):
        return Parallelotope(Z.center, eps * np.eye(n))
    U, _, _ = np.linalg.svd(G)
    widths = np.abs(U.T @ G).sum(axis=1)
    widths = np.maximum(widths, eps)
    try:
        return Parallelotope(Z.center, U @ np.diag(widths))
    except ZonotopeError:
        return Parallelotope(Z.center, np.diag(np.maximum(np.abs(G).sum(axis=1), eps)))
