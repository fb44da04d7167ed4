"""Explicit feedback policy over a synthesized tube.

Each tube step ``k`` stores its state set ``<c_k, G_k>``, the input center
``v_k`` and gain ``theta_k``. At run time the step to execute is picked by a
cheap distance to a bounding parallelotope of each state set, preferring the
successor of the previously used step so the controller does not chatter
between neighbouring sets.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .reduction import parallelotope_bound
from .synth import SynthesisResult, _fmt, read_result, write_result
from .zonoset import ContainmentCertificate, Parallelotope, Zonotope, contains, contains_point

DEFAULT_NN = 8
PINV_RESIDUAL_TOL = 1e-8
# distances within this of the minimum (state units) are ties and go to the lower
# index; it sits above the solver's center noise so co-centered steps compare equal
TIE_ATOL = 1e-8


@dataclass
class PolicyEntry:
    center: np.ndarray
    generator: np.ndarray
    pinv: np.ndarray
    theta: np.ndarray
    v: np.ndarray
    bound: Parallelotope
    certificate: ContainmentCertificate | None

    @property
    def zonotope(self) -> Zonotope:
        return Zonotope(self.center, self.generator)


@dataclass
class ControllerState:
    """Index of the last applied tube step, ``None`` before the first call."""

    k: int | None = None


class PolicyLibrary:
    """Tube steps ``0..N-1`` with feedback data, parallelotope bounds and a k-d tree over centers."""

    def __init__(self, entries: list[PolicyEntry]):
        if not entries:
            raise ValueError("policy library needs at least one entry")
        self.entries = list(entries)
        self.centers = np.array([e.center for e in entries])
        self.tree = cKDTree(self.centers)

    @classmethod
    def from_result(cls, result: SynthesisResult, bounds: list | None = None) -> "PolicyLibrary":
        entries = []
        for k in range(result.horizon):
            X = result.X[k]
            G = X.generator
            pinv = np.linalg.pinv(G)
            if np.abs(G @ pinv @ G - G).max(initial=0.0) > PINV_RESIDUAL_TOL * max(1.0, np.abs(G).max()):
                raise ValueError(f"pseudoinverse residual too large at step {k}")
            P = bounds[k] if bounds is not None else parallelotope_bound(X)
            ok, cert = contains(X, P.as_zonotope())
            entries.append(PolicyEntry(X.center, G, pinv, result.theta[k], result.U[k].center, P, cert if ok else None))
        return cls(entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    def save(self, outdir, result: SynthesisResult, extra: dict | None = None):
        """Write the tube (result schema) plus ``parallelotopes.csv``."""
        write_result(result, outdir, extra)
        rows = []
        for k, e in enumerate(self.entries):
            P = e.bound.generator
            for i in range(P.shape[0]):
                rows.append([k, i, -1, _fmt(e.bound.center[i])])
                for j in range(P.shape[1]):
                    rows.append([k, i, j, _fmt(P[i, j])])
        with open(Path(outdir) / "parallelotopes.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "row", "col", "value"])
            w.writerows(rows)

    @classmethod
    def load(cls, outdir) -> tuple["PolicyLibrary", SynthesisResult]:
        result = read_result(outdir)
        if not result.X:
            raise ValueError(f"{outdir}: result holds no tube (status {result.status})")
        path = Path(outdir) / "parallelotopes.csv"
        bounds = None
        if path.exists():
            n, N = result.X[0].dim, result.horizon
            cs, Ps = np.zeros((N, n)), np.zeros((N, n, n))
            with open(path, newline="") as fh:
                reader = csv.reader(fh)
                next(reader)
                for row in reader:
                    k, i, j, v = int(row[0]), int(row[1]), int(row[2]), float(row[3])
                    if j < 0:
                        cs[k, i] = v
                    else:
                        Ps[k, i, j] = v
            bounds = [Parallelotope(c, P) for c, P in zip(cs, Ps)]
        return cls.from_result(result, bounds), result


def feedback(x, entry: PolicyEntry) -> np.ndarray:
    """``u = v - theta G^+ (x - c)``."""
    x = np.asarray(x, dtype=float)
    if x.shape != entry.center.shape:
        raise ValueError(f"state of shape {x.shape} does not match dimension {entry.center.size}")
    return entry.v - entry.theta @ (entry.pinv @ (x - entry.center))


def distance(x, P: Parallelotope) -> float:
    """Scaled distance to a parallelotope; zero exactly on and inside it.

    ``d = nu * max(0, ||P^-1 (x - c)||_inf - 1)`` with
    ``nu = ||x - c||_2 / ||P^-1 (x - c)||_2`` converting normalized units back
    to state units along the query direction.
    """
    delta = np.asarray(x, dtype=float) - P.center
    if not np.any(delta):
        return 0.0
    r = P.inverse @ delta
    s = float(np.abs(r).max())
    if s <= 1.0:
        return 0.0
    nu = float(np.linalg.norm(delta) / np.linalg.norm(r))
    return nu * (s - 1.0)


def knn_candidates(x, library: PolicyLibrary, nn: int = DEFAULT_NN) -> np.ndarray:
    """Indices of the ``nn`` nearest centers.

    Picked greedily: each round takes the lowest index whose distance is
    within ``TIE_ATOL`` of the smallest remaining one. The k-d tree only
    narrows the pool, so the answer equals the same rule run over a linear
    scan.
    """
    if nn < 1:
        raise ValueError("nn must be at least 1")
    x = np.asarray(x, dtype=float)
    N = len(library)
    nn = min(nn, N)
    if nn == N:
        pool = np.arange(N)
    else:
        d, _ = library.tree.query(x, k=nn)
        radius = float(np.atleast_1d(d)[-1])
        pool = np.sort(np.array(library.tree.query_ball_point(x, radius + 2 * TIE_ATOL), dtype=int))
    return tie_ordered(np.linalg.norm(library.centers[pool] - x, axis=1), pool, nn)


def tie_ordered(values, idx, count: int) -> np.ndarray:
    """First ``count`` entries of ``idx`` by value, ties within ``TIE_ATOL`` going to lower indices."""
    values, idx = np.asarray(values, dtype=float), np.asarray(idx)
    left = np.ones(values.size, dtype=bool)
    out = []
    while left.any() and len(out) < count:
        m = values[left].min()
        pick = np.flatnonzero(left & (values <= m + TIE_ATOL))
        pick = pick[np.argmin(idx[pick])]
        out.append(idx[pick])
        left[pick] = False
    return np.array(out, dtype=int)


def _argmin_low(values, idx) -> int:
    return int(tie_ordered(values, idx, 1)[0])


def choose_policy(
    x, state: ControllerState, library: PolicyLibrary, nn: int = DEFAULT_NN
) -> tuple[np.ndarray, int]:
    """Pick the tube step for state ``x``, apply its feedback and update ``state``.

    The successor ``k + 1`` of the last step wins whenever ``x`` lies in its
    parallelotope. Otherwise, among the ``nn`` nearest steps, those containing
    ``x`` are ranked by center distance, and if none contains it the smallest
    parallelotope distance wins. Ties go to the lower index.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (library.dim,):
        raise ValueError(f"state of shape {x.shape} does not match dimension {library.dim}")
    N = len(library)
    nxt = None if state.k is None else state.k + 1
    if nxt is not None and nxt < N and distance(x, library.entries[nxt].bound) == 0.0:
        kappa = nxt
    else:
        cand = knn_candidates(x, library, nn)
        d = np.array([distance(x, library.entries[j].bound) for j in cand])
        inside = cand[d == 0.0]
        if inside.size:
            kappa = _argmin_low(np.linalg.norm(library.centers[inside] - x, axis=1), inside)
        else:
            kappa = _argmin_low(d, cand)
    state.k = kappa
    return feedback(x, library.entries[kappa]), kappa


def in_tube_step(x, library: PolicyLibrary, k: int, exact: bool = True) -> bool:
    """Membership of ``x`` in step ``k``: exact zonotope LP or the parallelotope bound."""
    e = library.entries[k]
    return contains_point(e.zonotope, x) if exact else distance(x, e.bound) == 0.0
