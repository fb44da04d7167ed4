import numpy as np
from hypothesis import strategies as st

from zonompc.policy import TIE_ATOL, distance
from zonompc.zonoset import Zonotope


def random_zonotope(rng, n=None, p=None, scale=1.0):
    n = int(rng.integers(1, 5)) if n is None else n
    p = int(rng.integers(1, 11)) if p is None else p
    return Zonotope(rng.normal(size=n) * scale, rng.normal(size=(n, p)) * scale)


finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False, width=64)


@st.composite
def zonotopes(draw, n=None, max_p=6):
    n = draw(st.integers(1, 3)) if n is None else n
    p = draw(st.integers(1, max_p))
    c = draw(st.lists(finite, min_size=n, max_size=n))
    G = draw(st.lists(finite, min_size=n * p, max_size=n * p))
    return Zonotope(c, np.reshape(G, (n, p)))


def toy_hybrid(N=6):
    """Two-mode scalar system that has to cross from region 0 into region 1.

    Mode 0 (x <= 0.5) is a lightly uncertain integrator, mode 1 (x >= 0.5)
    contracts towards 1.5 and has weaker actuation, so different schedules
    give different optima and some are infeasible.
    """
    from zonompc.sysmodel import AffineVertexModel, HybridUncertainSystem, Scenario

    mode0 = [AffineVertexModel([[a]], [[1.0]], [0.0]) for a in (0.98, 1.02)]
    mode1 = [AffineVertexModel([[0.8]], [[b]], [0.3]) for b in (0.5, 0.6)]
    regions = [Zonotope([-1.0], [[1.5]]), Zonotope([1.5], [[1.0]])]
    W = Zonotope([0.0], [[0.01]])
    system = HybridUncertainSystem(regions, [[mode0] * N, [mode1] * N], W)
    x_nom = np.linspace(0.0, 1.5, N + 1).reshape(-1, 1)
    scenario = Scenario(
        x0=Zonotope([0.0], [[0.05]]),
        goal=Zonotope([1.5], [[0.3]]),
        input_bounds=Zonotope([0.0], [[2.0]]),
        x_nominal=x_nom,
        u_nominal=np.zeros((N, 1)),
        Q_c=[[10.0]],
        R_c=[[0.1]],
        Q_g=1.0,
        R_g=0.1,
        reduction_p=2,
        dt=0.1,
    )
    return system, scenario


def brute_force_choice(x, last, library):
    """The selection rule over every entry, written as a plain scan."""
    N = len(library)
    d = [distance(x, e.bound) for e in library.entries]
    if last is not None and last + 1 < N and d[last + 1] == 0.0:
        return last + 1
    inside = [j for j in range(N) if d[j] == 0.0]
    if inside:
        dist = [np.linalg.norm(x - library.entries[j].center) for j in inside]
        best = min(dist)
        return min(j for j, v in zip(inside, dist) if v <= best + TIE_ATOL)
    best = min(d)
    return min(j for j in range(N) if d[j] <= best + TIE_ATOL)
