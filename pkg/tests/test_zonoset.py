import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_zonotope, zonotopes
from zonompc.zonoset import (
    MatrixZonotope,
    Parallelotope,
    Zonotope,
    ZonotopeError,
    add,
    contains,
    contains_point,
    convex_hull_many,
    convex_hull_pair,
    linear_map,
    minkowski,
    minkowski_diag,
    mz_multiply,
    support,
    translate,
    vertices_2d,
    volume,
)


def test_zonotope_shapes():
    Z = Zonotope([1.0, 2.0], [[1.0, 0.0, 2.0], [0.0, 1.0, 1.0]])
    assert Z.dim == 2 and Z.n_generators == 3
    assert Z.order == 1.5
    assert Zonotope([0.0, 0.0]).n_generators == 0
    with pytest.raises(ZonotopeError):
        Zonotope([0.0, 0.0], np.ones((3, 2)))


def test_zonotope_is_immutable():
    Z = Zonotope([0.0], [[1.0]])
    with pytest.raises(ValueError):
        Z.generator[0, 0] = 5.0


def test_add_requires_equal_width():
    a = Zonotope([0.0, 0.0], np.eye(2))
    b = Zonotope([1.0, 1.0], np.ones((2, 3)))
    with pytest.raises(ZonotopeError, match="pad"):
        add(a, b)
    s = add(a.padded(3), b)
    np.testing.assert_array_equal(s.center, [1.0, 1.0])


def test_linear_map_and_translate():
    Z = Zonotope([1.0, 0.0], np.eye(2))
    A = np.array([[0.0, 1.0], [2.0, 0.0]])
    M = linear_map(A, Z)
    np.testing.assert_array_equal(M.generator, A)
    np.testing.assert_array_equal(translate(Z, [1, 1]).center, [2.0, 1.0])
    with pytest.raises(ZonotopeError):
        linear_map(np.eye(3), Z)


def test_minkowski_support_additivity(rng):
    for _ in range(50):
        n = int(rng.integers(1, 5))
        a, b = random_zonotope(rng, n), random_zonotope(rng, n)
        d = rng.normal(size=n)
        assert math.isclose(support(minkowski(a, b), d), support(a, d) + support(b, d), abs_tol=1e-9)


def test_minkowski_diag_matches_plain_sum(rng):
    a = Zonotope([1.0, 2.0], np.hstack([np.diag([1.0, 2.0]), rng.normal(size=(2, 2))]))
    b = Zonotope([0.0, 0.0], np.diag([0.5, 0.1]))
    s = minkowski_diag(a, b)
    assert s.n_generators == a.n_generators
    for d in rng.normal(size=(20, 2)):
        assert math.isclose(support(s, d), support(minkowski(a, b), d), abs_tol=1e-9)


def test_minkowski_diag_rejects_non_diagonal():
    a = Zonotope([0.0, 0.0], [[1.0, 1.0], [0.0, 1.0]])
    with pytest.raises(ZonotopeError, match="diagonal"):
        minkowski_diag(a, Zonotope([0.0, 0.0], np.eye(2)))


def test_contains_certificate_verifies():
    inner = Zonotope([0.1, 0.0], 0.5 * np.eye(2))
    outer = Zonotope([0.0, 0.0], np.eye(2))
    ok, cert = contains(inner, outer)
    assert ok and cert.verify(inner, outer)
    ok, cert = contains(outer, inner)
    assert not ok and cert is None


def test_contains_point_box():
    Z = Zonotope.from_box([0.0, 0.0], [1.0, 2.0])
    assert contains_point(Z, [1.0, -2.0])
    assert not contains_point(Z, [1.01, 0.0])
    # more generators than dimensions goes through the LP
    H = Zonotope([0.0, 0.0], [[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
    assert contains_point(H, [2.0, 2.0])
    assert not contains_point(H, [2.0, -2.0])


def test_convex_hull_pair_contains_both(rng):
    for _ in range(20):
        n = int(rng.integers(1, 4))
        a, b = random_zonotope(rng, n, 2), random_zonotope(rng, n, 3)
        H = convex_hull_pair(a, b)
        assert contains(a, H)[0] and contains(b, H)[0]


def test_convex_hull_many_pads_to_power_of_two(rng):
    zs = [random_zonotope(rng, 2, 2) for _ in range(3)]
    H = convex_hull_many(zs)
    # three inputs are padded to four, two levels of pairwise hulls
    assert H.n_generators == 2 * (2 * 2 + 1) + 1
    assert all(contains(Z, H)[0] for Z in zs)


def test_mz_multiply_sampled_membership(rng):
    MZ = MatrixZonotope(np.eye(2), (0.1 * np.ones((2, 2)), np.array([[0.0, 0.2], [0.0, 0.0]])))
    Z = Zonotope([1.0, -1.0], np.diag([0.5, 0.3]))
    out = mz_multiply(MZ, Z)
    for _ in range(200):
        A = MZ.sample(rng)
        x = Z.center + Z.generator @ rng.uniform(-1, 1, 2)
        assert contains_point(out, A @ x)


def test_volume_known_values():
    assert volume(Zonotope([0.0, 0.0], np.eye(2))) == 4.0
    # parallelogram spanned by (1,0) and (1,1) scaled to edges of length 2
    assert volume(Zonotope([0.0, 0.0], [[1.0, 1.0], [0.0, 1.0]])) == 4.0
    assert volume(Zonotope([0.0, 0.0, 0.0], np.diag([1.0, 2.0, 3.0]))) == pytest.approx(48.0)
    assert volume(Zonotope([0.0, 0.0], [[1.0], [1.0]])) == 0.0


def test_volume_cap():
    with pytest.raises(ZonotopeError, match="capped"):
        volume(Zonotope(np.zeros(5), np.eye(5)))


def test_volume_against_shoelace(rng):
    for _ in range(10):
        Z = random_zonotope(rng, 2, int(rng.integers(2, 7)))
        V = vertices_2d(Z)
        x, y = V[:, 0], V[:, 1]
        shoelace = 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
        assert volume(Z) == pytest.approx(shoelace, rel=1e-9)


def test_parallelotope_singular():
    with pytest.raises(ZonotopeError, match="singular"):
        Parallelotope([0.0, 0.0], [[1.0, 1.0], [1.0, 1.0]])


@settings(max_examples=40, deadline=None)
@given(zonotopes(), st.data())
def test_hull_contains_inputs_property(a, data):
    b = data.draw(zonotopes(n=a.dim))
    H = convex_hull_pair(a, b)
    for Z in (a, b):
        assert contains(Z, H, tol=1e-6)[0]


@settings(max_examples=60, deadline=None)
@given(zonotopes(), st.data())
def test_support_bounds_members(Z, data):
    d = np.array(data.draw(st.lists(st.floats(-1, 1), min_size=Z.dim, max_size=Z.dim)))
    b = np.array(data.draw(st.lists(st.floats(-1, 1), min_size=Z.n_generators, max_size=Z.n_generators)))
    x = Z.center + Z.generator @ b
    h = support(Z, d)
    assert d @ x <= h + 1e-9 * (1 + abs(h))
