import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import brute_force_choice
from zonompc.policy import (
    ControllerState,
    PolicyLibrary,
    choose_policy,
    distance,
    feedback,
    in_tube_step,
    knn_candidates,
)
from zonompc.program import OPTIMAL
from zonompc.synth import SynthesisResult
from zonompc.zonoset import Parallelotope, Zonotope


def make_library(centers, gens, thetas=None, vs=None):
    N = len(centers)
    X = [Zonotope(c, G) for c, G in zip(centers, gens)]
    X.append(X[-1])
    m = 1
    thetas = thetas if thetas is not None else [np.zeros((m, np.shape(G)[1])) for G in gens]
    vs = vs if vs is not None else [np.zeros(m) for _ in range(N)]
    U = [Zonotope(v, th) for v, th in zip(vs, thetas)]
    res = SynthesisResult(OPTIMAL, 0.0, X=X, U=U, theta=list(thetas), slacks=[np.zeros(0)] * N, modes=[0] * N)
    return PolicyLibrary.from_result(res), res


def test_feedback_at_center_and_without_gain():
    lib, _ = make_library([[1.0, 2.0]], [np.eye(2)], thetas=[np.array([[3.0, -1.0]])], vs=[np.array([0.5])])
    e = lib.entries[0]
    np.testing.assert_allclose(feedback([1.0, 2.0], e), [0.5])
    lib0, _ = make_library([[1.0, 2.0]], [np.eye(2)], vs=[np.array([0.5])])
    np.testing.assert_allclose(feedback([7.0, -3.0], lib0.entries[0]), [0.5])


def test_feedback_realizes_set_map(rng):
    G = np.array([[1.0, 0.3], [0.2, 0.8]])
    theta = np.array([[2.0, -0.5]])
    lib, _ = make_library([[0.5, -0.5]], [G], thetas=[theta], vs=[np.array([1.0])])
    for _ in range(20):
        beta = rng.uniform(-1, 1, 2)
        x = np.array([0.5, -0.5]) + G @ beta
        np.testing.assert_allclose(feedback(x, lib.entries[0]), 1.0 - theta @ beta, atol=1e-12)


def test_feedback_dimension_check():
    lib, _ = make_library([[0.0, 0.0]], [np.eye(2)])
    with pytest.raises(ValueError):
        feedback([1.0], lib.entries[0])


def test_distance_examples():
    P = Parallelotope([0.0, 0.0], np.eye(2))
    assert distance([0.0, 0.0], P) == 0.0
    assert distance([3.0, 0.0], P) == pytest.approx(2.0)
    assert distance([1.0, -0.3], P) == 0.0
    assert distance([1.0 + 1e-9, 0.0], P) > 0.0
    # with P = I the scale factor is one, so d is the inf-norm excess
    assert distance([2.0, 2.0], P) == pytest.approx(1.0)
    Q = Parallelotope([1.0, 0.0], np.diag([2.0, 1.0]))
    # delta = (4, 0): P^-1 delta = (2, 0), nu = 4 / 2
    assert distance([5.0, 0.0], Q) == pytest.approx(2.0)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(-5, 5), min_size=2, max_size=2),
    st.floats(0.1, 10.0),
    st.floats(0.1, 3.0),
)
def test_distance_scales_with_the_set(x, scale, w):
    x = np.array(x)
    P = Parallelotope([0.0, 0.0], np.array([[w, 0.3], [0.0, 1.0]]))
    Ps = Parallelotope([0.0, 0.0], scale * P.generator)
    d, ds = distance(x, P), distance(scale * x, Ps)
    assert ds == pytest.approx(scale * d, rel=1e-9, abs=1e-12)
    assert (d == 0.0) == bool(np.abs(P.inverse @ x).max() <= 1.0)


def _linear_scan_knn(x, library, nn):
    order = sorted(range(len(library)), key=lambda j: np.linalg.norm(library.centers[j] - x))
    return set(order[:nn])


def test_knn_matches_linear_scan(rng):
    centers = rng.normal(size=(30, 2))
    lib, _ = make_library(centers, [np.eye(2) * 0.1] * 30)
    for _ in range(200):
        x = rng.normal(size=2) * 1.5
        for nn in (1, 5, 8):
            assert set(knn_candidates(x, lib, nn).tolist()) == _linear_scan_knn(x, lib, nn)
    assert sorted(knn_candidates(rng.normal(size=2), lib, 30)) == list(range(30))
    assert knn_candidates(centers[7], lib, 1).tolist() == [7]


def test_knn_ties_go_to_lower_index():
    # identical centers up to solver-level noise
    centers = [[0.0, 0.0], [1e-10, 0.0], [0.0, -1e-10], [5.0, 5.0]]
    lib, _ = make_library(centers, [np.eye(2)] * 4)
    assert knn_candidates([0.0, 0.0], lib, 1).tolist() == [0]
    assert knn_candidates([0.3, 0.0], lib, 3).tolist() == [0, 1, 2]


def _line_library(N=10):
    # boxes along the q axis, overlapping neighbours
    centers = [[0.5 * k, 0.0] for k in range(N)]
    return make_library(centers, [np.diag([0.4, 1.0])] * N)


def test_successor_has_priority():
    lib, _ = _line_library()
    # x = 1.2 lies in steps 2 (center 1.0) and 3 (center 1.5); the centre of 2 is closer
    x = np.array([1.2, 0.0])
    assert choose_policy(x, ControllerState(), lib)[1] == 2
    assert choose_policy(x, ControllerState(2), lib)[1] == 3
    assert choose_policy(x, ControllerState(9), lib)[1] == 2


def test_overlapping_sets_pick_closest_center():
    centers = [[10.0 * (k + 1), 0.0] for k in range(10)]
    centers[3] = [0.0, 0.1]
    centers[7] = [0.0, -0.6]
    lib, _ = make_library(centers, [np.eye(2)] * 10)
    state = ControllerState(9)
    _, kappa = choose_policy(np.array([0.0, 0.0]), state, lib)
    assert kappa == 3 and state.k == 3


def test_far_state_picks_nearest_parallelotope():
    lib, _ = _line_library()
    x = np.array([10.0, 3.0])
    kappa = choose_policy(x, ControllerState(), lib)[1]
    assert kappa == brute_force_choice(x, None, lib) == 9


def test_choose_policy_equals_brute_force(rng):
    lib, _ = _line_library(12)
    for _ in range(500):
        x = rng.uniform([-1.0, -2.0], [7.0, 2.0])
        last = None if rng.random() < 0.3 else int(rng.integers(0, 12))
        assert choose_policy(x, ControllerState(last), lib, nn=12)[1] == brute_force_choice(x, last, lib)


def test_choose_policy_on_pendulum_tube(pendulum_tube, rng):
    res, lib = pendulum_tube
    N = len(lib)
    for _ in range(300):
        k = int(rng.integers(0, N))
        x = res.X[k].center + res.X[k].generator @ rng.uniform(-1.3, 1.3, res.X[k].n_generators)
        last = None if rng.random() < 0.3 else int(rng.integers(0, N))
        assert choose_policy(x, ControllerState(last), lib, nn=N)[1] == brute_force_choice(x, last, lib)


def test_library_invariants(pendulum_tube):
    res, lib = pendulum_tube
    for k, e in enumerate(lib.entries):
        G = e.generator
        assert np.abs(G @ e.pinv @ G - G).max() <= 1e-8
        assert e.certificate is not None and e.certificate.verify(res.X[k], e.bound.as_zonotope(), tol=1e-6)


def test_library_round_trip(tmp_path, pendulum_tube):
    res, lib = pendulum_tube
    lib.save(tmp_path, res)
    back, res2 = PolicyLibrary.load(tmp_path)
    assert len(back) == len(lib)
    for a, b in zip(lib.entries, back.entries):
        np.testing.assert_array_equal(a.bound.generator, b.bound.generator)
        np.testing.assert_array_equal(a.center, b.center)
        np.testing.assert_array_equal(a.theta, b.theta)


def test_in_tube_step_exact_vs_bound():
    lib, res = make_library([[0.0, 0.0]], [np.array([[1.0, 1.0], [0.0, 1.0]])])
    assert in_tube_step([1.9, 0.9], lib, 0, exact=True)
    P = lib.entries[0].bound
    corners = [P.center + P.generator @ np.array(s) * (1 - 1e-9) for s in ((1, 1), (1, -1), (-1, 1), (-1, -1))]
    # the bound holds every corner, the parallelogram misses some
    assert all(in_tube_step(c, lib, 0, exact=False) for c in corners)
    assert not all(in_tube_step(c, lib, 0, exact=True) for c in corners)
