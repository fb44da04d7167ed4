import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from zonompc.estimator import TubeController
from zonompc.policy import ControllerState, choose_policy
from zonompc.sysmodel import PendulumConfig, build_pendulum_wall


@pytest.fixture(scope="module")
def fitted():
    system, scenario = build_pendulum_wall(PendulumConfig(horizon=8))
    return TubeController(reduction_p=4, mode_schedule=[0] * 7).fit(system, scenario), scenario


def test_params_round_trip():
    ctrl = TubeController(reduction_p=6, nn=3)
    params = ctrl.get_params()
    assert params["reduction_p"] == 6 and params["nn"] == 3
    twin = clone(ctrl).set_params(nn=5)
    assert twin.nn == 5 and ctrl.nn == 3


def test_fit_does_not_touch_scenario(fitted):
    ctrl, scenario = fitted
    assert scenario.reduction_p == PendulumConfig().reduction_p
    assert all(Z.n_generators == 4 for Z in ctrl.result_.X[1:])
    assert ctrl.audit_["passed"]


def test_predict_matches_policy(fitted, rng):
    ctrl, _ = fitted
    X = rng.uniform([-0.05, -0.5], [0.05, 0.5], size=(25, 2))
    U = ctrl.predict(X)
    assert U.shape == (25, 1)
    for x, u, k in zip(X, U, ctrl.select(X)):
        ref_u, ref_k = choose_policy(x, ControllerState(), ctrl.library_, ctrl.nn)
        np.testing.assert_array_equal(u, ref_u)
        assert k == ref_k


def test_predict_sequence_follows_tube(fitted):
    ctrl, _ = fitted
    centers = np.array([Z.center for Z in ctrl.result_.X[:-1]])
    _, idx = ctrl.predict_sequence(centers)
    assert idx.tolist() == list(range(len(centers)))


def test_input_checks(fitted):
    ctrl, _ = fitted
    with pytest.raises(ValueError, match="features"):
        ctrl.predict([[0.0, 0.0, 0.0]])
    with pytest.raises(NotFittedError):
        TubeController().predict([[0.0, 0.0]])
