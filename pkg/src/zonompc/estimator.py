"""scikit-learn style front end: ``fit`` synthesizes a tube, ``predict`` evaluates the policy."""

from __future__ import annotations

import dataclasses

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .policy import DEFAULT_NN, ControllerState, PolicyLibrary, choose_policy
from .program import BnBConfig
from .synth import SynthesisConfig, synthesize


class TubeController(BaseEstimator):
    """Explicit robust controller over zonotopic tubes.

    Parameters
    ----------
    reduction_p : int, optional
        Generator columns kept after each reduction; defaults to the scenario's.
    propagation : {"vertex_hull", "matrix_zonotope"}
    mode_schedule : sequence of int, optional
        Fixed mode per step for hybrid systems.
    big_m : float, optional
    max_nodes, time_limit : branch-and-bound budget.
    nn : int
        Candidate count for the nearest-center lookup at run time.

    Attributes
    ----------
    result_ : SynthesisResult
    library_ : PolicyLibrary
    audit_ : dict

    Examples
    --------
    >>> from zonompc.sysmodel import build_pendulum_wall, PendulumConfig
    >>> system, scenario = build_pendulum_wall(PendulumConfig(horizon=5))
    >>> ctrl = TubeController(mode_schedule=[0] * 4).fit(system, scenario)
    >>> ctrl.predict([[0.0, 0.0]]).shape
    (1, 1)
    """

    def __init__(
        self,
        reduction_p=None,
        propagation="vertex_hull",
        mode_schedule=None,
        big_m=None,
        max_nodes=10_000,
        time_limit=600.0,
        nn=DEFAULT_NN,
    ):
        self.reduction_p = reduction_p
        self.propagation = propagation
        self.mode_schedule = mode_schedule
        self.big_m = big_m
        self.max_nodes = max_nodes
        self.time_limit = time_limit
        self.nn = nn

    def fit(self, system, scenario):
        if self.reduction_p is not None:
            scenario = dataclasses.replace(scenario, reduction_p=int(self.reduction_p))
        cfg = SynthesisConfig(
            propagation=self.propagation,
            big_m=self.big_m,
            mode_schedule=self.mode_schedule,
            bnb=BnBConfig(max_nodes=self.max_nodes, time_limit=self.time_limit),
        )
        result = synthesize(system, scenario, cfg)
        if not result.ok:
            raise RuntimeError(f"synthesis failed with status {result.status}")
        self.result_ = result
        self.library_ = PolicyLibrary.from_result(result)
        self.audit_ = result.info.get("audit", {})
        self.n_features_in_ = result.X[0].dim
        return self

    def _check(self, X):
        check_is_fitted(self, "library_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X

    def select(self, X) -> np.ndarray:
        """Tube step chosen for each row, each treated as a first call."""
        X = self._check(X)
        return np.array([choose_policy(x, ControllerState(), self.library_, self.nn)[1] for x in X])

    def predict(self, X) -> np.ndarray:
        """Control input for each row (first-call selection, then linear feedback)."""
        X = self._check(X)
        return np.array([choose_policy(x, ControllerState(), self.library_, self.nn)[0] for x in X])

    def predict_sequence(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Controls and indices for consecutive states of one trajectory, carrying the controller state."""
        X = self._check(X)
        state = ControllerState()
        out = [choose_policy(x, state, self.library_, self.nn) for x in X]
        return np.array([u for u, _ in out]), np.array([k for _, k in out])
