import numpy as np
import pytest

from zonompc.policy import PolicyLibrary
from zonompc.synth import SynthesisConfig, synthesize
from zonompc.sysmodel import PendulumConfig, build_pendulum_wall


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def pendulum():
    """Pendulum-with-wall system, scenario and config at the default settings."""
    cfg = PendulumConfig()
    system, scenario = build_pendulum_wall(cfg)
    return cfg, system, scenario


@pytest.fixture(scope="session")
def pendulum_tube(pendulum):
    """Tube over the free-mode schedule; the fast convex route to the same optimum."""
    cfg, system, scenario = pendulum
    res = synthesize(system, scenario, SynthesisConfig(mode_schedule=[0] * (cfg.horizon - 1)))
    assert res.ok, res.status
    return res, PolicyLibrary.from_result(res)
