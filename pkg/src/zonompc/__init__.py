"""Robust explicit control of uncertain affine and hybrid systems with zonotopic tubes."""

from .estimator import TubeController
from .policy import ControllerState, PolicyLibrary, choose_policy, distance, feedback, knn_candidates
from .reduction import parallelotope_bound, reazor, reduce_combastel, reduce_girard, reduce_pca, reduce_reazor
from .synth import SynthesisConfig, SynthesisResult, audit, build_hybrid_ocp, build_ocp, synthesize
from .sysmodel import (
    AffineVertexModel,
    HybridUncertainSystem,
    Scenario,
    UncertainAffineSystem,
    build_pendubot,
    build_pendulum_wall,
)
from .zonoset import MatrixZonotope, Parallelotope, Zonotope, contains

__all__ = [
    "AffineVertexModel",
    "ControllerState",
    "HybridUncertainSystem",
    "MatrixZonotope",
    "Parallelotope",
    "PolicyLibrary",
    "Scenario",
    "SynthesisConfig",
    "SynthesisResult",
    "TubeController",
    "UncertainAffineSystem",
    "Zonotope",
    "audit",
    "build_hybrid_ocp",
    "build_ocp",
    "build_pendubot",
    "build_pendulum_wall",
    "choose_policy",
    "contains",
    "distance",
    "feedback",
    "knn_candidates",
    "parallelotope_bound",
    "reazor",
    "reduce_combastel",
    "reduce_girard",
    "reduce_pca",
    "reduce_reazor",
    "synthesize",
]
