"""Simulation and exact-recovery toolkit for the geometric stochastic block model."""

from .experiment import SweepConfig, TrialPoint, TrialResult, run_sweep, run_trial
from .generator import GeometricGraph, ModelParams, sample_gsbm
from .geometry import BlockGrid, build_block_grid, torus_distance
from .metrics import agreement, count_empty_block_segments, neighborhood_mistakes
from .phase1 import Phase1Result, pairwise_classify, propagate, run_phase1
from .phase2 import DegreeProfile, degree_profile, genie_estimate, refine, refine_all, tau
from .theory import (
    DerivedParams,
    InfeasibleParameters,
    Regime,
    ch_divergence_plus,
    ch_divergence_t,
    classify_regime,
    solve_parameters,
    threshold_curve,
)
from .visibility import DisconnectedError, VisibilityGraph, build_visibility_graph

__all__ = [
    "BlockGrid", "DegreeProfile", "DerivedParams", "DisconnectedError", "GeometricGraph",
    "InfeasibleParameters", "ModelParams", "Phase1Result", "Regime", "SweepConfig",
    "TrialPoint", "TrialResult", "VisibilityGraph", "agreement", "build_block_grid",
    "build_visibility_graph", "ch_divergence_plus", "ch_divergence_t", "classify_regime",
    "count_empty_block_segments", "degree_profile", "genie_estimate", "neighborhood_mistakes",
    "pairwise_classify", "propagate", "refine", "refine_all", "run_phase1", "run_sweep",
    "run_trial", "sample_gsbm", "solve_parameters", "tau", "threshold_curve", "torus_distance",
]  # fmt: skip
