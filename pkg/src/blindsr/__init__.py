"""Blind super-resolution of point sources via projected gradient descent
on a vectorized Hankel lift."""

from .signal_model import (
    Measurements,
    PointSources,
    ProblemDims,
    Subspace,
    add_noise,
    build_target_matrix,
    incoherence_mu1,
    load_instance,
    measure,
    sample_point_sources,
    sample_subspace,
    save_instance,
    steering_vector,
    wrap_distance,
)
from .hankel_ops import (
    WeightVector,
    fast_g_times_R,
    fast_gh_times_L,
    fast_gstar_lowrank,
    g_adjoint,
    g_apply,
    hankel_adjoint,
    hankel_apply,
    weight_vector,
    weights,
)
from .measurement_ops import SensingOperator
from .pgd_solver import (
    FactorPair,
    ProjectionParams,
    SolverConfig,
    SolverTrace,
    distance,
    gradient,
    objective,
    project,
    recover_X,
    solve,
    spectral_init,
    step,
)
from .postprocess import RecoveryResult, music_locations, solve_weights
from .experiments import (
    CellResult,
    ExperimentSpec,
    convergence_study,
    noise_study,
    phase_transition,
    run_trial,
)

__version__ = "0.1.0"
