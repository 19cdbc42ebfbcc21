"""Impulse response identification with signal matrix models and optimal input design."""
from .design import (
    DesignProblem,
    DesignResult,
    EnergyConstraint,
    MagnitudeConstraint,
    SolverOptions,
    design_gradient,
    design_objective,
    optimize_input,
)
from .estimator import (
    SmmEstimate,
    dd_simulate,
    estimate_fir,
    impulse_target,
    ls_fir,
    mle_objective,
    smm_closed_form,
    smm_kkt_solve,
)
from .exceptions import (
    DegenerateCombiner,
    DegenerateReference,
    DesignFailed,
    DimensionError,
    InfeasiblePoint,
    SingularDesign,
    SingularRegressor,
)
from .harness import McConfig, McSummary, baseline_robustness, compare, run_mc, snr_sweep
from .metrics import CriteriaReport, fit_w, optimality_criteria
from .signal_matrices import (
    SignalMatrixSet,
    build_signal_matrices,
    hankel,
    is_persistently_exciting,
    toeplitz_baseline,
)
from .systems import (
    LtiSystem,
    NoiseSpec,
    Trajectory,
    add_noise,
    benchmark_system,
    gen_gaussian_input,
    gen_prbs,
    h2_norm_sq,
    impulse_response,
    simulate,
)

__version__ = "0.1.0"
