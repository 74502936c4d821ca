"""Stochastic-gradient solvers for linear statistical inverse problems."""

from .grids import (
    DiscreteFn,
    Grid,
    evaluate_interp,
    inner_product,
    l2_norm,
    make_uniform_grid,
    restrict,
)
from .learners import (
    ConstantFit,
    SplineFit,
    SplineSpec,
    TreeFit,
    TreeSpec,
    ZeroFit,
    fit,
    parse_learner,
    predict,
    project_to_grid,
)
from .losses import LossKind, loss_grad2, loss_value
from .operators import (
    Covariate,
    Problem,
    ProblemKind,
    Sample,
    adjoint_kernel,
    deconv_problem,
    empirical_adjoint,
    flr_problem,
    forward,
    stochastic_gradient,
)
from .solvers import (
    FixedInvSqrtN,
    InverseSqrt,
    SolverConfig,
    SolverOutput,
    landweber,
    ml_sgd,
    sgd_sip,
    step_size,
)
from .synthgen import (
    DeconvGenConfig,
    FlrGenConfig,
    TargetKind,
    gen_deconv,
    gen_flr,
    gen_flr_classification,
    make_target,
    simulate_brownian,
)
from .evaluation import (
    BoundInputs,
    CvResult,
    ReplicateStats,
    classification_metrics,
    directional_derivative_check,
    empirical_risk,
    estimate_constants,
    excess_risk,
    gradient_oracle,
    kfold_cv,
    mse_function,
    replicate_stats,
    theorem_bound,
)

__version__ = "0.1.0"
