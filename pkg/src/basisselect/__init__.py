"""Bayesian adaptive selection of basis functions for noisy functional data.

Fits several noisy observations of an underlying curve with a basis
expansion whose terms are switched on and off by spike-and-slab indicators,
sampled by a Gibbs sweep. Includes B-spline and Fourier bases, fit metrics,
Gelman-Rubin convergence checks, generalized cross-validation for choosing
the basis size, synthetic-data generators and a replication harness.
"""

from .bases import (
    BasisMatrix,
    BasisSystem,
    evaluate_basis,
    make_bspline_basis,
    make_fourier_basis,
)
from .diagnostics import ConvergenceReport, convergence_report, gelman_rubin
from .errors import (
    BasisSelectError,
    DegenerateChainError,
    DegenerateCurveError,
    DomainError,
    ImproperConditionalError,
    InvalidConfigurationError,
    LinearAlgebraError,
    OutOfDomainError,
    ParseError,
    UndefinedGCVError,
    UndefinedMetricError,
)
from .model import (
    ChainState,
    Curve,
    Dataset,
    Hyperparameters,
    design_matrices,
    log_joint_posterior,
    predict_curve,
    standardize_curves,
)
from .sampler import (
    GibbsConfig,
    PosteriorSample,
    inclusion_probability,
    init_chain,
    run_gibbs,
    sample_beta_block,
    sample_mu,
    sample_sigma2,
    sample_tau2,
    sample_theta,
    sample_z,
)
from .summary import (
    FitSummary,
    gcv,
    gcv_mean,
    map_estimates,
    metric_global,
    metric_per_curve,
    mse_vs_truth,
    summarize,
)
from .synth import (
    STUDY1_COEFFS,
    ReplicationReport,
    ScenarioSpec,
    SyntheticData,
    generate_study1,
    generate_study2,
    run_replications,
)

__version__ = "0.1.0"
