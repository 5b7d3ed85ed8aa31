"""Bayesian system identification with correlated model-prediction error.

Thin Python layer over the C++ core: kernels and structured Gaussian
log-likelihoods, the twin-girder beam model, and nested-sampling evidence
estimation. See the project README for the CLI and file formats.
"""

from ._bsi import (  # noqa: F401
    BeamGeometry,
    ErrorStructure,
    KernelKind,
    Lane,
    NestedConfig,
    NestedRun,
    NestedSample,
    PriorBox,
    ProbModelSpec,
    SectionZone,
    SpaceTimeGrid,
    SymTridiagonal,
    ThetaS,
    TruckLoad,
    TwinGirderModel,
    bayes_factor,
    build_covariance_dense,
    correlation_matrix,
    eval_kernel,
    exp_kernel_cov_logdet,
    exp_kernel_precision,
    hd_interval,
    kron_logdet,
    kron_matvec,
    lateral_load_function,
    loglik,
    loglik_additive_fast,
    loglik_dense,
    loglik_multiplicative_fast,
    make_sensor_grid,
    map_estimate,
    model_posteriors,
    nested_sample,
    posterior_mean,
    sample_synthetic,
    separable_correlation,
    thomas_solve,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
