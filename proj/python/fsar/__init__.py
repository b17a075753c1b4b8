"""Functional spatial autoregression: simulation, two-stage estimation, and
specification testing for samples of quantile (or other functional) outcomes
linked through a spatial weight matrix."""

from ._fsar import (  # noqa: F401
    BSplineBasis,
    CoefSpec,
    CompletenessReport,
    ConfigError,
    CurveFit,
    DataError,
    DesignSet,
    DimensionError,
    DiscreteFunctionObservations,
    DomainError,
    ErrorSpec,
    FunctionalSample,
    Grid,
    KernelSpec,
    MonteCarloCell,
    MonteCarloReport,
    NeumannResult,
    NumericalError,
    PenaltySpec,
    PointFit,
    RunConfig,
    SimulatedDataset,
    SpatialWeights,
    WaldResult,
    basis_scores,
    build_instruments,
    completeness_check,
    direct_solve_oracle,
    estimate_curve,
    fit_feasible,
    interp_on_grid,
    interpolate,
    interpolate_sample,
    marginal_effect,
    neumann_solve,
    project,
    quadrature,
    run_montecarlo,
    sample_discrete,
    simulate,
    wald_moments,
    wald_statistic,
    wald_test,
    wald_test_general,
    wasserstein2_sq,
)

__version__ = "0.1.0"
