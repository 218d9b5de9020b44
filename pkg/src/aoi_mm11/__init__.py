"""Age-of-information analysis for a K-source preemptive M/M/1/1 queue.

K independent Poisson sources feed status updates through a single
exponential server with no buffer; every new arrival preempts whatever is
in service.  The package provides exact closed forms for each source's
stationary age (transform, density, moments) and for the correlation
between two sources' ages, a seeded event simulator producing exact
piecewise-linear age sample paths, estimators that integrate those paths
without discretization error, and a command-line front end
(`aoi-mm11 analytic|simulate|validate|sweep`).
"""

__version__ = "0.1.0"

from .errors import (
    EmptySourceList,
    EmptyWindow,
    HorizonTooSmall,
    IndexOutOfRange,
    InsufficientReplications,
    InsufficientSamples,
    NegativeTime,
    NegativeTransformArgument,
    NonPositiveRate,
    RequiresTwoSources,
)
from .model import (
    ModelParams,
    effective_update_rate,
    valid_packet_probability,
    validate,
)
from .analytics import (
    AoiDistribution,
    CorrelationReport,
    RhoPropertyReport,
    aoi_cdf,
    aoi_distribution,
    aoi_lst,
    aoi_lst_post,
    aoi_lst_pre,
    aoi_pdf,
    correlation_coefficient,
    global_interval_moments,
    mean_aoi,
    mean_interval_cross_area,
    post_update_age_mean,
    post_update_cross_moment,
    rho_properties_check,
    source_interval_mean,
    stationary_cross_moment,
    update_interval_lst_global,
    update_interval_lst_per_source,
    var_aoi,
)
from .simulator import (
    SamplePath,
    SimConfig,
    run,
    run_replications,
    validate_interval_law,
)
from .estimators import (
    SimEstimates,
    ValidationTable,
    aggregate_replications,
    build_validation_table,
    correlation_estimate,
    cross_moment,
    cross_moment_direct,
    default_s_grid,
    empirical_lst,
    time_average_moments,
    update_epoch_moments,
)

__all__ = [
    "__version__",
    "ModelParams",
    "validate",
    "valid_packet_probability",
    "effective_update_rate",
    "AoiDistribution",
    "CorrelationReport",
    "RhoPropertyReport",
    "aoi_lst",
    "aoi_lst_post",
    "aoi_lst_pre",
    "mean_aoi",
    "var_aoi",
    "aoi_distribution",
    "aoi_pdf",
    "aoi_cdf",
    "update_interval_lst_per_source",
    "update_interval_lst_global",
    "global_interval_moments",
    "source_interval_mean",
    "post_update_age_mean",
    "post_update_cross_moment",
    "stationary_cross_moment",
    "mean_interval_cross_area",
    "correlation_coefficient",
    "rho_properties_check",
    "SimConfig",
    "SamplePath",
    "run",
    "run_replications",
    "validate_interval_law",
    "SimEstimates",
    "ValidationTable",
    "time_average_moments",
    "cross_moment",
    "cross_moment_direct",
    "empirical_lst",
    "default_s_grid",
    "update_epoch_moments",
    "correlation_estimate",
    "aggregate_replications",
    "build_validation_table",
    "NonPositiveRate",
    "EmptySourceList",
    "IndexOutOfRange",
    "NegativeTransformArgument",
    "NegativeTime",
    "RequiresTwoSources",
    "HorizonTooSmall",
    "EmptyWindow",
    "InsufficientSamples",
    "InsufficientReplications",
]
