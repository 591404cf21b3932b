"""Remote-contiguity diagnostics and Monte Carlo regime checks for Erdos-Renyi graphs."""

from .contiguity import (
    ContiguityReport,
    ModelPair,
    RateMarginCurve,
    Trend,
    contiguity_report,
    critical_affinity_approx,
    edge_coefficients,
    hellinger_affinity,
    homogeneous_rate,
    inhomogeneous_rate,
    kl_divergence,
    lindeberg_lhs,
    lindeberg_normalizer,
    rate_margin_curve,
    rate_quantities,
)
from .graph_core import (
    EdgeProbModel,
    GraphSample,
    child_seed,
    components,
    degree_histogram,
    read_edge_list,
    sample,
    write_edge_list,
)
from .inference import (
    clt_check,
    enumerate_exact,
    log_lr,
    lr_test,
    rc_condition_ii_mc,
    weighted_risk_mc,
)
from .regimes import critical_schedule, fragmentation_constant, survival_probability

__version__ = "0.1.0"
