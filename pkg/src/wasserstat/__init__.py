"""Statistical inference for transport distances on finite spaces.

Exact transportation solves, simulation of the limiting laws of empirical
transport distances under null and alternative, closed forms on weighted
trees and the real line, bootstrap schemes, two-sample tests, and
confidence intervals.
"""

from .errors import DataMismatchError, InputError, SolverError
from .ground import (
    CostMatrix,
    Counts,
    GroundSpace,
    Measure,
    build_cost,
    build_grid,
    normalize,
    sample_dirichlet,
)
from .inference import (
    ConfidenceInterval,
    ConvergenceRow,
    TestReport,
    ci_two_sample_alt,
    convergence_study,
    ks_distance,
    permutation_test,
    pooled_measure,
    test_two_sample_null,
)
from .limits import (
    GaussianSpec,
    LimitDraws,
    ScalingRate,
    alt_limit_value,
    limit_sample,
    max_dual_alt,
    max_dual_null,
    max_dual_null_direct,
    multinomial_covariance,
    sample_multinomial_gaussian,
    scaling,
)
from .resampling import (
    BootstrapDraws,
    default_subsample_size,
    derivative_bootstrap,
    derivative_map,
    mofn_bootstrap,
    naive_bootstrap,
    two_sample_rate,
)
from .transport import (
    TransportSolution,
    directional_derivative,
    duality_gap,
    solve_ot,
    transport_value,
    wasserstein,
)
from .trees import (
    Tree,
    TreeOperators,
    apply_D,
    apply_S,
    line_limit_sample,
    tree_cost,
    tree_distance,
    tree_limit_sample,
)

__version__ = "0.1.0"

__all__ = [
    "BootstrapDraws",
    "ConfidenceInterval",
    "ConvergenceRow",
    "CostMatrix",
    "Counts",
    "DataMismatchError",
    "GaussianSpec",
    "GroundSpace",
    "InputError",
    "LimitDraws",
    "Measure",
    "ScalingRate",
    "SolverError",
    "TestReport",
    "TransportSolution",
    "Tree",
    "TreeOperators",
    "alt_limit_value",
    "apply_D",
    "apply_S",
    "build_cost",
    "build_grid",
    "ci_two_sample_alt",
    "convergence_study",
    "default_subsample_size",
    "derivative_bootstrap",
    "derivative_map",
    "directional_derivative",
    "duality_gap",
    "ks_distance",
    "limit_sample",
    "line_limit_sample",
    "max_dual_alt",
    "max_dual_null",
    "max_dual_null_direct",
    "mofn_bootstrap",
    "multinomial_covariance",
    "naive_bootstrap",
    "normalize",
    "permutation_test",
    "pooled_measure",
    "sample_dirichlet",
    "sample_multinomial_gaussian",
    "scaling",
    "solve_ot",
    "test_two_sample_null",
    "transport_value",
    "tree_cost",
    "tree_distance",
    "tree_limit_sample",
    "two_sample_rate",
    "wasserstein",
]
