"""Fredholm analysis of layer potential operators on domains with corners
and cracks: geometry, limit symbols, weight windows, and a Nystrom harness."""

__version__ = "0.1.0"

from .geometry import (
    ConicalDomain,
    DesingularizedBoundary,
    DomainError,
    UnfoldedDomain,
    desingularize_boundary,
    interior_angles,
    parse_domain,
    smoothed_distance,
    theta0,
    unfold,
)
from .groupoid import (
    GroupoidDescriptor,
    MellinOperator,
    OperatorDescriptor,
    VertexStratum,
    build_groupoid,
    limit_operator,
    orbit_representatives,
)
from .mellin import (
    MellinError,
    MellinSymbol,
    ScanResult,
    WeightLine,
    WindowReport,
    admissible_weight_window,
    invertibility_scan,
    mellin_transform,
    symbol_on_line,
    wedge_np_kernel,
)
from .layerpot import (
    BoundaryMesh,
    FredholmVerdict,
    StudyResult,
    WeightedNormSpec,
    assemble_np,
    calibrate_weight_line,
    domain_windows,
    double_layer_potential,
    fredholm_verdict,
    graded_mesh,
    min_singular_value_study,
    np_kernel,
    solve_dirichlet,
    weighted_norm,
)
