"""Entire translating solitons of mean curvature flow in Minkowski space."""

from ._core import (
    AsymptoticFit,
    ConeSamples,
    ExhaustionResult,
    Field,
    FlowRun,
    Params,
    RadialProfile,
    SolveReport,
    SphereFunction,
    asymptotic_fit,
    blowdown,
    cli,
    eikonal_check,
    exhaustion_construct,
    flow,
    hessian_identity_check,
    sample_disk,
    sample_square,
    smooth_min,
    solve_dirichlet_disk,
    solve_dirichlet_polygon,
    solve_radial,
    split_lift,
)
from ._core import (
    ArgumentError,
    BadCurvatureBound,
    ConstructionFailure,
    DimensionError,
    Error,
    FlowBlowup,
    IntegrationFailure,
    NotConvex,
    NotSpacelike,
    RangeError,
    RefinementError,
)

__all__ = [name for name in dir() if not name.startswith("_")]
