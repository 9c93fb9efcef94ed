"""Supermartingale optimal transport between atomic marginals on the line."""

from .coupling import (
    Coupling,
    classify_martingale_points,
    couplings_close,
    decreasing_transport,
    increasing_transport,
    validate,
)
from .errors import (
    DecompositionError,
    MassMismatch,
    NegativeMass,
    NotInConvexDecreasingOrder,
    OutOfRange,
    ParseError,
    ShadowInfeasible,
    SmotError,
    SolverError,
)
from .measure import (
    DiscreteMeasure,
    Interval,
    barycenter,
    leq_convex,
    leq_convex_decreasing,
    leq_pcd,
    potential_u,
    put_value,
    quantile,
    wasserstein1,
)
from .shadow import shadow, shadow_dirac
from .structure import decompose, maximal_barrier, sigma_contains

__all__ = [
    "Coupling",
    "DecompositionError",
    "DiscreteMeasure",
    "Interval",
    "MassMismatch",
    "NegativeMass",
    "NotInConvexDecreasingOrder",
    "OutOfRange",
    "ParseError",
    "ShadowInfeasible",
    "SmotError",
    "SolverError",
    "barycenter",
    "classify_martingale_points",
    "couplings_close",
    "decompose",
    "decreasing_transport",
    "increasing_transport",
    "leq_convex",
    "leq_convex_decreasing",
    "leq_pcd",
    "maximal_barrier",
    "potential_u",
    "put_value",
    "quantile",
    "shadow",
    "shadow_dirac",
    "sigma_contains",
    "validate",
    "wasserstein1",
]
