"""Analysis of Hopf-like boundary equilibrium bifurcations in planar piecewise-linear Filippov systems."""
from .classify import (
    EquilibriumInfo,
    SlidingRegionInfo,
    TheoremVerdict,
    classification_report,
    continuity_check,
    equilibria,
    sliding_region,
    theorem_verdict,
)
from .halfmaps import (
    composed_map,
    flow,
    half_map_left,
    half_map_right,
    return_time_left,
    return_time_right,
    rho,
)
from .limit_cycles import (
    CycleViaSlidingError,
    FixedPoint,
    LimitCycleCertificate,
    beb_summary,
    certify_cycle,
    find_fixed_points,
)
from .model import (
    AnalysisError,
    EigenStructure,
    HalfSystemCoefficients,
    ModelError,
    PWLFilippovSystem,
    builtin,
    eigen_structure,
    load_model,
    parse_model,
    scale_state,
    serialize_model,
)
from .sim import SimControls, Trajectory, integrate, numeric_poincare
from .sliding import PseudoEquilibriumReport, pseudo_equilibria, sliding_field_eval, tilde_h

__all__ = [name for name in dir() if not name.startswith("_")]
