"""conelab: the sup-metric cone over a curve complex, hyperbolic structures
on the once-punctured torus, and desk-scale experiments comparing the two."""

from .curvesys import (
    MappingClass,
    Slope,
    SurfaceKind,
    apply_mapping_class,
    enumerate_slopes,
    intersection_number,
    mapping_class_ball,
    slope_canonicalize,
)
from .conemodel import (
    ConeComplexSpec,
    ConePoint,
    PathWitness,
    apex_route_bound,
    chain_enumerate,
    orthant_distance,
    path_distance,
    quotient_distance,
    quotient_ray_distance_s11,
)
from .hypgeom import (
    FNPoint,
    MetricBracket,
    TraceCoord,
    dehn_twist,
    h2_distance,
    length_of_slope,
    length_spectra_distance,
    minsky_teich_estimate,
    thurston_asym,
    trace_of_slope,
    transform_trace,
    zero_twist_point,
)
from .modelmap import (
    EPSILON0,
    ModelPoint,
    bers_project,
    epsilon0,
    moduli_ls_distance,
    psi,
    psi_fn,
    systole_search,
)
from .lab import (
    DivergenceConfig,
    SweepConfig,
    divergence_sequence,
    sweep_almost_isometry,
    sweep_teich_comparison,
)

__all__ = [name for name in dir() if not name.startswith("_")]
