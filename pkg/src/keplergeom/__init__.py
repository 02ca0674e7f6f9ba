"""keplergeom: geometry of bound Kepler orbits.

Conserved quantities, the fall-circle reflection construction of the second
focus, orbit elements, two mutually checking propagation engines, and the
loci of the fixed-energy family of ellipses through a fixed point (focus
circle, bounding ellipse, directrix envelope).
"""

from .errors import (
    CircularOrbitError,
    ConvergenceError,
    DegenerateOrbitError,
    InsufficientCoverageError,
    KeplerGeomError,
    ParabolicEnvelopeError,
    RadialDirectionError,
    RestStateWarning,
    SingularityError,
    UnboundOrbitError,
)
from .geom import (
    ConicKind,
    ConicSpec,
    Line,
    conic_tangency_residual,
    plane_basis,
    point_line_distance,
    reflect_point_in_line,
    sample_conic,
    unit,
    vec3,
)
from .state import (
    ConservedSet,
    OrbitGeometry,
    PhaseState,
    PhysParams,
    conserved_quantities,
    directrix,
    fall_point,
    geometric_second_focus,
    orbit_geometry,
    params_from_masses,
)
from .propagation import (
    AreaSweep,
    DriftDiagnostics,
    Trajectory,
    analytic_trajectory,
    conservation_drift,
    detect_period,
    integrate_numeric,
    propagate_analytic,
    rk4_step,
    solve_kepler,
    swept_area,
)
from .family import (
    EnvelopeReport,
    FamilyMember,
    FamilySpec,
    bounding_envelope,
    directrix_envelope,
    eccentricity_extremes,
    envelope_directrix,
    family_member,
    focus_locus,
    psi_grid,
    reflected_focus_v,
    simultaneous_return_check,
)
from .config import RunConfig
from .verify import CheckResult, VerifyReport, random_bound_state, run_verify

__version__ = "0.1.0"
