"""The one-parameter family of fixed-energy Kepler ellipses through a fixed
point, and its three loci.

Fix an energy H < 0 and a point r with 0 < |r| < 2a, where a = -k/(2H).  The
orbits of that energy through r form a one-parameter family, charted here by
the momentum direction angle psi at the fixed point (the momentum magnitude
is forced by the energy).  Their second foci trace a circle of radius 2a - r
about r; the swept region is bounded by the ellipse with foci 0 and r and
major axis 4a - r; and the origin-directrices envelope a conic that is an
ellipse for r < a, a parabola for r = a, and a hyperbola for a < r < 2a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CircularOrbitError, ParabolicEnvelopeError, RadialDirectionError
from .geom import (
    ConicSpec,
    Line,
    as_vec3,
    conic_tangency_residual,
    reflect_point_in_line,
    unit,
)
from .state import (
    LENZ_ZERO_REL,
    ConservedSet,
    OrbitGeometry,
    PhaseState,
    PhysParams,
    conserved_quantities,
    directrix,
    orbit_geometry,
)
from .propagation import propagate_analytic

__all__ = [
    "PARABOLA_FIT_EPS",
    "RADIAL_PSI_TOL",
    "R_EQUALS_A_REL",
    "EnvelopeReport",
    "FamilyMember",
    "FamilySpec",
    "bounding_envelope",
    "directrix_envelope",
    "eccentricity_extremes",
    "envelope_directrix",
    "family_member",
    "focus_locus",
    "psi_grid",
    "reflected_focus_v",
    "simultaneous_return_check",
]

# Momentum angles this close to 0 or pi (mod 2 pi) are rejected as radial.
RADIAL_PSI_TOL = 1e-9

# |r - a| below this multiple of a counts as the parabolic boundary case.
R_EQUALS_A_REL = 1e-9

# Relative offsets of the two auxiliary radii used to fit the parabola.
PARABOLA_FIT_EPS = 1e-6


@dataclass(frozen=True, eq=False)
class FamilySpec:
    """A family of Kepler ellipses: shared energy, fixed point, orbit plane.

    The fixed point must lie strictly inside the fall circle (|r| < 2a) and
    in the plane through the origin with the given unit normal; a point with
    a non-orthogonal normal is rejected rather than silently projected.
    """

    params: PhysParams
    energy: float
    r_fixed: np.ndarray
    plane_normal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "energy", float(self.energy))
        if not (math.isfinite(self.energy) and self.energy < 0.0):
            raise ValueError(f"family energy must be negative, got {self.energy}")
        r_fixed = as_vec3(self.r_fixed)
        normal = as_vec3(self.plane_normal)
        if abs(float(np.linalg.norm(normal)) - 1.0) > 1e-12:
            raise ValueError("plane normal must be a unit vector")
        r = float(np.linalg.norm(r_fixed))
        if r == 0.0:
            raise ValueError("fixed point must not be the origin")
        if not r < 2.0 * self.a:
            raise ValueError(
                f"fixed point radius {r} must be strictly inside the fall circle "
                f"of radius {2.0 * self.a}"
            )
        if abs(float(r_fixed @ normal)) > 1e-12 * r:
            raise ValueError("fixed point must lie in the family plane")
        object.__setattr__(self, "r_fixed", r_fixed)
        object.__setattr__(self, "plane_normal", normal)

    @property
    def a(self) -> float:
        """Shared semi-major axis -k/(2H)."""
        return -self.params.k / (2.0 * self.energy)

    @property
    def r(self) -> float:
        return float(np.linalg.norm(self.r_fixed))

    @property
    def p_mag(self) -> float:
        """Momentum magnitude at the fixed point, forced by the energy."""
        return math.sqrt(2.0 * self.params.mu * (self.energy + self.params.k / self.r))

    @property
    def period(self) -> float:
        """Shared orbital period 2 pi sqrt(mu a^3 / k)."""
        return 2.0 * math.pi * math.sqrt(self.params.mu * self.a**3 / self.params.k)


@dataclass(frozen=True, eq=False)
class FamilyMember:
    """One orbit of the family: the state at the fixed point, its conserved
    set, and its ellipse elements.  ``psi`` is stored reduced to (0, 2 pi)."""

    psi: float
    state: PhaseState
    conserved: ConservedSet
    geometry: OrbitGeometry


@dataclass(frozen=True, eq=False)
class EnvelopeReport:
    """Directrix-envelope conic plus the per-member tangency evidence.

    ``branches`` records which hyperbola branch each directrix touches (the
    closed-form continuation is silent on this, so it is recorded rather than
    asserted) and is None for the other conic kinds.  ``fitted_numerically``
    marks the parabola case, whose directrix comes from a numeric limit
    rather than a closed form.
    """

    envelope: ConicSpec
    u_focus: np.ndarray | None
    per_member_residual: list[tuple[float, float]]
    branches: list[tuple[float, str]] | None = None
    skipped: list[tuple[float, str]] = field(default_factory=list)
    fitted_numerically: bool = False

    def __post_init__(self):
        if any(res < 0.0 for _, res in self.per_member_residual):
            raise ValueError("tangency residuals must be non-negative")

    @property
    def max_residual(self) -> float:
        return max((res for _, res in self.per_member_residual), default=math.nan)


def psi_grid(n: int) -> np.ndarray:
    """``n`` uniform momentum angles in (0, 2 pi) avoiding the radial values.

    The grid is offset by half a step; for odd ``n`` that offset lands on pi,
    so a quarter step is used instead (4j + 1 = 2n has no integer solution).
    """
    if n < 1:
        raise ValueError("need at least one sample angle")
    offset = 0.5 if n % 2 == 0 else 0.25
    return (np.arange(n) + offset) * (2.0 * math.pi / n)


def family_member(spec: FamilySpec, psi: float) -> FamilyMember:
    """The family orbit whose momentum at the fixed point makes angle ``psi``
    with the outward radial direction (in-plane, right-handed about the
    normal).  Radial angles are rejected: their orbits have no angular
    momentum."""
    psi = float(psi) % (2.0 * math.pi)
    if min(psi, abs(psi - math.pi), 2.0 * math.pi - psi) < RADIAL_PSI_TOL:
        raise RadialDirectionError(
            f"psi = {psi} is radial within {RADIAL_PSI_TOL}; no such family member"
        )
    r_hat = unit(spec.r_fixed)
    w_hat = np.cross(spec.plane_normal, r_hat)
    p = spec.p_mag * (math.cos(psi) * r_hat + math.sin(psi) * w_hat)
    state = PhaseState(r=spec.r_fixed, p=p)
    return FamilyMember(
        psi=psi,
        state=state,
        conserved=conserved_quantities(state, spec.params),
        geometry=orbit_geometry(state, spec.params),
    )


def focus_locus(spec: FamilySpec, n_samples: int) -> np.ndarray:
    """Second foci of ``n_samples`` grid members, as an (n, 3) array.

    Every focus lies on the circle of radius 2a - r centered at the fixed
    point: reflection preserves the distance |s - r| = -k/H - r.
    """
    if n_samples < 3:
        raise ValueError("need at least 3 samples")
    return np.array(
        [family_member(spec, psi).geometry.focus_second for psi in psi_grid(n_samples)]
    )


def eccentricity_extremes(spec: FamilySpec) -> tuple[float, float]:
    """(smallest eccentricity, supremum eccentricity) over the family.

    The roundest member has e = |1 + 2Hr/k| = |1 - r/a|; the fixed point sits
    at its perihelion for r < a and at its aphelion for r > a (the formula's
    sign flips, hence the absolute value).  The supremum 1 belongs to the
    radial fall orbit, excluded from the chart, so it is never attained.
    """
    return abs(1.0 - spec.r / spec.a), 1.0


def bounding_envelope(spec: FamilySpec) -> ConicSpec:
    """Ellipse with foci 0 and the fixed point, major axis 4a - r, bounding
    the region swept by the family."""
    return ConicSpec.ellipse(
        np.zeros(3), spec.r_fixed, 4.0 * spec.a - spec.r, spec.plane_normal
    )


def _u_focus(spec: FamilySpec) -> np.ndarray:
    """Second focus u = a r_fixed / (a - r) of the directrix envelope."""
    return (spec.a / (spec.a - spec.r)) * np.asarray(spec.r_fixed)


def reflected_focus_v(spec: FamilySpec, member: FamilyMember) -> np.ndarray:
    """Mirror image v of the envelope focus u in the member's directrix.

    Closed form: v = (a r_fixed - r t)/(a - r) with t the member's second
    focus.  It lies at distance (2a - r) r / |a - r| from the fixed point for
    every member, which is exactly the envelope tangency property.
    """
    a, r = spec.a, spec.r
    if abs(r - a) <= R_EQUALS_A_REL * a:
        raise ParabolicEnvelopeError(
            "fixed point at radius a: the envelope is a parabola and u is at "
            "infinity; use directrix_envelope instead"
        )
    lenz = member.conserved.lenz
    if float(np.linalg.norm(lenz)) < LENZ_ZERO_REL * spec.params.k * spec.params.mu:
        raise CircularOrbitError("circular member has no directrix to reflect in")
    t = member.geometry.focus_second
    return (a * np.asarray(spec.r_fixed) - r * t) / (a - r)


def envelope_directrix(spec: FamilySpec) -> Line:
    """Directrix of the directrix-envelope ellipse with respect to the fixed
    point, -(2a - r) r_hat + r-perp.  Only the ellipse case (r < a) has it."""
    a, r = spec.a, spec.r
    if r >= a:
        raise ValueError(
            f"the envelope directrix in closed form needs r < a, got r = {r}, a = {a}"
        )
    r_hat = unit(spec.r_fixed)
    return Line(base=-(2.0 * a - r) * r_hat, normal=r_hat)


def _hyperbola_directrix_base(focus: np.ndarray, other_focus: np.ndarray,
                              major_axis: float) -> np.ndarray:
    """Directrix base point of a hyperbola, for the given focus."""
    center = 0.5 * (focus + other_focus)
    semi = 0.5 * major_axis
    half_gap = 0.5 * float(np.linalg.norm(other_focus - focus))
    ecc = half_gap / semi
    toward_focus = unit(focus - center)
    return center + (semi / ecc) * toward_focus


def _fit_parabola_directrix(spec: FamilySpec) -> Line:
    """Parabola directrix at the r = a boundary, fitted from the two
    closed-form envelopes at r = a (1 -+ eps); their directrix base points
    straddle the limit symmetrically, so the average cancels the O(eps) term."""
    a = spec.a
    r_hat = unit(spec.r_fixed)
    lo = FamilySpec(
        params=spec.params,
        energy=spec.energy,
        r_fixed=a * (1.0 - PARABOLA_FIT_EPS) * r_hat,
        plane_normal=spec.plane_normal,
    )
    base_lo = envelope_directrix(lo).base
    hi_r = a * (1.0 + PARABOLA_FIT_EPS)
    hi = FamilySpec(
        params=spec.params,
        energy=spec.energy,
        r_fixed=hi_r * r_hat,
        plane_normal=spec.plane_normal,
    )
    base_hi = _hyperbola_directrix_base(
        np.asarray(hi.r_fixed),
        _u_focus(hi),
        abs((2.0 * a - hi_r) * hi_r / (a - hi_r)),
    )
    return Line(base=0.5 * (np.asarray(base_lo) + base_hi), normal=r_hat)


def _branch_of_tangency(line: Line, focus: np.ndarray, other_focus: np.ndarray) -> str:
    """Which hyperbola branch a tangent line touches: the touch point is
    where the line meets the ray from ``focus`` through the mirrored
    ``other_focus``."""
    mirrored = reflect_point_in_line(other_focus, line)
    direction = mirrored - focus
    denom = float(direction @ line.normal)
    if denom == 0.0:
        return "indeterminate"
    s = float((line.base - focus) @ line.normal) / denom
    touch = focus + s * direction
    near = float(np.linalg.norm(touch - focus))
    far = float(np.linalg.norm(touch - other_focus))
    return "near" if near < far else "far"


def directrix_envelope(spec: FamilySpec, n_samples: int) -> EnvelopeReport:
    """Envelope of the members' origin-directrices, with tangency evidence.

    Classification by the fixed-point radius against a:

    * 0 < r < a: ellipse with foci r_fixed and u = a r_fixed/(a - r), major
      axis (2a - r) r/(a - r), eccentricity r/(2a - r);
    * r = a (within 1e-9 relative): parabola with focus r_fixed and a
      numerically fitted directrix;
    * a < r < 2a: hyperbola with the same closed-form foci and |major axis|
      (u now lies on the far side of the origin).

    Each grid member's directrix is checked with the focal tangency residual;
    members without a directrix (circular, only possible at r = a) are
    skipped with a note.
    """
    if n_samples < 3:
        raise ValueError("need at least 3 samples")
    a, r = spec.a, spec.r
    rel = (r - a) / a
    fitted = False
    branches: list[tuple[float, str]] | None = None
    if rel < -R_EQUALS_A_REL:
        u = _u_focus(spec)
        envelope = ConicSpec.ellipse(
            spec.r_fixed, u, (2.0 * a - r) * r / (a - r), spec.plane_normal
        )
    elif rel > R_EQUALS_A_REL:
        u = _u_focus(spec)
        envelope = ConicSpec.hyperbola(
            spec.r_fixed, u, abs((2.0 * a - r) * r / (a - r)), spec.plane_normal
        )
        branches = []
    else:
        u = None
        envelope = ConicSpec.parabola(
            spec.r_fixed, _fit_parabola_directrix(spec), spec.plane_normal
        )
        fitted = True

    per_member: list[tuple[float, float]] = []
    skipped: list[tuple[float, str]] = []
    k_mu = spec.params.k * spec.params.mu
    for psi in psi_grid(n_samples):
        try:
            member = family_member(spec, psi)
        except RadialDirectionError:
            skipped.append((float(psi), "radial direction: degenerate member"))
            continue
        if float(np.linalg.norm(member.conserved.lenz)) < LENZ_ZERO_REL * k_mu:
            skipped.append((float(psi), "circular member: no directrix"))
            continue
        line = directrix(member.state, spec.params)
        residual = conic_tangency_residual(line, envelope)
        per_member.append((float(psi), residual))
        if branches is not None:
            branches.append((float(psi), _branch_of_tangency(line, envelope.focus1, envelope.focus2)))
    return EnvelopeReport(
        envelope=envelope,
        u_focus=None if u is None else as_vec3(u),
        per_member_residual=per_member,
        branches=branches,
        skipped=skipped,
        fitted_numerically=fitted,
    )


def simultaneous_return_check(spec: FamilySpec, n_samples: int) -> float:
    """Propagate grid members analytically by the shared period and return
    the largest distance of any final position from the fixed point.

    All family members share a, hence the period, so all motions started at
    the fixed point return to it simultaneously.
    """
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    period = spec.period
    worst = 0.0
    for psi in psi_grid(n_samples):
        member = family_member(spec, psi)
        final = propagate_analytic(member.state, spec.params, period)
        worst = max(worst, float(np.linalg.norm(final.r - spec.r_fixed)))
    return worst
