"""Conserved quantities of the inverse-square Kepler problem and the
geometric construction of the orbit from a single phase-space state.

A bound state determines a fall circle of radius -k/H about the attracting
center, the central projection s of the position onto that circle, and the
mirror image t of s in the tangent line at the position.  The point t equals
K/(mu H) with K the Lenz vector, is conserved, and is the orbit's second
focus; every orbit element follows in closed form.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    CircularOrbitError,
    DegenerateOrbitError,
    RestStateWarning,
    UnboundOrbitError,
)
from .geom import Line, as_vec3, reflect_point_in_line, unit

__all__ = [
    "ANGMOM_ZERO_REL",
    "LENZ_ZERO_REL",
    "ConservedSet",
    "OrbitGeometry",
    "PhaseState",
    "PhysParams",
    "conserved_quantities",
    "directrix",
    "fall_point",
    "geometric_second_focus",
    "orbit_geometry",
    "params_from_masses",
]

# |L| below this multiple of |r||p| counts as collinear motion.
ANGMOM_ZERO_REL = 1e-12

# |K| below this multiple of k*mu counts as a circular orbit.
LENZ_ZERO_REL = 1e-12

_IDENTITY_TOL = 1e-12


@dataclass(frozen=True)
class PhysParams:
    """Reduced mass and coupling constant of the force field -k r / r^3.

    The library default mu = k = 1 works in normalized units; every formula
    keeps both symbolic, so physical values can be used unchanged.
    """

    mu: float = 1.0
    k: float = 1.0

    def __post_init__(self):
        for name in ("mu", "k"):
            value = float(getattr(self, name))
            object.__setattr__(self, name, value)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be finite and positive, got {value}")


def params_from_masses(G: float, m: float, M: float) -> PhysParams:
    """Parameters of the equivalent one-body problem for two gravitating masses:
    mu = mM/(m+M), k = GmM."""
    if not all(math.isfinite(x) and x > 0.0 for x in (G, m, M)):
        raise ValueError("G, m, M must all be finite and positive")
    return PhysParams(mu=m * M / (m + M), k=G * m * M)


@dataclass(frozen=True, eq=False)
class PhaseState:
    """Instantaneous position and momentum of the reduced body.

    The origin is excluded: the force field is undefined there.
    """

    r: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        r = as_vec3(self.r)
        if float(r @ r) == 0.0:
            raise ValueError("position must not be the origin")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "p", as_vec3(self.p))


@dataclass(frozen=True, eq=False)
class ConservedSet:
    """Angular momentum L, energy H, and Lenz vector K of a state.

    Carries the parameters so the defining identities can be validated:
    K is orthogonal to L, and |K|^2 = 2 mu H |L|^2 + k^2 mu^2.
    """

    angular_momentum: np.ndarray
    energy: float
    lenz: np.ndarray
    params: PhysParams

    def __post_init__(self):
        L = as_vec3(self.angular_momentum)
        K = as_vec3(self.lenz)
        H = float(self.energy)
        object.__setattr__(self, "angular_momentum", L)
        object.__setattr__(self, "lenz", K)
        object.__setattr__(self, "energy", H)
        if not math.isfinite(H):
            raise ValueError("energy must be finite")
        mu, k = self.params.mu, self.params.k
        l_norm = math.sqrt(float(L @ L))
        k_norm = math.sqrt(float(K @ K))
        # K is a difference of two k*mu-sized terms, so its components carry
        # absolute noise ~eps * k * mu regardless of |K|; the orthogonality
        # scale must not collapse with |K| near the circular case.
        if abs(float(L @ K)) > _IDENTITY_TOL * l_norm * max(k_norm, k * mu):
            raise ValueError("Lenz vector must lie in the orbit plane (L . K = 0)")
        lhs = k_norm**2
        rhs = 2.0 * mu * H * l_norm**2 + (k * mu) ** 2
        scale = max(lhs, abs(2.0 * mu * H * l_norm**2), (k * mu) ** 2)
        if abs(lhs - rhs) > _IDENTITY_TOL * scale:
            raise ValueError("|K|^2 = 2 mu H |L|^2 + (k mu)^2 violated")

    @property
    def eccentricity(self) -> float:
        """|K| / (k mu)."""
        K = self.lenz
        return math.sqrt(float(K @ K)) / (self.params.k * self.params.mu)


@dataclass(frozen=True, eq=False)
class OrbitGeometry:
    """Ellipse elements of a bound, non-collinear orbit.

    One focus is the attracting center at the origin; ``focus_second`` is the
    conserved point t = K/(mu H).  ``fall_radius`` = -k/H = 2a bounds all
    motion of this energy.
    """

    a: float
    b: float
    c: float
    e: float
    focus_second: np.ndarray
    period: float
    fall_radius: float
    plane_normal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "focus_second", as_vec3(self.focus_second))
        object.__setattr__(self, "plane_normal", as_vec3(self.plane_normal))
        for name in ("a", "b", "c", "e", "period", "fall_radius"):
            object.__setattr__(self, name, float(getattr(self, name)))
        a, b, c, e = self.a, self.b, self.c, self.e
        if not (a > 0.0 and b > 0.0 and c >= 0.0 and self.period > 0.0):
            raise ValueError("orbit elements out of range")
        if abs(a * a - (b * b + c * c)) > _IDENTITY_TOL * a * a:
            raise ValueError("a^2 = b^2 + c^2 violated")
        if not 0.0 <= e <= 1.0 or abs(e - c / a) > _IDENTITY_TOL:
            raise ValueError("eccentricity must equal c/a and lie in [0, 1]")
        t_norm = float(np.linalg.norm(self.focus_second))
        if abs(t_norm - 2.0 * c) > _IDENTITY_TOL * max(a, 2.0 * c):
            raise ValueError("|focus_second| must equal 2c")
        if abs(self.fall_radius - 2.0 * a) > _IDENTITY_TOL * a:
            raise ValueError("fall_radius must equal 2a")

    @property
    def focus_origin(self) -> np.ndarray:
        return np.zeros(3)


def conserved_quantities(state: PhaseState, params: PhysParams) -> ConservedSet:
    """L = r x p, H = |p|^2/(2 mu) - k/|r|, K = p x L - k mu r/|r|."""
    r, p = state.r, state.p
    r_norm = math.sqrt(float(r @ r))
    L = np.cross(r, p)
    H = float(p @ p) / (2.0 * params.mu) - params.k / r_norm
    K = np.cross(p, L) - (params.k * params.mu / r_norm) * r
    return ConservedSet(angular_momentum=L, energy=H, lenz=K, params=params)


def fall_point(state: PhaseState, params: PhysParams) -> np.ndarray:
    """Central projection s = -k r/(|r| H) of the position onto the fall circle.

    Defined only for bound states; |s| = -k/H is the fall-circle radius.
    """
    r = state.r
    r_norm = math.sqrt(float(r @ r))
    H = float(state.p @ state.p) / (2.0 * params.mu) - params.k / r_norm
    if H >= 0.0:
        raise UnboundOrbitError(f"fall circle requires negative energy, got H = {H}")
    return (-params.k / (r_norm * H)) * np.asarray(r)


def geometric_second_focus(state: PhaseState, params: PhysParams) -> np.ndarray:
    """Second focus t: the fall point reflected in the tangent line at ``state``.

    The tangent line passes through the position with direction p, so its
    in-plane normal is p x L.  The result equals K/(mu H) and is conserved.
    A state at rest (p = 0) sits on the fall circle itself; there the tangent
    line is undefined, the orbit is the radial segment, and t = s is returned
    with a RestStateWarning.
    """
    r, p = state.r, state.p
    s = fall_point(state, params)
    p_norm2 = float(p @ p)
    if p_norm2 == 0.0:
        warnings.warn(
            "state at rest on the fall circle: second focus equals the fall point",
            RestStateWarning,
            stacklevel=2,
        )
        return s
    L = np.cross(r, p)
    if float(L @ L) < (ANGMOM_ZERO_REL**2) * float(r @ r) * p_norm2:
        raise DegenerateOrbitError("collinear motion: tangent-line reflection undefined")
    tangent = Line(base=r, normal=unit(np.cross(p, L)))
    return reflect_point_in_line(s, tangent)


def orbit_geometry(state: PhaseState, params: PhysParams) -> OrbitGeometry:
    """Ellipse elements from a single bound state.

    a = -k/(2H), b = sqrt(-|L|^2/(2 mu H)), c = |t|/2, e = |K|/(k mu), and the
    period T = 2 pi mu a b / |L| (equivalently a^3/T^2 = k/(4 pi^2 mu)).
    """
    cons = conserved_quantities(state, params)
    H = cons.energy
    if H >= 0.0:
        raise UnboundOrbitError(f"orbit elements require negative energy, got H = {H}")
    L = cons.angular_momentum
    l_norm2 = float(L @ L)
    if l_norm2 < (ANGMOM_ZERO_REL**2) * float(state.r @ state.r) * float(state.p @ state.p):
        raise DegenerateOrbitError("collinear motion has no ellipse elements")
    mu, k = params.mu, params.k
    t = cons.lenz / (mu * H)
    a = -k / (2.0 * H)
    b = math.sqrt(-l_norm2 / (2.0 * mu * H))
    c = 0.5 * float(np.linalg.norm(t))
    e = cons.eccentricity
    period = 2.0 * math.pi * mu * a * b / math.sqrt(l_norm2)
    return OrbitGeometry(
        a=a,
        b=b,
        c=c,
        e=e,
        focus_second=t,
        period=period,
        fall_radius=-k / H,
        plane_normal=unit(L),
    )


def directrix(state: PhaseState, params: PhysParams) -> Line:
    """Directrix of the orbit with respect to the origin focus.

    The line d + K-perp with d = |L|^2 K / |K|^2; the distance from any orbit
    point to it is the point's radius divided by the eccentricity.  Circular
    orbits (K = 0) have no directrix.  For the degenerate radial orbit
    (L = 0, e = 1) the base collapses to the origin and the line is the
    perpendicular of r through 0.
    """
    cons = conserved_quantities(state, params)
    K = cons.lenz
    k_norm = math.sqrt(float(K @ K))
    if k_norm < LENZ_ZERO_REL * params.k * params.mu:
        raise CircularOrbitError("a circular orbit has no directrix")
    L2 = float(cons.angular_momentum @ cons.angular_momentum)
    return Line(base=(L2 / k_norm**2) * K, normal=K / k_norm)
