"""Vector and planar-conic primitives.

Lines are stored as a base point plus a unit normal; conics by their foci and
the focal-sum (or focal-difference) constant.  Tangency is tested through the
focal reflection property -- the mirror image of one focus in a tangent line
lies at distance ``major_axis`` from the other focus, or on the directrix for
a parabola -- which is exact and avoids implicit-quadric discriminants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "UNIT_NORMAL_TOL",
    "ConicKind",
    "ConicSpec",
    "Line",
    "as_vec3",
    "conic_tangency_residual",
    "plane_basis",
    "point_line_distance",
    "reflect_point_in_line",
    "sample_conic",
    "unit",
    "vec3",
]

# Acceptable deviation of a stored normal from unit length.
UNIT_NORMAL_TOL = 1e-12

# Relative slack when validating redundant conic fields against each other.
_CONIC_CONSISTENCY_TOL = 1e-9


def as_vec3(v) -> np.ndarray:
    """Copy ``v`` into a read-only float64 3-vector, validating shape and finiteness."""
    arr = np.array(v, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector components must be finite")
    arr.flags.writeable = False
    return arr


def vec3(x: float, y: float, z: float) -> np.ndarray:
    """Read-only float64 vector from components."""
    return as_vec3((x, y, z))


def unit(v) -> np.ndarray:
    """Unit vector along ``v``; raises on the zero vector."""
    v = np.asarray(v, dtype=float)
    n = math.sqrt(float(v @ v))
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return v / n


def plane_basis(normal, prefer=None) -> tuple[np.ndarray, np.ndarray]:
    """Right-handed orthonormal basis (e1, e2) of the plane with unit ``normal``.

    When ``prefer`` is given, e1 is its in-plane projection (it must not be
    parallel to the normal); otherwise a deterministic axis-based seed is used.
    """
    n = unit(normal)
    if prefer is not None:
        seed = np.asarray(prefer, dtype=float)
    else:
        seed = np.zeros(3)
        seed[int(np.argmin(np.abs(n)))] = 1.0
    e1 = seed - float(seed @ n) * n
    m = math.sqrt(float(e1 @ e1))
    if m < 1e-12 * max(1.0, math.sqrt(float(seed @ seed))):
        raise ValueError("preferred direction is parallel to the plane normal")
    e1 = e1 / m
    return e1, np.cross(n, e1)


@dataclass(frozen=True, eq=False)
class Line:
    """A line stored as a base point plus a unit normal.

    Represents {q : (q - base) . normal = 0} intersected with the working
    plane; all operations act in full 3-space through the normal.
    """

    base: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "base", as_vec3(self.base))
        normal = as_vec3(self.normal)
        if abs(math.sqrt(float(normal @ normal)) - 1.0) > UNIT_NORMAL_TOL:
            raise ValueError("line normal must be a unit vector (within 1e-12)")
        object.__setattr__(self, "normal", normal)


def reflect_point_in_line(p, line: Line) -> np.ndarray:
    """Mirror image of ``p`` in ``line``: p - 2((p - base) . n)n.

    The stored normal is re-normalized to machine precision so that applying
    the reflection twice returns the input exactly (up to rounding).
    """
    p = np.asarray(p, dtype=float)
    n = line.normal / math.sqrt(float(line.normal @ line.normal))
    return p - (2.0 * float((p - line.base) @ n)) * n


def point_line_distance(p, line: Line) -> float:
    """Perpendicular distance |(p - base) . n| from ``p`` to ``line``."""
    p = np.asarray(p, dtype=float)
    n = line.normal / math.sqrt(float(line.normal @ line.normal))
    return abs(float((p - line.base) @ n))


class ConicKind(Enum):
    ELLIPSE = "ellipse"
    PARABOLA = "parabola"
    HYPERBOLA = "hyperbola"
    CIRCLE = "circle"
    SEGMENT = "segment"


@dataclass(frozen=True, eq=False)
class ConicSpec:
    """A planar conic described by foci and the focal-sum/difference constant.

    ``major_axis`` is the constant 2A: the focal sum for an ellipse (twice the
    radius for a circle), the absolute focal difference for a hyperbola, the
    focus separation for a degenerate segment.  A parabola carries ``focus1``
    plus its ``directrix`` instead of a second focus.
    """

    kind: ConicKind
    focus1: np.ndarray
    focus2: np.ndarray | None
    major_axis: float | None
    eccentricity: float
    normal: np.ndarray
    directrix: Line | None = None

    def __post_init__(self):
        object.__setattr__(self, "focus1", as_vec3(self.focus1))
        object.__setattr__(self, "normal", as_vec3(unit(self.normal)))
        if self.focus2 is not None:
            object.__setattr__(self, "focus2", as_vec3(self.focus2))
        ecc = float(self.eccentricity)
        object.__setattr__(self, "eccentricity", ecc)
        if not math.isfinite(ecc) or ecc < 0.0:
            raise ValueError("eccentricity must be finite and non-negative")

        if self.kind is ConicKind.PARABOLA:
            if self.directrix is None:
                raise ValueError("a parabola requires a directrix line")
            if self.focus2 is not None or self.major_axis is not None:
                raise ValueError("a parabola carries focus1 + directrix only")
            if abs(ecc - 1.0) > _CONIC_CONSISTENCY_TOL:
                raise ValueError("a parabola has eccentricity 1")
            return

        if self.focus2 is None or self.major_axis is None:
            raise ValueError(f"{self.kind.value} requires focus2 and major_axis")
        axis = float(self.major_axis)
        object.__setattr__(self, "major_axis", axis)
        if not (math.isfinite(axis) and axis > 0.0):
            raise ValueError("major_axis must be finite and positive")
        gap = float(np.linalg.norm(self.focus2 - self.focus1))
        slack = _CONIC_CONSISTENCY_TOL * axis
        if self.kind is ConicKind.ELLIPSE:
            if not gap < axis:
                raise ValueError("ellipse foci must be closer than the major axis")
        elif self.kind is ConicKind.CIRCLE:
            if gap > slack:
                raise ValueError("circle foci must coincide")
        elif self.kind is ConicKind.HYPERBOLA:
            if not gap > axis:
                raise ValueError("hyperbola foci must be farther apart than the major axis")
        elif self.kind is ConicKind.SEGMENT:
            if abs(gap - axis) > slack:
                raise ValueError("segment endpoints must be the foci, one major axis apart")
        expected = gap / axis
        if abs(ecc - expected) > _CONIC_CONSISTENCY_TOL * max(1.0, expected):
            raise ValueError(
                f"eccentricity {ecc} inconsistent with focus gap / major axis = {expected}"
            )

    @classmethod
    def ellipse(cls, focus1, focus2, major_axis: float, normal) -> "ConicSpec":
        focus1 = as_vec3(focus1)
        focus2 = as_vec3(focus2)
        ecc = float(np.linalg.norm(focus2 - focus1)) / float(major_axis)
        return cls(ConicKind.ELLIPSE, focus1, focus2, float(major_axis), ecc, normal)

    @classmethod
    def circle(cls, center, radius: float, normal) -> "ConicSpec":
        center = as_vec3(center)
        return cls(ConicKind.CIRCLE, center, center, 2.0 * float(radius), 0.0, normal)

    @classmethod
    def hyperbola(cls, focus1, focus2, major_axis: float, normal) -> "ConicSpec":
        focus1 = as_vec3(focus1)
        focus2 = as_vec3(focus2)
        ecc = float(np.linalg.norm(focus2 - focus1)) / float(major_axis)
        return cls(ConicKind.HYPERBOLA, focus1, focus2, float(major_axis), ecc, normal)

    @classmethod
    def parabola(cls, focus, directrix: Line, normal) -> "ConicSpec":
        return cls(ConicKind.PARABOLA, as_vec3(focus), None, None, 1.0, normal, directrix)

    @classmethod
    def segment(cls, focus1, focus2, normal) -> "ConicSpec":
        focus1 = as_vec3(focus1)
        focus2 = as_vec3(focus2)
        axis = float(np.linalg.norm(focus2 - focus1))
        return cls(ConicKind.SEGMENT, focus1, focus2, axis, 1.0, normal)

    @property
    def center(self) -> np.ndarray:
        if self.kind is ConicKind.PARABOLA:
            raise ValueError("a parabola has no center")
        return 0.5 * (self.focus1 + self.focus2)


def conic_tangency_residual(line: Line, conic: ConicSpec) -> float:
    """Residual of the focal tangency test; zero iff ``line`` touches ``conic``.

    For an ellipse, circle or hyperbola this is
    ``| |reflect(focus2, line) - focus1| - major_axis |``; for a parabola the
    mirrored focus must land on the directrix, so the residual is its distance
    from that line.  Degenerate segments are rejected.
    """
    if conic.kind is ConicKind.SEGMENT:
        raise ValueError("tangency is undefined for a degenerate segment conic")
    if conic.kind is ConicKind.PARABOLA:
        mirrored = reflect_point_in_line(conic.focus1, line)
        return point_line_distance(mirrored, conic.directrix)
    mirrored = reflect_point_in_line(conic.focus2, line)
    gap = float(np.linalg.norm(mirrored - conic.focus1))
    return abs(gap - conic.major_axis)


def sample_conic(conic: ConicSpec, n: int, span: float = 3.0) -> np.ndarray:
    """Sample ``n`` points on the conic, returned as an (n, 3) array.

    Ellipses and circles are swept over the full parameter circle.  Open
    conics are cut off by ``span``: a hyperbola is sampled on both branches
    with |sinh u| <= span, a parabola over lateral offsets up to
    2 * span * focal-length.
    """
    if n < 2:
        raise ValueError("need at least 2 sample points")
    if conic.kind in (ConicKind.ELLIPSE, ConicKind.CIRCLE):
        center = conic.center
        half_gap = 0.5 * float(np.linalg.norm(conic.focus2 - conic.focus1))
        semi_major = 0.5 * conic.major_axis
        semi_minor = math.sqrt(max(semi_major**2 - half_gap**2, 0.0))
        if half_gap > 0.0:
            e1, e2 = plane_basis(conic.normal, prefer=conic.focus2 - conic.focus1)
        else:
            e1, e2 = plane_basis(conic.normal)
        theta = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
        return (
            center
            + np.outer(semi_major * np.cos(theta), e1)
            + np.outer(semi_minor * np.sin(theta), e2)
        )
    if conic.kind is ConicKind.HYPERBOLA:
        center = conic.center
        half_gap = 0.5 * float(np.linalg.norm(conic.focus2 - conic.focus1))
        semi_major = 0.5 * conic.major_axis
        semi_minor = math.sqrt(half_gap**2 - semi_major**2)
        e1, _ = plane_basis(conic.normal, prefer=conic.focus1 - center)
        e2 = np.cross(conic.normal, e1)
        u = np.linspace(-math.asinh(span), math.asinh(span), (n + 1) // 2)
        pts = []
        for sign in (1.0, -1.0):
            pts.append(
                center
                + np.outer(sign * semi_major * np.cosh(u), e1)
                + np.outer(semi_minor * np.sinh(u), e2)
            )
        return np.vstack(pts)[:n]
    if conic.kind is ConicKind.PARABOLA:
        foot = np.asarray(conic.focus1) - (
            float((conic.focus1 - conic.directrix.base) @ conic.directrix.normal)
            * conic.directrix.normal
        )
        axis_vec = conic.focus1 - foot
        depth = float(np.linalg.norm(axis_vec))
        if depth == 0.0:
            raise ValueError("parabola focus lies on its directrix")
        axis_hat = axis_vec / depth
        vertex = 0.5 * (conic.focus1 + foot)
        side = np.cross(conic.normal, axis_hat)
        focal_length = 0.5 * depth
        u = np.linspace(-2.0 * span * focal_length, 2.0 * span * focal_length, n)
        return vertex + np.outer(u**2 / (4.0 * focal_length), axis_hat) + np.outer(u, side)
    raise ValueError("cannot sample a degenerate segment conic")
