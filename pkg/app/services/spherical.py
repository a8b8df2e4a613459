"""
Spherical geometry on the unit celestial sphere.

All links are minor great-circle arcs. Functions are pure and accept
``UnitVector`` values or length-3 array-likes.
"""

import math
from typing import Union

import numpy as np

from app.core.errors import DegenerateGeometryError
from app.models.catalog import UnitVector

VectorLike = Union[UnitVector, np.ndarray, tuple[float, float, float]]

# Tolerance on triple products for strict side tests
SIDE_TOL = 1e-12
# Below this norm a tangent direction or a plane normal is considered undefined
DEGENERATE_TOL = 1e-12


def _arr(v: VectorLike) -> np.ndarray:
    if isinstance(v, UnitVector):
        return np.array(v.as_tuple(), dtype=float)
    return np.asarray(v, dtype=float)


def to_unit_vector(ra: float, dec: float) -> UnitVector:
    """Equatorial (degrees) to Cartesian on the unit sphere."""
    ra_r = math.radians(ra)
    dec_r = math.radians(dec)
    cos_dec = math.cos(dec_r)
    return UnitVector(cos_dec * math.cos(ra_r), cos_dec * math.sin(ra_r), math.sin(dec_r))


def unit_vector_to_radec(v: VectorLike) -> tuple[float, float]:
    x, y, z = _arr(v)
    ra = math.degrees(math.atan2(y, x)) % 360.0
    if ra >= 360.0:
        ra = 0.0
    dec = math.degrees(math.atan2(z, math.hypot(x, y)))
    return ra, dec


def angular_separation(a: VectorLike, b: VectorLike) -> float:
    """Great-circle angle in degrees, stable near 0 and 180."""
    va, vb = _arr(a), _arr(b)
    return math.degrees(math.atan2(np.linalg.norm(np.cross(va, vb)), float(np.dot(va, vb))))


def vertex_angle(apex: VectorLike, p: VectorLike, q: VectorLike) -> float:
    """
    Spherical angle at ``apex`` between the arcs apex->p and apex->q, in degrees.

    Raises:
        DegenerateGeometryError: if p or q coincides with the apex.
    """
    va, vp, vq = _arr(apex), _arr(p), _arr(q)
    tp = vp - np.dot(vp, va) * va
    tq = vq - np.dot(vq, va) * va
    np_, nq = np.linalg.norm(tp), np.linalg.norm(tq)
    if np_ < DEGENERATE_TOL or nq < DEGENERATE_TOL:
        raise DegenerateGeometryError("link endpoint coincides with the vertex star")
    tp /= np_
    tq /= nq
    return math.degrees(math.atan2(np.linalg.norm(np.cross(tp, tq)), float(np.dot(tp, tq))))


def _same_point(u: np.ndarray, v: np.ndarray) -> bool:
    return bool(np.linalg.norm(u - v) < DEGENERATE_TOL)


def _within_arc(x: np.ndarray, u: np.ndarray, v: np.ndarray, normal: np.ndarray) -> bool:
    # x lies strictly between u and v along the minor arc with the given plane normal
    return float(np.dot(np.cross(u, x), normal)) > SIDE_TOL and float(np.dot(np.cross(x, v), normal)) > SIDE_TOL


def geodesics_cross(a1: VectorLike, a2: VectorLike, b1: VectorLike, b2: VectorLike) -> bool:
    """
    True iff the open minor arcs a1-a2 and b1-b2 intersect.

    Arcs sharing an endpoint never cross; exact touching counts as non-crossing.

    Raises:
        DegenerateGeometryError: the arcs lie on one great circle and overlap.
    """
    va1, va2, vb1, vb2 = (_arr(v) for v in (a1, a2, b1, b2))
    if any(_same_point(u, v) for u in (va1, va2) for v in (vb1, vb2)):
        return False

    na = np.cross(va1, va2)
    nb = np.cross(vb1, vb2)
    if np.linalg.norm(na) < DEGENERATE_TOL or np.linalg.norm(nb) < DEGENERATE_TOL:
        raise DegenerateGeometryError("arc endpoints coincide or are antipodal")

    sa1, sa2 = float(np.dot(va1, nb)), float(np.dot(va2, nb))
    sb1, sb2 = float(np.dot(vb1, na)), float(np.dot(vb2, na))

    if max(abs(sa1), abs(sa2), abs(sb1), abs(sb2)) <= SIDE_TOL:
        # Both arcs on one great circle
        overlap = (
            _within_arc(vb1, va1, va2, na)
            or _within_arc(vb2, va1, va2, na)
            or _within_arc(va1, vb1, vb2, nb)
            or _within_arc(va2, vb1, vb2, nb)
        )
        if overlap:
            raise DegenerateGeometryError("collinear overlapping arcs")
        return False

    if not (sa1 * sa2 < 0 and min(abs(sa1), abs(sa2)) > SIDE_TOL):
        return False
    if not (sb1 * sb2 < 0 and min(abs(sb1), abs(sb2)) > SIDE_TOL):
        return False

    line = np.cross(na, nb)
    line /= np.linalg.norm(line)
    for candidate in (line, -line):
        if _within_arc(candidate, va1, va2, na) and _within_arc(candidate, vb1, vb2, nb):
            return True
    return False
