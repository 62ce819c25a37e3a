"""Geometry on the unit sphere: polar decomposition, angles, arcs and caps.

Directions are unit numpy vectors; angles are floats in the canonical
interval [0, 2*pi). Evaluation sets are finite unions of half-open arcs
[a, b) on the circle, or spherical caps for d >= 3.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneratePoint, DimensionMismatch

TWO_PI = 2.0 * np.pi

UNIT_NORM_TOL = 1e-12


def wrap_angle(theta):
    """Reduce angles to [0, 2*pi); scalar or array."""
    out = np.mod(theta, TWO_PI)
    # -eps % 2pi can round up to exactly 2pi
    out = np.where(out >= TWO_PI, 0.0, out)
    if np.isscalar(theta) or np.ndim(theta) == 0:
        return float(out)
    return out


def unit_vector(v) -> np.ndarray:
    """Validate v as a direction: d >= 2 and unit Euclidean norm."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise DimensionMismatch("a direction needs d >= 2 coordinates")
    n = float(np.sqrt(np.sum(v * v)))
    if abs(n - 1.0) > UNIT_NORM_TOL:
        raise ValueError(f"not a unit vector: |norm - 1| = {abs(n - 1.0):.3e}")
    return v


def polar(point):
    """Split a nonzero point into (norm, direction).

    The zero vector has no direction and raises DegeneratePoint.
    """
    p = np.asarray(point, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise DimensionMismatch("a point needs d >= 2 coordinates")
    n = float(np.sqrt(np.sum(p * p)))
    if n == 0.0:
        raise DegeneratePoint("cannot decompose the zero vector")
    return n, p / n


def polar_many(points: np.ndarray):
    """Vectorized polar decomposition of a (d, n) array of nonzero points."""
    points = np.asarray(points, dtype=float)
    norms = np.sqrt(np.sum(points * points, axis=0))
    if np.any(norms == 0.0):
        raise DegeneratePoint("batch contains the zero vector")
    return norms, points / norms


def angle_of(direction) -> float:
    """Canonical angle in [0, 2*pi) of a planar direction."""
    d = np.asarray(direction, dtype=float)
    if d.shape != (2,):
        raise DimensionMismatch("angle_of is defined for d = 2 only")
    return wrap_angle(np.arctan2(d[1], d[0]))


def direction_of(theta):
    """Planar unit vector at angle theta; inverse of angle_of."""
    t = float(theta)
    return np.array([np.cos(t), np.sin(t)])


def angles_of(dirs: np.ndarray) -> np.ndarray:
    """Canonical angles of a (2, n) array of planar directions."""
    if dirs.shape[0] != 2:
        raise DimensionMismatch("angles_of is defined for d = 2 only")
    return wrap_angle(np.arctan2(dirs[1], dirs[0]))


def directions_of(theta: np.ndarray) -> np.ndarray:
    """(2, n) array of planar unit vectors for an angle array."""
    t = np.asarray(theta, dtype=float)
    return np.stack([np.cos(t), np.sin(t)])


@dataclass(frozen=True)
class ArcSet:
    """Finite union of pairwise disjoint half-open arcs [a, b) on [0, 2*pi].

    Membership is exact on boundaries: a is in, b is out. A set wrapping
    through 0 is modeled as two arcs, e.g. {[3*pi/2, 2*pi), [0, pi/4)}.
    """

    arcs: tuple[tuple[float, float], ...]

    def __init__(self, arcs):
        pairs = sorted((float(a), float(b)) for a, b in arcs)
        for a, b in pairs:
            if not (0.0 <= a < b <= TWO_PI):
                raise ValueError(f"arc [{a}, {b}) outside [0, 2*pi] or empty")
        for (_, b0), (a1, _) in zip(pairs, pairs[1:]):
            if a1 < b0:
                raise ValueError("arcs overlap")
        object.__setattr__(self, "arcs", tuple(pairs))

    @classmethod
    def full_circle(cls) -> "ArcSet":
        return cls([(0.0, TWO_PI)])

    @classmethod
    def single(cls, a: float, b: float) -> "ArcSet":
        return cls([(a, b)])

    @property
    def length(self) -> float:
        return float(sum(b - a for a, b in self.arcs))

    def endpoints(self) -> np.ndarray:
        return np.array([e for arc in self.arcs for e in arc])

    def contains(self, theta):
        """Vectorized membership; scalar in, bool out."""
        t = np.asarray(theta, dtype=float)
        hit = np.zeros(t.shape, dtype=bool)
        for a, b in self.arcs:
            hit |= (t >= a) & (t < b)
        if np.ndim(theta) == 0:
            return bool(hit)
        return hit


def arc_contains(arcset: ArcSet, theta) -> bool:
    """True iff the angle lies in some arc of the set."""
    return arcset.contains(theta)


@dataclass(frozen=True)
class CapSet:
    """Union of spherical caps {x : <x, center> >= threshold} for d >= 3."""

    centers: np.ndarray = field(repr=False)  # (d, m) unit columns
    thresholds: np.ndarray = field(repr=False)  # (m,) in [-1, 1]

    def __init__(self, caps):
        centers = []
        thresholds = []
        for center, thr in caps:
            c = unit_vector(center)
            thr = float(thr)
            if not -1.0 <= thr <= 1.0:
                raise ValueError("cap threshold must lie in [-1, 1]")
            centers.append(c)
            thresholds.append(thr)
        if not centers:
            raise ValueError("CapSet needs at least one cap")
        object.__setattr__(self, "centers", np.stack(centers, axis=1))
        object.__setattr__(self, "thresholds", np.asarray(thresholds))

    @property
    def dim(self) -> int:
        return self.centers.shape[0]

    def contains(self, dirs):
        """Membership for a direction vector or a (d, n) array of directions."""
        x = np.asarray(dirs, dtype=float)
        single = x.ndim == 1
        if single:
            x = x[:, None]
        if x.shape[0] != self.dim:
            raise DimensionMismatch("direction dimension does not match caps")
        dots = self.centers.T @ x  # (m, n)
        hit = np.any(dots >= self.thresholds[:, None], axis=0)
        return bool(hit[0]) if single else hit
