"""Seeded, ordered batches of sample points with cached polar decomposition."""

from __future__ import annotations

import numpy as np

from .errors import DegeneratePoint
from .sphere import angles_of


class SampleBatch:
    """Ordered collection of nonzero points in R^d.

    Points are stored as a (d, n) float64 array (one contiguous row per
    coordinate). The polar cache (norms, dirs) is exact for batches built
    from native polar data; from_points recomputes it canonically, which is
    also what happens when a batch round-trips through CSV. zero_count
    records points collapsed to the origin by transforms and removed.
    """

    def __init__(self, points: np.ndarray, norms: np.ndarray, dirs: np.ndarray,
                 seed: int | None = None, zero_count: int = 0):
        self.points = np.ascontiguousarray(points, dtype=float)
        self.norms = np.asarray(norms, dtype=float)
        self.dirs = np.asarray(dirs, dtype=float)
        self.seed = seed
        self.zero_count = int(zero_count)
        if self.points.ndim != 2:
            raise ValueError("points must be a (d, n) array")
        if self.zero_count < 0:
            raise ValueError("zero_count must be nonnegative")
        self._angles = None

    @classmethod
    def from_points(cls, points: np.ndarray, seed: int | None = None,
                    zero_count: int = 0) -> "SampleBatch":
        """Build a batch from raw coordinates, recomputing the polar cache."""
        points = np.ascontiguousarray(points, dtype=float)
        norms = np.sqrt(np.sum(points * points, axis=0))
        if np.any(norms == 0.0):
            raise DegeneratePoint("batch contains the zero vector")
        with np.errstate(invalid="ignore", divide="ignore"):
            dirs = points / norms
        return cls(points, norms, dirs, seed=seed, zero_count=zero_count)

    @classmethod
    def from_polar(cls, norms: np.ndarray, dirs: np.ndarray,
                   seed: int | None = None, zero_count: int = 0) -> "SampleBatch":
        """Build a batch from native (norm, direction) data."""
        norms = np.asarray(norms, dtype=float)
        dirs = np.asarray(dirs, dtype=float)
        if np.any(norms <= 0.0):
            raise DegeneratePoint("norms must be positive")
        return cls(dirs * norms, norms, dirs, seed=seed, zero_count=zero_count)

    @property
    def dim(self) -> int:
        return self.points.shape[0]

    @property
    def size(self) -> int:
        return self.points.shape[1]

    def angles(self) -> np.ndarray:
        """Canonical angles of the cached directions (d = 2 only, cached)."""
        if self._angles is None:
            self._angles = angles_of(self.dirs)
        return self._angles

    def canonical(self) -> "SampleBatch":
        """Batch rebuilt from coordinates alone.

        This is the same normal form a batch takes after a lossless CSV
        round-trip, so pipelines that canonicalize at stage boundaries give
        bit-identical results in memory and through files.
        """
        return SampleBatch.from_points(self.points, seed=self.seed,
                                       zero_count=self.zero_count)

    def __repr__(self):
        return (f"SampleBatch(d={self.dim}, n={self.size}, seed={self.seed}, "
                f"zero_count={self.zero_count})")
