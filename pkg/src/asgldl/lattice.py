"""Spherical Fibonacci lattice and nearest-neighbour spacing diagnostics."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.spatial import cKDTree

from .errors import ValidationError

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0


@dataclass(frozen=True, eq=False)
class SphereLattice:
    """``m`` near-equidistant unit vectors, shape ``(m, 3)``, read-only."""

    points: np.ndarray

    @property
    def m(self) -> int:
        return self.points.shape[0]

    def __len__(self) -> int:
        return self.m


def fibonacci_sphere(m: int) -> SphereLattice:
    """Offset Fibonacci lattice.

    Point ``k`` sits at height ``z = 1 - (2k + 1) / m`` and azimuth
    ``2 pi k (2 - golden_ratio)`` (the golden angle).  The half-step offset
    keeps points off the poles.
    """
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise ValidationError(f"lattice size must be a positive integer, got {m!r}")
    m = int(m)
    return _fibonacci_cached(m)


@lru_cache(maxsize=32)
def _fibonacci_cached(m: int) -> SphereLattice:
    k = np.arange(m, dtype=float)
    z = 1.0 - (2.0 * k + 1.0) / m
    rho = np.sqrt(1.0 - z * z)
    phi = 2.0 * math.pi * k * (2.0 - GOLDEN_RATIO)
    pts = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    # float rounding leaves norms off by ~1 ulp; renormalize
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    pts.setflags(write=False)
    return SphereLattice(pts)


def nearest_neighbor_angles(lat: SphereLattice) -> np.ndarray:
    """Angle in degrees from each point to its nearest other point."""
    if lat.m < 2:
        raise ValidationError("nearest-neighbour angles need at least 2 points")
    tree = cKDTree(lat.points)
    chord, _ = tree.query(lat.points, k=2)
    chord = chord[:, 1]
    return np.degrees(2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0)))


def neighbor_angle_stats(lat: SphereLattice) -> dict[str, float]:
    a = nearest_neighbor_angles(lat)
    return {"min": float(a.min()), "mean": float(a.mean()), "max": float(a.max())}


def spacing_curve(m_values) -> list[tuple[int, float]]:
    """Rows of ``(m, mean nearest-neighbour angle in degrees)``."""
    rows = []
    for m in m_values:
        if m < 2:
            raise ValidationError(f"spacing curve needs m >= 2, got {m}")
        rows.append((int(m), neighbor_angle_stats(fibonacci_sphere(m))["mean"]))
    return rows


def write_points_csv(lat: SphereLattice, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "z"])
        for x, y, z in lat.points:
            w.writerow([repr(float(x)), repr(float(y)), repr(float(z))])


def write_spacing_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m", "mean_angle_deg"])
        for m, a in rows:
            w.writerow([m, repr(a)])
