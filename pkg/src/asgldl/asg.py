"""Anisotropic spherical Gaussian (ASG) label distributions over a sphere lattice.

For pose vector ``r_i`` (column ``i`` of a rotation ``R``) the kernel at a
unit direction ``v`` is::

    G(v) = max(v . r_i, 0) * exp(-lam (v . r_j)^2 - eta (v . r_k)^2)

with ``j = (i + 1) % 3`` and ``k = (i + 2) % 3``.  The exponential factor is a
Bingham density (peaks at +-r_i); the clipped cosine keeps only the
``+r_i`` peak.

Kernel values on the lattice are turned into probabilities either by a
softmax with scale ``c`` (``p ~ exp(c G)``) or linearly (``p = G / sum G``).
Decoding takes the expectation of the lattice points under a distribution.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDistributionError, IncompatibleLatticeError, ValidationError
from .lattice import SphereLattice
from .rotation import project_to_so3
from .svg import Canvas, sphere_panel

# the four (lam, eta) pairs shown side by side in the reference visualization
RENDER_PAIRS = ((1.0, 1.0), (5.0, 5.0), (1.0, 5.0), (5.0, 1.0))


@dataclass(frozen=True)
class AsgParams:
    lam: float
    eta: float

    def __post_init__(self):
        if not (self.lam > 0 and self.eta > 0):
            raise ValidationError(f"ASG concentrations must be positive, got "
                                  f"lam={self.lam}, eta={self.eta}")


@dataclass(frozen=True)
class NormalizationMode:
    kind: str = "softmax"
    c: float = 1.0

    def __post_init__(self):
        if self.kind not in ("softmax", "linear"):
            raise ValidationError(f"normalization must be 'softmax' or 'linear', got {self.kind!r}")
        if self.kind == "softmax" and not self.c > 0:
            raise ValidationError(f"softmax scale must be positive, got {self.c}")

    @classmethod
    def softmax(cls, c: float = 1.0) -> "NormalizationMode":
        return cls("softmax", c)

    @classmethod
    def linear(cls) -> "NormalizationMode":
        return cls("linear")

    def __str__(self) -> str:
        return "linear" if self.kind == "linear" else f"softmax(c={self.c:g})"


@dataclass(frozen=True, eq=False)
class PoseDistribution:
    probs: np.ndarray
    lattice_m: int
    head_index: int

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (self.lattice_m,):
            raise ValidationError(f"expected {self.lattice_m} probabilities, got shape {p.shape}")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise ValidationError("probabilities must be non-negative and sum to 1")
        if self.head_index not in (0, 1, 2):
            raise ValidationError(f"head index must be 0, 1 or 2, got {self.head_index}")
        object.__setattr__(self, "probs", p)


def head_axes(i: int) -> tuple[int, int, int]:
    if i not in (0, 1, 2):
        raise ValidationError(f"head index must be 0, 1 or 2, got {i!r}")
    return i, (i + 1) % 3, (i + 2) % 3


def asg_kernel(v, R, i: int, params: AsgParams) -> float:
    """Kernel value for a single unit direction ``v``."""
    i, j, k = head_axes(i)
    v = np.asarray(v, dtype=float)
    if abs(np.linalg.norm(v) - 1.0) > 1e-9:
        raise ValidationError("asg_kernel expects a unit vector")
    R = np.asarray(R, dtype=float)
    a, b, c = v @ R[:, i], v @ R[:, j], v @ R[:, k]
    return float(max(a, 0.0) * np.exp(-params.lam * b * b - params.eta * c * c))


def kernel_terms(points: np.ndarray, R: np.ndarray, i: int):
    """Per-point ``(smooth, u^2, w^2)`` for head ``i``.

    ``R`` may be a single ``(3, 3)`` matrix or a ``(B, 3, 3)`` stack; the
    result then has shape ``(M,)`` or ``(B, M)``.
    """
    i, j, k = head_axes(i)
    proj = points @ R  # (..., M, 3): proj[..., m, c] = d_m . r_c
    smooth = np.maximum(proj[..., i], 0.0)
    return smooth, proj[..., j] ** 2, proj[..., k] ** 2


def kernel_values(lat: SphereLattice, R, i: int, params: AsgParams) -> np.ndarray:
    smooth, u2, w2 = kernel_terms(lat.points, np.asarray(R, dtype=float), i)
    return smooth * np.exp(-params.lam * u2 - params.eta * w2)


def normalize(G: np.ndarray, norm: NormalizationMode) -> np.ndarray:
    """Normalize kernel values along the last axis."""
    if norm.kind == "linear":
        total = G.sum(axis=-1, keepdims=True)
        if np.any(total <= 0):
            raise DegenerateDistributionError("kernel mass is zero on every lattice point")
        return G / total
    z = norm.c * G
    z = np.exp(z - z.max(axis=-1, keepdims=True))
    return z / z.sum(axis=-1, keepdims=True)


def encode(R, i: int, params: AsgParams, lat: SphereLattice,
           norm: NormalizationMode = NormalizationMode()) -> PoseDistribution:
    """Label distribution over ``lat`` for pose vector ``i`` of ``R``."""
    p = normalize(kernel_values(lat, R, i, params), norm)
    return PoseDistribution(p, lat.m, i)


def decode_vector(p: PoseDistribution, lat: SphereLattice) -> np.ndarray:
    """Expectation of the lattice points under ``p``; norm is at most 1."""
    if p.lattice_m != lat.m:
        raise IncompatibleLatticeError(
            f"distribution has {p.lattice_m} points but the lattice has {lat.m}")
    return p.probs @ lat.points


def decode_pose(p0: PoseDistribution, p1: PoseDistribution, p2: PoseDistribution,
                lat: SphereLattice) -> np.ndarray:
    """Stack the three decoded pose vectors as columns and project onto SO(3)."""
    for want, p in enumerate((p0, p1, p2)):
        if p.head_index != want:
            raise ValidationError(f"distribution {want} has head index {p.head_index}")
    cols = [decode_vector(p, lat) for p in (p0, p1, p2)]
    return project_to_so3(np.column_stack(cols))


def write_distribution_csv(p: PoseDistribution, lat: SphereLattice, path) -> None:
    if p.lattice_m != lat.m:
        raise IncompatibleLatticeError(
            f"distribution has {p.lattice_m} points but the lattice has {lat.m}")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "x", "y", "z", "p"])
        for k, ((x, y, z), pk) in enumerate(zip(lat.points, p.probs)):
            w.writerow([k, repr(float(x)), repr(float(y)), repr(float(z)), repr(float(pk))])


def read_distribution_csv(path, head_index: int):
    """Read a ``k,x,y,z,p`` file back into ``(PoseDistribution, points)``."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["k", "x", "y", "z", "p"]:
            raise ValidationError(f"{path}: expected header k,x,y,z,p, got {reader.fieldnames}")
        for line, row in enumerate(reader, start=2):
            try:
                rows.append([float(row[c]) for c in ("x", "y", "z", "p")])
            except (TypeError, ValueError):
                raise ValidationError(f"{path}:{line}: unparsable row {row}") from None
    arr = np.array(rows, dtype=float).reshape(-1, 4)
    p = arr[:, 3]
    # renormalize away decimal round-off from hand-edited files
    total = p.sum()
    if total > 0:
        p = p / total
    return PoseDistribution(p, len(p), head_index), arr[:, :3]


def render_distribution(p: PoseDistribution, lat: SphereLattice, out_prefix, view=None,
                        title: str = "") -> tuple[str, str]:
    """Write ``<prefix>.csv`` (k,x,y,z,p) and an orthographic ``<prefix>.svg``."""
    csv_path, svg_path = f"{out_prefix}.csv", f"{out_prefix}.svg"
    write_distribution_csv(p, lat, csv_path)
    view = np.array([0.3, -0.5, 1.0]) if view is None else view
    cv = Canvas(260, 280)
    sphere_panel(cv, lat.points, p.probs, 130, 125, 105, view, title)
    cv.save(svg_path)
    return csv_path, svg_path


def render_panel(lat: SphereLattice, out_prefix, R=None, i: int = 2,
                 pairs=RENDER_PAIRS, norm: NormalizationMode = NormalizationMode.linear(),
                 view=None) -> list[str]:
    """Side-by-side renders for several ``(lam, eta)`` pairs.

    Defaults to ``r_i = [0, 0, 1]`` viewed from slightly off the pole, one
    per-pair CSV plus a combined SVG.
    """
    R = np.eye(3) if R is None else np.asarray(R, dtype=float)
    view = np.array([0.3, -0.5, 1.0]) if view is None else view
    cv = Canvas(260 * len(pairs), 280)
    written = []
    for n, (lam, eta) in enumerate(pairs):
        p = encode(R, i, AsgParams(lam, eta), lat, norm)
        path = f"{out_prefix}_lam{lam:g}_eta{eta:g}.csv"
        write_distribution_csv(p, lat, path)
        written.append(path)
        sphere_panel(cv, lat.points, p.probs, 130 + 260 * n, 125, 105, view,
                     f"lambda={lam:g}, eta={eta:g}")
    cv.save(f"{out_prefix}.svg")
    written.append(f"{out_prefix}.svg")
    return written
