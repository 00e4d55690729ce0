"""Reading and writing pose records in each rotation representation.

CSV columns per representation (always preceded by ``id``)::

    euler   pitch,yaw,roll            degrees
    quat    w,x,y,z
    axis    ax,ay,az,theta_rad
    matrix  m00,m01,...,m22           row-major

JSON-lines records carry ``id`` plus ``{pitch, yaw, roll}``, ``{w, x, y, z}``,
``{axis: [3], theta_rad}`` or ``{matrix: [9]}`` (row-major).  Files ending in
``.csv`` are CSV; anything else is JSON lines.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .rotation import (AxisAngle, EulerAngles, Quaternion, as_rotation, from_matrix,
                       project_to_so3, to_matrix)

CSV_COLUMNS = {
    "euler": ["pitch", "yaw", "roll"],
    "quat": ["w", "x", "y", "z"],
    "axis": ["ax", "ay", "az", "theta_rad"],
    "matrix": [f"m{r}{c}" for r in range(3) for c in range(3)],
}
# tolerance for rotation matrices read from text files
INPUT_TOL = 1e-6


def value_from_record(kind: str, rec: dict):
    """Representation value from a JSON record."""
    if kind == "euler":
        return EulerAngles(float(rec["pitch"]), float(rec["yaw"]), float(rec["roll"]))
    if kind == "quat":
        return Quaternion(float(rec["w"]), float(rec["x"]), float(rec["y"]), float(rec["z"]))
    if kind == "axis":
        axis = [float(v) for v in rec["axis"]]
        if len(axis) != 3:
            raise ValidationError("axis must have 3 components")
        return AxisAngle(tuple(axis), float(rec["theta_rad"]))
    if kind == "matrix":
        m = [float(v) for v in rec["matrix"]]
        if len(m) != 9:
            raise ValidationError("matrix must have 9 row-major entries")
        return np.array(m).reshape(3, 3)
    raise ValidationError(f"unknown representation {kind!r}")


def record_from_value(kind: str, value) -> dict:
    if kind == "euler":
        return {"pitch": value.pitch, "yaw": value.yaw, "roll": value.roll}
    if kind == "quat":
        return {"w": value.w, "x": value.x, "y": value.y, "z": value.z}
    if kind == "axis":
        return {"axis": list(value.axis), "theta_rad": value.theta}
    if kind == "matrix":
        return {"matrix": [float(v) for v in np.asarray(value).reshape(9)]}
    raise ValidationError(f"unknown representation {kind!r}")


def _csv_to_record(kind: str, row: dict) -> dict:
    cols = CSV_COLUMNS[kind]
    vals = [float(row[c]) for c in cols]
    if kind == "axis":
        return {"axis": vals[:3], "theta_rad": vals[3]}
    if kind == "matrix":
        return {"matrix": vals}
    return dict(zip(cols, vals))


def _record_to_csv(kind: str, rec: dict) -> list:
    if kind == "axis":
        return [*rec["axis"], rec["theta_rad"]]
    if kind == "matrix":
        return list(rec["matrix"])
    return [rec[c] for c in CSV_COLUMNS[kind]]


def to_rotation(kind: str, value) -> np.ndarray:
    """Rotation matrix for a parsed value, cleaned onto SO(3)."""
    if kind == "matrix":
        return project_to_so3(as_rotation(value, INPUT_TOL))
    return to_matrix(value, kind)


def read_poses(path, kind: str) -> list[tuple[str, np.ndarray]]:
    """``(id, rotation matrix)`` pairs; errors name the offending line."""
    if kind not in CSV_COLUMNS:
        raise ValidationError(f"unknown representation {kind!r}")
    path = Path(path)
    out = []
    if path.suffix.lower() == ".csv":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            need = ["id", *CSV_COLUMNS[kind]]
            if reader.fieldnames is None or any(c not in reader.fieldnames for c in need):
                raise ValidationError(f"{path}: header must contain {','.join(need)}, "
                                      f"got {reader.fieldnames}")
            for line, row in enumerate(reader, start=2):
                try:
                    rec = _csv_to_record(kind, row)
                    out.append((row["id"], _checked(kind, rec)))
                except (TypeError, ValueError, KeyError) as exc:
                    raise ValidationError(f"{path}:{line}: cannot parse row: {exc}") from None
    else:
        with open(path) as fh:
            for line, text in enumerate(fh, start=1):
                if not text.strip():
                    continue
                try:
                    rec = json.loads(text)
                    out.append((str(rec["id"]), _checked(kind, rec)))
                except (TypeError, ValueError, KeyError) as exc:
                    raise ValidationError(f"{path}:{line}: cannot parse record: {exc}") from None
    return out


def _checked(kind: str, rec: dict) -> np.ndarray:
    value = value_from_record(kind, rec)
    if kind == "euler" and not all(math.isfinite(a) for a in value.as_tuple()):
        raise ValidationError("non-finite Euler angle")
    return to_rotation(kind, value)


def write_poses(path, kind: str, poses) -> None:
    """Write ``(id, rotation matrix)`` pairs in representation ``kind``."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["id", *CSV_COLUMNS[kind]])
            for pid, R in poses:
                rec = record_from_value(kind, from_matrix(R, kind))
                w.writerow([pid, *(repr(float(v)) for v in _record_to_csv(kind, rec))])
    else:
        with open(path, "w") as fh:
            for pid, R in poses:
                rec = {"id": pid, **record_from_value(kind, from_matrix(R, kind))}
                fh.write(json.dumps(rec) + "\n")


def read_matrix_json(path) -> np.ndarray:
    """A single rotation from ``{"matrix": [9]}`` or a bare 9-element (or 3x3) array."""
    with open(path) as fh:
        doc = json.load(fh)
    if isinstance(doc, dict):
        doc = doc.get("matrix")
    arr = np.asarray(doc, dtype=float)
    if arr.size != 9:
        raise ValidationError(f"{path}: expected a 9-element rotation matrix")
    return project_to_so3(as_rotation(arr.reshape(3, 3), INPUT_TOL))
