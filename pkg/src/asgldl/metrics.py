"""Orientation error metrics: MAE over Euler angles and MAEV over pose vectors."""

from __future__ import annotations

import csv
from collections import Counter

import numpy as np

from .errors import ValidationError
from .poseio import read_poses
from .rotation import EulerAngles, matrix_to_euler, vector_angle_deg, wrap_deg

VECTOR_NAMES = ("left", "down", "front")


def mae_euler(pred: EulerAngles, gt: EulerAngles) -> dict[str, float]:
    """Absolute angle errors with wraparound, so 179 vs -179 is 2 degrees."""
    d = np.abs(wrap_deg(np.subtract(pred.as_tuple(), gt.as_tuple())))
    return {"pitch_err": float(d[0]), "yaw_err": float(d[1]), "roll_err": float(d[2]),
            "mean": float(d.mean())}


def maev(pred, gt) -> dict[str, float]:
    """Angle between matching columns (left, down, front pose vectors)."""
    pred = np.asarray(pred, dtype=float)
    gt = np.asarray(gt, dtype=float)
    err = vector_angle_deg(pred.T, gt.T)
    out = {f"{name}_err": float(e) for name, e in zip(VECTOR_NAMES, err)}
    out["mean"] = float(err.mean())
    return out


def _index(poses, label: str) -> dict:
    counts = Counter(pid for pid, _ in poses)
    dupes = sorted(pid for pid, n in counts.items() if n > 1)
    if dupes:
        raise ValidationError(f"duplicate ids in {label}: {', '.join(dupes)}")
    return dict(poses)


def evaluate_poses(pred: dict, gt: dict) -> dict:
    missing_pred = sorted(set(gt) - set(pred))
    missing_gt = sorted(set(pred) - set(gt))
    if missing_pred or missing_gt:
        parts = []
        if missing_pred:
            parts.append(f"missing from predictions: {', '.join(missing_pred)}")
        if missing_gt:
            parts.append(f"missing from ground truth: {', '.join(missing_gt)}")
        raise ValidationError("; ".join(parts))
    records = []
    for pid in gt:  # ground-truth file order
        e = mae_euler(matrix_to_euler(pred[pid]), matrix_to_euler(gt[pid]))
        v = maev(pred[pid], gt[pid])
        records.append({"id": pid, "pitch_err": e["pitch_err"], "yaw_err": e["yaw_err"],
                        "roll_err": e["roll_err"], "mae": e["mean"],
                        "left_err": v["left_err"], "down_err": v["down_err"],
                        "front_err": v["front_err"], "maev": v["mean"]})
    cols = ["pitch_err", "yaw_err", "roll_err", "mae", "left_err", "down_err", "front_err", "maev"]
    agg = {c: float(np.mean([r[c] for r in records])) if records else 0.0 for c in cols}
    return {"records": records, "n": len(records),
            "mae": {k: agg[k] for k in ("pitch_err", "yaw_err", "roll_err")} | {"mean": agg["mae"]},
            "maev": {k: agg[k] for k in ("left_err", "down_err", "front_err")} | {"mean": agg["maev"]}}


def evaluate_files(pred_path, gt_path, fmt: str) -> dict:
    """Join prediction and ground-truth files by id and aggregate MAE and MAEV.

    ``fmt`` names the representation of both files (``euler`` CSV or
    ``matrix`` JSON lines in the usual case; see :mod:`asgldl.poseio`).
    Euler errors are taken between the canonical Euler angles of the two
    rotations.
    """
    pred = _index(read_poses(pred_path, fmt), str(pred_path))
    gt = _index(read_poses(gt_path, fmt), str(gt_path))
    return evaluate_poses(pred, gt)


def write_report_csv(report: dict, path) -> None:
    cols = ["id", "pitch_err", "yaw_err", "roll_err", "mae",
            "left_err", "down_err", "front_err", "maev"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in report["records"]:
            w.writerow([r["id"], *(repr(r[c]) for c in cols[1:])])
        w.writerow(["__mean__", report["mae"]["pitch_err"], report["mae"]["yaw_err"],
                    report["mae"]["roll_err"], report["mae"]["mean"],
                    report["maev"]["left_err"], report["maev"]["down_err"],
                    report["maev"]["front_err"], report["maev"]["mean"]])


def summary_text(report: dict) -> str:
    m, v = report["mae"], report["maev"]
    return (f"records: {report['n']}\n"
            f"MAE  (deg)  pitch {m['pitch_err']:.4f}  yaw {m['yaw_err']:.4f}  "
            f"roll {m['roll_err']:.4f}  mean {m['mean']:.4f}\n"
            f"MAEV (deg)  left {v['left_err']:.4f}  down {v['down_err']:.4f}  "
            f"front {v['front_err']:.4f}  mean {v['mean']:.4f}\n")
