import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from asgldl.errors import ValidationError
from asgldl.metrics import evaluate_files, mae_euler, maev, summary_text, write_report_csv
from asgldl.poseio import read_poses, write_poses
from asgldl.rotation import (EulerAngles, euler_to_matrix, geodesic_distance_deg, random_rotations,
                             rot_x, rot_y, rot_z)

angles = st.floats(-180, 180, exclude_min=True)
eulers = st.builds(EulerAngles, angles, st.floats(-90, 90), angles)
rotations = st.integers(0, 2**32 - 1).map(
    lambda s: random_rotations(1, np.random.default_rng(s))[0])


def test_mae_examples():
    z = EulerAngles(0, 0, 0)
    assert mae_euler(z, z) == {"pitch_err": 0.0, "yaw_err": 0.0, "roll_err": 0.0, "mean": 0.0}
    e = mae_euler(EulerAngles(0, 179, 0), EulerAngles(0, -179, 0))
    assert e["yaw_err"] == pytest.approx(2.0, abs=1e-12)
    assert mae_euler(EulerAngles(10, 20, 30), z)["mean"] == pytest.approx(20.0, abs=1e-12)


@given(eulers, eulers)
def test_mae_symmetric_and_bounded(a, b):
    ab, ba = mae_euler(a, b), mae_euler(b, a)
    for k in ("pitch_err", "yaw_err", "roll_err"):
        assert 0.0 <= ab[k] <= 180.0
        assert ab[k] == pytest.approx(ba[k], abs=1e-12)


def test_maev_examples():
    R = random_rotations(1, np.random.default_rng(0))[0]
    assert maev(R, R)["mean"] == 0.0
    v = maev(rot_z(np.radians(10)), np.eye(3))
    assert v["left_err"] == pytest.approx(10.0, abs=1e-12)
    assert v["down_err"] == pytest.approx(10.0, abs=1e-12)
    assert v["front_err"] == pytest.approx(0.0, abs=1e-12)
    assert v["mean"] == pytest.approx(20 / 3, abs=1e-12)


@given(rotations, rotations)
def test_maev_symmetric(a, b):
    assert maev(a, b)["mean"] == pytest.approx(maev(b, a)["mean"], abs=1e-12)


@given(rotations, st.floats(1e-6, 1.0))
def test_maev_zero_iff_equal(R, small):
    assert maev(R, R)["mean"] == 0.0
    assert maev(R @ rot_x(small), R)["mean"] > 0.0


def test_maev_columns_bounded_by_geodesic():
    rng = np.random.default_rng(21)
    A, B = random_rotations(1000, rng), random_rotations(1000, rng)
    for a, b in zip(A, B):
        v, g = maev(a, b), geodesic_distance_deg(a, b)
        assert v["mean"] >= 0
        for k in ("left_err", "down_err", "front_err"):
            assert v[k] <= g + 1e-7


def write_euler(path, rows):
    path.write_text("id,pitch,yaw,roll\n" + "".join(f"{r[0]},{r[1]},{r[2]},{r[3]}\n" for r in rows))


def test_identical_files(tmp_path):
    rows = [("a", 10, 20, 30), ("b", -170, 5, 179), ("c", 0, 0, 0)]
    write_euler(tmp_path / "g.csv", rows)
    rep = evaluate_files(tmp_path / "g.csv", tmp_path / "g.csv", "euler")
    assert rep["n"] == 3
    assert rep["mae"]["mean"] == pytest.approx(0.0, abs=1e-9)
    assert rep["maev"]["mean"] == pytest.approx(0.0, abs=1e-9)


def test_single_record_yaw_offset(tmp_path):
    write_euler(tmp_path / "g.csv", [("a", 5, 10, -20)])
    write_euler(tmp_path / "p.csv", [("a", 5, 20, -20)])
    rep = evaluate_files(tmp_path / "p.csv", tmp_path / "g.csv", "euler")
    assert rep["records"][0]["mae"] == pytest.approx(10 / 3, abs=1e-9)
    assert rep["mae"]["mean"] == pytest.approx(10 / 3, abs=1e-9)


def test_three_record_fixture(tmp_path):
    # gt = identity; pred = 10 deg about z, 20 about x, 30 about y
    gt = [(k, np.eye(3)) for k in "abc"]
    pred = [("a", rot_z(np.radians(10))), ("b", rot_x(np.radians(20))), ("c", rot_y(np.radians(30)))]
    write_poses(tmp_path / "g.jsonl", "matrix", gt)
    write_poses(tmp_path / "p.jsonl", "matrix", pred)
    rep = evaluate_files(tmp_path / "p.jsonl", tmp_path / "g.jsonl", "matrix")
    # hand computation: per-record MAE 10/3, 20/3, 30/3; MAEV 20/3, 40/3, 60/3
    assert [r["mae"] for r in rep["records"]] == pytest.approx([10 / 3, 20 / 3, 10.0], abs=1e-9)
    assert [r["maev"] for r in rep["records"]] == pytest.approx([20 / 3, 40 / 3, 20.0], abs=1e-9)
    assert rep["mae"]["mean"] == pytest.approx(20 / 3, abs=1e-9)
    assert rep["maev"]["mean"] == pytest.approx(40 / 3, abs=1e-9)
    assert rep["mae"]["roll_err"] == pytest.approx(10 / 3, abs=1e-9)
    assert rep["maev"]["front_err"] == pytest.approx(50 / 3, abs=1e-9)

    write_report_csv(rep, tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0].startswith("id,pitch_err") and lines[-1].startswith("__mean__,")
    assert len(lines) == 5
    assert "records: 3" in summary_text(rep)


def test_wraparound_in_files(tmp_path):
    write_euler(tmp_path / "g.csv", [("a", 0, 0, -179)])
    write_euler(tmp_path / "p.csv", [("a", 0, 0, 179)])
    rep = evaluate_files(tmp_path / "p.csv", tmp_path / "g.csv", "euler")
    assert rep["mae"]["roll_err"] == pytest.approx(2.0, abs=1e-9)


def test_missing_ids_listed(tmp_path):
    write_euler(tmp_path / "g.csv", [("a", 0, 0, 0), ("b", 0, 0, 0), ("c", 0, 0, 0)])
    write_euler(tmp_path / "p.csv", [("a", 0, 0, 0), ("z", 0, 0, 0)])
    with pytest.raises(ValidationError, match="b, c.*z"):
        evaluate_files(tmp_path / "p.csv", tmp_path / "g.csv", "euler")


def test_duplicate_ids_listed(tmp_path):
    write_euler(tmp_path / "g.csv", [("a", 0, 0, 0), ("b", 0, 0, 0)])
    write_euler(tmp_path / "p.csv", [("a", 0, 0, 0), ("b", 0, 0, 0), ("b", 1, 0, 0)])
    with pytest.raises(ValidationError, match="duplicate ids.*b"):
        evaluate_files(tmp_path / "p.csv", tmp_path / "g.csv", "euler")


def test_unparsable_csv_row_has_line_number(tmp_path):
    (tmp_path / "p.csv").write_text("id,pitch,yaw,roll\na,0,0,0\nb,zero,0,0\n")
    with pytest.raises(ValidationError, match=r"p\.csv:3"):
        read_poses(tmp_path / "p.csv", "euler")


def test_unparsable_jsonl_record_has_line_number(tmp_path):
    good = json.dumps({"id": "a", "matrix": np.eye(3).ravel().tolist()})
    bad = json.dumps({"id": "b", "matrix": [1, 0, 0, 0, 1, 0, 0, 0, 5]})
    (tmp_path / "p.jsonl").write_text(good + "\n" + good.replace('"a"', '"c"') + "\n" + bad + "\n")
    with pytest.raises(ValidationError, match=r"p\.jsonl:3"):
        read_poses(tmp_path / "p.jsonl", "matrix")
    (tmp_path / "q.jsonl").write_text("{not json\n")
    with pytest.raises(ValidationError, match=r"q\.jsonl:1"):
        read_poses(tmp_path / "q.jsonl", "matrix")


def test_bad_header(tmp_path):
    (tmp_path / "p.csv").write_text("id,a,b\n1,2,3\n")
    with pytest.raises(ValidationError, match="header"):
        read_poses(tmp_path / "p.csv", "euler")


@pytest.mark.parametrize("kind", ["euler", "quat", "axis", "matrix"])
@pytest.mark.parametrize("suffix", [".csv", ".jsonl"])
def test_pose_file_round_trip(tmp_path, kind, suffix):
    Rs = random_rotations(20, np.random.default_rng(2))
    poses = [(f"r{n}", R) for n, R in enumerate(Rs)]
    write_poses(tmp_path / f"x{suffix}", kind, poses)
    back = read_poses(tmp_path / f"x{suffix}", kind)
    assert [p for p, _ in back] == [p for p, _ in poses]
    for (_, a), (_, b) in zip(back, poses):
        assert geodesic_distance_deg(a, b) <= 1e-8


def test_euler_angles_mixed_representations(tmp_path):
    R = euler_to_matrix(EulerAngles(12, -40, 100))
    write_poses(tmp_path / "g.csv", "euler", [("a", R)])
    write_poses(tmp_path / "p.csv", "euler", [("a", R)])
    rep = evaluate_files(tmp_path / "p.csv", tmp_path / "g.csv", "euler")
    assert rep["mae"]["mean"] <= 1e-9
