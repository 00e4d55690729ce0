import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from asgldl.errors import ValidationError
from asgldl.lattice import (fibonacci_sphere, neighbor_angle_stats, spacing_curve,
                            write_points_csv, write_spacing_csv)


def brute_force_nn_angles(points):
    """Exhaustive pairwise nearest-neighbour angle, chunked to bound memory."""
    out = np.empty(len(points))
    for s in range(0, len(points), 500):
        G = points[s:s + 500] @ points.T
        for r in range(G.shape[0]):
            G[r, s + r] = -np.inf
        out[s:s + 500] = np.degrees(np.arccos(np.clip(G.max(axis=1), -1.0, 1.0)))
    return out


def test_m1_equator():
    lat = fibonacci_sphere(1)
    assert lat.m == 1
    assert lat.points[0, 2] == 0.0


def test_m2_symmetric():
    z = sorted(fibonacci_sphere(2).points[:, 2])
    assert z == pytest.approx([-0.5, 0.5], abs=1e-15)


@pytest.mark.parametrize("bad", [0, -3, 2.5, True])
def test_invalid_m(bad):
    with pytest.raises(ValidationError):
        fibonacci_sphere(bad)


def test_formula_matches_definition():
    m = 37
    pts = fibonacci_sphere(m).points
    phi_g = (1 + math.sqrt(5)) / 2
    for k in range(m):
        z = 1 - (2 * k + 1) / m
        rho = math.sqrt(1 - z * z)
        az = 2 * math.pi * k * (2 - phi_g)
        np.testing.assert_allclose(pts[k], [rho * math.cos(az), rho * math.sin(az), z], atol=1e-14)


@given(st.integers(1, 3000))
def test_unit_norm(m):
    pts = fibonacci_sphere(m).points
    assert np.abs(np.linalg.norm(pts, axis=1) - 1).max() <= 1e-12


def test_distinct_and_deterministic():
    a = fibonacci_sphere(500).points
    b = fibonacci_sphere(500).points
    assert a.tobytes() == b.tobytes()
    assert len(np.unique(a.round(12), axis=0)) == 500


def test_points_are_read_only():
    with pytest.raises(ValueError):
        fibonacci_sphere(10).points[0, 0] = 1.0


def test_centroid():
    assert np.linalg.norm(fibonacci_sphere(600).points.mean(0)) < 5e-3
    assert np.linalg.norm(fibonacci_sphere(6000).points.mean(0)) < 5e-4


@pytest.mark.parametrize("m", [2, 10, 100, 600, 2400])
def test_stats_match_brute_force(m):
    lat = fibonacci_sphere(m)
    ref = brute_force_nn_angles(lat.points)
    s = neighbor_angle_stats(lat)
    assert s["min"] == pytest.approx(ref.min(), abs=1e-9)
    assert s["mean"] == pytest.approx(ref.mean(), abs=1e-9)
    assert s["max"] == pytest.approx(ref.max(), abs=1e-9)


def test_m2_single_pair():
    s = neighbor_angle_stats(fibonacci_sphere(2))
    assert s["min"] == s["mean"] == s["max"]


def test_m600_near_uniform_estimate():
    mean = neighbor_angle_stats(fibonacci_sphere(600))["mean"]
    estimate = math.degrees(math.sqrt(4 * math.pi / 600))
    assert abs(mean - estimate) / estimate < 0.25


def test_spacing_halves_with_4x_points():
    a = neighbor_angle_stats(fibonacci_sphere(600))["mean"]
    b = neighbor_angle_stats(fibonacci_sphere(2400))["mean"]
    assert 0.45 <= b / a <= 0.55


@pytest.mark.parametrize("m", [100, 250, 600, 1000, 2400])
def test_near_equidistant(m):
    s = neighbor_angle_stats(fibonacci_sphere(m))
    assert s["max"] / s["min"] <= 2.5


def test_stats_need_two_points():
    with pytest.raises(ValidationError):
        neighbor_angle_stats(fibonacci_sphere(1))


def test_spacing_curve():
    assert len(spacing_curve([2])) == 1
    rows = spacing_curve([100, 400, 1600])
    angles = [a for _, a in rows]
    assert angles[0] > angles[1] > angles[2]
    # operating point used for training
    (m, a), = spacing_curve([600])
    assert m == 600 and 7.0 < a < 9.0
    with pytest.raises(ValidationError):
        spacing_curve([100, 1])


def test_csv_writers(tmp_path):
    write_points_csv(fibonacci_sphere(5), tmp_path / "p.csv")
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "x,y,z" and len(lines) == 6
    back = np.array([[float(v) for v in l.split(",")] for l in lines[1:]])
    assert back.tobytes() == fibonacci_sphere(5).points.tobytes()
    write_spacing_csv(spacing_curve([10, 20]), tmp_path / "c.csv")
    assert (tmp_path / "c.csv").read_text().startswith("m,mean_angle_deg\n10,")
