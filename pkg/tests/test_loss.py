import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from asgldl.asg import AsgParams, NormalizationMode, PoseDistribution, encode
from asgldl.errors import ValidationError
from asgldl.lattice import fibonacci_sphere
from asgldl.loss import (EPS_MIN, HeadOutput, central_difference, check_head_config,
                         finite_diff_check, gradcheck, head_loss, head_loss_grad, kl_div,
                         loss_and_grad_batch, mse_vec, random_head_config, softplus_params)
from asgldl.rotation import random_rotations

SOFTMAX = NormalizationMode.softmax(1.0)
LINEAR = NormalizationMode.linear()


def naive_kl(p, q):
    total = 0.0
    for a, b in zip(p, q):
        if a > 0:
            total += a * math.log(a / max(b, 1e-12))
    return total


def test_softplus_params_examples():
    p = softplus_params(0.0, 0.0)
    assert p.lam == pytest.approx(math.log(2) + 0.001, abs=1e-15)
    assert p.lam == pytest.approx(0.69415, abs=5e-6)
    assert softplus_params(-100.0, 0.0).lam == pytest.approx(EPS_MIN, abs=1e-12)
    assert softplus_params(10.0, 10.0).eta == pytest.approx(10.001, abs=1e-4)


@given(st.floats(-50, 50), st.floats(-50, 50))
def test_softplus_positive_monotone(a, b):
    lo, hi = sorted((a, b))
    assert softplus_params(lo, 0).lam > 0
    assert softplus_params(hi, 0).lam >= softplus_params(lo, 0).lam


def test_kl_examples(rng):
    p = rng.dirichlet(np.ones(600))
    assert kl_div(p, p) == 0.0
    assert kl_div([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2), abs=1e-15)
    q = rng.dirichlet(np.ones(600))
    assert kl_div(p, q) == pytest.approx(naive_kl(p, q), abs=1e-12)
    with pytest.raises(ValidationError):
        kl_div([1.0, 0.0], [1.0, 0.0, 0.0])


@given(st.integers(0, 2**32 - 1))
def test_kl_nonnegative(seed):
    rng = np.random.default_rng(seed)
    p, q = rng.dirichlet(np.full(30, 0.3), size=2)
    assert kl_div(p, q) >= 0.0


def test_kl_accepts_distributions(lat600):
    p = encode(np.eye(3), 0, AsgParams(2, 2), lat600)
    assert kl_div(p, p) == 0.0


def test_mse_examples():
    assert mse_vec([1, 0, 0], [1, 0, 0]) == 0.0
    assert mse_vec([1, 0, 0], [0, 1, 0]) == pytest.approx(2 / 3, abs=1e-15)
    assert mse_vec([0, 0, 1], [0, 0, 0.9]) == pytest.approx(0.01 / 3, abs=1e-15)


def test_matching_logits_give_zero_cls(lat600, rng):
    R = random_rotations(1, rng)[0]
    params = softplus_params(0.7, 1.9)
    P = encode(R, 1, params, lat600, SOFTMAX).probs
    h = HeadOutput(np.log(P) + 3.25, 0.7, 1.9)
    assert abs(head_loss(h, R, 1, lat600, 0.2, SOFTMAX).cls) <= 1e-10


def test_uniform_logits_oracle(lat600):
    raw = math.log(math.expm1(5.0 - EPS_MIN))  # inverse softplus so that lam = eta = 5
    h = HeadOutput(np.zeros(600), raw, raw)
    got = head_loss(h, np.eye(3), 2, lat600, 0.2, SOFTMAX)
    G = []
    for x, y, z in lat600.points:
        G.append(max(z, 0.0) * math.exp(-5.0 * x * x - 5.0 * y * y))
    e = [math.exp(g) for g in G]
    P = [v / math.fsum(e) for v in e]
    cls = naive_kl(P, [1 / 600] * 600)
    centroid = [math.fsum(lat600.points[:, c]) / 600 for c in range(3)]
    reg = ((0 - centroid[0]) ** 2 + (0 - centroid[1]) ** 2 + (1 - centroid[2]) ** 2) / 3
    assert got.cls == pytest.approx(cls, abs=1e-12)
    assert got.reg == pytest.approx(reg, abs=1e-12)
    assert got.total == pytest.approx(cls + 0.2 * reg, abs=1e-12)


@pytest.mark.parametrize("mode", [SOFTMAX, LINEAR])
def test_breakdown_invariants(mode):
    cfg = random_head_config(4, 60, 0.35, mode)
    b = head_loss(cfg.output, cfg.R, cfg.i, cfg.lat, cfg.alpha, mode)
    assert b.cls >= 0 and b.reg >= 0
    assert abs(b.total - (b.cls + b.alpha * b.reg)) <= 1e-12
    b0 = head_loss(cfg.output, cfg.R, cfg.i, cfg.lat, 0.0, mode)
    assert b0.total == b0.cls


def test_alpha_range():
    cfg = random_head_config(0)
    with pytest.raises(ValidationError):
        head_loss(cfg.output, cfg.R, cfg.i, cfg.lat, 1.5)


def test_length_mismatch():
    cfg = random_head_config(0, m=60)
    with pytest.raises(ValidationError):
        head_loss(cfg.output, cfg.R, cfg.i, fibonacci_sphere(61))
    with pytest.raises(ValidationError):
        HeadOutput.from_vector([1.0, 2.0])


def test_head_output_vector_round_trip():
    v = np.arange(12, dtype=float)
    h = HeadOutput.from_vector(v)
    assert h.m == 10 and h.raw_lambda == 10.0 and h.raw_eta == 11.0
    np.testing.assert_array_equal(h.to_vector(), v)


@given(st.integers(0, 10_000), st.floats(-20, 20), st.sampled_from([SOFTMAX, LINEAR]))
def test_shift_invariance(seed, shift, mode):
    cfg = random_head_config(seed, 60, 0.2, mode)
    h = cfg.output
    moved = HeadOutput(h.logits + shift, h.raw_lambda, h.raw_eta)
    a = head_loss(h, cfg.R, cfg.i, cfg.lat, cfg.alpha, mode)
    b = head_loss(moved, cfg.R, cfg.i, cfg.lat, cfg.alpha, mode)
    assert abs(a.total - b.total) <= 1e-10


@given(st.integers(0, 10_000), st.sampled_from([SOFTMAX, LINEAR]))
def test_logit_gradient_mean_free(seed, mode):
    cfg = random_head_config(seed, 60, 0.2, mode)
    g = head_loss_grad(cfg.output, cfg.R, cfg.i, cfg.lat, cfg.alpha, mode)
    assert abs(g[:-2].sum()) <= 1e-10


def test_stationary_point(lat600, rng):
    # only softmax mode keeps P > 0 everywhere, so log P exists for every logit
    R = random_rotations(1, rng)[0]
    P = encode(R, 0, softplus_params(0.3, 2.2), lat600, SOFTMAX).probs
    g = head_loss_grad(HeadOutput(np.log(P) - 1.0, 0.3, 2.2), R, 0, lat600, 0.0, SOFTMAX)
    assert np.abs(g[:-2]).max() <= 1e-9
    assert abs(g[-2]) <= 1e-9 and abs(g[-1]) <= 1e-9


def test_gradient_at_minimum_sums_to_zero(lat600):
    P = encode(np.eye(3), 2, softplus_params(1.0, 1.0), lat600, SOFTMAX).probs
    g = head_loss_grad(HeadOutput(np.log(P), 1.0, 1.0), np.eye(3), 2, lat600, 0.2, SOFTMAX)
    assert abs(g[:-2].sum()) <= 1e-10


@pytest.mark.parametrize("mode", [SOFTMAX, LINEAR, NormalizationMode.softmax(5.0)])
def test_gradient_matches_finite_differences(mode):
    rep = gradcheck(m=60, seeds=20, step=1e-5, alpha=0.2, norm=mode)
    assert rep["max_rel_err"] <= 1e-5
    assert len(rep["per_seed"]) == 20


def test_raw_parameters_receive_gradient():
    cfg = random_head_config(2)
    g = head_loss_grad(cfg.output, cfg.R, cfg.i, cfg.lat, cfg.alpha, cfg.norm)
    assert abs(g[-2]) > 1e-6 and abs(g[-1]) > 1e-6


def test_finite_diff_linear_function():
    a = np.array([3.0, -2.0, 0.5, 7.25])
    rep = finite_diff_check(lambda x: float(a @ x) + 4.0, np.array([0.1, 2.0, -3.0, 1.0]), a)
    assert rep.max_rel_err <= 1e-10


def test_finite_diff_step_range():
    with pytest.raises(ValidationError):
        finite_diff_check(np.sum, np.zeros(2), np.ones(2), step=0.0)
    with pytest.raises(ValidationError):
        finite_diff_check(np.sum, np.zeros(2), np.ones(2), step=0.05)


def test_finite_diff_reports_worst_component():
    rep = finite_diff_check(lambda x: float(x @ x), np.array([1.0, 2.0]), np.array([2.0, 5.0]))
    assert rep.worst_component == 1
    assert rep.max_rel_err == pytest.approx(1 / 5, rel=1e-6)


def test_central_difference_quadratic_error_scaling():
    # sin(10 x): third derivative is large enough that truncation dominates at both steps
    x0 = np.array([0.3, -1.1, 2.0])
    exact = 10 * np.cos(10 * x0)

    def f(x):
        return float(np.sum(np.sin(10 * x)))

    e3 = np.abs(central_difference(f, x0, 1e-3) - exact).max()
    e5 = np.abs(central_difference(f, x0, 1e-5) - exact).max()
    assert 1e4 / 5 <= e3 / e5 <= 1e4 * 5


def test_head_loss_error_scaling():
    # on the head loss, step 1e-5 already sits at the round-off floor, so compare 1e-3 vs 1e-4
    cfg = random_head_config(1)
    x0 = cfg.output.to_vector()
    exact = head_loss_grad(cfg.output, cfg.R, cfg.i, cfg.lat, cfg.alpha, cfg.norm)

    def f(x):
        return head_loss(HeadOutput.from_vector(x), cfg.R, cfg.i, cfg.lat, cfg.alpha,
                         cfg.norm).total

    e3 = np.abs(central_difference(f, x0, 1e-3) - exact).max()
    e4 = np.abs(central_difference(f, x0, 1e-4) - exact).max()
    assert 100 / 5 <= e3 / e4 <= 100 * 5


def test_gradcheck_deterministic():
    a = check_head_config(random_head_config(9))
    b = check_head_config(random_head_config(9))
    assert a.max_rel_err == b.max_rel_err
    np.testing.assert_array_equal(a.numeric, b.numeric)


@pytest.mark.parametrize("mode", [SOFTMAX, LINEAR])
def test_batch_matches_single(mode):
    lat = fibonacci_sphere(60)
    rng = np.random.default_rng(5)
    R = random_rotations(8, rng)
    out = np.column_stack([rng.normal(size=(8, 60)), rng.uniform(-1, 3, size=(8, 2))])
    cls, reg, grad = loss_and_grad_batch(out, R, 1, lat.points, 0.2, mode)
    for b in range(8):
        h = HeadOutput.from_vector(out[b])
        single = head_loss(h, R[b], 1, lat, 0.2, mode)
        assert cls[b] == pytest.approx(single.cls, abs=1e-13)
        assert reg[b] == pytest.approx(single.reg, abs=1e-15)
        np.testing.assert_allclose(grad[b], head_loss_grad(h, R[b], 1, lat, 0.2, mode),
                                   atol=1e-14)


def test_fixed_params_zero_raw_gradient():
    lat = fibonacci_sphere(60)
    rng = np.random.default_rng(6)
    R = random_rotations(4, rng)
    out = rng.normal(size=(4, 62))
    _, _, g = loss_and_grad_batch(out, R, 0, lat.points, 0.2, SOFTMAX, fixed=AsgParams(1, 1))
    assert np.all(g[:, -2:] == 0.0)
    # the fixed target ignores the raw slots entirely
    out2 = out.copy()
    out2[:, -2:] += 3.0
    a = loss_and_grad_batch(out, R, 0, lat.points, 0.2, SOFTMAX, fixed=AsgParams(1, 1))
    b = loss_and_grad_batch(out2, R, 0, lat.points, 0.2, SOFTMAX, fixed=AsgParams(1, 1))
    np.testing.assert_array_equal(a[0], b[0])


def test_pose_distribution_input_to_kl():
    p = PoseDistribution(np.array([0.25, 0.75]), 2, 0)
    q = PoseDistribution(np.array([0.5, 0.5]), 2, 0)
    assert kl_div(p, q) == pytest.approx(0.25 * math.log(0.5) + 0.75 * math.log(1.5), abs=1e-15)
