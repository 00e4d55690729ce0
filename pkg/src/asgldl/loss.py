"""Per-head training loss ``KL(P || Q) + alpha * MSE(r_i, r_hat)`` and its gradient.

A head emits ``M + 2`` numbers: ``M`` logits (softmax gives ``Q``) and two raw
values mapped through softplus to the ASG concentrations ``(lam, eta)``.  The
target ``P`` is the ASG distribution of the ground-truth pose vector built
with those predicted concentrations, so the loss depends on the raw values
through ``P`` and the gradient flows into them as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import expit

from .asg import AsgParams, NormalizationMode, PoseDistribution, kernel_terms, normalize
from .errors import ValidationError
from .lattice import SphereLattice, fibonacci_sphere
from .rotation import random_rotations

EPS_MIN = 1e-3  # floor added to softplus so lam, eta stay strictly positive
Q_FLOOR = 1e-12  # clamp on Q inside the log


@dataclass(frozen=True, eq=False)
class HeadOutput:
    logits: np.ndarray
    raw_lambda: float
    raw_eta: float

    @classmethod
    def from_vector(cls, v) -> "HeadOutput":
        v = np.asarray(v, dtype=float)
        if v.ndim != 1 or v.size < 3:
            raise ValidationError("head output must be a 1-D vector of length M + 2")
        return cls(v[:-2].copy(), float(v[-2]), float(v[-1]))

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.logits, [self.raw_lambda, self.raw_eta]])

    @property
    def m(self) -> int:
        return len(self.logits)


@dataclass(frozen=True)
class LossBreakdown:
    cls: float
    reg: float
    total: float
    alpha: float


def softplus(x):
    return np.logaddexp(0.0, x)


def softplus_params(raw_lambda: float, raw_eta: float) -> AsgParams:
    return AsgParams(float(softplus(raw_lambda) + EPS_MIN), float(softplus(raw_eta) + EPS_MIN))


def softmax(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def _probs(p) -> np.ndarray:
    return p.probs if isinstance(p, PoseDistribution) else np.asarray(p, dtype=float)


def kl_div(p, q) -> float:
    """``sum p log(p / q)`` with ``0 log 0 = 0`` and ``q`` clamped at 1e-12."""
    p, q = _probs(p), _probs(q)
    if p.shape != q.shape:
        raise ValidationError(f"KL needs equal lengths, got {p.shape} and {q.shape}")
    mask = p > 0
    return float(np.sum(p[mask] * (np.log(p[mask]) - np.log(np.maximum(q[mask], Q_FLOOR)))))


def mse_vec(r, r_hat) -> float:
    d = np.asarray(r, dtype=float) - np.asarray(r_hat, dtype=float)
    return float(np.mean(d * d))


def _check_alpha(alpha: float) -> None:
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError(f"alpha must lie in [0, 1], got {alpha}")


def loss_and_grad_batch(outputs: np.ndarray, R: np.ndarray, i: int, points: np.ndarray,
                        alpha: float, norm: NormalizationMode, fixed: AsgParams | None = None,
                        want_grad: bool = True):
    """Vectorized head loss over a batch.

    Parameters
    ----------
    outputs : (B, M + 2) raw head outputs.
    R : (B, 3, 3) ground-truth rotations.
    i : head index.
    points : (M, 3) lattice points.
    fixed : if given, ``(lam, eta)`` are these constants and the two raw
        slots get zero gradient.

    Returns
    -------
    cls, reg : (B,) loss terms.
    grad : (B, M + 2) gradient of ``cls + alpha * reg``, or None.
    """
    _check_alpha(alpha)
    outputs = np.asarray(outputs, dtype=float)
    m = points.shape[0]
    if outputs.shape[-1] != m + 2:
        raise ValidationError(f"head output has length {outputs.shape[-1]}, expected M + 2 = {m + 2}")
    logits = outputs[:, :m]
    raw_l, raw_e = outputs[:, m], outputs[:, m + 1]
    if fixed is None:
        lam = softplus(raw_l) + EPS_MIN
        eta = softplus(raw_e) + EPS_MIN
    else:
        lam = np.full(len(outputs), fixed.lam)
        eta = np.full(len(outputs), fixed.eta)

    Q = softmax(logits)
    smooth, u2, w2 = kernel_terms(points, R, i)
    G = smooth * np.exp(-lam[:, None] * u2 - eta[:, None] * w2)
    P = normalize(G, norm)

    live = P > 0
    logP = np.log(np.where(live, P, 1.0))
    logq = np.log(np.maximum(Q, Q_FLOOR))
    cls = np.sum(np.where(live, P * (logP - logq), 0.0), axis=1)
    r = R[:, :, i]
    diff = Q @ points - r
    reg = np.mean(diff * diff, axis=1)
    if not want_grad:
        return cls, reg, None

    # d/dQ, then through the softmax Jacobian
    gQ = np.where(Q > Q_FLOOR, -P / np.maximum(Q, Q_FLOOR), 0.0)
    gQ += alpha * (2.0 / 3.0) * (diff @ points.T)
    g_logits = Q * (gQ - np.sum(Q * gQ, axis=1, keepdims=True))

    grad = np.zeros_like(outputs)
    grad[:, :m] = g_logits
    if fixed is None:
        # d/dP of sum P (log P - log q), then through the normalization
        gP = np.where(live, logP + 1.0 - logq, 0.0)
        centred = gP - np.sum(P * gP, axis=1, keepdims=True)
        if norm.kind == "linear":
            gG = centred / G.sum(axis=1, keepdims=True)
        else:
            gG = norm.c * P * centred
        d_lam = -np.sum(gG * u2 * G, axis=1)
        d_eta = -np.sum(gG * w2 * G, axis=1)
        grad[:, m] = d_lam * expit(raw_l)
        grad[:, m + 1] = d_eta * expit(raw_e)
    return cls, reg, grad


def _single(h: HeadOutput, R, i: int, lat: SphereLattice, alpha: float,
            norm: NormalizationMode, want_grad: bool):
    if h.m != lat.m:
        raise ValidationError(f"head output has {h.m} logits but the lattice has {lat.m} points")
    R = np.asarray(R, dtype=float)[None]
    return loss_and_grad_batch(h.to_vector()[None], R, i, lat.points, alpha, norm,
                               want_grad=want_grad)


def head_loss(h: HeadOutput, R, i: int, lat: SphereLattice, alpha: float = 0.2,
              norm: NormalizationMode = NormalizationMode()) -> LossBreakdown:
    cls, reg, _ = _single(h, R, i, lat, alpha, norm, want_grad=False)
    c, r = float(cls[0]), float(reg[0])
    return LossBreakdown(c, r, c + alpha * r, alpha)


def head_loss_grad(h: HeadOutput, R, i: int, lat: SphereLattice, alpha: float = 0.2,
                   norm: NormalizationMode = NormalizationMode()) -> np.ndarray:
    """Gradient of the head total with respect to the ``M + 2`` raw outputs."""
    return _single(h, R, i, lat, alpha, norm, want_grad=True)[2][0]


@dataclass
class FDReport:
    max_rel_err: float
    worst_component: int
    analytic: np.ndarray
    numeric: np.ndarray


def central_difference(f: Callable[[np.ndarray], float], x0, step: float) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float)
    g = np.empty_like(x0)
    x = x0.copy()
    for n in range(x0.size):
        x[n] = x0[n] + step
        fp = f(x)
        x[n] = x0[n] - step
        fm = f(x)
        x[n] = x0[n]
        g[n] = (fp - fm) / (2.0 * step)
    return g


def relative_error(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Componentwise ``|a - b| / max(|a|, |b|, 1e-8 * ||a||_inf, 1e-12)``.

    The floor only matters for components that are exactly or almost zero,
    where both sides are pure round-off.
    """
    floor = max(1e-8 * float(np.max(np.abs(a))), 1e-12)
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)


def finite_diff_check(f: Callable[[np.ndarray], float], x0, grad, step: float = 1e-5) -> FDReport:
    """Compare an analytic gradient against central differences of ``f`` at ``x0``."""
    if not 0.0 < step <= 1e-2:
        raise ValidationError(f"finite-difference step must lie in (0, 1e-2], got {step}")
    analytic = np.asarray(grad(x0) if callable(grad) else grad, dtype=float)
    numeric = central_difference(f, x0, step)
    err = relative_error(analytic, numeric)
    worst = int(np.argmax(err))
    return FDReport(float(err[worst]), worst, analytic, numeric)


@dataclass(frozen=True, eq=False)
class HeadConfig:
    output: HeadOutput
    R: np.ndarray
    i: int
    lat: SphereLattice
    alpha: float
    norm: NormalizationMode


def random_head_config(seed: int, m: int = 60, alpha: float = 0.2,
                       norm: NormalizationMode = NormalizationMode()) -> HeadConfig:
    """Seeded head-loss evaluation point for gradient checking."""
    rng = np.random.default_rng(seed)
    R = random_rotations(1, rng)[0]
    i = int(rng.integers(3))
    logits = rng.normal(0.0, 1.5, size=m)
    raw = rng.uniform(-1.0, 4.0, size=2)
    return HeadConfig(HeadOutput(logits, float(raw[0]), float(raw[1])), R, i,
                      fibonacci_sphere(m), alpha, norm)


def check_head_config(cfg: HeadConfig, step: float = 1e-5) -> FDReport:
    def f(x):
        return head_loss(HeadOutput.from_vector(x), cfg.R, cfg.i, cfg.lat, cfg.alpha,
                         cfg.norm).total

    x0 = cfg.output.to_vector()
    g = head_loss_grad(cfg.output, cfg.R, cfg.i, cfg.lat, cfg.alpha, cfg.norm)
    return finite_diff_check(f, x0, g, step)


def gradcheck(m: int = 60, seeds: int = 20, step: float = 1e-5, alpha: float = 0.2,
              norm: NormalizationMode = NormalizationMode(), seed: int = 0) -> dict:
    """Finite-difference check over configurations seeded ``seed .. seed + seeds - 1``."""
    worst = {"max_rel_err": 0.0, "seed": None, "worst_component": None}
    per_seed = []
    for s in range(seed, seed + seeds):
        rep = check_head_config(random_head_config(s, m, alpha, norm), step)
        per_seed.append({"seed": s, "max_rel_err": rep.max_rel_err,
                         "worst_component": rep.worst_component})
        if rep.max_rel_err >= worst["max_rel_err"]:
            worst = {"max_rel_err": rep.max_rel_err, "seed": s,
                     "worst_component": rep.worst_component}
    return {"m": m, "seeds": seeds, "step": step, "alpha": alpha, "mode": str(norm),
            **worst, "per_seed": per_seed}
