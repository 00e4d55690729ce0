"""Desk-scale training of three ASG heads on a synthetic orientation task.

Features are flattened ground-truth rotation matrices plus Gaussian noise; this
stands in for image-backbone features and gives the heads a learnable signal.
Each head is an affine map (optionally after one shared tanh hidden layer)
to ``M + 2`` outputs, trained with Adam on the summed three-head loss.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .asg import AsgParams, NormalizationMode
from .errors import DivergenceError, ValidationError
from .lattice import SphereLattice, fibonacci_sphere
from .loss import EPS_MIN, loss_and_grad_batch, softmax, softplus
from .rotation import matrix_to_euler, project_to_so3_batch, random_rotations, vector_angle_deg, wrap_deg

N_FEATURES = 9


@dataclass(frozen=True)
class SyntheticSample:
    features: np.ndarray
    target: np.ndarray


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray  # (n, F)
    targets: np.ndarray  # (n, 3, 3)

    def __len__(self) -> int:
        return len(self.targets)

    def __getitem__(self, n: int) -> SyntheticSample:
        return SyntheticSample(self.features[n], self.targets[n])


def generate_dataset(n: int, noise_sigma: float = 0.1, seed: int = 0) -> Dataset:
    """Uniform random rotations; features are ``vec(R) + N(0, noise_sigma^2)``."""
    if n < 1:
        raise ValidationError(f"dataset size must be >= 1, got {n}")
    if noise_sigma < 0:
        raise ValidationError(f"noise sigma must be >= 0, got {noise_sigma}")
    rng = np.random.default_rng(seed)
    targets = random_rotations(n, rng)
    features = targets.reshape(n, N_FEATURES).copy()
    if noise_sigma > 0:
        features += noise_sigma * rng.standard_normal(features.shape)
    return Dataset(features, targets)


@dataclass
class TrainConfig:
    m: int = 600
    alpha: float = 0.2
    lr: float = 1e-4
    epochs: int = 30
    batch: int = 64
    seed: int = 0
    mode: NormalizationMode = field(default_factory=NormalizationMode)
    fixed_params: AsgParams | None = None
    lr_decay: float = 0.95  # multiplicative per epoch
    hidden: int = 0  # 0 disables the hidden layer
    init_scale: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    workers: int = 1  # >1 splits each batch gradient across threads

    def __post_init__(self):
        if self.m < 2 or self.epochs < 0 or self.batch < 1 or self.lr <= 0:
            raise ValidationError(f"invalid training config: {self}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"alpha must lie in [0, 1], got {self.alpha}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mode"] = str(self.mode)
        d["fixed_params"] = (None if self.fixed_params is None
                             else {"lambda": self.fixed_params.lam, "eta": self.fixed_params.eta})
        return d


def _softplus_inv(y: float) -> float:
    return math.log(math.expm1(y))


class ToyModel:
    """Three heads of size ``M + 2`` over ``F``-dim features."""

    def __init__(self, m: int, n_features: int = N_FEATURES, hidden: int = 0,
                 fixed: AsgParams | None = None, rng=None, init_scale: float = 0.01):
        rng = np.random.default_rng(0) if rng is None else rng
        self.m = m
        self.n_features = n_features
        self.hidden = hidden
        self.fixed = fixed
        self.params: dict[str, np.ndarray] = {}
        width = n_features
        if hidden:
            self.params["Wh"] = rng.normal(0.0, 1.0 / math.sqrt(n_features), (hidden, n_features))
            self.params["bh"] = np.zeros(hidden)
            width = hidden
        raw0 = _softplus_inv(1.0 - EPS_MIN)  # lam = eta = 1 at init
        for i in range(3):
            self.params[f"W{i}"] = rng.normal(0.0, init_scale, (m + 2, width))
            b = np.zeros(m + 2)
            b[m:] = raw0
            # raw slots start from the bias alone
            self.params[f"W{i}"][m:] = 0.0
            self.params[f"b{i}"] = b

    def _trunk(self, x: np.ndarray) -> np.ndarray:
        if not self.hidden:
            return x
        return np.tanh(x @ self.params["Wh"].T + self.params["bh"])

    def forward(self, x: np.ndarray) -> list[np.ndarray]:
        h = self._trunk(np.asarray(x, dtype=float))
        return [h @ self.params[f"W{i}"].T + self.params[f"b{i}"] for i in range(3)]

    def asg_params(self, x: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
        """Per head ``(lam, eta)`` arrays for a feature batch."""
        out = []
        for o in self.forward(x):
            if self.fixed is not None:
                out.append((np.full(len(o), self.fixed.lam), np.full(len(o), self.fixed.eta)))
            else:
                out.append((softplus(o[:, self.m]) + EPS_MIN, softplus(o[:, self.m + 1]) + EPS_MIN))
        return out

    def to_json(self) -> str:
        doc = {
            "m": self.m, "n_features": self.n_features, "hidden": self.hidden,
            "fixed": None if self.fixed is None else {"lambda": self.fixed.lam, "eta": self.fixed.eta},
            "params": {k: v.tolist() for k, v in sorted(self.params.items())},
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ToyModel":
        doc = json.loads(text)
        fixed = doc["fixed"] and AsgParams(doc["fixed"]["lambda"], doc["fixed"]["eta"])
        model = cls(doc["m"], doc["n_features"], doc["hidden"], fixed or None)
        model.params = {k: np.asarray(v, dtype=float) for k, v in doc["params"].items()}
        return model


class Adam:
    def __init__(self, params: dict[str, np.ndarray], lr: float, beta1=0.9, beta2=0.999,
                 eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for k, g in grads.items():
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            params[k] -= self.lr * (self.m[k] / bc1) / (np.sqrt(self.v[k] / bc2) + self.eps)


def batch_loss_and_grads(model: ToyModel, x: np.ndarray, R: np.ndarray, lat: SphereLattice,
                         alpha: float, mode: NormalizationMode, want_grad: bool = True):
    """Mean over the batch of the summed three-head loss, plus parameter gradients."""
    h = model._trunk(x)
    outs = [h @ model.params[f"W{i}"].T + model.params[f"b{i}"] for i in range(3)]
    n = len(x)
    total = 0.0
    grads: dict[str, np.ndarray] = {}
    dh = np.zeros_like(h) if model.hidden else None
    for i, o in enumerate(outs):
        cls, reg, g = loss_and_grad_batch(o, R, i, lat.points, alpha, mode, model.fixed,
                                          want_grad=want_grad)
        total += float(np.sum(cls + alpha * reg)) / n
        if not want_grad:
            continue
        g = g / n
        grads[f"W{i}"] = g.T @ h
        grads[f"b{i}"] = g.sum(axis=0)
        if model.fixed is not None:
            # frozen concentrations: raw slots never move
            grads[f"W{i}"][model.m:] = 0.0
            grads[f"b{i}"][model.m:] = 0.0
        if model.hidden:
            dh += g @ model.params[f"W{i}"]
    if want_grad and model.hidden:
        dpre = dh * (1.0 - h * h)
        grads["Wh"] = dpre.T @ x
        grads["bh"] = dpre.sum(axis=0)
    return total, grads


def _parallel_grads(model, x, R, lat, alpha, mode, workers):
    # chunk results are summed in chunk order, so output does not depend on scheduling
    chunks = np.array_split(np.arange(len(x)), workers)
    chunks = [c for c in chunks if len(c)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(
            lambda c: batch_loss_and_grads(model, x[c], R[c], lat, alpha, mode), chunks))
    total = 0.0
    grads = {k: np.zeros_like(v) for k, v in results[0][1].items()}
    for c, (loss, g) in zip(chunks, results):
        w = len(c) / len(x)
        total += w * loss
        for k in grads:
            grads[k] += w * g[k]
    return total, grads


def predict(model: ToyModel, x: np.ndarray, lat: SphereLattice) -> np.ndarray:
    """Decoded rotations ``(n, 3, 3)``: softmax, expectation per head, SVD projection."""
    cols = [softmax(o[:, :model.m]) @ lat.points for o in model.forward(x)]
    return project_to_so3_batch(np.stack(cols, axis=2))


def evaluate(model: ToyModel, data: Dataset, lat: SphereLattice | None = None) -> dict[str, float]:
    lat = fibonacci_sphere(model.m) if lat is None else lat
    pred = predict(model, data.features, lat)
    col_err = vector_angle_deg(np.swapaxes(pred, 1, 2), np.swapaxes(data.targets, 1, 2))
    mae = []
    for P, T in zip(pred, data.targets):
        ep, et = matrix_to_euler(P).as_tuple(), matrix_to_euler(T).as_tuple()
        mae.append(np.mean(np.abs(wrap_deg(np.subtract(ep, et)))))
    return {"maev_deg": float(col_err.mean()), "mae_deg": float(np.mean(mae))}


@dataclass
class TrainResult:
    model: ToyModel
    history: list[dict]
    config: TrainConfig


def train(config: TrainConfig, data: Dataset, eval_data: Dataset | None = None,
          lat: SphereLattice | None = None) -> TrainResult:
    """Adam on the summed three-head loss.

    ``history[0]`` is the untrained model; ``history[e]`` follows epoch ``e``.
    MAEV/MAE are measured on ``eval_data`` (default: the training data).
    """
    lat = fibonacci_sphere(config.m) if lat is None else lat
    if lat.m != config.m:
        raise ValidationError(f"lattice has {lat.m} points, config says m={config.m}")
    eval_data = data if eval_data is None else eval_data
    rng = np.random.default_rng(config.seed)
    model = ToyModel(config.m, data.features.shape[1], config.hidden, config.fixed_params,
                     rng, config.init_scale)
    opt = Adam(model.params, config.lr, config.beta1, config.beta2, config.adam_eps)

    def record(epoch, loss, lr):
        if not math.isfinite(loss):
            raise DivergenceError(f"non-finite loss {loss} at epoch {epoch} (lr={lr:g})")
        metrics = evaluate(model, eval_data, lat)
        history.append({"epoch": epoch, "loss": loss, **metrics, "lr": lr})

    history: list[dict] = []
    loss0, _ = batch_loss_and_grads(model, data.features, data.targets, lat, config.alpha,
                                    config.mode, want_grad=False)
    record(0, loss0, config.lr)
    n = len(data)
    for epoch in range(1, config.epochs + 1):
        opt.lr = config.lr * config.lr_decay ** (epoch - 1)
        order = rng.permutation(n)
        losses, weights = [], []
        for start in range(0, n, config.batch):
            idx = order[start:start + config.batch]
            x, R = data.features[idx], data.targets[idx]
            if config.workers > 1:
                loss, grads = _parallel_grads(model, x, R, lat, config.alpha, config.mode,
                                              config.workers)
            else:
                loss, grads = batch_loss_and_grads(model, x, R, lat, config.alpha, config.mode)
            if not math.isfinite(loss):
                raise DivergenceError(f"non-finite loss {loss} at epoch {epoch}, "
                                      f"batch starting at {start} (lr={opt.lr:g})")
            opt.step(model.params, grads)
            losses.append(loss)
            weights.append(len(idx))
        record(epoch, float(np.average(losses, weights=weights)), opt.lr)
    return TrainResult(model, history, config)


def yaw_bucket(yaw_deg: float) -> int:
    """Thirds of the yaw range [-90, 90]: 0 below -30, 1 in [-30, 30), 2 from 30 up."""
    if yaw_deg < -30.0:
        return 0
    return 1 if yaw_deg < 30.0 else 2


def learned_params(model: ToyModel, data: Dataset) -> list[dict]:
    """Per sample and head: predicted ``(lam, eta)`` and the target's yaw bucket."""
    params = model.asg_params(data.features)
    yaws = [matrix_to_euler(T).yaw for T in data.targets]
    rows = []
    for n, yaw in enumerate(yaws):
        for i, (lam, eta) in enumerate(params):
            rows.append({"sample": n, "head": i, "lambda": float(lam[n]), "eta": float(eta[n]),
                         "yaw_deg": float(yaw), "yaw_bucket": yaw_bucket(yaw)})
    return rows


def dump_learned_params(model: ToyModel, data: Dataset, path) -> list[dict]:
    rows = learned_params(model, data)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sample", "head", "lambda", "eta", "yaw_deg", "yaw_bucket"])
        for r in rows:
            w.writerow([r["sample"], r["head"], repr(r["lambda"]), repr(r["eta"]),
                        repr(r["yaw_deg"]), r["yaw_bucket"]])
    return rows


def write_history(history: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "loss", "maev_deg", "mae_deg", "lr"])
        for h in history:
            w.writerow([h["epoch"], repr(h["loss"]), repr(h["maev_deg"]), repr(h["mae_deg"]),
                        repr(h["lr"])])


def ablation(data: Dataset, base: TrainConfig, fixed_pairs=((1.0, 1.0),),
             eval_data: Dataset | None = None) -> list[dict]:
    """Adaptive concentrations vs each fixed ``(lam, eta)`` pair on the same data and seed."""
    rows = []
    runs = [("adaptive", None)] + [(f"fixed lambda={l:g} eta={e:g}", AsgParams(l, e))
                                   for l, e in fixed_pairs]
    for name, fixed in runs:
        cfg = TrainConfig(**{**base.__dict__, "fixed_params": fixed})
        res = train(cfg, data, eval_data)
        first, last = res.history[0], res.history[-1]
        rows.append({"setting": name, "initial_maev_deg": first["maev_deg"],
                     "final_maev_deg": last["maev_deg"], "final_mae_deg": last["mae_deg"],
                     "final_loss": last["loss"]})
    return rows
