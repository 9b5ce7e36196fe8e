"""Constant-step stochastic gradient method on random-Fourier features.

Each epoch visits the training rows in a fresh seeded permutation. The
iterate starts at zero, and the running average covers every post-update
iterate ``w_1 .. w_T``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import _backend
from .data import Dataset
from .errors import ConfigurationError, DataFormatError, DomainError, TrainingDivergence
from .loss import HUBER_HINGE, huber_hinge, margins
from .rff import FourierFeatureMap

__all__ = [
    "Schedule",
    "SgmConfig",
    "SgmModel",
    "resolve_eta",
    "train",
    "train_features",
    "epoch_orders",
    "decision_function",
    "predict",
    "empirical_risk",
    "risk_of_features",
    "save_model",
    "load_model",
    "TRACE_LIMIT",
]

TRACE_LIMIT = 10_000


class Schedule(str, enum.Enum):
    CONSTANT = "constant-explicit"
    LEMMA2 = "single-pass-lemma2"
    THEOREM1 = "theorem1-optimal"


@dataclass(frozen=True)
class SgmConfig:
    """Hyperparameters of one SGM run.

    ``B`` stands in for the l1 norm of the optimal kernel expansion
    coefficients and is only read by the two theory-driven schedules.
    """

    eta: float = 0.01
    epochs: int = 1
    lam: float = 0.0
    seed: int = 0
    schedule: Schedule = Schedule.CONSTANT
    B: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "schedule", Schedule(self.schedule))
        if self.epochs < 1:
            raise ConfigurationError(f"epochs must be >= 1, got {self.epochs}")
        if self.lam < 0:
            raise ConfigurationError(f"lambda must be >= 0, got {self.lam}")
        if self.schedule is Schedule.CONSTANT and not self.eta >= 0:
            raise ConfigurationError(f"eta must be >= 0, got {self.eta}")

    def with_seed(self, seed: int) -> "SgmConfig":
        return replace(self, seed=seed)

    def as_dict(self) -> dict:
        out = asdict(self)
        out["schedule"] = self.schedule.value
        return out


def resolve_eta(config: SgmConfig, n: int, L: float = HUBER_HINGE.L, epsilon: float = 0.0) -> float:
    """Step size implied by ``config`` for a training set of ``n`` rows.

    ``constant-explicit`` returns ``config.eta``; ``single-pass-lemma2``
    returns ``B / (L sqrt(n))``; ``theorem1-optimal`` returns
    ``B sqrt((1+eps) n) / (L sqrt(T (n + 2T)))`` with ``T = epochs * n``.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if config.schedule is Schedule.CONSTANT:
        return float(config.eta)
    if not L > 0:
        raise ConfigurationError(f"L must be positive, got {L}")
    if config.B is None or not config.B > 0:
        raise ConfigurationError(
            f"schedule {config.schedule.value!r} needs a positive B, got {config.B}"
        )
    B = float(config.B)
    if config.schedule is Schedule.LEMMA2:
        return B / (L * math.sqrt(n))
    T = config.epochs * n
    return B * math.sqrt((1.0 + epsilon) * n) / (L * math.sqrt(T * (n + 2.0 * T)))


@dataclass
class SgmModel:
    w: np.ndarray
    w_bar: np.ndarray
    t: int = 0
    eta: float = 0.0
    trace: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.w.shape[0]

    def weights(self, use_average: bool = True) -> np.ndarray:
        return self.w_bar if use_average else self.w


def epoch_orders(n: int, epochs: int, seed: int) -> np.ndarray:
    """Concatenated per-epoch permutations of ``range(n)`` for ``seed``."""
    rng = np.random.default_rng(seed)
    return np.concatenate([rng.permutation(n) for _ in range(epochs)]).astype(np.int64)


def train_features(
    Z,
    y,
    config: SgmConfig,
    *,
    L: float = HUBER_HINGE.L,
    epsilon: float = 0.0,
    order=None,
    trace: bool = False,
    backend: str | None = None,
) -> SgmModel:
    """Run SGM on already-featurized rows ``Z`` with labels ``y``.

    ``order`` overrides the seeded shuffling with an explicit sequence of
    row indices. With ``trace=True`` the first ``TRACE_LIMIT`` iterates are
    kept on the returned model.
    """
    Z = np.ascontiguousarray(Z, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[0] == 0:
        raise DomainError("training set is empty")
    n, p = Z.shape
    eta = resolve_eta(config, n, L=L, epsilon=epsilon)
    if order is None:
        order = epoch_orders(n, config.epochs, config.seed)
    else:
        order = np.ascontiguousarray(order, dtype=np.int64)
    w = np.zeros(p)
    w_bar = np.zeros(p)
    trace_buf = np.zeros((min(TRACE_LIMIT, order.shape[0]) if trace else 0, p))
    kernel = _backend.get_sgm_pass(backend)
    t, bad = kernel(Z, y, order, w, w_bar, 0, float(eta), float(config.lam), trace_buf)
    if bad:
        raise TrainingDivergence(bad, f"non-finite margin at step {bad} (eta={eta:g})")
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(w_bar))):
        raise TrainingDivergence(t, f"non-finite weights after {t} steps (eta={eta:g})")
    return SgmModel(w, w_bar, int(t), float(eta), trace_buf if trace else None)


def train(train: Dataset, fmap: FourierFeatureMap, config: SgmConfig, **kwargs) -> SgmModel:
    """Featurize ``train`` with ``fmap`` and run SGM for ``config.epochs`` passes."""
    if fmap.d != train.d:
        raise DomainError(f"feature map expects d={fmap.d}, data has d={train.d}")
    return train_features(fmap.transform(train.features), train.labels, config, **kwargs)


def _weights(model_or_w, use_average=True):
    if isinstance(model_or_w, SgmModel):
        return model_or_w.weights(use_average)
    return np.asarray(model_or_w, dtype=np.float64)


def decision_function(model, fmap: FourierFeatureMap, x, use_average: bool = True):
    return fmap.transform(x) @ _weights(model, use_average)


def predict(model, fmap: FourierFeatureMap, x, use_average: bool = True):
    """``sign(w.z(x))`` with ties going to +1; a label for one row, an array for a batch."""
    f = decision_function(model, fmap, x, use_average)
    labels = np.where(f >= 0, 1.0, -1.0)
    return float(labels) if labels.ndim == 0 else labels


def risk_of_features(w, Z, y):
    """Mean huber-hinge loss and 0/1 error of ``w`` on featurized rows."""
    w = np.asarray(w, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    u = margins(w, Z, y)
    loss = float(np.mean(huber_hinge(u)))
    pred = np.where(np.asarray(Z) @ w >= 0, 1.0, -1.0)
    return loss, float(np.mean(pred != y))


def empirical_risk(model_or_w, data: Dataset, fmap: FourierFeatureMap, use_average: bool = True):
    """Return ``(mean loss, 0/1 error)``; a model contributes its averaged iterate."""
    if data.n == 0:
        raise DomainError("empty dataset")
    return risk_of_features(_weights(model_or_w, use_average), fmap.transform(data.features), data.labels)


def save_model(model: SgmModel, path, config: SgmConfig | None = None, map_ref: dict | None = None) -> None:
    """Write the model as one JSON record (weights, average, step count, config echo)."""
    record = {
        "format": "rffsgm-model 1",
        "map": map_ref or {},
        "t": model.t,
        "eta": model.eta,
        "w": model.w.tolist(),
        "w_bar": model.w_bar.tolist(),
        "config": config.as_dict() if config is not None else None,
    }
    Path(path).write_text(json.dumps(record) + "\n", encoding="utf-8")


def load_model(path):
    """Return ``(model, config_dict, map_ref)`` from a file written by :func:`save_model`."""
    try:
        record = json.loads(Path(path).read_text(encoding="utf-8"))
        if record.get("format") != "rffsgm-model 1":
            raise ValueError("unknown format tag")
        model = SgmModel(
            np.asarray(record["w"], dtype=np.float64),
            np.asarray(record["w_bar"], dtype=np.float64),
            int(record["t"]),
            float(record["eta"]),
        )
    except (ValueError, KeyError, TypeError) as exc:
        raise DataFormatError(f"malformed model file ({exc})", path=path) from None
    return model, record.get("config"), record.get("map", {})
