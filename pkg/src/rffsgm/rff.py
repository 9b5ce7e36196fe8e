"""Random Fourier features for the Gaussian (RBF) kernel.

The kernel is ``k(x, y) = exp(-gamma * ||x - y||^2)``. Its spectral density
is a zero-mean normal with per-coordinate variance ``2 * gamma``. A map with
``D`` frequencies produces ``2D`` features: the cosines followed by the sines,
scaled by ``1/sqrt(D)``, so every transformed vector has unit norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial.distance import pdist

from .errors import DataFormatError, DomainError

__all__ = [
    "KernelParams",
    "FourierFeatureMap",
    "sample_map",
    "standard_normal",
    "exact_kernel",
    "rbf_gram",
    "derived_sigma_p",
    "median_heuristic_gamma",
    "save_map",
    "load_map",
]


@dataclass(frozen=True)
class KernelParams:
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise DomainError(f"gamma must be positive, got {self.gamma}")


def _gamma_of(params) -> float:
    if isinstance(params, KernelParams):
        return params.gamma
    return KernelParams(float(params)).gamma


def standard_normal(seed: int, size: int) -> np.ndarray:
    """Draw ``size`` N(0, 1) deviates by Box-Muller over PCG64 uniforms.

    Uniforms are consumed in consecutive pairs, so the first ``k`` outputs
    for a seed do not depend on ``size``.
    """
    pairs = (size + 1) // 2
    u = np.random.Generator(np.random.PCG64(seed)).random(2 * pairs).reshape(pairs, 2)
    radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    angle = 2.0 * np.pi * u[:, 1]
    out = np.empty((pairs, 2))
    out[:, 0] = radius * np.cos(angle)
    out[:, 1] = radius * np.sin(angle)
    return out.ravel()[:size]


@dataclass(frozen=True, eq=False)
class FourierFeatureMap:
    """Sampled frequencies defining ``z: R^d -> R^{2D}``.

    ``frequencies`` has shape ``(D, d)`` and holds raw spectral samples; the
    ``1/sqrt(D)`` scale is applied in :meth:`transform`.
    """

    frequencies: np.ndarray
    gamma: float
    seed: int | None = None

    def __post_init__(self):
        W = np.ascontiguousarray(self.frequencies, dtype=np.float64)
        if W.ndim != 2 or W.shape[0] < 1 or W.shape[1] < 1:
            raise DomainError(f"frequencies must be a non-empty (D, d) matrix, got {W.shape}")
        KernelParams(self.gamma)
        W.flags.writeable = False
        object.__setattr__(self, "frequencies", W)

    @property
    def D(self) -> int:
        return self.frequencies.shape[0]

    @property
    def d(self) -> int:
        return self.frequencies.shape[1]

    @property
    def output_dim(self) -> int:
        return 2 * self.D

    def transform(self, x) -> np.ndarray:
        """Map a ``d``-vector to a ``2D``-vector, or an ``(n, d)`` batch to ``(n, 2D)``."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1:] != (self.d,) or x.ndim > 2:
            raise DomainError(
                f"input has shape {x.shape}, expected (..., {self.d})"
            )
        proj = x @ self.frequencies.T
        scale = 1.0 / math.sqrt(self.D)
        return np.concatenate([np.cos(proj), np.sin(proj)], axis=-1) * scale

    __call__ = transform


def sample_map(d: int, D: int, gamma: float, seed: int = 0) -> FourierFeatureMap:
    """Sample ``D`` frequencies i.i.d. from N(0, 2*gamma*I_d)."""
    if D < 1:
        raise DomainError(f"D must be at least 1, got {D}")
    if d < 1:
        raise DomainError(f"d must be at least 1, got {d}")
    gamma = _gamma_of(gamma)
    W = standard_normal(seed, D * d).reshape(D, d) * math.sqrt(2.0 * gamma)
    return FourierFeatureMap(W, gamma, seed)


def exact_kernel(params, x, y) -> float:
    """``exp(-gamma * ||x - y||^2)``; ``params`` is a KernelParams or a gamma."""
    gamma = _gamma_of(params)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DomainError(f"dimension mismatch: {x.shape} vs {y.shape}")
    diff = x - y
    return float(np.exp(-gamma * np.dot(diff, diff)))


def rbf_gram(params, X, Y=None) -> np.ndarray:
    """Exact RBF Gram matrix between the rows of ``X`` and ``Y``."""
    gamma = _gamma_of(params)
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = X if Y is None else np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if X.shape[1] != Y.shape[1]:
        raise DomainError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    sq = (
        np.sum(X * X, axis=1)[:, None]
        + np.sum(Y * Y, axis=1)[None, :]
        - 2.0 * X @ Y.T
    )
    return np.exp(-gamma * np.maximum(sq, 0.0))


def derived_sigma_p(params, d: int) -> float:
    """Root second moment of the RBF spectral density in ``d`` dimensions."""
    if d < 1:
        raise DomainError(f"d must be at least 1, got {d}")
    return math.sqrt(2.0 * _gamma_of(params) * d)


def median_heuristic_gamma(X, max_points: int = 1000, seed: int = 0) -> float:
    """``1 / (2 * median^2)`` of pairwise Euclidean distances.

    At most ``max_points`` rows are used, chosen by a seeded permutation.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise DomainError("median heuristic needs at least two points")
    if X.shape[0] > max_points:
        idx = np.random.default_rng(seed).permutation(X.shape[0])[:max_points]
        X = X[np.sort(idx)]
    med = float(np.median(pdist(X)))
    if med <= 0:
        raise DomainError("median pairwise distance is zero; gamma undefined")
    return float(1.0 / (2.0 * med * med))


_MAP_MAGIC = "rffsgm-map 1"


def save_map(fmap: FourierFeatureMap, path) -> None:
    """Write a plain-text dump: header, ``d D gamma seed``, then one row per frequency."""
    seed = -1 if fmap.seed is None else fmap.seed
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_MAP_MAGIC + "\n")
        fh.write(f"{fmap.d} {fmap.D} {float(fmap.gamma)!r} {seed}\n")
        for row in fmap.frequencies:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_map(path) -> FourierFeatureMap:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != _MAP_MAGIC:
        raise DataFormatError("not a feature-map file", path=path, line=1)
    try:
        d_str, D_str, gamma_str, seed_str = lines[1].split()
        d, D, gamma, seed = int(d_str), int(D_str), float(gamma_str), int(seed_str)
        W = np.array([[float(v) for v in ln.split()] for ln in lines[2 : 2 + D]])
    except ValueError as exc:
        raise DataFormatError(f"malformed feature-map file ({exc})", path=path) from None
    if W.shape != (D, d):
        raise DataFormatError(f"expected {D}x{d} frequencies, found {W.shape}", path=path)
    return FourierFeatureMap(W, gamma, None if seed < 0 else seed)
