"""The huber-hinge loss and its constants.

As a function of the margin ``u = y * w.z``::

    l(u) = -4u        if u < -1
         = (1 - u)^2  if -1 <= u <= 1
         = 0          if u > 1

It is convex, non-increasing, 4-Lipschitz and has a 2-Lipschitz derivative.
With unit-norm features those constants carry over to ``w`` unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "LossConstants",
    "HUBER_HINGE",
    "huber_hinge",
    "huber_hinge_derivative",
    "huber_hinge_grad_w",
    "margins",
    "regularized_objective",
]


@dataclass(frozen=True)
class LossConstants:
    """Lipschitz constant ``L`` and smoothness constant ``beta``.

    The defaults hold for the huber-hinge loss under ``||z|| = 1``; pass
    other values to study how the bounds react.
    """

    L: float = 4.0
    beta: float = 2.0


HUBER_HINGE = LossConstants()


def huber_hinge(u):
    """Loss at margin(s) ``u``; returns a float for scalar input."""
    u = np.asarray(u, dtype=np.float64)
    out = np.where(u < -1.0, -4.0 * u, np.where(u > 1.0, 0.0, (1.0 - u) ** 2))
    return float(out) if out.ndim == 0 else out


def huber_hinge_derivative(u):
    """``dl/du``; at ``u = +-1`` the quadratic branch is used."""
    u = np.asarray(u, dtype=np.float64)
    out = np.where(u < -1.0, -4.0, np.where(u > 1.0, 0.0, -2.0 * (1.0 - u)))
    return float(out) if out.ndim == 0 else out


def huber_hinge_grad_w(w, z, y):
    """Gradient of ``l(y * w.z)`` with respect to ``w``."""
    z = np.asarray(z, dtype=np.float64)
    u = y * float(np.dot(w, z))
    return huber_hinge_derivative(u) * y * z


def margins(w, Z, y) -> np.ndarray:
    """``y_i * w.z_i`` for every row of ``Z``."""
    return np.asarray(y, dtype=np.float64) * (np.asarray(Z) @ np.asarray(w))


def regularized_objective(w, Z, y, lam: float = 0.0) -> float:
    """``lam/2 * ||w||^2`` plus the mean huber-hinge loss over the rows of ``Z``."""
    if lam < 0:
        raise DomainError(f"lambda must be non-negative, got {lam}")
    Z = np.atleast_2d(np.asarray(Z, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if Z.shape[0] == 0:
        raise DomainError("empty batch")
    w = np.asarray(w, dtype=np.float64)
    return 0.5 * lam * float(np.dot(w, w)) + float(np.mean(huber_hinge(margins(w, Z, y))))
