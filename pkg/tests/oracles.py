"""Reference computations that do not go through the code under test."""

import math

import numpy as np

from rffsgm.data import Dataset


def loss_by_branches(u):
    """Scalar huber-hinge written out case by case."""
    if u < -1:
        return -4.0 * u
    if u <= 1:
        return (1.0 - u) * (1.0 - u)
    return 0.0


def central_difference(f, x, h=1e-6):
    x = np.asarray(x, dtype=np.float64)
    grad = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        grad[j] = (f(x + e) - f(x - e)) / (2.0 * h)
    return grad


def mean_loss_loop(w, Z, y):
    total = 0.0
    for z, label in zip(Z, y):
        total += loss_by_branches(label * sum(a * b for a, b in zip(w, z)))
    return total / len(y)


def full_batch_minimizer(Z, y, tol=1e-8, max_iter=200):
    """Minimize the mean huber-hinge loss over w by damped Newton steps.

    The objective is piecewise quadratic, so Newton on the current active
    set converges in a handful of iterations. Returns ``(w, grad_norm)``.
    """
    n, p = Z.shape

    def value(w):
        return float(np.mean([loss_by_branches(u) for u in y * (Z @ w)]))

    def grad_hess(w):
        u = y * (Z @ w)
        d1 = np.where(u < -1, -4.0, np.where(u > 1, 0.0, -2.0 * (1.0 - u)))
        d2 = np.where((u >= -1) & (u <= 1), 2.0, 0.0)
        g = (Z * (d1 * y)[:, None]).mean(axis=0)
        H = (Z * d2[:, None]).T @ Z / n
        return g, H

    w = np.zeros(p)
    for _ in range(max_iter):
        g, H = grad_hess(w)
        gn = float(np.linalg.norm(g))
        if gn <= tol:
            return w, gn
        step = np.linalg.solve(H + 1e-12 * np.eye(p), -g)
        t = 1.0
        f0 = value(w)
        while value(w + t * step) > f0 + 1e-4 * t * float(g @ step) and t > 1e-10:
            t *= 0.5
        w = w + t * step
    g, _ = grad_hess(w)
    return w, float(np.linalg.norm(g))


def separable_clusters(n_per_class=10, d=2, spread=0.3, seed=0, offset=2.0):
    rng = np.random.default_rng(seed)
    center = np.full(d, offset)
    pos = center + spread * rng.standard_normal((n_per_class, d))
    neg = -center + spread * rng.standard_normal((n_per_class, d))
    X = np.vstack([pos, neg])
    y = np.concatenate([np.ones(n_per_class), -np.ones(n_per_class)])
    return Dataset(X, y, name="clusters")


def noisy_nonlinear(n, d=5, flip=0.1, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    y = np.where(X[:, 0] * X[:, 1] + 0.5 * X[:, 2] > 0, 1.0, -1.0)
    flips = rng.random(n) < flip
    y[flips] *= -1
    if np.all(y == y[0]):
        y[0] = -y[0]
    return Dataset(X, y, name="nonlinear")


def linear_fit(x, y):
    """Least-squares slope, intercept and R^2."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def relative_spread(values):
    values = np.asarray(values, dtype=np.float64)
    return float((values.max() - values.min()) / values.mean())


def isclose_rel(a, b, rel):
    return math.isclose(a, b, rel_tol=rel)
