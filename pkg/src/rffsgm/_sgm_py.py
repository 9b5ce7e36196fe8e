"""Pure-Python SGM pass; same contract as the compiled ``_sgm_core.sgm_pass``."""

import math

import numpy as np


def sgm_pass(Z, y, order, w, w_bar, t, eta, lam, trace):
    # Divergent runs overflow before the next margin check catches them.
    with np.errstate(over="ignore", invalid="ignore"):
        return _loop(Z, y, order, w, w_bar, t, eta, lam, trace)


def _loop(Z, y, order, w, w_bar, t, eta, lam, trace):
    n_trace = trace.shape[0]
    for i in order:
        yi = y[i]
        z = Z[i]
        u = yi * float(np.dot(w, z))
        if not math.isfinite(u):
            return t, t + 1
        if u < -1.0:
            g = -4.0 * yi
        elif u > 1.0:
            g = 0.0
        else:
            g = -2.0 * (1.0 - u) * yi
        t += 1
        w -= eta * (g * z + lam * w)
        w_bar += (w - w_bar) * (1.0 / t)
        if t <= n_trace:
            trace[t - 1] = w
    return t, 0
