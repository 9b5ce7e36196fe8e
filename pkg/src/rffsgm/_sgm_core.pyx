# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled SGM pass over pre-featurized rows."""

from libc.math cimport isfinite


def sgm_pass(const double[:, ::1] Z, const double[::1] y, const long long[::1] order,
             double[::1] w, double[::1] w_bar, long long t, double eta, double lam,
             double[:, ::1] trace):
    """Run one SGM step per entry of ``order``, updating ``w``/``w_bar`` in place.

    Returns ``(t, bad_step)``; ``bad_step`` is 0 unless a non-finite margin
    was met, in which case it is the 1-based index of the step that could
    not be taken.
    """
    cdef Py_ssize_t p = Z.shape[1]
    cdef Py_ssize_t n_steps = order.shape[0]
    cdef Py_ssize_t n_trace = trace.shape[0]
    cdef Py_ssize_t s, j, i
    cdef double u, g, dot, yi, inv_t
    cdef long long bad = 0
    with nogil:
        for s in range(n_steps):
            i = order[s]
            yi = y[i]
            dot = 0.0
            for j in range(p):
                dot += w[j] * Z[i, j]
            u = yi * dot
            if not isfinite(u):
                bad = t + 1
                break
            if u < -1.0:
                g = -4.0 * yi
            elif u > 1.0:
                g = 0.0
            else:
                g = -2.0 * (1.0 - u) * yi
            t += 1
            inv_t = 1.0 / <double>t
            for j in range(p):
                w[j] = w[j] - eta * (g * Z[i, j] + lam * w[j])
                w_bar[j] = w_bar[j] + (w[j] - w_bar[j]) * inv_t
            if t <= n_trace:
                for j in range(p):
                    trace[t - 1, j] = w[j]
    return t, bad
