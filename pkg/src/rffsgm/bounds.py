"""Closed-form evaluation of the convergence, stability and generalization bounds.

All calculators take a :class:`BoundInputs` and read only the fields they
need; a missing or non-positive required field raises :class:`BoundInputError`.

Symbols: ``B`` is the l1 norm of the optimal kernel expansion coefficients,
``epsilon`` the kernel approximation tolerance, ``diam`` the diameter of the
data domain (it also plays the role of the radius in the approximation
probability), ``sigma_p`` the root second moment of the kernel's spectral
density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import NamedTuple

import numpy as np

from .errors import DomainError

__all__ = [
    "BoundInputs",
    "BoundInputError",
    "ProbabilityBound",
    "rff_probability",
    "required_D",
    "lemma1_bound",
    "kernel_convergence_bound",
    "opt_error_bound",
    "stability_bound",
    "lemma2_bound",
    "theorem1_bound",
    "theorem1_objective",
    "data_diameter",
    "bound_table",
    "DEFAULT_OMEGA_CONSTANT",
]

DEFAULT_OMEGA_CONSTANT = 4.0


class BoundInputError(DomainError):
    """A bound was asked for without the inputs it depends on."""


@dataclass(frozen=True)
class BoundInputs:
    n: int | None = None
    T: int | None = None
    eta: float | None = None
    L: float | None = 4.0
    epsilon: float | None = None
    d: int | None = None
    D: int | None = None
    sigma_p: float | None = None
    diam: float | None = None
    B: float | None = None
    w_star_norm_sq: float | None = None

    def replace(self, **changes) -> "BoundInputs":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _need(inputs, *names, allow_zero=()):
    vals = []
    for name in names:
        v = getattr(inputs, name)
        if v is None:
            raise BoundInputError(f"missing input {name!r}")
        if name in allow_zero:
            if v < 0:
                raise BoundInputError(f"{name} must be >= 0, got {v}")
        elif not v > 0:
            raise BoundInputError(f"{name} must be > 0, got {v}")
        vals.append(float(v))
    return vals if len(vals) > 1 else vals[0]


class ProbabilityBound(NamedTuple):
    value: float
    raw: float


def rff_probability(inputs: BoundInputs) -> ProbabilityBound:
    """``1 - 2^8 (sigma_p diam / eps)^2 exp(-D eps^2 / (4 (d + 2)))``.

    ``raw`` is the formula as written (it is negative when the bound is
    vacuous); ``value`` clamps it to ``[0, 1]``.
    """
    D, d, sigma_p, diam, eps = _need(inputs, "D", "d", "sigma_p", "diam", "epsilon")
    ratio = sigma_p * diam / eps
    raw = 1.0 - 256.0 * ratio * ratio * math.exp(-D * eps * eps / (4.0 * (d + 2.0)))
    return ProbabilityBound(min(1.0, max(0.0, raw)), raw)


def required_D(inputs: BoundInputs, c: float = DEFAULT_OMEGA_CONSTANT) -> int:
    """``ceil(c d / eps^2 * log(sigma_p diam / eps))``.

    When the log argument is at most 1 the log factor is dropped and
    ``ceil(c d / eps^2)`` is returned instead.
    """
    d, sigma_p, diam, eps = _need(inputs, "d", "sigma_p", "diam", "epsilon")
    if not c > 0:
        raise BoundInputError(f"c must be > 0, got {c}")
    base = c * d / (eps * eps)
    arg = sigma_p * diam / eps
    value = base * math.log(arg) if arg > 1.0 else base
    # Absorb rounding noise so exact integers are not pushed up by one.
    return int(math.ceil(value - 1e-9 * max(1.0, abs(value))))


def lemma1_bound(inputs: BoundInputs, R_star: float = 0.0) -> float:
    """``R* + ||w*||^2 / (2 T eta) + eta L^2 / 2``."""
    T, eta, L = _need(inputs, "T", "eta", "L")
    w_sq = _need(inputs, "w_star_norm_sq", allow_zero=("w_star_norm_sq",))
    return R_star + w_sq / (2.0 * T * eta) + 0.5 * eta * L * L


def kernel_convergence_bound(inputs: BoundInputs, R_star: float = 0.0, include_eps_term: bool = False) -> float:
    """The convergence bound after substituting ``||w*|| <= (1 + eps) B^2``.

    ``R* + (1+eps) B^2 / (2 T eta) + eta L^2 / 2``, plus ``eps L B`` when
    ``include_eps_term`` is set. That trailing term appears once in the
    derivation and is absent from every later step, so it is off by default.
    """
    T, eta, L, B = _need(inputs, "T", "eta", "L", "B")
    eps = _need(inputs, "epsilon", allow_zero=("epsilon",))
    value = R_star + (1.0 + eps) * B * B / (2.0 * T * eta) + 0.5 * eta * L * L
    if include_eps_term:
        value += eps * L * B
    return value


def opt_error_bound(inputs: BoundInputs) -> float:
    """``(1 + eps) B^2 / (2 T eta) + eta L^2 / 2``."""
    T, eta, L, B = _need(inputs, "T", "eta", "L", "B")
    eps = _need(inputs, "epsilon", allow_zero=("epsilon",))
    return (1.0 + eps) * B * B / (2.0 * T * eta) + 0.5 * eta * L * L


def stability_bound(inputs: BoundInputs) -> float:
    """``T L^2 eta / n``."""
    T, L, n = _need(inputs, "T", "L", "n")
    eta = _need(inputs, "eta", allow_zero=("eta",))
    return T * L * L * eta / n


def lemma2_bound(inputs: BoundInputs, R_star: float = 0.0) -> float:
    """Single pass (``T = n``): ``R* + (2 + eps) B L / (2 sqrt(n))``."""
    B, L, n = _need(inputs, "B", "L", "n")
    eps = _need(inputs, "epsilon", allow_zero=("epsilon",))
    return R_star + (2.0 + eps) * B * L / (2.0 * math.sqrt(n))


def theorem1_objective(inputs: BoundInputs, eta) -> float:
    """Optimization-error plus stability bound as a function of ``eta``.

    ``eta`` may be an array; the remaining fields come from ``inputs``.
    """
    T, L, n, B = _need(inputs, "T", "L", "n", "B")
    eps = _need(inputs, "epsilon", allow_zero=("epsilon",))
    eta = np.asarray(eta, dtype=np.float64)
    out = (1.0 + eps) * B * B / (2.0 * T * eta) + 0.5 * eta * L * L + T * L * L * eta / n
    return float(out) if out.ndim == 0 else out


def theorem1_bound(inputs: BoundInputs, empirical_min: float = 0.0):
    """Return ``(bound, optimal_eta)``.

    ``bound = empirical_min + B L sqrt(1 + eps) / sqrt(n) * sqrt((n + 2T) / T)``
    and ``optimal_eta`` is the step size that minimizes
    :func:`theorem1_objective`.
    """
    T, L, n, B = _need(inputs, "T", "L", "n", "B")
    eps = _need(inputs, "epsilon", allow_zero=("epsilon",))
    excess = B * L * math.sqrt(1.0 + eps) / math.sqrt(n) * math.sqrt((n + 2.0 * T) / T)
    eta = B * math.sqrt((1.0 + eps) * n) / (L * math.sqrt(T * (n + 2.0 * T)))
    return empirical_min + excess, eta


def data_diameter(X) -> float:
    """Diagonal of the axis-aligned bounding box of the rows of ``X``."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DomainError("need a non-empty 2-D array")
    span = X.max(axis=0) - X.min(axis=0)
    return float(np.sqrt(np.dot(span, span)))


def bound_table(
    inputs: BoundInputs,
    R_star: float = 0.0,
    empirical_min: float = 0.0,
    c: float = DEFAULT_OMEGA_CONSTANT,
    include_eps_term: bool = False,
):
    """Evaluate every bound that ``inputs`` supports.

    Returns a list of ``(name, value, note)`` rows. Bounds whose inputs are
    missing get ``value=None`` and the reason in ``note``. When ``eta`` is
    unset the step-size-dependent bounds use the optimal step size.
    """
    rows = []

    def add(name, fn, note=""):
        try:
            rows.append((name, fn(), note))
        except BoundInputError as exc:
            rows.append((name, None, str(exc)))

    eta_note = ""
    eff = inputs
    if inputs.eta is None:
        try:
            _, eta_opt = theorem1_bound(inputs)
        except BoundInputError:
            pass
        else:
            eff = inputs.replace(eta=eta_opt)
            eta_note = "eta=optimal_eta"

    try:
        prob = rff_probability(inputs)
    except BoundInputError as exc:
        rows.append(("rff_probability", None, str(exc)))
        rows.append(("rff_probability_raw", None, str(exc)))
    else:
        rows.append(("rff_probability", prob.value, ""))
        rows.append(("rff_probability_raw", prob.raw, ""))
    add("required_D", lambda: required_D(inputs, c), f"c={c:g}")
    add("lemma1_bound", lambda: lemma1_bound(eff, R_star), eta_note)
    add(
        "kernel_convergence_bound",
        lambda: kernel_convergence_bound(eff, R_star, include_eps_term),
        ";".join(s for s in (eta_note, "with eps*L*B term" if include_eps_term else "") if s),
    )
    add("opt_error_bound", lambda: opt_error_bound(eff), eta_note)
    add("stability_bound", lambda: stability_bound(eff), eta_note)
    add("lemma2_bound", lambda: lemma2_bound(inputs, R_star))
    add("theorem1_bound", lambda: theorem1_bound(inputs, empirical_min)[0])
    add("optimal_eta", lambda: theorem1_bound(inputs)[1])
    return rows
