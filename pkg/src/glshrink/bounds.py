"""Executable analytic envelopes for the posterior shrinkage quantities.

Every function here evaluates a closed-form (or one-quadrature) expression
that dominates, exactly or up to a calibrated slack factor, one of the
posterior quantities computed in glshrink.posterior:

* moment_bound          >= E(1 - kappa | x, tau)          (slack factor)
* concentration_bound   >= Pr(kappa > eta | x, tau)       (exact)
* mean_gap_envelope     >= |T_tau(x) - x|                 (exact)
* kappa_envelope        >= E(kappa | x, tau)              (exact)
* variance_tail_term    pairs x^2 E((1-kappa)^2 | x, tau) with its
                        closed-form envelope               (slack factor)
* weight_kernel_integral pairs the exponentially tilted kernel integrals
                        I_k with their closed-form two-sided bounds (exact)

The constants come from the class description (a, K) and the regularity
constants (M, c0, t0) stored on the family.  The "slack" entries stand in
for asymptotic (1 + o(1)) factors with no stated rate; the calibrated
values live in tests/data and are frozen from a sweep over small tau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as sp

from .errors import ValidationError
from .families import PriorFamily
from .posterior import PosteriorQuery, _raw_moments
from .quadrature import DEFAULT_REL_TOL, unit_interval_integrate

__all__ = [
    "BoundParams",
    "KernelIntegralResult",
    "moment_bound",
    "concentration_bound",
    "mean_gap_envelope",
    "kappa_envelope",
    "variance_tail_term",
    "weight_kernel_integral",
    "type1_rate_forms",
    "delta_factor",
]


@dataclass(frozen=True)
class BoundParams:
    """Free parameters (eta, delta) of the envelopes, plus the sweep
    exponents zeta / rho and the slack multiplier for asymptotic bounds."""

    eta: float
    delta: float
    zeta: float | None = None
    rho: float | None = None
    slack: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.eta < 1.0 and 0.0 < self.delta < 1.0):
            raise ValidationError("eta and delta must lie in (0, 1)")
        floor = 2.0 / (self.eta * (1.0 - self.delta))
        if self.zeta is not None and not self.zeta > floor:
            raise ValidationError(
                f"zeta must exceed 2/(eta (1-delta)) = {floor:.6g}, got {self.zeta}"
            )
        if self.slack < 1.0:
            raise ValidationError(f"slack must be >= 1, got {self.slack}")


def _lower_inc_half(c: float, z) -> np.ndarray:
    """int_0^z u^(c-1) e^(-u/2) du = 2^c Gamma(c) P(c, z/2)."""
    z = np.asarray(z, dtype=float)
    return math.exp(c * math.log(2.0) + sp.gammaln(c)) * sp.gammainc(c, 0.5 * z)


def _full_inc_half(c: float) -> float:
    return math.exp(c * math.log(2.0) + sp.gammaln(c))


def moment_bound(x: float, tau: float, family: PriorFamily, slack: float = 1.0) -> float:
    """Envelope slack * K M / (a (1 - a)) * exp(x^2/2) * tau^(2a) for the
    posterior weight E(1 - kappa | x, tau); needs 0 < a < 1."""
    if not (0.0 < family.a < 1.0):
        raise ValidationError(f"moment_bound requires 0 < a < 1, got a={family.a}")
    if not (0.0 < tau < 1.0):
        raise ValidationError(f"tau must lie in (0, 1), got {tau}")
    if slack < 1.0:
        raise ValidationError("slack must be >= 1")
    a = family.a
    with np.errstate(over="ignore"):
        return float(
            slack
            * family.K
            * family.M
            / (a * (1.0 - a))
            * math.exp(min(0.5 * x * x, 709.0))
            * tau ** (2.0 * a)
        )


@lru_cache(maxsize=4096)
def delta_factor(
    family: PriorFamily, tau: float, eta: float, delta: float,
    rel_tol: float = DEFAULT_REL_TOL,
) -> float:
    """Delta(tau^2, eta, delta) = (a + 1/2) T0^(a+1/2) int_T0^inf t^-(a+3/2) L dt,
    with T0 = (1/tau^2)(1/(eta delta) - 1).

    The substitution t = T0 / v turns the tail integral into
    T0^-(a+1/2) int_0^1 v^(a-1/2) L(T0 / v) dv, a compact integral the
    shared adaptive engine handles without any cutoff.
    """
    a = family.a
    log_T0 = math.log(1.0 / (eta * delta) - 1.0) - 2.0 * math.log(tau)

    def comps(v, omv, log_v, log_omv):
        return (a - 0.5) * log_v + family.log_L(log_T0 - log_v)

    integral = unit_interval_integrate(comps, rel_tol=rel_tol)[0]
    return float((a + 0.5) * integral)


def _h_constant(family: PriorFamily, eta: float) -> float:
    """H(a, eta, delta)-free prefactor shared by the first envelope term."""
    a = family.a
    return (
        family.M
        / (family.c0 * (1.0 - eta) ** (1.0 + a))
        * _full_inc_half(a + 1.5)
    )


def _gauss_tail_term(x: float, tau: float, family: PriorFamily, p: BoundParams) -> float:
    """H(a,eta,delta) exp(-eta (1-delta) x^2 / 2) / (tau^(2a) Delta)."""
    a = family.a
    ed = p.eta * p.delta
    H = (a + 0.5) * (1.0 - ed) ** a / (family.K * ed ** (a + 0.5))
    delta_val = delta_factor(family, tau, p.eta, p.delta)
    return (
        H
        * math.exp(-0.5 * p.eta * (1.0 - p.delta) * x * x)
        / (tau ** (2.0 * a) * delta_val)
    )


def concentration_bound(x: float, tau: float, family: PriorFamily, p: BoundParams) -> float:
    """Exact upper bound for Pr(kappa > eta | x, tau), uniform in x."""
    if not (tau > 0.0):
        raise ValidationError("tau must be positive")
    if not (family.a > 0.0):
        raise ValidationError("concentration bound requires a > 0")
    return _gauss_tail_term(x, tau, family, p)


def mean_gap_envelope(x: float, tau: float, family: PriorFamily, p: BoundParams) -> float:
    """Exact envelope for |T_tau(x) - x|, valid for every x != 0, tau in (0,1).

    First term: a tail-robustness bound decaying like 1/|x|; second term:
    |x| times the concentration bound at level eta.
    """
    if x == 0.0:
        raise ValidationError("mean_gap_envelope is defined for x != 0")
    if not (0.0 < tau < 1.0):
        raise ValidationError(f"tau must lie in (0, 1), got {tau}")
    a = family.a
    s = 1.0 / (1.0 + family.t0)
    denom = abs(x) * _lower_inc_half(a + 0.5, s * x * x)
    h1 = _h_constant(family, p.eta) / denom
    h2 = abs(x) * _gauss_tail_term(x, tau, family, p)
    return float(h1 + h2)


def kappa_envelope(x: float, tau: float, family: PriorFamily, p: BoundParams) -> float:
    """Exact envelope for E(kappa | x, tau); equals 1 at x = 0."""
    if not (0.0 < tau < 1.0):
        raise ValidationError(f"tau must lie in (0, 1), got {tau}")
    if x == 0.0:
        return 1.0
    a = family.a
    s = 1.0 / (1.0 + family.t0)
    g1 = _h_constant(family, p.eta) / (x * x * _lower_inc_half(a + 0.5, s * x * x))
    g2 = _gauss_tail_term(x, tau, family, p)
    return float(g1 + g2)


def variance_tail_term(
    x: float,
    tau: float,
    family: PriorFamily,
    slack: float = 1.0,
    rel_tol: float = DEFAULT_REL_TOL,
) -> tuple[float, float]:
    """(J, envelope) with J(x, tau) = x^2 E((1-kappa)^2 | x, tau) and
    envelope slack * 2 K M exp(x^2/2) tau^(2a); needs a in [0.5, 1)."""
    if not (0.5 <= family.a < 1.0):
        raise ValidationError(
            f"variance_tail_term requires a in [0.5, 1), got a={family.a}"
        )
    query = PosteriorQuery(x=x, tau=tau, family=family, rel_tol=rel_tol)
    e_w2 = _raw_moments(query.family, abs(query.x), query.tau, query.rel_tol)[4]
    value = x * x * e_w2
    with np.errstate(over="ignore"):
        envelope = float(
            slack * 2.0 * family.K * family.M
            * math.exp(min(0.5 * x * x, 709.0)) * tau ** (2.0 * family.a)
        )
    return float(value), envelope


# ---------------------------------------------------------------------------
# Exponentially tilted kernel integrals and their two-sided closed forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelIntegralResult:
    value: float
    lower: float | None
    upper: float | None


_KERNEL_ORDERS = (0.5, 1.5, 2.5)


def weight_kernel_integral(
    y: float,
    tau: float,
    family: PriorFamily,
    k: float,
    rel_tol: float = DEFAULT_REL_TOL,
) -> KernelIntegralResult:
    """I_k = int_0^inf (t tau^2)^(k-1/2) (1+t tau^2)^(-k) t^(-3/2) L(t)
    exp(t tau^2 y / (1 + t tau^2)) dt, plus its closed-form bounds.

    Defined for families with a = 1/2 and non-decreasing L.  In the
    substitution v = t tau^2/(1 + t tau^2) this is
    tau * int_0^1 v^(k-2) L(v / (tau^2 (1-v))) e^(v y) dv.  The bounds hold
    for tau < 1/sqrt(2) (k = 3/2, 5/2) and tau < 1/2 (k = 1/2).
    """
    if k not in _KERNEL_ORDERS:
        raise ValidationError(f"k must be one of {_KERNEL_ORDERS}, got {k}")
    if abs(family.a - 0.5) > 1e-12 or not family.l_nondecreasing:
        raise ValidationError(
            "weight_kernel_integral requires a = 1/2 and non-decreasing L"
        )
    if not (y > 0.0):
        raise ValidationError(f"y must be positive, got {y}")
    if y > 690.0:
        raise ValidationError("y too large: exp(y) would overflow")
    tau_cap = 0.5 if k == 0.5 else 1.0 / math.sqrt(2.0)
    if not (0.0 < tau < tau_cap):
        raise ValidationError(f"bounds for k={k} require tau < {tau_cap:.6g}")

    two_log_tau = 2.0 * math.log(tau)

    def comps(v, omv, log_v, log_omv):
        return (
            (k - 2.0) * log_v
            + family.log_L(log_v - log_omv - two_log_tau)
            + y * v
        )

    value = tau * float(unit_interval_integrate(comps, rel_tol=rel_tol)[0])

    M = family.M
    K = family.K
    L1 = float(np.asarray(family.L(np.array([1.0])))[0])
    ey = math.exp(y)
    ey2 = math.exp(0.5 * y)
    et2y = math.exp(tau * tau * y)
    rt2 = math.sqrt(2.0)

    lower = upper = None
    if k == 2.5:
        lower = L1 * tau * ((tau / y) * (ey2 - et2y) + (ey - ey2) / (rt2 * y))
    elif k == 1.5:
        upper = M * tau * (et2y * tau + 2.0 * ey2 * (1.0 / rt2 - tau) + rt2 * (ey - ey2) / y)
    else:
        ety = math.exp(tau * y)
        sq = math.sqrt(tau)
        upper = tau * (
            et2y / (K * tau)
            + 2.0 * M * ety * (1.0 / tau - 1.0 / sq)
            + 2.0 * M * ey2 * (1.0 / sq - rt2)
            + 2.0 * M * rt2 * (ey - ey2) / y
        )
        lower = L1 * tau * (
            et2y * (1.0 / tau - 1.0 / sq)
            + rt2 * (ey - ety) / y
            + 0.5 * (ey - ey2) / y
        )
    return KernelIntegralResult(value=value, lower=lower, upper=upper)


def type1_rate_forms(tau: float, a: float, p: BoundParams) -> tuple[float, float]:
    """Shape functions sandwiching the induced rule's type I error rate:
    ((tau^(2a))^(zeta/2) / sqrt(log(1/tau^2)), tau^(2a) / sqrt(log(1/tau^2))).

    The multiplicative constants are not computable from the class
    description; these forms are for slope/shape diagnostics only.
    """
    if not (0.0 < tau < 1.0):
        raise ValidationError(f"tau must lie in (0, 1), got {tau}")
    if p.zeta is None:
        raise ValidationError("type1_rate_forms requires BoundParams.zeta")
    root_log = math.sqrt(math.log(1.0 / tau**2))
    t2a = tau ** (2.0 * a)
    return (t2a ** (0.5 * p.zeta) / root_log, t2a / root_log)
