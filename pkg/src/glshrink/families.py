"""One-group shrinkage prior families of the form pi(t) = K * t^(-a-1) * L(t).

Each registered family maps a named prior on the local variance t = lambda^2
to the triple (a, K, L), where a > 0 is the tail exponent, K the normalizing
constant, and L a bounded, slowly varying function with a positive tail
limit.  Derivations (validated numerically by the density-normalization
check in the test suite):

horseshoe
    lambda ~ half-Cauchy(0, 1) gives pi(t) = (1/pi) t^(-3/2) * t/(1+t),
    so a = 1/2, K = 1/pi, L(t) = t/(1+t).

tpbn(a, b)
    Inverted-beta density on t: pi(t) = B(a,b)^-1 t^(b-1) (1+t)^(-a-b)
          = B(a,b)^-1 t^(-a-1) (t/(1+t))^(a+b).
    The tail exponent equals the first shape parameter a; the second shape
    b only enters L(t) = (t/(1+t))^(a+b).  tpbn(1/2, 1/2) is the horseshoe
    and tpbn(1/2, 1) the Strawderman-Berger prior.

neg(shape, scale)
    t | s ~ Exp(rate s), s ~ Gamma(shape, rate scale).  Marginally
    pi(t) = shape * scale^shape * (t + scale)^(-shape-1), so a = shape,
    K = shape * scale^shape, L(t) = (t/(t+scale))^(shape+1).

inverse-gamma(shape, scale)
    pi(t) = scale^shape/Gamma(shape) t^(-shape-1) e^(-scale/t):
    a = shape, L(t) = exp(-scale/t).

half-t(nu)
    lambda ~ half-t with nu degrees of freedom: a = nu/2,
    K = Gamma((nu+1)/2) nu^(nu/2) / (Gamma(nu/2) sqrt(pi)),
    L(t) = (t/(t+nu))^((nu+1)/2).  nu = 1 recovers the horseshoe.

gdp(alpha, eta)
    theta | v ~ N(0, v), v ~ Exp(l^2/2), l ~ Gamma(alpha, eta).  The
    marginal density of v is
        pi(v) = (eta^alpha / (2 Gamma(alpha))) * (2/v)^(nu/2) * G_nu(beta),
    with nu = alpha + 2, beta = eta * sqrt(2/v) and
        G_nu(beta) = int_0^inf w^(nu-1) exp(-w^2 - beta w) dw.
    Hence a = alpha/2, L(v) = G_nu(beta(v)) / G_nu(0), and
    K = eta^alpha 2^(nu/2) Gamma(nu/2) / (4 Gamma(alpha)).  alpha = 1,
    eta = 1 is the standard double Pareto prior.

All registered families have sup L = tail limit = 1 and non-decreasing L,
so M = 1, c0 = 1/2, and t0 is the smallest t with L(t) >= 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np
from scipy import special as sp

from .errors import UnknownFamilyError, ValidationError

__all__ = [
    "PriorFamily",
    "TailRegularityReport",
    "make_family",
    "custom_family",
    "registered_families",
    "eval_L",
    "check_tail_regularity",
    "default_probe_grid",
]


@dataclass(frozen=True)
class PriorFamily:
    """Immutable description of one prior in the (a, K, L) class.

    Instances are value objects: equality and hashing use the metadata
    only, so two families built from the same name and parameters compare
    equal and may share caches.  The callables are pickleable (partials
    of module-level functions), which keeps multiprocessing workers happy.
    """

    name: str
    a: float
    K: float
    L: Callable = field(compare=False, repr=False)
    log_L: Callable = field(compare=False, repr=False)
    c0: float = 0.5
    t0: float = 1.0
    M: float = 1.0
    tail_limit: float = 1.0
    l_nondecreasing: bool = True
    params: tuple = ()

    def __post_init__(self):
        if not (self.a > 0):
            raise ValidationError(f"prior exponent a must be > 0, got {self.a}")
        for label, value in (("K", self.K), ("c0", self.c0), ("t0", self.t0), ("M", self.M)):
            if not (value > 0 and math.isfinite(value)):
                raise ValidationError(f"{label} must be a positive finite real, got {value}")
        if self.c0 > self.M:
            raise ValidationError("c0 cannot exceed the uniform bound M")

    def require_estimation_range(self) -> None:
        """Estimation and spread results need 0.5 <= a < 1."""
        if not (0.5 <= self.a < 1.0):
            raise ValidationError(
                f"family {self.name!r} has a = {self.a}; this operation requires 0.5 <= a < 1"
            )

    def describe(self) -> str:
        ps = ", ".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.name}({ps})" if ps else self.name


# ---------------------------------------------------------------------------
# L kernels.  Each has a plain form L(t) and a log form log L(log t); the
# log form is what the quadrature engine uses, so it must stay finite and
# accurate for log t anywhere in [-700, 700].
# ---------------------------------------------------------------------------


def _ratio_power_L(t, power, scale):
    # (t / (t + scale))^power written as (1 + scale/t)^(-power): stable at
    # both endpoints (t -> 0 gives 0, t -> inf gives 1).
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        return (1.0 + scale / t) ** (-power)


def _ratio_power_logL(log_t, power, scale):
    log_t = np.asarray(log_t, dtype=float)
    return -power * np.logaddexp(0.0, math.log(scale) - log_t)


def _exp_decay_L(t, scale):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        return np.exp(-scale / t)


def _exp_decay_logL(log_t, scale):
    log_t = np.asarray(log_t, dtype=float)
    with np.errstate(over="ignore"):
        return -scale * np.exp(-log_t)


# --- gdp: L via G_nu(beta) = int_0^inf w^(nu-1) exp(-w^2 - beta w) dw -------
#
# For moderate beta, G_nu is computed through the parabolic cylinder
# function:  G_nu(beta) = 2^(-nu/2) Gamma(nu) exp(beta^2/8) D_{-nu}(beta/sqrt 2).
# For large beta that product over/underflows, so an asymptotic expansion
# in beta^-2 takes over (terms Gamma(nu+2k)/(Gamma(nu) k!) beta^(-2k)).

_GDP_BETA_SWITCH = 40.0
_GDP_SERIES_TERMS = 12


def _log_g_weight(nu: float, log_beta):
    """log G_nu(beta) evaluated from log(beta); vectorized; handles beta -> 0+."""
    log_beta = np.asarray(log_beta, dtype=float)
    out = np.empty(log_beta.shape, dtype=float)
    small = log_beta <= math.log(_GDP_BETA_SWITCH)
    if np.any(small):
        beta = np.exp(log_beta[small])
        z = beta / math.sqrt(2.0)
        d = sp.pbdv(-nu, z)[0]
        out[small] = (
            sp.gammaln(nu) - 0.5 * nu * math.log(2.0) + beta * beta / 8.0 + np.log(d)
        )
    if np.any(~small):
        lb = log_beta[~small]
        acc = np.ones_like(lb)
        log_gnu = sp.gammaln(nu)
        for k in range(1, _GDP_SERIES_TERMS + 1):
            log_coeff = sp.gammaln(nu + 2 * k) - log_gnu - sp.gammaln(k + 1.0)
            term = np.exp(log_coeff - 2.0 * k * lb)
            acc += term if k % 2 == 0 else -term
        out[~small] = log_gnu - nu * lb + np.log(acc)
    return out


def _gdp_logL(log_t, nu, eta, log_g0):
    log_t = np.asarray(log_t, dtype=float)
    log_beta = math.log(eta) + 0.5 * math.log(2.0) - 0.5 * log_t
    return _log_g_weight(nu, log_beta) - log_g0


def _gdp_L(t, nu, eta, log_g0):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        return np.exp(_gdp_logL(np.log(t), nu, eta, log_g0))


def _solve_half_level(log_L: Callable, lo: float = -80.0, hi: float = 80.0) -> float:
    """Smallest log t with L(t) >= 1/2, for a non-decreasing L with limit 1."""
    target = math.log(0.5)
    if log_L(np.array([lo]))[0] >= target:
        return math.exp(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if log_L(np.array([mid]))[0] >= target:
            hi = mid
        else:
            lo = mid
    return math.exp(hi)


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------


def _positive(params: dict, key: str) -> float:
    if key not in params:
        raise ValidationError(f"missing required family parameter {key!r}")
    value = float(params[key])
    if not (value > 0 and math.isfinite(value)):
        raise ValidationError(f"parameter {key!r} must be a positive finite real, got {value}")
    return value


def _only_keys(name: str, params: dict, allowed: tuple[str, ...]) -> None:
    unknown = set(params) - set(allowed)
    if unknown:
        raise ValidationError(
            f"family {name!r} does not take parameters {sorted(unknown)}; "
            f"allowed: {list(allowed)}"
        )


def _build_horseshoe(**params) -> PriorFamily:
    if params:
        raise ValidationError("horseshoe takes no parameters")
    return PriorFamily(
        name="horseshoe",
        a=0.5,
        K=1.0 / math.pi,
        L=partial(_ratio_power_L, power=1.0, scale=1.0),
        log_L=partial(_ratio_power_logL, power=1.0, scale=1.0),
        t0=1.0,
    )


def _build_tpbn(**params) -> PriorFamily:
    _only_keys("tpbn", params, ("a_shape", "b_shape"))
    a = _positive(params, "a_shape")
    b = _positive(params, "b_shape")
    power = a + b
    K = math.exp(sp.gammaln(a + b) - sp.gammaln(a) - sp.gammaln(b))
    return PriorFamily(
        name="tpbn",
        a=a,
        K=K,
        L=partial(_ratio_power_L, power=power, scale=1.0),
        log_L=partial(_ratio_power_logL, power=power, scale=1.0),
        t0=1.0 / (2.0 ** (1.0 / power) - 1.0),
        params=(("a_shape", a), ("b_shape", b)),
    )


def _build_strawderman_berger(**params) -> PriorFamily:
    if params:
        raise ValidationError("strawderman-berger takes no parameters")
    fam = _build_tpbn(a_shape=0.5, b_shape=1.0)
    return PriorFamily(
        name="strawderman-berger",
        a=fam.a,
        K=fam.K,
        L=fam.L,
        log_L=fam.log_L,
        t0=fam.t0,
    )


def _build_neg(**params) -> PriorFamily:
    _only_keys("neg", params, ("shape", "scale"))
    shape = _positive(params, "shape")
    scale = _positive({"scale": params.get("scale", 1.0)}, "scale")
    power = shape + 1.0
    return PriorFamily(
        name="neg",
        a=shape,
        K=shape * scale**shape,
        L=partial(_ratio_power_L, power=power, scale=scale),
        log_L=partial(_ratio_power_logL, power=power, scale=scale),
        t0=scale / (2.0 ** (1.0 / power) - 1.0),
        params=(("shape", shape), ("scale", scale)),
    )


def _build_inverse_gamma(**params) -> PriorFamily:
    _only_keys("inverse-gamma", params, ("shape", "scale"))
    shape = _positive({"shape": params.get("shape", 0.5)}, "shape")
    scale = _positive({"scale": params.get("scale", 1.0)}, "scale")
    K = math.exp(shape * math.log(scale) - sp.gammaln(shape))
    return PriorFamily(
        name="inverse-gamma",
        a=shape,
        K=K,
        L=partial(_exp_decay_L, scale=scale),
        log_L=partial(_exp_decay_logL, scale=scale),
        t0=scale / math.log(2.0),
        params=(("shape", shape), ("scale", scale)),
    )


def _build_half_t(**params) -> PriorFamily:
    _only_keys("half-t", params, ("nu",))
    nu = _positive(params, "nu")
    power = 0.5 * (nu + 1.0)
    K = math.exp(
        sp.gammaln(0.5 * (nu + 1.0))
        - sp.gammaln(0.5 * nu)
        + 0.5 * nu * math.log(nu)
        - 0.5 * math.log(math.pi)
    )
    return PriorFamily(
        name="half-t",
        a=0.5 * nu,
        K=K,
        L=partial(_ratio_power_L, power=power, scale=nu),
        log_L=partial(_ratio_power_logL, power=power, scale=nu),
        t0=nu / (2.0 ** (1.0 / power) - 1.0),
        params=(("nu", nu),),
    )


def _build_gdp(**params) -> PriorFamily:
    _only_keys("gdp", params, ("alpha", "eta"))
    alpha = _positive(params, "alpha")
    eta = _positive({"eta": params.get("eta", 1.0)}, "eta")
    nu = alpha + 2.0
    log_g0 = sp.gammaln(0.5 * nu) - math.log(2.0)
    K = math.exp(
        alpha * math.log(eta)
        + 0.5 * nu * math.log(2.0)
        + sp.gammaln(0.5 * nu)
        - math.log(4.0)
        - sp.gammaln(alpha)
    )
    log_L = partial(_gdp_logL, nu=nu, eta=eta, log_g0=log_g0)
    return PriorFamily(
        name="gdp",
        a=0.5 * alpha,
        K=K,
        L=partial(_gdp_L, nu=nu, eta=eta, log_g0=log_g0),
        log_L=log_L,
        t0=_solve_half_level(log_L),
        params=(("alpha", alpha), ("eta", eta)),
    )


_REGISTRY: dict[str, Callable[..., PriorFamily]] = {
    "horseshoe": _build_horseshoe,
    "tpbn": _build_tpbn,
    "strawderman-berger": _build_strawderman_berger,
    "neg": _build_neg,
    "inverse-gamma": _build_inverse_gamma,
    "half-t": _build_half_t,
    "gdp": _build_gdp,
}


def registered_families() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


def make_family(name: str, **params) -> PriorFamily:
    """Build a registered prior family from its name and shape parameters."""
    key = name.strip().lower().replace("_", "-")
    try:
        builder = _REGISTRY[key]
    except KeyError:
        raise UnknownFamilyError(
            f"unknown family {name!r}; registered: {', '.join(registered_families())}"
        ) from None
    return builder(**params)


_CUSTOM_LOG_EPS = 1e-300


def _wrapped_logL(log_t, L):
    log_t = np.asarray(log_t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        vals = np.asarray(L(np.exp(log_t)), dtype=float)
        return np.log(np.maximum(vals, 0.0) + _CUSTOM_LOG_EPS)


def custom_family(
    name: str,
    a: float,
    K: float,
    L: Callable,
    log_L: Callable | None = None,
    c0: float = 0.5,
    t0: float = 1.0,
    M: float = 1.0,
    tail_limit: float = 1.0,
    l_nondecreasing: bool = False,
) -> PriorFamily:
    """Wrap an arbitrary L into a PriorFamily, mainly for validation tests.

    No regularity is enforced here; run check_tail_regularity to see
    whether the wrapped function actually satisfies the class conditions.
    Distinct custom L's should use distinct names (metadata drives caching).
    """
    if log_L is None:
        log_L = partial(_wrapped_logL, L=L)
    return PriorFamily(
        name=name,
        a=a,
        K=K,
        L=L,
        log_L=log_L,
        c0=c0,
        t0=t0,
        M=M,
        tail_limit=tail_limit,
        l_nondecreasing=l_nondecreasing,
        params=(("custom", 1.0),),
    )


def eval_L(family: PriorFamily, t) -> np.ndarray | float:
    """Evaluate L at t > 0 (scalar or array), checking the output range."""
    arr = np.asarray(t, dtype=float)
    if arr.size == 0 or not np.all(arr > 0):
        raise ValidationError("eval_L requires t > 0")
    vals = np.asarray(family.L(arr), dtype=float)
    if not np.all(np.isfinite(vals)) or not np.all(vals > 0):
        raise ValidationError(
            f"L for family {family.name!r} must be finite and positive on t > 0"
        )
    return float(vals) if np.isscalar(t) or arr.ndim == 0 else vals


# ---------------------------------------------------------------------------
# Regularity audit
# ---------------------------------------------------------------------------

SLOW_VARIATION_TOL = 1e-3
_SLOW_VARIATION_ONSET = 1e10


def default_probe_grid(lo: float = 1e-6, hi: float = 1e12, points: int = 400) -> np.ndarray:
    return np.geomspace(lo, hi, points)


@dataclass(frozen=True)
class TailRegularityReport:
    """Numeric audit of the boundedness / tail / slow-variation conditions."""

    family: str
    max_L: float
    min_L_tail: float
    tail_limit_estimate: float
    slow_variation_dev: float
    bounded_ok: bool
    tail_lower_ok: bool
    tail_limit_ok: bool
    slow_variation_ok: bool
    nondecreasing_ok: bool | None

    @property
    def passed(self) -> bool:
        checks = [
            self.bounded_ok,
            self.tail_lower_ok,
            self.tail_limit_ok,
            self.slow_variation_ok,
        ]
        if self.nondecreasing_ok is not None:
            checks.append(self.nondecreasing_ok)
        return all(checks)

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "max_L": self.max_L,
            "min_L_tail": self.min_L_tail,
            "tail_limit_estimate": self.tail_limit_estimate,
            "slow_variation_dev": self.slow_variation_dev,
            "bounded_ok": self.bounded_ok,
            "tail_lower_ok": self.tail_lower_ok,
            "tail_limit_ok": self.tail_limit_ok,
            "slow_variation_ok": self.slow_variation_ok,
            "nondecreasing_ok": self.nondecreasing_ok,
            "passed": self.passed,
        }


def check_tail_regularity(
    family: PriorFamily, grid: np.ndarray | None = None
) -> TailRegularityReport:
    """Probe L on a log grid and report pass/fail flags (never raises on a
    failing family; the report carries the flags)."""
    if grid is None:
        grid = default_probe_grid()
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0):
        raise ValidationError("probe grid must be non-empty and positive")
    grid = np.sort(grid)
    span = math.log10(grid[-1] / grid[0])
    if span < 8.0:
        raise ValidationError(f"probe grid must span at least 8 decades, got {span:.2f}")

    with np.errstate(all="ignore"):
        vals = np.asarray(family.L(grid), dtype=float)

    max_L = float(np.nanmax(vals))
    tail_mask = grid >= family.t0
    min_L_tail = float(np.nanmin(vals[tail_mask])) if np.any(tail_mask) else math.nan

    last_decade = grid >= grid[-1] / 10.0
    tail_limit_estimate = float(np.nanmean(vals[last_decade]))

    sv_mask = grid >= _SLOW_VARIATION_ONSET
    sv_dev = 0.0
    if np.any(sv_mask):
        base = grid[sv_mask]
        with np.errstate(all="ignore"):
            for mult in (2.0, 10.0):
                ratio = np.asarray(family.L(mult * base), dtype=float) / vals[sv_mask]
                dev = np.abs(ratio - 1.0)
                finite = np.isfinite(dev)
                # undefined ratios (0/0 from an underflowed tail) count as failure
                sv_dev = max(sv_dev, float(dev[finite].max()) if finite.any() else math.inf)

    nondecreasing_ok: bool | None = None
    if family.l_nondecreasing:
        diffs = np.diff(vals)
        nondecreasing_ok = bool(np.all(diffs >= -1e-12 * np.maximum(vals[:-1], 1e-300)))

    return TailRegularityReport(
        family=family.describe(),
        max_L=max_L,
        min_L_tail=min_L_tail,
        tail_limit_estimate=tail_limit_estimate,
        slow_variation_dev=sv_dev,
        bounded_ok=bool(np.isfinite(max_L) and max_L <= family.M * (1.0 + 1e-9)),
        tail_lower_ok=bool(
            np.isfinite(min_L_tail) and min_L_tail >= family.c0 * (1.0 - 1e-9)
        ),
        tail_limit_ok=bool(
            np.isfinite(tail_limit_estimate) and tail_limit_estimate > 1e-12
        ),
        slow_variation_ok=bool(sv_dev < SLOW_VARIATION_TOL),
        nondecreasing_ok=nondecreasing_ok,
    )
