"""Per-observation posterior quantities for the normal means model.

Under x | theta ~ N(theta, 1), theta | t ~ N(0, t * tau^2), t ~ K t^(-a-1) L(t),
the shrinkage coefficient kappa = 1/(1 + t * tau^2) has posterior density
proportional to

    f(kappa) = kappa^(a - 1/2) (1 - kappa)^(-a-1)
               * L((1/tau^2) (1/kappa - 1)) * exp(-kappa x^2 / 2)

on (0, 1).  Everything here (moments of kappa, the posterior mean
T_tau(x) = (1 - E(kappa | x, tau)) x, the posterior variance, tail
probabilities, posterior draws of theta, and the 0.5-threshold of the
induced multiple-testing rule) is computed from that one integrand with
the shared adaptive engine: numerator and denominator of every ratio come
from the same panel set.

The posterior variance is assembled through two algebraically identical
decompositions,

    v1 = E(1-kappa) + x^2 (E kappa^2   - (E kappa)^2)
    v2 = E(1-kappa) + x^2 (E(1-kappa)^2 - (E(1-kappa))^2),

whose moments are integrated separately; disagreement beyond 1e-8
relative signals a quadrature failure and raises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import NumericalError, ThresholdError, ValidationError
from .families import PriorFamily
from .quadrature import DEFAULT_REL_TOL, unit_interval_integrate, z_from_u

__all__ = [
    "PosteriorQuery",
    "PosteriorSummary",
    "kappa_density",
    "kappa_moment",
    "posterior_mean",
    "posterior_variance",
    "posterior_summary",
    "kappa_tail_prob",
    "sample_posterior",
    "decision_threshold",
]

REL_TOL_MIN = 1e-12
REL_TOL_MAX = 1e-4
VARIANCE_IDENTITY_RTOL = 1e-8


@dataclass(frozen=True)
class PosteriorQuery:
    """One (observation, global scale, family) evaluation request."""

    x: float
    tau: float
    family: PriorFamily
    rel_tol: float = DEFAULT_REL_TOL

    def __post_init__(self):
        if not math.isfinite(self.x):
            raise ValidationError(f"observation x must be finite, got {self.x}")
        if not (0.0 < self.tau < 1.0):
            raise ValidationError(f"tau must lie in (0, 1), got {self.tau}")
        if not (REL_TOL_MIN <= self.rel_tol <= REL_TOL_MAX):
            raise ValidationError(
                f"rel_tol must lie in [{REL_TOL_MIN:g}, {REL_TOL_MAX:g}], got {self.rel_tol}"
            )


@dataclass(frozen=True)
class PosteriorSummary:
    """Shrinkage-coefficient moments and the induced mean/variance."""

    e_kappa: float
    e_kappa_sq: float
    mean: float
    variance: float
    shrinkage_weight: float

    def __post_init__(self):
        if not (0.0 < self.e_kappa < 1.0) or not (0.0 < self.e_kappa_sq < 1.0):
            raise ValidationError("kappa moments must lie strictly in (0, 1)")
        if self.e_kappa_sq > self.e_kappa * (1.0 + 1e-12):
            raise ValidationError("E(kappa^2) cannot exceed E(kappa) on (0,1)")
        if self.variance <= 0.0:
            raise ValidationError("posterior variance must be positive")


def _moment_log_components(family: PriorFamily, x: float, tau: float) -> Callable:
    a = family.a
    log_L = family.log_L
    two_log_tau = 2.0 * math.log(tau)
    half_xsq = 0.5 * x * x

    def components(kappa, one_m, log_k, log_omk):
        base = (
            (a - 0.5) * log_k
            + (-a - 1.0) * log_omk
            + log_L(log_omk - log_k - two_log_tau)
            - half_xsq * kappa
        )
        return np.stack([
            base,                       # mass
            base + log_k,               # kappa
            base + 2.0 * log_k,         # kappa^2
            base + log_omk,             # 1 - kappa
            base + 2.0 * log_omk,       # (1 - kappa)^2
        ])

    return components


@lru_cache(maxsize=100_000)
def _raw_moments(family: PriorFamily, x_abs: float, tau: float, rel_tol: float):
    """(mass, E k, E k^2, E(1-k), E(1-k)^2) dependence enters via |x| only."""
    integrals = unit_interval_integrate(
        _moment_log_components(family, x_abs, tau), rel_tol=rel_tol
    )
    mass = integrals[0]
    if not (mass > 0 and math.isfinite(mass)):
        raise NumericalError(
            f"posterior mass integral is {mass} for x={x_abs}, tau={tau}, "
            f"family={family.describe()}"
        )
    return (
        mass,
        float(integrals[1] / mass),
        float(integrals[2] / mass),
        float(integrals[3] / mass),
        float(integrals[4] / mass),
    )


def _moments(query: PosteriorQuery):
    return _raw_moments(query.family, abs(query.x), query.tau, query.rel_tol)


def kappa_density(query: PosteriorQuery) -> Callable:
    """Unnormalized posterior density of kappa on (0, 1), vectorized."""
    a = query.family.a
    inv_tau_sq = query.tau ** -2.0
    half_xsq = 0.5 * query.x * query.x
    L = query.family.L

    def density(kappa):
        kappa = np.asarray(kappa, dtype=float)
        if np.any(kappa <= 0.0) or np.any(kappa >= 1.0):
            raise ValidationError("kappa density is defined on the open interval (0, 1)")
        t = inv_tau_sq * (1.0 / kappa - 1.0)
        return (
            kappa ** (a - 0.5)
            * (1.0 - kappa) ** (-a - 1.0)
            * np.asarray(L(t), dtype=float)
            * np.exp(-half_xsq * kappa)
        )

    return density


def kappa_moment(query: PosteriorQuery, r: int) -> float:
    """E(kappa^r | x, tau) for r in {1, 2}."""
    if r not in (1, 2):
        raise ValidationError(f"moment order r must be 1 or 2, got {r}")
    moments = _moments(query)
    return moments[1] if r == 1 else moments[2]


def posterior_mean(query: PosteriorQuery) -> float:
    """T_tau(x) = (1 - E(kappa | x, tau)) * x; odd in x."""
    return (1.0 - kappa_moment(query, 1)) * query.x


def _variance_pair(query: PosteriorQuery):
    _, e_k, e_k2, e_w, e_w2 = _moments(query)
    xsq = query.x * query.x
    v1 = e_w + xsq * (e_k2 - e_k * e_k)
    v2 = e_w + xsq * (e_w2 - e_w * e_w)
    return v1, v2


def posterior_variance(query: PosteriorQuery) -> float:
    """Var(theta | x, tau), cross-checked through both moment decompositions."""
    v1, v2 = _variance_pair(query)
    scale = max(abs(v1), abs(v2), 1e-300)
    if abs(v1 - v2) > VARIANCE_IDENTITY_RTOL * scale:
        raise NumericalError(
            f"posterior variance identities disagree ({v1!r} vs {v2!r}) "
            f"for x={query.x}, tau={query.tau}: quadrature failure"
        )
    variance = 0.5 * (v1 + v2)
    if not (0.0 < variance <= 1.0 + query.x * query.x + 1e-9):
        raise NumericalError(
            f"posterior variance {variance} outside (0, 1 + x^2] for x={query.x}"
        )
    return variance


def posterior_summary(query: PosteriorQuery) -> PosteriorSummary:
    _, e_k, e_k2, _, _ = _moments(query)
    return PosteriorSummary(
        e_kappa=e_k,
        e_kappa_sq=e_k2,
        mean=(1.0 - e_k) * query.x,
        variance=posterior_variance(query),
        shrinkage_weight=1.0 - e_k,
    )


def kappa_tail_prob(query: PosteriorQuery, eta: float) -> float:
    """Pr(kappa > eta | x, tau) for eta in (0, 1)."""
    if not (0.0 < eta < 1.0):
        raise ValidationError(f"eta must lie in (0, 1), got {eta}")
    components = _moment_log_components(query.family, abs(query.x), query.tau)

    def mass_only(kappa, one_m, log_k, log_omk):
        return components(kappa, one_m, log_k, log_omk)[:1]

    upper = unit_interval_integrate(mass_only, rel_tol=query.rel_tol, z_lo=eta)[0]
    lower = unit_interval_integrate(mass_only, rel_tol=query.rel_tol, z_hi=eta)[0]
    total = upper + lower
    if not (total > 0 and math.isfinite(total)):
        raise NumericalError(f"tail probability mass integral is {total}")
    return min(1.0, max(0.0, upper / total))


# ---------------------------------------------------------------------------
# Posterior sampling
# ---------------------------------------------------------------------------

_SAMPLER_MIN_NODES = 1 << 10
_SAMPLER_MAX_NODES = 1 << 16
_SAMPLER_QTOL = 1e-8


def _cdf_grid(query: PosteriorQuery):
    """Adaptively refined (u-grid, normalized CDF) pair for drawing kappa."""
    from .quadrature import _transformed  # same stable node evaluation

    components = _moment_log_components(query.family, abs(query.x), query.tau)
    probes = np.linspace(0.005, 0.995, 199)
    prev_inv = None
    nodes = _SAMPLER_MIN_NODES
    fvec = _transformed(lambda k, om, lk, lo: components(k, om, lk, lo)[:1])
    while True:
        u = np.linspace(-6.0, 6.0, nodes + 1)
        w = fvec(u)[0]
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (w[1:] + w[:-1]) * np.diff(u))])
        total = cdf[-1]
        if not (total > 0 and math.isfinite(total)):
            raise NumericalError("posterior sampler found no mass")
        cdf /= total
        inv = np.interp(probes, cdf, u)
        if prev_inv is not None and np.max(np.abs(inv - prev_inv)) < _SAMPLER_QTOL:
            return u, cdf
        if nodes >= _SAMPLER_MAX_NODES:
            return u, cdf
        prev_inv = inv
        nodes *= 2


def sample_posterior(query: PosteriorQuery, m: int, seed: int) -> np.ndarray:
    """m i.i.d. posterior draws of theta | x, tau; deterministic given seed.

    kappa is drawn by inverse CDF on the refined grid, then
    theta | kappa ~ N((1 - kappa) x, 1 - kappa).
    """
    if m < 1:
        raise ValidationError(f"sample count m must be >= 1, got {m}")
    u_grid, cdf = _cdf_grid(query)
    rng = np.random.default_rng(seed)
    u_draw = np.interp(rng.random(m), cdf, u_grid)
    # kappa | x depends on x only through x^2; the signed x re-enters below.
    kappa = z_from_u(u_draw)
    one_m = 1.0 - kappa
    return one_m * query.x + np.sqrt(one_m) * rng.standard_normal(m)


# ---------------------------------------------------------------------------
# Induced-rule decision threshold
# ---------------------------------------------------------------------------

_THRESHOLD_FTOL = 1e-10
_THRESHOLD_VERIFY = 1e-9
_MONOTONE_GRID = 64
_BRACKET_EXPANSIONS = 3


def _e_kappa(family: PriorFamily, x: float, tau: float, rel_tol: float) -> float:
    return _raw_moments(family, abs(x), tau, rel_tol)[1]


def decision_threshold(
    tau: float, family: PriorFamily, rel_tol: float = DEFAULT_REL_TOL
) -> float:
    """Smallest x* > 0 with E(kappa | x*, tau) = 1/2.

    |x| > x* is exactly the rejection region of the rule "reject when the
    posterior shrinkage weight 1 - E(kappa) exceeds 1/2", provided
    E(kappa | x, tau) is non-increasing in |x|; that monotonicity is
    verified on a 64-point grid over [0, 2 x*] before returning.
    """
    if not (0.0 < tau < 1.0):
        raise ValidationError(f"tau must lie in (0, 1), got {tau}")
    f0 = _e_kappa(family, 0.0, tau, rel_tol) - 0.5
    if f0 <= 0.0:
        raise ThresholdError(
            f"E(kappa | 0, tau={tau}) <= 1/2: the induced rule rejects everything"
        )
    hi = 20.0 * math.sqrt(max(4.0 * family.a * math.log(1.0 / tau), 1e-8))
    expansions = 0
    while _e_kappa(family, hi, tau, rel_tol) - 0.5 > 0.0:
        expansions += 1
        if expansions > _BRACKET_EXPANSIONS:
            raise ThresholdError(
                f"no sign change for the decision threshold below x={hi:.3g} "
                f"(tau={tau}, family={family.describe()})"
            )
        hi *= 2.0

    lo = 0.0
    x_star = 0.5 * hi
    for _ in range(200):
        x_star = 0.5 * (lo + hi)
        fm = _e_kappa(family, x_star, tau, rel_tol) - 0.5
        if abs(fm) <= _THRESHOLD_FTOL:
            break
        if fm > 0.0:
            lo = x_star
        else:
            hi = x_star
        if hi - lo < 1e-14 * max(1.0, hi):
            break

    residual = abs(_e_kappa(family, x_star, tau, rel_tol) - 0.5)
    if residual > _THRESHOLD_VERIFY:
        raise ThresholdError(
            f"threshold solve stalled with |E(kappa) - 1/2| = {residual:.2e}"
        )

    grid = np.linspace(0.0, 2.0 * x_star, _MONOTONE_GRID)
    values = np.array([_e_kappa(family, g, tau, rel_tol) for g in grid])
    rises = np.diff(values) > 1e-8 * np.maximum(values[:-1], 1e-12)
    if np.any(rises):
        raise ThresholdError(
            "E(kappa | x, tau) is not non-increasing in |x| on [0, 2 x*]; "
            "closed-form error rates for the induced rule would be invalid"
        )
    return x_star
