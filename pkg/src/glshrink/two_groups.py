"""Two-groups mixture model, the Bayes oracle, and the induced tests.

Observations follow X_i ~ (1-p) N(0, 1) + p N(0, 1 + psi^2) i.i.d.; each
test asks whether coordinate i came from the null (spike) component.
Under additive 0-1 loss the optimal rule is the fixed threshold
|X_i| > c with

    c^2 = ((1 + psi^2)/psi^2) (log(1 + psi^2) + 2 log((1-p)/p)),

unattainable in practice because (p, psi^2) are unknown ("Bayes oracle").
The one-group decision rule rejects when the posterior shrinkage weight
1 - E(kappa | X_i, tau) exceeds 1/2; because E(kappa | x, tau) is
(verified) non-increasing in |x|, that rule is also a fixed threshold
|X_i| > x*(tau), so both its error rates are exact Gaussian tail values
rather than asymptotic estimates.  tau may be tuned or replaced by the
empirical count-based estimate tau_hat.

Sparse-limit quantities (error rates of the oracle, the limiting risk
ratio of the induced rule) are parameterized by C, the limit of
log(v)/u along sequences with p -> 0, u = psi^2 -> infinity,
v = u ((1-p)/p)^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .errors import ValidationError
from .families import PriorFamily
from .posterior import decision_threshold

__all__ = [
    "TwoGroupsModel",
    "DecisionReport",
    "EmpiricalBayesConfig",
    "oracle_threshold",
    "exact_rule_errors",
    "oracle_asymptotics",
    "induced_rule_errors",
    "empirical_bayes_tau",
    "abos_limit",
    "gaussian_cdf",
    "make_report",
]


def gaussian_cdf(z) -> np.ndarray | float:
    """Standard normal CDF via the complementary error function."""
    return sp.ndtr(z)


@dataclass(frozen=True)
class TwoGroupsModel:
    """Mixing proportion p and slab variance psi^2, with u, v derived."""

    p: float
    psi_sq: float
    c_const: float | None = None

    def __post_init__(self):
        if not (0.0 < self.p < 1.0):
            raise ValidationError(f"mixing proportion p must lie in (0, 1), got {self.p}")
        if not (self.psi_sq > 0.0 and math.isfinite(self.psi_sq)):
            raise ValidationError(f"slab variance psi^2 must be positive, got {self.psi_sq}")

    @property
    def u(self) -> float:
        return self.psi_sq

    @property
    def v(self) -> float:
        odds = (1.0 - self.p) / self.p
        return self.psi_sq * odds * odds


@dataclass(frozen=True)
class DecisionReport:
    """Exact per-rule error rates and risk for one fixed-threshold test."""

    rule: str
    threshold: float
    t1: float
    t2: float
    n: int
    bayes_risk: float
    oracle_risk: float
    risk_ratio: float

    def as_dict(self) -> dict:
        return {
            "rule": self.rule,
            "threshold": self.threshold,
            "t1": self.t1,
            "t2": self.t2,
            "n": self.n,
            "bayes_risk": self.bayes_risk,
            "oracle_risk": self.oracle_risk,
            "risk_ratio": self.risk_ratio,
        }


@dataclass(frozen=True)
class EmpiricalBayesConfig:
    """Constants of the exceedance-count estimate of tau."""

    c1: float = 2.0
    c2: float = 1.0

    def __post_init__(self):
        if self.c1 < 2.0:
            raise ValidationError(f"c1 must be >= 2, got {self.c1}")
        if self.c2 < 1.0:
            raise ValidationError(f"c2 must be >= 1, got {self.c2}")


def oracle_threshold(model: TwoGroupsModel) -> float:
    """|x| cutoff of the risk-optimal rule; errors if the rule degenerates."""
    psi_sq = model.psi_sq
    c_sq = ((1.0 + psi_sq) / psi_sq) * (
        math.log1p(psi_sq) + 2.0 * math.log((1.0 - model.p) / model.p)
    )
    if c_sq <= 0.0:
        raise ValidationError(
            f"degenerate oracle (c^2 = {c_sq:.4g} <= 0): p = {model.p} too large "
            f"for slab variance {psi_sq}; the rule would always reject"
        )
    return math.sqrt(c_sq)


def exact_rule_errors(threshold: float, psi_sq: float) -> tuple[float, float]:
    """Exact (type I, type II) error rates of the rule |X| > threshold.

    t1 = 2 (1 - Phi(threshold)); t2 = 2 Phi(threshold / sqrt(1 + psi^2)) - 1.
    psi_sq = 0 is allowed (degenerate slab, for calibration checks).
    """
    if not (threshold > 0.0):
        raise ValidationError(f"threshold must be positive, got {threshold}")
    if psi_sq < 0.0:
        raise ValidationError(f"psi^2 must be non-negative, got {psi_sq}")
    t1 = 2.0 * sp.ndtr(-threshold)
    t2 = float(sp.erf(threshold / math.sqrt(2.0 * (1.0 + psi_sq))))
    return float(t1), t2


def oracle_asymptotics(model: TwoGroupsModel, n: int) -> tuple[float, float, float]:
    """Sparse-limit (t1, t2, risk) of the oracle: requires model.c_const."""
    if model.c_const is None:
        raise ValidationError("oracle_asymptotics needs a model with c_const set")
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    v = model.v
    if v <= 1.0:
        raise ValidationError(f"sparse-limit forms need v > 1, got v = {v}")
    C = model.c_const
    t1_bo = math.exp(-0.5 * C) * math.sqrt(2.0 / (math.pi * v * math.log(v)))
    t2_bo = float(sp.erf(math.sqrt(0.5 * C)))
    r_opt = n * model.p * t2_bo
    return t1_bo, t2_bo, r_opt


def induced_rule_errors(
    tau: float, family: PriorFamily, model: TwoGroupsModel
) -> tuple[float, float]:
    """Exact error rates of the one-group 0.5-threshold rule at this tau.

    The rates are identical across coordinates (i.i.d. marginals)."""
    x_star = decision_threshold(tau, family)
    return exact_rule_errors(x_star, model.psi_sq)


def empirical_bayes_tau(xs, cfg: EmpiricalBayesConfig = EmpiricalBayesConfig()) -> float:
    """tau_hat = max(1/n, #{j : |x_j| > sqrt(c1 log n)} / (c2 n))."""
    xs = np.asarray(xs, dtype=float)
    n = xs.size
    if n < 2:
        raise ValidationError(f"empirical_bayes_tau needs at least 2 observations, got {n}")
    cutoff = math.sqrt(cfg.c1 * math.log(n))
    count = int(np.count_nonzero(np.abs(xs) > cutoff))
    return max(1.0 / n, count / (cfg.c2 * n))


def abos_limit(a: float, alpha: float, c_const: float) -> float:
    """Limiting risk ratio of the induced rule over the oracle when
    tau is of order p^alpha:  (2 Phi(sqrt(2 a alpha C)) - 1)/(2 Phi(sqrt C) - 1).

    Equals 1 exactly at a = 1/2, alpha = 1; non-decreasing in both."""
    if not (0.5 <= a < 1.0):
        raise ValidationError(f"abos_limit requires a in [0.5, 1), got {a}")
    if alpha < 1.0:
        raise ValidationError(f"abos_limit requires alpha >= 1, got {alpha}")
    if not (c_const > 0.0):
        raise ValidationError(f"c_const must be positive, got {c_const}")
    return float(
        sp.erf(math.sqrt(a * alpha * c_const)) / sp.erf(math.sqrt(0.5 * c_const))
    )


def make_report(
    rule: str,
    threshold: float,
    model: TwoGroupsModel,
    n: int,
    oracle_risk: float | None = None,
) -> DecisionReport:
    """Assemble the exact-risk report for a fixed-threshold rule."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    t1, t2 = exact_rule_errors(threshold, model.psi_sq)
    risk = n * ((1.0 - model.p) * t1 + model.p * t2)
    if oracle_risk is None:
        c = oracle_threshold(model)
        t1_o, t2_o = exact_rule_errors(c, model.psi_sq)
        oracle_risk = n * ((1.0 - model.p) * t1_o + model.p * t2_o)
    ratio = risk / oracle_risk if oracle_risk > 0 else math.inf
    return DecisionReport(
        rule=rule,
        threshold=threshold,
        t1=t1,
        t2=t2,
        n=n,
        bayes_risk=risk,
        oracle_risk=oracle_risk,
        risk_ratio=ratio,
    )
