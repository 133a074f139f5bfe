"""Desk-scale experiment harness.

Four experiment families, all emitting plain row dictionaries plus a
summary dictionary (serialized by the CLI):

* estimation risk   mean squared error of the posterior-mean estimate on
                    nearly black vectors, against the sparse minimax level
                    2 q log(n/q) and the closed-form risk ceiling.
* posterior spread  total posterior variance against its closed lower and
                    upper forms.
* contraction       posterior mass outside balls of squared radius
                    M_n q log(n/q) around the truth and around the
                    posterior mean, by coordinate-wise posterior sampling.
* oracle ratio      risk of the induced 0.5-threshold rule over the exact
                    two-groups oracle risk along sparse asymptotic
                    sequences (deterministic), plus a Monte Carlo variant
                    for the empirical-Bayes rule.

Everything is deterministic given the root seed: replication r uses the
stream seeded by SeedSequence(root_seed, experiment_tag, r), so results do
not depend on worker count or scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import TableError, ValidationError
from .families import PriorFamily
from .posterior import _raw_moments, decision_threshold
from .quadrature import DEFAULT_REL_TOL, z_from_u
from .two_groups import TwoGroupsModel, exact_rule_errors, oracle_threshold

__all__ = [
    "SparseMeanScenario",
    "ExperimentConfig",
    "ShrinkageTable",
    "minimax_risk",
    "risk_ceiling_form",
    "spread_lower_form",
    "tau_from_rule",
    "simulate_nearly_black",
    "estimation_risk_experiment",
    "posterior_spread_experiment",
    "contraction_experiment",
    "build_asymptotic_sequence",
    "abos_experiment",
    "eb_risk_experiment",
]


# ---------------------------------------------------------------------------
# Closed forms and scenario plumbing
# ---------------------------------------------------------------------------


def minimax_risk(n: int, q: int) -> float:
    """Leading term 2 q log(n/q) of the sparse-means minimax l2 risk."""
    if not (0 < q < n):
        raise ValidationError(f"need 0 < q < n, got q={q}, n={n}")
    return 2.0 * q * math.log(n / q)


def risk_ceiling_form(n: int, q: int, tau: float, a: float) -> float:
    """q log(1/tau^2a) + (n - q) tau^2a sqrt(log(1/tau^2a))."""
    log_term = 2.0 * a * math.log(1.0 / tau)
    return q * log_term + (n - q) * tau ** (2.0 * a) * math.sqrt(log_term)


def spread_lower_form(n: int, q: int, tau: float) -> float:
    """(n - q) tau sqrt(log(1/tau)); valid for a = 1/2, non-decreasing L."""
    return (n - q) * tau * math.sqrt(math.log(1.0 / tau))


def tau_from_rule(rule: str, n: int, q: int) -> float:
    """tau from 'sqrtlog' ((q/n) sqrt(log(n/q))) or 'power:ALPHA' ((q/n)^ALPHA)."""
    frac = q / n
    if rule == "sqrtlog":
        tau = frac * math.sqrt(math.log(n / q))
    elif rule.startswith("power"):
        _, _, arg = rule.partition(":")
        alpha = float(arg) if arg else 1.0
        if alpha <= 0:
            raise ValidationError(f"power tau rule needs alpha > 0, got {alpha}")
        tau = frac**alpha
    else:
        raise ValidationError(f"unknown tau rule {rule!r}; use 'sqrtlog' or 'power:ALPHA'")
    if not (0.0 < tau < 1.0):
        raise ValidationError(f"tau rule {rule!r} gives tau={tau} outside (0, 1)")
    return tau


@dataclass(frozen=True)
class SparseMeanScenario:
    """A nearly black mean vector with its tau rule."""

    n: int
    q_n: int
    theta0: np.ndarray = field(compare=False, repr=False)
    signal_magnitude: float
    tau_rule: str

    def __post_init__(self):
        if not (0 < self.q_n < self.n):
            raise ValidationError(f"need 0 < q_n < n, got q_n={self.q_n}, n={self.n}")
        nz = int(np.count_nonzero(self.theta0))
        if nz != self.q_n or self.theta0.size != self.n:
            raise ValidationError(
                f"theta0 must have exactly q_n={self.q_n} non-zeros in length n={self.n}; "
                f"got {nz} in {self.theta0.size}"
            )
        self.tau  # computed eagerly to validate the rule

    @property
    def tau(self) -> float:
        return tau_from_rule(self.tau_rule, self.n, self.q_n)


def simulate_nearly_black(
    n: int,
    q: int,
    magnitude: float | None = None,
    seed=0,
    tau_rule: str = "sqrtlog",
) -> SparseMeanScenario:
    """q signals of the given magnitude at uniformly random positions.

    Default magnitude sqrt(2 log(n/q)), the near-worst-case scale for
    threshold-type estimators; the realized sup-risk therefore lower-bounds
    the sup over the sparsity class rather than attaining it exactly.
    """
    if not (0 < q < n):
        raise ValidationError(f"need 0 < q < n, got q={q}, n={n}")
    if magnitude is None:
        magnitude = math.sqrt(2.0 * math.log(n / q))
    if magnitude <= 0:
        raise ValidationError(f"signal magnitude must be positive, got {magnitude}")
    rng = np.random.default_rng(seed)
    theta0 = np.zeros(n)
    theta0[rng.choice(n, size=q, replace=False)] = magnitude
    return SparseMeanScenario(
        n=n, q_n=q, theta0=theta0, signal_magnitude=magnitude, tau_rule=tau_rule
    )


@dataclass(frozen=True)
class ExperimentConfig:
    """Run parameters shared by the sweep experiments."""

    family: PriorFamily
    n_grid: tuple[int, ...]
    q_rule: str = "pow:0.4"          # 'pow:B' -> ceil(n^B), or 'fixed:Q'
    tau_rule: str = "sqrtlog"
    replications: int = 20
    posterior_draws: int = 1000
    m_n_rule: str = "log_n"          # radius inflation: 'log_n' or 'n'
    signal_magnitude: float | None = None
    root_seed: int = 20260808
    workers: int = 1
    table_points: int = 2048
    table_x_max: float = 40.0

    def __post_init__(self):
        if self.replications < 1:
            raise ValidationError("replications must be >= 1")
        if len(self.n_grid) == 0 or any(n < 4 for n in self.n_grid):
            raise ValidationError("n_grid must contain integers >= 4")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")

    def q_for(self, n: int) -> int:
        kind, _, arg = self.q_rule.partition(":")
        if kind == "pow":
            q = math.ceil(n ** float(arg))
        elif kind == "fixed":
            q = int(arg)
        else:
            raise ValidationError(f"unknown q rule {self.q_rule!r}; use 'pow:B' or 'fixed:Q'")
        if not (0 < q < n):
            raise ValidationError(f"q rule {self.q_rule!r} gives q={q} outside (0, {n})")
        return q

    def m_n(self, n: int) -> float:
        if self.m_n_rule == "log_n":
            return math.log(n)
        if self.m_n_rule == "n":
            return float(n)
        raise ValidationError(f"unknown m_n rule {self.m_n_rule!r}; use 'log_n' or 'n'")


# ---------------------------------------------------------------------------
# Fast path: spline tables of the kappa moments over |x|
# ---------------------------------------------------------------------------

TABLE_VALIDATION_TOL = 1e-6
_TABLE_VALIDATION_POINTS = 100


class ShrinkageTable:
    """Cubic-spline tables of E(kappa | x, tau) and E(kappa^2 | x, tau) on
    |x| in [0, x_max], validated against direct quadrature at build time.

    Per-coordinate posterior means and variances for large n route through
    these tables; queries beyond x_max (rare) fall back to quadrature.
    """

    def __init__(self, family: PriorFamily, tau: float, grid, e_k, e_k2):
        self.family = family
        self.tau = tau
        self.x_max = float(grid[-1])
        self._spline_k = CubicSpline(grid, e_k, bc_type=((1, 0.0), "not-a-knot"))
        self._spline_k2 = CubicSpline(grid, e_k2, bc_type=((1, 0.0), "not-a-knot"))

    @classmethod
    def build(
        cls,
        family: PriorFamily,
        tau: float,
        x_max: float = 40.0,
        points: int = 2048,
        rel_tol: float = DEFAULT_REL_TOL,
        validate: bool = True,
        validation_seed: int = 1,
    ) -> "ShrinkageTable":
        grid = np.linspace(0.0, x_max, points)
        e_k = np.empty(points)
        e_k2 = np.empty(points)
        for i, x in enumerate(grid):
            _, e_k[i], e_k2[i], _, _ = _raw_moments(family, float(x), tau, rel_tol)
        table = cls(family, tau, grid, e_k, e_k2)
        if validate:
            rng = np.random.default_rng(validation_seed)
            probes = rng.uniform(0.0, x_max, _TABLE_VALIDATION_POINTS)
            worst = 0.0
            for x in probes:
                _, exact, _, _, _ = _raw_moments(family, float(x), tau, rel_tol)
                worst = max(worst, abs(float(table.e_kappa(x)) - exact))
            if worst > TABLE_VALIDATION_TOL:
                raise TableError(
                    f"shrinkage table interpolation error {worst:.2e} exceeds "
                    f"{TABLE_VALIDATION_TOL:g} (family={family.describe()}, tau={tau})"
                )
        return table

    def _exact_columns(self, x_abs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        e_k = np.empty(x_abs.size)
        e_k2 = np.empty(x_abs.size)
        for i, x in enumerate(x_abs):
            _, e_k[i], e_k2[i], _, _ = _raw_moments(self.family, float(x), self.tau, DEFAULT_REL_TOL)
        return e_k, e_k2

    def moments(self, x) -> tuple[np.ndarray, np.ndarray]:
        x_abs = np.abs(np.asarray(x, dtype=float))
        inside = x_abs <= self.x_max
        e_k = np.empty(x_abs.shape)
        e_k2 = np.empty(x_abs.shape)
        e_k[inside] = self._spline_k(x_abs[inside])
        e_k2[inside] = self._spline_k2(x_abs[inside])
        if np.any(~inside):
            e_k[~inside], e_k2[~inside] = self._exact_columns(x_abs[~inside])
        np.clip(e_k, 1e-300, 1.0, out=e_k)
        np.clip(e_k2, 1e-300, 1.0, out=e_k2)
        return e_k, e_k2

    def e_kappa(self, x) -> np.ndarray:
        return self.moments(x)[0]

    def posterior_mean(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (1.0 - self.e_kappa(x)) * x

    def variance(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        e_k, e_k2 = self.moments(x)
        return (1.0 - e_k) + x * x * np.maximum(e_k2 - e_k * e_k, 0.0)


class _KappaQuantileTable:
    """Bilinear quantile table for bulk posterior draws of kappa | x."""

    def __init__(self, family: PriorFamily, tau: float, x_max: float = 40.0,
                 x_points: int = 257, q_points: int = 1025, u_nodes: int = 4097):
        from .quadrature import _transformed

        self.x_grid = np.linspace(0.0, x_max, x_points)
        self.q_grid = np.linspace(0.0, 1.0, q_points)
        u = np.linspace(-6.0, 6.0, u_nodes)
        a = family.a
        log_L = family.log_L
        two_log_tau = 2.0 * math.log(tau)

        def base_logs(kappa, one_m, log_k, log_omk):
            return (
                (a - 0.5) * log_k
                + (-a - 1.0) * log_omk
                + log_L(log_omk - log_k - two_log_tau)
            )[None, :]

        base = _transformed(base_logs)(u)[0]
        kappa_u = z_from_u(u)
        self.kappa_quantiles = np.empty((x_points, q_points))
        for i, x in enumerate(self.x_grid):
            w = base * np.exp(-0.5 * x * x * kappa_u)
            cdf = np.concatenate([[0.0], np.cumsum(0.5 * (w[1:] + w[:-1]) * np.diff(u))])
            cdf /= cdf[-1]
            self.kappa_quantiles[i] = np.interp(self.q_grid, cdf, kappa_u)

    def draw(self, x_abs: np.ndarray, unif: np.ndarray) -> np.ndarray:
        """kappa draws for coordinates x_abs (N,) given uniforms (N, m)."""
        pos = np.interp(x_abs, self.x_grid, np.arange(self.x_grid.size))
        lo = np.minimum(pos.astype(int), self.x_grid.size - 2)
        frac = pos - lo
        out = np.empty_like(unif)
        for b in np.unique(lo):
            rows = np.flatnonzero(lo == b)
            u_rows = unif[rows]
            qa = np.interp(u_rows.ravel(), self.q_grid, self.kappa_quantiles[b]).reshape(u_rows.shape)
            qb = np.interp(u_rows.ravel(), self.q_grid, self.kappa_quantiles[b + 1]).reshape(u_rows.shape)
            f = frac[rows][:, None]
            out[rows] = (1.0 - f) * qa + f * qb
        return np.clip(out, 1e-15, 1.0 - 1e-15)


# ---------------------------------------------------------------------------
# Estimation risk and posterior spread
# ---------------------------------------------------------------------------


def _rep_seed(root_seed: int, tag: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=root_seed, spawn_key=(tag, rep)))


def _estimation_rep(args):
    (theta0, table_ref, root_seed, tag, rep) = args
    rng = _rep_seed(root_seed, tag, rep)
    x = theta0 + rng.standard_normal(theta0.size)
    fitted = table_ref.posterior_mean(x)
    return float(np.sum((fitted - theta0) ** 2))


def _run_reps(worker, arglist, workers: int):
    if workers <= 1:
        return [worker(a) for a in arglist]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, arglist))


def estimation_risk_experiment(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    """Mean squared error of the table-backed posterior mean across n_grid."""
    cfg.family.require_estimation_range()
    rows = []
    for tag, n in enumerate(cfg.n_grid):
        q = cfg.q_for(n)
        scenario = simulate_nearly_black(
            n, q, cfg.signal_magnitude,
            seed=np.random.SeedSequence(entropy=cfg.root_seed, spawn_key=(900, tag)),
            tau_rule=cfg.tau_rule,
        )
        tau = scenario.tau
        table = ShrinkageTable.build(
            cfg.family, tau, x_max=cfg.table_x_max, points=cfg.table_points
        )
        args = [(scenario.theta0, table, cfg.root_seed, tag, r) for r in range(cfg.replications)]
        sses = np.array(_run_reps(_estimation_rep, args, cfg.workers))
        mse = float(sses.mean())
        se = float(sses.std(ddof=1) / math.sqrt(len(sses))) if len(sses) > 1 else 0.0
        mm = minimax_risk(n, q)
        rows.append({
            "n": n,
            "q": q,
            "tau": tau,
            "family": cfg.family.describe(),
            "root_seed": cfg.root_seed,
            "replications": cfg.replications,
            "mse": mse,
            "mse_se": se,
            "minimax": mm,
            "ratio": mse / mm,
            "ratio_se": se / mm,
            "risk_ceiling": risk_ceiling_form(n, q, tau, cfg.family.a),
        })
    ratios = [r["ratio"] for r in rows]
    summary = {
        "experiment": "estimation-risk",
        "family": cfg.family.describe(),
        "ratios": ratios,
        "ratio_non_increasing_within_2se": all(
            rows[i + 1]["ratio"] <= rows[i]["ratio"]
            + 2.0 * (rows[i]["ratio_se"] + rows[i + 1]["ratio_se"])
            for i in range(len(rows) - 1)
        ),
    }
    return rows, summary


def _spread_rep(args):
    (theta0, table_ref, root_seed, tag, rep) = args
    rng = _rep_seed(root_seed, tag, rep)
    x = theta0 + rng.standard_normal(theta0.size)
    return float(np.sum(table_ref.variance(x)))


def posterior_spread_experiment(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    """Total posterior variance against its closed lower/upper forms."""
    cfg.family.require_estimation_range()
    lower_valid = abs(cfg.family.a - 0.5) < 1e-12 and cfg.family.l_nondecreasing
    if not lower_valid:
        raise ValidationError(
            "spread lower form needs a = 1/2 and non-decreasing L; "
            f"family {cfg.family.describe()} does not qualify"
        )
    rows = []
    for tag, n in enumerate(cfg.n_grid):
        q = cfg.q_for(n)
        scenario = simulate_nearly_black(
            n, q, cfg.signal_magnitude,
            seed=np.random.SeedSequence(entropy=cfg.root_seed, spawn_key=(901, tag)),
            tau_rule=cfg.tau_rule,
        )
        tau = scenario.tau
        table = ShrinkageTable.build(
            cfg.family, tau, x_max=cfg.table_x_max, points=cfg.table_points
        )
        args = [(scenario.theta0, table, cfg.root_seed, 1000 + tag, r) for r in range(cfg.replications)]
        spreads = np.array(_run_reps(_spread_rep, args, cfg.workers))
        spread = float(spreads.mean())
        lower = spread_lower_form(n, q, tau)
        upper = risk_ceiling_form(n, q, tau, cfg.family.a)
        rows.append({
            "n": n,
            "q": q,
            "tau": tau,
            "family": cfg.family.describe(),
            "root_seed": cfg.root_seed,
            "replications": cfg.replications,
            "total_spread": spread,
            "spread_se": float(spreads.std(ddof=1) / math.sqrt(len(spreads))) if len(spreads) > 1 else 0.0,
            "lower_form": lower,
            "upper_form": upper,
            "lower_const": spread / lower,
            "upper_const": spread / upper,
            "spread_over_minimax": spread / minimax_risk(n, q),
        })
    lower_consts = [r["lower_const"] for r in rows]
    upper_consts = [r["upper_const"] for r in rows]
    summary = {
        "experiment": "spread",
        "family": cfg.family.describe(),
        "lower_consts": lower_consts,
        "upper_consts": upper_consts,
        "lower_const_stable_x2": max(lower_consts) <= 2.0 * min(lower_consts),
        "upper_const_stable_x2": max(upper_consts) <= 2.0 * min(upper_consts),
    }
    return rows, summary


# ---------------------------------------------------------------------------
# Posterior contraction
# ---------------------------------------------------------------------------

_DRAW_BLOCK = 4096


def _contraction_rep(args):
    (theta0, table_ref, sampler, draws, radius_sq, root_seed, tag, rep) = args
    rng = _rep_seed(root_seed, tag, rep)
    n = theta0.size
    x = theta0 + rng.standard_normal(n)
    center = table_ref.posterior_mean(x)
    sq_true = np.zeros(draws)
    sq_mean = np.zeros(draws)
    for start in range(0, n, _DRAW_BLOCK):
        stop = min(start + _DRAW_BLOCK, n)
        xs = x[start:stop]
        kappa = sampler.draw(np.abs(xs), rng.random((stop - start, draws)))
        one_m = 1.0 - kappa
        theta = one_m * xs[:, None] + np.sqrt(one_m) * rng.standard_normal((stop - start, draws))
        sq_true += np.sum((theta - theta0[start:stop, None]) ** 2, axis=0)
        sq_mean += np.sum((theta - center[start:stop, None]) ** 2, axis=0)
    return (
        float(np.mean(sq_true > radius_sq)),
        float(np.mean(sq_mean > radius_sq)),
    )


def contraction_experiment(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    """Posterior mass outside radius^2 = M_n q log(n/q) around theta0 and
    around the posterior mean, estimated from coordinate-wise draws."""
    cfg.family.require_estimation_range()
    if cfg.posterior_draws < 1000:
        raise ValidationError("contraction runs need posterior_draws >= 1000")
    rows = []
    for tag, n in enumerate(cfg.n_grid):
        q = cfg.q_for(n)
        scenario = simulate_nearly_black(
            n, q, cfg.signal_magnitude,
            seed=np.random.SeedSequence(entropy=cfg.root_seed, spawn_key=(902, tag)),
            tau_rule=cfg.tau_rule,
        )
        tau = scenario.tau
        table = ShrinkageTable.build(
            cfg.family, tau, x_max=cfg.table_x_max, points=cfg.table_points
        )
        sampler = _KappaQuantileTable(cfg.family, tau, x_max=cfg.table_x_max)
        radius_sq = cfg.m_n(n) * q * math.log(n / q)
        args = [
            (scenario.theta0, table, sampler, cfg.posterior_draws, radius_sq,
             cfg.root_seed, 2000 + tag, r)
            for r in range(cfg.replications)
        ]
        results = _run_reps(_contraction_rep, args, cfg.workers)
        mass_true = float(np.mean([r[0] for r in results]))
        mass_mean = float(np.mean([r[1] for r in results]))
        rows.append({
            "n": n,
            "q": q,
            "tau": tau,
            "family": cfg.family.describe(),
            "root_seed": cfg.root_seed,
            "replications": cfg.replications,
            "posterior_draws": cfg.posterior_draws,
            "m_n": cfg.m_n(n),
            "radius_sq": radius_sq,
            "mass_outside_true": mass_true,
            "mass_outside_mean": mass_mean,
        })
    summary = {
        "experiment": "contraction",
        "family": cfg.family.describe(),
        "mass_outside_true": [r["mass_outside_true"] for r in rows],
        "mass_outside_mean": [r["mass_outside_mean"] for r in rows],
    }
    return rows, summary


# ---------------------------------------------------------------------------
# Sparse asymptotic sequences and oracle-risk ratios
# ---------------------------------------------------------------------------

_SEQ_RESIDUAL = 1e-10


def build_asymptotic_sequence(
    c_const: float, beta: float, n_grid
) -> list[TwoGroupsModel]:
    """Models with p = n^-beta and psi^2 solving log(v) = c_const * u.

    Takes the larger root by bisection on u in [1/c_const, 1e9]; errors if
    the sparsity is too weak for the requested c_const.
    """
    if not (0.0 < beta < 1.0):
        raise ValidationError(f"beta must lie in (0, 1), got {beta}")
    if not (c_const > 0.0):
        raise ValidationError(f"c_const must be positive, got {c_const}")
    n_grid = [int(n) for n in n_grid]
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValidationError("n_grid must be strictly increasing")
    models = []
    for n in n_grid:
        p = float(n) ** (-beta)
        if not (0.0 < p < 1.0):
            raise ValidationError(f"p = n^-beta = {p} outside (0,1) for n={n}")
        log_odds_sq = 2.0 * math.log((1.0 - p) / p)

        def gap(u):
            return c_const * u - math.log(u) - log_odds_sq

        lo = 1.0 / c_const
        hi = 1e9
        if gap(lo) >= 0.0 or gap(hi) <= 0.0:
            raise ValidationError(
                f"no admissible slab variance for n={n}, beta={beta}, c_const={c_const}: "
                "p is too large (or too small) for log(v)/u to reach the target"
            )
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if gap(mid) > 0.0:
                hi = mid
            else:
                lo = mid
        u = 0.5 * (lo + hi)
        model = TwoGroupsModel(p=p, psi_sq=u, c_const=c_const)
        residual = abs(math.log(model.v) / model.u - c_const)
        if residual > _SEQ_RESIDUAL:
            raise ValidationError(
                f"sequence solve residual {residual:.2e} exceeds {_SEQ_RESIDUAL:g} at n={n}"
            )
        models.append(model)
    return models


def abos_experiment(
    family: PriorFamily,
    c_const: float,
    beta: float,
    n_grid,
    alpha: float = 1.0,
    tau_coefficient: float = 1.0,
) -> tuple[list[dict], dict]:
    """Deterministic risk ratio of the induced rule over the exact oracle
    along the sparse sequence, with tau = tau_coefficient * p^alpha."""
    from .two_groups import abos_limit

    if alpha <= 0:
        raise ValidationError(f"alpha must be positive, got {alpha}")
    models = build_asymptotic_sequence(c_const, beta, n_grid)
    target = abos_limit(family.a, alpha, c_const) if alpha >= 1.0 else math.inf
    rows = []
    for n, model in zip(n_grid, models):
        n = int(n)
        tau = tau_coefficient * model.p**alpha
        if not (0.0 < tau < 1.0):
            raise ValidationError(f"tau = {tau} outside (0,1) at n={n}")
        x_star = decision_threshold(tau, family)
        t1, t2 = exact_rule_errors(x_star, model.psi_sq)
        risk = n * ((1.0 - model.p) * t1 + model.p * t2)
        c = oracle_threshold(model)
        t1_o, t2_o = exact_rule_errors(c, model.psi_sq)
        oracle_risk = n * ((1.0 - model.p) * t1_o + model.p * t2_o)
        rows.append({
            "n": n,
            "p": model.p,
            "psi_sq": model.psi_sq,
            "tau": tau,
            "alpha": alpha,
            "family": family.describe(),
            "threshold_induced": x_star,
            "threshold_oracle": c,
            "t1_induced": t1,
            "t2_induced": t2,
            "t1_oracle": t1_o,
            "t2_oracle": t2_o,
            "risk_induced": risk,
            "risk_oracle": oracle_risk,
            "ratio": risk / oracle_risk,
            "limit_target": target,
        })
    ratios = [r["ratio"] for r in rows]
    summary = {
        "experiment": "abos",
        "family": family.describe(),
        "alpha": alpha,
        "c_const": c_const,
        "beta": beta,
        "ratios": ratios,
        "limit_target": target,
        "monotone_decreasing": all(b < a for a, b in zip(ratios, ratios[1:])),
        "monotone_increasing": all(b > a for a, b in zip(ratios, ratios[1:])),
        "final_ratio": ratios[-1],
    }
    return rows, summary


def eb_risk_for_model(
    family: PriorFamily,
    model: TwoGroupsModel,
    n: int,
    datasets: int = 200,
    c1: float = 2.0,
    c2: float = 1.0,
    root_seed: int = 20260808,
    seed_tag: int = 3000,
) -> dict:
    """Monte Carlo risk of the empirical-Bayes induced rule on one model.

    Each dataset draws labels and observations from the two-groups model,
    computes tau_hat from the exceedance count, thresholds at x*(tau_hat)
    (cached across datasets: tau_hat takes few distinct values), and counts
    misclassifications.  Deterministic given root_seed.
    """
    from .two_groups import EmpiricalBayesConfig, empirical_bayes_tau

    if datasets < 2:
        raise ValidationError("need at least 2 datasets")
    if n < 2:
        raise ValidationError("need n >= 2")
    eb_cfg = EmpiricalBayesConfig(c1=c1, c2=c2)
    threshold_cache: dict[float, float] = {}
    losses = np.empty(datasets)
    sd = math.sqrt(1.0 + model.psi_sq)
    for d in range(datasets):
        rng = _rep_seed(root_seed, seed_tag, d)
        labels = rng.random(n) < model.p
        x = rng.standard_normal(n)
        x[labels] *= sd
        tau_hat = min(empirical_bayes_tau(x, eb_cfg), 1.0 - 1e-12)
        if tau_hat not in threshold_cache:
            threshold_cache[tau_hat] = decision_threshold(tau_hat, family)
        reject = np.abs(x) > threshold_cache[tau_hat]
        losses[d] = float(np.sum(reject & ~labels) + np.sum(~reject & labels))
    c = oracle_threshold(model)
    t1_o, t2_o = exact_rule_errors(c, model.psi_sq)
    oracle_risk = n * ((1.0 - model.p) * t1_o + model.p * t2_o)
    r_eb = float(losses.mean())
    return {
        "n": n,
        "p": model.p,
        "psi_sq": model.psi_sq,
        "family": family.describe(),
        "datasets": datasets,
        "c1": c1,
        "c2": c2,
        "root_seed": root_seed,
        "risk_eb": r_eb,
        "risk_eb_se": float(losses.std(ddof=1) / math.sqrt(datasets)),
        "risk_oracle": oracle_risk,
        "ratio": r_eb / oracle_risk,
        "distinct_tau_hat": len(threshold_cache),
    }


def eb_risk_experiment(
    family: PriorFamily,
    c_const: float,
    beta: float,
    n_grid,
    datasets: int = 200,
    c1: float = 2.0,
    c2: float = 1.0,
    root_seed: int = 20260808,
) -> tuple[list[dict], dict]:
    """eb_risk_for_model along the sparse asymptotic sequence."""
    models = build_asymptotic_sequence(c_const, beta, n_grid)
    rows = [
        eb_risk_for_model(
            family, model, int(n), datasets=datasets, c1=c1, c2=c2,
            root_seed=root_seed, seed_tag=3000 + tag,
        )
        for tag, (n, model) in enumerate(zip(n_grid, models))
    ]
    ratios = [r["ratio"] for r in rows]
    summary = {
        "experiment": "eb-risk",
        "family": family.describe(),
        "c_const": c_const,
        "beta": beta,
        "ratios": ratios,
        "monotone_decreasing": all(b < a for a, b in zip(ratios, ratios[1:])),
    }
    return rows, summary
