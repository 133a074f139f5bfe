"""Command-line entry point.

Subcommands
-----------
family-check    regularity audit of a registered prior family
oracle          exact risk report for the two-groups optimal rule
induced-test    exact risk report for the one-group 0.5-threshold rule
eb-test         Monte Carlo risk of the empirical-Bayes rule on one model
bounds-audit    CSV of envelope inequality checks on a randomized grid
estimate-risk   MSE sweep against the sparse minimax level
spread          total posterior variance sweep against its closed forms
contract        posterior mass outside the contraction radius
abos            oracle-risk-ratio sweep along a sparse asymptotic sequence

Every run writes its outputs, the resolved configuration, and a manifest
into the output directory.  Values come from an INI-style config file
(sections of key = value lines) overridden by the mirroring CLI flags;
the root seed can also be set through the SHRINK_SEED environment
variable.  Exit codes: 0 success, 1 validation/config error, 2 numerical
convergence error.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, NumericalError, ValidationError
from .families import check_tail_regularity, make_family
from .report_io import RunManifest, write_json, write_report
from .two_groups import TwoGroupsModel, make_report, oracle_threshold

def _parse_family(name: str, params: str):
    kwargs = {}
    if params:
        for item in params.split(","):
            key, _, value = item.partition("=")
            if not _ or not key.strip():
                raise ConfigError(f"bad family parameter {item!r}; use key=value[,key=value]")
            kwargs[key.strip()] = float(value)
    return make_family(name, **kwargs)


def _resolved_text(command: str, values: dict) -> str:
    lines = ["[run]"]
    for key in sorted(values):
        if values[key] is not None:
            lines.append(f"{key} = {values[key]}")
    return f"# resolved configuration for {command}\n" + "\n".join(lines) + "\n"


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    file = Path(path)
    if not file.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read(file)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config {path}: {exc}") from exc
    merged: dict = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            merged[key.replace("-", "_")] = value
    return merged


def _resolve(args: argparse.Namespace, config: dict, key: str, cast, default=None):
    cli_value = getattr(args, key, None)
    if cli_value is not None:
        return cli_value
    if key in config:
        raw = config[key]
        try:
            return cast(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"config key {key!r}: cannot parse {raw!r}") from exc
    return default


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in str(text).replace(" ", "").split(",") if part)
    except ValueError as exc:
        raise ConfigError(f"cannot parse integer list from {text!r}") from exc


def _seed(args, config) -> int:
    env = os.environ.get("SHRINK_SEED")
    if getattr(args, "root_seed", None) is not None:
        return args.root_seed
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"SHRINK_SEED must be an integer, got {env!r}") from exc
    if "root_seed" in config:
        return int(config["root_seed"])
    return 20260808


def _finish_run(command: str, out_dir: Path, resolved: str, seed: int, manifest_partial: dict):
    (out_dir / "resolved_config.ini").write_text(resolved)
    RunManifest.finish(manifest_partial).write(out_dir / "manifest.json")


def _start_run(command: str, out_dir: Path, values: dict, seed: int):
    out_dir.mkdir(parents=True, exist_ok=True)
    resolved = _resolved_text(command, values)
    partial = RunManifest.start(command, resolved, seed, __version__)
    return resolved, partial


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------


def _cmd_family_check(args, config):
    family = _parse_family(args.family, args.family_params or config.get("family_params", ""))
    seed = _seed(args, config)
    out = Path(_resolve(args, config, "out", str, "out/family-check"))
    values = {"family": family.describe(), "root_seed": seed, "out": out}
    resolved, partial = _start_run("family-check", out, values, seed)
    report = check_tail_regularity(family)
    write_json(report.as_dict(), out / "family_check.json")
    _finish_run("family-check", out, resolved, seed, partial)
    status = "PASS" if report.passed else "FAIL"
    print(f"family-check {family.describe()}: {status} "
          f"(tail limit ~ {report.tail_limit_estimate:.6g}) -> {out}")
    return 0 if report.passed else 1


def _model_from(args, config) -> TwoGroupsModel:
    p = _resolve(args, config, "p", float)
    psi_sq = _resolve(args, config, "psi_sq", float)
    if p is None or psi_sq is None:
        raise ConfigError("this command needs --p and --psi-sq (or config keys p, psi_sq)")
    return TwoGroupsModel(p=p, psi_sq=psi_sq)


def _report_out(report, out: Path, name: str):
    write_json(report.as_dict(), out / f"{name}.json")
    write_report([report.as_dict()], list(report.as_dict().keys()), out / f"{name}.csv")


def _cmd_oracle(args, config):
    model = _model_from(args, config)
    n = _resolve(args, config, "n", int, 1000)
    seed = _seed(args, config)
    out = Path(_resolve(args, config, "out", str, "out/oracle"))
    values = {"p": model.p, "psi_sq": model.psi_sq, "n": n, "root_seed": seed, "out": out}
    resolved, partial = _start_run("oracle", out, values, seed)
    report = make_report("oracle", oracle_threshold(model), model, n)
    _report_out(report, out, "decision_report")
    _finish_run("oracle", out, resolved, seed, partial)
    print(f"oracle: threshold={report.threshold:.6g} t1={report.t1:.3e} "
          f"t2={report.t2:.6g} risk={report.bayes_risk:.6g} -> {out}")
    return 0


def _cmd_induced_test(args, config):
    from .posterior import decision_threshold

    model = _model_from(args, config)
    tau = _resolve(args, config, "tau", float)
    if tau is None:
        raise ConfigError("induced-test needs --tau")
    family = _parse_family(
        _resolve(args, config, "family", str, "horseshoe"),
        args.family_params or config.get("family_params", ""),
    )
    n = _resolve(args, config, "n", int, 1000)
    seed = _seed(args, config)
    out = Path(_resolve(args, config, "out", str, "out/induced-test"))
    values = {"family": family.describe(), "tau": tau, "p": model.p,
              "psi_sq": model.psi_sq, "n": n, "root_seed": seed, "out": out}
    resolved, partial = _start_run("induced-test", out, values, seed)
    x_star = decision_threshold(tau, family)
    report = make_report("induced", x_star, model, n)
    _report_out(report, out, "decision_report")
    _finish_run("induced-test", out, resolved, seed, partial)
    print(f"induced-test: threshold={report.threshold:.6g} t1={report.t1:.3e} "
          f"t2={report.t2:.6g} ratio={report.risk_ratio:.6g} -> {out}")
    return 0


def _cmd_eb_test(args, config):
    from .experiments import eb_risk_for_model

    model = _model_from(args, config)
    family = _parse_family(
        _resolve(args, config, "family", str, "horseshoe"),
        args.family_params or config.get("family_params", ""),
    )
    n = _resolve(args, config, "n", int, 1000)
    datasets = _resolve(args, config, "datasets", int, 200)
    c1 = _resolve(args, config, "c1", float, 2.0)
    c2 = _resolve(args, config, "c2", float, 1.0)
    seed = _seed(args, config)
    out = Path(_resolve(args, config, "out", str, "out/eb-test"))
    values = {"family": family.describe(), "p": model.p, "psi_sq": model.psi_sq,
              "n": n, "datasets": datasets, "c1": c1, "c2": c2,
              "root_seed": seed, "out": out}
    resolved, partial = _start_run("eb-test", out, values, seed)
    row = eb_risk_for_model(family, model, n, datasets=datasets, c1=c1, c2=c2, root_seed=seed)
    write_report([row], list(row.keys()), out / "eb_risk.csv")
    write_json(row, out / "eb_risk.json")
    _finish_run("eb-test", out, resolved, seed, partial)
    print(f"eb-test: risk={row['risk_eb']:.6g} (+-{row['risk_eb_se']:.2g}) "
          f"ratio={row['ratio']:.4f} -> {out}")
    return 0


_AUDIT_SCHEMA = ["inequality", "family", "x", "tau", "eta", "delta", "y", "k",
                 "lhs", "rhs", "margin", "pass"]


def _cmd_bounds_audit(args, config):
    from .bounds import (
        BoundParams,
        concentration_bound,
        kappa_envelope,
        mean_gap_envelope,
        weight_kernel_integral,
    )
    from .posterior import PosteriorQuery, kappa_moment, kappa_tail_prob, posterior_mean

    family = _parse_family(
        _resolve(args, config, "family", str, "horseshoe"),
        args.family_params or config.get("family_params", ""),
    )
    points = _resolve(args, config, "points", int, 60)
    seed = _seed(args, config)
    out = Path(_resolve(args, config, "out", str, "out/bounds-audit"))
    values = {"family": family.describe(), "points": points, "root_seed": seed, "out": out}
    resolved, partial = _start_run("bounds-audit", out, values, seed)
    rng = np.random.default_rng(seed)
    params = BoundParams(eta=5.0 / 6.0, delta=0.2, zeta=3.2)
    rows = []

    def push(name, x, tau, lhs, rhs, y=0.0, k=0.0):
        rows.append({
            "inequality": name, "family": family.describe(), "x": x, "tau": tau,
            "eta": params.eta, "delta": params.delta, "y": y, "k": k,
            "lhs": lhs, "rhs": rhs, "margin": rhs - lhs, "pass": lhs <= rhs,
        })

    for _ in range(points):
        x = float(rng.uniform(-8.0, 8.0))
        tau = float(10.0 ** rng.uniform(-5.0, -0.15))
        query = PosteriorQuery(x=x, tau=tau, family=family)
        push("tail_concentration", x, tau,
             kappa_tail_prob(query, params.eta),
             concentration_bound(x, tau, family, params))
        push("kappa_mean", x, tau, kappa_moment(query, 1),
             kappa_envelope(x, tau, family, params))
        if x != 0.0:
            push("mean_gap", x, tau, abs(posterior_mean(query) - x),
                 mean_gap_envelope(x, tau, family, params))
    if abs(family.a - 0.5) < 1e-12 and family.l_nondecreasing:
        for _ in range(points):
            y = float(rng.uniform(0.05, 60.0))
            tau = float(rng.uniform(1e-4, 0.45))
            for k in (0.5, 1.5, 2.5):
                res = weight_kernel_integral(y, tau, family, k)
                if res.upper is not None:
                    push(f"kernel_upper_{k}", 0.0, tau, res.value, res.upper, y=y, k=k)
                if res.lower is not None:
                    push(f"kernel_lower_{k}", 0.0, tau, res.lower, res.value, y=y, k=k)
    write_report(rows, _AUDIT_SCHEMA, out / "bounds_audit.csv")
    summary = {
        "command": "bounds-audit",
        "family": family.describe(),
        "rows": len(rows),
        "violations": int(sum(not r["pass"] for r in rows)),
    }
    write_json(summary, out / "summary.json")
    _finish_run("bounds-audit", out, resolved, seed, partial)
    print(f"bounds-audit: {summary['rows']} checks, {summary['violations']} violations -> {out}")
    return 0 if summary["violations"] == 0 else 2


_SWEEP_SCHEMAS = {
    "estimate-risk": ["n", "q", "tau", "family", "root_seed", "replications",
                      "mse", "mse_se", "minimax", "ratio", "ratio_se", "risk_ceiling"],
    "spread": ["n", "q", "tau", "family", "root_seed", "replications", "total_spread",
               "spread_se", "lower_form", "upper_form", "lower_const", "upper_const",
               "spread_over_minimax"],
    "contract": ["n", "q", "tau", "family", "root_seed", "replications",
                 "posterior_draws", "m_n", "radius_sq", "mass_outside_true",
                 "mass_outside_mean"],
}


def _cmd_sweep(command):
    def handler(args, config):
        from .experiments import (
            ExperimentConfig,
            contraction_experiment,
            estimation_risk_experiment,
            posterior_spread_experiment,
        )

        family = _parse_family(
            _resolve(args, config, "family", str, "horseshoe"),
            args.family_params or config.get("family_params", ""),
        )
        seed = _seed(args, config)
        out = Path(_resolve(args, config, "out", str, f"out/{command}"))
        cfg = ExperimentConfig(
            family=family,
            n_grid=_int_list(_resolve(args, config, "n_grid", str, "2000,8000,32000")),
            q_rule=_resolve(args, config, "q_rule", str, "pow:0.4"),
            tau_rule=_resolve(args, config, "tau_rule", str, "sqrtlog"),
            replications=_resolve(args, config, "replications", int, 20),
            posterior_draws=_resolve(args, config, "posterior_draws", int, 1000),
            m_n_rule=_resolve(args, config, "m_n_rule", str, "log_n"),
            signal_magnitude=_resolve(args, config, "signal_magnitude", float),
            root_seed=seed,
            workers=_resolve(args, config, "workers", int, 1),
        )
        values = {
            "family": family.describe(), "n_grid": ",".join(map(str, cfg.n_grid)),
            "q_rule": cfg.q_rule, "tau_rule": cfg.tau_rule,
            "replications": cfg.replications, "posterior_draws": cfg.posterior_draws,
            "m_n_rule": cfg.m_n_rule, "signal_magnitude": cfg.signal_magnitude,
            "root_seed": seed, "workers": cfg.workers, "out": out,
        }
        resolved, partial = _start_run(command, out, values, seed)
        runner = {
            "estimate-risk": estimation_risk_experiment,
            "spread": posterior_spread_experiment,
            "contract": contraction_experiment,
        }[command]
        rows, summary = runner(cfg)
        write_report(rows, _SWEEP_SCHEMAS[command], out / f"{command.replace('-', '_')}.csv")
        write_json(summary, out / "summary.json")
        _finish_run(command, out, resolved, seed, partial)
        print(f"{command}: {len(rows)} rows -> {out}")
        return 0

    return handler


_ABOS_SCHEMA = ["n", "p", "psi_sq", "tau", "alpha", "family", "threshold_induced",
                "threshold_oracle", "t1_induced", "t2_induced", "t1_oracle",
                "t2_oracle", "risk_induced", "risk_oracle", "ratio", "limit_target"]
_EB_SCHEMA = ["n", "p", "psi_sq", "family", "datasets", "c1", "c2", "root_seed",
              "risk_eb", "risk_eb_se", "risk_oracle", "ratio", "distinct_tau_hat"]


def _cmd_abos(args, config):
    from .experiments import abos_experiment, eb_risk_experiment

    a = _resolve(args, config, "a", float)
    if a is not None:
        if not (0.5 <= a < 1.0):
            raise ValidationError(f"abos requires exponent a in [0.5, 1), got {a}")
        family = make_family("tpbn", a_shape=a, b_shape=0.5)
    else:
        family = _parse_family(
            _resolve(args, config, "family", str, "horseshoe"),
            args.family_params or config.get("family_params", ""),
        )
        if not (0.5 <= family.a < 1.0):
            raise ValidationError(
                f"abos requires a family exponent in [0.5, 1), got {family.a}"
            )
    seed = _seed(args, config)
    out = Path(_resolve(args, config, "out", str, "out/abos"))
    n_grid = _int_list(_resolve(args, config, "n_grid", str,
                                "100,1000,10000,100000,1000000,10000000,100000000"))
    c_const = _resolve(args, config, "c_const", float, 1.0)
    beta = _resolve(args, config, "beta", float, 0.6)
    alpha = _resolve(args, config, "alpha", float, 1.0)
    tau_coefficient = _resolve(args, config, "tau_coefficient", float, 1.0)
    datasets = _resolve(args, config, "datasets", int, 0)
    values = {
        "family": family.describe(), "n_grid": ",".join(map(str, n_grid)),
        "c_const": c_const, "beta": beta, "alpha": alpha,
        "tau_coefficient": tau_coefficient, "datasets": datasets,
        "root_seed": seed, "out": out,
    }
    resolved, partial = _start_run("abos", out, values, seed)
    rows, summary = abos_experiment(family, c_const, beta, n_grid,
                                    alpha=alpha, tau_coefficient=tau_coefficient)
    write_report(rows, _ABOS_SCHEMA, out / "abos_ratio.csv")
    if datasets:
        eb_rows, eb_summary = eb_risk_experiment(
            family, c_const, beta,
            [n for n in n_grid if n <= 100_000],
            datasets=datasets, root_seed=seed,
        )
        write_report(eb_rows, _EB_SCHEMA, out / "abos_eb.csv")
        summary = {"deterministic": summary, "empirical_bayes": eb_summary}
    write_json(summary, out / "summary.json")
    _finish_run("abos", out, resolved, seed, partial)
    final = rows[-1]
    print(f"abos: ratio at n={final['n']}: {final['ratio']:.4f} "
          f"(target {final['limit_target']:.4f}) -> {out}")
    return 0


# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glshrink",
        description="Shrinkage-posterior computations, envelope audits, and "
                    "sparse-means testing experiments.",
    )
    parser.add_argument("--version", action="version", version=f"glshrink {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="INI config file; flags override its keys")
        p.add_argument("--out", help="output directory")
        p.add_argument("--root-seed", type=int, dest="root_seed")
        p.add_argument("--family-params", dest="family_params",
                       help="comma-separated key=value family parameters")

    p = sub.add_parser("family-check", help="audit a registered prior family")
    p.add_argument("family")
    common(p)

    for name in ("oracle", "induced-test", "eb-test"):
        p = sub.add_parser(name)
        common(p)
        p.add_argument("--p", type=float)
        p.add_argument("--psi-sq", type=float, dest="psi_sq")
        p.add_argument("--n", type=int)
        if name != "oracle":
            p.add_argument("--family")
        if name == "induced-test":
            p.add_argument("--tau", type=float)
        if name == "eb-test":
            p.add_argument("--datasets", type=int)
            p.add_argument("--c1", type=float)
            p.add_argument("--c2", type=float)

    p = sub.add_parser("bounds-audit")
    common(p)
    p.add_argument("--family")
    p.add_argument("--points", type=int)

    for name in ("estimate-risk", "spread", "contract"):
        p = sub.add_parser(name)
        common(p)
        p.add_argument("--family")
        p.add_argument("--n-grid", dest="n_grid")
        p.add_argument("--q-rule", dest="q_rule")
        p.add_argument("--tau-rule", dest="tau_rule")
        p.add_argument("--replications", type=int)
        p.add_argument("--posterior-draws", type=int, dest="posterior_draws")
        p.add_argument("--m-n-rule", dest="m_n_rule")
        p.add_argument("--signal-magnitude", type=float, dest="signal_magnitude")
        p.add_argument("--workers", type=int)

    p = sub.add_parser("abos")
    common(p)
    p.add_argument("--family")
    p.add_argument("--a", type=float, help="prior exponent; builds tpbn(a, 0.5)")
    p.add_argument("--n-grid", dest="n_grid")
    p.add_argument("--c-const", type=float, dest="c_const")
    p.add_argument("--beta", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--tau-coefficient", type=float, dest="tau_coefficient")
    p.add_argument("--datasets", type=int,
                   help="if > 0, add the empirical-Bayes Monte Carlo sweep")

    return parser


_HANDLERS = {
    "family-check": _cmd_family_check,
    "oracle": _cmd_oracle,
    "induced-test": _cmd_induced_test,
    "eb-test": _cmd_eb_test,
    "bounds-audit": _cmd_bounds_audit,
    "estimate-risk": _cmd_sweep("estimate-risk"),
    "spread": _cmd_sweep("spread"),
    "contract": _cmd_sweep("contract"),
    "abos": _cmd_abos,
}


def run(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(getattr(args, "config", None))
        return _HANDLERS[args.command](args, config)
    except (ConfigError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
