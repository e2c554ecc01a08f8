"""Command line interface: fit, simulate, replicate, gcv-scan.

Data files are long-format CSV with header ``curve_id,t,y``. Curves follow
their first appearance order and each curve's rows are sorted by t during
ingestion. All numeric CSV output is written with 17 significant digits so a
re-read reproduces the exact float values.

Every option can also come from a JSON config file (``--config``) whose keys
are the long option names with underscores; explicit flags win on conflict.

Exit codes: 0 success, 1 error, 2 (fit only) finished but the convergence
check failed.
"""

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bases import make_bspline_basis, make_fourier_basis
from .diagnostics import convergence_report
from .errors import (
    BasisSelectError,
    InvalidConfigurationError,
    ParseError,
)
from .model import (
    Curve,
    Dataset,
    Hyperparameters,
    design_matrices,
    standardize_curves,
)
from .sampler import GibbsConfig, run_gibbs
from .summary import gcv_mean, map_estimates, summarize
from .synth import ScenarioSpec, generate_study1, generate_study2, run_replications

__all__ = ["ingest_csv", "emit_csv", "main"]

_FMT = "%.17g"


# ---------------------------------------------------------------- data files

def ingest_csv(path):
    """Read a long-format curves CSV into a Dataset.

    The header must be exactly ``curve_id,t,y``. Curves keep first-appearance
    order; within a curve, rows are stably sorted by t (duplicate t values are
    legal and keep their input order). Malformed content raises ParseError
    with the offending line number.
    """
    groups = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", line=1) from None
        if [h.strip() for h in header] != ["curve_id", "t", "y"]:
            raise ParseError(
                f"expected header 'curve_id,t,y', got {','.join(header)!r}", line=1
            )
        for row in reader:
            lineno = reader.line_num
            if len(row) == 0 or (len(row) == 1 and row[0].strip() == ""):
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 fields, got {len(row)}", line=lineno)
            cid = row[0].strip()
            if not cid:
                raise ParseError("empty curve_id", line=lineno)
            try:
                t = float(row[1])
                y = float(row[2])
            except ValueError:
                bad = row[1] if _is_bad_float(row[1]) else row[2]
                raise ParseError(f"not a number: {bad!r}", line=lineno) from None
            if not (np.isfinite(t) and np.isfinite(y)):
                raise ParseError("non-finite value", line=lineno)
            groups.setdefault(cid, []).append((t, y))
    if not groups:
        raise ParseError("no data rows")
    curves = []
    for cid, rows in groups.items():
        ts = np.array([r[0] for r in rows])
        ys = np.array([r[1] for r in rows])
        order = np.argsort(ts, kind="stable")
        curves.append(Curve(t=ts[order], y=ys[order], name=cid))
    return Dataset(curves=curves)


def _is_bad_float(s):
    try:
        float(s)
        return False
    except ValueError:
        return True


def emit_csv(data, path):
    """Write a Dataset back to the long format read by ingest_csv."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["curve_id", "t", "y"])
        for i, curve in enumerate(data.curves):
            name = curve.name or str(i + 1)
            for t, y in zip(curve.t, curve.y):
                writer.writerow([name, _FMT % t, _FMT % y])


def _write_draws_csv(samples, path, mu_mode):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["chain", "iteration", "parameter", "value"])
        for ci, chain in enumerate(samples.chains, start=1):
            for it, state in zip(samples.iterations, chain):
                writer.writerow([ci, it, "sigma2", _FMT % state.sigma2])
                writer.writerow([ci, it, "tau2", _FMT % state.tau2])
                m, num_bases = state.beta.shape
                for i in range(m):
                    for k in range(num_bases):
                        tag = f"[{k + 1},{i + 1}]"
                        writer.writerow([ci, it, "beta" + tag, _FMT % state.beta[i, k]])
                        writer.writerow([ci, it, "z" + tag, int(state.z[i, k])])
                        writer.writerow([ci, it, "theta" + tag, _FMT % state.theta[i, k]])
                        if mu_mode == "random":
                            writer.writerow([ci, it, "mu" + tag, _FMT % state.mu[i, k]])


def _write_fitted_csv(data, bases, beta_hat, z_hat, path, standardized):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["curve_id", "t", "y", "fitted"]
        if standardized:
            header += ["y_raw", "fitted_raw"]
        writer.writerow(header)
        for i, (curve, basis) in enumerate(zip(data.curves, bases)):
            fitted = basis.values @ (z_hat[i] * beta_hat[i])
            name = curve.name or str(i + 1)
            for j in range(curve.n):
                row = [name, _FMT % curve.t[j], _FMT % curve.y[j], _FMT % fitted[j]]
                if standardized:
                    row += [
                        _FMT % (curve.y[j] * curve.scale),
                        _FMT % (fitted[j] * curve.scale),
                    ]
                writer.writerow(row)


# ------------------------------------------------------------ option merging

def _add_gibbs_options(p):
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--chains", type=int, default=None)
    p.add_argument("--burn-in-fraction", type=float, default=None)
    p.add_argument("--thinning", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)


def _add_prior_options(p):
    p.add_argument("--mu", type=float, default=None,
                   help="fixed prior inclusion mean in (0, 1)")
    p.add_argument("--expected-bases", type=float, default=None,
                   help="prior expected number of active bases C; mu = C / K")
    p.add_argument("--mu-mode", choices=["fixed", "random"], default=None)
    p.add_argument("--psi", type=float, default=None,
                   help="upper bound of the uniform mu prior (random mode)")
    p.add_argument("--delta1", type=float, default=None)
    p.add_argument("--delta2", type=float, default=None)
    p.add_argument("--lambda1", type=float, default=None)
    p.add_argument("--lambda2", type=float, default=None)


def _add_basis_options(p):
    p.add_argument("--basis", choices=["bspline", "fourier"], default=None)
    p.add_argument("--num-bases", type=int, default=None)
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--period", type=float, default=None)
    p.add_argument("--domain-min", type=float, default=None)
    p.add_argument("--domain-max", type=float, default=None)


_GIBBS_DEFAULTS = {
    "iterations": 10000,
    "chains": 2,
    "burn_in_fraction": 0.5,
    "thinning": 50,
    "seed": 0,
}

_PRIOR_DEFAULTS = {
    "mu": None,
    "expected_bases": None,
    "mu_mode": "fixed",
    "psi": 0.6,
    "delta1": 0.0,
    "delta2": 0.0,
    "lambda1": 0.0,
    "lambda2": 0.0,
}

_BASIS_DEFAULTS = {
    "basis": "bspline",
    "num_bases": None,
    "order": 4,
    "period": None,
    "domain_min": None,
    "domain_max": None,
}


class _Options:
    def __init__(self, mapping):
        self.__dict__.update(mapping)


def _merge_options(args, defaults):
    """Hard defaults, then config-file values, then explicit flags."""
    merged = dict(defaults)
    config_path = getattr(args, "config", None)
    if config_path:
        with open(config_path) as fh:
            try:
                loaded = json.load(fh)
            except json.JSONDecodeError as err:
                raise ParseError(f"config file is not valid JSON: {err}") from None
        if not isinstance(loaded, dict):
            raise ParseError("config file must hold a JSON object")
        unknown = sorted(set(loaded) - set(defaults))
        if unknown:
            raise InvalidConfigurationError(
                f"unknown config keys: {', '.join(unknown)}"
            )
        merged.update(loaded)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None and value is not False:
            merged[key] = value
    return _Options(merged)


def _build_hyp(opt):
    return Hyperparameters(
        delta1=opt.delta1,
        delta2=opt.delta2,
        lambda1=opt.lambda1,
        lambda2=opt.lambda2,
        mu=opt.mu,
        expected_bases=opt.expected_bases,
        mu_mode=opt.mu_mode,
        psi=opt.psi,
    )


def _build_config(opt, seed=None):
    return GibbsConfig(
        num_iterations=opt.iterations,
        num_chains=opt.chains,
        burn_in_fraction=opt.burn_in_fraction,
        thinning=opt.thinning,
        seed=opt.seed if seed is None else seed,
    )


def _build_system(opt, data):
    if opt.num_bases is None:
        raise InvalidConfigurationError("--num-bases is required")
    lo = opt.domain_min
    hi = opt.domain_max
    if lo is None:
        lo = min(float(c.t.min()) for c in data.curves)
    if hi is None:
        hi = max(float(c.t.max()) for c in data.curves)
    if opt.basis == "bspline":
        return make_bspline_basis((lo, hi), opt.num_bases, order=opt.order)
    return make_fourier_basis((lo, hi), opt.num_bases, period=opt.period)


# ---------------------------------------------------------------- subcommands

def _cmd_fit(args):
    defaults = {
        **_GIBBS_DEFAULTS,
        **_PRIOR_DEFAULTS,
        **_BASIS_DEFAULTS,
        "standardize": False,
        "estimator": "map",
        "rhat_threshold": 1.1,
        "output_dir": ".",
    }
    opt = _merge_options(args, defaults)
    raw = ingest_csv(args.input)
    data = standardize_curves(raw) if opt.standardize else raw
    system = _build_system(opt, data)
    bases = design_matrices(system, data)
    hyp = _build_hyp(opt)
    config = _build_config(opt)

    samples = run_gibbs(data, bases, hyp, config)
    summ = summarize(samples, data, bases, hyp, estimator=opt.estimator)
    conv = None
    if config.num_chains >= 2:
        conv = convergence_report(samples, threshold=opt.rhat_threshold)

    outdir = Path(opt.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_draws_csv(samples, outdir / "draws.csv", hyp.mu_mode)
    _write_fitted_csv(
        data, bases, summ.beta_hat, summ.z_hat, outdir / "fitted.csv", opt.standardize
    )

    warnings = []
    if conv is not None and not conv.converged:
        warnings.append(
            f"convergence check failed: max rhat {conv.max_rhat:.4f} "
            f">= threshold {opt.rhat_threshold}"
        )
    payload = {
        "command": "fit",
        "input": str(args.input),
        "standardized": bool(opt.standardize),
        "scales": [c.scale for c in data.curves] if opt.standardize else None,
        "basis": {
            "kind": system.kind,
            "domain": list(system.domain),
            "num_bases": system.num_bases,
            "order": system.order,
            "period": system.period,
        },
        "hyperparameters": {
            "delta1": hyp.delta1,
            "delta2": hyp.delta2,
            "lambda1": hyp.lambda1,
            "lambda2": hyp.lambda2,
            "mu": hyp.mu,
            "expected_bases": hyp.expected_bases,
            "mu_mode": hyp.mu_mode,
            "psi": hyp.psi,
        },
        "gibbs": {
            "num_iterations": config.num_iterations,
            "num_chains": config.num_chains,
            "burn_in_fraction": config.burn_in_fraction,
            "thinning": config.thinning,
            "seed": config.seed,
            "retained_per_chain": len(config.retained_iterations()),
        },
        "summary": summ.to_dict(),
        "convergence": None if conv is None else conv.to_dict(),
        "warnings": warnings,
    }
    with open(outdir / "summary.json", "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")

    print(f"fit: {raw.m} curve(s), {system.num_bases} {system.kind} bases")
    print(f"  xi_hat: {np.array2string(summ.xi_hat, precision=5, suppress_small=False)}")
    print(f"  active bases (K_end): {summ.k_end}")
    print(f"  metric_global: {summ.metric_global:.5f}")
    print(f"  metric_per_curve_mean: {summ.metric_per_curve_mean:.5f}")
    print(f"  gcv_mean: {summ.gcv_mean:.6g}")
    if conv is not None:
        print(f"  max rhat: {conv.max_rhat:.4f} (threshold {opt.rhat_threshold})")
    print(f"  wrote {outdir / 'draws.csv'}, {outdir / 'summary.json'}, "
          f"{outdir / 'fitted.csv'}")
    if warnings:
        for w in warnings:
            print(f"warning: {w}", file=sys.stderr)
        return 2
    return 0


def _cmd_simulate(args):
    defaults = {
        "study": None,
        "m": 5,
        "n": 100,
        "sigma": 0.1,
        "seed": 0,
        "output": None,
        "truth_output": None,
    }
    opt = _merge_options(args, defaults)
    if opt.study not in (1, 2):
        raise InvalidConfigurationError("--study must be 1 or 2")
    if not opt.output:
        raise InvalidConfigurationError("--output is required")
    gen = generate_study1 if opt.study == 1 else generate_study2
    synth = gen(m=opt.m, n=opt.n, sigma=opt.sigma, seed=opt.seed)
    emit_csv(synth.data, opt.output)
    print(f"simulate: study{opt.study}, m={opt.m}, n={opt.n}, sigma={opt.sigma} "
          f"-> {opt.output}")
    if opt.truth_output:
        with open(opt.truth_output, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "truth"])
            for t, v in zip(synth.t, synth.truth):
                writer.writerow([_FMT % t, _FMT % v])
        print(f"  truth curve -> {opt.truth_output}")
    return 0


def _cmd_replicate(args):
    defaults = {
        **_GIBBS_DEFAULTS,
        **_PRIOR_DEFAULTS,
        "study": None,
        "m": 5,
        "n": 100,
        "sigma": 0.1,
        "basis": "bspline",
        "num_bases": 10,
        "order": 4,
        "period": None,
        "replications": 100,
        "estimator": "map",
        "output_dir": ".",
    }
    opt = _merge_options(args, defaults)
    if opt.study not in (1, 2):
        raise InvalidConfigurationError("--study must be 1 or 2")
    scenario = ScenarioSpec(
        study=f"study{opt.study}",
        m=opt.m,
        n=opt.n,
        sigma=opt.sigma,
        basis_kind=opt.basis,
        num_bases=opt.num_bases,
        order=opt.order,
        period=opt.period,
        hyp=_build_hyp(opt),
        config=_build_config(opt),
        replications=opt.replications,
        seed=opt.seed,
        estimator=opt.estimator,
    )
    report = run_replications(scenario)

    outdir = Path(opt.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    k = scenario.num_bases
    with open(outdir / "replications.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["replication", "error", "k_end", "metric_global",
             "metric_per_curve_mean", "mse", "gcv_mean", "sigma2_hat",
             "tau2_hat", "max_rhat", "converged"]
            + [f"xi_{j + 1}" for j in range(k)]
        )
        for rec in report.records:
            if rec.failed:
                writer.writerow([rec.index, rec.error] + [""] * (9 + k))
                continue
            writer.writerow(
                [rec.index, "", rec.k_end, _FMT % rec.metric_global,
                 _FMT % rec.metric_per_curve_mean, _FMT % rec.mse,
                 _FMT % rec.gcv_mean, _FMT % rec.sigma2_hat,
                 _FMT % rec.tau2_hat, _FMT % rec.max_rhat,
                 int(rec.converged)]
                + [_FMT % v for v in rec.xi_hat]
            )
    with open(outdir / "replication_report.json", "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")

    q1, med, q3 = report.xi_quartiles
    print(f"replicate: {scenario.study}, {scenario.replications} replication(s), "
          f"{report.num_failed} failed")
    print("  basis   q1        median    q3        zero_frac  outliers")
    for j in range(k):
        print(f"  {j + 1:>5}   {q1[j]:<9.4f} {med[j]:<9.4f} {q3[j]:<9.4f} "
              f"{report.xi_zero_fraction[j]:<10.2f} {report.xi_outlier_counts[j]}")
    mq = report.metric_quartiles
    print(f"  metric quartiles: {mq[0]:.5f} / {mq[1]:.5f} / {mq[2]:.5f}")
    print(f"  mse median: {report.mse_median:.6g}")
    print(f"  converged fraction: {report.converged_fraction:.2f}")
    print(f"  wrote {outdir / 'replications.csv'}, "
          f"{outdir / 'replication_report.json'}")
    return 0


def _cmd_gcv_scan(args):
    defaults = {
        **_GIBBS_DEFAULTS,
        **_PRIOR_DEFAULTS,
        **_BASIS_DEFAULTS,
        "k_min": None,
        "k_max": None,
        "k_values": None,
        "standardize": False,
        "estimator": "map",
        "output_dir": ".",
    }
    opt = _merge_options(args, defaults)
    if opt.k_values is not None:
        try:
            k_list = [int(s) for s in str(opt.k_values).split(",") if s.strip()]
        except ValueError:
            raise InvalidConfigurationError(
                f"--k-values must be comma-separated integers, got {opt.k_values!r}"
            ) from None
    elif opt.k_min is not None and opt.k_max is not None:
        if opt.k_max < opt.k_min:
            raise InvalidConfigurationError("--k-max must be >= --k-min")
        k_list = list(range(opt.k_min, opt.k_max + 1))
    else:
        raise InvalidConfigurationError(
            "give either --k-values or both --k-min and --k-max"
        )
    if not k_list:
        raise InvalidConfigurationError("empty basis-size list")

    raw = ingest_csv(args.input)
    data = standardize_curves(raw) if opt.standardize else raw
    hyp = _build_hyp(opt)

    rows = []
    for k in k_list:
        opt_k = _Options({**opt.__dict__, "num_bases": k})
        system = _build_system(opt_k, data)
        bases = design_matrices(system, data)
        config = _build_config(opt, seed=(opt.seed, k))
        samples = run_gibbs(data, bases, hyp, config)
        _, z_hat, _, tau2_hat, _ = map_estimates(
            samples, data, bases, hyp, estimator=opt.estimator
        )
        mean_score, _ = gcv_mean(data, bases, z_hat, tau2_hat)
        rows.append((k, mean_score))

    best_k = min(rows, key=lambda r: r[1])[0]
    outdir = Path(opt.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "gcv_scan.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["num_bases", "gcv_mean", "selected"])
        for k, score in rows:
            writer.writerow([k, _FMT % score, int(k == best_k)])
    payload = {
        "command": "gcv-scan",
        "input": str(args.input),
        "basis": opt.basis,
        "k_values": [k for k, _ in rows],
        "gcv_mean": {str(k): score for k, score in rows},
        "selected_num_bases": best_k,
    }
    with open(outdir / "gcv_scan.json", "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")

    print(f"gcv-scan: {raw.m} curve(s), {opt.basis} bases")
    print("  K     mean GCV")
    for k, score in rows:
        marker = "  <- selected" if k == best_k else ""
        print(f"  {k:<5} {score:.6g}{marker}")
    print(f"  wrote {outdir / 'gcv_scan.csv'}, {outdir / 'gcv_scan.json'}")
    return 0


# ----------------------------------------------------------------- dispatch

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="basisselect",
        description="Bayesian adaptive selection of basis functions for "
                    "noisy functional data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit one dataset and write draws + summary")
    p_fit.add_argument("--input", required=True)
    p_fit.add_argument("--config", default=None, help="JSON file with option values")
    p_fit.add_argument("--output-dir", default=None)
    p_fit.add_argument("--standardize", action="store_true", default=None)
    p_fit.add_argument("--estimator", choices=["map", "mean"], default=None)
    p_fit.add_argument("--rhat-threshold", type=float, default=None)
    _add_basis_options(p_fit)
    _add_prior_options(p_fit)
    _add_gibbs_options(p_fit)
    p_fit.set_defaults(func=_cmd_fit)

    p_sim = sub.add_parser("simulate", help="write a synthetic dataset")
    p_sim.add_argument("--study", type=int, choices=[1, 2], default=None)
    p_sim.add_argument("--config", default=None)
    p_sim.add_argument("--m", type=int, default=None)
    p_sim.add_argument("--n", type=int, default=None)
    p_sim.add_argument("--sigma", type=float, default=None)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--output", default=None)
    p_sim.add_argument("--truth-output", default=None)
    p_sim.set_defaults(func=_cmd_simulate)

    p_rep = sub.add_parser("replicate", help="run a replication experiment")
    p_rep.add_argument("--study", type=int, choices=[1, 2], default=None)
    p_rep.add_argument("--config", default=None)
    p_rep.add_argument("--m", type=int, default=None)
    p_rep.add_argument("--n", type=int, default=None)
    p_rep.add_argument("--sigma", type=float, default=None)
    p_rep.add_argument("--basis", choices=["bspline", "fourier"], default=None)
    p_rep.add_argument("--num-bases", type=int, default=None)
    p_rep.add_argument("--order", type=int, default=None)
    p_rep.add_argument("--period", type=float, default=None)
    p_rep.add_argument("--replications", type=int, default=None)
    p_rep.add_argument("--estimator", choices=["map", "mean"], default=None)
    p_rep.add_argument("--output-dir", default=None)
    _add_prior_options(p_rep)
    _add_gibbs_options(p_rep)
    p_rep.set_defaults(func=_cmd_replicate)

    p_scan = sub.add_parser("gcv-scan", help="compare basis sizes by mean GCV")
    p_scan.add_argument("--input", required=True)
    p_scan.add_argument("--config", default=None)
    p_scan.add_argument("--k-min", type=int, default=None)
    p_scan.add_argument("--k-max", type=int, default=None)
    p_scan.add_argument("--k-values", default=None,
                        help="comma-separated basis sizes, overrides --k-min/--k-max")
    p_scan.add_argument("--standardize", action="store_true", default=None)
    p_scan.add_argument("--estimator", choices=["map", "mean"], default=None)
    p_scan.add_argument("--output-dir", default=None)
    _add_basis_options(p_scan)
    _add_prior_options(p_scan)
    _add_gibbs_options(p_scan)
    p_scan.set_defaults(func=_cmd_gcv_scan)

    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BasisSelectError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
