"""Command line interface: simulate, fit, benchmark, scan.

Exit codes: 0 success, 2 configuration error, 3 data-schema error,
4 numerical failure during fitting.
"""

import argparse
import os
import sys
from dataclasses import asdict

from . import config as cfgmod
from . import reporting
from .benchmark import REPLICATION_COLUMNS, run_benchmark, summary_columns
from .data import SurvivalDataset
from .errors import ConfigError, DataSchemaError, FitError, InvalidParameterError, NumericalError
from .estimator import fit_model
from .hazards import WeibullHazard
from .simulate import config_to_dict, generate

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def build_parser():
    parser = argparse.ArgumentParser(
        prog="frailclust",
        description="Joint risk clustering and shared-frailty hazard modeling.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_input=False, with_threads=False, with_emit=False):
        p.add_argument("--config", required=True, help="YAML config file")
        p.add_argument("--output-dir", default=None, help="directory for artifacts")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        if with_input:
            p.add_argument("--input", default=None, help="input dataset CSV")
        if with_threads:
            p.add_argument("--threads", type=int, default=None,
                           help="worker processes (default: all cores)")
        if with_emit:
            p.add_argument("--emit-similarity", action="store_true",
                           help="write the learned graph as triplets")

    common(sub.add_parser("simulate", help="write a synthetic dataset CSV"))
    common(sub.add_parser("fit", help="fit one model on one dataset"),
           with_input=True, with_emit=True)
    common(sub.add_parser("benchmark", help="grid x replications simulation study"),
           with_threads=True)
    common(sub.add_parser("scan", help="fit a model grid on one dataset"),
           with_input=True, with_threads=True)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = cfgmod.load_config(args.config)
        out_dir = _output_dir(args, cfg)
        handler = {"simulate": cmd_simulate, "fit": cmd_fit,
                   "benchmark": cmd_benchmark, "scan": cmd_scan}[args.command]
        handler(args, cfg, out_dir)
    except (ConfigError, InvalidParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataSchemaError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, FitError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


def _output_dir(args, cfg):
    io = cfgmod.io_settings(cfg)
    out = args.output_dir or io["output_dir"] or "."
    os.makedirs(out, exist_ok=True)
    return out


def _load_dataset(args, cfg):
    io = cfgmod.io_settings(cfg)
    path = args.input or io["input"]
    if path is None:
        if cfg.get("simulate") is not None:
            sim_cfg, seed = cfgmod.sim_settings(cfg)
            if args.seed is not None:
                seed = args.seed
            data, _ = generate(sim_cfg, seed, 0)
            return data
        raise ConfigError("no input dataset: pass --input or set io.input / a simulate section")
    return SurvivalDataset.from_csv(path)


def cmd_simulate(args, cfg, out_dir):
    sim_cfg, seed = cfgmod.sim_settings(cfg)
    if args.seed is not None:
        seed = args.seed
    data, _ = generate(sim_cfg, seed, 0)
    frame = data.to_frame()
    path = os.path.join(out_dir, "dataset.csv")
    rows = frame.to_dict(orient="records")
    reporting.write_table(path, list(frame.columns), rows)
    meta = {"seed": seed, "config": config_to_dict(sim_cfg), "n_units": data.n_units,
            "events": int(data.status.sum()),
            "censored_fraction": float(1.0 - data.status.mean())}
    reporting.write_json(os.path.join(out_dir, "dataset.json"), meta)
    print(path)


def _fit_kwargs(cfg):
    model = cfgmod.model_settings(cfg)
    conv = cfgmod.convergence_settings(cfg)
    return {"gamma": model["gamma"], "n_clusters": model["n_clusters"],
            "n_neighbors": model["n_neighbors"], "baseline": model["baseline"],
            "frailty": model["frailty"], "lambda0": model["lambda0"],
            "init_params": model["init_params"],
            "tol_similarity": conv["tol_similarity"], "tol_loglik": conv["tol_loglik"],
            "max_iter": conv["max_iter"], "max_inner_iter": conv["max_inner_iter"]}


def cmd_fit(args, cfg, out_dir):
    data = _load_dataset(args, cfg)
    kwargs = _fit_kwargs(cfg)
    report = fit_model(data, **kwargs)

    payload = {
        "model": {k: kwargs[k] for k in ("gamma", "n_clusters", "n_neighbors",
                                         "baseline", "frailty", "lambda0")},
        "coefficients": {name: float(b) for name, b in zip(data.covariate_names,
                                                           report.params.beta)},
        "baseline_params": _baseline_dict(report.params.baseline),
        "theta": float(report.params.frailty.theta),
        "std_errors": None,
        "loglik": report.loglik,
        "silhouette": report.silhouette,
        "converged": bool(report.converged),
        "n_iter": report.n_iter,
        "n_components": report.n_components,
        "labels_source": report.labels_source,
        "lambda_final": report.lam,
        "log_frailty": {str(g): float(v) for g, v in zip(data.group_ids,
                                                         report.log_frailty)},
        "trace": [asdict(r) for r in report.trace],
    }
    reporting.write_json(os.path.join(out_dir, "fit.json"), payload)
    label_rows = [{"unit_id": u, "cluster": int(c), "eta": float(e)}
                  for u, c, e in zip(data.unit_ids, report.labels, report.eta)]
    reporting.write_table(os.path.join(out_dir, "labels.csv"),
                          ["unit_id", "cluster", "eta"], label_rows)
    emit = args.emit_similarity or cfgmod.io_settings(cfg)["emit_similarity"]
    if emit and report.similarity is not None:
        reporting.write_similarity_triplets(os.path.join(out_dir, "similarity.csv"),
                                            report.similarity, data.unit_ids)
    print(os.path.join(out_dir, "fit.json"))


def _baseline_dict(baseline):
    if isinstance(baseline, WeibullHazard):
        return {"family": "weibull", "shape": baseline.rho, "rate": baseline.xi}
    return {"family": "exponential", "rate": baseline.rate}


def cmd_benchmark(args, cfg, out_dir):
    sim_cfg, _ = cfgmod.sim_settings(cfg)
    bench = cfgmod.benchmark_settings(cfg)
    if args.seed is not None:
        bench = {**bench, "seed": args.seed}
    base = _fit_kwargs(cfg)
    threads = args.threads or os.cpu_count() or 1
    rows, summary = run_benchmark(sim_cfg, bench, base, threads=threads)
    reporting.write_table(os.path.join(out_dir, "replications.csv"),
                          REPLICATION_COLUMNS, rows)
    reporting.write_table(os.path.join(out_dir, "summary.csv"), summary_columns(), summary)
    print(os.path.join(out_dir, "summary.csv"))


def cmd_scan(args, cfg, out_dir):
    data = _load_dataset(args, cfg)
    model = cfgmod.model_settings(cfg)
    grid = cfgmod.scan_settings(cfg, model)
    base = _fit_kwargs(cfg)
    threads = args.threads or os.cpu_count() or 1

    cells = [
        {"baseline": b, "frailty": f, "gamma": g, "n_neighbors": k, "n_clusters": c}
        for b in grid["baseline"] for f in grid["frailty"] for g in grid["gamma"]
        for k in grid["n_neighbors"] for c in grid["n_clusters"]
    ]
    from joblib import Parallel, delayed

    def one(cell):
        kwargs = dict(base)
        kwargs.update(cell)
        report = fit_model(data, **kwargs)
        return {**cell, "silhouette": report.silhouette, "converged": bool(report.converged),
                "n_components": report.n_components, "n_iter": report.n_iter,
                "loglik": report.loglik}

    rows = Parallel(n_jobs=threads)(delayed(one)(cell) for cell in cells)
    columns = ["baseline", "frailty", "gamma", "n_neighbors", "n_clusters",
               "silhouette", "converged", "n_components", "n_iter", "loglik"]
    reporting.write_table(os.path.join(out_dir, "scan.csv"), columns, rows)
    best = select_best(rows)
    reporting.write_json(os.path.join(out_dir, "best.json"), best)
    print(os.path.join(out_dir, "best.json"))


def select_best(rows):
    """Highest mean silhouette among converged fits; all fits if none converged."""
    import math

    def usable(r):
        return not (r["silhouette"] is None or math.isnan(r["silhouette"]))

    pool = [r for r in rows if r["converged"] and usable(r)]
    fallback = not pool
    if fallback:
        pool = [r for r in rows if usable(r)]
    if not pool:
        return {"selected": None, "note": "no fit produced a defined silhouette"}
    best = max(pool, key=lambda r: r["silhouette"])
    return {"selected": {k: best[k] for k in ("baseline", "frailty", "gamma",
                                              "n_neighbors", "n_clusters")},
            "silhouette": best["silhouette"], "converged": best["converged"],
            "from_converged_only": not fallback}


if __name__ == "__main__":
    sys.exit(main())
