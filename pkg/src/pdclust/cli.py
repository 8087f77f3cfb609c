"""Command-line front end: simulate -> cluster -> evaluate.

Every command writes its artifacts under ``--out`` together with a
``manifest.json`` that records the resolved arguments; ``replay`` re-runs a
manifest. Exit codes: 0 success, 2 invalid configuration, 3 runtime failure.
Set ``FPDC_LOG`` (e.g. ``DEBUG``) for verbose logging.
"""

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .evaluation import assign_labels, dbs, kmeans, misclassification_rate, objective_histogram
from .factor import FpdcConfig, explained_variability_scan, multistart, standardize
from .pdcluster import PdcConfig, pdc
from .simdata import PRESETS, preset, read_dataset_csv
from .tucker import TENSOR_KINDS, TuckerConfig

log = logging.getLogger("pdclust")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
HISTOGRAM_BUCKETS = 20


class ConfigError(Exception):
    pass


def _dump_json(path, obj):
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _fmt(v):
    return repr(float(v))


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_manifest(out, command, args, files):
    _dump_json(out / "manifest.json", {
        "command": command,
        "args": args,
        "outputs": {name: _sha256(out / name) for name in sorted(files)},
        "version": __version__,
    })


def _load_input(args):
    if args.get("preset") and args.get("input"):
        raise ConfigError("use either --preset or --input, not both")
    if args.get("preset"):
        ds = preset(args["preset"], seed=args["data_seed"])
        return ds.x, ds.labels, ds.outlier_flags
    if not args.get("input"):
        raise ConfigError("one of --preset or --input is required")
    path = Path(args["input"])
    if not path.exists():
        raise ConfigError(f"input file {path} does not exist")
    return read_dataset_csv(path)


def cmd_simulate(args):
    out = Path(args["out"])
    out.mkdir(parents=True, exist_ok=True)
    ds = preset(args["preset"], seed=args["seed"])
    ds.to_csv(out / "dataset.csv")
    _dump_json(out / "config.json", {"preset": args["preset"], "seed": args["seed"], "meta": ds.meta})
    _write_manifest(out, "simulate", args, ["dataset.csv", "config.json"])
    return out


def _fpdc_config(args, K):
    return FpdcConfig(
        K=K,
        tucker=TuckerConfig(Q=args["q"]),
        pdc=PdcConfig(),
        standardize=args["standardize"] == "on",
        tensor=args["tensor"],
        seed=args["seed"],
    )


def _run_algorithm(x, args):
    """Return per-run objectives, traces and the best run's artifacts."""
    K, runs, seed, algo = args["k"], args["runs"], args["seed"], args["algo"]
    if K < 1 or K > x.shape[0]:
        raise ConfigError(f"--k must lie in [1, {x.shape[0]}] for this dataset")
    if algo == "fpdc":
        res = multistart(x, _fpdc_config(args, K), runs, jobs=args["jobs"])
        best = res.best
        extra = {"loading": best.loading.tolist(), "explained_fraction": best.explained_fraction,
                 "outer_iterations": [len(t) for t in res.traces]}
        return (res.jdf_samples.tolist(), res.traces, res.best_run, best.probabilities,
                best.model.centers, "jdf", extra)
    if algo == "pdc":
        xs = standardize(x)[0] if args["standardize"] == "on" else x
        models = [pdc(xs, K, PdcConfig(seed=seed + r)) for r in range(runs)]
        objective = [m.jdf_total for m in models]
        b = int(np.argmin(objective))
        return (objective, [m.trace for m in models], b, models[b].probabilities, models[b].centers, "jdf", {})
    if algo == "kmeans":
        xs = standardize(x)[0] if args["standardize"] == "on" else x
        fits = [kmeans(xs, K, seed=seed + r) for r in range(runs)]
        objective = [f.within for f in fits]
        b = int(np.argmin(objective))
        probs = np.eye(K)[fits[b].labels - 1]
        return (objective, [f.trace for f in fits], b, probs, fits[b].centers, "within_variance", {})
    raise ConfigError(f"unknown algorithm {algo!r}")


def cmd_cluster(args):
    out = Path(args["out"])
    x, truth, flags = _load_input(args)
    objective, traces, best_run, probs, centers, objective_name, extra = _run_algorithm(x, args)
    out.mkdir(parents=True, exist_ok=True)
    labels = assign_labels(probs)

    files = ["report.json", "labels.csv", "probabilities.csv", "centers.csv"]
    edges, counts = objective_histogram(objective, HISTOGRAM_BUCKETS)
    report = {
        "algorithm": args["algo"],
        "objective": objective_name,
        "runs": args["runs"],
        "seeds": [args["seed"] + r for r in range(args["runs"])],
        "per_run_objective": objective,
        "best_run": best_run,
        "best_objective": objective[best_run],
        "histogram": {"edges": edges.tolist(), "counts": counts.tolist()},
        "modal_share": float(counts.max() / counts.sum()),
        **extra,
    }
    if truth is not None and args["k"] <= 8:
        report["misclassification"] = misclassification_rate(labels, truth)
        if flags is not None:
            report["misclassification_clean"] = misclassification_rate(labels, truth, exclude=flags)
    if args["k"] >= 2:
        report["dbs_summary"] = dbs(probs, labels).summary()
    _dump_json(out / "report.json", report)

    _write_rows(out / "labels.csv", ["row", "label"], [(i, int(l)) for i, l in enumerate(labels)])
    _write_rows(out / "probabilities.csv", [f"p{k + 1}" for k in range(probs.shape[1])],
                [[_fmt(v) for v in row] for row in probs])
    _write_rows(out / "centers.csv", [f"c{j + 1}" for j in range(centers.shape[1])],
                [[_fmt(v) for v in row] for row in centers])
    if args["runs"] > 1:
        files += ["traces.csv", "histogram.csv"]
        _write_rows(out / "traces.csv", ["run", "iteration", "objective"],
                    [(r, t, _fmt(v)) for r, tr in enumerate(traces) for t, v in enumerate(tr)])
        _write_rows(out / "histogram.csv", ["lower", "upper", "count"],
                    [(_fmt(edges[b]), _fmt(edges[b + 1]), int(counts[b])) for b in range(len(counts))])
    if args["scan_q"] and args["algo"] == "fpdc":
        files.append("q_scan.csv")
        scan = explained_variability_scan(x, _fpdc_config(args, args["k"]))
        _write_rows(out / "q_scan.csv", ["Q", "explained"], [(q, _fmt(f)) for q, f in scan])
    _write_manifest(out, "cluster", args, files)
    return out


def _read_matrix(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return np.array(rows[1:], dtype=float)


def cmd_evaluate(args):
    out = Path(args["out"])
    model_dir = Path(args["model"])
    for name in ("probabilities.csv", "labels.csv"):
        if not (model_dir / name).exists():
            raise ConfigError(f"{model_dir} has no {name}")
    x, truth, flags = _load_input(args)
    probs = _read_matrix(model_dir / "probabilities.csv")
    labels = _read_matrix(model_dir / "labels.csv")[:, 1].astype(int)
    if probs.shape[0] != x.shape[0] or labels.shape[0] != x.shape[0]:
        raise ConfigError(f"model has {probs.shape[0]} rows, dataset has {x.shape[0]}")
    out.mkdir(parents=True, exist_ok=True)

    metrics = {"n": int(x.shape[0]), "K": int(probs.shape[1])}
    report_path = model_dir / "report.json"
    if report_path.exists():
        with open(report_path) as fh:
            rep = json.load(fh)
        metrics["objective"] = rep.get("objective")
        metrics["best_objective"] = rep.get("best_objective")
    if truth is None:
        metrics["note"] = "dataset has no truth labels; misclassification not computed"
        print(metrics["note"], file=sys.stderr)
    else:
        metrics["misclassification"] = misclassification_rate(labels, truth)
        if flags is not None:
            metrics["misclassification_clean"] = misclassification_rate(labels, truth, exclude=flags)

    files = ["metrics.json"]
    if probs.shape[1] >= 2:
        report = dbs(probs, labels, prob_floor=args["prob_floor"])
        metrics["dbs"] = report.summary()
        files.append("dbs.csv")
        _write_rows(out / "dbs.csv", ["cluster", "row", "dbs"],
                    [(k, i, _fmt(v)) for k, i, v in report.sorted_rows()])
    _dump_json(out / "metrics.json", metrics)
    _write_manifest(out, "evaluate", args, files)
    return out


COMMANDS = {"simulate": cmd_simulate, "cluster": cmd_cluster, "evaluate": cmd_evaluate}


def build_parser():
    parser = argparse.ArgumentParser(prog="pdclust", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a benchmark dataset")
    p.add_argument("--preset", choices=PRESETS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    def data_args(p):
        p.add_argument("--input", help="dataset CSV (v1..vJ[,label][,outlier])")
        p.add_argument("--preset", choices=PRESETS)
        p.add_argument("--data-seed", type=int, default=0, help="seed for --preset data")
        p.add_argument("--out", required=True)

    p = sub.add_parser("cluster", help="fit pdc, fpdc or kmeans with repeated seeded runs")
    data_args(p)
    p.add_argument("--algo", choices=("pdc", "fpdc", "kmeans"), default="fpdc")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--q", type=int, default=None, help="number of variable factors (default K-1)")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--standardize", choices=("on", "off"), default="on")
    p.add_argument("--tensor", choices=TENSOR_KINDS, default="signed")
    p.add_argument("--scan-q", action="store_true", help="also write explained variability for every Q")

    p = sub.add_parser("evaluate", help="score a fitted model against a dataset")
    data_args(p)
    p.add_argument("--model", required=True, help="output directory of `cluster`")
    p.add_argument("--prob-floor", type=float, default=1e-6)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", help="override the output directory")
    return parser


def _validate(command, args):
    if command == "cluster":
        if args["runs"] < 1:
            raise ConfigError("--runs must be >= 1")
        if args["jobs"] < 1:
            raise ConfigError("--jobs must be >= 1")
        if args["q"] is not None and args["q"] < 1:
            raise ConfigError("--q must be >= 1")


def run(command, args):
    _validate(command, args)
    return COMMANDS[command](args)


def main(argv=None):
    logging.basicConfig(level=os.environ.get("FPDC_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    args = vars(ns)
    command = args.pop("command")
    try:
        if command == "replay":
            with open(args["manifest"]) as fh:
                manifest = json.load(fh)
            command, recorded = manifest["command"], manifest["args"]
            if args["out"]:
                recorded = {**recorded, "out": args["out"]}
            args = recorded
        run(command, args)
    except (ConfigError, ValueError, KeyError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        log.exception("run failed")
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
