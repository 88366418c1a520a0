"""Command-line entry point: ``fdlsr {synth,train,eval,gridsearch,predict}``.

Exit codes: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .classify import ProjectedGallery, accuracy, nn_predict
from .dataset import (
    NORMALIZATION_SCHEMES,
    Dataset,
    DatasetError,
    build_label_matrix,
    load_csv,
    random_projection,
    save_csv,
    synth_blobs,
    zscore_features,
    zscore_stats,
)
from .evaluation import DEFAULT_GRID, METHODS, TrialError, grid_search, prepare, run_trials
from .modelio import ModelFile, ModelFormatError, load_model, save_model
from .solvers import SolverConfig, SolverError, SolverTrace, fit_dlsr, fit_fdlsr, fit_lsr, lsr_objective, ridge_kernel

log = logging.getLogger("fdlsr")


@dataclass
class RunManifest:
    command: str
    argv: list[str]
    dataset: str | None
    config: dict
    seed: int | None
    version: str
    started_at: str
    finished_at: str | None = None

    def finish(self) -> dict:
        self.finished_at = _now()
        return self.__dict__.copy()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def _nonneg_float(text: str) -> float:
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _float_list(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not values:
        raise argparse.ArgumentTypeError("empty grid")
    return values


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="label-first CSV, one sample per row")
    p.add_argument("--skip-header", action="store_true", help="ignore the first CSV line")
    p.add_argument("--normalize", choices=NORMALIZATION_SCHEMES, default="l2")
    p.add_argument("--project-dim", type=_positive_int, default=None,
                   help="apply a seeded Gaussian random projection to this many dims first")
    p.add_argument("--seed", type=int, default=0)


def _add_solver_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=METHODS, default="fdlsr")
    p.add_argument("--alpha", type=_positive_float, default=1.0)
    p.add_argument("--beta", type=_positive_float, default=1e-2)
    p.add_argument("--lambda", dest="lam", type=_nonneg_float, default=1.0)
    p.add_argument("--max-iter", type=_positive_int, default=30)
    p.add_argument("--tol", type=_positive_float, default=1e-4)
    p.add_argument("--report-iter", type=_positive_int, default=None,
                   help="run exactly this many sweeps, ignoring --tol")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fdlsr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a Gaussian-blob dataset CSV")
    p.add_argument("--classes", type=_positive_int, default=10)
    p.add_argument("--per-class", type=_positive_int, default=20)
    p.add_argument("--dim", type=_positive_int, default=50)
    p.add_argument("--spread", type=_positive_float, default=1.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="fit one model and write it with its convergence trace")
    _add_data_args(p)
    _add_solver_args(p)
    p.add_argument("--heldout", default=None, help="CSV scored after every sweep (trace heldout_acc)")
    p.add_argument("--model", default="model.fdlsr")
    p.add_argument("--trace", default="trace.csv")

    p = sub.add_parser("eval", help="repeated random-split evaluation")
    _add_data_args(p)
    _add_solver_args(p)
    p.add_argument("--k", type=_positive_int, default=3, help="training samples per class")
    p.add_argument("--repeats", type=_positive_int, default=10)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--out", default=None, help="JSON path (default: stdout)")

    p = sub.add_parser("gridsearch", help="evaluate every (alpha, beta, lambda) in a value grid")
    _add_data_args(p)
    _add_solver_args(p)
    p.add_argument("--k", type=_positive_int, default=3)
    p.add_argument("--repeats", type=_positive_int, default=10)
    p.add_argument("--grid", type=_float_list, default=list(DEFAULT_GRID),
                   help="comma-separated values used for all three parameters")
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--out", default=None)

    p = sub.add_parser("predict", help="classify a CSV with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--skip-header", action="store_true")
    p.add_argument("--out", default=None, help="CSV of predicted labels (default: stdout)")
    return parser


def _config(args) -> SolverConfig:
    return SolverConfig(
        alpha=args.alpha, beta=args.beta, lam=args.lam,
        max_iter=args.max_iter, tol=args.tol, report_iter=args.report_iter,
    )


def _manifest(args, argv, config=None) -> RunManifest:
    return RunManifest(
        command=args.command,
        argv=list(argv),
        dataset=getattr(args, "data", None),
        config=config or {},
        seed=getattr(args, "seed", None),
        version=__version__,
        started_at=_now(),
    )


def _load(args) -> Dataset:
    ds = load_csv(args.data, skip_header=args.skip_header)
    if args.project_dim:
        ds = random_projection(ds, args.project_dim, args.seed)
    return ds


def _emit_json(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_synth(args, argv) -> int:
    ds = synth_blobs(args.classes, args.per_class, args.dim, args.spread, args.seed)
    save_csv(ds, args.out)
    manifest = _manifest(args, argv, {
        "classes": args.classes, "per_class": args.per_class, "dim": args.dim, "spread": args.spread,
    })
    Path(args.out + ".manifest.json").write_text(json.dumps(manifest.finish(), indent=2) + "\n")
    return 0


def _fit_with_trace(method, X, H, cfg, heldout) -> tuple[np.ndarray, SolverTrace]:
    if method == "fdlsr":
        return fit_fdlsr(X, H, cfg, heldout=heldout)
    K = ridge_kernel(X, cfg.beta)
    if method == "dlsr":
        return fit_dlsr(X, H, cfg.beta, cfg.report_iter or cfg.max_iter, cfg.tol, K=K, heldout=heldout)
    Q = fit_lsr(X, H, cfg.beta, K=K)
    # single-shot fit: one trace row, no previous iterate to compare against
    trace = SolverTrace(objective=[lsr_objective(Q, X, H, cfg.beta)], q_delta=[0.0], converged=True)
    if heldout is not None:
        gallery = ProjectedGallery(Q @ X, np.argmax(H, axis=0))
        trace.heldout_accuracy = [accuracy(nn_predict(gallery, Q @ heldout[0]), heldout[1])]
    return Q, trace


def write_trace(trace: SolverTrace, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = ["iter", "objective", "q_delta"]
        if trace.heldout_accuracy is not None:
            header.append("heldout_acc")
        writer.writerow(header)
        for row in trace.rows():
            writer.writerow([row[0]] + [repr(float(v)) for v in row[1:]])


def cmd_train(args, argv) -> int:
    cfg = _config(args)
    manifest = _manifest(args, argv, cfg.to_dict())
    ds = _load(args)
    heldout_ds = None
    if args.heldout:
        heldout_ds = load_csv(args.heldout, skip_header=args.skip_header)
        if args.project_dim:
            heldout_ds = random_projection(heldout_ds, args.project_dim, args.seed)
    train, test = (ds, heldout_ds if heldout_ds is not None else ds)
    arrays = {}
    if args.normalize == "zscore":
        mean, std = zscore_stats(train)
        arrays["zscore_mean"], arrays["zscore_std"] = mean, std
    train_n, test_n = prepare(train, test, args.normalize)

    heldout = None
    if heldout_ds is not None:
        heldout = (test_n.features, _remap_labels(heldout_ds, ds.class_names))
    X = train_n.features
    H = build_label_matrix(train_n)
    Q, trace = _fit_with_trace(args.method, X, H, cfg, heldout)
    log.info("%s: %d sweep(s), converged=%s", args.method, trace.iterations_run, trace.converged)

    arrays.update(Q=Q, gallery=Q @ X, gallery_labels=np.asarray(train_n.labels, dtype=np.int64))
    meta = {
        "method": args.method,
        "config": cfg.to_dict(),
        "class_names": list(ds.class_names),
        "normalization": args.normalize,
        "random_projection": {"dim": args.project_dim, "seed": args.seed} if args.project_dim else None,
        "iterations_run": trace.iterations_run,
        "converged": trace.converged,
        "manifest": manifest.finish(),
    }
    save_model(ModelFile(arrays=arrays, meta=meta), args.model)
    write_trace(trace, args.trace)
    Path(args.trace + ".manifest.json").write_text(json.dumps(meta["manifest"], indent=2) + "\n")
    return 0


def _remap_labels(ds: Dataset, class_names) -> np.ndarray:
    """Express ``ds`` labels in the index space of ``class_names``."""
    index = {name: i for i, name in enumerate(class_names)}
    unknown = sorted(set(ds.class_names) - set(index))
    if unknown:
        raise DatasetError(f"labels not seen in training: {unknown}")
    return np.array([index[ds.class_names[j]] for j in ds.labels], dtype=np.int64)


def cmd_eval(args, argv) -> int:
    cfg = _config(args)
    manifest = _manifest(args, argv, cfg.to_dict())
    ds = _load(args)
    report = run_trials(ds, args.k, args.repeats, args.seed, args.method, cfg, args.normalize, args.jobs)
    doc = report.to_dict()
    doc["manifest"] = manifest.finish()
    _emit_json(doc, args.out)
    return 0


def cmd_gridsearch(args, argv) -> int:
    base = _config(args)
    manifest = _manifest(args, argv, {"base": base.to_dict(), "grid": sorted(set(args.grid))})
    ds = _load(args)
    result = grid_search(ds, args.k, args.repeats, args.seed, args.grid, args.method, base,
                         args.normalize, args.jobs)
    doc = result.to_dict()
    doc["manifest"] = manifest.finish()
    _emit_json(doc, args.out)
    return 0


def cmd_predict(args, argv) -> int:
    model = load_model(args.model)
    meta = model.meta
    ds = load_csv(args.data, skip_header=args.skip_header)
    proj = meta.get("random_projection")
    if proj:
        ds = random_projection(ds, proj["dim"], proj["seed"])
    scheme = meta["normalization"]
    if scheme == "zscore":
        ds = zscore_features(ds, model.arrays["zscore_mean"], model.arrays["zscore_std"])
    else:
        ds, _ = prepare(ds, ds, scheme)
    gallery = ProjectedGallery(model.arrays["gallery"], model.arrays["gallery_labels"])
    pred = nn_predict(gallery, model.Q @ ds.features)
    names = meta["class_names"]
    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["true", "predicted"])
        for j, p in enumerate(pred):
            writer.writerow([ds.class_names[ds.labels[j]], names[p]])
    finally:
        if args.out:
            fh.close()
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "train": cmd_train,
    "eval": cmd_eval,
    "gridsearch": cmd_gridsearch,
    "predict": cmd_predict,
}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args, argv)
    except (DatasetError, SolverError, TrialError, ModelFormatError, OSError, ValueError) as exc:
        print(f"fdlsr {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
