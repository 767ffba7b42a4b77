"""Command-line front end.

Subcommands: train, eval, bounds, embed, heatmap, sweep, synth.  Exit
codes: 0 success, 1 usage error, 2 runtime failure.  The environment
variable CLASK_THREADS caps sweep parallelism.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import RunConfig
from .data import load_dataset, save_csv, split_stratified_indices
from .kernels import KernelSet
from .modelfile import load_model, save_model
from .pipeline import evaluate, kfold_errors, train_pipeline
from .separability import (build_report, empirical_separation, estimate_model_stats,
                           projections_from_bank, projections_from_bases)
from .synth import banana, blobs, classwise_model, moons, pen_strokes, subspace_model

__all__ = ["main"]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("CLASK_THREADS", "1")))
    except ValueError:
        return 1


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="run configuration file (key = value lines)")
    p.add_argument("--dataset", help="dataset path")
    p.add_argument("--format", choices=["csv", "libsvm"], help="dataset format")
    p.add_argument("--mode", choices=["clasmk", "clask", "single"], help="training mode")
    p.add_argument("--kernel", action="append", default=None,
                   help="kernel spec rbf:<sigma> or poly:<degree>; repeatable")
    p.add_argument("--eta", type=float, help="kernel truncation threshold")
    p.add_argument("--t", type=float, help="weight thresholding fraction")
    p.add_argument("--T-kappa", dest="T_kappa", type=float, help="marginal confidence threshold")
    p.add_argument("--L-max", dest="L_max", type=int, help="maximum number of layers")
    p.add_argument("--epsilon", type=float, help="weight-change stopping tolerance")
    p.add_argument("--split-fraction", dest="split_fraction", type=float,
                   help="basis/weight subset split fraction")
    p.add_argument("--ridge", type=float, help="classifier regularization")
    p.add_argument("--ridge-grid", dest="ridge_grid",
                   help="comma separated ridge grid; enables holdout tuning")
    p.add_argument("--tol", type=float, help="greedy landmark residual tolerance")
    p.add_argument("--max-rank", dest="max_rank", type=int, help="landmark budget per basis")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--output-dir", dest="output_dir", help="where outputs are written")


def _build_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    for key in ("dataset", "format", "mode", "eta", "t", "T_kappa", "L_max", "epsilon",
                "split_fraction", "ridge", "tol", "max_rank", "seed", "output_dir"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    if getattr(args, "kernel", None):
        cfg.kernels = list(args.kernel)
    if getattr(args, "ridge_grid", None):
        cfg.ridge_grid = [float(v) for v in args.ridge_grid.split(",") if v.strip()]
    return cfg.validate()


def _load_config_dataset(cfg: RunConfig):
    if not cfg.dataset:
        raise ValueError("no dataset given (use --dataset or the config file)")
    if not Path(cfg.dataset).exists():
        raise FileNotFoundError(f"dataset not found: {cfg.dataset}")
    return load_dataset(cfg.dataset, cfg.format)


def _write_nu_csv(path, nu, kernel_names):
    with open(path, "w") as fh:
        fh.write(",".join(kernel_names) + "\n")
        for row in nu:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _write_ppm(path, nu, cell=16):
    """Binary P6 heat map; lighter cells mean larger weights."""
    C, K = nu.shape
    gray = np.clip(np.round(nu * 255.0), 0, 255).astype(np.uint8)
    img = np.repeat(np.repeat(gray, cell, axis=0), cell, axis=1)
    rgb = np.repeat(img[:, :, None], 3, axis=2)
    with open(path, "wb") as fh:
        fh.write(f"P6\n{K * cell} {C * cell}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())


def _export_weights(model, out_dir: Path, kernel_names, with_ppm=False):
    for layer in model.hmodel.layers:
        _write_nu_csv(out_dir / f"nu_layer{layer.layer_index}.csv", layer.weights.nu, kernel_names)
        if with_ppm:
            _write_ppm(out_dir / f"nu_layer{layer.layer_index}.ppm", layer.weights.nu)


def cmd_train(args) -> int:
    cfg = _build_config(args)
    ds = _load_config_dataset(cfg)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    model = train_pipeline(ds.X, ds.y, cfg.kernel_set(), cfg.hyper(), mode=cfg.mode,
                           label_values=ds.label_values, verbose=print)
    model_path = out_dir / (args.model_out or "model.bin")
    save_model(model_path, model)
    _export_weights(model, out_dir, cfg.kernel_set().names)
    if model.hmodel.warning:
        print(f"warning: {model.hmodel.warning}")
    print(f"model written to {model_path} ({model.hmodel.n_layers} layer(s), "
          f"feature dim {model.hmodel.dim_through(model.hmodel.n_layers)})")
    return 0


def _write_confusion(path, confusion):
    with open(path, "w") as fh:
        for row in confusion:
            fh.write(",".join(str(int(v)) for v in row) + "\n")


def cmd_eval(args) -> int:
    out_dir = Path(args.out_dir or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.kfold:
        cfg = _build_config(args)
        ds = _load_config_dataset(cfg)
        errors, confusion = kfold_errors(ds.X, ds.y, cfg.kernel_set(), cfg.hyper(),
                                         cfg.mode, args.kfold, cfg.seed)
        for i, e in enumerate(errors, start=1):
            print(f"fold {i}: error {100.0 * e:.2f}%")
        print(f"error {100.0 * errors.mean():.2f}% +- {100.0 * errors.std():.2f}%")
    else:
        if not args.model or not args.data:
            raise ValueError("eval needs --model and --data, or --kfold with a config")
        model = load_model(args.model)
        ds = load_dataset(args.data, args.data_format)
        err, confusion = evaluate(model, ds.X, ds.y)
        print(f"error {100.0 * err:.2f}% on {len(ds.y)} samples")
    _write_confusion(out_dir / "confusion.csv", confusion)
    return 0


def _report_csv_rows(report):
    rows = [
        ("lambda_energy", "", report.lambda_hat),
        ("lambda_mean_norm", "", report.lambda_mean_norm),
        ("sigma_e_sq", "", report.sigma_e_sq_hat),
        ("bound", "", report.bound_value),
        ("vacuous", "", float(report.vacuous)),
        ("empirical_ratio", "", report.empirical_ratio),
        ("empirical_prob", "", report.empirical_prob),
    ]
    rows += [("prior", str(i), float(v)) for i, v in enumerate(report.priors)]
    rows += [("mean_norm_sq", str(i), float(v)) for i, v in enumerate(report.mean_norms)]
    return [(report.context, q, i, v) for q, i, v in rows]


def _parse_kv(text):
    out = {}
    for item in text.split(","):
        if item.strip():
            k, _, v = item.partition("=")
            out[k.strip()] = float(v)
    return out


def cmd_bounds(args) -> int:
    out_dir = Path(args.out_dir or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    reports = []

    if args.synth:
        kv = _parse_kv(args.synth)
        data = subspace_model(
            n_classes=int(kv.get("classes", 3)), per_class_rank=int(kv.get("rank", 4)),
            ambient_dim=int(kv.get("dim", 32)), sigma_e_sq=kv.get("sigma", 0.1),
            overlap_lambda=kv.get("lambda", 0.1), n_per_class=int(kv.get("n", 2000)),
            seed=int(kv.get("seed", 0)),
        )
        stats = estimate_model_stats(projections_from_bases(data.bases, data.features), data.y)
        sep = empirical_separation(data.features, data.y)
        reports.append(build_report("synth-subspace", stats, sep))
    else:
        if not args.model or not args.data:
            raise ValueError("bounds needs --model and --data, or --synth")
        model = load_model(args.model)
        ds = load_dataset(args.data, args.data_format)
        Z = model.standardizer.transform(ds.X)
        if args.max_points and len(ds.y) > args.max_points:
            keep, _ = split_stratified_indices(ds.y, args.max_points / len(ds.y), seed=0)
            Z, y = Z[keep], ds.y[keep]
        else:
            y = ds.y
        bank = model.hmodel.layers[0].bank
        from .kernels import feature_distance_sq, gram  # noqa: F401 (gram used below)

        for k, spec in enumerate(model.kernel_set):
            if (bank.class_ids[0], k) not in bank:
                continue
            stats = estimate_model_stats(projections_from_bank(bank, k, Z), y)
            K_full = gram(spec, Z)
            sep = _separation_from_gram(K_full, y)
            reports.append(build_report(spec.name, stats, sep))
        emb = model.embed(ds.X)
        stats = _classwise_stats(model, Z, y)
        sep = empirical_separation(emb, y)
        reports.append(build_report("clasmk-embedding", stats, sep))

    lines, csv_rows = [], []
    for rep in reports:
        lines.extend(rep.lines())
        lines.append("")
        csv_rows.extend(_report_csv_rows(rep))
    text = "\n".join(lines)
    print(text)
    (out_dir / "bounds.txt").write_text(text + "\n")
    with open(out_dir / "bounds.csv", "w") as fh:
        fh.write("context,quantity,index,value\n")
        for ctx, q, i, v in csv_rows:
            fh.write(f"{ctx},{q},{i},{v!r}\n")
    return 0


def _separation_from_gram(K, y):
    """Exact feature-space separation statistics through the kernel trick."""
    from .separability import SeparationStats

    y = np.asarray(y, dtype=np.int64)
    classes = np.unique(y)
    if len(classes) < 2:
        raise ValueError("need at least two classes")
    priors = np.array([np.mean(y == c) for c in classes])
    D = np.maximum(2.0 - 2.0 * K, 0.0)
    e_db = 0.0
    for i, ci in enumerate(classes):
        for j, cj in enumerate(classes):
            if i != j:
                w = priors[i] * priors[j] / (1.0 - priors[i])
                e_db += w * float(np.mean(D[np.ix_(y == ci, y == cj)]))
    if e_db <= 0.0:
        raise ValueError("expected between-class distance is zero")
    e_dw, prob = 0.0, 0.0
    for i, c in enumerate(classes):
        Dc = D[np.ix_(y == c, y == c)]
        n = Dc.shape[0]
        if n < 2:
            continue
        iu = np.triu_indices(n, k=1)
        vals = Dc[iu]
        e_dw += priors[i] * float(np.mean(vals))
        prob += priors[i] * float(np.mean(vals > e_db))
    return SeparationStats(e_dw=e_dw, e_db=e_db, empirical_prob=prob)


def _classwise_stats(model, Z, y):
    """Model statistics of the stacked embedding blocks (diagnostics only)."""
    from .embedding import block_ranks
    from .hierarchy import embed_layer

    layer = model.hmodel.layers[0]
    emb = embed_layer(Z, layer)
    ranks = block_ranks(layer.bank, layer.weights.nu)
    offsets = np.cumsum([0] + ranks)
    projections = {c: emb[:, offsets[c]:offsets[c + 1]] for c in range(len(ranks))}
    return estimate_model_stats(projections, y)


def cmd_embed(args) -> int:
    model = load_model(args.model)
    ds = load_dataset(args.data, args.data_format)
    emb = model.embed(ds.X, through=args.through)
    out = args.out or "embeddings.csv"
    save_csv(out, emb, ds.y)
    print(f"{emb.shape[0]} embeddings of dimension {emb.shape[1]} written to {out}")
    return 0


def cmd_heatmap(args) -> int:
    model = load_model(args.model)
    out_dir = Path(args.out_dir or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    _export_weights(model, out_dir, model.kernel_set.names, with_ppm=True)
    print(f"wrote {model.hmodel.n_layers} layer heat map(s) to {out_dir}")
    return 0


def _sweep_point(cfg: RunConfig, ds, axis, value, holdout_seed):
    train_idx, test_idx = split_stratified_indices(ds.y, 0.8, holdout_seed)
    X_tr, y_tr = ds.X[train_idx], ds.y[train_idx]
    kernels = cfg.kernels
    hyper = cfg.hyper()
    if axis == "layers":
        cfg2 = RunConfig(**{**cfg.__dict__, "L_max": int(value)})
        hyper = cfg2.hyper()
    elif axis == "kernels":
        kernels = cfg.kernels[: int(value)]
        if not kernels:
            raise ValueError("kernel grid value exceeds configured kernel count")
    elif axis == "train_size":
        frac = float(value)
        keep, _ = split_stratified_indices(y_tr, frac, holdout_seed + 1)
        X_tr, y_tr = X_tr[keep], y_tr[keep]
    else:
        raise ValueError(f"unknown sweep axis {axis!r}")

    kernel_set = KernelSet.parse(kernels)
    t0 = time.perf_counter()
    model = train_pipeline(X_tr, y_tr, kernel_set, hyper, mode=cfg.mode)
    train_seconds = time.perf_counter() - t0
    err, _ = evaluate(model, ds.X[test_idx], ds.y[test_idx])
    infos = model.hmodel.train_infos
    opt_last = infos[-1].opt_seconds if infos else 0.0
    dims = [layer.dim for layer in model.hmodel.layers]
    return {
        "axis": axis, "value": value, "error": err, "accuracy": 1.0 - err,
        "nu_opt_seconds": opt_last,
        "nu_opt_seconds_total": sum(i.opt_seconds for i in infos),
        "train_seconds": train_seconds,
        "feature_dim": sum(dims),
        "dims_per_layer": "|".join(str(d) for d in dims),
        "status": "ok",
    }


def cmd_sweep(args) -> int:
    cfg = _build_config(args)
    ds = _load_config_dataset(cfg)
    values = [v.strip() for v in args.grid.split(",") if v.strip()]
    if not values:
        raise ValueError("empty sweep grid")

    def run(value):
        try:
            return _sweep_point(cfg, ds, args.axis, float(value), cfg.seed)
        except Exception as exc:  # record per-row failure, keep sweeping
            return {"axis": args.axis, "value": value, "error": "", "accuracy": "",
                    "nu_opt_seconds": "", "nu_opt_seconds_total": "", "train_seconds": "",
                    "feature_dim": "", "dims_per_layer": "", "status": f"error: {exc}"}

    n_workers = _threads()
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            rows = list(pool.map(run, values))
    else:
        rows = [run(v) for v in values]

    header = ["axis", "value", "error", "accuracy", "nu_opt_seconds",
              "nu_opt_seconds_total", "train_seconds", "feature_dim",
              "dims_per_layer", "status"]
    out = args.out or "sweep.csv"
    with open(out, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(row[h]) for h in header) + "\n")
    print(f"{len(rows)} sweep rows written to {out}")
    return 0


def cmd_synth(args) -> int:
    rng_seed = args.seed
    if args.kind == "banana":
        X, y = banana(n=args.n, seed=rng_seed, noise=args.noise if args.noise is not None else 0.33)
    elif args.kind == "moons":
        X, y = moons(n=args.n, seed=rng_seed, noise=args.noise if args.noise is not None else 0.2)
    elif args.kind == "pen":
        X, y = pen_strokes(n=args.n, seed=rng_seed)
    elif args.kind == "blobs":
        centers = np.array([[2.0, 0.0], [-2.0, 0.0]])
        X, y = blobs(centers, args.n // 2, args.noise if args.noise is not None else 0.5, rng_seed)
    elif args.kind == "subspace":
        data = subspace_model(args.classes, args.rank, args.dim, args.sigma_e_sq,
                              args.overlap_lambda, args.n // max(args.classes, 1), rng_seed)
        X, y = data.features, data.y
    elif args.kind == "classwise":
        data = classwise_model(args.classes, args.rank, args.dim, args.sigma_e_sq,
                               args.overlap_lambda, args.n // max(args.classes, 1), rng_seed)
        X, y = data.features, data.y
    else:
        raise ValueError(f"unknown synth kind {args.kind!r}")
    save_csv(args.out, X, y)
    print(f"{len(y)} samples ({X.shape[1]} features) written to {args.out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clasmk",
                                     description="class-specific multiple-kernel metric learning")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model from a configuration")
    _add_config_flags(p)
    p.add_argument("--model-out", help="model file name inside the output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a model or run k-fold validation")
    _add_config_flags(p)
    p.add_argument("--model", help="trained model file")
    p.add_argument("--data", help="test dataset")
    p.add_argument("--data-format", default="csv", choices=["csv", "libsvm"])
    p.add_argument("--kfold", type=int, help="retrain per fold on the config dataset")
    p.add_argument("--out-dir", help="where the confusion matrix is written")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bounds", help="separability statistics and bounds")
    p.add_argument("--model", help="trained model file")
    p.add_argument("--data", help="evaluation dataset")
    p.add_argument("--data-format", default="csv", choices=["csv", "libsvm"])
    p.add_argument("--synth", help="subspace-model generator spec, e.g. lambda=0.1,sigma=0.05,n=2000")
    p.add_argument("--max-points", type=int, default=2000)
    p.add_argument("--out-dir", help="where bounds.txt/bounds.csv are written")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("embed", help="write embeddings for a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--data-format", default="csv", choices=["csv", "libsvm"])
    p.add_argument("--through", type=int, default=None, help="use layers 1..through")
    p.add_argument("--out", help="output CSV (default embeddings.csv)")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("heatmap", help="export weight matrices as CSV + PPM heat maps")
    p.add_argument("--model", required=True)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("sweep", help="grid experiments over layers, kernels or train size")
    _add_config_flags(p)
    p.add_argument("--axis", required=True, choices=["layers", "kernels", "train_size"])
    p.add_argument("--grid", required=True, help="comma separated grid values")
    p.add_argument("--out", help="results CSV (default sweep.csv)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="generate synthetic datasets")
    p.add_argument("--kind", required=True,
                   choices=["banana", "moons", "pen", "blobs", "subspace", "classwise"])
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=None)
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--rank", type=int, default=4)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--sigma-e-sq", dest="sigma_e_sq", type=float, default=0.1)
    p.add_argument("--overlap-lambda", dest="overlap_lambda", type=float, default=0.1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # unexpected runtime failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
