"""Command-line entry point. Exit codes: 0 success, 1 processing failure, 2 usage or config error."""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import fields

import numpy as np

from . import cnn, harness
from .config import Config, load_config
from .downsample import METHODS, bucket_average, dropout, dynamic_buckets, lttb, naive_buckets
from .embedding import takens_embed
from .exceptions import ComplexityCapError, ConfigError, InvalidTargetError, TsgeoError
from .homology import betti_features
from .ingestion import LabeledChunk, TimeSeries, load_chunks, zscore
from .neighbor_graph import epsilon_grid, pairwise_distances
from .spectra import mu_series

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _config_help():
    lines = ["config keys (flat 'key = value' file; lists are comma separated):"]
    for f in fields(Config):
        default = f.default
        if isinstance(default, tuple):
            default = ",".join(str(v).lower() if isinstance(v, bool) else str(v) for v in default)
        lines.append(f"  {f.name} = {default if default is not None else ''}")
    return "\n".join(lines)


def _read_table(path):
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    if rows:
        try:
            [float(c) for c in rows[0]]
        except ValueError:
            rows = rows[1:]  # header
    try:
        return np.array([[float(c) for c in r] for r in rows], dtype=np.float64)
    except ValueError as exc:
        raise TsgeoError(f"{path}: non-numeric cell: {exc}") from exc


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow(header)
        w.writerows(rows)


def _fmt(v):
    return repr(float(v))


def _cfg(args):
    return load_config(args.config) if getattr(args, "config", None) else Config()


# ---------------------------------------------------------------------------

def cmd_ingest(args):
    cfg = _cfg(args)
    classes = tuple(args.classes.split(",")) if args.classes else cfg.classes
    set_map = dict(p.split(":", 1) for p in args.set_map.split(",")) if args.set_map else cfg.set_map
    class_map = {t: i for i, t in enumerate(classes)}
    chunks = load_chunks(args.data_dir, class_map, args.chunk_len, set_map)
    header = ["source_id", "set_tag", "label", "chunk_index"] + [f"v{i}" for i in range(args.chunk_len)]
    rows = [
        [c.series.source_id, c.set_tag, c.label, c.chunk_index] + [_fmt(v) for v in c.series.values]
        for c in chunks
    ]
    _write_rows(args.output, header, rows)
    print(f"wrote {len(rows)} chunks of length {args.chunk_len} to {args.output}")
    return EXIT_OK


def cmd_downsample(args):
    if args.target < 0:
        raise UsageError("--target must be >= 0")
    table = _read_table(args.input)
    if table.size == 0:
        raise UsageError(f"{args.input} is empty")
    y = table[:, -1]
    try:
        bk = naive_buckets(y.size, args.target)
        if args.method == "lttb" and len(bk) < 3:
            raise InvalidTargetError("lttb needs --target >= 1")
    except InvalidTargetError as exc:
        raise UsageError(str(exc)) from exc
    if args.dynamic_p:
        bk = dynamic_buckets(y, bk, args.dynamic_p)
    if args.method == "dropout":
        _write_rows(args.output, None, [[_fmt(v)] for v in dropout(y, bk)])
    else:
        pts = bucket_average(y, bk) if args.method == "mean" else lttb(y, bk)
        _write_rows(args.output, None, [[_fmt(x), _fmt(v)] for x, v in pts])
    return EXIT_OK


def cmd_features(args):
    cfg = _cfg(args)
    steps = args.steps or cfg.epsilon_steps
    table = _read_table(args.input)
    if table.size == 0:
        raise UsageError(f"{args.input} is empty")
    if args.kind == "raw":
        y = table[:, -1]
        _write_rows(args.output, ["index", "value"], [[i, _fmt(v)] for i, v in enumerate(zscore(y))])
        return EXIT_OK
    cloud = table if args.cloud else takens_embed(table[:, -1], cfg.takens_m)
    dm = pairwise_distances(cloud)
    grid = epsilon_grid(dm, steps, cfg.epsilon_r_policy)
    if args.kind == "betti":
        dims = harness.betti_dims(cfg) if not args.cloud else (0, 1, 2)
        series = betti_features(dm, grid, dims, cap=cfg.simplex_cap)
        header = ["epsilon"] + [f"beta{k}" for k in dims]
    else:
        series = mu_series(dm, grid, harness.taus_for(cfg), method=cfg.eigensolver)
        header = ["epsilon"] + [f"mu{j}" for j in range(series.n_channels)]
    rows = [[_fmt(e)] + [int(v) for v in series.channels[:, g]] for g, e in enumerate(grid.values)]
    _write_rows(args.output, header, rows)
    return EXIT_OK


def _read_chunks(path):
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            rows = list(reader)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    chunks = []
    for r in rows:
        vals = [float(r[k]) for k in r if k.startswith("v")]
        chunks.append(LabeledChunk(TimeSeries(np.array(vals), r["source_id"]), int(r["label"]),
                                   r["set_tag"], int(r["chunk_index"])))
    return chunks


def cmd_train(args):
    cfg = _cfg(args)
    chunks = _read_chunks(args.chunks)
    if not chunks:
        raise UsageError(f"{args.chunks} holds no chunks")
    chunk_len = len(chunks[0])
    resolution = args.resolution or chunk_len
    cell = harness.ExperimentCell(args.feature, chunk_len, args.method, args.dynamic, resolution, cfg.seed)
    values = [c.series.values for c in chunks]
    labels = np.array([c.label for c in chunks])
    x = harness.prepare_inputs(cell, values, cfg)
    spec = harness.model_spec(args.feature, resolution, cfg)
    dtype = np.float32 if cfg.dtype == "float32" else np.float64
    model = cnn.build(spec, seed=cell.derived_seed(), dtype=dtype)
    optim = cnn.AdamConfig(cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps, cfg.batch_size)
    model = cnn.train(model, x, labels, cfg.epochs, optim, seed=cell.derived_seed())
    acc = cnn.evaluate(model, x, labels)
    cnn.save_checkpoint(model, args.output)
    print(f"epoch losses: {' '.join(f'{v:.4f}' for v in model.loss_trace)}")
    print(f"training accuracy: {acc:.4f}; checkpoint written to {args.output}")
    return EXIT_OK


def cmd_experiment(args):
    cfg = load_config(args.config)
    if args.workers:
        cfg = cfg.with_overrides(workers=args.workers)
    rows = harness.run_matrix(cfg, args.out, resume=args.resume)
    failed = sum(r["status"] != "ok" for r in rows)
    print(f"{len(rows)} cells in {args.out} ({failed} failed)")
    if args.plot_dir:
        harness.write_plot_data(rows, args.plot_dir)
    return EXIT_OK


def cmd_gradcheck(args):
    err, groups = cnn.tiny_gradcheck(seed=args.seed, corrupt=args.corrupt)
    for name, e in groups.items():
        print(f"  {name:8s} {e:.3e}")
    ok = err <= args.tol
    print(f"max relative error: {err:.6e} {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="tsgeo",
        description="Geometric time-series features and 1D-CNN experiments.",
        epilog=_config_help(), formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    raw = argparse.RawDescriptionHelpFormatter

    p = sub.add_parser("ingest", help="segment a Bonn-format directory into a chunk CSV",
                       epilog=_config_help(), formatter_class=raw)
    p.add_argument("data_dir")
    p.add_argument("output")
    p.add_argument("--chunk-len", type=int, required=True)
    p.add_argument("--classes", help="comma separated set tags; first is label 0 (default from config)")
    p.add_argument("--set-map", help="prefix:tag pairs overriding the Bonn file-name letters")
    p.add_argument("--config")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("downsample", help="downsample a single-column CSV")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--target", type=int, required=True,
                   help="number of interior buckets; output has target + 2 rows")
    p.add_argument("--dynamic-p", type=int, default=0,
                   help="variance-weighted split/merge iterations (0 disables)")
    p.set_defaults(func=cmd_downsample)

    p = sub.add_parser("features", help="write the epsilon-series (or z-scored raw series) of one chunk",
                       epilog=_config_help(), formatter_class=raw)
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--kind", choices=("raw", "betti", "spectra"), required=True)
    p.add_argument("--cloud", action="store_true",
                   help="input rows are points of a cloud rather than samples of a series")
    p.add_argument("--steps", type=int, help="epsilon grid length (default: config epsilon_steps)")
    p.add_argument("--config")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="train one model on a chunk CSV and write a checkpoint",
                       epilog=_config_help(), formatter_class=raw)
    p.add_argument("--chunks", required=True)
    p.add_argument("--feature", choices=("raw", "betti", "spectra"), default="raw")
    p.add_argument("--method", choices=METHODS, default="dropout")
    p.add_argument("--dynamic", action="store_true")
    p.add_argument("--resolution", type=int)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("experiment", help="run the design matrix under k-fold CV",
                       epilog=_config_help(), formatter_class=raw)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--resume", action="store_true", help="skip cells already present in --out")
    p.add_argument("--workers", type=int)
    p.add_argument("--plot-dir", help="also write resolution,mean_acc series per panel")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("gradcheck", help="finite-difference check of the CNN backprop")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--corrupt", action="store_true", help="test hook: scale one analytic gradient")
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"tsgeo {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ComplexityCapError as exc:
        print(f"tsgeo {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (TsgeoError, ValueError, OSError) as exc:
        print(f"tsgeo {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
