"""Design-matrix runner: downsample -> features -> 1D CNN under stratified k-fold CV."""
from __future__ import annotations

import csv
import hashlib
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import cnn
from .config import Config
from .downsample import downsample
from .embedding import takens_embed
from .exceptions import TsgeoError
from .homology import betti_features
from .ingestion import load_chunks, zscore
from .neighbor_graph import epsilon_grid, pairwise_distances
from .spectra import mu_series, tau_partition
from .synthetic import sine_vs_noise

log = logging.getLogger(__name__)

RESULT_COLUMNS = (
    "feature", "chunk_len", "method", "dynamic", "resolution",
    "mean_acc", "std_acc", "fold_accs", "wall_time_s", "status",
)


@dataclass(frozen=True)
class ExperimentCell:
    feature: str
    chunk_len: int
    method: str
    dynamic: bool
    resolution: int
    seed: int = 0

    def __post_init__(self):
        if self.resolution > self.chunk_len:
            raise ValueError("resolution cannot exceed the chunk length")

    @property
    def key(self):
        return (self.feature, self.chunk_len, self.method, self.dynamic, self.resolution)

    def descriptor(self):
        dyn = "dyn" if self.dynamic else "static"
        return f"{self.feature}/{self.chunk_len}/{self.method}/{dyn}/{self.resolution}"

    def derived_seed(self):
        digest = hashlib.sha256(f"{self.seed}|{self.descriptor()}".encode()).digest()
        return int.from_bytes(digest[:4], "little")


@dataclass
class CellResult:
    cell: ExperimentCell
    fold_accuracies: list
    wall_time: float
    status: str = "ok"

    @property
    def mean_accuracy(self):
        return float(np.mean(self.fold_accuracies)) if self.fold_accuracies else math.nan

    @property
    def std_accuracy(self):
        return float(np.std(self.fold_accuracies)) if self.fold_accuracies else math.nan

    def row(self):
        c = self.cell
        return {
            "feature": c.feature, "chunk_len": c.chunk_len, "method": c.method,
            "dynamic": str(c.dynamic).lower(), "resolution": c.resolution,
            "mean_acc": repr(self.mean_accuracy), "std_acc": repr(self.std_accuracy),
            "fold_accs": ";".join(repr(float(a)) for a in self.fold_accuracies),
            "wall_time_s": f"{self.wall_time:.3f}", "status": self.status,
        }


# ---------------------------------------------------------------------------
# folds

def kfold_split(n, k=10, seed=0, labels=None):
    """Stratified k folds as a list of (train, test) index arrays.

    Members of each class are shuffled and dealt round-robin, continuing the
    deal across classes so fold sizes differ by at most one.
    """
    if n < k:
        raise ValueError(f"cannot make {k} folds from {n} examples")
    rng = np.random.default_rng(seed)
    groups = [np.arange(n)]
    if labels is not None:
        labels = np.asarray(labels)
        classes, counts = np.unique(labels, return_counts=True)
        if counts.min() < k:
            log.warning("a class has fewer than %d members; folds are not stratified", k)
        else:
            groups = [np.flatnonzero(labels == c) for c in classes]
    assign = np.empty(n, dtype=np.intp)
    offset = 0
    for g in groups:
        members = rng.permutation(g)
        assign[members] = (offset + np.arange(len(members))) % k
        offset += len(members)
    folds = []
    for f in range(k):
        test = np.flatnonzero(assign == f)
        train = np.flatnonzero(assign != f)
        folds.append((train, test))
    return folds


# ---------------------------------------------------------------------------
# features

def dynamic_iterations(cfg, resolution):
    if cfg.dynamic_p >= 0:
        return cfg.dynamic_p
    return max(resolution - 2, 0) // 4


def betti_dims(cfg):
    return tuple(range(min(cfg.takens_m, 3)))


def taus_for(cfg):
    return np.asarray(cfg.tau_list) if cfg.tau_list else tau_partition(cfg.tau_count)


def extract_features(y, feature, cfg):
    """(channels, length) CNN input for one downsampled amplitude sequence."""
    if feature == "raw":
        return zscore(y)[None, :]
    dm = pairwise_distances(takens_embed(y, cfg.takens_m))
    grid = epsilon_grid(dm, cfg.epsilon_steps, cfg.epsilon_r_policy)
    if feature == "betti":
        return betti_features(dm, grid, betti_dims(cfg), cap=cfg.simplex_cap).channels
    if feature == "spectra":
        return mu_series(dm, grid, taus_for(cfg), method=cfg.eigensolver).channels
    raise ValueError(f"unknown feature {feature!r}")


def model_spec(feature, resolution, cfg):
    if feature == "raw":
        return cnn.ModelSpec(resolution, 1, 5, cnn.raw_kernel1(resolution, rounding=cfg.kernel_rounding), 2)
    if feature == "betti":
        return cnn.ModelSpec(cfg.epsilon_steps, len(betti_dims(cfg)), 7, 6, 2)
    if feature == "spectra":
        return cnn.ModelSpec(cfg.epsilon_steps, len(taus_for(cfg)) - 1, 3, 6, 2)
    raise ValueError(f"unknown feature {feature!r}")


def prepare_inputs(cell, values, cfg, cache=None):
    """Downsample and featurise every chunk. Labels never enter this function."""
    p = dynamic_iterations(cfg, cell.resolution) if cell.dynamic else 0
    out = []
    for v in values:
        _, y = downsample(v, cell.resolution, cell.method, p)
        key = None
        if cache is not None:
            key = (cell.feature, hashlib.sha1(np.ascontiguousarray(y).tobytes()).hexdigest())
            if key in cache:
                out.append(cache[key])
                continue
        feats = extract_features(y, cell.feature, cfg)
        if cache is not None:
            cache[key] = feats
        out.append(feats)
    return np.stack(out)


def _chunk_arrays(corpus):
    values = [c.series.values for c in corpus]
    labels = np.asarray([c.label for c in corpus], dtype=np.int64)
    return values, labels


def run_cell(cell, corpus, cfg=Config(), cache=None):
    """k-fold CV of one design-matrix cell. Extraction failures mark the cell as failed."""
    t0 = time.perf_counter()
    values, labels = _chunk_arrays(corpus)
    for v in values:
        if len(v) != cell.chunk_len:
            raise ValueError(f"chunk of length {len(v)} in a cell for chunk_len {cell.chunk_len}")
    try:
        x = prepare_inputs(cell, values, cfg, cache)
        spec = model_spec(cell.feature, cell.resolution, cfg)
        spec.layer_lengths()
    except TsgeoError as exc:
        return CellResult(cell, [], time.perf_counter() - t0, f"failed: {type(exc).__name__}: {exc}")

    dtype = np.float32 if cfg.dtype == "float32" else np.float64
    optim = cnn.AdamConfig(cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps, cfg.batch_size)
    seed = cell.derived_seed()
    accs = []
    for f, (train, test) in enumerate(kfold_split(len(labels), cfg.folds, seed, labels)):
        model = cnn.build(spec, seed=seed + 7919 * (f + 1), dtype=dtype)
        try:
            model = cnn.train(model, x[train], labels[train], cfg.epochs, optim, seed=seed + f)
        except TsgeoError as exc:
            return CellResult(cell, accs, time.perf_counter() - t0, f"failed: {type(exc).__name__}: {exc}")
        accs.append(cnn.evaluate(model, x[test], labels[test]))
    return CellResult(cell, accs, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# design matrix

def resolutions_for(chunk_len, cfg):
    res = []
    r = chunk_len
    while r >= cfg.min_resolution and r >= 3:
        res.append(r)
        r -= cfg.resolution_step
    return res


def design_cells(cfg):
    cells = []
    for chunk_len in cfg.chunk_lengths:
        for res in resolutions_for(chunk_len, cfg):
            for method in cfg.methods:
                for dyn in cfg.dynamic:
                    for feature in cfg.features:
                        cells.append(ExperimentCell(feature, chunk_len, method, dyn, res, cfg.seed))
    return cells


def build_corpus(cfg, chunk_len):
    if cfg.corpus == "synthetic":
        return sine_vs_noise(chunk_len, cfg.synthetic_per_class, seed=cfg.seed)
    return load_chunks(cfg.data_dir, cfg.class_map, chunk_len, cfg.set_map)


def read_results(path):
    if not os.path.exists(path):
        return []
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def row_key(row):
    return (row["feature"], int(row["chunk_len"]), row["method"],
            row["dynamic"] == "true", int(row["resolution"]))


def write_results(path, rows):
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=RESULT_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    os.replace(tmp, path)


def _append_row(path, row):
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=RESULT_COLUMNS, lineterminator="\n")
        if new:
            w.writeheader()
        w.writerow(row)


def _run_job(args):
    cell, corpus, cfg = args
    return run_cell(cell, corpus, cfg).row()


def run_matrix(cfg, out_path, resume=True, corpus_for=None, max_cells=None):
    """Run every cell of the grid, appending rows as they finish.

    With ``resume`` the cells already in `out_path` are skipped. The finished
    table is rewritten in grid order so interrupted and uninterrupted runs
    produce the same file. ``max_cells`` stops after that many new cells.
    """
    corpus_for = corpus_for or (lambda n: build_corpus(cfg, n))
    cells = design_cells(cfg)
    existing = read_results(out_path) if resume else []
    if not resume and os.path.exists(out_path):
        os.remove(out_path)
    done = {row_key(r) for r in existing}
    todo = [c for c in cells if c.key not in done]
    if max_cells is not None:
        todo = todo[:max_cells]

    corpora = {}
    cache = {}
    if cfg.workers > 1 and len(todo) > 1:
        for c in todo:
            corpora.setdefault(c.chunk_len, corpus_for(c.chunk_len))
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for row in pool.map(_run_job, [(c, corpora[c.chunk_len], cfg) for c in todo]):
                _append_row(out_path, row)
    else:
        for c in todo:
            if c.chunk_len not in corpora:
                corpora = {c.chunk_len: corpus_for(c.chunk_len)}
                cache = {}
            log.info("running %s", c.descriptor())
            _append_row(out_path, run_cell(c, corpora[c.chunk_len], cfg, cache).row())

    rows = {row_key(r): r for r in read_results(out_path)}
    order = [c.key for c in cells if c.key in rows]
    extra = [k for k in rows if k not in set(order)]
    final = [rows[k] for k in order + extra]
    write_results(out_path, final)
    return final


def plot_series(rows):
    """Group result rows into ``(feature, chunk_len, method, dynamic) -> [(resolution, mean_acc)]``."""
    out = {}
    for r in rows:
        if r["status"] != "ok":
            continue
        k = (r["feature"], int(r["chunk_len"]), r["method"], r["dynamic"] == "true")
        out.setdefault(k, []).append((int(r["resolution"]), float(r["mean_acc"])))
    return {k: sorted(v, reverse=True) for k, v in out.items()}


def write_plot_data(rows, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for (feature, chunk_len, method, dyn), series in sorted(plot_series(rows).items()):
        name = f"{feature}_{chunk_len}_{method}_{'dynamic' if dyn else 'static'}.csv"
        path = os.path.join(out_dir, name)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["resolution", "mean_acc"])
            for res, acc in series:
                w.writerow([res, repr(acc)])
        paths.append(path)
    return paths
