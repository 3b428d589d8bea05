"""Loading Bonn-style EEG text files, chunking and normalisation."""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

import numpy as np

from .exceptions import IngestError

log = logging.getLogger(__name__)

# first character of a Bonn file name -> set tag
BONN_PREFIXES = {"Z": "A", "O": "B", "N": "C", "F": "D", "S": "E"}
SET_TAGS = ("A", "B", "C", "D", "E")


@dataclass(frozen=True)
class TimeSeries:
    values: np.ndarray
    source_id: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("a TimeSeries needs at least 2 samples in a 1-D sequence")
        if not np.all(np.isfinite(v)):
            raise ValueError(f"non-finite values in series {self.source_id!r}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class LabeledChunk:
    series: TimeSeries
    label: int | None = None
    set_tag: str | None = None
    chunk_index: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.series)


def infer_set_tag(filename, set_map=None):
    """Set tag from the file-name prefix; the longest matching `set_map` prefix wins."""
    name = os.path.basename(filename)
    if set_map:
        for prefix in sorted(set_map, key=len, reverse=True):
            if name.startswith(prefix):
                return set_map[prefix]
    if name:
        return BONN_PREFIXES.get(name[0].upper())
    return None


def _parse_file(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    values = []
    for lineno, line in enumerate(lines, start=1):
        s = line.strip()
        if not s:
            continue
        try:
            values.append(float(int(s)))
        except ValueError:
            try:
                values.append(float(s))
            except ValueError:
                raise IngestError(f"{path}: line {lineno} is not numeric: {s!r}") from None
    return values


def load_bonn_dir(path, class_map, set_map=None):
    """Load every text file under `path` (recursively, lexicographic order).

    Returns a list of ``(TimeSeries, set_tag, label)``. Files whose set tag is
    not a key of `class_map` are skipped.
    """
    if not os.path.isdir(path):
        raise IngestError(f"not a directory: {path}")
    files = []
    for root, dirs, names in os.walk(path):
        dirs.sort()
        for name in names:
            if name.startswith("."):
                continue
            files.append(os.path.join(root, name))
    files.sort(key=lambda p: os.path.relpath(p, path))

    out = []
    for fpath in files:
        tag = infer_set_tag(fpath, set_map)
        if tag is None or tag not in class_map:
            continue
        values = _parse_file(fpath)
        try:
            ts = TimeSeries(np.array(values), source_id=os.path.relpath(fpath, path))
        except ValueError as exc:
            raise IngestError(f"{fpath}: {exc}") from exc
        out.append((ts, tag, int(class_map[tag])))
    if not out:
        log.warning("no usable recordings found under %s", path)
    return out


def segment(series, chunk_len, label=None, set_tag=None):
    """Tile `series` into consecutive non-overlapping chunks; the remainder is dropped."""
    if chunk_len < 2:
        raise ValueError("chunk_len must be >= 2")
    if not isinstance(series, TimeSeries):
        series = TimeSeries(series)
    n_chunks = len(series) // chunk_len
    chunks = []
    for i in range(n_chunks):
        vals = series.values[i * chunk_len:(i + 1) * chunk_len]
        chunks.append(LabeledChunk(
            series=TimeSeries(vals, source_id=f"{series.source_id}#{i}"),
            label=label, set_tag=set_tag, chunk_index=i,
        ))
    return chunks


def zscore(chunk):
    """Population z-score. Constant input maps to zeros."""
    x = chunk.values if isinstance(chunk, TimeSeries) else np.asarray(chunk, dtype=np.float64)
    if x.size < 2:
        raise ValueError("zscore needs at least 2 samples")
    centered = x - x.mean()
    sd = np.sqrt(np.mean(centered ** 2))
    # the rounded mean of a large constant can leave a tiny nonzero residual
    if np.ptp(x) == 0 or sd == 0.0 or not np.isfinite(sd):
        out = np.zeros_like(centered)
    else:
        out = centered / sd
    if isinstance(chunk, TimeSeries):
        return TimeSeries(out, source_id=chunk.source_id)
    return out


def load_chunks(path, class_map, chunk_len, set_map=None):
    """Convenience: load a Bonn directory and segment every recording."""
    chunks = []
    for ts, tag, label in load_bonn_dir(path, class_map, set_map):
        chunks.extend(segment(ts, chunk_len, label=label, set_tag=tag))
    return chunks
