"""Flat ``key = value`` configuration with strict key checking.

Blank lines and lines starting with ``#`` are ignored. Lists are comma
separated. Unknown keys are an error: a typo in an experiment grid would
otherwise silently run the defaults.
"""
from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .exceptions import ConfigError


def _ints(s):
    return tuple(int(v) for v in _strs(s))


def _floats(s):
    return tuple(float(v) for v in _strs(s))


def _strs(s):
    return tuple(v.strip() for v in s.split(",") if v.strip())


def _bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _bools(s):
    return tuple(_bool(v) for v in _strs(s))


def _pairs(s):
    out = {}
    for item in _strs(s):
        if ":" not in item:
            raise ValueError(f"expected prefix:tag, got {item!r}")
        k, v = item.split(":", 1)
        out[k.strip()] = v.strip()
    return out


@dataclass(frozen=True)
class Config:
    # data
    corpus: str = "bonn"               # bonn | synthetic
    data_dir: str = ""
    classes: tuple = ("A", "B")        # first listed set -> label 0
    set_map: dict = None               # filename prefix -> set tag, overrides Bonn letters
    synthetic_per_class: int = 100
    # design matrix
    chunk_lengths: tuple = (200, 300, 400, 500, 600)
    resolution_step: int = 50
    min_resolution: int = 100
    methods: tuple = ("dropout", "mean", "lttb")
    dynamic: tuple = (False, True)
    dynamic_p: int = -1                # -1: floor(interior buckets / 4)
    features: tuple = ("raw", "betti", "spectra")
    # geometry
    takens_m: int = 3
    epsilon_steps: int = 300
    epsilon_r_policy: str = "max_distance"
    tau_count: int = 7
    tau_list: tuple = ()
    simplex_cap: int = 50_000_000
    eigensolver: str = "lapack"
    # training
    folds: int = 10
    epochs: int = 10
    batch_size: int = 16
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    kernel_rounding: str = "half_even"
    dtype: str = "float64"
    # execution
    workers: int = 1
    seed: int = 0

    @property
    def class_map(self):
        return {tag: i for i, tag in enumerate(self.classes)}

    def with_overrides(self, **kw):
        return replace(self, **kw)


_PARSERS = {
    "corpus": str, "data_dir": str, "classes": _strs, "set_map": _pairs,
    "synthetic_per_class": int,
    "chunk_lengths": _ints, "resolution_step": int, "min_resolution": int,
    "methods": _strs, "dynamic": _bools, "dynamic_p": int, "features": _strs,
    "takens_m": int, "epsilon_steps": int, "epsilon_r_policy": str,
    "tau_count": int, "tau_list": _floats, "simplex_cap": int, "eigensolver": str,
    "folds": int, "epochs": int, "batch_size": int, "lr": float, "beta1": float,
    "beta2": float, "adam_eps": float, "kernel_rounding": str, "dtype": str,
    "workers": int, "seed": int,
}

_CHOICES = {
    "corpus": ("bonn", "synthetic"),
    "epsilon_r_policy": ("max_distance", "enclosing_radius"),
    "eigensolver": ("lapack", "jacobi"),
    "kernel_rounding": ("half_even", "half_up"),
    "dtype": ("float64", "float32"),
}

KEYS = tuple(f.name for f in fields(Config))
assert set(KEYS) == set(_PARSERS)


def validate(cfg):
    for key, allowed in _CHOICES.items():
        if getattr(cfg, key) not in allowed:
            raise ConfigError(f"{key} must be one of {allowed}, got {getattr(cfg, key)!r}")
    for m in cfg.methods:
        if m not in ("dropout", "mean", "lttb"):
            raise ConfigError(f"methods: unknown downsampling method {m!r}")
    for f in cfg.features:
        if f not in ("raw", "betti", "spectra"):
            raise ConfigError(f"features: unknown feature pipeline {f!r}")
    if cfg.folds < 2:
        raise ConfigError("folds must be >= 2")
    if cfg.resolution_step < 1:
        raise ConfigError("resolution_step must be positive")
    if cfg.tau_list:
        t = cfg.tau_list
        if t[0] != 0.0 or t[-1] != 2.0 or any(b <= a for a, b in zip(t, t[1:])):
            raise ConfigError("tau_list must increase strictly from 0 to 2")
    return cfg


def parse_config(text):
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"unknown config key {key!r} (line {lineno})", )
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r} (line {lineno}): {exc}") from None
    return validate(Config(**values))


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
