import csv
import subprocess
import sys

import numpy as np
import pytest

from tsgeo import cnn
from tsgeo.cli import build_parser, main
from tsgeo.config import KEYS, Config, parse_config
from tsgeo.exceptions import ConfigError
from conftest import unit_square

TINY_CFG = """
corpus = synthetic
synthetic_per_class = 10
chunk_lengths = 60
min_resolution = 60
methods = dropout
dynamic = false
features = raw
folds = 2
epochs = 1
"""


def test_parse_config():
    cfg = parse_config("# comment\n\nlr = 0.01\nchunk_lengths = 200, 300\ndynamic = true\nset_map = rec:A, x:B\n")
    assert cfg.lr == 0.01 and cfg.chunk_lengths == (200, 300) and cfg.dynamic == (True,)
    assert cfg.set_map == {"rec": "A", "x": "B"}
    assert parse_config("") == Config()


@pytest.mark.parametrize("text, match", [
    ("lr_scheduel = 3", "lr_scheduel"),
    ("folds = ten", "folds"),
    ("justtext", "line 1"),
    ("eigensolver = qr", "eigensolver"),
    ("methods = median", "median"),
    ("tau_list = 0, 1, 1.5", "tau_list"),
])
def test_config_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def _write(path, text):
    path.write_text(text)
    return str(path)


def test_downsample_cli(tmp_path, capsys):
    src = tmp_path / "in.csv"
    np.savetxt(src, np.sin(np.arange(600) / 9.0))
    out = tmp_path / "out.csv"
    assert main(["downsample", str(src), str(out), "--method", "lttb", "--target", "50"]) == 0
    assert len(out.read_text().splitlines()) == 52
    assert main(["downsample", str(src), str(out), "--method", "dropout", "--target", "50", "--dynamic-p", "5"]) == 0
    assert len(out.read_text().splitlines()) == 52
    assert main(["downsample", str(src), str(out), "--method", "lttb", "--target", "0"]) == 2
    two = tmp_path / "two.csv"
    two.write_text("3.5\n-1\n")
    assert main(["downsample", str(two), str(out), "--method", "mean", "--target", "0"]) == 0
    assert out.read_text().splitlines() == ["0.0,3.5", "1.0,-1.0"]
    assert main(["downsample", str(tmp_path / "nope.csv"), str(out), "--method", "mean", "--target", "3"]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("1\n2\nzz\n")
    assert main(["downsample", str(bad), str(out), "--method", "mean", "--target", "1"]) == 1
    assert "error" in capsys.readouterr().err


def test_features_cli_square(tmp_path):
    cloud = tmp_path / "square.csv"
    np.savetxt(cloud, unit_square(), delimiter=",")
    out = tmp_path / "betti.csv"
    assert main(["features", str(cloud), str(out), "--kind", "betti", "--cloud"]) == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 300 and list(rows[0]) == ["epsilon", "beta0", "beta1", "beta2"]
    for r in rows:
        e = float(r["epsilon"])
        assert int(r["beta1"]) == (1 if 1 < e <= np.sqrt(2) else 0)
    out = tmp_path / "mu.csv"
    assert main(["features", str(cloud), str(out), "--kind", "spectra", "--cloud", "--steps", "50"]) == 0
    with open(out) as fh:
        rows = list(csv.reader(fh))[1:]
    assert len(rows) == 50 and all(sum(int(v) for v in r[1:]) == 4 for r in rows)


def test_features_cli_series_and_errors(tmp_path):
    series = tmp_path / "chunk.csv"
    np.savetxt(series, np.sin(np.arange(80) / 4.0))
    out = tmp_path / "f.csv"
    assert main(["features", str(series), str(out), "--kind", "raw"]) == 0
    assert out.read_text().splitlines()[0] == "index,value"
    assert main(["features", str(series), str(out), "--kind", "spectra", "--steps", "20"]) == 0
    rows = out.read_text().splitlines()
    assert len(rows) == 21 and rows[0].startswith("epsilon,mu0")
    cfg = _write(tmp_path / "c.cfg", "simplex_cap = 5\n")
    assert main(["features", str(series), str(out), "--kind", "betti", "--config", cfg]) == 1
    assert main(["features", str(tmp_path / "missing.csv"), str(out), "--kind", "betti"]) == 2


def _fake_bonn(root, rng):
    for sub, prefix in (("Z", "Z"), ("O", "O"), ("S", "S")):
        d = root / sub
        d.mkdir(parents=True)
        for i in range(3):
            (d / f"{prefix}{i + 1:03d}.txt").write_text("\n".join(str(v) for v in rng.integers(-99, 99, 650)))


def test_ingest_and_train_cli(tmp_path, rng, capsys):
    _fake_bonn(tmp_path / "bonn", rng)
    chunks = tmp_path / "chunks.csv"
    assert main(["ingest", str(tmp_path / "bonn"), str(chunks), "--chunk-len", "300"]) == 0
    with open(chunks) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 12 and {r["set_tag"] for r in rows} == {"A", "B"}
    assert len(rows[0]) == 4 + 300
    ckpt = tmp_path / "m.tsgc"
    cfg = _write(tmp_path / "t.cfg", "epochs = 2\n")
    assert main(["train", "--chunks", str(chunks), "--method", "lttb", "--resolution", "200",
                 "--out", str(ckpt), "--config", cfg]) == 0
    model = cnn.load_checkpoint(ckpt)
    assert model.spec == cnn.raw_spec(200)
    assert "training accuracy" in capsys.readouterr().out


def test_experiment_cli(tmp_path, capsys):
    cfg = _write(tmp_path / "tiny.cfg", TINY_CFG)
    out = tmp_path / "res.csv"
    assert main(["experiment", "--config", cfg, "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 2 and lines[1].startswith("raw,60,dropout,false,60,")
    before = out.read_bytes()
    assert main(["experiment", "--config", cfg, "--out", str(out), "--resume", "--plot-dir", str(tmp_path / "p")]) == 0
    assert out.read_bytes() == before
    assert (tmp_path / "p" / "raw_60_dropout_static.csv").exists()
    bad = _write(tmp_path / "bad.cfg", TINY_CFG + "lr_scheduel = cosine\n")
    assert main(["experiment", "--config", bad, "--out", str(out)]) == 2
    assert "lr_scheduel" in capsys.readouterr().err


def test_gradcheck_cli(capsys):
    assert main(["gradcheck", "--seed", "7"]) == 0
    first = capsys.readouterr().out
    assert "PASS" in first
    assert main(["gradcheck", "--seed", "7"]) == 0
    assert capsys.readouterr().out == first
    assert main(["gradcheck", "--corrupt"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_help_lists_flags_and_keys():
    parser = build_parser()
    subs = parser._subparsers._group_actions[0].choices
    assert set(subs) == {"ingest", "downsample", "features", "train", "experiment", "gradcheck"}
    for name, sub in subs.items():
        text = sub.format_help()
        for action in sub._actions:
            for flag in action.option_strings:
                assert flag in text
    text = parser.format_help()
    for key in KEYS:
        assert f"{key} =" in text
    for name in ("ingest", "features", "train", "experiment"):
        assert all(f"{k} =" in subs[name].format_help() for k in KEYS)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "tsgeo", "gradcheck", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "--corrupt" in res.stdout
    res = subprocess.run([sys.executable, "-m", "tsgeo", "downsample"], capture_output=True, text=True)
    assert res.returncode == 2
