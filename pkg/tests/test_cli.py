import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from castore.cli import main
from castore.compressor import SymbolStream, bit_cost, parse_castore


def run(*argv):
    return main([str(a) for a in argv])


def test_roundtrip_bytes(tmp_path, capsys):
    src = tmp_path / "in.bin"
    src.write_bytes(bytes(np.random.default_rng(0).integers(0, 256, 5000, dtype=np.uint8)))
    assert run("compress", src, tmp_path / "c", "--alphabet", "bytes") == 0
    assert run("decompress", tmp_path / "c", tmp_path / "out", "--alphabet", "bytes") == 0
    assert (tmp_path / "out").read_bytes() == src.read_bytes()
    assert (tmp_path / "c.manifest.json").exists()


def test_stats_line_matches_library(tmp_path, capsys):
    text = "ACGACACGGAC" * 37
    (tmp_path / "in.txt").write_text(text)
    assert run("compress", tmp_path / "in.txt", tmp_path / "c", "--alphabet", "ACGT") == 0
    line = capsys.readouterr().out.split()
    stats = dict(kv.split("=") for kv in line)
    payload = bit_cost(parse_castore(SymbolStream.from_text(text, "ACGT")))
    assert int(stats["payload_bits"]) == payload
    assert int(stats["n"]) == len(text)


def test_empty_file(tmp_path):
    (tmp_path / "e").write_bytes(b"")
    assert run("compress", tmp_path / "e", tmp_path / "c", "--alphabet", "ACGT") == 0
    assert len((tmp_path / "c").read_bytes()) == 3
    assert run("decompress", tmp_path / "c", tmp_path / "d", "--alphabet", "ACGT") == 0
    assert (tmp_path / "d").read_bytes() == b""


def test_corrupt_container_exit_1(tmp_path, capsys):
    (tmp_path / "c").write_bytes(b"\x00\x01")
    assert run("decompress", tmp_path / "c", tmp_path / "d") == 1
    assert "bit offset" in capsys.readouterr().err


def test_unknown_character_exit_2(tmp_path):
    (tmp_path / "in.txt").write_text("ACGU")
    assert run("compress", tmp_path / "in.txt", tmp_path / "c", "--alphabet", "ACGT") == 2


@pytest.mark.parametrize("argv", [
    ["manneville", "--z", "4", "--bogus"],
    ["manneville", "--z", "0.5", "--out", "x.csv"],
    ["manneville", "--orbits", "0", "--out", "x.csv"],
    ["logistic", "--lambda", "5", "--out", "x.csv"],
    ["dna", "--fasta", "x.fa", "--windows", "0", "--out", "x.csv"],
    ["curve", "in.txt", "--fit-range", "10,5", "--out", "x.csv"],
    ["nosuchcommand"],
])
def test_usage_errors(tmp_path, monkeypatch, argv):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 2


def test_missing_input_exit_1(tmp_path):
    assert run("compress", tmp_path / "nope", tmp_path / "c") == 1


def test_curve_and_entropy(tmp_path):
    (tmp_path / "in.txt").write_text("01" * 5000)
    out = tmp_path / "c.csv"
    assert run("curve", tmp_path / "in.txt", "--alphabet", "01", "--out", out,
               "--sample-points", "100,1000,10000") == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["n", "bits", "bits_per_symbol", "pi_ratio"] and len(rows) == 4
    assert json.loads((tmp_path / "c.csv.fit.json").read_text())["trend"] == "decreasing"
    assert run("entropy", tmp_path / "in.txt", "--alphabet", "01", "--l-max", "2",
               "--out", tmp_path / "h.csv") == 0
    rows = list(csv.reader((tmp_path / "h.csv").open()))
    assert rows[1][0] == "1" and float(rows[1][1]) == pytest.approx(1.0)
    for name in ("c.csv", "c.csv.fit.json", "h.csv"):
        assert (tmp_path / f"{name}.manifest.json").exists()


def test_manifest_fields(tmp_path):
    out = tmp_path / "m.csv"
    assert run("manneville", "--z", "3", "--orbits", "2", "--length", "100000", "--seed", "4",
               "--out", out) == 0
    m = json.loads((tmp_path / "m.csv.manifest.json").read_text())
    assert set(m) >= {"command", "config", "seed", "version", "outputs", "duration_seconds"}
    assert m["command"] == "manneville" and m["seed"] == 4 and m["config"]["z"] == 3.0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["orbit_id", "exponent", "residual"]
    assert [r[0] for r in rows[1:]] == ["0", "1", "mean", "theory"]


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("z = 3.5\norbits = 2\nlength = 100000\nseed = 9\n")
    assert run("manneville", "--config", cfg, "--out", tmp_path / "a.csv") == 0
    assert run("manneville", "--z", "3.5", "--orbits", "2", "--length", "100000", "--seed", "9",
               "--out", tmp_path / "b.csv") == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    # explicit flags win over the config file
    assert run("manneville", "--config", cfg, "--orbits", "3", "--out", tmp_path / "c.csv") == 0
    assert len(list(csv.reader((tmp_path / "c.csv").open()))) == 6


def test_bad_config_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("colour = blue\n")
    assert run("manneville", "--config", cfg, "--out", tmp_path / "a.csv") == 2


def test_logistic_lambda_inf(tmp_path):
    out = tmp_path / "l.csv"
    assert run("logistic", "--lambda", "3.56994567187", "--length", "100000", "--out", out) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["lambda", "n", "bits", "s_ratio"]
    assert rows[1][0] == "3.56994567187"
    assert (tmp_path / "l.csv.summary.csv.manifest.json").exists()


def test_dna_rows(tmp_path):
    rng = np.random.default_rng(0)
    fa = tmp_path / "x.fa"
    fa.write_text("".join(f">s{i}\n" + "".join(rng.choice(list("ACGT"), 9000)) + "\n" for i in range(2)))
    labels = tmp_path / "x.tsv"
    labels.write_text("s0\tcoding\n")
    out = tmp_path / "d.csv"
    assert run("dna", "--fasta", fa, "--labels", labels, "--windows", "1024,4096", "--out", out) == 0
    rows = list(csv.reader(out.open()))
    assert [(r[0], r[1]) for r in rows[1:]] == [("s0", "1024"), ("s0", "4096"), ("s1", "1024"), ("s1", "4096")]
    summary = json.loads((tmp_path / "d.csv.summary.json").read_text())
    assert summary[0]["region_label"] == "coding"


def test_dna_bad_fasta_exit_1(tmp_path):
    fa = tmp_path / "x.fa"
    fa.write_text("ACGT\n")
    assert run("dna", "--fasta", fa, "--out", tmp_path / "d.csv") == 1


def _cli(args, workers, cwd):
    env = dict(os.environ, CASTORE_WORKERS=str(workers))
    return subprocess.run([sys.executable, "-m", "castore.cli", *args], cwd=cwd, env=env,
                          capture_output=True, text=True)


def test_manneville_twice_identical(tmp_path):
    args = ["manneville", "--z", "4", "--orbits", "5", "--length", "100000", "--seed", "1"]
    a = _cli(args + ["--out", "a.csv"], 1, tmp_path)
    b = _cli(args + ["--out", "b.csv"], 2, tmp_path)
    assert a.returncode == 0 and b.returncode == 0, a.stderr + b.stderr
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
