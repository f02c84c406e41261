import numpy as np
import pytest

from seqdiff import __version__
from seqdiff.cli import main


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_simulate(tmp_path, capsys):
    out = tmp_path / "d.csv"
    code, _, _ = run(["simulate", "--n", 250, "--gamma", 0, "--phi", 0.8, "--phi-prime", 0.8,
                      "--seed", 7, "--out", out], capsys)
    assert code == 0
    assert len(out.read_text().splitlines()) == 251


def test_missing_flag_is_usage_error(capsys):
    code, _, err = run(["simulate"], capsys)
    assert code == 1 and "usage:" in err


def test_bad_label_is_data_error(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("t,s,y\n0,0.1,0\n1,0.2,1\n2,0.3,0\n3,0.4,2\n")
    code, _, err = run(["test", "--in", p], capsys)
    assert code == 2 and "row 5" in err


def test_missing_file_is_data_error(tmp_path, capsys):
    code, _, _ = run(["test", "--in", tmp_path / "nope.csv"], capsys)
    assert code == 2


def test_version(capsys):
    code, out, _ = run(["--version"], capsys)
    assert code == 0 and out.strip() == f"seqdiff {__version__}"


def test_simulate_then_test_byte_identical(tmp_path, capsys):
    d = tmp_path / "d.csv"
    run(["simulate", "--n", 300, "--gamma", 1, "--seed", 3, "--out", d], capsys)
    outs = []
    for name in ("a", "b"):
        sp, rep = tmp_path / f"{name}_s.csv", tmp_path / f"{name}_r.csv"
        assert run(["split", "--in", d, "--seed", 1, "--out", sp], capsys)[0] == 0
        code, out, _ = run(["test", "--in", d, "--splits", sp, "--B", 49, "--seed", 2,
                            "--report", rep], capsys)
        assert code == 0 and out.startswith("lambda=")
        outs.append((sp.read_bytes(), rep.read_bytes(), out))
    assert outs[0] == outs[1]


def test_simulate_stdout_matches_file(tmp_path, capsys):
    d = tmp_path / "d.csv"
    run(["simulate", "--n", 20, "--seed", 1, "--out", d], capsys)
    _, out, _ = run(["simulate", "--n", 20, "--seed", 1], capsys)
    assert out == d.read_text()


def test_local_test(tmp_path, capsys):
    d = tmp_path / "d.csv"
    run(["simulate", "--n", 600, "--phi-prime", 0.8, "--seed", 5, "--out", d], capsys)
    code, out, _ = run(["local-test", "--in", d, "--center", 0, "--epsilon", 0.5, "--B", 19], capsys)
    assert code == 0 and "p_value=" in out
    code, _, err = run(["local-test", "--in", d, "--center", 99, "--epsilon", 0.5], capsys)
    assert code == 2


def test_label_events(tmp_path, capsys):
    w = tmp_path / "w.csv"
    w.write_text("t,w\n0,35\n6,65\n12,65\n18,65\n24,65\n")
    code, out, _ = run(["label-events", "--in", w], capsys)
    assert code == 0
    assert out.splitlines() == ["t,y", "0,1", "6,1", "12,0", "18,0", "24,0"]
    code, out, _ = run(["label-events", "--in", w, "--direction", "rw", "--fine-steps", 12], capsys)
    assert code == 0 and len(out.splitlines()) == 1 + 49


def test_invalid_parameter_is_usage_error(capsys):
    code, _, _ = run(["simulate", "--n", 10, "--phi", 2], capsys)
    assert code == 1


def test_experiment_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "c.txt"
    cfg.write_text("trials = 2\nbogus = 1\n")
    code, _, err = run(["experiment", "validity", "--config", cfg, "--out", tmp_path / "o"], capsys)
    assert code == 1 and "bogus" in err


def test_experiment_outputs_identical_across_threads(tmp_path, capsys):
    cfg = tmp_path / "c.txt"
    cfg.write_text("# tiny run\nsettings = A\nnulls = permutation\nt1 = 40\nt2 = 40\nv = 40\nsims = 200\n")
    files = []
    for th in (1, 2):
        out = tmp_path / f"o{th}"
        code, _, _ = run(["experiment", "validity", "--config", cfg, "--trials", 5, "--B", 9,
                          "--threads", th, "--out", out], capsys)
        assert code == 0
        files.append({p.name: p.read_bytes() for p in out.iterdir()})
    assert files[0] == files[1]
    assert "validity_summary.csv" in files[0] and "validity_permutation.svg" in files[0]


@pytest.mark.parametrize("kind,extra,expect", [
    ("power", ["--set", "values=0,1"], "power.csv"),
    ("lpd", ["--set", "sizes=40,80", "--set", "grid=-1:1:5"], "lpd.csv"),
    ("local", [], "local_pvalues.csv"),
])
def test_experiment_kinds(tmp_path, capsys, kind, extra, expect):
    out = tmp_path / "o"
    code, stdout, _ = run(["experiment", kind, "--trials", 3, "--B", 9, "--set", "t1=60",
                           "--set", "t2=60", "--set", "v=60", *extra, "--out", out], capsys)
    assert code == 0
    assert (out / expect).exists()
