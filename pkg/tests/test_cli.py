import json

import pytest

from xorlab.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_thresholds_line(capsys):
    code, out = run_cli(capsys, "thresholds", "--r", "3", "--k", "2")
    assert code == 0
    fields = out.strip().split(",")
    assert len(fields) == 6
    c_crit, mu_crit, mu, alpha, beta, zeta = map(float, fields)
    assert abs(c_crit - 0.8185) < 5e-4
    assert mu == pytest.approx(mu_crit)
    # 12 significant digits requested
    assert len(fields[0].replace(".", "").lstrip("0")) >= 11


def test_thresholds_with_density(capsys):
    code, out = run_cli(capsys, "thresholds", "--r", "3", "--k", "2", "--c", "1.0")
    fields = list(map(float, out.strip().split(",")))
    assert fields[2] > fields[1]  # mu(c) above the critical root


def test_gen_strip_solve_clusters_pipeline(tmp_path, capsys):
    inst_path = tmp_path / "demo.xor"
    code, out = run_cli(
        capsys, "gen", "--n", "12", "--m", "9", "--r", "3",
        "--seed", "7", "--out", str(inst_path),
    )
    assert code == 0 and inst_path.exists()

    levels = tmp_path / "levels.csv"
    digraph = tmp_path / "digraph.txt"
    code, out = run_cli(
        capsys, "strip", "--in", str(inst_path), "--k", "2",
        "--emit-levels", str(levels), "--emit-digraph", str(digraph),
    )
    assert code == 0
    assert "core_vertices=" in out
    assert levels.exists() and digraph.exists()
    for line in digraph.read_text().strip().split("\n"):
        if line:
            assert len(line.split()) == 2

    code, out = run_cli(capsys, "solve", "--in", str(inst_path), "--all-if-small", "12")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] in ("SAT", "UNSAT")
    assert lines[1].startswith("rank=")
    if lines[0] == "SAT":
        sols = lines[2:]
        assert sols == sorted(sols)
        assert all(set(s) <= {"0", "1"} for s in sols)

    code, out = run_cli(capsys, "clusters", "--in", str(inst_path))
    assert code == 0
    assert "clusters=" in out and "f_within=" in out


def test_gen_needs_m_or_c(tmp_path, capsys):
    code = main(["gen", "--n", "10", "--out", str(tmp_path / "x.xor")])
    assert code == 2


def test_experiment_cli(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(
        "r = 3\nk = 2\nmodel = uniform\ndensity = absolute\nc = 0.9\n"
        "n = 128, 256\ntrials = 2\nbase_seed = 77\n"
    )
    out_dir = tmp_path / "out"
    code, out = run_cli(
        capsys, "experiment", "--config", str(cfg), "--out-dir", str(out_dir), "--emit-dat"
    )
    assert code == 0
    trials = (out_dir / "trials.csv").read_text().strip().split("\n")
    assert len(trials) == 5
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["trials"] == 4
    assert (out_dir / "imax.dat").exists()


def test_bench_runs(capsys):
    code, out = run_cli(capsys, "bench", "--n", "4096", "--c", "0.9", "--seed", "3")
    assert code == 0
    assert "slow_strip" in out
    assert "python" in out
