import json

import numpy as np
import pytest

from graph_mcs.cli import main
from graph_mcs.graph import random_bipartite_graph, random_sensor_graph, save_edge_list


@pytest.fixture
def bipartite_files(tmp_path):
    g, part = random_bipartite_graph(6, 6, 0.5, seed=1)
    gp, pp = tmp_path / "g.txt", tmp_path / "low.txt"
    save_edge_list(g, gp)
    pp.write_text(" ".join(map(str, part.low_set)) + "\n")
    return gp, pp


def test_verify_pr(bipartite_files, capsys):
    gp, pp = bipartite_files
    assert main(["verify-pr", "--graph", str(gp), "--partition", str(pp)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["pr"] and out["defect"] < 1e-8 and out["cross_term"] < 1e-8


def test_verify_pr_non_bipartite_partition(tmp_path, capsys):
    gp, pp = tmp_path / "g.txt", tmp_path / "low.txt"
    save_edge_list(random_sensor_graph(8, 3, seed=0), gp)
    pp.write_text("0 1 2 3\n")
    assert main(["verify-pr", "--graph", str(gp), "--partition", str(pp)]) == 2
    assert "error" in capsys.readouterr().err


def test_sss(tmp_path, capsys):
    gp = tmp_path / "g.txt"
    save_edge_list(random_sensor_graph(32, 5, seed=0), gp)
    assert main(["sss", "--graph", str(gp), "--k", "16"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    m0, m1 = (list(map(int, ln.split())) for ln in lines)
    assert len(m0) == 16 and sorted(m0 + m1) == list(range(32))


def test_sss_bad_channels(tmp_path):
    gp = tmp_path / "g.txt"
    save_edge_list(random_sensor_graph(16, 5, seed=0), gp)
    assert main(["sss", "--graph", str(gp), "--k", "4", "--channels", "haar"]) == 2
    assert main(["sss", "--graph", str(gp), "--k", "40"]) == 2


def test_run_with_config_and_overrides(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    out = tmp_path / "r.json"
    cfg.write_text(f"n = 48\nruns = 5\noutput_json = {out}\n")
    rc = main(["run", "--config", str(cfg), "--runs", "1", "--set", "model=pws"])
    assert rc == 0
    data = json.loads(out.read_text())
    assert data["config"]["runs"] == 1 and len(data["runs"]) == 1
    assert "mcs" in capsys.readouterr().out


def test_run_config_error_exit_code(tmp_path):
    assert main(["run", "--set", "runs=0"]) == 2
    assert main(["run", "--set", "bogus"]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_run_numerical_failure_exit_code(monkeypatch):
    import graph_mcs.bench as bench
    from graph_mcs.errors import NumericalError

    def fail(cfg, seeds):
        raise NumericalError("singular")

    monkeypatch.setattr(bench, "_one_run", fail)
    assert main(["run", "--n", "32", "--runs", "1", "--quiet"]) == 3


def test_run_outputs(tmp_path):
    args = ["run", "--n", "40", "--runs", "1", "--quiet"]
    args += ["--output-csv", str(tmp_path / "r.csv"), "--dump-path", str(tmp_path / "d.csv")]
    assert main(args) == 0
    assert len((tmp_path / "r.csv").read_text().splitlines()) == 2
    assert len((tmp_path / "d.csv").read_text().splitlines()) == 41


def test_argparse_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["unknown-command"])
    assert exc.value.code == 2
