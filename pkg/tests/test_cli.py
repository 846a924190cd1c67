import json

import pytest

from parity_sampler import __version__
from parity_sampler.cli import main
from parity_sampler.corpus import named_graph
from parity_sampler.graph import EdgeSet, odd_vertex_set


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_sample_is_deterministic_and_even(capsys):
    argv = ["sample", "--graph", "k4", "--p", "0.3", "--n", "10", "--seed", "7"]
    code, out1, _ = run(argv, capsys)
    _, out2, _ = run(argv, capsys)
    assert code == 0 and out1 == out2
    doc = json.loads(out1)
    assert len(doc["samples"]) == 10 and len(doc["cftp_depths"]) == 10
    assert doc["meta"]["seed"] == 7 and doc["meta"]["version"] == __version__
    assert len(doc["meta"]["config_hash"]) == 16
    g = named_graph("k4")
    for h in doc["samples"]:
        assert not odd_vertex_set(g, EdgeSet.from_hex(h, g.n_edges))
    _, out3, _ = run(["sample", "--graph", "k4", "--p", "0.3", "--n", "10", "--seed", "8"], capsys)
    assert json.loads(out3)["samples"] != doc["samples"]


def test_sample_triangle_high_p_all_even(capsys):
    code, out, _ = run(["sample", "--graph", "triangle", "--p", "0.7", "--n", "1000", "--seed", "1"], capsys)
    assert code == 0
    samples = json.loads(out)["samples"]
    assert len(samples) == 1000 and set(samples) <= {"0", "7"}


def test_sample_with_pe_file_and_csv(tmp_path, capsys):
    g = named_graph("grid-1-1")
    pe = tmp_path / "weights.json"
    pe.write_text(json.dumps([0.2 + 0.6 * (i % 2) for i in range(g.n_edges)]))
    out_file = tmp_path / "out.csv"
    code, _, _ = run(["sample", "--graph", "grid-1-1", "--pe-file", str(pe), "--n", "20", "--seed", "3",
                      "--format", "csv", "--output", str(out_file)], capsys)
    assert code == 0
    lines = out_file.read_text().splitlines()
    data = [ln for ln in lines if not ln.startswith("#")]
    assert data[0] == "index,config,cftp_depth" and len(data) == 21
    for row in data[1:]:
        assert not odd_vertex_set(g, EdgeSet.from_hex(row.split(",")[1], g.n_edges))


def test_sample_from_graph_file(tmp_path, capsys):
    f = tmp_path / "g.txt"
    f.write_text("3 3\n0 1\n1 2\n2 0\n")
    code, out, _ = run(["sample", "--graph-file", str(f), "--p", "0.4", "--n", "5"], capsys)
    assert code == 0 and json.loads(out)["meta"]["edges"] == 3


@pytest.mark.parametrize("argv", [
    ["sample", "--graph", "nonsense", "--p", "0.3"],
    ["sample", "--graph", "k4", "--p", "1.5"],
    ["enumerate", "--graph", "k8"],
])
def test_errors_exit_nonzero(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2 and err.startswith("error:")


def test_graph_source_is_exclusive(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["sample", "--graph", "k4", "--graph-file", "x", "--p", "0.3"])
    assert exc.value.code != 0


def test_verify_default_exact_suite(capsys):
    code, out, _ = run(["verify"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    assert set(doc["summary"]) == {"high-temp", "cyclic", "converse", "forward"}
    assert all(s["max_deviation"] < 1e-12 for s in doc["summary"].values())


def test_verify_high_temp_on_k4(capsys):
    code, out, _ = run(["verify", "--only", "high-temp", "--graph", "k4", "--beta", "0.5"], capsys)
    doc = json.loads(out)
    assert code == 0 and len(doc["results"]) == 6
    assert all(r["deviation"] < 1e-12 for r in doc["results"])


def test_verify_cftp_reports_tv(capsys):
    code, out, _ = run(["verify", "--only", "cftp", "--graph", "cycle-4", "--w", "0,2", "--r", "0.6",
                        "--n", "20000", "--seed", "4"], capsys)
    doc = json.loads(out)
    assert code == 0
    rec = doc["results"][0]
    assert rec["tv"] < 0.02 and rec["failed"] == 0 and rec["depth_histogram"]


def test_verify_exits_one_on_statistical_failure(capsys):
    # 50 draws cannot reach TV < 0.01 on a measure with many states
    code, out, _ = run(["verify", "--only", "sampler", "--graph", "k4", "--p", "0.3", "--n", "50"], capsys)
    assert code == 1 and not json.loads(out)["passed"]


def test_lattice_scan_csv_and_mark_pc(tmp_path, capsys):
    argv = ["lattice", "scan", "--sizes", "4x4", "--p", "0.1:0.3:0.1", "--reps", "2", "--seed", "3", "--mark-pc"]
    code, out1, _ = run(argv, capsys)
    _, out2, _ = run(argv, capsys)
    assert code == 0 and out1 == out2
    lines = out1.splitlines()
    assert lines[0].startswith("# parity-sampler ") and "seed=3" in lines[0] and "config_hash=" in lines[0]
    header = lines[1].split(",")
    assert header[-1] == "p_c" and header[:3] == ["run_id", "m", "n"]
    assert len(lines) == 2 + 3 * 2
    assert lines[2].split(",")[-1].startswith("0.29289321881")


def test_lattice_scan_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lattice": "square-wired", "sizes": ["4x4"], "p_grid": [0.2, 0.4],
                               "replicates": 2, "seed": 9}))
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["lattice", "scan", "--config", str(cfg), "--output", str(out_a)]) == 0
    assert main(["lattice", "scan", "--config", str(cfg), "--output", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    assert len(out_a.read_text().splitlines()) == 2 + 4


def test_lattice_crossing(capsys):
    code, out, _ = run(["lattice", "crossing", "--n", "4", "--beta", "0.2", "--reps", "500", "--seed", "1"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["target"] == 0.5 and abs(doc["estimate"] - 0.5) < 0.1


def test_enumerate_measures(capsys):
    code, out, _ = run(["enumerate", "--graph", "triangle", "--p", "0.3"], capsys)
    rows = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert code == 0 and rows[0] == "config,probability" and len(rows) == 3
    code, out, _ = run(["enumerate", "--graph", "path-3", "--measure", "rc", "--w", "0,2"], capsys)
    rows = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert rows[1:] == ["3,1.0"]
    code, out, _ = run(["enumerate", "--graph", "triangle", "--measure", "ising", "--beta", "0"], capsys)
    rows = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert len(rows) == 9


def test_bench(capsys):
    code, out, _ = run(["bench", "--graph", "k4", "--n", "50"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["n"] == 50 and doc["backend"] in ("numba", "python")
    assert sum(doc["depth_histogram"].values()) == 50
