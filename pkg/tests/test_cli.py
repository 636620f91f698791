import json
import subprocess
import sys

import pytest

from phkit.bench import report_from_json
from phkit.cli import main

SQUARE_CSV = "0,0\n1,0\n1,1\n0,1\n"
CITIES_CSV = ("name,lat,lon\n"
              "A,34.983,63.1333\nB,35.0,63.2\nC,35.1,63.0\nD,10.0,20.0\nE,-33.9,18.4\n")


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def square(tmp_path):
    p = tmp_path / "square.csv"
    p.write_text(SQUARE_CSV)
    return p


def test_compute_unit_square(square, capsys):
    code, out, _ = run(["compute", "--input", square, "--maxdim", 1], capsys)
    assert code == 0
    assert "1,1.0,1.4142135623730951" in out.splitlines()
    assert out.splitlines()[0] == "dim,birth,death"


def test_compute_backends_agree(square, capsys):
    outs = set()
    for extra in ([], ["--backend", "row"], ["--backend", "morse"], ["--cohomology"],
                  ["--clear-compress"], ["--weights", "degree", "--backend", "morse"]):
        code, out, _ = run(["compute", "--input", square] + extra, capsys)
        assert code == 0
        outs.add(out)
    assert len(outs) == 1


def test_missing_file_exit_1(tmp_path, capsys):
    missing = tmp_path / "nowhere.csv"
    code, _, err = run(["compute", "--input", missing], capsys)
    assert code == 1 and str(missing) in err


def test_bad_data_exit_1(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("0,0\n1,x\n")
    code, _, err = run(["compute", "--input", p], capsys)
    assert code == 1 and "row 2" in err


@pytest.mark.parametrize("argv", [
    ["compute"],
    ["compute", "--input", "x.csv", "--maxdim", "-1"],
    ["compute", "--input", "x.csv", "--backend", "gpu"],
    ["bench", "--suite", "huge"],
    ["betti", "--input", "x.csv", "--at", "abc"],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_inconsistent_flags_exit_2(square, tmp_path, capsys):
    code, _, err = run(["compute", "--input", square, "--cohomology", "--generators",
                        "--json", tmp_path / "o.json"], capsys)
    assert code == 2 and "homology" in err
    code, _, _ = run(["compute", "--input", square, "--generators"], capsys)
    assert code == 2
    code, _, _ = run(["compute", "--input", square, "--format", "distmat", "--columns", "1"], capsys)
    assert code == 2


def test_upperlim_clips_bars(tmp_path, capsys):
    p = tmp_path / "cities.csv"
    p.write_text(CITIES_CSV)
    base = ["compute", "--input", p, "--header", "--columns", "2,3", "--label-column", "1", "--latlon"]
    code, out, _ = run(base + ["--upperlim", 0.15], capsys)
    assert code == 0
    rows = [line.split(",") for line in out.splitlines()[1:]]
    assert all(float(r[2]) <= 0.15 or r[2] == "inf" for r in rows)
    # three nearby cities merge below the threshold, the two far ones stay apart
    assert sum(r[0] == "0" and r[2] == "inf" for r in rows) == 3
    code, full, _ = run(base, capsys)
    assert sum(line.startswith("0,") and line.endswith("inf") for line in full.splitlines()) == 1


def test_json_labels_and_generators(square, tmp_path, capsys):
    j = tmp_path / "o.json"
    code, _, _ = run(["compute", "--input", square, "--json", j, "--generators"], capsys)
    data = json.loads(j.read_text())
    assert code == 0 and data["metadata"]["npoints"] == 4
    assert any(g["dim"] == 1 and len(g["cycle"]) == 4 for g in data["generators"])


def test_betti_and_plot(tmp_path, capsys):
    csv_path = tmp_path / "clusters.csv"
    code, _, _ = run(["compute", "--dataset", "clusters:30", "--seed", 2, "--output", csv_path], capsys)
    assert code == 0
    code, out, _ = run(["betti", "--input", csv_path, "--at", 1.0], capsys)
    assert out.splitlines()[:2] == ["dim,betti", "0,2"]
    code, out, _ = run(["betti", "--input", csv_path, "--at", 100], capsys)
    assert out.splitlines()[1] == "0,1"
    for style in ("diagram", "barcode"):
        svg = tmp_path / f"{style}.svg"
        code, _, _ = run(["plot", "--input", csv_path, "--output", svg, "--style", style], capsys)
        assert code == 0 and svg.read_text().startswith("<?xml")


def test_betti_unit_square(square, tmp_path, capsys):
    d = tmp_path / "sq.csv"
    run(["compute", "--input", square, "--output", d], capsys)
    code, out, _ = run(["betti", "--input", d, "--at", 1.2], capsys)
    assert out.splitlines()[1:] == ["0,1", "1,1"]


def test_outputs_identical_across_workers(tmp_path, capsys):
    blobs = set()
    for w in (1, 2, 4, 8):
        c, j = tmp_path / f"{w}.csv", tmp_path / f"{w}.json"
        code, _, _ = run(["compute", "--dataset", "circle:40", "--seed", 5, "--maxdim", 2,
                          "--backend", "morse", "--weights", "cotriangle", "--workers", w,
                          "--output", c, "--json", j], capsys)
        assert code == 0
        blobs.add(c.read_bytes() + j.read_bytes())
    assert len(blobs) == 1


def test_bench_quick_json(tmp_path, capsys):
    out = tmp_path / "bench.json"
    code, _, _ = run(["bench", "--suite", "quick", "--format", "json", "--output", out,
                      "--workers-sweep", "1,2"], capsys)
    assert code == 0
    rep = report_from_json(out.read_text())
    assert rep["suite"] == "quick" and all(b["diagrams_equal"] for b in rep["benchmarks"])


def test_console_entry_point(square):
    proc = subprocess.run([sys.executable, "-m", "phkit.cli", "compute", "--input", str(square)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "1,1.0,1.4142135623730951" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "phkit.cli", "bench", "--suite", "nope"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 2
