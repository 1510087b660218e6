import csv
import io
import json
import math
import subprocess
import sys

import pytest

from hulthen import cli
from hulthen.spectra import coulomb_limit_energy, dirac_energy
from hulthen.model import ModelParams, QuantumState


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows_of(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


@pytest.fixture(autouse=True)
def no_env_config(monkeypatch):
    monkeypatch.delenv(cli.CONFIG_ENV, raising=False)


def test_spectrum_columns_and_values(capsys):
    code, out, _ = run(capsys, "spectrum", "--nr", "0:2", "--ell", "0,1", "--dim", "3",
                       "--alpha", "0.1")
    assert code == 0
    rows = rows_of(out)
    assert list(rows[0]) == ["source", "n_r", "ell", "D", "kappa", "alpha", "branch",
                             "energy", "status"]
    assert len(rows) == 6
    st = QuantumState(int(rows[3]["n_r"]), int(rows[3]["ell"]), 3)
    assert float(rows[3]["energy"]) == dirac_energy(st, ModelParams(1, 0.1, 1)).value


def test_coulomb_limit_row(capsys):
    code, out, _ = run(capsys, "spectrum", "--formula", "coulomb_limit", "--alpha", "1e-8")
    row, = rows_of(out)
    assert float(row["energy"]) == pytest.approx(coulomb_limit_energy(QuantumState(0, 0, 3), 1, 1),
                                                 rel=1e-6)


@pytest.mark.xfail(strict=True, reason="closed form does not reduce to the Coulomb-limit energy")
def test_dirac_row_matches_coulomb_limit(capsys):
    code, out, _ = run(capsys, "spectrum", "--alpha", "1e-8")
    row, = rows_of(out)
    ref = coulomb_limit_energy(QuantumState(0, 0, 3), 1, 1)
    assert abs(float(row["energy"]) - ref) / ref < 1e-6


def test_imaginary_rows_reported_in_band(capsys):
    code, out, _ = run(capsys, "spectrum", "--alpha", "0.1,3")
    assert code == 0
    rows = rows_of(out)
    assert rows[1]["status"] == "imaginary" and rows[1]["energy"] == "nan"


@pytest.mark.parametrize("argv", [
    ["spectrum", "--nr", "3:1"],
    ["spectrum", "--ell", ""],
    ["spectrum", "--alpha", "abc"],
    ["spectrum", "--alpha", "-0.1"],
    ["scan", "--grid", "1:0:5"],
    ["bogus"],
    ["spectrum", "--format", "xml"],
])
def test_usage_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_csv_and_json_identical(capsys):
    args = ["spectrum", "--nr", "0:3", "--ell", "0:2", "--dim", "2:4", "--alignment", "both",
            "--alpha", "0.05,0.4,2"]
    _, csv_out, _ = run(capsys, *args)
    _, json_out, _ = run(capsys, *args, "--format", "json")
    doc = json.loads(json_out)
    for c_row, j_row in zip(rows_of(csv_out), doc["rows"]):
        for key, value in j_row.items():
            if isinstance(value, float) or value is None:
                cv = float(c_row[key])
                assert (value is None and math.isnan(cv)) or cv == value
            else:
                assert str(value) == c_row[key] or float(c_row[key]) == value


def test_csv_numbers_round_trip(capsys):
    _, out, _ = run(capsys, "spectrum", "--alpha", "0.123456789012345678")
    row, = rows_of(out)
    st = QuantumState(0, 0, 3)
    assert float(row["energy"]) == dirac_energy(st, ModelParams(1, 0.123456789012345678, 1)).value


def test_wavefunction_header_and_nodes(capsys):
    code, out, _ = run(capsys, "wavefunction", "--alpha", "0.2")
    assert code == 0
    header = dict(l[2:].split("=", 1) for l in out.splitlines() if l.startswith("# "))
    assert {"C", "epsilon", "delta", "E"} <= set(header)
    F = [float(r["F"]) for r in rows_of(out)]
    interior = F[1:-1]
    assert all(f >= 0 for f in interior) or all(f <= 0 for f in interior)


def test_wavefunction_refinement(capsys):
    c = []
    for pts in ("1000", "2000"):
        _, out, _ = run(capsys, "wavefunction", "--nr", "2", "--alpha", "0.2", "--points", pts)
        header = dict(l[2:].split("=", 1) for l in out.splitlines() if l.startswith("# "))
        c.append(float(header["C"]))
    assert c[1] == pytest.approx(c[0], rel=1e-6)


def test_wavefunction_above_threshold(capsys):
    code, _, err = run(capsys, "wavefunction", "--alpha", "2")
    assert code == 2
    assert "1.618033988749" in err


def test_io_error_exit_3(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run(capsys, "spectrum", "--out", str(blocker / "sub" / "out.csv"))[0] == 3
    assert run(capsys, "spectrum", "--config", str(tmp_path / "missing.cfg"))[0] == 3


def test_config_precedence(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nalpha = 0.3\nnr = 0:1\ndelta-policy = literal\n")
    _, out, _ = run(capsys, "spectrum", "--config", str(cfg))
    rows = rows_of(out)
    assert len(rows) == 2 and all(float(r["alpha"]) == 0.3 for r in rows)
    _, out, _ = run(capsys, "spectrum", "--config", str(cfg), "--alpha", "0.05")
    assert all(float(r["alpha"]) == 0.05 for r in rows_of(out))
    monkeypatch.setenv(cli.CONFIG_ENV, str(cfg))
    _, out, _ = run(capsys, "spectrum")
    assert float(rows_of(out)[0]["alpha"]) == 0.3


def test_config_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = red\n")
    assert run(capsys, "spectrum", "--config", str(cfg))[0] == 2


def test_threshold_command(capsys):
    _, out, _ = run(capsys, "threshold", "--kind", "kg", "--n", "1", "--dim", "3")
    assert float(rows_of(out)[0]["alpha_threshold"]) == 2.0


def test_scan_dimension_axis(capsys):
    code, out, _ = run(capsys, "scan", "--axis", "dimension", "--alpha", "1e-6", "--n", "3",
                       "--grid", "50:100:3")
    assert code == 0
    assert abs(float(rows_of(out)[-1]["energy"]) + 4) < 1e-4


def test_intersect_command_runs(capsys):
    code, out, _ = run(capsys, "intersect", "--n", "1:2", "--dim", "2:3")
    assert code == 0
    assert out.splitlines()[0] == "n,D_a,D_b,alpha_star,energy,energy_gap,note"


def test_figures_deterministic_with_plots(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(capsys, "figures", "--plot", "--out", str(a))[0] == 0
    assert run(capsys, "figures", "--plot", "--out", str(b))[0] == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == [f"fig{i}.{ext}" for i in range(1, 5) for ext in ("csv", "svg")]
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes()
    svg = (a / "fig1.svg").read_text()
    assert "<svg" in svg and "alpha" in svg.lower()


def test_fig3_small_alpha_large_d(tmp_path, capsys):
    run(capsys, "figures", "--out", str(tmp_path))
    rows = [r for r in rows_of((tmp_path / "fig3.csv").read_text()) if "alpha=1e-06" in r["label"]]
    last = [r for r in rows if float(r["x"]) == 12.0]
    assert last and all(abs(float(r["energy"]) + 4) < 1e-4 for r in last)


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="several acceptance criteria are unattainable")
def test_verify_exits_zero(tmp_path, capsys):
    assert run(capsys, "verify", "--out", str(tmp_path))[0] == 0


@pytest.mark.slow
def test_verify_writes_reports(tmp_path, capsys):
    code, out, _ = run(capsys, "verify", "--out", str(tmp_path))
    assert code == 4
    for name in ("criteria.csv", "oracle.csv", "approximation.csv", "consistency.json"):
        assert (tmp_path / name).exists()
    assert out.count("PASS") + out.count("FAIL") == 11


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "hulthen", "threshold", "--n", "1", "--dim", "3"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and "kg,1,3,2" in res.stdout
