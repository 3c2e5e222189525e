import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from ellcover import cli
from ellcover.cli import main, parse_grid, parse_series


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    return rows[0], [[float(v) for v in r] for r in rows[1:]]


def notes(text):
    return dict(ln[3:].split(" = ", 1) for ln in text.splitlines() if ln.startswith("#! "))


class TestParsing:
    def test_range_grid_is_inclusive(self):
        assert parse_grid("0:30:10") == [0.0, 10.0, 20.0, 30.0]
        assert parse_grid("5:49:1")[-1] == 49.0 and len(parse_grid("5:49:1")) == 45

    def test_list_grid_with_fractions(self):
        assert parse_grid("1,4/3,2") == pytest.approx([1.0, 4 / 3, 2.0])

    def test_series(self):
        axis, values = parse_series("m=1,4/3")
        assert axis == "m" and values == pytest.approx([1.0, 4 / 3])

    @pytest.mark.parametrize("bad", ["1:2", "a,b", "0:10:0", ""])
    def test_bad_grid(self, bad):
        with pytest.raises(ValueError):
            parse_grid(bad)


class TestGeometry:
    def test_reference_values(self, capsys):
        code, out, _ = run(["geometry", "--H", "300", "--theta", "30", "--psi", "20"], capsys)
        assert code == 0
        cols, rows = table(out)
        r = dict(zip(cols, rows[0]))
        assert r["a"] == pytest.approx(205.21, abs=0.01)
        assert r["b"] == pytest.approx(188.53, abs=0.01)
        assert r["x0"] == pytest.approx(152.31, abs=0.01)
        assert r["H_v"] == pytest.approx(205.212 / math.tan(math.radians(30)), rel=1e-4)
        assert r["valid"] == 1

    def test_invalid_geometry_exits_2(self, capsys):
        code, _, err = run(["geometry", "--theta", "50", "--psi", "45"], capsys)
        assert code == 2 and "ellipse" in err

    def test_sweep_flags_invalid_rows(self, capsys):
        code, out, _ = run(["geometry", "--theta", "40", "--sweep", "psi", "--grid", "40:55:5"], capsys)
        assert code == 0
        cols, rows = table(out)
        assert [r[cols.index("valid")] for r in rows] == [1, 1, 0, 0]

    def test_series_stacks_rows(self, capsys):
        _, out, _ = run(["geometry", "--sweep", "psi", "--grid", "0:20:10", "--series", "theta=20,30"], capsys)
        cols, rows = table(out)
        assert len(rows) == 6
        assert sorted({r[cols.index("theta_deg")] for r in rows}) == [20.0, 30.0]


class TestDistance:
    def test_columns_and_mass(self, capsys):
        code, out, _ = run(["distance", "--H", "300", "--theta", "30", "--psi", "40", "--points", "50"], capsys)
        assert code == 0
        cols, rows = table(out)
        assert cols == ["d", "pdf", "cdf"]
        assert rows[0][2] == 0.0 and rows[-1][2] == pytest.approx(1.0, abs=1e-8)

    def test_circle_law(self, capsys):
        argv = ["distance", "--scenario", "vertical", "--a", "180", "--b", "180", "--H", "300", "--points", "40"]
        _, out, _ = run(argv, capsys)
        _, rows = table(out)
        for d, pdf, cdf in rows:
            assert cdf == pytest.approx((d * d - 300**2) / 180**2, abs=1e-9)
            assert pdf == pytest.approx(2 * d / 180**2, abs=1e-12)

    def test_monte_carlo_columns(self, capsys):
        argv = ["distance", "--psi", "20", "--points", "30", "--mc", "200000", "--seed", "3"]
        _, out, _ = run(argv, capsys)
        cols, rows = table(out)
        assert cols[-2:] == ["mc_density", "mc_cdf"]
        assert float(notes(out)["ks_distance"]) < 1.63 / math.sqrt(2e5) * 1.5


class TestOutage:
    def test_threshold_sweep_monotone(self, capsys):
        argv = ["outage", "--psi", "20", "--m", "4/3", "--sweep", "gamma_th", "--grid", "0:30:2"]
        code, out, _ = run(argv, capsys)
        assert code == 0
        cols, rows = table(out)
        p = [r[cols.index("p_out")] for r in rows]
        assert all(y >= x for x, y in zip(p, p[1:]))

    def test_series_columns(self, capsys):
        argv = ["outage", "--psi", "30", "--theta", "40", "--sweep", "gamma_th", "--grid", "10", "--series", "m=1,4/3,2,4"]
        _, out, _ = run(argv, capsys)
        cols, rows = table(out)
        p = [rows[0][cols.index(f"p_out[m={k}]")] for k in ("1", "4/3", "2", "4")]
        assert all(x > y for x, y in zip(p, p[1:]))

    def test_compare_vertical(self, capsys):
        argv = ["outage", "--theta", "30", "--m", "4/3", "--sweep", "gamma_th", "--grid", "0:30:10",
                "--series", "psi=20,40", "--compare-vertical"]
        _, out, _ = run(argv, capsys)
        cols, rows = table(out)
        for psi in ("20", "40"):
            t = cols.index(f"p_out[psi={psi}]")
            v = cols.index(f"p_out_vertical[psi={psi}]")
            assert all(r[t] <= r[v] for r in rows)

    def test_all_invalid_exits_2(self, capsys):
        code, _, _ = run(["outage", "--theta", "50", "--sweep", "psi", "--grid", "41,45"], capsys)
        assert code == 2

    def test_json(self, capsys):
        _, out, _ = run(["outage", "--psi", "20", "--gamma-th", "10", "--format", "json"], capsys)
        doc = json.loads(out)
        assert doc["columns"][0] == "gamma_th" and doc["config"]["m"] == 4.0
        assert 0 < doc["rows"][0][1] < 1


class TestFilesAndDeterminism:
    ARGV = ["outage", "--psi", "20", "--sweep", "m", "--grid", "1,2,4"]

    def test_repeatable(self, capsys):
        assert run(self.ARGV, capsys)[1] == run(self.ARGV, capsys)[1]

    def test_output_is_a_config(self, tmp_path, capsys):
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        assert main(self.ARGV + ["-o", str(first)]) == 0
        assert main(["--config", str(first), "-o", str(second)]) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_ini_config_and_flag_override(self, tmp_path, capsys):
        ini = tmp_path / "run.ini"
        ini.write_text("[run]\ncommand = geometry\ntheta = 40\npsi = 10\n")
        _, out, _ = run(["--config", str(ini), "geometry", "--psi", "20"], capsys)
        cols, rows = table(out)
        assert rows[0][cols.index("theta_deg")] == 40.0 and rows[0][cols.index("psi_deg")] == 20.0

    def test_env_output_dir(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
        assert main(["geometry", "-o", "g.csv"]) == 0
        assert (tmp_path / "g.csv").read_text().startswith("# ellcover")


class TestSelftest:
    def test_quick_passes(self, capsys):
        code, out, _ = run(["selftest", "--quick"], capsys)
        body = [ln.split(",") for ln in out.splitlines() if not ln.startswith("#")]
        assert code == 0 and len(body) == 11 and all(r[1] == "1" for r in body[1:])

    def test_injected_failure(self, capsys):
        code, out, _ = run(["selftest", "--quick", "--inject-failure"], capsys)
        body = [ln.split(",") for ln in out.splitlines() if not ln.startswith("#")]
        assert code == 1 and body[1][1] == "0"


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "ellcover", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("ellcover")
