import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from amoebic_handover.cli import main
from amoebic_handover.csvio import read_csv

SWEEP = (
    "sweep --mu-r 100 --sigma-r 10 --tau-a 1 --tau-d 1 --target-pu 0.02 --target-pf 0.01 "
    "--v-grid 5,10,15,20,25,30 --iterations 1000000 --seed 42"
).split()
THRESHOLD = "threshold --r1 100 --r2 100 --v 10 --tau-a 1 --tau-d 1".split()


def run(argv, tmp_path=None):
    if tmp_path is not None:
        argv = list(argv) + ["--out", str(tmp_path)]
    return main(argv)


class TestSweep:
    def test_rows_manifest_and_determinism(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run(SWEEP, a) == 0
        assert run(SWEEP + ["--threads", "3"], b) == 0
        rows = read_csv(a / "sweep.csv")
        assert len(rows) == 6
        assert (a / "sweep.csv").read_bytes() == (b / "sweep.csv").read_bytes()
        manifest = json.loads((a / "sweep_manifest.json").read_text())
        assert manifest["seed"] == 42
        assert manifest["parameters"]["iterations"] == 1_000_000
        assert manifest["artifacts"] == [str(a / "sweep.csv")]

    def test_plot(self, tmp_path):
        assert run(SWEEP[:-4] + ["--iterations", "20000", "--plot"], tmp_path) == 0
        for name in ("sweep_pu.svg", "sweep_pf.svg"):
            root = ET.parse(tmp_path / name).getroot()
            assert root.tag.endswith("svg")
        manifest = json.loads((tmp_path / "sweep_manifest.json").read_text())
        assert len(manifest["artifacts"]) == 3

    def test_sampled_velocity(self, tmp_path):
        argv = "sweep --velocity-mode sampled --vmin 5 --vmax 15 --iterations 20000".split()
        assert run(argv, tmp_path) == 0
        assert len(read_csv(tmp_path / "sweep.csv")) == 1

    @pytest.mark.parametrize("bad", [
        ["--target-pu", "1.5"], ["--iterations", "0"], ["--v-grid", "5,x"],
        ["--radius-mode", "odd"], ["--sigma-r", "30"], ["--threads", "0"],
    ])
    def test_usage_errors(self, tmp_path, bad):
        assert run(["sweep"] + bad, tmp_path) == 2

    def test_unachievable_exit_code(self, tmp_path, capsys):
        assert run(["sweep", "--target-pu", "0.9", "--iterations", "10"], tmp_path) == 1
        assert "--target-pu" in capsys.readouterr().err


class TestThreshold:
    def test_zero_targets(self, capsys):
        assert run(THRESHOLD + ["--target-pu", "0", "--target-pf", "0"]) == 0
        assert capsys.readouterr().out.strip() == "N=2 M=1"

    def test_n_not_below_m(self, capsys):
        assert run(THRESHOLD + ["--target-pu", "0.02", "--target-pf", "0.02"]) == 0
        fields = dict(kv.split("=") for kv in capsys.readouterr().out.split())
        assert float(fields["N"]) >= float(fields["M"])

    def test_missing_flag(self):
        assert run(["threshold", "--r1", "100", "--v", "10"]) == 2

    def test_unachievable(self, capsys):
        assert run(THRESHOLD + ["--target-pf", "0.5"]) == 1
        assert "--target-pf" in capsys.readouterr().err

    def test_manifest_when_out_given(self, tmp_path, capsys):
        assert run(THRESHOLD, tmp_path) == 0
        assert (tmp_path / "threshold_manifest.json").exists()


class TestPdf:
    def test_table(self, tmp_path):
        assert run("pdf --r1 80 --r2 120 --v 10 --points 501".split(), tmp_path) == 0
        rows = read_csv(tmp_path / "pdf.csv")
        assert list(rows[0]) == ["t_s", "pdf", "cdf"]
        assert len(rows) == 501
        assert float(rows[-1]["cdf"]) >= 0.999999
        assert all(float(r["pdf"]) >= 0 for r in rows)
        assert float(rows[0]["t_s"]) == 4.0 and float(rows[-1]["t_s"]) == 20.0

    def test_invalid(self, tmp_path):
        assert run("pdf --r1 80 --r2 120 --v 0".split(), tmp_path) == 2
        assert run("pdf --r1 80 --r2 120 --v 1 --points 1".split(), tmp_path) == 2


class TestCompare:
    def test_rows(self, tmp_path):
        argv = "compare --v-grid 5,15,30 --iterations 20000 --seed 3 --plot".split()
        assert run(argv, tmp_path / "a") == 0
        assert run(argv, tmp_path / "b") == 0
        rows = read_csv(tmp_path / "a" / "comparison.csv")
        assert len(rows) == 9
        assert [r["model"] for r in rows[:3]] == ["proposed", "yan", "hussain"]
        assert (tmp_path / "a" / "comparison.csv").read_bytes() == (tmp_path / "b" / "comparison.csv").read_bytes()
        ET.parse(tmp_path / "a" / "comparison.svg")

    def test_domain_errors_empty_fields(self, tmp_path, capsys):
        assert run("compare --v-grid 150 --iterations 1000".split(), tmp_path) == 0
        rows = {r["model"]: r for r in read_csv(tmp_path / "comparison.csv")}
        assert rows["yan"]["threshold_s"] == "" and rows["hussain"]["se_pu"] == ""
        assert rows["proposed"]["threshold_s"] != ""
        assert "warning" in capsys.readouterr().err


class TestCoverage:
    def test_outputs(self, tmp_path):
        argv = "coverage --contours 0.5,0.8,0.9 --trace-p 0.8 --trace-points 20000 --seed 5".split()
        assert run(argv, tmp_path / "a") == 0
        assert run(argv, tmp_path / "b") == 0
        rows = read_csv(tmp_path / "a" / "contours.csv")
        radii = [float(r["contour_radius_m"]) for r in rows]
        assert len(radii) == 3 and radii[0] > radii[1] > radii[2]
        trace = read_csv(tmp_path / "a" / "trace_p0.8.csv")
        frac = sum(float(r["rss_dbm"]) >= -90 for r in trace) / len(trace)
        assert abs(frac - 0.8) < 3 * (0.16 / len(trace)) ** 0.5
        assert len(read_csv(tmp_path / "a" / "boundary.csv")) == 360
        for name in ("contours.csv", "trace_p0.8.csv", "boundary.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    @pytest.mark.parametrize("bad", ["1.2", "0", "0.5,-0.1"])
    def test_invalid_probability(self, tmp_path, bad):
        assert run(["coverage", "--contours", bad], tmp_path) == 2

    def test_no_contour_is_model_error(self, tmp_path):
        assert run("coverage --tx-power -55".split(), tmp_path) == 1


class TestConfigFile:
    def test_config_values_and_flag_precedence(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# thresholds\nr1 = 100\nr2 = 100\nv = 10\ntarget_pu = 0\ntarget-pf = 0\ntau-a = 5\n")
        assert run(["threshold", "--config", str(cfg), "--tau-a", "1"]) == 0
        assert capsys.readouterr().out.strip() == "N=2 M=1"

    def test_list_and_bool_keys(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("v-grid = 5,10\niterations = 1000\nplot = true\n")
        assert run(["sweep", "--config", str(cfg)], tmp_path) == 0
        assert len(read_csv(tmp_path / "sweep.csv")) == 2
        assert (tmp_path / "sweep_pu.svg").exists()

    def test_unknown_key(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("warp = 9\n")
        assert run(["sweep", "--config", str(cfg)], tmp_path) == 2

    def test_malformed_and_missing(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("just words\n")
        assert run(["sweep", "--config", str(cfg)], tmp_path) == 2
        assert run(["sweep", "--config", str(tmp_path / "nope.cfg")], tmp_path) == 2


def test_module_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "amoebic_handover", *THRESHOLD, "--target-pu", "0", "--target-pf", "0"],
        capture_output=True, text=True, check=False,
    )
    assert out.returncode == 0
    assert out.stdout.strip() == "N=2 M=1"


def test_no_subcommand():
    assert main([]) == 2
