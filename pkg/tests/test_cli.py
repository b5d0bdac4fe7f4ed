import csv
import dataclasses
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

import specshare.cli as cli
from specshare.cli import main
from specshare.config_io import canonical_text, digest, load_config

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

DUOPOLY = """
[market]
availability = 1.0

[sp.1]
proprietary_bw = 1.0

[sp.2]
proprietary_bw = 1.0
"""


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def duopoly(tmp_path):
    p = tmp_path / "duo.toml"
    p.write_text(DUOPOLY)
    return p


class TestSolve:
    def test_licensed_duopoly(self, capsys, duopoly):
        code, out, _ = run(capsys, "solve", duopoly)
        data = json.loads(out)
        assert code == 0
        assert data["x"] == pytest.approx([0.2, 0.2], abs=1e-12)
        assert data["sw"] == pytest.approx(0.24, abs=1e-12)
        assert data["kkt"]["passed"] is True and data["vacating_sps"] == []

    def test_availability_out_of_range(self, capsys, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text(DUOPOLY.replace("availability = 1.0", "availability = 1.2"))
        code, out, err = run(capsys, "solve", p)
        assert code == 1 and out == ""
        assert "availability out of range" in err and "market.availability" in err

    def test_zero_proprietary_with_partial_availability(self, capsys, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text(DUOPOLY.replace("availability = 1.0", "availability = 0.5")
                     .replace("proprietary_bw = 1.0", "proprietary_bw = 0.0", 1)
                     .replace("[sp.2]", "open_access_bw = 1.0\n[sp.2]", 0))
        code, _, err = run(capsys, "solve", p)
        assert code == 1
        assert "sp.1.proprietary_bw" in err and "zero proprietary bandwidth" in err

    def test_unknown_key_named(self, capsys, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text(DUOPOLY.replace("[sp.2]", "[sp.2]\ncolour = 1"))
        code, _, err = run(capsys, "solve", p)
        assert code == 1 and "sp.2.colour" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "solve", tmp_path / "nope.toml")
        assert code == 1 and "not found" in err

    def test_bad_toml(self, capsys, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text("[market\n")
        code, _, err = run(capsys, "solve", p)
        assert code == 1 and "invalid TOML" in err

    def test_kkt_failure_exit_code(self, capsys, duopoly, monkeypatch):
        real = cli.solve_equilibrium

        def failing(config, options=None):
            res = real(config, options)
            bad = dataclasses.replace(res.kkt, max_stationarity_violation=1.0)
            return dataclasses.replace(res, kkt=bad)

        monkeypatch.setattr(cli, "solve_equilibrium", failing)
        code, out, _ = run(capsys, "solve", duopoly)
        assert code == 2
        assert json.loads(out)["kkt"]["passed"] is False

    def test_usage_error_exit_code(self, capsys, duopoly):
        with pytest.raises(SystemExit) as exc:
            main(["solve", str(duopoly), "--alpha", "high"])
        assert exc.value.code == 1

    def test_overrides_take_precedence(self, capsys, duopoly):
        code, out, _ = run(capsys, "solve", duopoly, "--N", "3", "--B", "2", "--W", "1",
                           "--beta", "1", "--alpha", "0.9")
        data = json.loads(out)
        assert code == 0 and len(data["x"]) == 3
        from specshare import MarketConfig, solve_equilibrium
        ref = solve_equilibrium(MarketConfig.from_bandwidths([2, 2, 2], open_access_bw=1.0,
                                                             availability=0.9))
        assert data["w"] == pytest.approx(ref.allocation.open_qty.tolist(), abs=1e-12)

    def test_beta_splits_licensed_part_equally(self, capsys, duopoly, tmp_path):
        dump = tmp_path / "dump.toml"
        code, _, _ = run(capsys, "solve", duopoly, "--W", "2", "--beta", "0.25",
                         "--dump-config", dump)
        cfg = load_config(dump)
        assert code == 0 and cfg.open_access_bw == 0.5
        assert cfg.licensed_shared.tolist() == [0.75, 0.75]

    def test_dump_config_round_trip(self, capsys, duopoly, tmp_path):
        dump = tmp_path / "dump.toml"
        _, out1, _ = run(capsys, "solve", duopoly, "--alpha", "0.8", "--seed", "5",
                         "--dump-config", dump)
        text = dump.read_text()
        assert canonical_text(load_config(dump), {"seed": 5}) == text
        _, out2, _ = run(capsys, "solve", dump)
        assert json.loads(out1)["config_digest"] == json.loads(out2)["config_digest"] == digest(text)

    def test_digest_stable_under_formatting(self, capsys, duopoly, tmp_path):
        other = tmp_path / "other.toml"
        other.write_text("# comment\n" + DUOPOLY.replace("1.0", "1"))
        _, a, _ = run(capsys, "solve", duopoly)
        _, b, _ = run(capsys, "solve", other)
        assert json.loads(a)["config_digest"] == json.loads(b)["config_digest"]

    @pytest.mark.parametrize("path", sorted(p.name for p in CONFIGS.glob("*.toml")
                                            if not p.name.startswith("sweep_")))
    def test_shipped_configs_solve(self, capsys, path):
        code, out, _ = run(capsys, "solve", CONFIGS / path)
        assert code == 0 and json.loads(out)["kkt"]["passed"]


class TestFigure:
    def test_fig_SW_N(self, capsys, tmp_path):
        code, out, _ = run(capsys, "figure", "fig_SW_N", "--out-dir", tmp_path, "--seed", "1")
        man = json.loads(out)
        assert code == 0
        assert set(man) == {"command_line", "config_digest", "seed", "tool_version",
                            "wall_time_s", "output_paths"}
        rows = list(csv.DictReader(open(tmp_path / "fig_SW_N.csv")))
        assert set(rows[0]) == {"W", "N", "sw_beta0", "sw_beta1"}
        assert sorted({r["W"] for r in rows}) == ["1", "2", "5"]

    def test_idempotent(self, capsys, tmp_path):
        run(capsys, "figure", "fig_T", "--out-dir", tmp_path)
        first = (tmp_path / "fig_T.csv").read_bytes()
        run(capsys, "figure", "fig_T", "--out-dir", tmp_path)
        assert (tmp_path / "fig_T.csv").read_bytes() == first

    def test_unknown_job(self, capsys, tmp_path):
        code, out, err = run(capsys, "figure", "fig_99", "--out-dir", tmp_path)
        assert code == 1 and out == ""
        assert "fig_SW_N" in err and "auction" in err

    def test_list(self, capsys):
        code, out, _ = run(capsys, "figure", "--list")
        assert code == 0 and "asym_W1" in json.loads(out)


class TestSweep:
    def test_missing_spec(self, capsys, tmp_path):
        code, _, err = run(capsys, "sweep", tmp_path / "missing.toml", "--out-dir", tmp_path)
        assert code == 1 and "not found" in err

    def test_shipped_spec(self, capsys, tmp_path):
        code, out, _ = run(capsys, "sweep", CONFIGS / "sweep_prices_quantities.toml",
                           "--out-dir", tmp_path)
        assert code == 0
        rows = list(csv.DictReader(open(tmp_path / "prices_quantities.csv")))
        assert len(rows) == 39
        flags = [(float(r["B_1"]), r["vacate_1"]) for r in rows]
        assert all((f == "1") == (b >= 28.0) for b, f in flags)
        man = json.loads((tmp_path / "prices_quantities.manifest.json").read_text())
        assert man["rows"] == 39 and json.loads(out)["output_paths"]

    def test_derived_spec(self, capsys, tmp_path):
        code, _, _ = run(capsys, "sweep", CONFIGS / "sweep_fixed_mean.toml", "--out-dir", tmp_path)
        assert code == 0
        assert (tmp_path / "fixed_mean.csv").read_text().startswith("alpha,cs,sw,avg_latency")

    def test_spec_without_sweep_table(self, capsys, duopoly, tmp_path):
        code, _, err = run(capsys, "sweep", duopoly, "--out-dir", tmp_path)
        assert code == 1 and "sweep" in err


class TestAuction:
    def test_csv(self, capsys):
        code, out, _ = run(capsys, "auction", "--alpha", "0.1,0.5,0.9")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and len(rows) == 3
        assert {"R_pre", "R_large", "R_small", "R_shared", "prefers_open_access"} <= set(rows[0])
        assert all(r["prefers_open_access"] == "1" for r in rows)

    def test_bad_alpha(self, capsys):
        code, _, err = run(capsys, "auction", "--alpha", "1.5")
        assert code == 1 and "availability out of range" in err


def test_module_entry_point(duopoly):
    proc = subprocess.run([sys.executable, "-m", "specshare", "solve", str(duopoly)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["x"] == pytest.approx([0.2, 0.2])
