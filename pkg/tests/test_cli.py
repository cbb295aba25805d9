"""Command-line interface: config resolution, validation, CSV output,
round-trips, and determinism of emitted files."""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from airmv.cli import main, parse_config


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def read_csv(path):
    metadata, header, rows = {}, None, []
    for line in path.read_text().splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            metadata[key] = value
        elif header is None:
            header = line
        else:
            rows.append(line.split(","))
    return metadata, header, rows


def strip_timestamp(text: str) -> str:
    return "\n".join(
        line for line in text.splitlines() if not line.startswith("# generated_at=")
    )


class TestParseConfig:
    def test_defaults_applied(self):
        spec, _ = parse_config(["pmepr"])
        assert spec.params["m"] == 8
        assert spec.seed == 0
        assert spec.out is None

    def test_flag_overrides_file(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"m": 8, "samples": 50}))
        spec, _ = parse_config(["pmepr", "--config", str(cfg), "--m", "4"])
        assert spec.params["m"] == 4
        assert spec.params["samples"] == 50

    def test_unknown_key_named(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"bogus": 1}))
        from airmv.cli import CliError

        with pytest.raises(CliError, match="bogus"):
            parse_config(["pmepr", "--config", str(cfg)])

    def test_type_mismatch_named(self):
        from airmv.cli import CliError

        with pytest.raises(CliError, match="trials"):
            parse_config(["cer", "--trials", "many"])

    def test_simplex_violation_named(self):
        from airmv.cli import CliError

        with pytest.raises(CliError, match="p"):
            parse_config(["pmepr", "--p", "0.5", "--z", "0.6"])

    def test_alpha_inf_accepted(self):
        spec, _ = parse_config(["gen", "--votes", "1,0,0", "--alpha", "inf"])
        assert math.isinf(spec.params["alpha"])

    def test_command_required(self):
        from airmv.cli import CliError

        with pytest.raises(CliError):
            parse_config([])


class TestPrintConfig:
    def test_round_trip(self, tmp_path, capsys):
        code, out, _ = run_cli(
            ["cer", "--m-list", "2,4", "--p-sweep", "0.2,0.8", "--seed", "9",
             "--print-config"],
            capsys,
        )
        assert code == 0
        cfg = tmp_path / "resolved.json"
        cfg.write_text(out)
        code, out2, _ = run_cli(["cer", "--config", str(cfg), "--print-config"], capsys)
        assert code == 0
        assert out == out2

    def test_seed_default_echoed(self, capsys):
        code, out, _ = run_cli(["lemma1", "--print-config"], capsys)
        assert code == 0
        assert json.loads(out)["seed"] == 0


class TestGen:
    def test_table_row_values(self, tmp_path, capsys):
        out = tmp_path / "seq.csv"
        code, _, err = run_cli(
            ["gen", "--votes", "1,1,0", "--perm", "3,2,1", "--out", str(out)], capsys
        )
        assert code == 0, err
        metadata, header, rows = read_csv(out)
        assert header == "index,re,im"
        values = [complex(float(r[1]), float(r[2])) for r in rows]
        np.testing.assert_allclose(values, [0, 0, 2, 0, 0, 2, 0, 0], atol=1e-12)
        assert float(metadata["squared_norm"]) == pytest.approx(8.0, rel=1e-12)
        assert float(metadata["pmepr_db"]) <= 3.02
        assert metadata["seed"] == "0"

    def test_stdout_default(self, capsys):
        code, out, _ = run_cli(["gen", "--votes", "1,0,0"], capsys)
        assert code == 0
        assert "index,re,im" in out

    def test_bad_votes_rejected(self, capsys):
        code, _, err = run_cli(["gen", "--votes", "1,2,0"], capsys)
        assert code == 2
        assert err.startswith("error: votes:")
        assert err.count("\n") == 1


class TestExperimentCommands:
    def test_cer_schema_and_determinism(self, tmp_path, capsys):
        args = [
            "cer", "--m-list", "2", "--p-sweep", "0.3,0.7", "--trials", "300",
            "--sensors", "10", "--channel", "flat", "--seed", "5",
        ]
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_cli(args + ["--out", str(out1)], capsys)[0] == 0
        assert run_cli(args + ["--out", str(out2), "--workers", "3"], capsys)[0] == 0
        assert strip_timestamp(out1.read_text()) == strip_timestamp(out2.read_text())
        _, header, rows = read_csv(out1)
        assert header == "experiment,channel,m,K,p,q,z,alpha,snr_db,trials,cer,ci_low,ci_high"
        assert len(rows) == 2
        assert rows[0][1] == "flat_rayleigh"

    def test_pmepr_runs(self, tmp_path, capsys):
        out = tmp_path / "p.csv"
        code, _, err = run_cli(
            ["pmepr", "--m", "4", "--samples", "200", "--out", str(out)], capsys
        )
        assert code == 0, err
        metadata, header, rows = read_csv(out)
        assert header == "pmepr_db,ccdf"
        assert len(rows) == 200
        assert float(metadata["max_pmepr_db"]) <= 3.02

    def test_lemma1_runs(self, tmp_path, capsys):
        out = tmp_path / "l.csv"
        code, _, _ = run_cli(
            ["lemma1", "--trials", "4000", "--m", "3", "--out", str(out)], capsys
        )
        assert code == 0
        metadata, header, rows = read_csv(out)
        assert metadata["passed"] == "true"
        assert [r[0] for r in rows] == ["m_plus", "m_minus"]

    def test_uav_runs_and_truncation_warns(self, tmp_path, capsys):
        out = tmp_path / "u.csv"
        code, _, err = run_cli(
            ["uav", "--strategy", "ideal_mv", "--sensor-var", "0", "--max-rounds", "5",
             "--waypoints", "1,0,0", "--out", str(out)],
            capsys,
        )
        assert code == 0
        assert "warning:" in err
        metadata, header, rows = read_csv(out)
        assert metadata["completed"] == "false"
        assert len(rows) == 5
        assert header.startswith("round,t_seconds,wp_index,pos_x")

    def test_uav_multi_waypoint_flag(self, capsys):
        code, out, _ = run_cli(
            ["uav", "--strategy", "ideal_mv", "--sensor-var", "0",
             "--waypoints", "0.4,0,0;0.4,0.4,0", "--eps", "0.05", "--out", "-"],
            capsys,
        )
        assert code == 0
        assert "completed=true" in out

    def test_unwritable_path_fails_cleanly(self, capsys):
        code, _, err = run_cli(
            ["gen", "--votes", "1,0,0", "--out", "/nonexistent-dir/x.csv"], capsys
        )
        assert code == 1
        assert err.startswith("error: out:")


def test_console_script_smoke():
    proc = subprocess.run(
        [sys.executable, "-m", "airmv.cli", "gen", "--votes", "1,0,0"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0
    assert "index,re,im" in proc.stdout
