"""Config validation and the command-line entry points."""

import json

import numpy as np
import pytest

from oncilla import config as config_mod
from oncilla.cli import main
from oncilla.errors import ConfigError


def write_config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


class TestConfig:
    def test_defaults(self):
        cfg = config_mod.from_dict({})
        assert cfg.gait.frequency_hz == 3.5
        assert cfg.gait.step_length_m == 0.12
        assert cfg.seed == 0

    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError, match="unknown top-level"):
            config_mod.from_dict({"gaits": {}})

    def test_unknown_section_key(self):
        with pytest.raises(ConfigError, match="unknown keys in section"):
            config_mod.from_dict({"gait": {"step_length": 0.1}})

    def test_json_error_carries_line(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{\n  "gait": {,}\n}\n')
        with pytest.raises(ConfigError, match=r":2:"):
            config_mod.load(str(path))

    def test_hash_stable(self):
        a = config_mod.config_hash(config_mod.from_dict({}))
        b = config_mod.config_hash(config_mod.from_dict({"seed": 0}))
        assert a == b

    def test_make_gait_applies_steering(self):
        cfg = config_mod.from_dict(
            {"steering": {"strategy": "asl", "varpi": 0.5}})
        gait = config_mod.make_gait(cfg)
        from oncilla.steering import LegId
        assert gait.legs[LegId.RF].step_length == 0.0


class TestCliGait:
    def test_gait_run_reports_kinematic_speed(self, tmp_path, capsys):
        code = main(["gait", "run", "--out", str(tmp_path)])
        assert code == 0
        metrics = (tmp_path / "gait_metrics.csv").read_text().splitlines()
        header = metrics[0].split(",")
        values = dict(zip(header, map(float, metrics[1].split(","))))
        # defaults: f = 3.5, L = 0.12 -> 0.84 m/s
        assert values["speed_avg_mps"] == pytest.approx(0.84, rel=0.02)
        assert (tmp_path / "gait_log.csv").exists()
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["subcommand"] == "gait run"
        assert "config_sha256" in manifest

    def test_gait_run_byte_reproducible(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["gait", "run", "--out", str(a), "--quiet"]) == 0
        assert main(["gait", "run", "--out", str(b), "--quiet"]) == 0
        assert (a / "gait_log.csv").read_bytes() == \
            (b / "gait_log.csv").read_bytes()
        assert (a / "gait_metrics.csv").read_bytes() == \
            (b / "gait_metrics.csv").read_bytes()

    def test_gait_metrics_from_log(self, tmp_path):
        assert main(["gait", "run", "--out", str(tmp_path), "--quiet"]) == 0
        out2 = tmp_path / "again"
        code = main(["gait", "metrics", "--log",
                     str(tmp_path / "gait_log.csv"), "--out", str(out2),
                     "--quiet"])
        assert code == 0
        assert (out2 / "gait_metrics.csv").exists()

    def test_invalid_config_exit_1(self, tmp_path):
        path = write_config(tmp_path, {"nonsense": 1})
        code = main(["gait", "run", "--config", path, "--out", str(tmp_path)])
        assert code == 1

    def test_env_out_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ONCILLA_OUT", str(tmp_path / "envout"))
        assert main(["gait", "run", "--quiet"]) == 0
        assert (tmp_path / "envout" / "gait_log.csv").exists()


class TestCliTurn:
    def test_zero_varpi_reports_insufficient_yaw(self, tmp_path, capsys):
        code = main(["turn", "--strategy", "asl", "--varpi", "0",
                     "--out", str(tmp_path), "--quiet"])
        assert code == 2
        assert "InsufficientYaw" in capsys.readouterr().err

    def test_asl_turn_writes_metrics(self, tmp_path):
        cfg = write_config(tmp_path, {"sim": {"duration_s": 6.0}})
        code = main(["turn", "--strategy", "asl", "--varpi", "1.0",
                     "--config", cfg, "--out", str(tmp_path), "--quiet"])
        assert code == 0
        text = (tmp_path / "turning_metrics.csv").read_text()
        assert text.splitlines()[0] == "radius_m,time_full_turn_s,speed_avg_mps"

    def test_aa_turn(self, tmp_path):
        cfg = write_config(tmp_path, {
            "sim": {"duration_s": 10.0},
            "gait": {"step_length_m": 0.0}})
        code = main(["turn", "--strategy", "aa_amp", "--yaw-rate", "0.7",
                     "--config", cfg, "--out", str(tmp_path), "--quiet"])
        assert code == 0


class TestCliCot:
    def test_sweep_columns(self, tmp_path):
        code = main(["cot", "sweep", "--out", str(tmp_path), "--quiet"])
        assert code == 0
        lines = (tmp_path / "cot_sweep.csv").read_text().splitlines()
        assert lines[0] == "speed_mps,power_W,cot_J_per_Nm"
        assert len(lines) == 6  # header + 5 speeds


class TestCliOptimize:
    def test_small_search(self, tmp_path):
        cfg = write_config(tmp_path, {
            "pso": {"particles": 4, "iterations": 3,
                    "bounds": {"step_length_m": [0.04, 0.12]}}})
        code = main(["optimize", "--config", cfg, "--out", str(tmp_path),
                     "--quiet", "--seed", "7"])
        assert code == 0
        lines = (tmp_path / "convergence.csv").read_text().splitlines()
        assert lines[0] == "iteration,best_score,mean_score"
        assert len(lines) == 4
        assert (tmp_path / "best_params.csv").exists()


class TestCliSbcp:
    def test_encode_decode_pipeline(self, tmp_path, capsys):
        code = main(["sbcp", "encode", "--class-id", "0x10", "--device-id",
                     "0x01", "--instruction", "0x01", "--out", str(tmp_path)])
        assert code == 0
        hex_out = capsys.readouterr().out.strip()
        assert hex_out == "FF10010201FB"

        code = main(["sbcp", "decode", hex_out, "--out", str(tmp_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "0x10" in out and "0x01" in out

    def test_decode_invalid_exit_1(self, tmp_path, capsys):
        code = main(["sbcp", "decode", "FF1001020100",
                     "--out", str(tmp_path)])
        assert code == 1

    def test_decode_bad_hex_exit_1(self, tmp_path, capsys):
        code = main(["sbcp", "decode", "FF1", "--out", str(tmp_path)])
        assert code == 1


class TestCliHelp:
    @pytest.mark.parametrize("argv", [
        ["--help"],
        ["gait", "--help"], ["gait", "run", "--help"],
        ["gait", "metrics", "--help"],
        ["turn", "--help"],
        ["cot", "--help"], ["cot", "sweep", "--help"],
        ["optimize", "--help"],
        ["sbcp", "--help"], ["sbcp", "encode", "--help"],
        ["sbcp", "decode", "--help"], ["sbcp", "demo", "--help"],
    ])
    def test_every_subcommand_has_help(self, argv, capsys):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == 0
        assert "usage" in capsys.readouterr().out.lower()

    def test_demo_trace(self, tmp_path):
        code = main(["sbcp", "demo", "--slaves", "4", "--seed", "3",
                     "--out", str(tmp_path), "--quiet"])
        assert code == 0
        lines = (tmp_path / "event_trace.csv").read_text().splitlines()
        assert lines[0] == "t_us,actor,event,bytes_hex"
        assert len(lines) > 8

    def test_demo_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["sbcp", "demo", "--slaves", "4", "--seed", "3",
                         "--out", str(out), "--quiet"]) == 0
        assert (a / "event_trace.csv").read_bytes() == \
            (b / "event_trace.csv").read_bytes()
