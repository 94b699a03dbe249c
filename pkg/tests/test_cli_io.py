import json

import pytest

from critnet.cli import main
from critnet.errors import ConfigError
from critnet.io import SCHEMAS, embedded_config, format_value, read_csv, render_csv, strip_timestamp, validate_csv
from critnet.propagation import Phase
from critnet.runconfig import DepthTraceConfig, G0Config, GridRange, parse_run_config
from critnet.settings import Settings


class TestFormatting:
    def test_values(self):
        assert format_value(0.1) == "0.10000000000000001"
        assert format_value(3) == "3"
        assert format_value(None) == ""
        assert format_value(True) == "true"
        assert format_value(float("inf")) == "inf"
        assert format_value(Phase.CHAOTIC_PREJUDICE) == "ChaoticPrejudice"

    def test_header(self):
        cfg = G0Config(gamma=1.0, seed=5)
        lines = render_csv("g0", cfg, [[0.0, 0.5, 1.0]]).splitlines()
        assert lines[0].startswith("# critnet ")
        assert lines[1] == "# schema: g0/1"
        assert lines[2] == "# seed: 5"
        assert lines[3].startswith("# timestamp: ")
        assert json.loads(lines[4].removeprefix("# config: "))["gamma"] == 1.0
        assert lines[5] == ",".join(SCHEMAS["g0"])
        assert lines[6] == "0,0.5,1"

    def test_unknown_schema(self):
        with pytest.raises(ConfigError):
            render_csv("nope", G0Config(gamma=1.0), [])

    def test_strip_timestamp(self):
        a = "# critnet x\n# timestamp: 1\nrow\n"
        b = "# critnet x\n# timestamp: 2\nrow\n"
        assert strip_timestamp(a) == strip_timestamp(b)


class TestRunConfig:
    def test_grid_range(self):
        assert GridRange.parse("0:1:3").values() == [0.0, 0.5, 1.0]
        assert GridRange.parse("2:2:1").values() == [2.0]
        with pytest.raises(ConfigError):
            GridRange.parse("1:0:3")
        with pytest.raises(ConfigError):
            GridRange.parse("1:2")

    def test_extra_keys_rejected(self):
        with pytest.raises(ConfigError):
            parse_run_config('{"command": "g0", "gamma": 1.0, "colour": "red"}')

    def test_unknown_activation_rejected(self):
        with pytest.raises(ConfigError):
            parse_run_config('{"command": "depth-trace", "activation": "sigmoid", "sigma_w2": 1, "sigma_b2": 0}')

    def test_discriminated_by_command(self):
        cfg = parse_run_config('{"command": "depth-trace", "sigma_w2": 2, "sigma_b2": 0}')
        assert isinstance(cfg, DepthTraceConfig)
        assert cfg.activation == "relu"


class TestSettings:
    def test_from_env(self, monkeypatch):
        monkeypatch.setenv("CRITNET_THREADS", "4")
        monkeypatch.setenv("CRITNET_QUAD_BACKEND", "hermite")
        s = Settings.from_env()
        assert s.threads == 4
        assert s.quad_backend == "hermite"

    def test_bad_env(self, monkeypatch):
        monkeypatch.setenv("CRITNET_THREADS", "zero")
        with pytest.raises(ConfigError, match="CRITNET_THREADS='zero'"):
            Settings.from_env()

    def test_unknown_backend(self, monkeypatch):
        monkeypatch.setenv("CRITNET_QUAD_BACKEND", "legendre")
        with pytest.raises(ConfigError, match="CRITNET_QUAD_BACKEND"):
            Settings.from_env()

    def test_port_belongs_to_server(self, monkeypatch):
        monkeypatch.setenv("PORT", "9000")
        assert "port" not in Settings.from_env().model_dump()


class TestCli:
    def test_depth_trace_roundtrip(self, tmp_path):
        out = tmp_path / "trace.csv"
        assert main(["depth-trace", "--activation", "relu", "--sigma-w2", "2", "--sigma-b2", "0",
                     "--depth", "10", "--out", str(out)]) == 0
        meta, columns, rows = read_csv(out)
        assert meta["schema"] == "depth-trace/1"
        assert tuple(columns) == SCHEMAS["depth-trace"]
        assert len(rows) == 11
        assert validate_csv(out) == []
        assert embedded_config(out).depth == 10
        assert main(["self-check", str(out), "--rerun"]) == 0

    def test_config_file_replays_run(self, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["g0", "--gamma", "4", "--draws", "2000", "--seed", "3", "--out", str(first)]) == 0
        assert main(["g0", "--config", str(first), "--out", str(second)]) == 0
        assert strip_timestamp(first.read_text()) == strip_timestamp(second.read_text())

    def test_phase_diagram(self, tmp_path):
        out = tmp_path / "phase.csv"
        assert main(["phase-diagram", "--activation", "relu", "--sw-range", "1:3:3", "--sb-range", "0:0.5:2",
                     "--threads", "2", "--out", str(out)]) == 0
        _, _, rows = read_csv(out)
        assert len(rows) == 6
        assert rows[1][2] == "TransientDeepPrejudice"

    def test_relu_eoc_singleton(self, tmp_path, capsys):
        out = tmp_path / "eoc.csv"
        assert main(["eoc", "--activation", "relu", "--out", str(out)]) == 0
        _, _, rows = read_csv(out)
        assert len(rows) == 1
        assert float(rows[0][1]) == pytest.approx(2.0)
        assert capsys.readouterr().err

    def test_mc_writes_report_and_companions(self, tmp_path):
        out = tmp_path / "mc.json"
        assert main(["mc", "--activation", "tanh", "--sigma-w2", "1.5", "--sigma-b2", "0.1", "--width", "32",
                     "--depth", "4", "--samples", "10", "--ensemble", "2", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["schema"] == "mc/1"
        assert doc["config"]["width"] == 32
        for suffix in ("layers", "g0", "grads"):
            companion = tmp_path / f"mc_{suffix}.csv"
            assert validate_csv(companion) == []
        assert main(["self-check", str(tmp_path / "mc_layers.csv"), "--rerun"]) == 0

    def test_self_check_flags_broken_file(self, tmp_path):
        out = tmp_path / "g.csv"
        assert main(["g0", "--gamma", "1", "--draws", "100", "--out", str(out)]) == 0
        out.write_text(out.read_text().replace("bin_lo,bin_hi,density", "lo,hi,density"))
        assert validate_csv(out)
        assert main(["self-check", str(out)]) == 2

    def test_usage_errors(self, tmp_path):
        assert main(["depth-trace", "--activation", "relu", "--sigma-b2", "0"]) == 2
        assert main(["g0", "--gamma", "-1"]) == 2
        with pytest.raises(SystemExit) as info:
            main(["phase-diagram", "--sw-range", "1:0:3", "--sb-range", "0:1:2"])
        assert info.value.code == 2
        with pytest.raises(SystemExit):
            main(["depth-trace", "--activation", "sigmoid"])

    def test_igb_coords_change_the_schema(self, tmp_path):
        out = tmp_path / "igb.csv"
        assert main(["depth-trace", "--activation", "tanh", "--sigma-w2", "1.5", "--sigma-b2", "0.05",
                     "--depth", "20", "--igb-coords", "--out", str(out)]) == 0
        meta, columns, rows = read_csv(out)
        assert meta["schema"] == "depth-trace-igb/1"
        assert tuple(columns) == ("layer", "sd2", "sc2", "gamma")
        assert len(rows) == 21
        assert validate_csv(out) == []

    def test_numeric_failure_exit_code(self, monkeypatch, capsys):
        def broken(cfg, threads):
            raise ValueError("f(a) and f(b) must have different signs")

        monkeypatch.setattr("critnet.cli.run", broken)
        assert main(["g0", "--gamma", "1", "--draws", "10"]) == 3
        assert "численная ошибка" in capsys.readouterr().err

    def test_stdout_without_out(self, capsys):
        assert main(["g0", "--gamma", "0", "--draws", "10", "--bins", "2"]) == 0
        assert "# schema: g0/1" in capsys.readouterr().out
