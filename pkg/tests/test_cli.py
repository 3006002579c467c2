import json
import math

import pytest

from entroprec.cli import main, parse_config


class TestParseConfig:
    def test_preset_defaults(self):
        cfg = parse_config(["simulate", "--preset", "fig3"])
        assert cfg.ion.phi == pytest.approx(math.pi / 7)
        assert cfg.ion.dynamics == "unitary"
        assert cfg.ion.n_moments == 10
        assert cfg.method == "pinv"

    def test_flag_overrides_preset(self):
        cfg = parse_config(["simulate", "--preset", "fig4", "--gamma", "0.5"])
        assert cfg.ion.gamma == 0.5
        assert cfg.ion.phi == pytest.approx(5 * math.pi / 6)  # untouched

    def test_file_between_preset_and_flags(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"gamma": 0.7, "N": 12}))
        cfg = parse_config(
            ["simulate", "--preset", "fig4", "--config", str(path), "--gamma", "0.9"]
        )
        assert cfg.ion.gamma == 0.9  # flag wins
        assert cfg.ion.n_moments == 12  # file wins over preset default

    def test_unknown_file_key_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"gama": 0.7}))
        with pytest.raises(ValueError, match="gama"):
            parse_config(["simulate", "--config", str(path)])

    def test_range_validation_names_key(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"N": 0}))
        with pytest.raises(ValueError, match="'N'"):
            parse_config(["simulate", "--config", str(path)])
        path.write_text(json.dumps({"gamma": -0.1}))
        with pytest.raises(ValueError, match="'gamma'"):
            parse_config(["simulate", "--config", str(path)])
        path.write_text(json.dumps({"tau": 0.0}))
        with pytest.raises(ValueError, match="'tau'"):
            parse_config(["simulate", "--config", str(path)])

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("{not json")
        with pytest.raises(ValueError, match="cannot read"):
            parse_config(["simulate", "--config", str(path)])


class TestVerifyCommand:
    def test_fig3_passes(self, tmp_path, capsys):
        code = main(["verify", "--preset", "fig3", "--out", str(tmp_path)])
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        header = json.loads(lines[0])
        assert header["effective_config"]["preset"] == "fig3"
        checks = json.loads(lines[-1])
        assert checks["pass"] is True
        assert checks["conditional_equality"]["deviation"] <= 1e-10
        report = json.loads((tmp_path / "verify.json").read_text())
        assert report["checks"]["crooks"]["pass"] is True

    def test_fig4_passes(self, tmp_path):
        assert main(["verify", "--preset", "fig4", "--out", str(tmp_path)]) == 0


class TestSweepCommand:
    def test_gamma_csv_schema(self, tmp_path):
        code = main(
            [
                "sweep",
                "--axis",
                "gamma",
                "--preset",
                "fig5",
                "--format",
                "csv",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        lines = (tmp_path / "sweep.csv").read_text().strip().splitlines()
        assert len(lines) == 26  # header + 25 points
        header = lines[0].split(",")
        assert header[0] == "gamma"
        assert header[1:5] == ["m1_A", "m2_A", "m3_A", "m4_A"]
        assert header[-6:] == ["rmse_moments", "rmse_probs", "gap_m1", "gap_m2", "gap_m3", "gap_m4"]


class TestSimulateCommand:
    def test_fig4_distribution_dump(self, tmp_path):
        code = main(
            [
                "simulate",
                "--preset",
                "fig4",
                "--format",
                "csv",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        lines = (tmp_path / "simulate_distributions.csv").read_text().strip().splitlines()
        assert lines[0] == "label,sigma,prob"
        ab_rows = [line for line in lines[1:] if line.startswith("A-B,")]
        assert 0 < len(ab_rows) <= 16

    def test_json_round_trip(self, tmp_path):
        assert main(["simulate", "--preset", "fig3", "--out", str(tmp_path)]) == 0
        text = (tmp_path / "simulate.json").read_text()
        report = json.loads(text)
        assert json.loads(json.dumps(report)) == report
        total = sum(entry["prob"] for entry in report["distributions"]["A-B"])
        assert total == pytest.approx(1.0, abs=1e-10)
        assert report["checks"]["pass"] is True

    def test_reconstruct_command(self, tmp_path):
        assert main(["reconstruct", "--preset", "fig3", "--N", "8", "--out", str(tmp_path)]) == 0
        report = json.loads((tmp_path / "reconstruct.json").read_text())
        assert report["config"]["N"] == 8
        assert report["reconstruction"]["method"] == "pinv"
        assert len(report["reconstruction"]["per_label"]["A"]["nodes"]) == 8

    def test_fourier_method(self, tmp_path):
        assert (
            main(
                [
                    "reconstruct",
                    "--preset",
                    "fig3",
                    "--method",
                    "fourier",
                    "--out",
                    str(tmp_path),
                ]
            )
            == 0
        )
        report = json.loads((tmp_path / "reconstruct.json").read_text())
        assert report["reconstruction"]["method"] == "fourier"

    def test_unwritable_output_path(self, tmp_path, capsys):
        blocker = tmp_path / "blocker"
        blocker.write_text("not a directory")
        code = main(["simulate", "--preset", "fig3", "--out", str(blocker / "sub")])
        assert code == 2
        assert "error" in capsys.readouterr().err
