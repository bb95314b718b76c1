import json

from click.testing import CliRunner

from carla_bridge.cli import main

from conftest import make_script, validate_dump


def run(*args):
    return CliRunner().invoke(main, list(args), catch_exceptions=False)


class TestCaptureCommand:
    def test_synthetic_capture_validates(self, tmp_path):
        dump = tmp_path / "dump"
        result = run("capture", str(dump), "--frames", "3", "--backend", "synthetic")
        assert result.exit_code == 0, result.output
        code, report = validate_dump(dump)
        assert code == 0 and report["frame_count"] == 3

    def test_zero_frames_rejected(self, tmp_path):
        result = run("capture", str(tmp_path / "d"), "--frames", "0",
                     "--backend", "synthetic")
        assert result.exit_code == 1

    def test_weather_file(self, tmp_path):
        weather = {"name": "light_rain", "sun_altitude_deg": 45.0,
                   "sun_azimuth_deg": 0.0, "cloudiness_pct": 60.0,
                   "precipitation_pct": 30.0, "precipitation_deposits_pct": 30.0}
        wpath = tmp_path / "w.json"
        wpath.write_text(json.dumps(weather))
        dump = tmp_path / "dump"
        result = run("capture", str(dump), "--frames", "2",
                     "--weather-file", str(wpath), "--backend", "synthetic")
        assert result.exit_code == 0
        meta = json.loads((dump / "frames" / "0" / "meta.json").read_text())
        assert meta["weather_tag"] == "light_rain"


class TestRunScenarioCommand:
    def test_script_executes(self, tmp_path):
        script = make_script(tmp_path / "s.json", "cut_in", seed=1)
        dump = tmp_path / "dump"
        result = run("run-scenario", str(script), str(dump), "--backend", "synthetic")
        assert result.exit_code == 0, result.output
        code, report = validate_dump(dump)
        assert code == 0 and report["ok"]
        assert json.loads(result.output)["scenario"].startswith("cut_in")

    def test_bad_script_exit_code(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{\"name\": \"x\"}")
        result = run("run-scenario", str(bad), str(tmp_path / "d"),
                     "--backend", "synthetic")
        assert result.exit_code == 1
