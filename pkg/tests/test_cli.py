import json
import subprocess
import sys

import pytest

from gesturekit import scenario as scenario_mod
from gesturekit.cli import main
from gesturekit.evaluation import read_events_jsonl, read_truth_csv

UNIFORM_SERVER = (
    "import sys, json, base64\n"
    "for line in sys.stdin:\n"
    "    req = json.loads(line)\n"
    "    if req['op'] == 'hello':\n"
    "        resp = {'op': 'hello', 'num_classes': 2, 'clip_depth': 8,\n"
    "                'input_size': 112, 'labels': ['gesture', 'no_gesture']}\n"
    "    else:\n"
    "        resp = {'op': 'infer', 'id': req['id'], 'probs': [0.5, 0.5]}\n"
    "    sys.stdout.write(json.dumps(resp) + '\\n')\n"
    "    sys.stdout.flush()\n"
)


@pytest.fixture
def scenario_file(tmp_path):
    scenario = scenario_mod.generate(4, duration_frames=600, seed=7)
    path = tmp_path / "scenario.toml"
    scenario_mod.save_toml(scenario, path)
    return path, scenario


class TestSimulate:
    def test_writes_scenario_and_truth(self, tmp_path):
        out = tmp_path / "sc.toml"
        truth = tmp_path / "truth.csv"
        code = main(
            [
                "simulate", "--gestures", "4", "--duration", "600",
                "--seed", "3", "--out", str(out), "--truth", str(truth),
            ]
        )
        assert code == 0
        scenario = scenario_mod.load_toml(out)
        sequences = read_truth_csv(truth)
        assert len(sequences) == 1
        assert sequences[0].labels == tuple(g.label for g in scenario.gestures)

    def test_batch_generation(self, tmp_path):
        out = tmp_path / "scenarios"
        truth = tmp_path / "truth.csv"
        code = main(
            [
                "simulate", "--gestures", "4", "--count", "5",
                "--seed", "10", "--out", str(out), "--truth", str(truth),
            ]
        )
        assert code == 0
        assert len(list(out.glob("*.toml"))) == 5
        assert len(read_truth_csv(truth)) == 5

    def test_infeasible_is_config_error(self, tmp_path):
        code = main(
            [
                "simulate", "--gestures", "10", "--duration", "100",
                "--out", str(tmp_path / "x.toml"), "--truth", str(tmp_path / "t.csv"),
            ]
        )
        assert code == 1


class TestRun:
    def test_oracle_run_matches_truth(self, tmp_path, scenario_file):
        path, scenario = scenario_file
        events_path = tmp_path / "events.jsonl"
        code = main(
            [
                "run", "--source", f"scenario:{path}",
                "--detector", "oracle", "--classifier", "oracle",
                "--events", str(events_path),
            ]
        )
        assert code == 0
        events = read_events_jsonl(events_path)
        assert events[scenario.video_id] == [g.label for g in scenario.gestures]

    def test_event_lines_shape(self, tmp_path, scenario_file):
        path, scenario = scenario_file
        events_path = tmp_path / "events.jsonl"
        assert main(["run", "--source", f"scenario:{path}", "--events", str(events_path)]) == 0
        for line in events_path.read_text().splitlines():
            record = json.loads(line)
            assert set(record) == {"video", "frame", "label", "kind", "max1", "margin"}
            assert record["kind"] in ("early", "late")

    def test_missing_config_is_exit_1(self, scenario_file, tmp_path):
        path, _ = scenario_file
        code = main(
            ["run", "--source", f"scenario:{path}", "--config", str(tmp_path / "none.toml")]
        )
        assert code == 1

    def test_unreachable_tcp_backend_is_exit_2(self, scenario_file):
        path, _ = scenario_file
        code = main(
            ["run", "--source", f"scenario:{path}", "--detector", "tcp:127.0.0.1:9"]
        )
        assert code == 2

    def test_missing_scenario_is_exit_3(self):
        assert main(["run", "--source", "scenario:/does/not/exist.toml"]) == 3

    def test_oracle_without_scenario_is_exit_1(self, tmp_path):
        video = tmp_path / "vid"
        video.mkdir()
        (video / "00001.jpg").write_bytes(b"")
        code = main(["run", "--source", f"frames:{video}", "--detector", "oracle"])
        assert code == 1

    def test_stdio_backend_handshake_depth_mismatch_is_exit_2(self, scenario_file):
        # The stub serves depth 8; asking it to act as the 16-frame
        # classifier must fail the handshake check.
        path, _ = scenario_file
        command = f'{sys.executable} -c "{UNIFORM_SERVER}"'
        code = main(
            [
                "run", "--source", f"scenario:{path}",
                "--detector", "oracle", "--classifier", f"stdio:{command}",
            ]
        )
        assert code == 2

    def test_stdio_detector_runs(self, tmp_path, scenario_file):
        # A uniform remote detector never votes gesture, so the run
        # finishes cleanly with zero events.
        path, _ = scenario_file
        command = f'{sys.executable} -c "{UNIFORM_SERVER}"'
        events_path = tmp_path / "events.jsonl"
        code = main(
            [
                "run", "--source", f"scenario:{path}",
                "--detector", f"stdio:{command}", "--classifier", "oracle",
                "--events", str(events_path),
            ]
        )
        assert code == 0
        assert events_path.read_text() == ""


class TestOffline:
    def test_offline_run(self, tmp_path, scenario_file):
        path, scenario = scenario_file
        events_path = tmp_path / "events.jsonl"
        code = main(
            [
                "offline", "--source", f"scenario:{path}",
                "--events", str(events_path),
            ]
        )
        assert code == 0
        events = read_events_jsonl(events_path)
        assert events[scenario.video_id] == [g.label for g in scenario.gestures]


class TestEval:
    def test_perfect_scores_100(self, tmp_path, scenario_file, capsys):
        path, scenario = scenario_file
        events_path = tmp_path / "events.jsonl"
        truth_path = tmp_path / "truth.csv"
        main(
            [
                "simulate", "--gestures", "4", "--seed", "7",
                "--out", str(tmp_path / "again.toml"), "--truth", str(truth_path),
            ]
        )
        main(["run", "--source", f"scenario:{path}", "--events", str(events_path)])
        code = main(["eval", "--events", str(events_path), "--truth", str(truth_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "100.00%" in out

    def test_empty_events_scores_0(self, tmp_path, capsys):
        truth_path = tmp_path / "truth.csv"
        truth_path.write_text("v1;a,b,c,d\n")
        events_path = tmp_path / "events.jsonl"
        events_path.write_text("")
        code = main(["eval", "--events", str(events_path), "--truth", str(truth_path)])
        assert code == 0
        assert "0.00%" in capsys.readouterr().out

    def test_json_report(self, tmp_path):
        truth_path = tmp_path / "truth.csv"
        truth_path.write_text("v1;a\n")
        events_path = tmp_path / "events.jsonl"
        events_path.write_text('{"video": "v1", "frame": 1, "label": "a", "kind": "early", "max1": 1, "margin": 1}\n')
        report_path = tmp_path / "report.json"
        code = main(
            [
                "eval", "--events", str(events_path), "--truth", str(truth_path),
                "--json", str(report_path),
            ]
        )
        assert code == 0
        report = json.loads(report_path.read_text())
        assert report["pooled_accuracy"] == 100.0

    def test_parse_error_is_exit_1(self, tmp_path):
        truth_path = tmp_path / "truth.csv"
        truth_path.write_text("no-labels-here\n")
        events_path = tmp_path / "events.jsonl"
        events_path.write_text("")
        assert main(["eval", "--events", str(events_path), "--truth", str(truth_path)]) == 1


class TestBench:
    def test_zero_frames(self, capsys):
        assert main(["bench", "--frames", "0"]) == 0
        assert "nothing to measure" in capsys.readouterr().out

    def test_small_bench_reports_stages(self, capsys):
        assert main(["bench", "--frames", "300", "--stub-latency-ms", "0"]) == 0
        out = capsys.readouterr().out
        assert "detection" in out
        assert "classification" in out
        assert "sustained" in out


class TestHelp:
    @pytest.mark.parametrize("command", ["run", "offline", "simulate", "eval", "bench"])
    def test_help_exits_zero(self, command):
        with pytest.raises(SystemExit) as excinfo:
            main([command, "--help"])
        assert excinfo.value.code == 0

    def test_entrypoint_subprocess(self):
        result = subprocess.run(
            [sys.executable, "-m", "gesturekit.cli", "--help"],
            capture_output=True, text=True,
        )
        assert result.returncode == 0
        assert "gesturekit" in result.stdout
