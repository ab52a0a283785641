"""Command-line front end: run, offline, simulate, eval, bench.

Exit codes: 0 success, 1 configuration/parse error, 2 backend error,
3 frame source error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import evaluation, scenario as scenario_mod
from .backend import DelayedBackend, OracleBackend
from .errors import (
    BackendTimeoutError,
    BackendUnavailableError,
    GestureKitError,
    ProtocolViolationError,
    RemoteBackendError,
    ShapeMismatchError,
    SourceError,
)
from .pipeline import PipelineConfig, latency_report, run, run_offline
from .remote import RemoteBackend
from .sources import frames_from_directory, frames_from_stdin, synthetic_frames

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_BACKEND = 2
EXIT_SOURCE = 3

BACKEND_ERRORS = (
    BackendUnavailableError,
    BackendTimeoutError,
    ProtocolViolationError,
    RemoteBackendError,
    ShapeMismatchError,
)


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load_config(path: str | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    return PipelineConfig.from_toml(path)


def _resolve_source(spec: str, fps: float):
    """Returns (frames, video_id, scenario_or_none) for a --source spec."""
    if spec == "stdin":
        return frames_from_stdin(sys.stdin.buffer, fps=fps), "stdin", None
    kind, _, arg = spec.partition(":")
    if kind == "scenario" and arg:
        sc = scenario_mod.load_toml(arg)
        return scenario_mod.frame_source(sc), sc.video_id, sc
    if kind == "frames" and arg:
        return frames_from_directory(arg, fps=fps), Path(arg).name, None
    raise ValueError(f"unsupported source spec {spec!r}")


def _resolve_backend(spec: str, role: str, scenario, config: PipelineConfig):
    """Build a backend for --detector/--classifier specs."""
    depth = config.detector_depth if role == "detector" else config.classifier_depth
    if spec == "oracle":
        if scenario is None:
            raise ValueError(f"--{role} oracle requires a scenario source")
        detector, classifier = scenario_mod.oracle_backends(
            scenario, detector_depth=config.detector_depth, classifier_depth=config.classifier_depth
        )
        return detector if role == "detector" else classifier
    kind, _, arg = spec.partition(":")
    if kind == "tcp" and arg:
        host, _, port = arg.rpartition(":")
        if not host or not port.isdigit():
            raise ValueError(f"--{role} tcp spec must be tcp:HOST:PORT, got {spec!r}")
        backend = RemoteBackend.from_tcp(host, int(port))
    elif kind == "stdio" and arg:
        backend = RemoteBackend.from_command(arg)
    else:
        raise ValueError(f"unsupported backend spec {spec!r}")
    info = backend.handshake()
    if info.clip_depth != depth:
        raise BackendUnavailableError(
            f"{role} backend serves clip depth {info.clip_depth}, config wants {depth}"
        )
    return backend


class _EventWriter:
    """Writes events as JSON lines, flushing after every event."""

    def __init__(self, path: str, video_id: str):
        self._fh = open(path, "w", encoding="utf-8")
        self.video_id = video_id
        self.count = 0

    def __call__(self, event) -> None:
        self._fh.write(json.dumps(event.to_json_dict(self.video_id)) + "\n")
        self._fh.flush()
        self.count += 1

    def close(self) -> None:
        self._fh.close()


def cmd_run(args) -> int:
    try:
        config = _load_config(args.config)
    except (OSError, ValueError, KeyError) as exc:
        return _fail(EXIT_CONFIG, f"bad config: {exc}")
    try:
        frames, video_id, sc = _resolve_source(args.source, config.fps_assumed)
    except (SourceError, OSError) as exc:
        return _fail(EXIT_SOURCE, f"bad source: {exc}")
    except ValueError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    if args.video_id:
        video_id = args.video_id
    try:
        detector = _resolve_backend(args.detector, "detector", sc, config)
        classifier = _resolve_backend(args.classifier, "classifier", sc, config)
    except BACKEND_ERRORS as exc:
        return _fail(EXIT_BACKEND, f"backend: {exc}")
    except ValueError as exc:
        return _fail(EXIT_CONFIG, str(exc))

    writer = _EventWriter(args.events, video_id) if args.events else None
    try:
        summary = run(config, frames, detector, classifier, event_sink=writer)
    except BACKEND_ERRORS as exc:
        return _fail(EXIT_BACKEND, f"backend: {exc}")
    finally:
        if writer is not None:
            writer.close()

    print(f"frames processed: {summary.frames_processed}")
    print(f"events: {len(summary.events)}")
    for event in summary.events:
        print(
            f"  frame {event.trigger_frame}: {event.label} "
            f"({event.detection_kind}, max1={event.max1:.3f}, margin={event.margin:.3f})"
        )
    print(latency_report(summary))
    if summary.truncated:
        print("run truncated by a source error", file=sys.stderr)
        return EXIT_SOURCE
    return EXIT_OK


def cmd_offline(args) -> int:
    try:
        config = _load_config(args.config)
    except (OSError, ValueError, KeyError) as exc:
        return _fail(EXIT_CONFIG, f"bad config: {exc}")
    try:
        frames, video_id, sc = _resolve_source(args.source, config.fps_assumed)
        frames = list(frames)
    except (SourceError, OSError) as exc:
        return _fail(EXIT_SOURCE, f"bad source: {exc}")
    except ValueError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    if args.video_id:
        video_id = args.video_id
    try:
        detector = _resolve_backend(args.detector, "detector", sc, config)
        classifier = _resolve_backend(args.classifier, "classifier", sc, config)
        events = run_offline(config, frames, detector, classifier)
    except BACKEND_ERRORS as exc:
        return _fail(EXIT_BACKEND, f"backend: {exc}")
    except ValueError as exc:
        return _fail(EXIT_CONFIG, str(exc))

    if args.events:
        with open(args.events, "w", encoding="utf-8") as fh:
            for event in events:
                fh.write(json.dumps(event.to_json_dict(video_id)) + "\n")
    print(f"events: {len(events)}")
    for event in events:
        print(f"  frame {event.trigger_frame}: {event.label} ({event.detection_kind})")
    return EXIT_OK


def cmd_simulate(args) -> int:
    out = Path(args.out)
    try:
        if args.count > 1:
            out.mkdir(parents=True, exist_ok=True)
            truths = []
            for seed in range(args.seed, args.seed + args.count):
                sc = scenario_mod.generate(
                    args.gestures,
                    duration_frames=args.duration,
                    fps=args.fps,
                    noise_sigma=args.noise,
                    seed=seed,
                )
                scenario_mod.save_toml(sc, out / f"{sc.video_id}.toml")
                truths.append(scenario_mod.ground_truth(sc))
            evaluation.write_truth_csv(truths, args.truth)
            print(f"wrote {args.count} scenarios to {out} and truth to {args.truth}")
        else:
            sc = scenario_mod.generate(
                args.gestures,
                duration_frames=args.duration,
                fps=args.fps,
                noise_sigma=args.noise,
                seed=args.seed,
            )
            scenario_mod.save_toml(sc, out)
            evaluation.write_truth_csv([scenario_mod.ground_truth(sc)], args.truth)
            print(f"wrote scenario to {out} and truth to {args.truth}")
    except GestureKitError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        events = evaluation.read_events_jsonl(args.events)
        truth = evaluation.read_truth_csv(args.truth)
        report = evaluation.evaluate(events, truth)
    except (OSError, ValueError, GestureKitError) as exc:
        return _fail(EXIT_CONFIG, str(exc))
    print(evaluation.format_report(report))
    if args.json:
        Path(args.json).write_text(
            json.dumps(report.to_json_dict(), indent=2) + "\n", encoding="utf-8"
        )
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        config = _load_config(args.config)
    except (OSError, ValueError, KeyError) as exc:
        return _fail(EXIT_CONFIG, f"bad config: {exc}")
    if args.frames == 0:
        print("no frames requested; nothing to measure")
        return EXIT_OK
    # Periodic scripted gestures so both stages record rounds.
    sc = _bench_scenario(args.frames, config)
    detector, classifier = scenario_mod.oracle_backends(
        sc, detector_depth=config.detector_depth, classifier_depth=config.classifier_depth
    )
    detector = DelayedBackend(detector, args.stub_latency_ms)
    classifier = DelayedBackend(classifier, args.stub_latency_ms)
    started = time.perf_counter()
    summary = run(config, scenario_mod.frame_source(sc), detector, classifier)
    elapsed = time.perf_counter() - started
    fps = summary.frames_processed / elapsed if elapsed > 0 else float("inf")
    print(latency_report(summary))
    print(f"frames: {summary.frames_processed}  wall: {elapsed:.2f} s  sustained: {fps:.1f} fps")
    return EXIT_OK


def _bench_scenario(frames: int, config: PipelineConfig):
    period = 90
    span = 36
    count = max(0, (frames - 60) // period)
    gestures = tuple(
        scenario_mod.ScriptedGesture(30 + i * period, 30 + i * period + span - 1, "Swiping Left")
        for i in range(count)
    )
    from .backend import OracleScript, OracleSegment, LabelSet

    jester = LabelSet.jester()
    detector_script = OracleScript(
        segments=tuple(OracleSegment(g.start_frame, g.end_frame, 0, 1.0) for g in gestures)
    )
    classifier_script = OracleScript(
        segments=tuple(
            OracleSegment(g.start_frame, g.end_frame, jester.labels.index(g.label), 0.95)
            for g in gestures
        ),
        envelope_ramp=4,
    )
    return scenario_mod.Scenario(
        video_id="bench",
        duration_frames=frames,
        fps=config.fps_assumed,
        gestures=gestures,
        detector_script=detector_script,
        classifier_script=classifier_script,
        seed=0,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gesturekit", description="Online hand-gesture recognition pipeline"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the online pipeline over a frame source")
    p_run.add_argument("--config", help="pipeline config TOML")
    p_run.add_argument("--source", required=True, help="scenario:FILE | frames:DIR | stdin")
    p_run.add_argument("--detector", default="oracle", help="oracle | tcp:HOST:PORT | stdio:CMD")
    p_run.add_argument("--classifier", default="oracle", help="oracle | tcp:HOST:PORT | stdio:CMD")
    p_run.add_argument("--events", help="write events as JSON lines to this path")
    p_run.add_argument("--video-id", help="override the video id used in event lines")
    p_run.set_defaults(func=cmd_run)

    p_off = sub.add_parser("offline", help="proposal-based recognition over a full video")
    p_off.add_argument("--config", help="pipeline config TOML")
    p_off.add_argument("--source", required=True, help="scenario:FILE | frames:DIR")
    p_off.add_argument("--detector", default="oracle")
    p_off.add_argument("--classifier", default="oracle")
    p_off.add_argument("--events", help="write events as JSON lines to this path")
    p_off.add_argument("--video-id")
    p_off.set_defaults(func=cmd_offline)

    p_sim = sub.add_parser("simulate", help="generate scenario file(s) plus ground truth")
    p_sim.add_argument("--gestures", type=int, default=4)
    p_sim.add_argument("--duration", type=int, default=600, help="duration in frames")
    p_sim.add_argument("--fps", type=float, default=30.0)
    p_sim.add_argument("--noise", type=float, default=0.0)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--count", type=int, default=1, help="generate this many scenarios")
    p_sim.add_argument("--out", required=True, help="scenario TOML path (or directory with --count)")
    p_sim.add_argument("--truth", required=True, help="ground-truth CSV path")
    p_sim.set_defaults(func=cmd_simulate)

    p_eval = sub.add_parser("eval", help="score an event file against ground truth")
    p_eval.add_argument("--events", required=True)
    p_eval.add_argument("--truth", required=True)
    p_eval.add_argument("--json", help="also write the report as JSON")
    p_eval.set_defaults(func=cmd_eval)

    p_bench = sub.add_parser("bench", help="measure stage durations with a stub latency")
    p_bench.add_argument("--config", help="pipeline config TOML")
    p_bench.add_argument("--stub-latency-ms", type=float, default=0.0)
    p_bench.add_argument("--frames", type=int, default=1000)
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
