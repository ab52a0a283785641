"""A full online run: scenario in, gesture events out.

Generates a 20-second scripted stream with four gestures, runs the
detect/classify state machine over it with oracle backends, and checks
the recognized sequence against the scenario's ground truth.
"""

from gesturekit import PipelineConfig, evaluate, latency_report, run
from gesturekit.scenario import frame_source, generate, ground_truth, oracle_backends

scenario = generate(gesture_count=4, duration_frames=600, seed=42)
truth = ground_truth(scenario)
print(f"scenario {scenario.video_id}: {scenario.duration_frames} frames @ {scenario.fps:.0f} fps")
for gesture in scenario.gestures:
    print(f"  frames {gesture.start_frame:>3}..{gesture.end_frame:<3}  {gesture.label}")

config = PipelineConfig()  # unanimous detector vote, 1 window, depth 16
detector, classifier = oracle_backends(scenario, config.detector_depth, config.classifier_depth)
summary = run(config, frame_source(scenario), detector, classifier)

print("\nevents:")
for event in summary.events:
    gesture = max(
        (g for g in scenario.gestures if g.start_frame <= event.trigger_frame),
        key=lambda g: g.start_frame,
    )
    lag = event.trigger_frame - gesture.end_frame
    print(
        f"  frame {event.trigger_frame:>3}  {event.label:<28} "
        f"{event.detection_kind:<5} margin {event.margin:.2f}  (lag vs gesture end: {lag:+d})"
    )

report = evaluate({scenario.video_id: summary.events}, [truth])
print(f"\nLevenshtein accuracy: {report.pooled_accuracy:.2f}%")
print()
print(latency_report(summary))
