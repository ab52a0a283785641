"""The offline path: proposals, gap merging, midpoint classification.

With the whole video available, per-frame detector labels become
gesture proposals. A brief detector dropout splits one gesture into two
proposals; merging bridges gaps smaller than four frames, and each
surviving proposal is classified once around its midpoint.
"""

from gesturekit import PipelineConfig, merge_proposals, run_offline
from gesturekit.backend import OracleScript, OracleSegment
from gesturekit.detector import Proposal
from gesturekit.scenario import Scenario, ScriptedGesture, frame_source, oracle_backends

# Two scripted spans 9 frames apart: the detector's 8-frame clips
# bridge most of the hole, leaving a 2-frame dip in per-frame labels.
gestures = (
    ScriptedGesture(30, 50, "Stop Sign"),
    ScriptedGesture(60, 90, "Stop Sign"),
)
scenario = Scenario(
    video_id="offline-demo",
    duration_frames=150,
    fps=30.0,
    gestures=gestures,
    detector_script=OracleScript(
        segments=tuple(OracleSegment(g.start_frame, g.end_frame, 0, 1.0) for g in gestures)
    ),
    classifier_script=OracleScript(
        segments=tuple(OracleSegment(g.start_frame, g.end_frame, 14, 0.95) for g in gestures),
        envelope_ramp=4,
    ),
    seed=0,
)

print("raw proposals around the dip, and what merging does to them:")
raw = [Proposal(30, 57), Proposal(60, 97)]
print("  before:", [(p.start_frame, p.end_frame) for p in raw])
print("  after: ", [(p.start_frame, p.end_frame) for p in merge_proposals(raw, threshold=4)])

config = PipelineConfig()
detector, classifier = oracle_backends(scenario, config.detector_depth, config.classifier_depth)
events = run_offline(config, frame_source(scenario), detector, classifier)
print("\noffline events (one per merged proposal):")
for event in events:
    print(f"  frame {event.trigger_frame}: {event.label} ({event.detection_kind})")
