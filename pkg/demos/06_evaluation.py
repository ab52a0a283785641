"""Levenshtein accuracy: what the sequence metric rewards and punishes.

The metric compares the predicted label sequence against the ground
truth per video: missed gestures cost deletions, wrong labels cost
substitutions, and spurious repeats cost insertions. Accuracy is
(1 - distance/targets) * 100 and is deliberately unclamped, so runs
that spam recognitions go negative instead of hiding at zero.
"""

from gesturekit import LabelSequence, evaluate, format_report, levenshtein_distance

target = ["Swiping Left", "Thumb Up", "Stop Sign", "Drumming Fingers"]

cases = {
    "perfect": list(target),
    "one substitution": ["Swiping Left", "Thumb Down", "Stop Sign", "Drumming Fingers"],
    "one miss": ["Swiping Left", "Stop Sign", "Drumming Fingers"],
    "double-fired twice": [
        "Swiping Left", "Swiping Left", "Thumb Up", "Thumb Up",
        "Stop Sign", "Drumming Fingers",
    ],
    "recognizer gone rogue": ["Shaking Hand"] * 9,
}

print(f"{'prediction':<24} {'LD':>3}  accuracy")
for name, prediction in cases.items():
    distance = levenshtein_distance(target, prediction)
    accuracy = (1 - distance / len(target)) * 100
    print(f"{name:<24} {distance:>3}  {accuracy:>7.1f}%")

truth = [
    LabelSequence("video-a", tuple(target)),
    LabelSequence("video-b", tuple(target)),
]
events = {
    "video-a": list(target),               # perfect
    "video-b": cases["double-fired twice"],  # noisy
}
print()
print(format_report(evaluate(events, truth)))
