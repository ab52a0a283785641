"""Window fusion weights and the early/late decision thresholds.

Multiple overlapping classifier windows vote with center-peaked
weights: [1.0], [0.3, 0.4, 0.3], or a five-point cosine curve. The
fused scores then face two thresholds: a top-2 margin of 0.6 fires an
early detection (answer before the gesture ends); failing that, a top
score of 0.2 marks a late candidate, the recall fallback.
"""

import numpy as np

from gesturekit import JESTER_LABELS, ProbabilityVector, classify, fusion_weights

for n in (1, 3, 5):
    weights = fusion_weights(n)
    rendered = ", ".join(f"{w:.8f}" for w in weights.weights)
    print(f"{n} window(s): [{rendered}]  (sum {sum(weights.weights):.7f})")

print()
for w in fusion_weights(5).weights:
    print("#" * int(round(w * 100)), f" {w:.5f}")

labels = list(JESTER_LABELS)


def show(name, values):
    probs = ProbabilityVector(values=np.asarray(values), label_set_id="jester")
    outcome = classify([probs], fusion_weights(1), labels)
    print(
        f"{name:<24} -> {outcome.kind:<6} "
        f"(max1 {outcome.max1:.3f}, margin {outcome.margin:.3f}, label {outcome.label})"
    )


print()
confident = [0.8] + [0.2 / 26] * 26
ambiguous = [0.3, 0.25] + [0.45 / 25] * 25
flat = [1 / 27] * 27
show("confident one-hot-ish", confident)
show("ambiguous top-2", ambiguous)
show("uniform", flat)
