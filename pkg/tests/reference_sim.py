"""Straight-line reference simulation of the online state machine.

Computes detector labels and fused classifier outcomes directly from
the oracle formula at each frame index and walks the documented phase
rules, using no buffers, clips, queues or classifier code from the
package. Serves as the independent expectation for pipeline tests.
"""

import numpy as np

from gesturekit.backend import oracle_probabilities

COSINE_WEIGHTS = {
    1: [1.0],
    3: [0.3, 0.4, 0.3],
    5: [0.11 * np.cos(np.pi / 4 * x - np.pi / 2) + 0.15 for x in range(5)],
}


def simulate(scenario, config):
    """Returns [(trigger_frame, kind, class_index)] for a scenario run."""
    det_script = scenario.detector_script
    cls_script = scenario.classifier_script
    weights = COSINE_WEIGHTS[config.n_windows]
    events = []
    phase = "detecting"
    cooldown = 0
    rearm = False
    neg_streak = 0
    late_candidate = None
    det_history = []

    for t in range(scenario.duration_frames):
        if phase == "cooldown":
            cooldown -= 1
            if cooldown <= 0:
                phase = "detecting"
            continue

        decision = None
        if t >= config.detector_depth - 1:
            probs = oracle_probabilities(
                det_script, t - config.detector_depth + 1, config.detector_depth, 2
            )
            det_history.append(probs)
            if len(det_history) >= config.detector_queue:
                recent = det_history[-config.detector_queue :]
                if config.detector_mode == "mean":
                    mean = np.mean(recent, axis=0)
                    decision = bool(mean[0] > mean[1])
                else:
                    decision = all(p[0] > p[1] for p in recent)

        if phase == "detecting":
            if decision is True and not rearm:
                phase = "classifying"
                neg_streak = 0
            elif decision is False:
                rearm = False

        if phase == "classifying":
            if decision is False:
                neg_streak += 1
            elif decision is True:
                neg_streak = 0
            early = None
            span = config.classifier_depth + config.n_windows - 1
            if t - span + 1 >= 0:
                fused = np.zeros(27)
                for i in range(config.n_windows):
                    end = t - (config.n_windows - 1 - i)
                    start = end - config.classifier_depth + 1
                    fused += weights[i] * oracle_probabilities(
                        cls_script, start, config.classifier_depth, 27
                    )
                ordered = np.sort(fused)
                max1, max2 = ordered[-1], ordered[-2]
                if max1 - max2 >= config.tau_early:
                    early = int(np.argmax(fused))
                elif max1 >= config.tau_late:
                    if late_candidate is None or max1 > late_candidate[0]:
                        late_candidate = (max1, int(np.argmax(fused)))
            fired = None
            if early is not None:
                fired = ("early", early)
            elif neg_streak >= config.detector_queue:
                neg_streak = 0
                if late_candidate is not None:
                    fired = ("late", late_candidate[1])
                else:
                    phase = "detecting"
            if fired is not None:
                events.append((t, fired[0], fired[1]))
                det_history = []
                late_candidate = None
                rearm = True
                neg_streak = 0
                cooldown = config.cooldown_frames
                phase = "cooldown"

    return events
