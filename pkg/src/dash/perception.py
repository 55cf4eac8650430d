"""Stand-in vision: noisy, delayed, low-rate object estimates from ground truth.

Estimates carry bounded uniform noise (2 cm positions, 0.03 up-vectors),
arrive on a 20 Hz grid, and become readable only after a 50 ms latency.
Track association across snapshots uses a Kuhn-Munkres assignment over
attribute mismatch plus position distance.
"""

import bisect
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

DEFAULT_RATE_HZ = 20.0
DEFAULT_LATENCY_S = 0.050
POSITION_NOISE_M = 0.02
UP_NOISE = 0.03

# attribute mismatch dominates any in-table position distance
ATTRIBUTE_MISMATCH_COST = 100.0

WORKSPACE_CENTER = (0.075, 0.2, 0.0)


class EmptyStream(Exception):
    pass


@dataclass
class NoiseProfile:
    position_noise: float = POSITION_NOISE_M
    up_noise: float = UP_NOISE
    misclassification_prob: float = 0.0
    dropout_prob: float = 0.0

    @classmethod
    def exact(cls) -> "NoiseProfile":
        return cls(0.0, 0.0, 0.0, 0.0)


@dataclass
class PerceivedObject:
    track_id: str
    shape: str
    color: str
    position: tuple  # centroid, meters
    up_axis: tuple
    height: float
    timestamp: float = 0.0


_SHAPES = ("box", "cylinder", "sphere")
_COLORS = ("red", "yellow", "green", "blue")


def snapshot(scene, profile: NoiseProfile, rng: np.random.Generator,
             timestamp: float = 0.0):
    """Noisy per-object estimates of a ground-truth scene."""
    out = []
    for obj in scene.objects:
        if profile.dropout_prob > 0 and rng.random() < profile.dropout_prob:
            continue
        pos = np.asarray(obj.centroid, dtype=float)
        if profile.position_noise > 0:
            pos = pos + rng.uniform(-profile.position_noise,
                                    profile.position_noise, size=3)
        if obj.shape == "sphere":
            up = np.array([0.0, 0.0, 1.0])
        else:
            up = np.asarray(obj.up_axis, dtype=float).copy()
            if profile.up_noise > 0:
                up[:2] += rng.uniform(-profile.up_noise, profile.up_noise, size=2)
            up = up / np.linalg.norm(up)
        shape, color = obj.shape, obj.color
        if profile.misclassification_prob > 0:
            if rng.random() < profile.misclassification_prob:
                shape = _SHAPES[rng.integers(len(_SHAPES))]
            if rng.random() < profile.misclassification_prob:
                color = _COLORS[rng.integers(len(_COLORS))]
        out.append(PerceivedObject(
            track_id=obj.id, shape=shape, color=color,
            position=tuple(float(v) for v in pos),
            up_axis=tuple(float(v) for v in up),
            height=obj.height, timestamp=timestamp))
    return out


def grid_times(duration: float, rate: float = DEFAULT_RATE_HZ):
    """Snapshot times over an episode: 0, 1/rate, ... -> floor(duration*rate)+1 entries."""
    n = int(np.floor(duration * rate)) + 1
    return [i / rate for i in range(n)]


@dataclass
class ObservationStream:
    rate: float = DEFAULT_RATE_HZ
    latency: float = DEFAULT_LATENCY_S
    snapshots: list = field(default_factory=list)  # (timestamp, [PerceivedObject])
    _times: list = field(default_factory=list)

    def record(self, timestamp: float, objects) -> None:
        if self._times and timestamp <= self._times[-1]:
            raise ValueError("snapshots must be recorded in increasing time order")
        self._times.append(timestamp)
        self.snapshots.append((timestamp, list(objects)))

    def delayed_read(self, t: float):
        """Newest snapshot aged at least `latency`; before any snapshot has
        matured, fall back to the initial-planning snapshot."""
        if not self.snapshots:
            raise EmptyStream("no snapshot recorded")
        idx = bisect.bisect_right(self._times, t - self.latency) - 1
        if idx < 0:
            idx = 0  # initial-planning snapshot
        return self.snapshots[idx][1]

    def trace(self):
        """Exportable (timestamp, objects) list for replay."""
        return [(t, list(objs)) for t, objs in self.snapshots]


def _pair_cost(prev_obj: PerceivedObject, est) -> float:
    cost = float(np.linalg.norm(np.asarray(prev_obj.position) - np.asarray(est.position)))
    if prev_obj.shape != est.shape:
        cost += ATTRIBUTE_MISMATCH_COST
    if prev_obj.color != est.color:
        cost += ATTRIBUTE_MISMATCH_COST
    return cost


def association_cost_matrix(prev, estimates) -> np.ndarray:
    m = np.zeros((len(prev), len(estimates)))
    for i, p in enumerate(prev):
        for j, e in enumerate(estimates):
            m[i, j] = _pair_cost(p, e)
    return m


def associate(prev, estimates):
    """Assign estimates to existing tracks (Kuhn-Munkres, minimum cost).

    Returns a list of track ids parallel to `estimates`; estimates left
    unmatched get fresh ids.
    """
    if len(prev) > 16 or len(estimates) > 16:
        raise ValueError("association supports at most 16 objects per side")
    ids = [None] * len(estimates)
    if prev and estimates:
        cost = association_cost_matrix(prev, estimates)
        rows, cols = linear_sum_assignment(cost)
        for r, c in zip(rows, cols):
            ids[c] = prev[r].track_id
    used = {p.track_id for p in prev}
    counter = 0
    for j in range(len(ids)):
        if ids[j] is None:
            while f"t{counter}" in used:
                counter += 1
            ids[j] = f"t{counter}"
            used.add(f"t{counter}")
    return ids


def camera_target(phase: str, task=None, rng: np.random.Generator = None,
                  noise: float = POSITION_NOISE_M):
    """Gaze target: fixed workspace center while planning; the task
    destination (with bounded noise) while placing/stacking."""
    if phase == "plan":
        return np.array(WORKSPACE_CENTER)
    if phase != "place_stack":
        raise ValueError(f"unknown phase {phase!r}")
    dest = np.asarray(task.p_destination, dtype=float)
    target = np.array([dest[0], dest[1], 0.0])
    if noise > 0 and rng is not None:
        target[:2] += rng.uniform(-noise, noise, size=2)
    return target
