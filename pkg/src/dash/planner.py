"""Arm motion planning: bidirectional RRT in the 7-dof arm space, random
shortcutting, terminal-segment reshaping, and humanlike quadratic retiming.

Planning collision checks freeze the finger pose, so hand geometry is cached
in the palm frame and only the 7-joint arm chain is evaluated per check.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import body as B
from . import geometry as G
from .transforms import make_transform

RRT_STEP = 0.15  # rad, joint-space extension step
GOAL_BIAS = 0.1
MAX_NODES = 20000
EDGE_RESOLUTION = 0.05  # rad, max joint-space spacing between edge checks
SHORTCUT_ITERS = 120
# edge resolutions for successive plan attempts after exact-validation
# failures (None means the checker's default)
PLAN_VALIDATE_RESOLUTIONS = (None, 0.01, 0.004)

PEAK_SPEED = 0.8  # m/s, default palm peak speed
PEAK_SPEED_CAP = 1.5
TERMINAL_SPEED = 0.4  # m/s carried into the grasp
RESHAPE_FRACTION = 0.10  # trailing share of palm arc length rebuilt


class PlanTimeout(Exception):
    def __init__(self, nodes: int):
        self.nodes = nodes
        super().__init__(f"no path after {nodes} tree nodes")


class DegeneratePath(Exception):
    pass


class ZeroLengthPath(Exception):
    pass


class PlanningChecker:
    """Collision oracle for a fixed finger pose and optional held object.

    The hand (palm, 15 phalanges, held object) is reduced to one conservative
    box in the palm frame; obstacles are the scene objects plus the tabletop.
    """

    def __init__(self, model, scene, finger_pose=None, in_hand=None,
                 in_hand_transform=None, margin: float = 0.0, exclude_ids=(),
                 include_table: bool = True):
        self.model = model
        self.margin = margin
        q = model.rest_pose.copy()
        if finger_pose is not None:
            q[B.ARM_DOFS:] = finger_pose
        self._finger_pose = q[B.ARM_DOFS:].copy()
        res = B.fk(model, q, with_links=True)
        palm_inv = np.linalg.inv(res.palm)
        hand = [(prim, palm_inv @ T)
                for name, (prim, T) in res.link_poses.items()
                if name in B._HAND_LINKS]
        if in_hand is not None:
            # in_hand_transform maps the palm to the held object's base
            # frame; its primitive is centered half a height above that
            prim, _ = B.scene_object_primitive(in_hand)
            lift = make_transform(p=(0.0, 0.0, in_hand.height / 2.0))
            hand.append((prim, in_hand_transform @ lift))
        self.hand_box, self.hand_box_local = G.bounding_box(hand)

        # arm capsules expressed in their joint frames
        self.arm_links = [
            (lg.joint, lg.primitive(), lg.local_transform())
            for lg in model.links if lg.name in ("upper_arm", "forearm")
        ]
        skip = set(exclude_ids)
        if in_hand is not None:
            skip.add(in_hand.id)
        self.obstacles = [
            B.scene_object_primitive(o) for o in scene.objects if o.id not in skip
        ]
        if include_table:
            self.obstacles.append(B.table_primitive(scene))

    def is_free(self, q_arm) -> bool:
        frames, palm = B._arm_frames(self.model, np.asarray(q_arm, dtype=float))
        parts = [(prim, frames[ji] @ local) for ji, prim, local in self.arm_links]
        parts.append((self.hand_box, palm @ self.hand_box_local))
        for prim, T in parts:
            for oprim, oT in self.obstacles:
                if G.distance(prim, T, oprim, oT) <= self.margin:
                    return False
        return True

    def edge_free(self, qa, qb, resolution: float = EDGE_RESOLUTION) -> bool:
        qa = np.asarray(qa, dtype=float)
        qb = np.asarray(qb, dtype=float)
        n = max(1, int(math.ceil(np.max(np.abs(qb - qa)) / resolution)))
        for k in range(1, n + 1):
            if not self.is_free(qa + (qb - qa) * (k / n)):
                return False
        return True


class _FineChecker:
    """Checker view whose edge tests use a finer joint-space discretization.

    Used on replan attempts after an exactly-validated trajectory failed:
    point checks are unchanged, only the gap between edge samples shrinks.
    """

    def __init__(self, inner: PlanningChecker, resolution: float):
        self._inner = inner
        self._resolution = resolution
        self.model = inner.model

    def is_free(self, q_arm) -> bool:
        return self._inner.is_free(q_arm)

    def edge_free(self, qa, qb) -> bool:
        return self._inner.edge_free(qa, qb, resolution=self._resolution)


def _nearest(nodes, q):
    arr = np.asarray(nodes)
    d = np.linalg.norm(arr - q, axis=1)
    return int(np.argmin(d))


def _steer(q_from, q_to, step=RRT_STEP):
    d = np.linalg.norm(q_to - q_from)
    if d <= step:
        return q_to.copy()
    return q_from + (q_to - q_from) * (step / d)


def birrt(checker: PlanningChecker, q_start, q_goal, rng,
          step: float = RRT_STEP, goal_bias: float = GOAL_BIAS,
          max_nodes: int = MAX_NODES):
    """Bidirectional RRT between two free arm configurations.

    Returns a waypoint list from start to goal. Raises PlanTimeout once the
    combined trees exceed max_nodes without connecting.
    """
    q_start = np.asarray(q_start, dtype=float)
    q_goal = np.asarray(q_goal, dtype=float)
    if not checker.is_free(q_start):
        raise PlanTimeout(0)
    if not checker.is_free(q_goal):
        raise PlanTimeout(0)
    if checker.edge_free(q_start, q_goal):
        return [q_start.copy(), q_goal.copy()]

    model = checker.model
    lo = np.maximum([j.limits[0] for j in model.joints[:B.ARM_DOFS]], -math.pi)
    hi = np.minimum([j.limits[1] for j in model.joints[:B.ARM_DOFS]], math.pi)

    trees = (
        {"nodes": [q_start.copy()], "parent": [-1]},
        {"nodes": [q_goal.copy()], "parent": [-1]},
    )

    def grow(tree, target):
        """Extend tree one step toward target; return new index or None."""
        i = _nearest(tree["nodes"], target)
        q_new = _steer(tree["nodes"][i], target, step)
        if checker.edge_free(tree["nodes"][i], q_new):
            tree["nodes"].append(q_new)
            tree["parent"].append(i)
            return len(tree["nodes"]) - 1
        return None

    a, b = 0, 1
    while len(trees[0]["nodes"]) + len(trees[1]["nodes"]) < max_nodes:
        if rng.uniform() < goal_bias:
            sample = trees[b]["nodes"][_nearest(trees[b]["nodes"],
                                                trees[a]["nodes"][-1])].copy()
        else:
            sample = rng.uniform(lo, hi)
        new_i = grow(trees[a], sample)
        if new_i is not None:
            # greedily connect the other tree toward the fresh node
            target = trees[a]["nodes"][new_i]
            while len(trees[0]["nodes"]) + len(trees[1]["nodes"]) < max_nodes:
                conn_i = grow(trees[b], target)
                if conn_i is None:
                    break
                if np.linalg.norm(trees[b]["nodes"][conn_i] - target) < 1e-9:
                    path_a = _trace(trees[a], new_i)
                    path_b = _trace(trees[b], conn_i)
                    if a == 0:
                        return path_a[::-1] + path_b[1:]
                    return path_b[::-1] + path_a[1:]
        a, b = b, a
    raise PlanTimeout(len(trees[0]["nodes"]) + len(trees[1]["nodes"]))


def _trace(tree, i):
    out = []
    while i >= 0:
        out.append(tree["nodes"][i])
        i = tree["parent"][i]
    return out


def path_length(path) -> float:
    return float(sum(np.linalg.norm(np.asarray(b) - np.asarray(a))
                     for a, b in zip(path, path[1:])))


def shortcut_smooth(checker: PlanningChecker, path, rng,
                    iterations: int = SHORTCUT_ITERS):
    """Random-pair shortcutting; joint-space length never increases."""
    path = [np.asarray(q, dtype=float).copy() for q in path]
    for _ in range(iterations):
        if len(path) < 3:
            break
        i, j = sorted(rng.choice(len(path), size=2, replace=False))
        if j - i < 2:
            continue
        if checker.edge_free(path[i], path[j]):
            path = path[: i + 1] + path[j:]
    return path


# --- terminal reshaping ------------------------------------------------------

def _palm_points(model, path):
    return [B._arm_frames(model, q)[1][:3, 3] for q in path]


def _cumulative_arc(points):
    d = [0.0]
    for a, b in zip(points, points[1:]):
        d.append(d[-1] + float(np.linalg.norm(b - a)))
    return d


def _hermite(x0, x1, t0, t1, u):
    u2, u3 = u * u, u * u * u
    return ((2 * u3 - 3 * u2 + 1) * x0 + (u3 - 2 * u2 + u) * t0
            + (-2 * u3 + 3 * u2) * x1 + (u3 - u2) * t1)


def reshape_terminal(model, path, object_position, samples: int = 8,
                     fraction: float = RESHAPE_FRACTION):
    """Rebuild the trailing `fraction` of the palm arc as a cubic Hermite
    whose end tangent points at the object, so the hand arrives already
    moving toward it. Joint waypoints along the new curve come from IK
    seeded with their predecessors; the original goal pose is kept."""
    path = [np.asarray(q, dtype=float) for q in path]
    if len(path) < 2:
        raise DegeneratePath("need at least two waypoints")
    pts = _palm_points(model, path)
    arc = _cumulative_arc(pts)
    L = arc[-1]
    if L < 1e-9:
        raise DegeneratePath("zero palm arc length")
    p_obj = np.asarray(object_position, dtype=float)
    x1 = pts[-1]
    aim = p_obj - x1
    if np.linalg.norm(aim) < 1e-9:
        raise DegeneratePath("object coincides with final palm position")

    s_split = (1.0 - fraction) * L
    k = max(0, np.searchsorted(arc, s_split, side="right") - 1)
    k = min(k, len(path) - 2)
    seg = arc[k + 1] - arc[k]
    u = 0.0 if seg < 1e-12 else (s_split - arc[k]) / seg
    q_split = path[k] + u * (path[k + 1] - path[k])
    x0 = pts[k] + u * (pts[k + 1] - pts[k])

    ell = max(L - s_split, 1e-6)
    inbound = x0 - (pts[k - 1] if k > 0 else pts[0])
    if np.linalg.norm(inbound) < 1e-9:
        inbound = x1 - x0
    if np.linalg.norm(inbound) < 1e-9:
        inbound = aim
    t0 = inbound / np.linalg.norm(inbound) * ell
    t1 = aim / np.linalg.norm(aim) * ell

    _, palm_split = B._arm_frames(model, q_split)
    _, palm_goal = B._arm_frames(model, path[-1])
    from scipy.spatial.transform import Rotation, Slerp
    slerp = Slerp([0.0, 1.0], Rotation.from_matrix(
        [palm_split[:3, :3], palm_goal[:3, :3]]))

    tail = []
    q_prev = q_split
    for j in range(1, samples):
        uu = j / samples
        x = _hermite(x0, x1, t0, t1, uu)
        T = make_transform(slerp(uu).as_matrix(), x)
        try:
            # no restarts: the tail must stay on the incoming arm branch, so
            # an unreachable sample is skipped rather than branch-switched
            q_prev = B.ik_solve(model, T, q_prev, restarts=0)
        except B.IkDiverged:
            continue
        tail.append(q_prev)
    return path[: k + 1] + [q_split] + tail + [path[-1]]


# --- retiming ----------------------------------------------------------------

@dataclass
class Trajectory:
    """Arm trajectory: piecewise-linear joint waypoints on a shared clock."""
    times: np.ndarray  # strictly increasing, starts at 0
    configs: np.ndarray  # len(times) x 7
    arc_length: float
    peak_speed: float
    terminal_speed: float

    @property
    def duration(self) -> float:
        return float(self.times[-1])

    def sample(self, t: float) -> np.ndarray:
        t = min(max(t, 0.0), self.duration)
        i = int(np.searchsorted(self.times, t, side="right") - 1)
        i = min(i, len(self.times) - 2)
        dt = self.times[i + 1] - self.times[i]
        u = 0.0 if dt <= 0 else (t - self.times[i]) / dt
        return self.configs[i] + u * (self.configs[i + 1] - self.configs[i])


def speed_profile(tau, v_peak: float, v_terminal: float):
    """Palm speed v(tau) on normalized time: a downward parabola with
    v(0) = 0 and v(1) = v_terminal; the peak sits at tau* = 1/(1+rho),
    rho = sqrt(1 - v_terminal / v_peak)."""
    rho = math.sqrt(1.0 - v_terminal / v_peak)
    tau_star = 1.0 / (1.0 + rho)
    alpha = v_peak / (tau_star * tau_star)
    return -alpha * (np.asarray(tau) - tau_star) ** 2 + v_peak


def _profile_integral(tau, v_peak: float, v_terminal: float):
    """Closed-form integral of speed_profile from 0 to tau."""
    rho = math.sqrt(1.0 - v_terminal / v_peak)
    tau_star = 1.0 / (1.0 + rho)
    alpha = v_peak / (tau_star * tau_star)
    tau = np.asarray(tau, dtype=float)
    return v_peak * tau - alpha * ((tau - tau_star) ** 3 + tau_star ** 3) / 3.0


RETIME_RESOLUTION = 0.005  # m of palm travel between retiming knots
RETIME_JOINT_RESOLUTION = 0.02  # rad; bounds palm wiggle between knots


def _densify_by_palm(model, path, pts, resolution: float = RETIME_RESOLUTION,
                     joint_resolution: float = RETIME_JOINT_RESOLUTION):
    """Insert joint-interpolated waypoints until consecutive knots are close
    in both palm space and joint space, so the polyline arc parameterization
    tracks the true palm curve between sparse (shortcut) waypoints — even
    across segments that barely move the palm but swing the elbow."""
    out = [path[0]]
    for a, b, pa, pb in zip(path, path[1:], pts, pts[1:]):
        n = max(1,
                int(math.ceil(np.linalg.norm(pb - pa) / resolution)),
                int(math.ceil(np.max(np.abs(b - a)) / joint_resolution)))
        for j in range(1, n + 1):
            out.append(a + (b - a) * (j / n))
    return out


def retime(model, path, v_peak: float = PEAK_SPEED,
           v_terminal: float = 0.0, samples_per_second: int = 240) -> Trajectory:
    """Map a geometric path to a clock so the palm follows the quadratic
    humanlike speed profile, ending at v_terminal."""
    v_peak = min(v_peak, PEAK_SPEED_CAP)
    if not 0.0 <= v_terminal < v_peak:
        raise ValueError("need 0 <= v_terminal < v_peak")
    path = [np.asarray(q, dtype=float) for q in path]
    path = _densify_by_palm(model, path, _palm_points(model, path))
    pts = _palm_points(model, path)
    arc = np.asarray(_cumulative_arc(pts))
    L = float(arc[-1])
    if L < 1e-9:
        raise ZeroLengthPath(f"palm arc length {L:.2e} m")

    total = float(_profile_integral(1.0, v_peak, v_terminal))
    T = L / total
    n = max(8, int(math.ceil(T * samples_per_second)))
    tau = np.linspace(0.0, 1.0, n + 1)
    s = _profile_integral(tau, v_peak, v_terminal) * T  # arc length at each tau
    s = np.clip(s, 0.0, L)

    # every waypoint is emitted at its exact profile time so the piecewise
    # linear trajectory passes through the full geometric path instead of
    # cutting joint-space corners between clock samples
    tau_knots = np.interp(arc, s, tau)
    events = [(float(t), None, float(sm)) for t, sm in zip(tau, s)]
    events += [(float(t), k, float(arc[k])) for k, t in enumerate(tau_knots)]
    events.sort(key=lambda e: e[0])

    times, configs = [], []
    for t, k, sm in events:
        if times and t * T - times[-1] < 1e-9:
            continue
        if k is not None:
            q = path[k]
        else:
            i = int(np.searchsorted(arc, sm, side="right") - 1)
            i = min(max(i, 0), len(path) - 2)
            seg = arc[i + 1] - arc[i]
            u = 0.0 if seg <= 0 else (sm - arc[i]) / seg
            q = path[i] + u * (path[i + 1] - path[i])
        times.append(t * T)
        configs.append(q)
    if times[-1] < T:  # the endpoint must survive deduplication
        times[-1] = T
        configs[-1] = path[-1]
    return Trajectory(times=np.asarray(times), configs=np.asarray(configs),
                      arc_length=L, peak_speed=v_peak,
                      terminal_speed=v_terminal)


def plan_motion(checker: PlanningChecker, model, q_start, q_goal, rng,
                object_position=None, v_peak: float = PEAK_SPEED,
                v_terminal: float = 0.0) -> Trajectory:
    """Full pipeline: BiRRT, shortcutting, optional terminal reshape, retime.

    Tree growth and shortcutting validate edges at a discrete joint-space
    resolution, which does not guarantee freeness of every retimed sample.
    The finished trajectory is therefore re-checked exactly at each sample;
    on a violation the terminal reshape is dropped, and if the underlying
    path itself fails the plan is rebuilt with finer edge discretization.
    """
    for resolution in PLAN_VALIDATE_RESOLUTIONS:
        chk = checker if resolution is None else _FineChecker(checker, resolution)
        path = birrt(chk, q_start, q_goal, rng)
        path = shortcut_smooth(chk, path, rng)
        candidates = [path]
        if object_position is not None:
            candidates.insert(0, reshape_terminal(model, path, object_position))
        for cand in candidates:
            traj = retime(model, cand, v_peak=v_peak, v_terminal=v_terminal)
            if all(checker.is_free(q) for q in traj.configs):
                return traj
    raise PlanTimeout(0)
