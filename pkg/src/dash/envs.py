"""Grasp and place/stack interaction environments.

Both environments share the quasi-static simulator: a policy acts every
k = 6 simulation ticks by nudging the tracking target (|delta q_bar| <=
0.05 rad per dof), observes proprioception without finger velocities,
binary contacts, task info, and (for placing) delayed vision estimates.
Rewards are computed from the exact simulator state.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import body as B
from . import perception as V
from . import scene as scene_mod
from . import simcontrol as S
from .transforms import make_transform, rot_z

K_DECIMATION = 6
CONTROL_DT = K_DECIMATION * S.DT
GAMMA = 0.99
ACTION_BOUND = 0.05  # rad per control step per dof
HORIZON_GRASP = 150
HORIZON_PLACE = 300
STACK_FRACTION = 0.7  # of place/stack episodes
GRASP_CORPUS_SIZE = 500
BONUS_DIST = 0.03  # m, "sufficiently close" for the place bonus
BONUS_UPRIGHT = 0.95  # z' R z threshold
PLACE_BONUS_NEAR = 5.0
PLACE_BONUS_RELEASE = 20.0
MISSED_GRASP_PENALTY = S.DROP_TEST_PENALTY * S.DROP_TEST_CONTROL_STEPS

SHAPES = ("box", "cylinder", "sphere")


class EmptyGraspCorpus(Exception):
    pass


@dataclass
class EpisodeSpec:
    kind: str  # "grasp" | "place" | "stack"
    target: object  # SceneObject of the manipulated object
    p_bar: np.ndarray  # interaction location (grasp) or final pose (place)
    bottom: object = None  # SceneObject under a stack destination
    q_init: np.ndarray = None
    attach_transform: np.ndarray = None  # held-object pose in palm frame
    scene: object = None  # full Scene; defaults to a minimal one-object scene


@dataclass
class Observation:
    q: np.ndarray  # all 29 joint positions
    qd_arm: np.ndarray  # arm velocities only; finger velocities are omitted
    q_bar_prev: np.ndarray
    contacts: np.ndarray  # 16 binary flags
    p_bar: np.ndarray
    shape_onehot: np.ndarray
    time: float
    vision_object: np.ndarray = None  # delayed estimate of the held object
    vision_up: np.ndarray = None


@dataclass
class Action:
    delta_q_bar: np.ndarray  # 29 dofs, clipped to +-ACTION_BOUND


@dataclass
class RewardBreakdown:
    object_term: float = 0.0
    closure_term: float = 0.0
    contact_term: float = 0.0
    shaping_term: float = 0.0
    drop_term: float = 0.0
    action_term: float = 0.0
    bonus_term: float = 0.0
    total: float = 0.0


@dataclass
class InitialState:
    """A post-grasp snapshot usable to seed a place/stack episode."""
    target: object
    q: np.ndarray
    attach_transform: np.ndarray
    object_position: np.ndarray
    object_orientation: np.ndarray


def shape_onehot(shape: str) -> np.ndarray:
    v = np.zeros(len(SHAPES))
    v[SHAPES.index(shape)] = 1.0
    return v


# --- reward terms -------------------------------------------------------------

def _hand_points(model, q):
    res = B.fk(model, q)
    return res.fingertips, res.palm[:3, 3]


def _contact_score(flags) -> float:
    """Contact count with the three thumb phalanges weighted five-fold."""
    score = 0.0
    for k, on in enumerate(flags):
        if on:
            score += 5.0 if k < 3 else 1.0
    return score


def _finger_shaping(model, q) -> float:
    vecs = [np.asarray(q)[model.finger_groups[d]]
            for d in ("index", "middle", "ring", "little")]
    total = 0.0
    for a, b in zip(vecs, vecs[1:] + vecs[:1]):
        total -= float(np.linalg.norm(a - b))
    return total


def reward_grasp(state: S.SimState, obj_id, p_bar_i, drop_term: float = 0.0,
                 flags=None) -> RewardBreakdown:
    """r = 10 r_o + r_p + 2 r_c + 1.5 r_s + r_d."""
    obj = state.by_id(obj_id)
    p = obj.centroid
    r_o = -float(np.linalg.norm((p - np.asarray(p_bar_i))[:2]))
    tips, palm = _hand_points(state.model, state.q)
    r_p = (-5.0 * float(np.linalg.norm(tips[0] - p))
           - sum(float(np.linalg.norm(t - p)) for t in tips[1:])
           - 2.0 * float(np.linalg.norm(palm - p)))
    if flags is None:
        flags = S.contact_flags(state, obj_id)
    r_c = _contact_score(flags)
    r_s = _finger_shaping(state.model, state.q)
    total = 10.0 * r_o + r_p + 2.0 * r_c + 1.5 * r_s + drop_term
    return RewardBreakdown(object_term=r_o, closure_term=r_p, contact_term=r_c,
                           shaping_term=r_s, drop_term=drop_term, total=total)


def reward_place(state: S.SimState, obj_id, p_bar_f, q_bar,
                 released_near: bool = False, flags=None) -> RewardBreakdown:
    """r = 5 r_o + 10 r_a - 0.5 r_c + 0.3 r_s + r_b."""
    obj = state.by_id(obj_id)
    p = obj.centroid
    dist = float(np.linalg.norm(p - np.asarray(p_bar_f)))
    upright = float(obj.up_axis[2])
    r_o = -dist + 3.0 * upright
    r_a = 1.0 / (float(np.linalg.norm(np.asarray(q_bar) - state.q)) + 1.0)
    if flags is None:
        flags = S.contact_flags(state, obj_id)
    r_c = _contact_score(flags)
    r_s = _finger_shaping(state.model, state.q)
    r_b = 0.0
    near = dist <= BONUS_DIST and upright >= BONUS_UPRIGHT
    if near:
        r_b += PLACE_BONUS_NEAR
    if released_near:
        r_b += PLACE_BONUS_RELEASE
    total = 5.0 * r_o + 10.0 * r_a - 0.5 * r_c + 0.3 * r_s + r_b
    return RewardBreakdown(object_term=r_o, action_term=r_a, contact_term=r_c,
                           shaping_term=r_s, bonus_term=r_b, total=total)


# --- initial state sampling ---------------------------------------------------

def _sample_object(rng, oid="target", shapes=("box", "cylinder"),
                   min_width=None) -> scene_mod.SceneObject:
    shape = shapes[int(rng.integers(len(shapes)))]
    raw_w = float(rng.uniform(*scene_mod.WIDTH_RANGE))
    raw_h = float(rng.uniform(*scene_mod.HEIGHT_RANGE))
    if min_width is not None:
        raw_w = max(raw_w, min_width)
    width, height = scene_mod.effective_dimensions(shape, raw_w, raw_h)
    return scene_mod.SceneObject(
        id=oid, shape=shape,
        color=scene_mod.COLORS[int(rng.integers(len(scene_mod.COLORS)))],
        width=width, height=height,
        base_position=(0.0, 0.0, 0.0), orientation=(1.0, 0.0, 0.0, 0.0),
        mass=float(rng.uniform(*scene_mod.MASS_RANGE)),
        friction=float(rng.uniform(*scene_mod.FRICTION_RANGE)),
        up_axis=(0.0, 0.0, 1.0),
        raw_width_sample=raw_w, raw_height_sample=raw_h)


def _sample_reach_point(rng) -> np.ndarray:
    return np.array([
        float(rng.uniform(*scene_mod.POSITION_X)),
        float(rng.uniform(*scene_mod.POSITION_Y)),
        0.0,
    ])


def _with_base(obj, base) -> scene_mod.SceneObject:
    from dataclasses import replace
    return replace(obj, base_position=(float(base[0]), float(base[1]),
                                       float(base[2])))


_CLOSE_POSE = None


def grasp_close_pose(model) -> np.ndarray:
    """Finger dof values of the canonical power wrap (22-vector)."""
    global _CLOSE_POSE
    if _CLOSE_POSE is None:
        q = model.rest_pose.copy()
        for d in ("index", "middle", "ring", "little"):
            g = model.finger_groups[d]
            q[g[1]], q[g[2]], q[g[3]] = 1.2, 1.0, 0.6
        tg = model.finger_groups["thumb"]
        q[tg[0]], q[tg[1]], q[tg[3]], q[tg[5]] = -1.0, 1.0, 0.8, 0.5
        _CLOSE_POSE = q[B.ARM_DOFS:].copy()
    return _CLOSE_POSE.copy()


def grasp_palm_offset(obj_width: float) -> np.ndarray:
    """Held-object center expressed in the palm frame: nestled against the
    palm along its normal, slightly toward the fingertips."""
    return np.array([0.0, 0.02 + obj_width / 2.0, -0.03])


def generate_grasp_corpus(model, n: int = GRASP_CORPUS_SIZE, seed: int = 0):
    """Deterministic set of post-grasp states: a sampled object nestled in
    the closed hand at a reachable arm pose."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x6C0]))
    out = []
    attempts = 0
    while len(out) < n and attempts < 20 * n:
        attempts += 1
        obj = _sample_object(rng)
        p_bar = _sample_reach_point(rng)
        hold = np.array([p_bar[0], p_bar[1], obj.height / 2 + 0.12])
        try:
            candidates = B.sample_final_poses(
                model, hold, B.reach_palm_offset(), 6, rng)
        except B.NoCandidate:
            continue
        q = model.rest_pose.copy()
        q[:B.ARM_DOFS] = candidates[0]
        q[B.ARM_DOFS:] = grasp_close_pose(model)
        palm = B.fk(model, q).palm
        offset = grasp_palm_offset(obj.width)
        center = palm[:3, :3] @ offset + palm[:3, 3]
        base = center - np.array([0.0, 0.0, obj.height / 2.0])
        obj = _with_base(obj, base)
        sc = scene_mod.Scene(objects=[obj], table_extent=scene_mod.TABLE_EXTENT,
                             rng_seed=0, undersized=False, requested_count=1)
        st = S.initial_state(model, sc, q=q)
        st.focus_id = obj.id
        if not S.grasp_predicate(st, obj.id):
            continue
        T_obj = make_transform(p=base)
        out.append(InitialState(
            target=obj, q=q,
            attach_transform=np.linalg.inv(palm) @ T_obj,
            object_position=base.copy(),
            object_orientation=np.array([1.0, 0.0, 0.0, 0.0])))
    if not out:
        raise EmptyGraspCorpus("no valid grasp states generated")
    return out


# --- environments -------------------------------------------------------------

class _BaseEnv:
    horizon = HORIZON_GRASP

    def __init__(self, model=None, noise: V.NoiseProfile = None, seed: int = 0):
        self.model = model or B.build_right_model()
        self.noise = noise if noise is not None else V.NoiseProfile.exact()
        self.rng = np.random.default_rng(seed)
        self.state = None
        self.spec = None
        self.q_bar = None
        self.steps = 0
        self.done = False

    def _obs(self) -> Observation:
        st = self.state
        return Observation(
            q=st.q.copy(), qd_arm=st.qd[:B.ARM_DOFS].copy(),
            q_bar_prev=self.q_bar.copy(), contacts=st.contact_flags.copy(),
            p_bar=np.asarray(self.spec.p_bar, dtype=float).copy(),
            shape_onehot=shape_onehot(self.spec.target.shape),
            time=st.time)

    def _apply_action(self, action):
        delta = np.clip(np.asarray(action.delta_q_bar, dtype=float),
                        -ACTION_BOUND, ACTION_BOUND)
        self.q_bar = self.model.clamp(self.q_bar + delta)

    def _advance(self):
        for _ in range(K_DECIMATION):
            S.step(self.state, self.q_bar)
        self.state.contact_flags = S.contact_flags(self.state)
        self.steps += 1


class GraspEnv(_BaseEnv):
    """Close the hand around an object standing at the interaction point."""
    horizon = HORIZON_GRASP

    def reset(self, spec: EpisodeSpec = None) -> Observation:
        if spec is None:
            obj = _sample_object(self.rng)
            p_cmd = _sample_reach_point(self.rng)
            noise = self.rng.uniform(-0.02, 0.02, size=2)
            p_bar = np.array([p_cmd[0] + noise[0], p_cmd[1] + noise[1],
                              obj.height / 2.0])
            spec = EpisodeSpec(kind="grasp", target=_with_base(
                obj, (p_bar[0], p_bar[1], 0.0)), p_bar=p_bar)
        self.spec = spec
        target = spec.target
        if spec.q_init is None:
            cands = B.sample_final_poses(
                self.model, np.asarray(spec.p_bar, dtype=float),
                B.reach_palm_offset(), 10, self.rng)
            q = self.model.rest_pose.copy()
            q[:B.ARM_DOFS] = cands[0]
        else:
            q = np.asarray(spec.q_init, dtype=float).copy()
        sc = spec.scene
        if sc is None:
            sc = scene_mod.Scene(objects=[target],
                                 table_extent=scene_mod.TABLE_EXTENT,
                                 rng_seed=0, undersized=False, requested_count=1)
        self.state = S.initial_state(self.model, sc, q=q)
        self.state.focus_id = target.id
        self.q_bar = q.copy()
        self.steps = 0
        self.done = False
        self.state.contact_flags = S.contact_flags(self.state)
        return self._obs()

    def env_step(self, action: Action):
        if self.done:
            raise RuntimeError("episode finished; call reset")
        self._apply_action(action)
        self._advance()
        oid = self.spec.target.id
        S.attach_if_grasped(self.state, oid)
        drop_term = 0.0
        info = {}
        if self.steps >= self.horizon:
            self.done = True
            if self.state.attached_id == oid:
                held, drop_term = S.drop_test(self.state, oid)
                info["drop_test_held"] = held
            else:
                drop_term = MISSED_GRASP_PENALTY
                info["drop_test_held"] = False
            info["grasped"] = self.state.attached_id == oid
        rb = reward_grasp(self.state, oid, self.spec.p_bar, drop_term,
                          flags=self.state.contact_flags)
        return self._obs(), rb, self.done, info


class PlaceEnv(_BaseEnv):
    """Carry a held object to a destination pose and let go of it.

    Episodes start from a grasp-corpus snapshot; with probability
    STACK_FRACTION the destination is the top of a sampled bottom object,
    otherwise a tabletop location.
    """
    horizon = HORIZON_PLACE

    def __init__(self, model=None, noise=None, seed: int = 0, corpus=None):
        super().__init__(model, noise, seed)
        self.corpus = corpus
        self.stream = None
        self._released_steps = set()

    def reset(self, spec: EpisodeSpec = None) -> Observation:
        if spec is None:
            if not self.corpus:
                raise EmptyGraspCorpus("place episodes need grasp states")
            entry = self.corpus[int(self.rng.integers(len(self.corpus)))]
            stack = bool(self.rng.uniform() < STACK_FRACTION)
            xy = _sample_reach_point(self.rng)[:2]
            xy = xy + self.rng.uniform(-0.02, 0.02, size=2)
            bottom = None
            if stack:
                bottom = _sample_object(
                    self.rng, oid="bottom",
                    min_width=scene_mod.STACK_BOTTOM_MIN_WIDTH)
                bottom = _with_base(bottom, (xy[0], xy[1], 0.0))
                p_bar = np.array([xy[0], xy[1],
                                  bottom.height + entry.target.height / 2.0])
            else:
                p_bar = np.array([xy[0], xy[1], entry.target.height / 2.0])
            spec = EpisodeSpec(kind="stack" if stack else "place",
                               target=entry.target, p_bar=p_bar, bottom=bottom,
                               q_init=entry.q,
                               attach_transform=entry.attach_transform)
        self.spec = spec
        sc = spec.scene
        if sc is None:
            objs = ([spec.target]
                    + ([spec.bottom] if spec.bottom is not None else []))
            sc = scene_mod.Scene(objects=objs,
                                 table_extent=scene_mod.TABLE_EXTENT,
                                 rng_seed=0, undersized=False,
                                 requested_count=len(objs))
        q = np.asarray(spec.q_init, dtype=float).copy()
        self.state = S.initial_state(self.model, sc, q=q)
        self.state.focus_id = spec.target.id
        palm = self.state.palm
        T_obj = palm @ spec.attach_transform
        held = self.state.by_id(spec.target.id)
        held.position = T_obj[:3, 3].copy()
        held.orientation = S._matrix_quat(T_obj[:3, :3])
        self.state.attached_id = spec.target.id
        self.state.attach_transform = spec.attach_transform.copy()
        self.state.attach_grip = q[B.ARM_DOFS:].copy()
        self.q_bar = q.copy()
        self.steps = 0
        self.done = False
        self._released_steps = set()
        self.stream = V.ObservationStream()
        self._record_vision()
        self.state.contact_flags = S.contact_flags(self.state)
        return self._obs()

    def _record_vision(self):
        # 20 Hz snapshots on control-step boundaries (every other step)
        if self.steps % 2 == 0:
            held = self.state.by_id(self.spec.target.id)
            noise = self.noise
            pos = held.centroid + self.rng.uniform(
                -noise.position_noise, noise.position_noise, size=3)
            up = held.up_axis.copy()
            up[:2] += self.rng.uniform(-noise.up_noise, noise.up_noise, size=2)
            up /= np.linalg.norm(up)
            self.stream.record(self.state.time, [V.PerceivedObject(
                track_id="held", shape=held.shape, color=held.spec.color,
                position=pos, up_axis=up, height=held.height,
                timestamp=self.state.time)])

    def _obs(self) -> Observation:
        obs = super()._obs()
        snap = self.stream.delayed_read(self.state.time) if self.stream else None
        if snap:
            obs.vision_object = np.asarray(snap[0].position, dtype=float).copy()
            obs.vision_up = np.asarray(snap[0].up_axis, dtype=float).copy()
        return obs

    def env_step(self, action: Action):
        if self.done:
            raise RuntimeError("episode finished; call reset")
        self._apply_action(action)
        was_attached = self.state.attached_id is not None
        self._advance()
        oid = self.spec.target.id
        # opening the hand loses finger contact and drops the object
        if self.state.attached_id == oid and not S.hold_predicate(self.state, oid):
            S.release(self.state)
        released_now = was_attached and self.state.attached_id is None
        obj = self.state.by_id(oid)
        dist = float(np.linalg.norm(obj.centroid - self.spec.p_bar))
        released_near = (released_now and dist <= BONUS_DIST
                         and float(obj.up_axis[2]) >= BONUS_UPRIGHT)
        rb = reward_place(self.state, oid, self.spec.p_bar, self.q_bar,
                          released_near=released_near,
                          flags=self.state.contact_flags)
        self._record_vision()
        if self.steps >= self.horizon:
            self.done = True
        info = {
            "distance": dist,
            "upright": float(obj.up_axis[2]),
            "released": self.state.attached_id is None,
            "toppled": obj.toppled,
        }
        return self._obs(), rb, self.done, info


# --- scripted policies ---------------------------------------------------------

def _dls_arm_step(model, q, p_target, gain: float = 1.0, R_target=None):
    """Clamped damped-least-squares increment moving the palm to p_target,
    optionally while holding the palm orientation at R_target."""
    frames, palm = B._arm_frames(model, q[:B.ARM_DOFS])
    e_p = np.asarray(p_target, dtype=float) - palm[:3, 3]
    J = B.arm_jacobian(model, q)
    if R_target is None:
        e, J = e_p, J[:3]
    else:
        dR = np.asarray(R_target) @ palm[:3, :3].T
        e_o = 0.5 * np.array([dR[2, 1] - dR[1, 2], dR[0, 2] - dR[2, 0],
                              dR[1, 0] - dR[0, 1]])
        e = np.concatenate([e_p, 0.5 * e_o])
    dq = J.T @ np.linalg.solve(J @ J.T + 0.01 * np.eye(len(e)), gain * e)
    m = np.max(np.abs(dq))
    if m > ACTION_BOUND:
        dq *= ACTION_BOUND / m
    return dq


class ScriptedGraspPolicy:
    """Approach the interaction point, then wrap each digit until it makes
    contact (plus a small squeeze), then hold."""

    SQUEEZE = 0.12  # rad of extra flexion applied after first contact

    def __init__(self, model):
        self.model = model
        self.phase = "approach"
        self._contact_bar = {}  # digit -> finger target frozen at contact

    def __call__(self, obs: Observation) -> Action:
        model = self.model
        delta = np.zeros(model.dof_count)
        close = grasp_close_pose(model)
        palm = B.fk(model, obs.q).palm
        offset = grasp_palm_offset(0.07)
        grip_point = palm[:3, :3] @ offset + palm[:3, 3]
        err = np.asarray(obs.p_bar) - grip_point
        if self.phase == "approach":
            if np.linalg.norm(err) < 0.01:
                self.phase = "close"
            else:
                delta[:B.ARM_DOFS] = _dls_arm_step(model, obs.q, palm[:3, 3] + err)
        if self.phase == "close":
            target = model.rest_pose.copy()
            target[B.ARM_DOFS:] = close
            settled = True
            for di, digit in enumerate(B.DIGITS):
                group = model.finger_groups[digit]
                # joints serving each of the digit's three phalanges
                if digit == "thumb":
                    spans = ([group[0], group[1]], [group[2], group[3]],
                             [group[4], group[5]])
                else:
                    spans = ([group[0], group[1]], [group[2]], [group[3]])
                for k in range(3):
                    key = (digit, k)
                    touching = bool(obs.contacts[3 * di + k])
                    joints = [j for span in spans[:k + 1] for j in span]
                    if key in self._contact_bar:
                        target[joints] = self._contact_bar[key]
                    elif touching:
                        # freeze this phalanx and everything proximal at the
                        # surface plus a small squeeze; distal joints go on
                        frozen = obs.q_bar_prev[joints] + np.clip(
                            target[joints] - obs.q_bar_prev[joints],
                            -self.SQUEEZE, self.SQUEEZE)
                        self._contact_bar[key] = frozen
                        target[joints] = frozen
                gap = target[group] - obs.q_bar_prev[group]
                delta[group] = np.clip(gap, -ACTION_BOUND, ACTION_BOUND)
                if np.max(np.abs(gap)) > 1e-6:
                    settled = False
            if settled:
                self.phase = "hold"
        return Action(delta_q_bar=delta)


class ScriptedPlacePolicy:
    """Descend toward the delayed-vision destination, release when close.

    Destinations near the edge of the workspace can stall the tracking step
    with the palm orientation held (the orientation rows absorb the reach).
    Stalls escalate in two steps: first the orientation hold is dropped so
    all arm freedoms serve the position error, then — if still stuck within
    a loose radius of the destination — the object is set down where it is,
    which beats carrying it forever.
    """

    STALL_CALLS = 40  # calls without ≥1 mm progress before escalating
    STALL_EPS = 1e-3
    GIVE_UP_DIST = 0.08  # m, max error at which a stalled descend releases

    def __init__(self, model, release_dist: float = BONUS_DIST,
                 hover: float = 0.08):
        self.model = model
        self.release_dist = release_dist
        self.hover = hover
        self.phase = "carry"
        self._palm_rot = None  # orientation to hold so the object stays upright
        self._hold_orientation = True
        self._best_err = np.inf
        self._stalled_calls = 0

    def _stalled(self, err: float) -> bool:
        if err < self._best_err - self.STALL_EPS:
            self._best_err = err
            self._stalled_calls = 0
            return False
        self._stalled_calls += 1
        return self._stalled_calls > self.STALL_CALLS

    def _escalate(self) -> None:
        self._best_err = np.inf
        self._stalled_calls = 0
        if self._hold_orientation:
            self._hold_orientation = False  # free the wrist for reach
        else:
            self.phase = "give_up"

    def __call__(self, obs: Observation) -> Action:
        model = self.model
        delta = np.zeros(model.dof_count)
        held = obs.vision_object
        if held is None:
            return Action(delta_q_bar=delta)
        dest = np.asarray(obs.p_bar, dtype=float)
        palm = B.fk(model, obs.q).palm
        if self._palm_rot is None:
            self._palm_rot = palm[:3, :3].copy()
        R_hold = self._palm_rot if self._hold_orientation else None
        err_obj = dest - held
        if self.phase == "carry":
            goal = dest + np.array([0.0, 0.0, self.hover])
            carry_err = float(np.linalg.norm(goal - held))
            if carry_err < 0.03:
                self.phase = "descend"
                self._best_err = np.inf
                self._stalled_calls = 0
            elif self._stalled(carry_err):
                self._escalate()
                if self.phase == "give_up":
                    self.phase = "descend"  # aim at the target, not the hover
            else:
                delta[:B.ARM_DOFS] = _dls_arm_step(
                    model, obs.q, palm[:3, 3] + (goal - held), gain=0.25,
                    R_target=R_hold)
        if self.phase == "descend":
            err = float(np.linalg.norm(err_obj))
            if (err <= self.release_dist
                    and (obs.vision_up is None or obs.vision_up[2] >= BONUS_UPRIGHT)):
                self.phase = "release"
            elif self._stalled(err):
                self._escalate()
                if self.phase == "give_up" and err <= self.GIVE_UP_DIST:
                    self.phase = "release"
                elif self.phase == "give_up":
                    self.phase = "descend"  # too far to drop: keep trying
            else:
                delta[:B.ARM_DOFS] = _dls_arm_step(
                    model, obs.q, palm[:3, 3] + err_obj, gain=0.2,
                    R_target=R_hold)
        if self.phase == "release":
            open_pose = model.rest_pose[B.ARM_DOFS:]
            gap = open_pose - obs.q_bar_prev[B.ARM_DOFS:]
            delta[B.ARM_DOFS:] = np.clip(gap, -ACTION_BOUND, ACTION_BOUND)
        return Action(delta_q_bar=delta)


def run_policy(env, policy, spec: EpisodeSpec = None, gamma: float = GAMMA):
    """Roll one episode; returns (discounted return, steps, final info)."""
    obs = env.reset(spec)
    total = 0.0
    disc = 1.0
    info = {}
    while not env.done:
        obs, rb, done, info = env.env_step(policy(obs))
        total += disc * rb.total
        disc *= gamma
    return total, env.steps, info
