"""Quasi-static simulation and PD control.

The world advances at dt = 1/240 s. Joints realize a velocity-level PD law
directly; free objects are static unless attached to the palm, unsupported,
or unstably supported, in which case they settle instantaneously (the
quasi-static approximation). Contact is a 5 mm proximity test between the
16 hand contact bodies and a focus object.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import body as B
from . import geometry as G
from .transforms import make_transform, quat_to_matrix, rot_axis_angle

DT = 1.0 / 240.0
KP = 50.0
KD = 1.5
VEL_LIMIT = 10.0  # rad/s
ACCEL_LIMIT = 200.0  # rad/s^2
CONTACT_TOL = 0.005  # 5 mm proximity => contact
SETTLE_TOL = 0.005
PALM_GRASP_FACTOR = 1.5  # palm must sit within 1.5x object width to attach
GRIP_DELTA = 0.1  # rad, transport over-close offset
GRAVITY = 9.81

CONTACT_BODIES = tuple(
    f"{d}_{i}" for d in B.DIGITS for i in range(3)
) + ("palm",)

DROP_TEST_CONTROL_STEPS = 16  # ceil(0.4 s / (6 * dt))
DROP_TEST_RAMP = 0.1  # s to reach the full 2x-weight pull
DROP_TEST_PENALTY = -15.0  # per control step once the grasp has failed
GRIP_CAPACITY_UNIT = 18.0  # N per weighted contact at unit friction


class DropTestWithoutGrasp(Exception):
    pass


@dataclass
class ObjectState:
    """Mutable pose of one scene object; shape parameters stay on the spec."""
    spec: object  # SceneObject
    position: np.ndarray  # base position
    orientation: np.ndarray  # quaternion (w, x, y, z)
    toppled: bool = False

    @property
    def id(self):
        return self.spec.id

    @property
    def shape(self):
        return self.spec.shape

    @property
    def width(self):
        return self.spec.width

    @property
    def height(self):
        return self.spec.height

    @property
    def centroid(self) -> np.ndarray:
        R = quat_to_matrix(self.orientation)
        return self.position + R @ np.array([0.0, 0.0, self.spec.height / 2.0])

    @property
    def up_axis(self) -> np.ndarray:
        return quat_to_matrix(self.orientation)[:, 2]

    @property
    def top_z(self) -> float:
        return float(self.position[2] + self.spec.height)

    def primitive(self):
        R = quat_to_matrix(self.orientation)
        T = make_transform(R, self.centroid)
        if self.shape == "box":
            prim = G.Box((self.width / 2, self.width / 2, self.height / 2))
        elif self.shape == "cylinder":
            prim = G.Cylinder(self.width / 2, self.height / 2)
        else:
            prim = G.Sphere(self.width / 2)
        return prim, T


@dataclass
class SimState:
    model: object
    scene: object
    q: np.ndarray
    qd: np.ndarray
    objects: list
    time: float = 0.0
    attached_id: str = None
    attach_transform: np.ndarray = None  # object pose in the palm frame
    attach_grip: np.ndarray = None  # finger pose captured when latching
    focus_id: str = None
    contact_flags: np.ndarray = field(
        default_factory=lambda: np.zeros(len(CONTACT_BODIES), dtype=bool))

    def by_id(self, oid) -> ObjectState:
        for o in self.objects:
            if o.id == oid:
                return o
        raise KeyError(oid)

    @property
    def palm(self) -> np.ndarray:
        return B.fk(self.model, self.q).palm


def initial_state(model, scene, q=None) -> SimState:
    q0 = model.rest_pose.copy() if q is None else np.asarray(q, dtype=float).copy()
    objs = [
        ObjectState(spec=o, position=np.asarray(o.base_position, dtype=float).copy(),
                    orientation=np.asarray(o.orientation, dtype=float).copy())
        for o in scene.objects
    ]
    return SimState(model=model, scene=scene, q=q0,
                    qd=np.zeros_like(q0), objects=objs)


# --- PD law ------------------------------------------------------------------

def pd_desired_velocity(q, qd, q_bar, kp: float = KP, kd: float = KD):
    """Velocity realized at the next tick: -Kp (q - q_bar) - (Kd - 1) qd."""
    q = np.asarray(q, dtype=float)
    qd = np.asarray(qd, dtype=float)
    q_bar = np.asarray(q_bar, dtype=float)
    return -kp * (q - q_bar) - (kd - 1.0) * qd


# --- contacts and grasping ---------------------------------------------------

def contact_flags(state: SimState, obj_id=None, tol: float = CONTACT_TOL
                  ) -> np.ndarray:
    """Proximity flags for the 16 contact bodies against one object."""
    oid = obj_id or state.focus_id
    flags = np.zeros(len(CONTACT_BODIES), dtype=bool)
    if oid is None:
        return flags
    obj = state.by_id(oid)
    oprim, oT = obj.primitive()
    res = B.fk(state.model, state.q, with_links=True)
    for k, name in enumerate(CONTACT_BODIES):
        prim, T = res.link_poses[name]
        flags[k] = G.distance(prim, T, oprim, oT) <= tol
    return flags


def digit_contacts(flags) -> dict:
    """Per-digit any-phalanx contact, plus the palm."""
    out = {}
    for di, d in enumerate(B.DIGITS):
        out[d] = bool(np.any(flags[3 * di: 3 * di + 3]))
    out["palm"] = bool(flags[-1])
    return out


def grasp_predicate(state: SimState, obj_id) -> bool:
    """Thumb contact, at least two fingers opposing it across the object
    center, and the palm within 1.5x the object's width."""
    obj = state.by_id(obj_id)
    flags = contact_flags(state, obj_id)
    per = digit_contacts(flags)
    if not per["thumb"]:
        return False
    res = B.fk(state.model, state.q, with_links=True)
    center = obj.centroid
    palm_pos = res.palm[:3, 3]
    if np.linalg.norm(palm_pos - center) > PALM_GRASP_FACTOR * obj.width:
        return False
    oprim, oT = obj.primitive()

    def digit_normals(d):
        # outward surface normals at the digit's contacts; a phalanx
        # presses the object along the opposite of its normal
        out = []
        for i in range(3):
            if not flags[3 * B.DIGITS.index(d) + i]:
                continue
            p = res.link_poses[f"{d}_{i}"][1][:3, 3]
            v = p - G.closest_point(oprim, oT, p)
            n = np.linalg.norm(v)
            if n > 1e-12:
                out.append(v / n)
        return out

    t_normals = digit_normals("thumb")
    if not t_normals:
        return False
    opposing = 0
    for d in B.DIGITS[1:]:
        dots = [float(f @ t) for f in digit_normals(d) for t in t_normals]
        # the digit opposes the thumb if any of its contacts presses
        # against any thumb contact from the other side
        if dots and min(dots) < 0.0:
            opposing += 1
    return opposing >= 2


HOLD_OPEN_EPS = 0.05  # rad of opening beyond the latched grip that releases


def hold_predicate(state: SimState, obj_id) -> bool:
    """Condition for keeping an already-latched grasp. Acquiring a grasp
    demands contact opposition (grasp_predicate); the fingers are kinematic
    afterwards, so the latch persists until the hand opens: a digit has let
    go once it moved measurably from the captured grip pose toward the open
    rest pose. The grip breaks when the thumb lets go or fewer than two
    fingers still hold."""
    if state.attach_grip is None:
        return grasp_predicate(state, obj_id)
    open_ref = state.model.rest_pose[B.ARM_DOFS:]
    q_f = state.q[B.ARM_DOFS:]
    grip = state.attach_grip

    def holding(d):
        gi = [j - B.ARM_DOFS for j in state.model.finger_groups[d]]
        now = np.linalg.norm(q_f[gi] - open_ref[gi])
        was = np.linalg.norm(grip[gi] - open_ref[gi])
        return now > was - HOLD_OPEN_EPS

    fingers = sum(holding(d) for d in B.DIGITS[1:])
    return holding("thumb") and fingers >= 2


def attach_if_grasped(state: SimState, obj_id) -> bool:
    """Latch the object to the palm when the grasp predicate holds."""
    if state.attached_id is not None:
        return state.attached_id == obj_id
    if not grasp_predicate(state, obj_id):
        return False
    obj = state.by_id(obj_id)
    palm = state.palm
    T_obj = make_transform(quat_to_matrix(obj.orientation), obj.position)
    state.attached_id = obj_id
    state.attach_transform = np.linalg.inv(palm) @ T_obj
    state.attach_grip = state.q[B.ARM_DOFS:].copy()
    return True


def release(state: SimState):
    state.attached_id = None
    state.attach_transform = None
    state.attach_grip = None
    _settle(state)


def transport_grip_target(q_fingers, q_bar_fingers, delta: float = GRIP_DELTA):
    """Transport-stage finger target: over-close past the measured grasp
    pose by delta in the direction the grasp command was already pushing;
    dofs whose command matched their pose stay put."""
    q = np.asarray(q_fingers, dtype=float)
    qb = np.asarray(q_bar_fingers, dtype=float)
    return q + delta * np.sign(qb - q)


# --- settling ----------------------------------------------------------------

def _support_surface(state: SimState, obj: ObjectState):
    """Highest resting surface beneath the object's centroid: (z, supporter)."""
    cx, cy = obj.centroid[0], obj.centroid[1]
    best_z, best = 0.0, None  # table
    for other in state.objects:
        if other.id == obj.id or other.id == state.attached_id:
            continue
        if other.shape == "sphere" or other.toppled:
            continue
        if other.top_z > obj.position[2] + obj.height / 2:
            continue
        dx, dy = cx - other.centroid[0], cy - other.centroid[1]
        if other.shape == "box":
            inside = abs(dx) <= other.width / 2 and abs(dy) <= other.width / 2
        else:
            inside = math.hypot(dx, dy) <= other.width / 2
        if inside and other.top_z > best_z:
            best_z, best = other.top_z, other
    return best_z, best


def _topple(obj: ObjectState, away_from=None):
    obj.toppled = True
    direction = np.array([1.0, 0.0])
    if away_from is not None:
        d = obj.position[:2] - np.asarray(away_from)[:2]
        n = np.linalg.norm(d)
        if n > 1e-9:
            direction = d / n
    obj.position = np.array([
        obj.position[0] + direction[0] * obj.height / 2,
        obj.position[1] + direction[1] * obj.height / 2,
        0.0,
    ])
    # lying on its side: up axis tipped into the horizontal plane
    obj.orientation = np.array(
        list(_quat_about((direction[1], -direction[0], 0.0), math.pi / 2)))


def _quat_about(axis, angle):
    from .transforms import matrix_to_quat
    return matrix_to_quat(rot_axis_angle(axis, angle))


def _settle(state: SimState):
    """Drop unsupported objects and topple unstable ones (quasi-static)."""
    order = sorted((o for o in state.objects if o.id != state.attached_id),
                   key=lambda o: o.position[2])
    for obj in order:
        if obj.toppled:
            continue
        z, supporter = _support_surface(state, obj)
        if obj.position[2] > z + SETTLE_TOL:
            obj.position = obj.position.copy()
            obj.position[2] = z
        elif obj.position[2] < z - SETTLE_TOL:
            # below the resting surface: drop to the table if nothing is
            # underneath, otherwise pop out of light penetration onto the top
            obj.position = obj.position.copy()
            obj.position[2] = 0.0 if supporter is None else z
        # stability on a supporter: centroid must stay inside its top face
        if supporter is not None and abs(obj.position[2] - supporter.top_z) <= SETTLE_TOL:
            dx = obj.centroid[0] - supporter.centroid[0]
            dy = obj.centroid[1] - supporter.centroid[1]
            if supporter.shape == "box":
                ok = abs(dx) <= supporter.width / 2 and abs(dy) <= supporter.width / 2
            else:
                ok = math.hypot(dx, dy) <= supporter.width / 2
            if not ok:
                _topple(obj, away_from=supporter.centroid)


# --- stepping ----------------------------------------------------------------

def step(state: SimState, q_bar, kp: float = KP, kd: float = KD):
    """Advance one tick: PD velocity with acceleration/velocity clamps,
    joint-limit clamp, rigid attachment transport, then settling."""
    qd_des = pd_desired_velocity(state.q, state.qd, q_bar, kp, kd)
    dv = np.clip(qd_des - state.qd, -ACCEL_LIMIT * DT, ACCEL_LIMIT * DT)
    qd_new = np.clip(state.qd + dv, -VEL_LIMIT, VEL_LIMIT)
    state.q = state.model.clamp(state.q + qd_new * DT)
    state.qd = qd_new
    state.time += DT

    if state.attached_id is not None:
        obj = state.by_id(state.attached_id)
        T_obj = state.palm @ state.attach_transform
        obj.position = T_obj[:3, 3].copy()
        obj.orientation = _matrix_quat(T_obj[:3, :3])
        if obj.position[2] < 0.0:
            obj.position[2] = 0.0
    _settle(state)
    return state


def _matrix_quat(R):
    from .transforms import matrix_to_quat
    return np.asarray(matrix_to_quat(R), dtype=float)


def hold_until_converged(state: SimState, q_bar, tol: float = 1e-3,
                         timeout: float = 2.0, kp: float = KP, kd: float = KD):
    """Step toward a fixed target until the worst joint error drops below
    tol; returns elapsed time."""
    start = state.time
    q_bar = np.asarray(q_bar, dtype=float)
    while state.time - start < timeout:
        step(state, q_bar, kp, kd)
        if float(np.max(np.abs(state.q - q_bar))) < tol:
            return state.time - start
    return state.time - start


# --- drop test ---------------------------------------------------------------

def grip_capacity(state: SimState, obj_id) -> float:
    """Deterministic pull-out capacity in newtons: friction-scaled count of
    contacting digits (thumb weighted double) plus the palm."""
    obj = state.by_id(obj_id)
    per = digit_contacts(contact_flags(state, obj_id))
    weight = 2.0 * per["thumb"] + sum(
        per[d] for d in B.DIGITS[1:]) + 1.0 * per["palm"]
    return GRIP_CAPACITY_UNIT * obj.spec.friction * weight


def drop_test(state: SimState, obj_id, control_dt: float = 6 * DT):
    """Pull the held object with a force ramping to twice its weight over
    0.1 s, held for 16 control steps. Returns (held, penalty): once the
    pull exceeds the grip capacity the object is released and every
    remaining control step accrues the -15 penalty."""
    if state.attached_id != obj_id:
        raise DropTestWithoutGrasp(f"{obj_id} is not held")
    obj = state.by_id(obj_id)
    full = 2.0 * obj.spec.mass * GRAVITY
    capacity = grip_capacity(state, obj_id)
    penalty = 0.0
    held = True
    t = 0.0
    for _ in range(DROP_TEST_CONTROL_STEPS):
        t += control_dt
        pull = full * min(t / DROP_TEST_RAMP, 1.0)
        if held and pull > capacity:
            held = False
            release(state)
        if not held:
            penalty += DROP_TEST_PENALTY
    return held, penalty
