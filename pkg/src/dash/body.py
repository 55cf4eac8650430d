"""29-DoF right arm+hand: kinematics, Jacobians, parameterized IK, collision
geometry, and sagittal mirroring.

Kinematic parameters (link lengths, axes, limits) are artifact-defined and
published in the ``dash-body/1`` model document; only the 7 arm + 22 finger
DoF split is externally prescribed. Finger layout: four fingers with
1 abduction + 3 flexion joints each, thumb with 6 (2+2+2), giving
15 phalanx links + palm = 16 contact bodies.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import docio
from . import geometry as G
from .transforms import make_transform, rot_axis_angle, rot_z

ARM_DOFS = 7
FINGER_DOFS = 22
TOTAL_DOFS = 29

BODY_HEADER = "dash-body/1"

# sagittal plane of the torso; the right shoulder sits +0.15 m from it
MIRROR_PLANE_X = -0.075

# reach-stage palm offset: palm 0.20 m beside the object, facing it
REACH_SIDE_OFFSET = 0.20

IK_DAMPING = 0.05
IK_MAX_ITERS = 200
IK_STEP_CLAMP = 0.2
IK_POS_TOL = 1e-3  # 1 mm
IK_ORI_TOL = math.radians(1.0)


class IkDiverged(Exception):
    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(f"IK did not converge; position residual {residual:.4f} m")


class NoCandidate(Exception):
    pass


class AllInCollision(Exception):
    pass


@dataclass
class Joint:
    name: str
    parent: int  # joint index, -1 for root
    origin: tuple  # translation in parent joint frame
    axis: tuple  # unit rotation axis, local frame
    limits: tuple  # (lo, hi) radians


@dataclass
class LinkGeom:
    name: str
    joint: int  # joint index the geometry is rigidly attached to
    local: tuple  # translation of the primitive frame in the joint frame
    local_rot_axis: tuple = (1.0, 0.0, 0.0)
    local_rot_angle: float = 0.0
    kind: str = "capsule"
    radius: float = 0.0
    half_length: float = 0.0

    def primitive(self):
        return G.Capsule(self.radius, self.half_length)

    def local_transform(self) -> np.ndarray:
        return make_transform(
            rot_axis_angle(self.local_rot_axis, self.local_rot_angle), self.local)


@dataclass
class ArmHandModel:
    joints: list  # 29 Joint entries, arm first
    links: list  # LinkGeom entries
    palm_joint: int  # joint index carrying the palm frame
    palm_offset: tuple  # palm frame translation in that joint's frame
    fingertip_joints: tuple  # distal joint index per digit (thumb first)
    fingertip_offsets: tuple  # tip translation in the distal joint frame
    rest_pose: np.ndarray
    handedness: str = "right"
    finger_groups: dict = field(default_factory=dict)  # digit -> list of dof indices

    @property
    def dof_count(self) -> int:
        return len(self.joints)

    def clamp(self, q: np.ndarray) -> np.ndarray:
        lo = np.array([j.limits[0] for j in self.joints])
        hi = np.array([j.limits[1] for j in self.joints])
        return np.clip(q, lo, hi)


# --- model definition --------------------------------------------------------

_SHOULDER = (0.075, -0.25, 0.50)
_UPPER_ARM = 0.40
_FOREARM = 0.36
_WRIST_TO_PALM = 0.07

_FINGER_X = (0.027, 0.009, -0.009, -0.027)  # index, middle, ring, little
_FINGER_ROOT_Z = 0.045
_PHALANX = (0.035, 0.025, 0.020)
_FINGER_RADIUS = 0.007
_THUMB_PHALANX = (0.040, 0.030, 0.025)
_THUMB_RADIUS = 0.008

DIGITS = ("thumb", "index", "middle", "ring", "little")


def _arm_joints():
    big = math.pi
    return [
        Joint("shoulder_yaw", -1, _SHOULDER, (0, 0, 1), (-big, big)),
        Joint("shoulder_pitch", 0, (0, 0, 0), (0, 1, 0), (-big, big)),
        Joint("shoulder_roll", 1, (0, 0, 0), (1, 0, 0), (-big, big)),
        Joint("elbow", 2, (0, 0, -_UPPER_ARM), (0, 1, 0), (-2.6, 0.05)),
        Joint("forearm_roll", 3, (0, 0, 0), (0, 0, 1), (-big, big)),
        Joint("wrist_pitch", 4, (0, 0, -_FOREARM), (0, 1, 0), (-1.6, 1.6)),
        Joint("wrist_yaw", 5, (0, 0, 0), (1, 0, 0), (-1.6, 1.6)),
    ]


def build_right_model() -> ArmHandModel:
    """Construct the canonical right arm+hand model.

    Palm frame: origin at palm center; fingers extend along -z, +y is the
    palm normal (grasping face), +x lateral (toward the thumb). At the zero
    pose the arm hangs straight down (fingers toward the floor) with the
    palm facing +y world.
    """
    joints = _arm_joints()
    links = [
        LinkGeom("upper_arm", 2, (0, 0, -_UPPER_ARM / 2), radius=0.042,
                 half_length=_UPPER_ARM / 2),
        LinkGeom("forearm", 4, (0, 0, -_FOREARM / 2), radius=0.036,
                 half_length=_FOREARM / 2),
    ]
    # palm rigidly follows wrist_yaw (joint 6), translated down the hand
    palm_joint = 6
    palm_offset = (0.0, 0.0, -_WRIST_TO_PALM)

    finger_groups = {}
    fingertip_joints = []
    fingertip_offsets = []
    jidx = len(joints)

    # thumb: 2 dof base, 2 dof middle, 2 dof distal (6 total, 3 links)
    base = len(joints)
    joints.append(Joint("thumb_cmc_ab", palm_joint, (0.035, 0.0, -_WRIST_TO_PALM - 0.005),
                        (0, 0, 1), (-1.0, 1.0)))
    joints.append(Joint("thumb_cmc_flex", base, (0, 0, 0), (0, 1, 0), (-0.3, 1.8)))
    joints.append(Joint("thumb_mcp_ab", base + 1, (0, 0, -_THUMB_PHALANX[0]),
                        (0, 0, 1), (-0.6, 0.6)))
    joints.append(Joint("thumb_mcp_flex", base + 2, (0, 0, 0), (0, 1, 0), (-0.3, 1.6)))
    joints.append(Joint("thumb_ip_ab", base + 3, (0, 0, -_THUMB_PHALANX[1]),
                        (0, 0, 1), (-0.6, 0.6)))
    joints.append(Joint("thumb_ip_flex", base + 4, (0, 0, 0), (0, 1, 0), (-0.3, 1.6)))
    links.append(LinkGeom("thumb_0", base + 1, (0, 0, -_THUMB_PHALANX[0] / 2),
                          radius=_THUMB_RADIUS, half_length=_THUMB_PHALANX[0] / 2))
    links.append(LinkGeom("thumb_1", base + 3, (0, 0, -_THUMB_PHALANX[1] / 2),
                          radius=_THUMB_RADIUS, half_length=_THUMB_PHALANX[1] / 2))
    links.append(LinkGeom("thumb_2", base + 5, (0, 0, -_THUMB_PHALANX[2] / 2),
                          radius=_THUMB_RADIUS, half_length=_THUMB_PHALANX[2] / 2))
    finger_groups["thumb"] = list(range(base, base + 6))
    fingertip_joints.append(base + 5)
    fingertip_offsets.append((0, 0, -_THUMB_PHALANX[2]))
    jidx = len(joints)

    # four fingers: abduction + 3 flexion each
    for fi, name in enumerate(("index", "middle", "ring", "little")):
        root = len(joints)
        x = _FINGER_X[fi]
        joints.append(Joint(f"{name}_abduction", palm_joint,
                            (x, 0.0, -_WRIST_TO_PALM - _FINGER_ROOT_Z),
                            (0, 1, 0), (-0.35, 0.35)))
        joints.append(Joint(f"{name}_flex0", root, (0, 0, 0), (1, 0, 0), (-0.2, 1.8)))
        joints.append(Joint(f"{name}_flex1", root + 1, (0, 0, -_PHALANX[0]),
                            (1, 0, 0), (-0.2, 1.9)))
        joints.append(Joint(f"{name}_flex2", root + 2, (0, 0, -_PHALANX[1]),
                            (1, 0, 0), (-0.2, 1.9)))
        for pi in range(3):
            links.append(LinkGeom(
                f"{name}_{pi}", root + 1 + pi, (0, 0, -_PHALANX[pi] / 2),
                radius=_FINGER_RADIUS, half_length=_PHALANX[pi] / 2))
        finger_groups[name] = list(range(root, root + 4))
        fingertip_joints.append(root + 3)
        fingertip_offsets.append((0, 0, -_PHALANX[2]))

    # palm slab: capsule across the lateral axis
    links.append(LinkGeom("palm", palm_joint, (0.0, 0.0, -_WRIST_TO_PALM),
                          local_rot_axis=(0, 1, 0), local_rot_angle=math.pi / 2,
                          radius=0.018, half_length=0.034))

    rest = np.zeros(TOTAL_DOFS)
    # elbow bent to carry the hand up and forward of the table edge
    rest[1] = 0.15
    rest[3] = -1.9
    # pre-grasp finger curl
    for name in ("index", "middle", "ring", "little"):
        g = finger_groups[name]
        rest[g[1]] = 0.25
        rest[g[2]] = 0.25
        rest[g[3]] = 0.15
    tg = finger_groups["thumb"]
    rest[tg[1]] = 0.35

    return ArmHandModel(
        joints=joints,
        links=links,
        palm_joint=palm_joint,
        palm_offset=palm_offset,
        fingertip_joints=tuple(fingertip_joints),
        fingertip_offsets=tuple(fingertip_offsets),
        rest_pose=rest,
        handedness="right",
        finger_groups=finger_groups,
    )


# --- forward kinematics ------------------------------------------------------

@dataclass
class FkResult:
    joint_frames: list  # 4x4 per joint
    palm: np.ndarray  # 4x4 palm frame
    fingertips: list  # 5 world points, thumb first
    link_poses: dict = None  # name -> (primitive, 4x4), filled on demand


def fk(model: ArmHandModel, q, with_links: bool = False,
       clamp: bool = True) -> FkResult:
    """All joint frames, palm frame, and fingertip positions for pose q."""
    q = np.asarray(q, dtype=float)
    if clamp:
        q = model.clamp(q)
    frames = [None] * len(model.joints)
    for i, j in enumerate(model.joints):
        R = rot_axis_angle(j.axis, q[i])
        local = make_transform(R, j.origin)
        if j.parent < 0:
            frames[i] = local
        else:
            frames[i] = frames[j.parent] @ local
    palm = frames[model.palm_joint] @ make_transform(p=model.palm_offset)
    tips = [
        G.transform_point(frames[ji], off)
        for ji, off in zip(model.fingertip_joints, model.fingertip_offsets)
    ]
    res = FkResult(joint_frames=frames, palm=palm, fingertips=tips)
    if with_links:
        res.link_poses = {
            lg.name: (lg.primitive(), frames[lg.joint] @ lg.local_transform())
            for lg in model.links
        }
    return res


def palm_transform(model: ArmHandModel, q) -> np.ndarray:
    return fk(model, q).palm


def _arm_frames(model: ArmHandModel, q):
    """Frames of the 7 arm joints plus the palm, skipping the fingers."""
    frames = [None] * ARM_DOFS
    for i in range(ARM_DOFS):
        j = model.joints[i]
        R = rot_axis_angle(j.axis, q[i])
        local = make_transform(R, j.origin)
        frames[i] = local if j.parent < 0 else frames[j.parent] @ local
    palm = frames[model.palm_joint] @ make_transform(p=model.palm_offset)
    return frames, palm


def arm_jacobian(model: ArmHandModel, q) -> np.ndarray:
    """Geometric Jacobian of the palm frame wrt the 7 arm dofs (6x7:
    linear on top, angular below)."""
    frames, palm = _arm_frames(model, np.asarray(q, dtype=float))
    p_palm = palm[:3, 3]
    J = np.zeros((6, ARM_DOFS))
    for i in range(ARM_DOFS):
        frame = frames[i]
        axis_world = frame[:3, :3] @ np.asarray(model.joints[i].axis, dtype=float)
        origin_world = frame[:3, 3]
        J[:3, i] = np.cross(axis_world, p_palm - origin_world)
        J[3:, i] = axis_world
    return J


# --- inverse kinematics ------------------------------------------------------

def pose_error(T_cur: np.ndarray, T_goal: np.ndarray):
    from .transforms import orientation_error

    e_p = T_goal[:3, 3] - T_cur[:3, 3]
    e_o = orientation_error(T_cur[:3, :3], T_goal[:3, :3])
    return e_p, e_o


IK_RESTARTS = 8


IK_STALL_ITERS = 25  # give up a basin after this many non-improving steps
IK_STALL_EPS = 1e-7


def _ik_once(model, target, q_arm, lo, hi, damping, max_iters):
    q = q_arm.copy()
    lam2 = damping * damping
    best_res = np.inf
    stalled = 0
    axes = [np.asarray(model.joints[i].axis, dtype=float) for i in range(ARM_DOFS)]
    eye6 = np.eye(6)
    for _ in range(max_iters):
        frames, palm = _arm_frames(model, q)
        e_p, e_o = pose_error(palm, target)
        pos_err = np.linalg.norm(e_p)
        ori_err = np.linalg.norm(e_o)
        improved = pos_err < best_res - IK_STALL_EPS
        best_res = min(best_res, pos_err)
        if pos_err < IK_POS_TOL and ori_err < IK_ORI_TOL:
            return q.copy(), best_res
        if improved:
            stalled = 0
        else:
            stalled += 1
            if stalled > IK_STALL_ITERS:
                break
        e = np.concatenate([e_p, 0.5 * e_o])
        p_palm = palm[:3, 3]
        J = np.zeros((6, ARM_DOFS))
        for i in range(ARM_DOFS):
            axis_world = frames[i][:3, :3] @ axes[i]
            J[:3, i] = np.cross(axis_world, p_palm - frames[i][:3, 3])
            J[3:, i] = axis_world
        dq = J.T @ np.linalg.solve(J @ J.T + lam2 * eye6, e)
        step = np.max(np.abs(dq))
        if step > IK_STEP_CLAMP:
            dq *= IK_STEP_CLAMP / step
        q = np.clip(q + dq, lo, hi)
    return None, best_res


def ik_solve(model: ArmHandModel, target: np.ndarray, q_init,
             damping: float = IK_DAMPING, max_iters: int = IK_MAX_ITERS,
             restarts: int = IK_RESTARTS) -> np.ndarray:
    """Damped-least-squares IK for the 7 arm dofs; fingers pass through.

    Succeeds when palm position error < 1 mm and orientation error < 1 deg.
    Falls back to deterministic random restarts if the caller's initial
    pose basin does not converge; pass restarts=0 when the solution must
    stay on the caller's branch.
    """
    q = np.asarray(q_init, dtype=float)[:ARM_DOFS].copy()
    lo = np.array([j.limits[0] for j in model.joints[:ARM_DOFS]])
    hi = np.array([j.limits[1] for j in model.joints[:ARM_DOFS]])
    sol, best_res = _ik_once(model, target, q, lo, hi, damping, max_iters)
    if sol is not None:
        return sol
    s_lo = np.maximum(lo, -math.pi)
    s_hi = np.minimum(hi, math.pi)
    restart_rng = np.random.default_rng(
        abs(hash(tuple(np.round(target[:3, 3], 6)))) % (2 ** 32))
    for _ in range(restarts):
        q2 = restart_rng.uniform(s_lo, s_hi)
        sol, res = _ik_once(model, target, q2, lo, hi, damping, max_iters)
        if sol is not None:
            return sol
        best_res = min(best_res, res)
    raise IkDiverged(best_res)


def reach_palm_offset() -> np.ndarray:
    """Object->palm transform for the reach stage: palm REACH_SIDE_OFFSET
    to the +x side of the object, palm normal facing the object, fingers
    pointing +y (columns: palm x -> +z, palm y -> -x, palm z -> -y)."""
    R = np.array([
        [0.0, -1.0, 0.0],
        [0.0, 0.0, -1.0],
        [1.0, 0.0, 0.0],
    ])
    return make_transform(R, (REACH_SIDE_OFFSET, 0.0, 0.0))


def sample_final_poses(model: ArmHandModel, p, T0: np.ndarray, n: int,
                       rng: np.random.Generator, q_init=None):
    """Candidate arm poses reaching T(theta) = [Rz(theta), p] @ T0 for
    uniformly sampled theta; failed IK candidates are dropped."""
    if q_init is None:
        q_init = model.rest_pose[:ARM_DOFS]
    p = np.asarray(p, dtype=float)
    shoulder = np.asarray(model.joints[0].origin, dtype=float)
    max_reach = (
        sum(np.linalg.norm(np.asarray(j.origin, dtype=float))
            for j in model.joints[1:ARM_DOFS])
        + np.linalg.norm(model.palm_offset))
    out = []
    warm = q_init
    for _ in range(n):
        theta = float(rng.uniform(0.0, 2.0 * math.pi))
        T = make_transform(rot_z(theta), p) @ T0
        if np.linalg.norm(T[:3, 3] - shoulder) > max_reach:
            continue
        try:
            qa = ik_solve(model, T, warm)
        except IkDiverged:
            continue
        out.append(qa)
        warm = qa  # adjacent ring targets converge from the last solution
    if not out:
        raise NoCandidate(f"no IK solution among {n} candidates at {p}")
    return out


# --- collision ---------------------------------------------------------------

_TABLE_THICKNESS = 0.05


def scene_object_primitive(obj):
    """Posed collision primitive of a scene object (centroid frame)."""
    from .transforms import quat_to_matrix

    R = quat_to_matrix(obj.orientation)
    T = make_transform(R, obj.centroid)
    if obj.shape == "box":
        prim = G.Box((obj.width / 2, obj.width / 2, obj.height / 2))
    elif obj.shape == "cylinder":
        prim = G.Cylinder(obj.width / 2, obj.height / 2)
    else:
        prim = G.Sphere(obj.width / 2)
    return prim, T


def table_primitive(scene):
    (x0, x1), (y0, y1) = scene.table_extent
    prim = G.Box(((x1 - x0) / 2, (y1 - y0) / 2, _TABLE_THICKNESS / 2))
    T = make_transform(p=((x0 + x1) / 2, (y0 + y1) / 2, -_TABLE_THICKNESS / 2))
    return prim, T


_HAND_LINKS = tuple(
    [f"{d}_{i}" for d in DIGITS for i in range(3)] + ["palm"]
)


def collide(model: ArmHandModel, q, scene, in_hand=None, in_hand_transform=None,
            hand_as_bbox: bool = False, margin: float = 0.0,
            exclude_ids=(), include_table: bool = True):
    """Check the posed body (plus optional in-hand object) against the scene.

    Returns (hit, witness) where witness is a (link_name, object_id) pair.
    With hand_as_bbox, the hand links and in-hand object are replaced by
    their conservative world-aligned bounding box.
    """
    res = fk(model, q, with_links=True)
    obstacles = []
    for obj in scene.objects:
        if obj.id in exclude_ids or (in_hand is not None and obj.id == in_hand.id):
            continue
        prim, T = scene_object_primitive(obj)
        obstacles.append((obj.id, prim, T))
    if include_table:
        prim, T = table_primitive(scene)
        obstacles.append(("table", prim, T))

    arm_parts = [(n, *res.link_poses[n]) for n in ("upper_arm", "forearm")]
    hand_parts = [(n, *res.link_poses[n]) for n in _HAND_LINKS]
    if in_hand is not None:
        # in_hand_transform maps the palm to the object's base frame; the
        # collision primitive is centered at the centroid, half a height up
        prim, _ = scene_object_primitive(in_hand)
        lift = make_transform(p=(0.0, 0.0, in_hand.height / 2.0))
        hand_parts.append(("in_hand", prim, res.palm @ in_hand_transform @ lift))
    if hand_as_bbox:
        bbox, T_bbox = G.bounding_box([(p, T) for _, p, T in hand_parts])
        hand_parts = [("hand_bbox", bbox, T_bbox)]

    for link_name, prim, T in arm_parts + hand_parts:
        for obj_id, oprim, oT in obstacles:
            if G.distance(prim, T, oprim, oT) <= margin:
                return True, (link_name, obj_id)
    return False, None


WRIST_DOFS = (5, 6)


def select_final_pose(model: ArmHandModel, candidates, scene, in_hand=None,
                      in_hand_transform=None, finger_pose=None,
                      margin: float = 0.0, exclude_ids=()):
    """Collision-free candidate with the wrist closest to its rest angles."""
    if not candidates:
        raise NoCandidate("empty candidate list")
    rest_wrist = model.rest_pose[list(WRIST_DOFS)]
    best, best_dev = None, np.inf
    for qa in candidates:
        q = model.rest_pose.copy()
        q[:ARM_DOFS] = qa
        if finger_pose is not None:
            q[ARM_DOFS:] = finger_pose
        hit, _ = collide(model, q, scene, in_hand=in_hand,
                         in_hand_transform=in_hand_transform, margin=margin,
                         exclude_ids=exclude_ids)
        if hit:
            continue
        dev = float(np.linalg.norm(np.asarray(qa)[list(WRIST_DOFS)] - rest_wrist))
        if dev < best_dev:
            best, best_dev = qa, dev
    if best is None:
        raise AllInCollision(f"all {len(candidates)} candidates collide")
    return best


# --- mirroring ---------------------------------------------------------------

def _reflect_vec(v):
    return (-v[0], v[1], v[2])


def _reflect_point(p, plane_x: float):
    return (2.0 * plane_x - p[0], p[1], p[2])


def reflect_transform(T: np.ndarray, plane_x: float = MIRROR_PLANE_X) -> np.ndarray:
    """Conjugate a frame by the sagittal reflection (a proper rigid result)."""
    M = np.diag([-1.0, 1.0, 1.0, 1.0])
    Tp = np.array(T, dtype=float, copy=True)
    Tp[0, 3] -= plane_x
    out = M @ Tp @ M
    out[0, 3] += plane_x
    return out


def mirror_model(model: ArmHandModel, plane_x: float = MIRROR_PLANE_X) -> ArmHandModel:
    """Left-hand twin: origins/axes reflected; FK satisfies
    fk(mirror(m), -q) = reflect(fk(m, q)). Involution up to bit equality."""
    joints = []
    for i, j in enumerate(model.joints):
        origin = _reflect_point(j.origin, plane_x) if j.parent < 0 else _reflect_vec(j.origin)
        joints.append(Joint(j.name, j.parent, origin, _reflect_vec(j.axis),
                            (-j.limits[1], -j.limits[0])))
    links = [
        replace(lg, local=_reflect_vec(lg.local),
                local_rot_axis=_reflect_vec(lg.local_rot_axis),
                local_rot_angle=-lg.local_rot_angle)
        for lg in model.links
    ]
    return ArmHandModel(
        joints=joints,
        links=links,
        palm_joint=model.palm_joint,
        palm_offset=_reflect_vec(model.palm_offset),
        fingertip_joints=model.fingertip_joints,
        fingertip_offsets=tuple(_reflect_vec(o) for o in model.fingertip_offsets),
        rest_pose=-np.asarray(model.rest_pose),
        handedness="left" if model.handedness == "right" else "right",
        finger_groups=dict(model.finger_groups),
    )


def mirror_pose(q) -> np.ndarray:
    """Joint pose of the mirrored model equivalent to q on the original."""
    return -np.asarray(q, dtype=float)


# --- model document ----------------------------------------------------------

def model_to_doc(model: ArmHandModel) -> dict:
    return {
        "handedness": model.handedness,
        "palm_joint": model.palm_joint,
        "palm_offset": list(model.palm_offset),
        "fingertip_joints": list(model.fingertip_joints),
        "fingertip_offsets": [list(o) for o in model.fingertip_offsets],
        "rest_pose": [float(v) for v in model.rest_pose],
        "finger_groups": {k: list(v) for k, v in model.finger_groups.items()},
        "joints": [
            {"name": j.name, "parent": j.parent, "origin": list(j.origin),
             "axis": list(j.axis), "limits": list(j.limits)}
            for j in model.joints
        ],
        "links": [
            {"name": lg.name, "joint": lg.joint, "local": list(lg.local),
             "local_rot_axis": list(lg.local_rot_axis),
             "local_rot_angle": lg.local_rot_angle,
             "kind": lg.kind, "radius": lg.radius, "half_length": lg.half_length}
            for lg in model.links
        ],
    }


def serialize_model(model: ArmHandModel) -> str:
    return docio.dumps(BODY_HEADER, model_to_doc(model))


def parse_model(text: str) -> ArmHandModel:
    body = docio.loads(text, BODY_HEADER)
    joints = [
        Joint(d["name"], int(d["parent"]), tuple(d["origin"]), tuple(d["axis"]),
              tuple(d["limits"]))
        for d in docio.require(body, "joints")
    ]
    links = [
        LinkGeom(d["name"], int(d["joint"]), tuple(d["local"]),
                 tuple(d["local_rot_axis"]), float(d["local_rot_angle"]),
                 d["kind"], float(d["radius"]), float(d["half_length"]))
        for d in docio.require(body, "links")
    ]
    return ArmHandModel(
        joints=joints,
        links=links,
        palm_joint=int(docio.require(body, "palm_joint")),
        palm_offset=tuple(docio.require(body, "palm_offset")),
        fingertip_joints=tuple(body["fingertip_joints"]),
        fingertip_offsets=tuple(tuple(o) for o in body["fingertip_offsets"]),
        rest_pose=np.asarray(body["rest_pose"], dtype=float),
        handedness=body.get("handedness", "right"),
        finger_groups={k: list(v) for k, v in body.get("finger_groups", {}).items()},
    )
