import math

import numpy as np
import pytest

from dash import body as B
from dash import scene as scene_mod
from dash import simcontrol as S
from dash.body import build_right_model, fk


@pytest.fixture(scope="module")
def model():
    return build_right_model()


def _object(oid, shape, base, width=0.07, height=0.14, mass=1.0, friction=1.0):
    return scene_mod.SceneObject(
        id=oid, shape=shape, color="red", width=width, height=height,
        base_position=tuple(base), orientation=(1.0, 0.0, 0.0, 0.0),
        mass=mass, friction=friction, up_axis=(0.0, 0.0, 1.0),
        raw_width_sample=width, raw_height_sample=height)


def _state(model, objects, focus=None):
    sc = scene_mod.Scene(objects=list(objects), table_extent=scene_mod.TABLE_EXTENT,
                         rng_seed=0, undersized=False, requested_count=len(objects))
    st = S.initial_state(model, sc)
    st.focus_id = focus
    return st


def _curl_fingers(model, q, fingers=("index", "middle", "ring", "little")):
    q = q.copy()
    for d in fingers:
        g = model.finger_groups[d]
        q[g[1]], q[g[2]], q[g[3]] = 1.2, 1.0, 0.6
    tg = model.finger_groups["thumb"]
    q[tg[0]], q[tg[1]], q[tg[3]], q[tg[5]] = -1.0, 1.0, 0.8, 0.5
    return q


def _grasped_state(model, mass=1.0, friction=1.0, a=0.05, b=0.03,
                   fingers=("index", "middle", "ring", "little")):
    """State with a cylinder nestled in the closed hand at the rest palm."""
    palm = fk(model, model.rest_pose).palm
    center = palm[:3, 3] + a * palm[:3, 1] + b * (-palm[:3, 2])
    obj = _object("tgt", "cylinder", center - [0, 0, 0.07],
                  mass=mass, friction=friction)
    st = _state(model, [obj], focus="tgt")
    st.q = _curl_fingers(model, st.q, fingers)
    return st


# --- PD law ------------------------------------------------------------------

def test_pd_matches_scalar_oracle():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = 29
        q = rng.normal(size=n)
        qd = rng.normal(size=n)
        qb = rng.normal(size=n)
        kp = rng.uniform(1, 100)
        kd = rng.uniform(1, 3)
        got = S.pd_desired_velocity(q, qd, qb, kp, kd)
        for i in range(n):
            want = -kp * (q[i] - qb[i]) - (kd - 1.0) * qd[i]
            assert abs(got[i] - want) <= 1e-12 * max(1.0, abs(want))


def test_pd_zero_error_zero_velocity():
    q = np.ones(29)
    assert np.all(S.pd_desired_velocity(q, np.zeros(29), q) == 0.0)


def test_default_gains():
    assert S.KP == 50.0 and S.KD == 1.5
    assert S.DT == pytest.approx(1.0 / 240.0)


# --- stepping ----------------------------------------------------------------

def test_rest_scene_is_bit_stable(model):
    st = _state(model, [_object("a", "box", (0.1, 0.2, 0.0)),
                        _object("b", "cylinder", (0.2, 0.0, 0.0))])
    q0 = st.q.tobytes()
    pos0 = [o.position.tobytes() for o in st.objects]
    ori0 = [o.orientation.tobytes() for o in st.objects]
    q_bar = st.q.copy()
    for _ in range(100):
        S.step(st, q_bar)
    assert st.q.tobytes() == q0
    assert [o.position.tobytes() for o in st.objects] == pos0
    assert [o.orientation.tobytes() for o in st.objects] == ori0


def test_convergence_within_two_seconds(model):
    st = _state(model, [])
    target = st.q.copy()
    target[:7] += np.array([0.4, -0.3, 0.2, 0.5, -0.4, 0.3, -0.2])
    elapsed = S.hold_until_converged(st, target, tol=1e-3, timeout=2.0)
    assert elapsed < 2.0
    assert float(np.max(np.abs(st.q - target))) < 1e-3


def test_velocity_and_acceleration_clamps(model):
    st = _state(model, [])
    q_bar = st.q + 5.0  # huge error => saturation
    prev_qd = st.qd.copy()
    for _ in range(10):
        S.step(st, q_bar)
        assert np.all(np.abs(st.qd) <= S.VEL_LIMIT + 1e-12)
        assert np.all(np.abs(st.qd - prev_qd) <= S.ACCEL_LIMIT * S.DT + 1e-12)
        prev_qd = st.qd.copy()


def test_step_respects_joint_limits(model):
    st = _state(model, [])
    q_bar = st.q + 100.0
    for _ in range(200):
        S.step(st, q_bar)
    lo = np.array([j.limits[0] for j in model.joints])
    hi = np.array([j.limits[1] for j in model.joints])
    assert np.all(st.q >= lo - 1e-12) and np.all(st.q <= hi + 1e-12)


# --- grip target -------------------------------------------------------------

def test_transport_grip_target_formula():
    q = np.array([0.5, 0.5, 0.5])
    qb = np.array([0.9, 0.1, 0.5])
    out = S.transport_grip_target(q, qb)
    assert out[0] == pytest.approx(0.6)  # command above pose: push further
    assert out[1] == pytest.approx(0.4)
    assert out[2] == pytest.approx(0.5)  # sign(0) = 0: no change


# --- contacts and grasping ---------------------------------------------------

def test_contact_flags_shape_and_empty(model):
    st = _state(model, [_object("a", "box", (0.1, 0.2, 0.0))])
    flags = S.contact_flags(st)  # no focus set
    assert flags.shape == (16,)
    assert not flags.any()
    flags = S.contact_flags(st, "a")  # hand far from the object
    assert not flags.any()


def test_grasp_predicate_holds_in_wrap(model):
    st = _grasped_state(model)
    assert S.grasp_predicate(st, "tgt")
    per = S.digit_contacts(S.contact_flags(st, "tgt"))
    assert per["thumb"]
    assert sum(per[d] for d in ("index", "middle", "ring", "little")) >= 2


def test_grasp_predicate_fails_open_hand(model):
    st = _grasped_state(model)
    st.q = st.model.rest_pose.copy()  # open the hand again
    assert not S.grasp_predicate(st, "tgt")


def test_grasp_predicate_fails_far_palm(model):
    st = _grasped_state(model, a=0.2)  # object well outside the hand
    assert not S.grasp_predicate(st, "tgt")


def test_attach_and_rigid_transport(model):
    st = _grasped_state(model)
    assert S.attach_if_grasped(st, "tgt")
    obj = st.by_id("tgt")
    rel0 = np.linalg.inv(st.palm) @ np.vstack([
        np.column_stack([np.eye(3), obj.centroid]), [0, 0, 0, 1]])
    q_bar = st.q.copy()
    q_bar[:7] += np.array([0.3, -0.2, 0.1, 0.3, 0.0, -0.2, 0.1])
    for _ in range(240):
        S.step(st, q_bar)
    rel1 = np.linalg.inv(st.palm) @ np.vstack([
        np.column_stack([np.eye(3), obj.centroid]), [0, 0, 0, 1]])
    assert np.allclose(rel0[:3, 3], rel1[:3, 3], atol=1e-9)


def test_attach_requires_grasp(model):
    st = _state(model, [_object("a", "box", (0.1, 0.2, 0.0))], focus="a")
    assert not S.attach_if_grasped(st, "a")
    assert st.attached_id is None


# --- settling ----------------------------------------------------------------

def test_release_drops_to_table(model):
    st = _grasped_state(model)
    assert S.attach_if_grasped(st, "tgt")
    obj = st.by_id("tgt")
    obj.position = np.array([0.1, 0.2, 0.08])  # held in the air
    S.release(st)
    assert st.attached_id is None
    assert obj.position[2] == pytest.approx(0.0)


def test_settle_stacks_on_support(model):
    bottom = _object("bot", "box", (0.1, 0.2, 0.0), width=0.1, height=0.15)
    top = _object("top", "box", (0.11, 0.21, 0.2), width=0.06, height=0.13)
    st = _state(model, [bottom, top])
    S._settle(st)
    t = st.by_id("top")
    assert t.position[2] == pytest.approx(0.15)
    assert not t.toppled


def test_settle_topples_off_center(model):
    bottom = _object("bot", "box", (0.1, 0.2, 0.0), width=0.1, height=0.15)
    top = _object("top", "box", (0.2, 0.2, 0.2), width=0.06, height=0.13)
    st = _state(model, [bottom, top])
    S._settle(st)
    t = st.by_id("top")
    assert t.position[2] == pytest.approx(0.0)


def test_sphere_cannot_support(model):
    ball = _object("ball", "sphere", (0.1, 0.2, 0.0), width=0.08, height=0.08)
    top = _object("top", "box", (0.1, 0.2, 0.2), width=0.06, height=0.13)
    st = _state(model, [ball, top])
    S._settle(st)
    assert st.by_id("top").position[2] == pytest.approx(0.0)


def test_toppled_object_loses_upright(model):
    obj = _object("o", "box", (0.1, 0.2, 0.1))
    st = _state(model, [obj])
    S._topple(st.by_id("o"))
    up = st.by_id("o").up_axis
    assert abs(up[2]) < 1e-6


# --- drop test ---------------------------------------------------------------

def test_drop_test_requires_grasp(model):
    st = _state(model, [_object("a", "box", (0.1, 0.2, 0.0))], focus="a")
    with pytest.raises(S.DropTestWithoutGrasp):
        S.drop_test(st, "a")


def test_drop_test_light_object_passes(model):
    st = _grasped_state(model, mass=1.0, friction=1.0)
    assert S.attach_if_grasped(st, "tgt")
    held, penalty = S.drop_test(st, "tgt")
    assert held
    assert penalty == 0.0
    assert st.attached_id == "tgt"


def test_drop_test_full_wrap_holds_worst_case(model):
    """A complete power wrap holds even the heaviest, most slippery object."""
    st = _grasped_state(model, mass=5.0, friction=0.8)
    assert S.attach_if_grasped(st, "tgt")
    held, penalty = S.drop_test(st, "tgt")
    assert held
    assert penalty == 0.0


def test_drop_test_weak_grip_heavy_slippery_fails(model):
    st = _grasped_state(model, mass=5.0, friction=0.8,
                        fingers=("index", "middle"))
    assert S.attach_if_grasped(st, "tgt")
    held, penalty = S.drop_test(st, "tgt")
    assert not held
    assert penalty <= -15.0
    assert penalty == pytest.approx(round(penalty / -15.0) * -15.0)
    assert st.attached_id is None


def test_drop_test_penalty_scale(model):
    """Full-window failure accrues exactly 16 control-step penalties."""
    st = _grasped_state(model, mass=5.0, friction=0.8,
                        fingers=("index", "middle"))
    assert S.attach_if_grasped(st, "tgt")
    capacity = S.grip_capacity(st, "tgt")
    full_pull = 2.0 * 5.0 * S.GRAVITY
    assert capacity < full_pull  # sanity: this grasp must slip
    held, penalty = S.drop_test(st, "tgt")
    steps_failed = -penalty / 15.0
    assert 1 <= steps_failed <= S.DROP_TEST_CONTROL_STEPS
