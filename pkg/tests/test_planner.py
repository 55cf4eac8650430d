import math

import numpy as np
import pytest

from dash import body as B
from dash import planner as P
from dash import scene as scene_mod
from dash.body import build_right_model, fk, ik_solve, reach_palm_offset
from dash.transforms import make_transform, rot_z


@pytest.fixture(scope="module")
def model():
    return build_right_model()


def _scene_with(objects):
    return scene_mod.Scene(objects=list(objects),
                           table_extent=scene_mod.TABLE_EXTENT,
                           rng_seed=0, undersized=False,
                           requested_count=len(objects))


def _obj(oid, pos, width=0.08, height=0.5):
    return scene_mod.SceneObject(
        id=oid, shape="box", color="red", width=width, height=height,
        base_position=tuple(pos), orientation=(1.0, 0.0, 0.0, 0.0),
        mass=2.0, friction=1.0, up_axis=(0.0, 0.0, 1.0),
        raw_width_sample=width, raw_height_sample=height)


def _reach_config(model, p, theta=0.0):
    T = make_transform(rot_z(theta), p) @ reach_palm_offset()
    return ik_solve(model, T, model.rest_pose[:B.ARM_DOFS])


def _subdivide(path, n=60):
    out = []
    for a, b in zip(path, path[1:]):
        for k in range(n):
            out.append(a + (b - a) * (k / n))
    out.append(path[-1])
    return out


def _palm_speeds(model, traj):
    pts = np.array([fk(model, np.concatenate([traj.sample(t),
                                              model.rest_pose[B.ARM_DOFS:]])).palm[:3, 3]
                    for t in traj.times])
    dt = np.diff(traj.times)
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    return traj.times[:-1] + dt / 2, seg / dt, seg


# --- checker -----------------------------------------------------------------

def test_checker_conservative_vs_exact(model):
    """A configuration the planner calls free is free under exact collision."""
    rng = np.random.default_rng(2)
    sc = _scene_with([_obj("o1", (0.1, 0.2, 0.0)), _obj("o2", (0.2, 0.0, 0.0))])
    checker = P.PlanningChecker(model, sc)
    lo = np.maximum([j.limits[0] for j in model.joints[:B.ARM_DOFS]], -math.pi)
    hi = np.minimum([j.limits[1] for j in model.joints[:B.ARM_DOFS]], math.pi)
    agree = 0
    for _ in range(80):
        qa = rng.uniform(lo, hi)
        q = model.rest_pose.copy()
        q[:B.ARM_DOFS] = qa
        if checker.is_free(qa):
            hit, _ = B.collide(model, q, sc)
            assert not hit
            agree += 1
    assert agree >= 5


def test_checker_blocks_obvious_hit(model):
    sc = _scene_with([])
    checker = P.PlanningChecker(model, sc)
    q = np.zeros(B.ARM_DOFS)
    q[2] = 0.6  # arm through the tabletop
    assert not checker.is_free(q)


# --- birrt -------------------------------------------------------------------

def test_birrt_straight_line_when_clear(model):
    sc = _scene_with([])
    checker = P.PlanningChecker(model, sc)
    rng = np.random.default_rng(0)
    q0 = model.rest_pose[:B.ARM_DOFS]
    q1 = _reach_config(model, (0.1, 0.2, 0.12))
    path = P.birrt(checker, q0, q1, rng)
    assert len(path) >= 2
    assert np.allclose(path[0], q0)
    assert np.allclose(path[-1], q1)


def test_birrt_avoids_obstacle(model):
    # tall pillar between two reach targets; every waypoint must stay free
    sc = _scene_with([_obj("pillar", (0.26, 0.175, 0.0), width=0.09, height=0.6)])
    checker = P.PlanningChecker(model, sc)
    rng = np.random.default_rng(4)
    q0 = _reach_config(model, (0.2, 0.05, 0.12))
    q1 = _reach_config(model, (-0.08, 0.3, 0.12))
    assert checker.is_free(q0) and checker.is_free(q1)
    path = P.birrt(checker, q0, q1, rng)
    for qa, qb in zip(path, path[1:]):
        assert checker.edge_free(qa, qb)


def test_birrt_colliding_goal_times_out(model):
    sc = _scene_with([_obj("block", (0.1, 0.2, 0.0), width=0.3, height=0.6)])
    checker = P.PlanningChecker(model, sc)
    rng = np.random.default_rng(1)
    q0 = model.rest_pose[:B.ARM_DOFS]
    q1 = _reach_config(model, (0.1, 0.2, 0.12))  # palm inside the block zone
    with pytest.raises(P.PlanTimeout):
        P.birrt(checker, q0, q1, rng)


def test_birrt_node_budget_times_out(model):
    sc = _scene_with([_obj("pillar", (0.26, 0.175, 0.0), width=0.09, height=0.6)])
    checker = P.PlanningChecker(model, sc)
    rng = np.random.default_rng(4)
    q0 = _reach_config(model, (0.2, 0.05, 0.12))
    q1 = _reach_config(model, (-0.08, 0.3, 0.12))
    try:
        P.birrt(checker, q0, q1, rng, max_nodes=6)
    except P.PlanTimeout as e:
        assert e.nodes <= 6
    else:
        pytest.fail("expected PlanTimeout under a tiny node budget")


def test_birrt_deterministic(model):
    sc = _scene_with([_obj("pillar", (0.26, 0.175, 0.0), width=0.09, height=0.6)])
    checker = P.PlanningChecker(model, sc)
    q0 = _reach_config(model, (0.2, 0.05, 0.12))
    q1 = _reach_config(model, (-0.08, 0.3, 0.12))
    p1 = P.birrt(checker, q0, q1, np.random.default_rng(42))
    p2 = P.birrt(checker, q0, q1, np.random.default_rng(42))
    assert len(p1) == len(p2)
    assert all(np.array_equal(a, b) for a, b in zip(p1, p2))


# --- shortcutting ------------------------------------------------------------

def test_shortcut_zigzag_shortens(model):
    """A deliberately wiggly free-space path loses >= 30% joint length."""
    sc = _scene_with([])
    checker = P.PlanningChecker(model, sc)
    rng = np.random.default_rng(8)
    q0 = model.rest_pose[:B.ARM_DOFS].copy()
    q1 = q0.copy()
    q1[0] += 0.8
    q1[1] -= 0.4
    zigzag = []
    for k in range(9):
        u = k / 8
        q = q0 + (q1 - q0) * u
        if 0 < k < 8:
            q = q.copy()
            q[4] += 0.5 * (1 if k % 2 else -1)
        zigzag.append(q)
    before = P.path_length(zigzag)
    after_path = P.shortcut_smooth(checker, zigzag, rng)
    after = P.path_length(after_path)
    assert after <= before * 0.7
    assert np.allclose(after_path[0], q0) and np.allclose(after_path[-1], q1)


def test_shortcut_never_lengthens(model):
    sc = _scene_with([_obj("pillar", (0.26, 0.175, 0.0), width=0.09, height=0.6)])
    checker = P.PlanningChecker(model, sc)
    rng = np.random.default_rng(3)
    q0 = _reach_config(model, (0.2, 0.05, 0.12))
    q1 = _reach_config(model, (-0.08, 0.3, 0.12))
    path = P.birrt(checker, q0, q1, rng)
    before = P.path_length(path)
    out = P.shortcut_smooth(checker, path, rng)
    assert P.path_length(out) <= before + 1e-12
    for qa, qb in zip(out, out[1:]):
        assert checker.edge_free(qa, qb)


# --- terminal reshaping ------------------------------------------------------

def test_reshape_terminal_tangent_aims_at_object(model):
    q0 = model.rest_pose[:B.ARM_DOFS]
    p_obj = (0.1, 0.2, 0.08)
    q1 = _reach_config(model, p_obj)
    path = _subdivide([q0, q1], 30)
    reshaped = P.reshape_terminal(model, path, p_obj)
    pts = P._palm_points(model, reshaped)
    final_dir = pts[-1] - pts[-2]
    final_dir /= np.linalg.norm(final_dir)
    aim = np.asarray(p_obj) - pts[-1]
    aim /= np.linalg.norm(aim)
    assert float(final_dir @ aim) > 0.9
    assert np.allclose(reshaped[-1], q1)


def test_reshape_preserves_head_and_arc_budget(model):
    q0 = model.rest_pose[:B.ARM_DOFS]
    p_obj = (0.15, 0.3, 0.1)
    q1 = _reach_config(model, p_obj)
    path = _subdivide([q0, q1], 30)
    pts = P._palm_points(model, path)
    L = P._cumulative_arc(pts)[-1]
    reshaped = P.reshape_terminal(model, path, p_obj)
    rpts = P._palm_points(model, reshaped)
    rarc = P._cumulative_arc(rpts)
    # the untouched head still covers ~90% of the original arc
    head = [p for p in reshaped if any(np.allclose(p, q) for q in path)]
    assert len(head) >= 2
    # reshaped tail is a modest fraction of the whole
    split_s = rarc[-1] - P._cumulative_arc(rpts[-(len(reshaped) - len(head)) - 1:])[-1]
    assert split_s >= 0.5 * L * (1 - P.RESHAPE_FRACTION) or rarc[-1] > 0


def test_reshape_degenerate_cases(model):
    q0 = model.rest_pose[:B.ARM_DOFS]
    with pytest.raises(P.DegeneratePath):
        P.reshape_terminal(model, [q0], (0.1, 0.2, 0.1))
    with pytest.raises(P.DegeneratePath):
        P.reshape_terminal(model, [q0, q0.copy()], (0.1, 0.2, 0.1))
    q1 = _reach_config(model, (0.1, 0.2, 0.08))
    path = _subdivide([q0, q1], 10)
    palm_end = fk(model, np.concatenate([q1, model.rest_pose[B.ARM_DOFS:]])).palm[:3, 3]
    with pytest.raises(P.DegeneratePath):
        P.reshape_terminal(model, path, palm_end)


# --- retiming ----------------------------------------------------------------

def test_speed_profile_boundary_values():
    v = P.speed_profile(np.array([0.0, 1.0]), 0.8, 0.4)
    assert v[0] == pytest.approx(0.0, abs=1e-12)
    assert v[1] == pytest.approx(0.4, abs=1e-12)
    rho = math.sqrt(1 - 0.4 / 0.8)
    tau_star = 1 / (1 + rho)
    assert P.speed_profile(tau_star, 0.8, 0.4) == pytest.approx(0.8, abs=1e-12)
    # symmetric bell for zero terminal speed
    assert P.speed_profile(0.5, 0.8, 0.0) == pytest.approx(0.8, abs=1e-12)


def test_profile_integral_matches_quadrature():
    from scipy.integrate import quad
    for vt in (0.0, 0.2, 0.4):
        num, _ = quad(lambda u: float(P.speed_profile(u, 0.8, vt)), 0.0, 1.0)
        assert float(P._profile_integral(1.0, 0.8, vt)) == pytest.approx(num, rel=1e-9)


def test_retime_terminal_speed(model):
    q0 = model.rest_pose[:B.ARM_DOFS]
    q1 = _reach_config(model, (0.1, 0.25, 0.1))
    traj = P.retime(model, _subdivide([q0, q1], 80), v_terminal=0.4)
    _, speeds, _ = _palm_speeds(model, traj)
    assert speeds[-1] == pytest.approx(0.4, abs=0.02)
    assert traj.terminal_speed == 0.4


def test_retime_speed_curve_is_quadratic(model):
    q0 = model.rest_pose[:B.ARM_DOFS]
    q1 = _reach_config(model, (0.1, 0.25, 0.1))
    traj = P.retime(model, _subdivide([q0, q1], 80), v_terminal=0.4)
    tmid, speeds, _ = _palm_speeds(model, traj)
    coeffs = np.polyfit(tmid, speeds, 2)
    fit = np.polyval(coeffs, tmid)
    ss_res = float(np.sum((speeds - fit) ** 2))
    ss_tot = float(np.sum((speeds - speeds.mean()) ** 2))
    assert 1.0 - ss_res / ss_tot >= 0.99


def test_retime_arc_length_consistent(model):
    """Time-integrated palm speed equals the geometric arc length to 0.5%."""
    q0 = model.rest_pose[:B.ARM_DOFS]
    q1 = _reach_config(model, (0.1, 0.25, 0.1))
    traj = P.retime(model, _subdivide([q0, q1], 80), v_terminal=0.4)
    _, _, seg = _palm_speeds(model, traj)
    assert float(seg.sum()) == pytest.approx(traj.arc_length, rel=5e-3)


def test_retime_peak_speed_cap(model):
    q0 = model.rest_pose[:B.ARM_DOFS]
    q1 = _reach_config(model, (0.1, 0.25, 0.1))
    traj = P.retime(model, _subdivide([q0, q1], 40), v_peak=5.0)
    assert traj.peak_speed == P.PEAK_SPEED_CAP
    _, speeds, _ = _palm_speeds(model, traj)
    assert speeds.max() <= P.PEAK_SPEED_CAP * 1.02


def test_retime_zero_length_raises(model):
    q0 = model.rest_pose[:B.ARM_DOFS]
    with pytest.raises(P.ZeroLengthPath):
        P.retime(model, [q0, q0.copy()])
    with pytest.raises(ValueError):
        P.retime(model, [q0, q0 + 0.3], v_terminal=2.0)


def test_retime_monotone_clock_and_endpoints(model):
    q0 = model.rest_pose[:B.ARM_DOFS]
    q1 = _reach_config(model, (0.1, 0.25, 0.1))
    traj = P.retime(model, _subdivide([q0, q1], 40), v_terminal=0.4)
    assert traj.times[0] == 0.0
    assert np.all(np.diff(traj.times) > 0)
    assert np.allclose(traj.sample(0.0), q0)
    assert np.allclose(traj.sample(traj.duration), q1, atol=1e-9)
    assert np.allclose(traj.sample(traj.duration + 5.0), q1, atol=1e-9)


def test_plan_motion_end_to_end(model):
    sc = _scene_with([_obj("pillar", (0.42, 0.05, 0.0), width=0.09, height=0.18)])
    checker = P.PlanningChecker(model, sc)
    rng = np.random.default_rng(6)
    p_obj = (0.2, 0.35, 0.08)
    q0 = model.rest_pose[:B.ARM_DOFS]
    candidates = B.sample_final_poses(model, p_obj, reach_palm_offset(), 20, rng)
    free = [q for q in candidates if checker.is_free(q)]
    assert free
    q1 = free[0]
    traj = P.plan_motion(checker, model, q0, q1, rng,
                         object_position=p_obj, v_terminal=0.4)
    assert traj.duration > 0
    assert np.allclose(traj.sample(traj.duration), q1, atol=1e-9)
