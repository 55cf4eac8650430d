import math

import numpy as np
import pytest

from dash import body as B
from dash import envs as E
from dash import scene as scene_mod
from dash import simcontrol as S
from dash.body import build_right_model, fk


@pytest.fixture(scope="module")
def model():
    return build_right_model()


@pytest.fixture(scope="module")
def corpus(model):
    return E.generate_grasp_corpus(model, n=12, seed=3)


def _object(oid, shape, base, width=0.07, height=0.14, mass=2.0, friction=1.0):
    return scene_mod.SceneObject(
        id=oid, shape=shape, color="red", width=width, height=height,
        base_position=tuple(base), orientation=(1.0, 0.0, 0.0, 0.0),
        mass=mass, friction=friction, up_axis=(0.0, 0.0, 1.0),
        raw_width_sample=width, raw_height_sample=height)


def _random_state(model, rng):
    lo = np.array([j.limits[0] for j in model.joints])
    hi = np.array([j.limits[1] for j in model.joints])
    q = lo + rng.uniform(0.1, 0.9, size=len(lo)) * (hi - lo)
    obj = _object("o", ("box", "cylinder")[int(rng.integers(2))],
                  rng.uniform([-0.1, -0.1, 0.0], [0.25, 0.5, 0.1]))
    sc = scene_mod.Scene(objects=[obj], table_extent=scene_mod.TABLE_EXTENT,
                         rng_seed=0, undersized=False, requested_count=1)
    st = S.initial_state(model, sc, q=q)
    st.focus_id = "o"
    st.contact_flags = rng.uniform(size=16) < 0.3
    return st


# --- reward oracles ------------------------------------------------------------

def _norm(v):
    return math.sqrt(sum(float(x) * float(x) for x in v))


def _oracle_grasp(state, p_bar, drop):
    """Straight-line recomputation of the grasp reward from first values."""
    obj = state.by_id("o")
    p = obj.centroid
    r_o = -_norm([p[0] - p_bar[0], p[1] - p_bar[1]])
    res = fk(state.model, state.q)
    tips = res.fingertips
    palm = res.palm[:3, 3]
    r_p = -5.0 * _norm(tips[0] - p)
    for t in tips[1:]:
        r_p -= _norm(t - p)
    r_p -= 2.0 * _norm(palm - p)
    r_c = 0.0
    for k in range(16):
        if state.contact_flags[k]:
            r_c += 5.0 if k < 3 else 1.0
    names = ("index", "middle", "ring", "little")
    qs = [list(state.q[state.model.finger_groups[n]]) for n in names]
    r_s = 0.0
    for i in range(4):
        r_s -= _norm([a - b for a, b in zip(qs[i], qs[(i + 1) % 4])])
    return 10.0 * r_o + r_p + 2.0 * r_c + 1.5 * r_s + drop


def _oracle_place(state, p_bar, q_bar, released_near):
    obj = state.by_id("o")
    p = obj.centroid
    dist = _norm(p - np.asarray(p_bar))
    upright = float(obj.up_axis[2])
    r_o = -dist + 3.0 * upright
    r_a = 1.0 / (_norm(np.asarray(q_bar) - state.q) + 1.0)
    r_c = 0.0
    for k in range(16):
        if state.contact_flags[k]:
            r_c += 5.0 if k < 3 else 1.0
    names = ("index", "middle", "ring", "little")
    qs = [list(state.q[state.model.finger_groups[n]]) for n in names]
    r_s = 0.0
    for i in range(4):
        r_s -= _norm([a - b for a, b in zip(qs[i], qs[(i + 1) % 4])])
    r_b = 0.0
    if dist <= E.BONUS_DIST and upright >= E.BONUS_UPRIGHT:
        r_b += 5.0
    if released_near:
        r_b += 20.0
    return 5.0 * r_o + 10.0 * r_a - 0.5 * r_c + 0.3 * r_s + r_b


def test_reward_grasp_matches_oracle_1000_states(model):
    rng = np.random.default_rng(1)
    for _ in range(1000):
        st = _random_state(model, rng)
        p_bar = rng.uniform([-0.1, -0.1, 0.0], [0.25, 0.5, 0.2])
        drop = float(rng.choice([0.0, -15.0, -240.0]))
        rb = E.reward_grasp(st, "o", p_bar, drop, flags=st.contact_flags)
        want = _oracle_grasp(st, p_bar, drop)
        assert rb.total == pytest.approx(want, abs=1e-9)


def test_reward_place_matches_oracle_1000_states(model):
    rng = np.random.default_rng(2)
    for _ in range(1000):
        st = _random_state(model, rng)
        p_bar = rng.uniform([-0.1, -0.1, 0.0], [0.25, 0.5, 0.3])
        q_bar = st.q + rng.uniform(-0.05, 0.05, size=st.q.shape)
        released = bool(rng.integers(2))
        rb = E.reward_place(st, "o", p_bar, q_bar, released_near=released,
                            flags=st.contact_flags)
        want = _oracle_place(st, p_bar, q_bar, released)
        assert rb.total == pytest.approx(want, abs=1e-9)


def test_reward_weights_structure(model):
    """Grasp reward responds 10x to the object term, place 5x, etc."""
    rng = np.random.default_rng(3)
    st = _random_state(model, rng)
    p_bar = np.array([0.1, 0.2, 0.1])
    rb = E.reward_grasp(st, "o", p_bar, -15.0, flags=st.contact_flags)
    assert rb.total == pytest.approx(
        10 * rb.object_term + rb.closure_term + 2 * rb.contact_term
        + 1.5 * rb.shaping_term + rb.drop_term, abs=1e-12)
    rp = E.reward_place(st, "o", p_bar, st.q, flags=st.contact_flags)
    assert rp.total == pytest.approx(
        5 * rp.object_term + 10 * rp.action_term - 0.5 * rp.contact_term
        + 0.3 * rp.shaping_term + rp.bonus_term, abs=1e-12)


def test_place_bonus_thresholds(model):
    rng = np.random.default_rng(4)
    st = _random_state(model, rng)
    obj = st.by_id("o")
    p_bar = obj.centroid.copy()
    rb = E.reward_place(st, "o", p_bar, st.q, flags=st.contact_flags)
    assert rb.bonus_term == 5.0  # exactly at the target, upright
    rb = E.reward_place(st, "o", p_bar + [0.05, 0, 0], st.q,
                        flags=st.contact_flags)
    assert rb.bonus_term == 0.0
    rb = E.reward_place(st, "o", p_bar, st.q, released_near=True,
                        flags=st.contact_flags)
    assert rb.bonus_term == 25.0


# --- constants -----------------------------------------------------------------

def test_env_constants():
    assert E.K_DECIMATION == 6
    assert E.GAMMA == 0.99
    assert E.HORIZON_GRASP == 150
    assert E.HORIZON_PLACE == 300
    assert E.ACTION_BOUND == 0.05
    assert E.STACK_FRACTION == 0.7
    assert E.GRASP_CORPUS_SIZE == 500


# --- grasp corpus ----------------------------------------------------------------

def test_corpus_deterministic_and_valid(model, corpus):
    again = E.generate_grasp_corpus(model, n=12, seed=3)
    assert len(corpus) == 12
    for a, b in zip(corpus, again):
        assert np.array_equal(a.q, b.q)
        assert a.target.width == b.target.width
    for entry in corpus:
        sc = scene_mod.Scene(objects=[entry.target],
                             table_extent=scene_mod.TABLE_EXTENT,
                             rng_seed=0, undersized=False, requested_count=1)
        st = S.initial_state(model, sc, q=entry.q)
        st.focus_id = entry.target.id
        assert S.grasp_predicate(st, entry.target.id)


# --- environments ----------------------------------------------------------------

def _easy_grasp_spec(model, rng):
    obj = _object("target", "cylinder", (0.1, 0.2, 0.0), width=0.07,
                  height=0.15, mass=1.5, friction=1.1)
    p_bar = np.array([0.1, 0.2, obj.height / 2])
    return E.EpisodeSpec(kind="grasp", target=obj, p_bar=p_bar)


def test_grasp_env_action_clipping(model):
    env = E.GraspEnv(model, seed=0)
    env.reset(_easy_grasp_spec(model, env.rng))
    qb0 = env.q_bar.copy()
    big = E.Action(delta_q_bar=np.full(model.dof_count, 10.0))
    env.env_step(big)
    assert np.all(env.q_bar - qb0 <= E.ACTION_BOUND + 1e-12)


def test_grasp_env_observation_shape(model):
    env = E.GraspEnv(model, seed=0)
    obs = env.reset(_easy_grasp_spec(model, env.rng))
    assert obs.q.shape == (29,)
    assert obs.qd_arm.shape == (7,)  # finger velocities are not observed
    assert obs.q_bar_prev.shape == (29,)
    assert obs.contacts.shape == (16,)
    assert obs.shape_onehot.tolist() == [0.0, 1.0, 0.0]
    assert obs.vision_object is None


def test_scripted_grasp_policy_succeeds(model):
    env = E.GraspEnv(model, seed=0)
    spec = _easy_grasp_spec(model, env.rng)
    ret, steps, info = E.run_policy(env, E.ScriptedGraspPolicy(model), spec)
    assert steps == E.HORIZON_GRASP
    assert info["grasped"]
    assert info["drop_test_held"]


def test_grasp_env_unattached_penalty(model):
    env = E.GraspEnv(model, seed=0)
    spec = _easy_grasp_spec(model, env.rng)
    env.reset(spec)
    zero = E.Action(delta_q_bar=np.zeros(model.dof_count))
    rb = None
    while not env.done:
        _, rb, _, info = env.env_step(zero)
    assert not info["grasped"]
    assert rb.drop_term == E.MISSED_GRASP_PENALTY == -240.0


def test_place_env_requires_corpus(model):
    env = E.PlaceEnv(model, seed=0, corpus=[])
    with pytest.raises(E.EmptyGraspCorpus):
        env.reset()


def test_place_env_vision_is_delayed_estimate(model, corpus):
    env = E.PlaceEnv(model, seed=1, corpus=corpus)
    obs = env.reset()
    assert obs.vision_object is not None
    assert obs.vision_up is not None
    held = env.state.by_id(env.spec.target.id)
    # exact noise profile: the delayed estimate matches some recent pose
    assert np.linalg.norm(obs.vision_object - held.centroid) < 0.05


def test_place_env_split_fractions(model, corpus):
    env = E.PlaceEnv(model, seed=7, corpus=corpus)
    kinds = []
    for _ in range(40):
        env.reset()
        kinds.append(env.spec.kind)
    frac = kinds.count("stack") / len(kinds)
    assert 0.5 <= frac <= 0.9


def _place_spec(model, corpus, stack=False):
    entry = corpus[0]
    bottom = None
    if stack:
        bottom = _object("bottom", "box", (0.05, 0.25, 0.0), width=0.1,
                         height=0.15)
        p_bar = np.array([0.05, 0.25, 0.15 + entry.target.height / 2])
        kind = "stack"
    else:
        p_bar = np.array([0.05, 0.25, entry.target.height / 2])
        kind = "place"
    return E.EpisodeSpec(kind=kind, target=entry.target, p_bar=p_bar,
                         bottom=bottom, q_init=entry.q,
                         attach_transform=entry.attach_transform)


def test_scripted_place_policy_places(model, corpus):
    env = E.PlaceEnv(model, seed=0, corpus=corpus)
    spec = _place_spec(model, corpus, stack=False)
    env.reset(spec)
    policy = E.ScriptedPlacePolicy(model)
    obs = env._obs()
    info = {}
    while not env.done:
        obs, rb, done, info = env.env_step(policy(obs))
        if info["released"] and env.steps > 10:
            break
    obj = env.state.by_id(spec.target.id)
    assert info["released"]
    assert not obj.toppled
    assert np.linalg.norm(obj.centroid[:2] - spec.p_bar[:2]) < 0.08


def test_scripted_stack_policy_stacks(model, corpus):
    env = E.PlaceEnv(model, seed=0, corpus=corpus)
    spec = _place_spec(model, corpus, stack=True)
    env.reset(spec)
    policy = E.ScriptedPlacePolicy(model)
    obs = env._obs()
    info = {}
    while not env.done:
        obs, rb, done, info = env.env_step(policy(obs))
        if info["released"] and env.steps > 10:
            break
    obj = env.state.by_id(spec.target.id)
    assert info["released"]
    assert not obj.toppled
    assert obj.position[2] == pytest.approx(0.15, abs=0.02)


def test_run_policy_returns_discounted(model):
    env = E.GraspEnv(model, seed=0)
    spec = _easy_grasp_spec(model, env.rng)
    ret, steps, info = E.run_policy(env, lambda obs: E.Action(
        delta_q_bar=np.zeros(model.dof_count)), spec)
    assert steps == E.HORIZON_GRASP
    assert isinstance(ret, float)
