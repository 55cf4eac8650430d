"""Batch benchmark: randomized place and stack trials through the full
pipeline (perceive, plan a reach, grasp, plan a transport, place or stack,
retract) with table-style success reporting.

A trial is classified `plan_failure` exactly when a planning-stage
operation raises (no reachable final pose or no collision-free path);
`grasp_failure` when the hand never latches the target or the grip fails
the pull test; `place_failure` when the released object misses the
destination. Success requires the final center of mass within 10 cm of
the destination in the horizontal plane and at least 5 cm above the
destination height (both bounds inclusive).
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import body as B
from . import command_lang as L
from . import docio
from . import envs as E
from . import perception as V
from . import planner as P
from . import scene as scene_mod
from . import simcontrol as S

REPORT_HEADER = "dash-report/1"
OUTCOMES = ("success", "plan_failure", "grasp_failure", "place_failure",
            "ambiguous_command")
SUCCESS_XY = 0.10  # m, inclusive
SUCCESS_Z_MARGIN = 0.05  # m above destination height, inclusive
HOVER = 0.20  # m above the destination during transport
LIFT_HEIGHT = 0.14  # m raised straight up after grasping / before retracting
GRASP_STEP_CAP = 140  # control steps allotted to the grasp interaction
GRASP_ATTEMPTS = 2  # a weak first grip is reopened and wrapped once more
REOPEN_STEPS = 24  # control steps spent reopening between grasp attempts
PLACE_STEP_CAP = 340  # covers the stall-escalation path of the place policy
SETTLE_STEPS = 4
GRIP_SETTLE_STEPS = 5
RING_CANDIDATES = 16

PLAN_ERRORS = (P.PlanTimeout, P.DegeneratePath, P.ZeroLengthPath,
               B.NoCandidate, B.AllInCollision, B.IkDiverged)

STAGES = ("perceive", "plan_reach", "reach", "grasp", "plan_transport",
          "transport", "place", "plan_retract")

SAMPLE_EVERY = 2  # control steps between observer pose samples (20 Hz)


class PipelineObserver:
    """Optional hook points for streaming a trial's progress.

    `on_stage` fires when a pipeline stage begins, `on_plan` when a motion
    plan is ready, and `on_sample` at most every SAMPLE_EVERY control steps
    while the simulation advances. All default to no-ops.
    """

    def on_stage(self, stage: str):
        pass

    def on_plan(self, stage: str, traj, model):
        pass

    def on_sample(self, env):
        pass


@dataclass
class TrialResult:
    seed: int
    kind: str  # "place" | "stack"
    outcome: str  # one of OUTCOMES
    target_id: str = ""
    final_position: tuple = None  # object center of mass at trial end
    destination: tuple = None  # ground-truth destination (x, y, z_surface)
    timings: dict = field(default_factory=dict)  # stage -> seconds
    sim_steps: int = 0
    trace: dict = field(default_factory=dict)  # replay reference
    note: str = ""


@dataclass
class Report:
    mode: str
    n_place: int
    n_stack: int
    rates: dict  # {overall,place,stack} x {all,excluding} -> fraction
    counts: dict  # same keys -> (successes, denominator)
    histogram: dict  # outcome -> count
    steps_per_second: float
    wall_time: float
    trials: list = field(default_factory=list)


def success_criterion(final_com, destination) -> bool:
    """Horizontal distance within 10 cm and center of mass at least 5 cm
    above the destination height; both boundaries inclusive."""
    final_com = np.asarray(final_com, dtype=float)
    destination = np.asarray(destination, dtype=float)
    xy = float(np.linalg.norm(final_com[:2] - destination[:2]))
    return xy <= SUCCESS_XY and final_com[2] >= destination[2] + SUCCESS_Z_MARGIN


# --- single trial ---------------------------------------------------------------


def _child_seed(seed: int, tag: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(tag)]).generate_state(1)[0])


def _eligible_scene(seed: int, kind: str):
    """Deterministically resample until the scene admits a task of `kind`."""
    for attempt in range(64):
        s = _child_seed(seed, attempt) & 0x7FFFFFFF
        sc = scene_mod.generate_scene(s)
        try:
            return sc, scene_mod.generate_task(sc, kind, s)
        except scene_mod.NoEligibleTask:
            continue
    raise scene_mod.NoEligibleTask(f"no eligible {kind} scene for seed {seed}")


def _sample(env):
    """Offer a pose sample to the attached observer every SAMPLE_EVERY
    control steps."""
    obs = getattr(env, "_observer", None)
    if obs is None:
        return
    tick = getattr(env, "_sample_tick", 0)
    if tick % SAMPLE_EVERY == 0:
        obs.on_sample(env)
    env._sample_tick = tick + 1


def _track(env, traj) -> int:
    """Drive the environment's tracking target along a planned trajectory at
    the control rate, then let the PD loop converge at the endpoint."""
    ticks = 0
    duration = float(traj.times[-1])
    n = max(1, int(np.ceil(duration / E.CONTROL_DT)))
    for i in range(1, n + 1):
        env.q_bar[:B.ARM_DOFS] = traj.sample(min(i * E.CONTROL_DT, duration))
        for _ in range(E.K_DECIMATION):
            S.step(env.state, env.q_bar)
            ticks += 1
        _sample(env)
    for _ in range(12):  # converge the PD lag at the goal
        for _ in range(E.K_DECIMATION):
            S.step(env.state, env.q_bar)
            ticks += 1
        _sample(env)
    env.state.contact_flags = S.contact_flags(env.state)
    return ticks


def _lift(env, height: float) -> int:
    """Raise the palm straight up by `height` with small tracking steps."""
    ticks = 0
    palm0 = B.fk(env.model, env.state.q).palm[:3, 3]
    goal = palm0 + np.array([0.0, 0.0, height])
    rot = B.fk(env.model, env.state.q).palm[:3, :3]
    for _ in range(80):
        palm = B.fk(env.model, env.state.q).palm[:3, 3]
        if palm[2] >= goal[2] - 0.01:
            break
        dq = E._dls_arm_step(env.model, env.state.q, goal, gain=0.3,
                             R_target=rot)
        env.q_bar[:B.ARM_DOFS] = env.model.clamp(
            np.concatenate([env.q_bar[:B.ARM_DOFS] + dq,
                            env.q_bar[B.ARM_DOFS:]]))[:B.ARM_DOFS]
        for _ in range(E.K_DECIMATION):
            S.step(env.state, env.q_bar)
            ticks += 1
        _sample(env)
    env.state.contact_flags = S.contact_flags(env.state)
    return ticks


def _escape_to_free(env, checker, scene, in_hand=None, in_hand_transform=None,
                    exclude_ids=()) -> int:
    """Nudge the arm out of scene geometry before planning.

    Interaction phases move the arm without collision checking, so the
    planner's start configuration can end up overlapping an obstacle. Step
    the palm away from the witnessed obstacle (and slightly up) until the
    checker accepts the configuration; gives up after a bounded number of
    steps and leaves the plan attempt to fail on its own.
    """
    ticks = 0
    rot = B.fk(env.model, env.state.q).palm[:3, :3]
    by_id = {o.id: o for o in env.state.objects}
    for _ in range(40):
        q_arm = env.state.q[:B.ARM_DOFS]
        if checker.is_free(q_arm):
            break
        hit, witness = B.collide(env.model, env.state.q, scene,
                                 in_hand=in_hand,
                                 in_hand_transform=in_hand_transform,
                                 exclude_ids=exclude_ids)
        palm = B.fk(env.model, env.state.q).palm[:3, 3]
        away = np.array([0.0, 0.0, 1.0])
        if hit and witness[1] in by_id:
            d = palm[:2] - by_id[witness[1]].centroid[:2]
            n = np.linalg.norm(d)
            if n > 1e-9:
                away = np.array([d[0] / n, d[1] / n, 0.75])
                away /= np.linalg.norm(away)
        goal = palm + 0.03 * away
        dq = E._dls_arm_step(env.model, env.state.q, goal, gain=0.3,
                             R_target=rot)
        env.q_bar[:B.ARM_DOFS] = env.model.clamp(
            np.concatenate([env.q_bar[:B.ARM_DOFS] + dq,
                            env.q_bar[B.ARM_DOFS:]]))[:B.ARM_DOFS]
        for _ in range(E.K_DECIMATION):
            S.step(env.state, env.q_bar)
            ticks += 1
        _sample(env)
    env.state.contact_flags = S.contact_flags(env.state)
    return ticks


def _scene_now(state) -> scene_mod.Scene:
    """Scene snapshot reflecting the current simulated object poses."""
    objs = [replace(o.spec,
                    base_position=tuple(float(v) for v in o.position),
                    orientation=tuple(float(v) for v in o.orientation))
            for o in state.objects]
    return scene_mod.Scene(objects=objs, table_extent=state.scene.table_extent,
                           rng_seed=state.scene.rng_seed,
                           undersized=state.scene.undersized,
                           requested_count=state.scene.requested_count)


def command_for_task(scene, task) -> str:
    """Templated natural-language command naming the task's objects."""
    tgt = scene.by_id(task.target_id)
    if task.kind == "stack":
        bot = scene.by_id(task.bottom_id)
        return (f"put the {tgt.color} {tgt.shape} on top of "
                f"the {bot.color} {bot.shape}")
    x, y, _ = task.destination
    return f"move the {tgt.color} {tgt.shape} at {x:.3f} {y:.3f}"


def run_trial(seed: int, kind: str, mode: str = "ground_truth", model=None,
              use_language: bool = False, scene=None, task=None,
              observer: PipelineObserver = None) -> TrialResult:
    """One full pipeline trial; never raises for in-scope failure modes.

    With `scene` and `task` provided (e.g. from an interactive session) the
    trial runs against that scene instead of generating one from the seed;
    such trials are not replayable from their trace alone.
    """
    if model is None:
        model = B.build_right_model()
    if observer is None:
        observer = PipelineObserver()
    timings = {}
    sim_steps = 0
    trace = {"seed": int(seed), "kind": kind, "mode": mode,
             "use_language": use_language}
    result = TrialResult(seed=int(seed), kind=kind, outcome="place_failure",
                         timings=timings, trace=trace)

    if scene is None:
        scene, task = _eligible_scene(seed, kind)
    else:
        trace["session_scene"] = True
    target = scene.by_id(task.target_id)
    result.target_id = target.id
    destination = np.asarray(task.destination, dtype=float)
    result.destination = tuple(float(v) for v in destination)

    profile = (V.NoiseProfile.exact() if mode == "ground_truth"
               else V.NoiseProfile())
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xBE5C]))

    # perceive
    observer.on_stage("perceive")
    t0 = time.perf_counter()
    estimates = V.snapshot(scene, profile, rng)
    by_track = {o.track_id: o for o in estimates}
    timings["perceive"] = time.perf_counter() - t0

    if use_language:
        try:
            spec = L.parse_and_ground(command_for_task(scene, task), estimates)
        except L.AmbiguousCommand:
            result.outcome = "ambiguous_command"
            return result
        dest_est = np.asarray(spec.p_destination, dtype=float)
    elif kind == "stack":
        bot = by_track[task.bottom_id]
        # perceived top of the bottom object (its true height is known)
        dest_est = np.array([bot.position[0], bot.position[1],
                             bot.position[2] + bot.height / 2.0])
    else:
        dest_est = destination.copy()
    tgt_est = by_track[target.id]
    grasp_point = np.array([tgt_est.position[0], tgt_est.position[1],
                            target.height / 2.0])

    # plan the reach to a grasp ring pose around the perceived target
    observer.on_stage("plan_reach")
    t0 = time.perf_counter()
    try:
        checker = P.PlanningChecker(model, scene,
                                    finger_pose=model.rest_pose[B.ARM_DOFS:])
        cands = B.sample_final_poses(model, grasp_point, B.reach_palm_offset(),
                                     RING_CANDIDATES, rng)
        cands = [q for q in cands if checker.is_free(q)]
        q_goal = B.select_final_pose(model, cands, scene,
                                     finger_pose=model.rest_pose[B.ARM_DOFS:])
        reach_traj = P.plan_motion(checker, model,
                                   model.rest_pose[:B.ARM_DOFS], q_goal, rng,
                                   object_position=grasp_point,
                                   v_terminal=P.TERMINAL_SPEED)
    except PLAN_ERRORS as exc:
        result.outcome = "plan_failure"
        result.note = f"reach: {type(exc).__name__}"
        timings["plan_reach"] = time.perf_counter() - t0
        return result
    timings["plan_reach"] = time.perf_counter() - t0
    observer.on_plan("reach", reach_traj, model)

    # reach execution + grasp interaction
    genv = E.GraspEnv(model, noise=profile, seed=_child_seed(seed, 0x9A))
    genv._observer = observer
    gspec = E.EpisodeSpec(kind="grasp", target=target, p_bar=grasp_point,
                          q_init=model.rest_pose, scene=scene)
    obs = genv.reset(gspec)
    # scripted interaction budget exceeds the episodic horizon when the
    # grasp is retried; widen this instance so env_step never cuts it off
    genv.horizon = GRASP_ATTEMPTS * (GRASP_STEP_CAP + GRIP_SETTLE_STEPS
                                     + REOPEN_STEPS) + 10
    observer.on_stage("reach")
    t0 = time.perf_counter()
    sim_steps += _track(genv, reach_traj)
    timings["reach"] = time.perf_counter() - t0

    observer.on_stage("grasp")
    t0 = time.perf_counter()
    grasped = False
    for attempt in range(GRASP_ATTEMPTS):
        policy = E.ScriptedGraspPolicy(model)
        for _ in range(GRASP_STEP_CAP):
            obs, _, _, _ = genv.env_step(policy(obs))
            sim_steps += E.K_DECIMATION
            _sample(genv)
            if genv.state.attached_id == target.id and policy.phase == "hold":
                for _ in range(GRIP_SETTLE_STEPS):
                    obs, _, _, _ = genv.env_step(policy(obs))
                    sim_steps += E.K_DECIMATION
                    _sample(genv)
                grasped = True
                break
        if grasped:
            held, _ = S.drop_test(genv.state, target.id)
            sim_steps += S.DROP_TEST_CONTROL_STEPS * E.K_DECIMATION
            grasped = held
        if grasped or attempt == GRASP_ATTEMPTS - 1:
            break
        # weak or missed grip: let go, reopen the fingers, and wrap again
        # from the slightly different hand state the first attempt left
        if genv.state.attached_id is not None:
            S.release(genv.state)
        open_fingers = model.rest_pose[B.ARM_DOFS:]
        for _ in range(REOPEN_STEPS):
            delta = np.zeros(model.dof_count)
            gap = open_fingers - obs.q_bar_prev[B.ARM_DOFS:]
            delta[B.ARM_DOFS:] = np.clip(gap, -E.ACTION_BOUND, E.ACTION_BOUND)
            obs, _, _, _ = genv.env_step(E.Action(delta_q_bar=delta))
            sim_steps += E.K_DECIMATION
            _sample(genv)
    timings["grasp"] = time.perf_counter() - t0
    if not grasped:
        result.outcome = "grasp_failure"
        return result
    sim_steps += _lift(genv, LIFT_HEIGHT)

    # plan the transport with the object in hand
    attach = genv.state.attach_transform.copy()
    finger_pose = genv.state.q[B.ARM_DOFS:].copy()
    # attach_transform maps the palm to the object's *base* frame, so the
    # transport goal aims the base at the hover point above the destination
    obj_goal = dest_est + np.array([0.0, 0.0, HOVER])
    observer.on_stage("plan_transport")
    t0 = time.perf_counter()
    try:
        checker = P.PlanningChecker(model, scene, finger_pose=finger_pose,
                                    in_hand=target, in_hand_transform=attach,
                                    exclude_ids=(target.id,))
        sim_steps += _escape_to_free(genv, checker, scene, in_hand=target,
                                     in_hand_transform=attach,
                                     exclude_ids=(target.id,))
        cands = B.sample_final_poses(model, obj_goal, np.linalg.inv(attach),
                                     RING_CANDIDATES, rng,
                                     q_init=genv.state.q[:B.ARM_DOFS])
        cands = [q for q in cands if checker.is_free(q)]
        q_goal = B.select_final_pose(model, cands, scene, in_hand=target,
                                     in_hand_transform=attach,
                                     finger_pose=finger_pose,
                                     exclude_ids=(target.id,))
        transport_traj = P.plan_motion(checker, model,
                                       genv.state.q[:B.ARM_DOFS], q_goal, rng)
    except PLAN_ERRORS as exc:
        result.outcome = "plan_failure"
        result.note = f"transport: {type(exc).__name__}"
        timings["plan_transport"] = time.perf_counter() - t0
        return result
    timings["plan_transport"] = time.perf_counter() - t0
    observer.on_plan("transport", transport_traj, model)

    # transport execution + place/stack interaction
    penv = E.PlaceEnv(model, noise=profile, seed=_child_seed(seed, 0x9B))
    penv._observer = observer
    p_bar = dest_est + np.array([0.0, 0.0, target.height / 2.0])
    pspec = E.EpisodeSpec(
        kind=kind, target=target, p_bar=p_bar,
        bottom=scene.by_id(task.bottom_id) if task.bottom_id else None,
        q_init=genv.state.q, attach_transform=attach, scene=scene)
    obs = penv.reset(pspec)
    penv.horizon = PLACE_STEP_CAP + SETTLE_STEPS + 10
    observer.on_stage("transport")
    t0 = time.perf_counter()
    sim_steps += _track(penv, transport_traj)
    timings["transport"] = time.perf_counter() - t0

    observer.on_stage("place")
    t0 = time.perf_counter()
    policy = E.ScriptedPlacePolicy(model)
    info = {"released": False}
    for _ in range(PLACE_STEP_CAP):
        obs, _, _, info = penv.env_step(policy(obs))
        sim_steps += E.K_DECIMATION
        _sample(penv)
        if info["released"]:
            for _ in range(SETTLE_STEPS):
                obs, _, _, info = penv.env_step(policy(obs))
                sim_steps += E.K_DECIMATION
                _sample(penv)
            break
    timings["place"] = time.perf_counter() - t0

    final = penv.state.by_id(target.id).centroid
    result.final_position = tuple(float(v) for v in final)
    ok = info["released"] and success_criterion(final, destination)
    result.outcome = "success" if ok else "place_failure"

    # retract: lift clear of the released object, then plan back to rest
    sim_steps += _lift(penv, LIFT_HEIGHT)
    observer.on_stage("plan_retract")
    t0 = time.perf_counter()
    try:
        scene_after = _scene_now(penv.state)
        checker = P.PlanningChecker(model, scene_after,
                                    finger_pose=penv.state.q[B.ARM_DOFS:],
                                    exclude_ids=(target.id,))
        sim_steps += _escape_to_free(penv, checker, scene_after,
                                     exclude_ids=(target.id,))
        P.plan_motion(checker, model, penv.state.q[:B.ARM_DOFS],
                      model.rest_pose[:B.ARM_DOFS], rng)
    except PLAN_ERRORS as exc:
        result.outcome = "plan_failure"
        result.note = f"retract: {type(exc).__name__}"
    timings["plan_retract"] = time.perf_counter() - t0
    result.sim_steps = sim_steps
    return result


def replay_trial(trace: dict, model=None) -> TrialResult:
    """Re-run a trial from its trace reference; deterministic by seed."""
    return run_trial(trace["seed"], trace["kind"], trace["mode"], model=model,
                     use_language=trace.get("use_language", False))


# --- batch + report --------------------------------------------------------------

def _rate(trials, kinds, excluding: bool):
    pool = [t for t in trials if t.kind in kinds]
    if excluding:
        pool = [t for t in pool if t.outcome != "plan_failure"]
    wins = sum(1 for t in pool if t.outcome == "success")
    return wins, len(pool)


def compute_report(trials, mode: str, wall_time: float = 0.0) -> Report:
    counts, rates = {}, {}
    for scope, kinds in (("overall", ("place", "stack")),
                         ("place", ("place",)), ("stack", ("stack",))):
        for label, excl in (("all", False), ("excluding", True)):
            wins, n = _rate(trials, kinds, excl)
            counts[f"{scope}_{label}"] = (wins, n)
            rates[f"{scope}_{label}"] = wins / n if n else 0.0
    histogram = {o: 0 for o in OUTCOMES}
    for t in trials:
        histogram[t.outcome] += 1
    total_steps = sum(t.sim_steps for t in trials)
    sps = total_steps / wall_time if wall_time > 0 else 0.0
    return Report(mode=mode,
                  n_place=sum(1 for t in trials if t.kind == "place"),
                  n_stack=sum(1 for t in trials if t.kind == "stack"),
                  rates=rates, counts=counts, histogram=histogram,
                  steps_per_second=sps, wall_time=wall_time, trials=list(trials))


def _trial_args(n_place: int, n_stack: int, seeds, base_seed: int):
    kinds = ["place"] * n_place + ["stack"] * n_stack
    if seeds is None:
        seeds = [_child_seed(base_seed, i) & 0x7FFFFFFF
                 for i in range(len(kinds))]
    if len(seeds) < len(kinds):
        raise ValueError(f"need {len(kinds)} seeds, got {len(seeds)}")
    return list(zip(seeds, kinds))


_WORKER_MODEL = None


def _worker_trial(args):
    global _WORKER_MODEL
    if _WORKER_MODEL is None:
        _WORKER_MODEL = B.build_right_model()
    seed, kind, mode, use_language = args
    return run_trial(seed, kind, mode, model=_WORKER_MODEL,
                     use_language=use_language)


def run_benchmark(n_place: int = 100, n_stack: int = 100, seeds=None,
                  mode: str = "ground_truth", base_seed: int = 0,
                  workers: int = 1, use_language: bool = False,
                  progress=None) -> Report:
    """Run the batch; per-trial failures are recorded, never raised."""
    if mode not in ("ground_truth", "noisy"):
        raise ValueError(f"unknown observation mode {mode!r}")
    pairs = _trial_args(n_place, n_stack, seeds, base_seed)
    t0 = time.perf_counter()
    trials = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for res in pool.map(_worker_trial,
                                [(s, k, mode, use_language) for s, k in pairs]):
                trials.append(res)
                if progress:
                    progress(res)
    else:
        model = B.build_right_model()
        for s, k in pairs:
            res = run_trial(s, k, mode, model=model, use_language=use_language)
            trials.append(res)
            if progress:
                progress(res)
    return compute_report(trials, mode, wall_time=time.perf_counter() - t0)


# --- emission --------------------------------------------------------------------

def report_table(report: Report) -> str:
    """Human-readable success table."""
    lines = [
        f"mode: {report.mode}   trials: {report.n_place} place"
        f" + {report.n_stack} stack",
        f"{'':10s} {'all trials':>12s} {'excl. plan fail':>16s}",
    ]
    for scope in ("overall", "place", "stack"):
        row = f"{scope:10s}"
        for label in ("all", "excluding"):
            wins, n = report.counts[f"{scope}_{label}"]
            pct = 100.0 * report.rates[f"{scope}_{label}"]
            cell = f"{pct:5.1f}% ({wins}/{n})" if n else "  n=0"
            width = 12 if label == "all" else 16
            row += f" {cell:>{width}s}"
        lines.append(row)
    lines.append("failures: " + ", ".join(
        f"{k}={v}" for k, v in report.histogram.items() if v))
    if report.steps_per_second:
        lines.append(f"simulation steps/s: {report.steps_per_second:.1f}")
    return "\n".join(lines)


def report_to_doc(report: Report) -> str:
    body = {
        "mode": report.mode,
        "n_place": report.n_place,
        "n_stack": report.n_stack,
        "rates": {k: round(float(v), 10) for k, v in report.rates.items()},
        "counts": {k: list(v) for k, v in report.counts.items()},
        "histogram": dict(report.histogram),
        "steps_per_second": round(float(report.steps_per_second), 3),
        "wall_time": round(float(report.wall_time), 3),
        "trials": [
            {
                "seed": t.seed, "kind": t.kind, "outcome": t.outcome,
                "target_id": t.target_id,
                "final_position": (list(t.final_position)
                                   if t.final_position else None),
                "destination": (list(t.destination)
                                if t.destination else None),
                "sim_steps": t.sim_steps,
                "trace": dict(t.trace),
                "note": t.note,
            }
            for t in report.trials
        ],
    }
    return docio.dumps(REPORT_HEADER, body)


def report_from_doc(text: str) -> Report:
    body = docio.loads(text, REPORT_HEADER)
    trials = [
        TrialResult(seed=t["seed"], kind=t["kind"], outcome=t["outcome"],
                    target_id=t.get("target_id", ""),
                    final_position=(tuple(t["final_position"])
                                    if t.get("final_position") else None),
                    destination=(tuple(t["destination"])
                                 if t.get("destination") else None),
                    sim_steps=t.get("sim_steps", 0),
                    trace=dict(t.get("trace", {})), note=t.get("note", ""))
        for t in body.get("trials", [])
    ]
    return Report(mode=body["mode"], n_place=body["n_place"],
                  n_stack=body["n_stack"],
                  rates={k: float(v) for k, v in body["rates"].items()},
                  counts={k: tuple(v) for k, v in body["counts"].items()},
                  histogram=dict(body["histogram"]),
                  steps_per_second=float(body["steps_per_second"]),
                  wall_time=float(body["wall_time"]), trials=trials)
