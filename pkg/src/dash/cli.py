"""Command-line entry points: scene generation, command parsing, reach
planning, batch benchmarking, the session server, and a kernel benchmark."""

import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import body as B
from . import command_lang as L
from . import harness as H
from . import perception as V
from . import planner as P
from . import scene as scene_mod


@click.group()
def main():
    """Pick-and-place engine tools."""


# --- scene -----------------------------------------------------------------------

@main.group()
def scene():
    """Scene documents."""


def _parse_count(text):
    if ".." in text:
        lo, hi = text.split("..", 1)
        return int(lo), int(hi)
    n = int(text)
    return n, n


@scene.command("gen")
@click.option("--seed", type=int, required=True)
@click.option("--count", default="4..6", show_default=True,
              help="object count or inclusive range A..B")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="output file (stdout if omitted)")
def scene_gen(seed, count, out):
    """Generate a deterministic scene document."""
    sc = scene_mod.generate_scene(seed, object_count_range=_parse_count(count))
    text = scene_mod.serialize_scene(sc)
    if out:
        Path(out).write_text(text)
        click.echo(f"wrote {out} ({len(sc.objects)} objects)")
    else:
        click.echo(text, nl=False)


# --- language --------------------------------------------------------------------

def _ast_to_dict(node):
    d = {"label": node.label}
    if node.value is not None:
        d["value"] = node.value
    if node.children:
        d["children"] = [_ast_to_dict(c) for c in node.children]
    return d


@main.group()
def lang():
    """Command language tools."""


@lang.command("parse")
@click.argument("text")
@click.option("--scene", "scene_file", type=click.Path(exists=True),
              default=None, help="ground against this scene document")
def lang_parse(text, scene_file):
    """Parse a command; with --scene also ground it to a task."""
    try:
        ast = L.parse_command(text)
    except L.ParseFailure as exc:
        raise click.ClickException(f"ParseFailure: {exc}")
    click.echo(json.dumps({"ast": _ast_to_dict(ast)}, indent=2,
                          default=str))
    if scene_file:
        sc = scene_mod.parse_scene(Path(scene_file).read_text())
        estimates = V.snapshot(sc, V.NoiseProfile.exact(),
                               np.random.default_rng(0))
        try:
            spec = L.parse_and_ground(text, estimates)
        except (L.AmbiguousCommand, L.ParseFailure,
                L.UnresolvedReference) as exc:
            raise click.ClickException(f"{type(exc).__name__}: {exc}")
        click.echo(json.dumps({"task": {
            "kind": spec.kind, "target_id": spec.target_id,
            "p_initial": list(spec.p_initial),
            "p_destination": list(spec.p_destination),
            "bottom_id": spec.bottom_id}}, indent=2, default=str))


# --- planning --------------------------------------------------------------------

@main.group()
def plan():
    """Motion planning tools."""


@plan.command("reach")
@click.option("--scene", "scene_file", type=click.Path(exists=True),
              required=True)
@click.option("--task", "task_file", type=click.Path(exists=True),
              required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--trace", "trace_file", type=click.Path(dir_okay=False),
              default=None, help="write raw/reshaped paths + trajectory")
def plan_reach(scene_file, task_file, seed, trace_file):
    """Plan a reach to the task's target and report the trajectory."""
    sc = scene_mod.parse_scene(Path(scene_file).read_text())
    task = scene_mod.parse_task(Path(task_file).read_text())
    model = B.build_right_model()
    target = sc.by_id(task.target_id)
    grasp_point = np.array([target.base_position[0], target.base_position[1],
                            target.height / 2.0])
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xBE5C]))
    checker = P.PlanningChecker(model, sc,
                                finger_pose=model.rest_pose[B.ARM_DOFS:])
    try:
        cands = B.sample_final_poses(model, grasp_point,
                                     B.reach_palm_offset(),
                                     H.RING_CANDIDATES, rng)
        cands = [q for q in cands if checker.is_free(q)]
        q_goal = B.select_final_pose(model, cands, sc,
                                     finger_pose=model.rest_pose[B.ARM_DOFS:])
        traj = P.plan_motion(checker, model, model.rest_pose[:B.ARM_DOFS],
                             q_goal, rng, object_position=grasp_point,
                             v_terminal=P.TERMINAL_SPEED)
    except H.PLAN_ERRORS as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}")
    duration = float(traj.times[-1])
    click.echo(f"trajectory: {len(traj.times)} knots, {duration:.2f} s")
    if trace_file:
        ts = np.linspace(0.0, duration, max(2, int(duration * 40) + 1))
        payload = {
            "seed": seed,
            "q_goal": [float(v) for v in q_goal],
            "duration": duration,
            "samples": [[float(t)] + [float(v) for v in traj.sample(t)]
                        for t in ts],
        }
        Path(trace_file).write_text(json.dumps(payload, indent=2))
        click.echo(f"wrote {trace_file}")


# --- benchmark -------------------------------------------------------------------

@main.group()
def bench():
    """Batch benchmark."""


@bench.command("run")
@click.option("--place", "n_place", type=int, default=100, show_default=True)
@click.option("--stack", "n_stack", type=int, default=100, show_default=True)
@click.option("--mode", type=click.Choice(["ground_truth", "noisy"]),
              default="noisy", show_default=True)
@click.option("--seed-file", type=click.Path(exists=True), default=None,
              help="file with one trial seed per line")
@click.option("--base-seed", type=int, default=0, show_default=True,
              help="seed root when no --seed-file is given")
@click.option("--out", "out_dir", type=click.Path(file_okay=False),
              default=None, help="directory for the report document")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--language/--no-language", default=False, show_default=True,
              help="route templated commands through the language parser")
def bench_run(n_place, n_stack, mode, seed_file, base_seed, out_dir, workers,
              language):
    """Run the place/stack benchmark and emit a dash-report/1 document."""
    seeds = None
    if seed_file:
        seeds = [int(line) for line in Path(seed_file).read_text().split()
                 if line.strip()]
    done = {"n": 0}
    total = n_place + n_stack

    def progress(trial):
        done["n"] += 1
        click.echo(f"[{done['n']}/{total}] seed={trial.seed} "
                   f"{trial.kind}: {trial.outcome}"
                   + (f" ({trial.note})" if trial.note else ""))

    report = H.run_benchmark(n_place, n_stack, seeds=seeds, mode=mode,
                             base_seed=base_seed, workers=workers,
                             use_language=language, progress=progress)
    click.echo(H.report_table(report))
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"report-{mode}.yaml"
        path.write_text(H.report_to_doc(report))
        click.echo(f"wrote {path}")


# --- server ----------------------------------------------------------------------

@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8437, show_default=True)
@click.option("--ttl", type=float, default=1800.0, show_default=True,
              help="session expiry after inactivity, seconds")
@click.option("--max-sessions", type=int, default=32, show_default=True)
def serve(host, port, ttl, max_sessions):
    """Start the interactive session server."""
    from . import service as SV
    SV.serve(SV.ServiceConfig(host=host, port=port, session_ttl=ttl,
                              max_sessions=max_sessions))


# --- kernels ---------------------------------------------------------------------

@main.command("kernels")
@click.option("--iters", type=int, default=20000, show_default=True)
def kernels(iters):
    """Benchmark the compiled distance kernels against the pure fallback."""
    from ._kernels import COMPILED, geom_py
    from . import _kernels as K

    rng = np.random.default_rng(0)
    cases = {
        "seg_seg_dist": [
            tuple(float(v) for v in rng.uniform(-1, 1, 12))
            for _ in range(64)
        ],
        "seg_box_dist": [
            tuple(float(v) for v in np.concatenate(
                [rng.uniform(-1, 1, 6), rng.uniform(0.05, 0.5, 3)]))
            for _ in range(64)
        ],
        "box_box_gap": [
            (tuple(np.eye(3).ravel()), tuple(rng.uniform(-1, 1, 3)),
             tuple(rng.uniform(0.05, 0.5, 3)),
             tuple(rng.uniform(0.05, 0.5, 3)))
            for _ in range(64)
        ],
    }
    click.echo(f"compiled extension active: {COMPILED}")
    for name, args_list in cases.items():
        fast = getattr(K, name)
        slow = getattr(geom_py, name)
        for args in args_list[:8]:  # agreement spot check
            assert abs(fast(*args) - slow(*args)) < 1e-9
        out = {}
        for label, fn in (("selected", fast), ("pure", slow)):
            t0 = time.perf_counter()
            for i in range(iters):
                fn(*args_list[i % len(args_list)])
            out[label] = time.perf_counter() - t0
        speedup = out["pure"] / out["selected"] if out["selected"] else 0.0
        click.echo(f"{name:14s} selected {out['selected']:.3f}s "
                   f"pure {out['pure']:.3f}s speedup x{speedup:.1f}")


if __name__ == "__main__":
    sys.exit(main())
