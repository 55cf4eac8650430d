"""Compare the compiled distance kernels against the pure-Python fallback.

Two levels:
  * micro: each kernel on random inputs (same numbers the `dash kernels`
    CLI command reports);
  * macro: full collision checks through PlanningChecker with the kernel
    table pointing at either implementation, which is what planning-time
    throughput actually depends on.

Run: python3 benchmarks/kernel_benchmark.py
"""

import time

import numpy as np

import dash._kernels as K
import dash.body as B
import dash.planner as P
import dash.scene as scene_mod
from dash._kernels import COMPILED, geom_py

KERNELS = ("point_seg_dist", "seg_seg_dist", "point_box_dist",
           "seg_box_dist", "box_box_gap")


def _args_for(name, rng):
    if name == "point_seg_dist":
        return tuple(float(v) for v in rng.uniform(-1, 1, 9))
    if name == "seg_seg_dist":
        return tuple(float(v) for v in rng.uniform(-1, 1, 12))
    if name == "point_box_dist":
        return tuple(float(v) for v in np.concatenate(
            [rng.uniform(-1, 1, 3), rng.uniform(0.05, 0.5, 3)]))
    if name == "seg_box_dist":
        return tuple(float(v) for v in np.concatenate(
            [rng.uniform(-1, 1, 6), rng.uniform(0.05, 0.5, 3)]))
    theta = float(rng.uniform(0, np.pi))
    c, s = np.cos(theta), np.sin(theta)
    R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return (tuple(R.ravel()), tuple(rng.uniform(-1, 1, 3)),
            tuple(rng.uniform(0.05, 0.5, 3)), tuple(rng.uniform(0.05, 0.5, 3)))


def micro(iters: int = 50000):
    rng = np.random.default_rng(0)
    print(f"compiled extension active: {COMPILED}")
    print(f"{'kernel':16s} {'selected':>10s} {'pure':>10s} {'speedup':>8s}")
    for name in KERNELS:
        fast = getattr(K, name)
        slow = getattr(geom_py, name)
        args_list = [_args_for(name, rng) for _ in range(64)]
        for args in args_list[:16]:
            assert abs(fast(*args) - slow(*args)) < 1e-9, name
        times = {}
        for label, fn in (("selected", fast), ("pure", slow)):
            t0 = time.perf_counter()
            for i in range(iters):
                fn(*args_list[i % 64])
            times[label] = time.perf_counter() - t0
        ratio = times["pure"] / times["selected"]
        print(f"{name:16s} {times['selected']:9.3f}s {times['pure']:9.3f}s "
              f"x{ratio:7.1f}")


def _swap_kernels(impl):
    saved = {name: getattr(K, name) for name in KERNELS}
    for name in KERNELS:
        setattr(K, name, getattr(impl, name))
    return saved


def macro(checks: int = 1500):
    model = B.build_right_model()
    scene = scene_mod.generate_scene(3)
    checker = P.PlanningChecker(model, scene,
                                finger_pose=model.rest_pose[B.ARM_DOFS:])
    rng = np.random.default_rng(1)
    lo = np.array([j.limits[0] for j in model.joints[:B.ARM_DOFS]])
    hi = np.array([j.limits[1] for j in model.joints[:B.ARM_DOFS]])
    configs = rng.uniform(lo, hi, size=(checks, B.ARM_DOFS))

    results = {}
    for label, impl in (("selected", None), ("pure", geom_py)):
        saved = _swap_kernels(impl) if impl is not None else None
        try:
            t0 = time.perf_counter()
            free = sum(checker.is_free(q) for q in configs)
            results[label] = (time.perf_counter() - t0, free)
        finally:
            if saved:
                for name, fn in saved.items():
                    setattr(K, name, fn)
    assert results["selected"][1] == results["pure"][1], \
        "implementations disagree on collision outcomes"
    t_sel, free = results["selected"][0], results["selected"][1]
    t_pure = results["pure"][0]
    print(f"\nPlanningChecker.is_free x{checks} ({free} free):")
    print(f"  selected {t_sel:.3f}s ({checks / t_sel:.0f}/s)   "
          f"pure {t_pure:.3f}s ({checks / t_pure:.0f}/s)   "
          f"speedup x{t_pure / t_sel:.1f}")


if __name__ == "__main__":
    micro()
    macro()
