"""Randomized tabletop scene and task generation.

Object attribute ranges, spacing rules, and the resampling cap follow the
experiment setup this engine reproduces. Scenes serialize to the
``dash-scene/1`` document format and round-trip bit-exactly.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import docio

SHAPES = ("box", "cylinder", "sphere")
COLORS = ("red", "yellow", "green", "blue")

WIDTH_RANGE = (0.06, 0.10)
HEIGHT_RANGE = (0.13, 0.18)
BOX_WIDTH_SCALE = 0.8
SPHERE_HEIGHT_SCALE = 0.75
MASS_RANGE = (1.0, 5.0)
FRICTION_RANGE = (0.8, 1.2)
POSITION_X = (-0.1, 0.25)
POSITION_Y = (-0.1, 0.5)
MIN_CENTROID_DIST = 0.25
MAX_RESAMPLES = 50
STACK_BOTTOM_MIN_WIDTH = 0.09

# 1.2 m x 0.8 m table centered on the sampling box
TABLE_EXTENT = ((-0.525, 0.675), (-0.2, 0.6))

SCENE_HEADER = "dash-scene/1"
TASK_HEADER = "dash-task/1"


class NoEligibleTask(Exception):
    """Scene admits no task satisfying the uniqueness/width constraints."""


@dataclass
class SceneObject:
    id: str
    shape: str
    color: str
    width: float
    height: float
    base_position: tuple  # (x, y, 0.0)
    orientation: tuple  # unit quaternion (w, x, y, z)
    mass: float
    friction: float
    up_axis: tuple = (0.0, 0.0, 1.0)
    # raw uniform draws kept so scaling rules can be re-derived in tests
    raw_width_sample: float = 0.0
    raw_height_sample: float = 0.0

    @property
    def centroid(self) -> np.ndarray:
        x, y, z = self.base_position
        return np.array([x, y, z + self.height / 2.0])

    @property
    def top_center(self) -> np.ndarray:
        x, y, z = self.base_position
        return np.array([x, y, z + self.height])


@dataclass
class Scene:
    objects: list
    table_extent: tuple = TABLE_EXTENT
    rng_seed: int = 0
    undersized: bool = False
    requested_count: int = 0

    def by_id(self, object_id: str) -> SceneObject:
        for obj in self.objects:
            if obj.id == object_id:
                return obj
        raise KeyError(object_id)


@dataclass
class TaskAssignment:
    kind: str  # "place" | "stack"
    target_id: str
    destination: tuple  # (x, y, z) for place
    bottom_id: str = ""  # for stack


def effective_dimensions(shape: str, raw_width: float, raw_height: float):
    """Final (width, height) for a shape given its raw uniform samples:
    boxes shrink in width by 0.8 to match the cylinder diagonal; spheres
    take their diameter from the height sample scaled by 0.75."""
    if shape == "box":
        return raw_width * BOX_WIDTH_SCALE, raw_height
    if shape == "cylinder":
        return raw_width, raw_height
    d = raw_height * SPHERE_HEIGHT_SCALE
    return d, d


def _object_rng(seed: int, slot: int) -> np.random.Generator:
    # stream-splitting rule: slot i of scene `seed` draws from
    # PCG64(SeedSequence([seed, i])); resamples consume the same stream
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(slot)]))


def _sample_object(rng: np.random.Generator, slot: int) -> SceneObject:
    shape = SHAPES[rng.integers(0, len(SHAPES))]
    color = COLORS[rng.integers(0, len(COLORS))]
    raw_w = float(rng.uniform(*WIDTH_RANGE))
    raw_h = float(rng.uniform(*HEIGHT_RANGE))
    width, height = effective_dimensions(shape, raw_w, raw_h)
    x = float(rng.uniform(*POSITION_X))
    y = float(rng.uniform(*POSITION_Y))
    yaw = float(rng.uniform(0.0, 2.0 * math.pi))
    return SceneObject(
        id=f"obj{slot}",
        shape=shape,
        color=color,
        width=width,
        height=height,
        base_position=(x, y, 0.0),
        orientation=(math.cos(yaw / 2), 0.0, 0.0, math.sin(yaw / 2)),
        mass=float(rng.uniform(*MASS_RANGE)),
        friction=float(rng.uniform(*FRICTION_RANGE)),
        raw_width_sample=raw_w,
        raw_height_sample=raw_h,
    )


def _too_close(candidate: SceneObject, placed) -> bool:
    cx, cy, _ = candidate.base_position
    for other in placed:
        ox, oy, _ = other.base_position
        if math.hypot(cx - ox, cy - oy) < MIN_CENTROID_DIST:
            return True
    return False


def generate_scene(seed: int, object_count_range=(4, 6)) -> Scene:
    """Sample a scene; objects violating spacing are resampled up to 50 times
    and omitted after that, so the scene may come out undersized."""
    lo, hi = object_count_range
    if lo < 1 or hi > 6 or lo > hi:
        raise ValueError(f"object count range must satisfy 1 <= min <= max <= 6, got {object_count_range}")
    scene_rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xC0117]))
    count = int(scene_rng.integers(lo, hi + 1))
    objects = []
    for slot in range(count):
        rng = _object_rng(seed, slot)
        placed = None
        for _ in range(MAX_RESAMPLES):
            candidate = _sample_object(rng, slot)
            if not _too_close(candidate, objects):
                placed = candidate
                break
        if placed is not None:
            objects.append(placed)
    return Scene(
        objects=objects,
        rng_seed=int(seed),
        undersized=len(objects) < count,
        requested_count=count,
    )


def _unique_attribute_ids(scene: Scene):
    """Ids of objects whose (shape, color) pair is unique in the scene."""
    counts = {}
    for obj in scene.objects:
        counts[(obj.shape, obj.color)] = counts.get((obj.shape, obj.color), 0) + 1
    return [o.id for o in scene.objects if counts[(o.shape, o.color)] == 1]


def generate_task(scene: Scene, kind: str, seed: int) -> TaskAssignment:
    """Pick a target (and bottom object for stacking) with unique shape+color."""
    if kind not in ("place", "stack"):
        raise ValueError(f"unknown task kind {kind!r}")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x7A5C]))
    unique_ids = _unique_attribute_ids(scene)
    if kind == "place":
        candidates = [i for i in unique_ids if scene.by_id(i).shape != "sphere"]
        if not candidates:
            raise NoEligibleTask("no shape+color-unique target in scene")
        target = candidates[rng.integers(0, len(candidates))]
        x = float(rng.uniform(*POSITION_X))
        y = float(rng.uniform(*POSITION_Y))
        return TaskAssignment(kind="place", target_id=target, destination=(x, y, 0.0))
    # stack
    bottoms = [
        i for i in unique_ids
        if scene.by_id(i).width >= STACK_BOTTOM_MIN_WIDTH
        and scene.by_id(i).shape != "sphere"
    ]
    targets = [i for i in unique_ids if scene.by_id(i).shape != "sphere"]
    options = [(t, b) for t in targets for b in bottoms if t != b]
    if not options:
        raise NoEligibleTask("no (target, bottom) pair with bottom width >= 0.09 m")
    target, bottom = options[rng.integers(0, len(options))]
    dest = tuple(float(v) for v in scene.by_id(bottom).top_center)
    return TaskAssignment(kind="stack", target_id=target, destination=dest, bottom_id=bottom)


# --- serialization -----------------------------------------------------------

def _object_to_doc(obj: SceneObject) -> dict:
    return {
        "id": obj.id,
        "shape": obj.shape,
        "color": obj.color,
        "width": obj.width,
        "height": obj.height,
        "base_position": list(obj.base_position),
        "orientation": list(obj.orientation),
        "mass": obj.mass,
        "friction": obj.friction,
        "up_axis": list(obj.up_axis),
        "raw_width_sample": obj.raw_width_sample,
        "raw_height_sample": obj.raw_height_sample,
    }


_REQUIRED_OBJECT_FIELDS = (
    "id", "shape", "color", "width", "height", "base_position",
    "orientation", "mass", "friction",
)


def _object_from_doc(doc: dict, index: int) -> SceneObject:
    ctx = f"objects[{index}]"
    for f_ in _REQUIRED_OBJECT_FIELDS:
        docio.require(doc, f_, ctx)
    return SceneObject(
        id=str(doc["id"]),
        shape=str(doc["shape"]),
        color=str(doc["color"]),
        width=float(doc["width"]),
        height=float(doc["height"]),
        base_position=tuple(float(v) for v in doc["base_position"]),
        orientation=tuple(float(v) for v in doc["orientation"]),
        mass=float(doc["mass"]),
        friction=float(doc["friction"]),
        up_axis=tuple(float(v) for v in doc.get("up_axis", (0.0, 0.0, 1.0))),
        raw_width_sample=float(doc.get("raw_width_sample", 0.0)),
        raw_height_sample=float(doc.get("raw_height_sample", 0.0)),
    )


def serialize_scene(scene: Scene) -> str:
    body = {
        "rng_seed": scene.rng_seed,
        "table_extent": [list(scene.table_extent[0]), list(scene.table_extent[1])],
        "undersized": scene.undersized,
        "requested_count": scene.requested_count,
        "objects": [_object_to_doc(o) for o in scene.objects],
    }
    return docio.dumps(SCENE_HEADER, body)


def parse_scene(text: str) -> Scene:
    body = docio.loads(text, SCENE_HEADER)
    objs_doc = docio.require(body, "objects")
    objects = [_object_from_doc(d, i) for i, d in enumerate(objs_doc)]
    te = body.get("table_extent", [list(TABLE_EXTENT[0]), list(TABLE_EXTENT[1])])
    return Scene(
        objects=objects,
        table_extent=(tuple(te[0]), tuple(te[1])),
        rng_seed=int(body.get("rng_seed", 0)),
        undersized=bool(body.get("undersized", False)),
        requested_count=int(body.get("requested_count", len(objects))),
    )


def serialize_task(task: TaskAssignment) -> str:
    body = {
        "kind": task.kind,
        "target_id": task.target_id,
        "destination": list(task.destination),
        "bottom_id": task.bottom_id,
    }
    return docio.dumps(TASK_HEADER, body)


def parse_task(text: str) -> TaskAssignment:
    body = docio.loads(text, TASK_HEADER)
    return TaskAssignment(
        kind=str(docio.require(body, "kind")),
        target_id=str(docio.require(body, "target_id")),
        destination=tuple(float(v) for v in docio.require(body, "destination")),
        bottom_id=str(body.get("bottom_id", "")),
    )
