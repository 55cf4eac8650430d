"""Rigid-body primitives and pairwise distance/overlap queries.

Primitives are expressed in a local frame and posed with a 4x4 homogeneous
transform. Cylinders are approximated by their inscribed capsule (equal
radius, equal total height) for distance queries; the flat rims are rounded
inward by at most the radius, which is tolerated by the planner's clearance
margin.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels as K


@dataclass(frozen=True)
class Sphere:
    radius: float


@dataclass(frozen=True)
class Capsule:
    """Segment along local z of length 2*half_length, inflated by radius."""

    radius: float
    half_length: float


@dataclass(frozen=True)
class Box:
    half_extents: tuple  # (hx, hy, hz)


@dataclass(frozen=True)
class Cylinder:
    radius: float
    half_height: float

    def as_capsule(self) -> Capsule:
        return Capsule(self.radius, max(self.half_height - self.radius, 0.0))


def transform_point(T: np.ndarray, p) -> np.ndarray:
    return T[:3, :3] @ np.asarray(p, dtype=float) + T[:3, 3]


def _capsule_segment(cap: Capsule, T: np.ndarray):
    axis = T[:3, 2] * cap.half_length
    c = T[:3, 3]
    return c - axis, c + axis


def _to_local(T: np.ndarray, p: np.ndarray) -> np.ndarray:
    return T[:3, :3].T @ (p - T[:3, 3])


def closest_point(prim, T: np.ndarray, p) -> np.ndarray:
    """Closest point on the primitive's surface to world point p.

    Points inside the primitive project to the nearest surface point.
    """
    p = np.asarray(p, dtype=float)
    if isinstance(prim, Cylinder):
        prim = prim.as_capsule()
    local = _to_local(T, p)
    if isinstance(prim, Sphere):
        n = np.linalg.norm(local)
        local = (local / n if n > 1e-12 else np.array([0.0, 0.0, 1.0]))
        return transform_point(T, local * prim.radius)
    if isinstance(prim, Capsule):
        axis_pt = np.array([0.0, 0.0,
                            np.clip(local[2], -prim.half_length,
                                    prim.half_length)])
        d = local - axis_pt
        n = np.linalg.norm(d)
        d = (d / n if n > 1e-12 else np.array([1.0, 0.0, 0.0]))
        return transform_point(T, axis_pt + d * prim.radius)
    if isinstance(prim, Box):
        h = np.asarray(prim.half_extents, dtype=float)
        q = np.clip(local, -h, h)
        if np.all(np.abs(local) < h):
            # interior: push out through the nearest face
            k = int(np.argmin(h - np.abs(local)))
            q[k] = h[k] if local[k] >= 0.0 else -h[k]
        return transform_point(T, q)
    raise TypeError(f"unsupported primitive {type(prim)}")


def distance(prim_a, T_a: np.ndarray, prim_b, T_b: np.ndarray) -> float:
    """Surface-to-surface distance; <= 0 means touching or overlapping.

    Box-box pairs return the separating-axis gap, which is a lower bound
    on true distance when positive and a penetration bound when negative.
    """
    if isinstance(prim_a, Cylinder):
        prim_a = prim_a.as_capsule()
    if isinstance(prim_b, Cylinder):
        prim_b = prim_b.as_capsule()

    # order so that Box sorts last, Sphere first
    rank = {Sphere: 0, Capsule: 1, Box: 2}
    if rank[type(prim_a)] > rank[type(prim_b)]:
        prim_a, prim_b, T_a, T_b = prim_b, prim_a, T_b, T_a

    if isinstance(prim_a, Sphere) and isinstance(prim_b, Sphere):
        d = float(np.linalg.norm(T_a[:3, 3] - T_b[:3, 3]))
        return d - prim_a.radius - prim_b.radius
    if isinstance(prim_a, Sphere) and isinstance(prim_b, Capsule):
        a, b = _capsule_segment(prim_b, T_b)
        p = T_a[:3, 3]
        d = K.point_seg_dist(p[0], p[1], p[2], a[0], a[1], a[2], b[0], b[1], b[2])
        return d - prim_a.radius - prim_b.radius
    if isinstance(prim_a, Sphere) and isinstance(prim_b, Box):
        p = _to_local(T_b, T_a[:3, 3])
        hx, hy, hz = prim_b.half_extents
        return K.point_box_dist(p[0], p[1], p[2], hx, hy, hz) - prim_a.radius
    if isinstance(prim_a, Capsule) and isinstance(prim_b, Capsule):
        a1, b1 = _capsule_segment(prim_a, T_a)
        a2, b2 = _capsule_segment(prim_b, T_b)
        d = K.seg_seg_dist(a1[0], a1[1], a1[2], b1[0], b1[1], b1[2],
                           a2[0], a2[1], a2[2], b2[0], b2[1], b2[2])
        return d - prim_a.radius - prim_b.radius
    if isinstance(prim_a, Capsule) and isinstance(prim_b, Box):
        a, b = _capsule_segment(prim_a, T_a)
        al = _to_local(T_b, a)
        bl = _to_local(T_b, b)
        hx, hy, hz = prim_b.half_extents
        d = K.seg_box_dist(al[0], al[1], al[2], bl[0], bl[1], bl[2], hx, hy, hz)
        return d - prim_a.radius
    if isinstance(prim_a, Box) and isinstance(prim_b, Box):
        R_rel = T_a[:3, :3].T @ T_b[:3, :3]
        t_rel = _to_local(T_a, T_b[:3, 3])
        return K.box_box_gap(tuple(R_rel.ravel()), tuple(t_rel),
                             prim_a.half_extents, prim_b.half_extents)
    raise TypeError(f"unsupported primitive pair {type(prim_a)}/{type(prim_b)}")


def overlaps(prim_a, T_a, prim_b, T_b, margin: float = 0.0) -> bool:
    return distance(prim_a, T_a, prim_b, T_b) <= margin


def bounding_box(prims_and_poses) -> tuple:
    """World-axis-aligned box covering the given posed primitives.

    Returns (Box, T) where T is a translation-only pose. Conservative:
    every input primitive is contained in the result.
    """
    lo = np.full(3, np.inf)
    hi = np.full(3, -np.inf)
    for prim, T in prims_and_poses:
        if isinstance(prim, Cylinder):
            prim = Capsule(prim.radius, prim.half_height)  # outer capsule
        if isinstance(prim, Sphere):
            c = T[:3, 3]
            lo = np.minimum(lo, c - prim.radius)
            hi = np.maximum(hi, c + prim.radius)
        elif isinstance(prim, Capsule):
            a, b = _capsule_segment(prim, T)
            lo = np.minimum(lo, np.minimum(a, b) - prim.radius)
            hi = np.maximum(hi, np.maximum(a, b) + prim.radius)
        elif isinstance(prim, Box):
            # extent of a rotated box along world axes
            ext = np.abs(T[:3, :3]) @ np.asarray(prim.half_extents)
            c = T[:3, 3]
            lo = np.minimum(lo, c - ext)
            hi = np.maximum(hi, c + ext)
        else:
            raise TypeError(type(prim))
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    T = np.eye(4)
    T[:3, 3] = center
    return Box(tuple(half)), T
