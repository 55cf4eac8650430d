"""Distance kernel selection: compiled extension if available, pure Python otherwise."""

try:
    from . import _geom as _impl
    COMPILED = True
except ImportError:
    from . import geom_py as _impl
    COMPILED = False

from . import geom_py

point_seg_dist = _impl.point_seg_dist
seg_seg_dist = _impl.seg_seg_dist
point_box_dist = _impl.point_box_dist
seg_box_dist = _impl.seg_box_dist
box_box_gap = _impl.box_box_gap

__all__ = [
    "COMPILED",
    "geom_py",
    "point_seg_dist",
    "seg_seg_dist",
    "point_box_dist",
    "seg_box_dist",
    "box_box_gap",
]
