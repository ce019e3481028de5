"""Rotated-box overlap measures (BEV IoU, 3D IoU, 3D gIoU) and match costs.

Intersections use Sutherland-Hodgman clipping of the two BEV rectangles,
hulls use Andrew's monotone chain. Both are exact for convex quads.
"""

from __future__ import annotations

import math
from typing import Sequence

from .config import normalize_metric
from .core import BoxState

Point = tuple[float, float]


def bev_corners(box: BoxState) -> list[Point]:
    """Counter-clockwise BEV corners; ``l`` lies along the heading."""
    c, s = math.cos(box.theta), math.sin(box.theta)
    hl, hw = box.l / 2.0, box.w / 2.0
    out = []
    for sl, sw in ((-1, -1), (1, -1), (1, 1), (-1, 1)):
        dx, dy = sl * hl, sw * hw
        out.append((box.x + c * dx - s * dy, box.y + s * dx + c * dy))
    return out


def polygon_area(poly: Sequence[Point]) -> float:
    n = len(poly)
    if n < 3:
        return 0.0
    acc = 0.0
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        acc += x1 * y2 - x2 * y1
    return abs(acc) / 2.0


def clip_polygon(subject: Sequence[Point], clip: Sequence[Point]) -> list[Point]:
    """Intersect ``subject`` with the convex CCW polygon ``clip``."""
    output = list(subject)
    n = len(clip)
    for i in range(n):
        if not output:
            break
        ax, ay = clip[i]
        bx, by = clip[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        inp = output
        output = []
        px, py = inp[-1]
        p_in = ex * (py - ay) - ey * (px - ax) >= 0.0
        for qx, qy in inp:
            q_in = ex * (qy - ay) - ey * (qx - ax) >= 0.0
            if q_in != p_in:
                # segment p->q crosses the clip line
                dx, dy = qx - px, qy - py
                denom = ex * dy - ey * dx
                if denom != 0.0:
                    t = (ex * (ay - py) - ey * (ax - px)) / denom
                    output.append((px + t * dx, py + t * dy))
            if q_in:
                output.append((qx, qy))
            px, py, p_in = qx, qy, q_in
    return output


def convex_hull(points: Sequence[Point]) -> list[Point]:
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o: Point, a: Point, b: Point) -> float:
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[Point] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _same_geometry(a: BoxState, b: BoxState) -> bool:
    return (a.x, a.y, a.z, a.w, a.l, a.h, a.theta) == (b.x, b.y, b.z, b.w, b.l, b.h, b.theta)


def may_overlap(a: BoxState, b: BoxState) -> bool:
    """Cheap bounding-circle test; False guarantees zero BEV overlap."""
    ra = math.hypot(a.l, a.w) / 2.0
    rb = math.hypot(b.l, b.w) / 2.0
    return math.hypot(a.x - b.x, a.y - b.y) <= ra + rb


def bev_intersection(a: BoxState, b: BoxState) -> float:
    if not may_overlap(a, b):
        return 0.0
    return polygon_area(clip_polygon(bev_corners(a), bev_corners(b)))


def _z_overlap(a: BoxState, b: BoxState) -> float:
    lo = max(a.z - a.h / 2.0, b.z - b.h / 2.0)
    hi = min(a.z + a.h / 2.0, b.z + b.h / 2.0)
    return max(0.0, hi - lo)


def bev_iou(a: BoxState, b: BoxState) -> float:
    area_a, area_b = a.w * a.l, b.w * b.l
    if area_a <= 0.0 or area_b <= 0.0:
        return 1.0 if _same_geometry(a, b) else 0.0
    inter = bev_intersection(a, b)
    union = area_a + area_b - inter
    return min(1.0, max(0.0, inter / union))


def iou_3d(a: BoxState, b: BoxState) -> float:
    vol_a, vol_b = a.w * a.l * a.h, b.w * b.l * b.h
    if vol_a <= 0.0 or vol_b <= 0.0:
        return 1.0 if _same_geometry(a, b) else 0.0
    dz = _z_overlap(a, b)
    inter = bev_intersection(a, b) * dz if dz > 0.0 else 0.0
    union = vol_a + vol_b - inter
    return min(1.0, max(0.0, inter / union))


def giou_3d(a: BoxState, b: BoxState) -> float:
    """3D generalized IoU; the enclosing shape is the BEV convex hull of both
    footprints extruded over the joint height range."""
    vol_a, vol_b = a.w * a.l * a.h, b.w * b.l * b.h
    if vol_a <= 0.0 or vol_b <= 0.0:
        return 1.0 if _same_geometry(a, b) else 0.0
    dz = _z_overlap(a, b)
    inter = bev_intersection(a, b) * dz if dz > 0.0 else 0.0
    union = vol_a + vol_b - inter
    iou = min(1.0, max(0.0, inter / union))
    hull_area = polygon_area(convex_hull(bev_corners(a) + bev_corners(b)))
    z_span = max(a.z + a.h / 2.0, b.z + b.h / 2.0) - min(a.z - a.h / 2.0, b.z - b.h / 2.0)
    hull = hull_area * z_span
    if hull <= union:
        return iou
    return iou - (hull - union) / hull


_METRIC_FNS = {"iou_bev": bev_iou, "iou_3d": iou_3d, "giou_3d": giou_3d}


def similarity(a: BoxState, b: BoxState, metric: str = "iou_bev") -> float:
    return _METRIC_FNS[normalize_metric(metric)](a, b)


def cost(a: BoxState, b: BoxState, metric: str = "iou_bev") -> float:
    """``1 - similarity``; pairs of different categories never associate."""
    if a.cls != b.cls:
        return math.inf
    return 1.0 - similarity(a, b, metric)
