"""Re-identification and fusion of fragments whose lifecycles do not overlap.

Each frame of the scene is visited in ascending order. Every live tracklet
contributes a node at that frame (its stored state or a motion prediction);
non-overlapping same-category pairs whose node cost is below the category
threshold become edges of a matching graph, the maximum-weight matching is
solved and each matched pair is fused into a new tracklet. Sweeps repeat
until one produces no merge.
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Iterable, Sequence

from .config import PipelineConfig
from .core import BoxState, IdAllocator, Tracklet
from .geometry import cost as pair_cost
from .motion import predict_node
from .solvers import max_weight_matching


def build_nodes(tracklets: Sequence[Tracklet], t: int, cfg: PipelineConfig,
                frame_rate: float) -> list[BoxState | None]:
    """Node for each tracklet at frame ``t``; ``None`` where no valid prediction exists."""
    nodes = []
    for trk in tracklets:
        cat = cfg.for_category(trk.cls)
        nodes.append(predict_node(trk, t, frame_rate, cat.prediction_cap, cat.motion_model))
    return nodes


def _within_gap(a: Tracklet, b: Tracklet, frame_rate: float, cap: float) -> bool:
    gap = max(a.t_start, b.t_start) - min(a.t_end, b.t_end)
    return gap / frame_rate <= 2.0 * cap + 1e-12


def match_frame(tracklets: Sequence[Tracklet], nodes: Sequence[BoxState | None],
                cfg: PipelineConfig, frame_rate: float,
                focus: set[int] | None = None) -> tuple[list[tuple[int, int, float]], list[int]]:
    """Match nodes of one frame.

    Returns:
        ``(pairs, unmatched)`` where each pair is ``(i, j, cost)`` over
        indices into ``tracklets`` and ``unmatched`` lists the remaining
        indices that carried a node.
    """
    edges = []
    costs = {}
    idx = [k for k, nd in enumerate(nodes) if nd is not None]
    for p, i in enumerate(idx):
        a = tracklets[i]
        cat = cfg.for_category(a.cls)
        for j in idx[p + 1:]:
            b = tracklets[j]
            if b.cls != a.cls or a.overlaps(b):
                continue
            if focus is not None and a.id not in focus and b.id not in focus:
                continue
            if not _within_gap(a, b, frame_rate, cat.prediction_cap):
                continue
            c = pair_cost(nodes[i], nodes[j], cat.metric)
            if c < cat.theta_blo:
                edges.append((i, j, cat.theta_blo - c))
                costs[(i, j)] = c
    pairs = max_weight_matching(edges, cfg.max_cardinality) if edges else []
    matched = {v for pr in pairs for v in pr}
    return ([(i, j, costs[(i, j)]) for i, j in pairs],
            [k for k in idx if k not in matched])


def fill_gaps(trk: Tracklet, frame_rate: float, model_kind: str = "CV") -> Tracklet:
    """Insert interpolated states at every missing frame inside the lifecycle."""
    if trk.t_end - trk.t_start + 1 == trk.age:
        return trk
    filled = list(trk.states)
    present = set(trk.frames)
    for t in range(trk.t_start + 1, trk.t_end):
        if t not in present:
            filled.append(predict_node(trk, t, frame_rate, None, model_kind))
    return Tracklet.from_states(filled, trk.id)


def fuse_pair(a: Tracklet, b: Tracklet, new_id: int, frame_rate: float,
              model_kind: str = "CV") -> Tracklet:
    """Concatenate two non-overlapping fragments under ``new_id`` and
    interpolate the frames missing between them."""
    if a.overlaps(b):
        raise ValueError(f"tracklets {a.id} and {b.id} have overlapping lifecycles")
    if a.cls != b.cls:
        raise ValueError(f"tracklets {a.id} and {b.id} differ in category")
    merged = Tracklet.from_states(
        [replace(s, id=new_id) for s in a.states + b.states], new_id)
    return fill_gaps(merged, frame_rate, model_kind)


def _live_range(trk: Tracklet, cfg: PipelineConfig, frame_rate: float) -> tuple[int, int]:
    reach = int(math.floor(cfg.for_category(trk.cls).prediction_cap * frame_rate + 1e-9))
    return trk.t_start - reach, trk.t_end + reach


def stwo_pass(tracklets: Iterable[Tracklet], cfg: PipelineConfig, frame_rate: float,
              scene_length: int, ids: IdAllocator | None = None,
              trace: list | None = None, focus: Iterable[int] | None = None) -> list[Tracklet]:
    """Iterate frame sweeps of match-and-fuse until a sweep merges nothing.

    Args:
        tracklets: one tracker's tracklets.
        ids: source of fresh IDs for fused tracklets.
        trace: optional list receiving one record per merge.
        focus: when given, only pairs with at least one member in this ID
            set (or created by an earlier merge) are considered.

    Returns:
        The new tracklet list. Fused tracklets take the slot of their
        earlier-listed member, so output order is stable.
    """
    work: list[Tracklet | None] = list(tracklets)
    if ids is None:
        ids = IdAllocator(t.id for t in work)
    touched = None if focus is None else set(focus)
    for sweep in range(cfg.stwo_max_sweeps):
        merges = 0
        for t in range(scene_length):
            slots = []
            for k, trk in enumerate(work):
                if trk is None:
                    continue
                lo, hi = _live_range(trk, cfg, frame_rate)
                if lo <= t <= hi:
                    slots.append(k)
            if len(slots) < 2:
                continue
            live = [work[k] for k in slots]
            nodes = build_nodes(live, t, cfg, frame_rate)
            pairs, _ = match_frame(live, nodes, cfg, frame_rate, touched)
            for i, j, c in pairs:
                a, b = live[i], live[j]
                model = cfg.for_category(a.cls).motion_model
                fused = fuse_pair(a, b, ids(), frame_rate, model)
                work[slots[i]] = fused
                work[slots[j]] = None
                if touched is not None:
                    touched.add(fused.id)
                if trace is not None:
                    trace.append({"stage": "stwo", "sweep": sweep, "frame": t,
                                  "ids": [a.id, b.id], "new_id": fused.id, "cost": c})
                merges += 1
        if merges == 0:
            break
    return [t for t in work if t is not None]
