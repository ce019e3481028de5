"""Cross-tracker matching: pad, build a scene-level adjacency by temporal
max-pooling of per-frame thresholded costs, cluster with DFS, fuse.

The same machinery (with a gIoU cost) provides the per-frame conflict graph
used to disentangle tracklets inside one tracker.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .config import PipelineConfig
from .core import NUMERIC_FIELDS, BoxState, IdAllocator, InvalidInputError, Tracklet, wrap_angle
from .geometry import cost as pair_cost
from .solvers import connected_components

_X, _Y, _W, _L = (NUMERIC_FIELDS.index(f) for f in ("x", "y", "w", "l"))


@dataclass
class PaddedTrackSet:
    """All tracklets expanded to the scene length.

    ``data[i, t]`` holds the numeric fields of tracklet ``i`` at frame ``t``
    (NaN where absent) and ``mask[i, t]`` marks real entries. ``source[i]``
    is the index of the input set the tracklet came from.
    """

    tracklets: list[Tracklet]
    source: np.ndarray
    data: np.ndarray
    mask: np.ndarray
    cls_codes: np.ndarray

    @property
    def n(self) -> int:
        return len(self.tracklets)

    @property
    def scene_length(self) -> int:
        return self.mask.shape[1]


def pad_and_stack(track_sets: Sequence[Sequence[Tracklet]], scene_length: int,
                  include: Callable[[BoxState], bool] | None = None) -> PaddedTrackSet:
    """Concatenate tracklet sets (input order, then tracklet order) and pad.

    Args:
        include: optional state filter; excluded states are left masked out.
    """
    flat: list[Tracklet] = []
    source: list[int] = []
    for k, tset in enumerate(track_sets):
        flat.extend(tset)
        source.extend([k] * len(tset))
    n = len(flat)
    data = np.full((n, scene_length, len(NUMERIC_FIELDS)), np.nan)
    mask = np.zeros((n, scene_length), dtype=bool)
    classes = sorted({t.cls for t in flat})
    code = {c: k for k, c in enumerate(classes)}
    for i, trk in enumerate(flat):
        for s in trk.states:
            if not 0 <= s.frame < scene_length:
                raise InvalidInputError(
                    f"tracklet {trk.id}: frame {s.frame} outside [0, {scene_length})")
            if include is not None and not include(s):
                continue
            data[i, s.frame] = s.numeric()
            mask[i, s.frame] = True
    return PaddedTrackSet(flat, np.asarray(source, dtype=int), data, mask,
                          np.asarray([code[t.cls] for t in flat], dtype=int))


def frame_edges(p: PaddedTrackSet, t: int, cfg: PipelineConfig,
                mode: str = "multi") -> list[tuple[int, int]]:
    """Pairs ``(i, j)``, ``i < j``, connected at frame ``t``.

    ``mode="multi"`` uses each category's ``metric`` and ``theta_multi``;
    ``mode="stw"`` uses 3D gIoU against ``theta_stw``. Pairs whose bounding
    circles are disjoint are skipped: their similarity is at most 0, so their
    cost is at least 1 and can never pass a threshold in [0, 1].
    """
    idx = np.flatnonzero(p.mask[:, t])
    if len(idx) < 2:
        return []
    rows = p.data[idx, t]
    xy = rows[:, [_X, _Y]]
    radius = 0.5 * np.hypot(rows[:, _W], rows[:, _L])
    dist = np.hypot(xy[:, None, 0] - xy[None, :, 0], xy[:, None, 1] - xy[None, :, 1])
    close = dist <= radius[:, None] + radius[None, :]
    codes = p.cls_codes[idx]
    close &= codes[:, None] == codes[None, :]
    close = np.triu(close, k=1)
    out = []
    for a, b in zip(*np.nonzero(close)):
        i, j = int(idx[a]), int(idx[b])
        si = p.tracklets[i].state_at(t)
        sj = p.tracklets[j].state_at(t)
        cat = cfg.for_category(si.cls)
        if mode == "stw":
            if pair_cost(si, sj, "giou_3d") < cat.theta_stw:
                out.append((i, j))
        elif pair_cost(si, sj, cat.metric) < cat.theta_multi:
            out.append((i, j))
    return out


def build_scene_adjacency(p: PaddedTrackSet, cfg: PipelineConfig, mode: str = "multi",
                          keep_frames: bool = False):
    """Scene adjacency: per-frame binarised costs max-pooled over time.

    Frames are processed one at a time, so the full per-frame stack is only
    materialised when ``keep_frames`` is set.

    Returns:
        ``adj`` (``n x n`` bool) or ``(adj, per_frame)`` with ``per_frame``
        mapping frame -> edge list when ``keep_frames`` is true.
    """
    adj = np.zeros((p.n, p.n), dtype=bool)
    per_frame: dict[int, list[tuple[int, int]]] = {}
    for t in range(p.scene_length):
        edges = frame_edges(p, t, cfg, mode)
        for i, j in edges:
            adj[i, j] = adj[j, i] = True
        if keep_frames and edges:
            per_frame[t] = edges
    return (adj, per_frame) if keep_frames else adj


def _weighted_offset(values: Sequence[float], weights: Sequence[float], total: float) -> float:
    # anchored at the first value so identical inputs are reproduced exactly
    x0 = values[0]
    acc = sum(w * (v - x0) for v, w in zip(values, weights))
    return x0 + acc / total


def majority_class(states: Sequence[BoxState]) -> str:
    """Most frequent category; ties go to the highest summed confidence."""
    votes = Counter(s.cls for s in states)
    conf: dict[str, float] = {}
    for s in states:
        conf[s.cls] = conf.get(s.cls, 0.0) + s.conf
    return max(votes, key=lambda c: (votes[c], conf[c], c))


def fuse_states(states: Sequence[BoxState], new_id: int,
                interpolated_weight: float = 0.5) -> BoxState:
    """Confidence-weighted average of co-frame states.

    Positions, sizes, velocities and confidence are averaged arithmetically,
    heading circularly. Interpolated states have their weight scaled by
    ``interpolated_weight``; all-zero weights fall back to equal weights.
    """
    if not states:
        raise ValueError("nothing to fuse")
    frame = states[0].frame
    if any(s.frame != frame for s in states):
        raise ValueError("fused states must share a frame")
    weights = [s.conf * (interpolated_weight if s.interpolated else 1.0) for s in states]
    total = sum(weights)
    if not total > 0.0:
        weights = [1.0] * len(states)
        total = float(len(states))
    fused = {}
    for name in ("x", "y", "z", "w", "l", "h", "vx", "vy", "conf"):
        fused[name] = _weighted_offset([getattr(s, name) for s in states], weights, total)
    ref = states[0].theta
    sin_acc = sum(w * math.sin(s.theta - ref) for s, w in zip(states, weights))
    cos_acc = sum(w * math.cos(s.theta - ref) for s, w in zip(states, weights))
    if sin_acc == 0.0 and cos_acc > 0.0:
        theta = ref
    else:
        theta = wrap_angle(ref + math.atan2(sin_acc, cos_acc))
    fused["conf"] = min(1.0, max(0.0, fused["conf"]))
    return replace(states[0], **fused, theta=theta, id=new_id, cls=majority_class(states),
                   interpolated=all(s.interpolated for s in states))


def fuse_cluster(members: Sequence[Tracklet], new_id: int,
                 interpolated_weight: float = 0.5) -> Tracklet:
    """Fuse tracklets frame by frame over the union of their frames."""
    if len(members) == 1:
        return members[0].with_id(new_id)
    by_frame: dict[int, list[BoxState]] = {}
    for trk in members:
        for s in trk.states:
            by_frame.setdefault(s.frame, []).append(s)
    states = [fuse_states(by_frame[f], new_id, interpolated_weight) for f in sorted(by_frame)]
    return Tracklet.from_states(states, new_id)


def cluster_and_fuse(p: PaddedTrackSet, adj: np.ndarray, cfg: PipelineConfig,
                     ids: IdAllocator, trace: list | None = None) -> list[Tracklet]:
    """One fused tracklet per connected component of ``adj``."""
    out = []
    for comp in connected_components(adj):
        members = [p.tracklets[i] for i in comp]
        fused = fuse_cluster(members, ids(), cfg.interpolated_weight)
        if trace is not None:
            trace.append({"stage": "mtm", "new_id": fused.id,
                          "members": [[int(p.source[i]), p.tracklets[i].id] for i in comp]})
        out.append(fused)
    return out


def mtm(track_sets: Sequence[Sequence[Tracklet]], scene_length: int, cfg: PipelineConfig,
        ids: IdAllocator | None = None, trace: list | None = None) -> list[Tracklet]:
    """Match and fuse tracklets across tracker outputs."""
    if ids is None:
        ids = IdAllocator()
    p = pad_and_stack(track_sets, scene_length)
    adj = build_scene_adjacency(p, cfg, "multi")
    return cluster_and_fuse(p, adj, cfg, ids, trace)
