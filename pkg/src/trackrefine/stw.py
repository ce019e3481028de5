"""Disentangling of tracklets with overlapping lifecycles inside one tracker.

Tracklets whose boxes coincide (3D gIoU above a threshold) at some frame are
grouped into clusters. Inside a cluster every member is cut at the frames
where it is entangled with another member; the co-frame entangled boxes are
fused into single-frame tracklets and everything is relinked by the
fragment re-identification pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

from .config import PipelineConfig
from .core import IdAllocator, Tracklet
from .geometry import cost
from .mtm import build_scene_adjacency, fuse_states, pad_and_stack
from .solvers import components_from_edges, connected_components
from .stwo import stwo_pass


@dataclass
class Cluster:
    """Geometrically conflicting tracklets plus their per-frame conflict edges
    (pairs of indices into ``members``)."""

    members: list[Tracklet]
    frame_edges: dict[int, list[tuple[int, int]]] = field(default_factory=dict)


def connect_tracklets(tracklets: Sequence[Tracklet], cfg: PipelineConfig,
                      scene_length: int) -> list[Cluster]:
    """Group tracklets that are connected at any frame, directly or transitively.

    Singleton clusters are included so the result partitions the input.
    """
    include = None if cfg.stw_use_interpolated else (lambda s: not s.interpolated)
    p = pad_and_stack([list(tracklets)], scene_length, include)
    adj, per_frame = build_scene_adjacency(p, cfg, "stw", keep_frames=True)
    clusters = []
    for comp in connected_components(adj):
        local = {g: k for k, g in enumerate(comp)}
        edges = {}
        if len(comp) > 1:
            for t, pairs in per_frame.items():
                inside = [(local[i], local[j]) for i, j in pairs if i in local and j in local]
                if inside:
                    edges[t] = inside
        clusters.append(Cluster([p.tracklets[i] for i in comp], edges))
    return clusters


def _entangled_groups(cluster: Cluster) -> dict[int, list[list[int]]]:
    groups = {}
    for t, edges in sorted(cluster.frame_edges.items()):
        comps = [c for c in components_from_edges(len(cluster.members), edges) if len(c) > 1]
        if comps:
            groups[t] = comps
    return groups


def separate_cluster(cluster: Cluster, ids: IdAllocator, cfg: PipelineConfig,
                     trace: list | None = None) -> list[Tracklet]:
    """Split cluster members at their entangled frames.

    Returns the reliable segments (original states, fresh IDs) plus one
    fused tracklet per entangled per-frame component. Members that are never
    entangled are returned unchanged.
    """
    return _separate(cluster, ids, cfg, trace)[0]


def _separate(cluster: Cluster, ids: IdAllocator, cfg: PipelineConfig,
              trace: list | None) -> tuple[list[Tracklet], set[int]]:
    groups = _entangled_groups(cluster)
    if not groups:
        return list(cluster.members), set()
    entangled: dict[int, set[int]] = {k: set() for k in range(len(cluster.members))}
    for t, comps in groups.items():
        for comp in comps:
            for k in comp:
                entangled[k].add(t)

    pieces: list[Tracklet] = []
    for k, trk in enumerate(cluster.members):
        if not entangled[k]:
            pieces.append(trk)
            continue
        run: list = []
        for s in trk.states:
            if s.frame in entangled[k]:
                if run:
                    pieces.append(Tracklet.from_states(run, ids()))
                    run = []
            else:
                run.append(s)
        if run:
            pieces.append(Tracklet.from_states(run, ids()))

    n_segments = len(pieces)
    fused_nodes = []
    for t, comps in groups.items():
        for comp in comps:
            states = [cluster.members[k].state_at(t) for k in comp]
            fused_nodes.append((t, tuple(comp), states))
    if cfg.stw_entangled_runs:
        pieces.extend(_fuse_runs(fused_nodes, ids, cfg))
    else:
        for t, _, states in fused_nodes:
            nid = ids()
            pieces.append(Tracklet.from_states(
                [fuse_states(states, nid, cfg.interpolated_weight)], nid))
    if trace is not None:
        trace.append({"stage": "stw", "event": "split",
                      "members": [m.id for m in cluster.members],
                      "entangled_frames": sorted(groups),
                      "pieces": [p.id for p in pieces]})
    return pieces, {p.id for p in pieces[n_segments:]}


def _fuse_runs(nodes, ids: IdAllocator, cfg: PipelineConfig) -> list[Tracklet]:
    # join components with the same membership on consecutive frames
    open_runs: dict[tuple[int, ...], tuple[int, list]] = {}
    done: list[list] = []
    for t, comp, states in sorted(nodes, key=lambda n: (n[0], n[1])):
        prev = open_runs.get(comp)
        if prev is not None and prev[0] == t - 1:
            prev[1].append(states)
            open_runs[comp] = (t, prev[1])
        else:
            if prev is not None:
                done.append(prev[1])
            open_runs[comp] = (t, [states])
    done.extend(run for _, run in open_runs.values())
    out = []
    for run in done:
        nid = ids()
        out.append(Tracklet.from_states(
            [fuse_states(states, nid, cfg.interpolated_weight) for states in run], nid))
    return out


def stw_pass(tracklets: Sequence[Tracklet], cfg: PipelineConfig, frame_rate: float,
             scene_length: int, ids: IdAllocator | None = None,
             trace: list | None = None) -> list[Tracklet]:
    """Detect, separate and reorganize entangled tracklets of one tracker.

    With ``stw_reorganize_scope="touched"`` the pieces are relinked against
    every tracklet of the output, considering only pairs that involve a new
    piece; with ``"cluster"`` each cluster's pieces are relinked among
    themselves.
    """
    tracklets = list(tracklets)
    if ids is None:
        ids = IdAllocator(t.id for t in tracklets)
    clusters = connect_tracklets(tracklets, cfg, scene_length)
    if all(len(c.members) == 1 for c in clusters):
        return tracklets
    order = {t.id: k for k, t in enumerate(tracklets)}
    result: list[Tracklet] = []
    new_ids: set[int] = set()
    fused_ids: set[int] = set()
    for cluster in sorted(clusters, key=lambda c: order[c.members[0].id]):
        if len(cluster.members) == 1:
            result.extend(cluster.members)
            continue
        pieces, fused = _separate(cluster, ids, cfg, trace)
        fused_ids |= fused
        created = {p.id for p in pieces} - {m.id for m in cluster.members}
        if cfg.stw_reorganize_scope == "cluster" and created:
            result.extend(stwo_pass(pieces, cfg, frame_rate, scene_length, ids, trace))
        else:
            result.extend(pieces)
            new_ids |= created
    if new_ids:
        result = stwo_pass(result, cfg, frame_rate, scene_length, ids, trace, focus=new_ids)
    return _absorb_fused(result, fused_ids, cfg, trace)


def _absorb_fused(tracklets: list[Tracklet], fused_ids: set[int], cfg: PipelineConfig,
                  trace: list | None) -> list[Tracklet]:
    """Hand leftover fused nodes back to the relinked tracks that bridged them.

    When two objects genuinely cross, relinking joins each object's segments
    across the crossing with interpolated states, leaving the fused node
    orphaned. A leftover fused tracklet whose every state coincides (cost
    below ``theta_blo``) with an interpolated state of some other tracklet
    replaces those interpolated states and is dropped.
    """
    by_id = {t.id: k for k, t in enumerate(tracklets)}
    states = {t.id: list(t.states) for t in tracklets}
    dropped: set[int] = set()
    for fid in sorted(fused_ids & set(by_id)):
        node = tracklets[by_id[fid]]
        theta = cfg.for_category(node.cls).theta_blo
        plan = []
        for s in node.states:
            hits = []
            for trk in tracklets:
                if trk.id == fid or trk.id in dropped or trk.cls != node.cls:
                    continue
                k = trk.index_of(s.frame)
                if k is None or not states[trk.id][k].interpolated:
                    continue
                if cost(states[trk.id][k], s, cfg.for_category(node.cls).metric) < theta:
                    hits.append((trk.id, k))
            if not hits:
                break
            plan.append((s, hits))
        else:
            for s, hits in plan:
                for tid, k in hits:
                    states[tid][k] = replace(s, id=tid, interpolated=False)
            dropped.add(fid)
            if trace is not None:
                trace.append({"stage": "stw", "event": "absorb", "node": fid,
                              "into": sorted({tid for _, h in plan for tid, _ in h})})
    if not dropped:
        return tracklets
    return [Tracklet(t.id, t.cls, tuple(states[t.id])) for t in tracklets if t.id not in dropped]
