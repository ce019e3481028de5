"""End-to-end driver: tracker outputs in, one refined tracker output out."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

from .config import PipelineConfig
from .core import IdAllocator, InvalidInputError, TrackerOutput, Tracklet
from .mtm import mtm
from .preprocess import is_ghost
from .refine import global_refine_all, local_refine_all
from .stw import stw_pass
from .stwo import stwo_pass


def check_inputs(inputs: Sequence[TrackerOutput]) -> None:
    if not inputs:
        raise ValueError("at least one tracker output is required")
    first = inputs[0]
    for k, out in enumerate(inputs):
        if out.scene_length != first.scene_length or out.frame_rate != first.frame_rate:
            raise InvalidInputError(
                f"input {k} ({out.source_name or 'unnamed'}): scene_length/frame_rate "
                f"{out.scene_length}/{out.frame_rate} differ from input 0 "
                f"({first.scene_length}/{first.frame_rate})")
        ids = [t.id for t in out.tracklets]
        if len(ids) != len(set(ids)):
            raise InvalidInputError(f"input {k}: duplicate tracklet ids")
        for trk in out.tracklets:
            if trk.t_start < 0 or trk.t_end >= out.scene_length:
                raise InvalidInputError(
                    f"input {k}: tracklet {trk.id} has frames outside [0, {out.scene_length})")


def _sort_key(trk: Tracklet):
    s = trk.states[0]
    return (trk.t_start, trk.cls, s.x, s.y, trk.t_end, trk.age)


def renumber(tracklets: Sequence[Tracklet]) -> list[Tracklet]:
    """Fresh sequential IDs in a content-derived order."""
    return [t.with_id(k) for k, t in enumerate(sorted(tracklets, key=_sort_key))]


def run_pipeline(inputs: Sequence[TrackerOutput], cfg: PipelineConfig | None = None,
                 trace: dict[str, list] | None = None,
                 warnings: list | None = None) -> TrackerOutput:
    """Refine one scene.

    Stages run in ``cfg.stage_sequence()`` order. Stages before multi-tracker
    matching act on each input separately; matching reduces the inputs to a
    single set. When matching is disabled the per-input results are
    concatenated. Output IDs are renumbered from 0.

    Args:
        trace: optional mapping that receives per-stage record lists.
        warnings: optional list receiving solver warning records.

    Raises:
        ValueError: ``inputs`` is empty.
        InvalidInputError: inputs disagree on scene metadata or violate
            frame bounds.
    """
    cfg = (cfg or PipelineConfig()).check()
    check_inputs(inputs)
    first = inputs[0]
    fr, length = first.frame_rate, first.scene_length
    ego = next((o.ego for o in inputs if o.ego is not None), None)
    ids = IdAllocator(t.id for o in inputs for t in o.tracklets)
    sets: list[list[Tracklet]] = [list(o.tracklets) for o in inputs]

    def log(stage: str) -> list | None:
        return None if trace is None else trace.setdefault(stage, [])

    for stage in cfg.stage_sequence():
        if stage == "preprocess":
            sets = [[t for t in s if not is_ghost(t, cfg)] for s in sets]
            rec = log(stage)
            if rec is not None:
                rec.append({"stage": stage, "survivors": [len(s) for s in sets]})
        elif stage == "stwo":
            sets = [stwo_pass(s, cfg, fr, length, ids, log(stage)) for s in sets]
        elif stage == "stw":
            sets = [stw_pass(s, cfg, fr, length, ids, log(stage)) for s in sets]
        elif stage == "mtm":
            sets = [mtm(sets, length, cfg, ids, log(stage))]
        elif stage == "global_refine":
            sets = [global_refine_all(s, cfg, ego) for s in sets]
            rec = log(stage)
            if rec is not None:
                rec.extend({"stage": stage, "id": t.id,
                            "size": [t.states[0].w, t.states[0].l, t.states[0].h]}
                           for s in sets for t in s)
        elif stage == "local_refine":
            sets = [local_refine_all(s, cfg, fr, warnings) for s in sets]
    merged = [t for s in sets for t in s]
    return TrackerOutput(tuple(renumber(merged)), length, fr, "refined", first.scene_id, ego)


def _run_one(args) -> TrackerOutput:
    inputs, cfg = args
    return run_pipeline(inputs, cfg)


def run_scenes(scenes: Sequence[Sequence[TrackerOutput]], cfg: PipelineConfig | None = None,
               workers: int = 1) -> list[TrackerOutput]:
    """Refine independent scenes, optionally across worker processes.

    Results are returned in scene order and do not depend on ``workers``.
    """
    cfg = cfg or PipelineConfig()
    jobs = [(list(s), cfg) for s in scenes]
    if workers <= 1 or len(jobs) <= 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
