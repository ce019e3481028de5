"""Tracklet-level ghost filtering."""

from __future__ import annotations

from .config import PipelineConfig
from .core import TrackerOutput, Tracklet


def mean_confidence(trk: Tracklet) -> float:
    """Arithmetic mean confidence over observed states (all states if none)."""
    states = trk.observed() or trk.states
    return sum(s.conf for s in states) / len(states)


def is_ghost(trk: Tracklet, cfg: PipelineConfig) -> bool:
    """A tracklet is a ghost only when it is both short-lived and low-confidence."""
    cat = cfg.for_category(trk.cls)
    return trk.age < cat.theta_age and mean_confidence(trk) < cat.theta_score


def filter_tracklets(output: TrackerOutput, cfg: PipelineConfig) -> TrackerOutput:
    """Drop ghost tracklets; survivors are returned untouched and in order."""
    return output.replace_tracklets(t for t in output.tracklets if not is_ghost(t, cfg))
