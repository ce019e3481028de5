"""Track files, config files and trace dumps.

A track file is a JSON document::

    {"header": {"scene_id": ..., "scene_length": ..., "frame_rate": ...,
                "source_name": ..., "ego": [[x, y, z], ...]},
     "states": [{"frame": 0, "id": 3, "cls": "car", "x": ..., ...}, ...]}

``ego`` and the per-state ``interpolated`` flag are optional. Fields the
library does not know are carried through unchanged.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np
import yaml

from .config import PipelineConfig, config_from_dict
from .core import NUMERIC_FIELDS, BoxState, TrackerOutput, Tracklet

REQUIRED_STATE_FIELDS = ("frame", "id", "cls") + NUMERIC_FIELDS
REQUIRED_HEADER_FIELDS = ("scene_length", "frame_rate")
_HEADER_FIELDS = ("scene_id", "scene_length", "frame_rate", "source_name", "ego")


class ParseError(ValueError):
    """Malformed track or config file; the message names the location."""


def _where(k: int, rec: Mapping[str, Any]) -> str:
    ident = ", ".join(f"{f}={rec[f]!r}" for f in ("id", "frame") if f in rec)
    return f"states[{k}]" + (f" ({ident})" if ident else "")


def _as_int(value: Any, where: str, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
        raise ParseError(f"{where}: field {name!r} must be an integer, got {value!r}")
    return int(value)


def _as_float(value: Any, where: str, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where}: field {name!r} must be a number, got {value!r}")
    return float(value)


def parse_track_document(doc: Any, origin: str = "<input>") -> TrackerOutput:
    if not isinstance(doc, dict):
        raise ParseError(f"{origin}: top level must be an object")
    header = doc.get("header")
    if not isinstance(header, dict):
        raise ParseError(f"{origin}: missing 'header' object")
    for name in REQUIRED_HEADER_FIELDS:
        if name not in header:
            raise ParseError(f"{origin}: header: missing required field {name!r}")
    scene_length = _as_int(header["scene_length"], f"{origin}: header", "scene_length")
    frame_rate = _as_float(header["frame_rate"], f"{origin}: header", "frame_rate")
    ego = None
    if header.get("ego") is not None:
        try:
            ego = np.asarray(header["ego"], dtype=float)
        except (TypeError, ValueError):
            raise ParseError(f"{origin}: header: 'ego' must be a list of [x, y, z]") from None
        if ego.ndim != 2 or ego.shape[1] != 3:
            raise ParseError(f"{origin}: header: 'ego' must have shape (scene_length, 3)")
    records = doc.get("states")
    if not isinstance(records, list):
        raise ParseError(f"{origin}: missing 'states' list")

    grouped: dict[int, list[BoxState]] = {}
    seen: dict[tuple[int, int], int] = {}
    for k, rec in enumerate(records):
        where = f"{origin}: {_where(k, rec) if isinstance(rec, dict) else f'states[{k}]'}"
        if not isinstance(rec, dict):
            raise ParseError(f"{where}: record must be an object")
        for name in REQUIRED_STATE_FIELDS:
            if name not in rec:
                raise ParseError(f"{where}: missing required field {name!r}")
        tid = _as_int(rec["id"], where, "id")
        frame = _as_int(rec["frame"], where, "frame")
        cls = rec["cls"]
        if not isinstance(cls, str):
            raise ParseError(f"{where}: field 'cls' must be a string")
        key = (tid, frame)
        if key in seen:
            raise ParseError(f"{where}: duplicate (id, frame) = {key}, first at states[{seen[key]}]")
        seen[key] = k
        values = {name: _as_float(rec[name], where, name) for name in NUMERIC_FIELDS}
        interp = rec.get("interpolated", False)
        if not isinstance(interp, bool):
            raise ParseError(f"{where}: field 'interpolated' must be a boolean")
        extra = {f: v for f, v in rec.items()
                 if f not in REQUIRED_STATE_FIELDS and f != "interpolated"}
        state = BoxState(**values, frame=frame, cls=cls, id=tid, interpolated=interp, extra=extra)
        group = grouped.setdefault(tid, [])
        if group and group[0].cls != cls:
            raise ParseError(f"{where}: cls {cls!r} differs from {group[0].cls!r} "
                             f"used earlier by id {tid}")
        group.append(state)

    tracklets = tuple(Tracklet.from_states(states, tid) for tid, states in sorted(grouped.items()))
    extra = {f: v for f, v in header.items() if f not in _HEADER_FIELDS}
    top_extra = {f: v for f, v in doc.items() if f not in ("header", "states")}
    if top_extra:
        extra["__document__"] = top_extra
    return TrackerOutput(tracklets, scene_length, frame_rate,
                         str(header.get("source_name", "")), str(header.get("scene_id", "")),
                         ego, extra)


def parse_track_file(data: bytes | str, origin: str = "<input>") -> TrackerOutput:
    """Parse track-file contents.

    Raises:
        ParseError: invalid JSON, a missing required field, a duplicate
            ``(id, frame)`` or a category change within one id.
    """
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{origin}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_track_document(doc, origin)


def read_track_file(path: str | Path) -> TrackerOutput:
    path = Path(path)
    return parse_track_file(path.read_bytes(), str(path))


def _json_number(v: float) -> float | int:
    if not math.isfinite(v):
        raise ValueError(f"cannot serialise non-finite value {v}")
    return v


def to_document(output: TrackerOutput) -> dict:
    header: dict[str, Any] = {f: v for f, v in output.extra.items() if f != "__document__"}
    header.update(scene_id=output.scene_id, scene_length=output.scene_length,
                  frame_rate=output.frame_rate, source_name=output.source_name)
    if output.ego is not None:
        header["ego"] = [[float(v) for v in row] for row in np.asarray(output.ego)]
    states = []
    for trk in sorted(output.tracklets, key=lambda t: t.id):
        for s in trk.states:
            rec = dict(s.extra)
            rec.update({name: _json_number(float(getattr(s, name))) for name in NUMERIC_FIELDS})
            rec.update(frame=s.frame, id=s.id, cls=s.cls, interpolated=s.interpolated)
            states.append(rec)
    doc = dict(output.extra.get("__document__", {}))
    doc.update(header=header, states=states)
    return doc


def serialize_track_file(output: TrackerOutput) -> str:
    """Canonical text: keys sorted, records ordered by ``(id, frame)``."""
    return json.dumps(to_document(output), sort_keys=True, indent=1, allow_nan=False) + "\n"


def write_track_file(output: TrackerOutput, path: str | Path) -> None:
    Path(path).write_text(serialize_track_file(output))


def load_config(path: str | Path | None) -> PipelineConfig:
    """Read a YAML (or JSON) config file; ``None`` gives the defaults."""
    if path is None:
        return PipelineConfig()
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ParseError(f"{path}: {exc}") from None
    if raw is not None and not isinstance(raw, dict):
        raise ParseError(f"{path}: config must be a mapping")
    return config_from_dict(raw)


def write_trace(directory: str | Path, records: Mapping[str, Iterable[Mapping]]) -> list[Path]:
    """One newline-delimited JSON file per stage."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for stage, recs in records.items():
        path = directory / f"{stage}.jsonl"
        with path.open("w") as fh:
            for rec in recs:
                fh.write(json.dumps(rec, sort_keys=True, default=_jsonable) + "\n")
        written.append(path)
    return written


def _jsonable(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (set, frozenset, tuple)):
        return sorted(obj) if isinstance(obj, (set, frozenset)) else list(obj)
    raise TypeError(f"not serialisable: {type(obj).__name__}")
