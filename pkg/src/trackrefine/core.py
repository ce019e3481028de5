"""Domain types shared by every stage: per-frame box states, tracklets and
tracker outputs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Iterable, Sequence

import numpy as np

NUMERIC_FIELDS = ("x", "y", "z", "w", "l", "h", "vx", "vy", "theta", "conf")


class InvalidInputError(ValueError):
    """Input data violates a contract (bad metadata, out-of-range frames)."""


class NumericalError(ArithmeticError):
    """A numerical routine produced non-finite values."""

    def __init__(self, message: str, trace: Sequence[Any] = ()):
        super().__init__(message)
        self.trace = list(trace)


def wrap_angle(a: float) -> float:
    """Map an angle to (-pi, pi]; in-range angles are returned unchanged."""
    if -math.pi < a <= math.pi:
        return a
    out = math.pi - (math.pi - a) % (2.0 * math.pi)
    return math.pi if out <= -math.pi else out


def wrap_angles(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    inside = (a > -np.pi) & (a <= np.pi)
    out = np.pi - np.mod(np.pi - a, 2.0 * np.pi)
    out = np.where(out <= -np.pi, np.pi, out)
    return np.where(inside, a, out)


@dataclass(frozen=True)
class BoxState:
    """One object state at one frame, in the global frame.

    ``l`` runs along the heading, ``w`` across it. ``extra`` carries
    fields read from a file that the pipeline does not interpret.
    """

    x: float
    y: float
    z: float
    w: float
    l: float
    h: float
    vx: float
    vy: float
    theta: float
    conf: float
    frame: int
    cls: str
    id: int
    interpolated: bool = False
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def numeric(self) -> tuple[float, ...]:
        return tuple(getattr(self, f) for f in NUMERIC_FIELDS)

    def with_(self, **changes) -> "BoxState":
        return replace(self, **changes)

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self.numeric())


@dataclass(frozen=True)
class Tracklet:
    """Frame-ordered states sharing one identity and category."""

    id: int
    cls: str
    states: tuple[BoxState, ...]

    @classmethod
    def from_states(cls, states: Iterable[BoxState], id: int | None = None) -> "Tracklet":
        states = sorted(states, key=lambda s: s.frame)
        if not states:
            raise ValueError("a tracklet needs at least one state")
        tid = states[0].id if id is None else id
        category = states[0].cls
        restamped = tuple(s if s.id == tid else replace(s, id=tid) for s in states)
        return cls(tid, category, restamped)

    @property
    def age(self) -> int:
        return len(self.states)

    @property
    def t_start(self) -> int:
        return self.states[0].frame

    @property
    def t_end(self) -> int:
        return self.states[-1].frame

    @cached_property
    def frames(self) -> tuple[int, ...]:
        return tuple(s.frame for s in self.states)

    @cached_property
    def _index(self) -> dict[int, int]:
        return {s.frame: k for k, s in enumerate(self.states)}

    def state_at(self, frame: int) -> BoxState | None:
        k = self._index.get(frame)
        return None if k is None else self.states[k]

    def index_of(self, frame: int) -> int | None:
        return self._index.get(frame)

    def observed(self) -> tuple[BoxState, ...]:
        return tuple(s for s in self.states if not s.interpolated)

    def overlaps(self, other: "Tracklet") -> bool:
        """True when the [t_start, t_end] lifecycles intersect."""
        return not (self.t_end < other.t_start or other.t_end < self.t_start)

    def with_id(self, new_id: int) -> "Tracklet":
        return Tracklet(new_id, self.cls, tuple(replace(s, id=new_id) for s in self.states))


@dataclass(frozen=True)
class TrackerOutput:
    """All tracklets produced by one tracker for one scene."""

    tracklets: tuple[Tracklet, ...]
    scene_length: int
    frame_rate: float
    source_name: str = ""
    scene_id: str = ""
    ego: np.ndarray | None = field(default=None, compare=False, repr=False)
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def replace_tracklets(self, tracklets: Iterable[Tracklet], **changes) -> "TrackerOutput":
        return replace(self, tracklets=tuple(tracklets), **changes)

    @property
    def num_states(self) -> int:
        return sum(t.age for t in self.tracklets)

    def ego_at(self, frame: int) -> np.ndarray | None:
        if self.ego is None or not 0 <= frame < len(self.ego):
            return None
        return self.ego[frame]


class IdAllocator:
    """Hands out fresh integer IDs above everything seen so far."""

    def __init__(self, used: Iterable[int] = ()):
        self._next = max(used, default=-1) + 1

    def __call__(self) -> int:
        nid = self._next
        self._next += 1
        return nid


def validate(output: TrackerOutput) -> list[str]:
    """Return every contract violation found in ``output`` (empty when valid)."""
    problems: list[str] = []
    if output.scene_length <= 0:
        problems.append(f"scene_length must be positive, got {output.scene_length}")
    if not (output.frame_rate > 0 and math.isfinite(output.frame_rate)):
        problems.append(f"frame_rate must be positive, got {output.frame_rate}")
    seen: set[int] = set()
    for trk in output.tracklets:
        where = f"tracklet {trk.id}"
        if trk.id in seen:
            problems.append(f"{where}: duplicate id")
        seen.add(trk.id)
        if not trk.states:
            problems.append(f"{where}: no states")
            continue
        prev = None
        for s in trk.states:
            at = f"{where} frame {s.frame}"
            if s.id != trk.id:
                problems.append(f"{at}: state id {s.id} differs from tracklet id")
            if s.cls != trk.cls:
                problems.append(f"{at}: state cls {s.cls!r} differs from tracklet cls {trk.cls!r}")
            if prev is not None and s.frame <= prev:
                problems.append(f"{at}: frames not strictly increasing")
            prev = s.frame
            if not 0 <= s.frame < output.scene_length:
                problems.append(f"{at}: frame outside [0, {output.scene_length})")
            if not s.is_finite():
                problems.append(f"{at}: non-finite field")
                continue
            for name in ("w", "l", "h"):
                if getattr(s, name) <= 0:
                    problems.append(f"{at}: {name} must be positive")
            if not 0.0 <= s.conf <= 1.0:
                problems.append(f"{at}: conf {s.conf} outside [0, 1]")
            if not -math.pi < s.theta <= math.pi:
                problems.append(f"{at}: theta {s.theta} outside (-pi, pi]")
    return problems
