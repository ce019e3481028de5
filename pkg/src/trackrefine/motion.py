"""Explicit motion models and forward/backward/interior state prediction."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, replace

from .core import BoxState, Tracklet, wrap_angle

# below this speed the heading, not the velocity, defines the motion direction
_MIN_SPEED = 1e-3
# CTRA closed form degenerates to straight-line motion below this turn rate
_MIN_TURN = 1e-6


@dataclass(frozen=True)
class MotionModel:
    kind: str = "CV"
    turn_rate: float = 0.0
    accel: float = 0.0


CV = MotionModel("CV")


def propagate(state: BoxState, dt: float, model: MotionModel = CV) -> BoxState:
    """Advance ``state`` by ``dt`` seconds (negative ``dt`` predicts backward).

    Size, confidence, category and identity are carried over; the result is
    flagged as interpolated.
    """
    if not (math.isfinite(dt) and state.is_finite()):
        raise ValueError(f"cannot propagate non-finite state/dt (dt={dt})")
    if model.kind == "CV" or (model.turn_rate == 0.0 and model.accel == 0.0):
        return replace(state, x=state.x + state.vx * dt, y=state.y + state.vy * dt,
                       interpolated=True)
    if model.kind != "CTRA":
        raise ValueError(f"unknown motion model {model.kind!r}")

    v = state.speed
    psi = math.atan2(state.vy, state.vx) if v > _MIN_SPEED else state.theta
    w, a = model.turn_rate, model.accel
    v1 = v + a * dt
    psi1 = psi + w * dt
    if abs(w) < _MIN_TURN:
        dist = v * dt + 0.5 * a * dt * dt
        dx, dy = dist * math.cos(psi), dist * math.sin(psi)
    else:
        s0, c0, s1, c1 = math.sin(psi), math.cos(psi), math.sin(psi1), math.cos(psi1)
        dx = v1 / w * s1 + a / (w * w) * c1 - v / w * s0 - a / (w * w) * c0
        dy = -v1 / w * c1 + a / (w * w) * s1 + v / w * c0 - a / (w * w) * s0
    return replace(
        state,
        x=state.x + dx,
        y=state.y + dy,
        vx=v1 * math.cos(psi1),
        vy=v1 * math.sin(psi1),
        theta=wrap_angle(state.theta + w * dt),
        interpolated=True,
    )


def estimate_model(a: BoxState, b: BoxState, kind: str, frame_rate: float) -> MotionModel:
    """Fit a motion model to two states by finite differences (CTRA only)."""
    if kind == "CV" or a.frame == b.frame:
        return CV
    first, second = (a, b) if a.frame < b.frame else (b, a)
    dt = (second.frame - first.frame) / frame_rate
    turn = wrap_angle(second.theta - first.theta) / dt
    accel = (second.speed - first.speed) / dt
    return MotionModel("CTRA", turn, accel)


def circular_mean(angles, weights=None) -> float:
    """Weighted circular mean, exact when all angles are equal."""
    angles = list(angles)
    if weights is None:
        weights = [1.0] * len(angles)
    ref = angles[0]
    s = sum(w * math.sin(t - ref) for t, w in zip(angles, weights))
    c = sum(w * math.cos(t - ref) for t, w in zip(angles, weights))
    if s == 0.0 and c > 0.0:
        return ref
    return wrap_angle(ref + math.atan2(s, c))


def _model_for(trk: Tracklet, i: int, j: int, kind: str, frame_rate: float) -> MotionModel:
    if kind == "CV" or trk.age < 2:
        return CV
    return estimate_model(trk.states[i], trk.states[j], kind, frame_rate)


def predict_node(trk: Tracklet, t: int, frame_rate: float, cap: float | None = 1.0,
                 model_kind: str = "CV") -> BoxState | None:
    """State of ``trk`` at frame ``t``: the stored state when present,
    otherwise a motion-model prediction.

    Beyond the lifecycle the prediction comes from the nearest end state and
    is discarded (``None``) when it reaches more than ``cap`` seconds. Inside
    a gap the forward prediction from the previous state and the backward
    prediction from the next state are averaged; positions and velocities
    arithmetically, heading circularly, size from the nearer anchor. Interior
    predictions are bracketed by real states and are never discarded.
    """
    stored = trk.state_at(t)
    if stored is not None:
        return stored
    n = trk.age
    if t > trk.t_end:
        dt = (t - trk.t_end) / frame_rate
        if cap is not None and dt > cap + 1e-12:
            return None
        model = _model_for(trk, n - 2, n - 1, model_kind, frame_rate)
        return replace(propagate(trk.states[-1], dt, model), frame=t)
    if t < trk.t_start:
        dt = (t - trk.t_start) / frame_rate
        if cap is not None and -dt > cap + 1e-12:
            return None
        model = _model_for(trk, 0, 1, model_kind, frame_rate)
        return replace(propagate(trk.states[0], dt, model), frame=t)

    k = bisect.bisect_left(trk.frames, t)
    before, after = trk.states[k - 1], trk.states[k]
    model = _model_for(trk, k - 1, k, model_kind, frame_rate)
    fwd = propagate(before, (t - before.frame) / frame_rate, model)
    bwd = propagate(after, (t - after.frame) / frame_rate, model)
    return interior_average(fwd, bwd, before, after, t, frame_rate)


def interior_average(fwd: BoxState, bwd: BoxState, before: BoxState, after: BoxState,
                     t: int, frame_rate: float) -> BoxState:
    nearest = before if t - before.frame <= after.frame - t else after
    vx = (fwd.vx + bwd.vx) / 2.0
    vy = (fwd.vy + bwd.vy) / 2.0
    # replace the velocity by the displacement rate when the anchors disagree with it
    span = (after.frame - before.frame) / frame_rate
    dvx = (after.x - before.x) / span
    dvy = (after.y - before.y) / span
    anchor_vx = (before.vx + after.vx) / 2.0
    anchor_vy = (before.vy + after.vy) / 2.0
    if math.hypot(anchor_vx - dvx, anchor_vy - dvy) > 0.5 * math.hypot(dvx, dvy):
        vx, vy = dvx, dvy
    return replace(
        nearest,
        x=(fwd.x + bwd.x) / 2.0,
        y=(fwd.y + bwd.y) / 2.0,
        z=(fwd.z + bwd.z) / 2.0,
        vx=vx,
        vy=vy,
        theta=circular_mean([fwd.theta, bwd.theta]),
        conf=(before.conf + after.conf) / 2.0,
        frame=t,
        interpolated=True,
    )
