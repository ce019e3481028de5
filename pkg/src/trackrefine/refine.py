"""Trajectory refinement.

Global refinement replaces each rigid tracklet's per-frame sizes with one
Top-K softmax-weighted size and re-centres the boxes so the BEV corner
nearest the ego vehicle stays put. Local refinement re-estimates the motion
attributes of every state from a sliding window of its neighbours with
Levenberg-Marquardt.
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Sequence

import numpy as np

from .config import CategoryConfig, PipelineConfig, RefineWeights
from .core import BoxState, Tracklet, wrap_angles
from .geometry import bev_corners
from .lm import LMOptions, lm_minimize

_CORNER_SIGNS = ((-1, -1), (1, -1), (1, 1), (-1, 1))


def refine_size_topk(trk: Tracklet, k: int, rigid: bool = True) -> tuple[float, float, float] | None:
    """Softmax(conf)-weighted mean size of the ``k`` most confident states.

    Observed states are preferred; interpolated ones are used only when a
    tracklet has none. Returns ``None`` for non-rigid categories.
    """
    if not rigid:
        return None
    pool = trk.observed() or trk.states
    top = sorted(pool, key=lambda s: (-s.conf, s.frame))[:k]
    conf = np.array([s.conf for s in top])
    w = np.exp(conf - conf.max())
    w /= w.sum()
    sizes = np.array([(s.w, s.l, s.h) for s in top])
    if len(top) == 1:
        return tuple(float(v) for v in sizes[0])
    return tuple(float(v) for v in w @ sizes)


def anchor_corner(box: BoxState, ego_xy: Sequence[float]) -> int:
    """Index (into the CCW corner order) of the BEV corner nearest the ego."""
    corners = bev_corners(box)
    d = [math.hypot(cx - ego_xy[0], cy - ego_xy[1]) for cx, cy in corners]
    return int(np.argmin(d))


def resize_about_corner(box: BoxState, size: tuple[float, float, float],
                        ego_xy: Sequence[float] | None) -> BoxState:
    """Resize one box keeping its ego-nearest BEV corner and its bottom fixed.

    Without an ego position the box is resized about its centre.
    """
    w, l, h = size
    if (w, l, h) == (box.w, box.l, box.h):
        return box
    z = box.z if h == box.h else box.z - box.h / 2.0 + h / 2.0
    if ego_xy is None:
        return replace(box, w=w, l=l, h=h, z=z)
    k = anchor_corner(box, ego_xy)
    ax, ay = bev_corners(box)[k]
    sl, sw = _CORNER_SIGNS[k]
    c, s = math.cos(box.theta), math.sin(box.theta)
    dx, dy = sl * l / 2.0, sw * w / 2.0
    return replace(box, x=ax - (c * dx - s * dy), y=ay - (s * dx + c * dy), z=z, w=w, l=l, h=h)


def corner_align(trk: Tracklet, ego: np.ndarray | None,
                 new_size: tuple[float, float, float]) -> Tracklet:
    """Apply ``new_size`` to every state, holding each frame's anchor corner fixed."""
    states = []
    for s in trk.states:
        ego_xy = None
        if ego is not None and 0 <= s.frame < len(ego) and np.all(np.isfinite(ego[s.frame][:2])):
            ego_xy = ego[s.frame][:2]
        states.append(resize_about_corner(s, new_size, ego_xy))
    return Tracklet(trk.id, trk.cls, tuple(states))


def global_refine(trk: Tracklet, cat: CategoryConfig, ego: np.ndarray | None) -> Tracklet:
    size = refine_size_topk(trk, cat.topk, cat.rigid)
    if size is None:
        return trk
    return corner_align(trk, ego, size)


# ---- local refinement -------------------------------------------------------

def predict_batch(params: np.ndarray, dt: np.ndarray, turn: float = 0.0,
                  accel: float = 0.0) -> tuple[np.ndarray, ...]:
    """Propagate a batch of motion states ``(x, y, z, vx, vy, theta)`` by each ``dt``.

    Returns ``(x, y, z, vx, vy, theta)`` arrays of shape ``(batch, len(dt))``.
    """
    x, y, z, vx, vy, th = (params[:, k:k + 1] for k in range(6))
    dt = dt[None, :]
    if turn == 0.0 and accel == 0.0:
        ones = np.ones_like(dt)
        return (x + vx * dt, y + vy * dt, z * ones, vx * ones, vy * ones, th * ones)
    v = np.sqrt(vx * vx + vy * vy)
    psi = np.where(v > 1e-3, np.arctan2(vy, vx), th)
    v1 = v + accel * dt
    psi1 = psi + turn * dt
    if abs(turn) < 1e-6:
        dist = v * dt + 0.5 * accel * dt * dt
        dx, dy = dist * np.cos(psi), dist * np.sin(psi)
    else:
        w2 = turn * turn
        dx = (v1 / turn * np.sin(psi1) + accel / w2 * np.cos(psi1)
              - v / turn * np.sin(psi) - accel / w2 * np.cos(psi))
        dy = (-v1 / turn * np.cos(psi1) + accel / w2 * np.sin(psi1)
              + v / turn * np.cos(psi) - accel / w2 * np.sin(psi))
    return (x + dx, y + dy, z * np.ones_like(dt), v1 * np.cos(psi1), v1 * np.sin(psi1),
            th + turn * dt)


def window_residuals(params: np.ndarray, dt: np.ndarray, obs: np.ndarray,
                     weights: RefineWeights, half_diag: float,
                     turn: float = 0.0, accel: float = 0.0) -> np.ndarray:
    """Weighted residuals of a batch of candidate states against a window.

    ``obs`` rows are ``(x, y, z, vx, vy, theta)`` of the window states,
    ``dt`` their time offsets from the centre frame in seconds.
    """
    px, py, pz, pvx, pvy, pth = predict_batch(np.atleast_2d(params), dt, turn, accel)
    wp, wv = weights.position, weights.velocity
    wh = weights.heading * half_diag
    return np.concatenate([
        wp * (px - obs[:, 0]), wp * (py - obs[:, 1]), wp * (pz - obs[:, 2]),
        wv * (pvx - obs[:, 3]), wv * (pvy - obs[:, 4]),
        wh * (np.mod(pth - obs[:, 5] + np.pi, 2.0 * np.pi) - np.pi),
    ], axis=1)


def window_turn_accel(dt: np.ndarray, obs: np.ndarray) -> tuple[float, float]:
    """Least-squares slopes of heading and speed over a window.

    Headings are unwrapped relative to the window centre before fitting.
    """
    centre = int(np.argmin(np.abs(dt)))
    heading = wrap_angles(obs[:, 5] - obs[centre, 5])
    speed = np.hypot(obs[:, 3], obs[:, 4])
    tc = dt - dt.mean()
    denom = float(tc @ tc)
    if denom <= 0.0:
        return 0.0, 0.0
    return float(tc @ heading) / denom, float(tc @ speed) / denom


def _motion_rows(states: Sequence[BoxState]) -> np.ndarray:
    return np.array([(s.x, s.y, s.z, s.vx, s.vy, s.theta) for s in states], dtype=float)


def sliding_window_refine(trk: Tracklet, cat: CategoryConfig, frame_rate: float,
                          weights: RefineWeights | None = None, max_iter: int = 100,
                          warnings: list | None = None,
                          order: Sequence[int] | None = None) -> Tracklet:
    """Re-estimate ``(x, y, z, vx, vy, theta)`` of every state from its window.

    Each window spans ``round(window_halfspan * frame_rate)`` frames on either
    side of its centre (clipped at the tracklet ends) and reads the frozen
    input trajectory, so the processing ``order`` does not matter. Frames
    whose window holds fewer than two states are left unchanged.
    """
    weights = weights or RefineWeights()
    half = int(round(cat.window_halfspan * frame_rate))
    if trk.age < 2 or half < 1:
        return trk
    rows = _motion_rows(trk.states)
    frames = np.array(trk.frames)
    opts = LMOptions(max_iter=max_iter)
    out = list(trk.states)
    indices = range(trk.age) if order is None else order
    for i in indices:
        s = trk.states[i]
        lo = np.searchsorted(frames, s.frame - half, side="left")
        hi = np.searchsorted(frames, s.frame + half, side="right")
        if hi - lo < 2:
            continue
        dt = (frames[lo:hi] - s.frame) / frame_rate
        obs = rows[lo:hi]
        turn = accel = 0.0
        if cat.motion_model == "CTRA":
            turn, accel = window_turn_accel(dt, obs)
        half_diag = 0.5 * math.hypot(s.l, s.w)

        def fun(p, dt=dt, obs=obs, half_diag=half_diag, turn=turn, accel=accel):
            return window_residuals(p, dt, obs, weights, half_diag, turn, accel)

        res = lm_minimize(fun, rows[i], opts, vectorized=True)
        if not res.converged and warnings is not None:
            warnings.append({"id": trk.id, "frame": s.frame,
                             "reason": f"LM stopped after {res.iterations} iterations: {res.reason}"})
        x, y, z, vx, vy, th = (float(v) for v in res.x)
        out[i] = replace(s, x=x, y=y, z=z, vx=vx, vy=vy,
                         theta=float(wrap_angles(np.array(th))))
    return Tracklet(trk.id, trk.cls, tuple(out))


def local_refine_all(tracklets: Sequence[Tracklet], cfg: PipelineConfig, frame_rate: float,
                     warnings: list | None = None) -> list[Tracklet]:
    return [sliding_window_refine(t, cfg.for_category(t.cls), frame_rate, cfg.refine_weights,
                                  cfg.lm_max_iter, warnings) for t in tracklets]


def global_refine_all(tracklets: Sequence[Tracklet], cfg: PipelineConfig,
                      ego: np.ndarray | None) -> list[Tracklet]:
    return [global_refine(t, cfg.for_category(t.cls), ego) for t in tracklets]
