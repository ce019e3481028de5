from __future__ import annotations

import math
import re

import pytest

from trackrefine.core import BoxState, Tracklet


def box(x=0.0, y=0.0, z=0.0, w=1.0, l=1.0, h=1.0, vx=0.0, vy=0.0, theta=0.0, conf=0.9,
        frame=0, cls="car", id=0, interpolated=False) -> BoxState:
    return BoxState(x, y, z, w, l, h, vx, vy, theta, conf, frame, cls, id, interpolated)


def cv_tracklet(tid, frames, x0=0.0, y0=0.0, vx=2.0, vy=0.0, fr=2.0, cls="car",
                size=(1.9, 4.6, 1.7), conf=0.8) -> Tracklet:
    """Exact constant-velocity tracklet; position at frame f is ``x0 + vx * f / fr``."""
    w, l, h = size
    theta = math.atan2(vy, vx) if (vx or vy) else 0.0
    states = [box(x0 + vx * f / fr, y0 + vy * f / fr, 0.0, w, l, h, vx, vy, theta, conf, f, cls, tid)
              for f in frames]
    return Tracklet(tid, cls, tuple(states))


@pytest.fixture
def make_box():
    return box


@pytest.fixture
def make_cv():
    return cv_tracklet


# ---- acceptance summary ----------------------------------------------------------

_AC_NAME = re.compile(r"test_ac(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter):
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call" and outcome != "error":
                continue
            m = _AC_NAME.search(getattr(rep, "nodeid", ""))
            if not m or "test_acceptance" not in rep.nodeid:
                continue
            detail = "; ".join(f"{k}={v}" for k, v in getattr(rep, "user_properties", []))
            rows.append((int(m.group(1)), "PASS" if outcome == "passed" else "FAIL",
                         m.group(2).replace("_", " "), detail))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for num, verdict, name, detail in sorted(rows):
        line = f"AC{num:<2} {verdict}  {name}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
