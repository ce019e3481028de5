import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import box, cv_tracklet
from trackrefine.config import STAGES, CategoryConfig, ConfigError, PipelineConfig, config_from_dict
from trackrefine.core import IdAllocator, TrackerOutput, Tracklet, validate, wrap_angle, wrap_angles
from trackrefine.preprocess import filter_tracklets, is_ghost, mean_confidence


def output(*tracklets, length=20):
    return TrackerOutput(tuple(tracklets), length, 2.0)


def test_validate_accepts_well_formed_output():
    assert validate(output(cv_tracklet(0, range(5)), cv_tracklet(1, range(3, 9)))) == []


def test_validate_reports_duplicate_frame():
    trk = Tracklet(0, "car", (box(frame=2), box(frame=2)))
    assert len(validate(output(trk))) == 1


def test_validate_reports_confidence_out_of_range():
    trk = Tracklet(0, "car", (box(frame=0, conf=1.2),))
    problems = validate(output(trk))
    assert len(problems) == 1 and "conf" in problems[0]


def test_validate_reports_frame_bounds_and_ids():
    a = cv_tracklet(0, [0, 25])
    b = cv_tracklet(0, [1])
    problems = validate(output(a, b))
    assert any("duplicate id" in p for p in problems)
    assert any("outside" in p for p in problems)


def test_tracklet_from_states_sorts_frames():
    trk = Tracklet.from_states([box(frame=4, id=2), box(frame=1, id=2), box(frame=3, id=2)])
    assert trk.frames == (1, 3, 4)
    assert trk.age == 3 and trk.t_start == 1 and trk.t_end == 4
    assert trk.state_at(3).frame == 3 and trk.state_at(2) is None


def test_overlap_and_id_allocation():
    assert cv_tracklet(0, range(5)).overlaps(cv_tracklet(1, range(4, 8)))
    assert not cv_tracklet(0, range(5)).overlaps(cv_tracklet(1, range(5, 8)))
    ids = IdAllocator([3, 7, 1])
    assert (ids(), ids()) == (8, 9)


@settings(max_examples=300, deadline=None)
@given(st.floats(-1e4, 1e4))
def test_wrap_angle_range(a):
    w = wrap_angle(a)
    assert -math.pi < w <= math.pi
    assert math.cos(w) == pytest.approx(math.cos(a), abs=1e-9)
    assert float(wrap_angles(np.array(a))) == pytest.approx(w, abs=1e-12)


def test_wrap_angle_keeps_in_range_values_exact():
    for a in (0.1, -3.0, math.pi, 2.5):
        assert wrap_angle(a) == a


# ---- config -------------------------------------------------------------------------

def test_defaults():
    cfg = PipelineConfig()
    assert cfg.stage_sequence() == STAGES
    cat = cfg.for_category("car")
    assert (cat.theta_age, cat.theta_score, cat.theta_blo, cat.theta_multi, cat.topk) == (
        3, 0.2, 0.9, 0.75, 10)
    assert cfg.for_category("pedestrian").rigid is False
    assert cfg.for_category("unlisted") == cfg.default


def test_config_from_dict_layers_overrides():
    cfg = config_from_dict({"default": {"theta_blo": 0.8},
                            "categories": {"car": {"topk": 4, "metric": "giou"}},
                            "stages": {"stw": False}, "order": list(STAGES)})
    assert cfg.for_category("car").theta_blo == 0.8
    assert cfg.for_category("car").topk == 4
    assert cfg.for_category("car").metric == "giou_3d"
    assert cfg.for_category("truck").topk == 10
    assert "stw" not in cfg.stage_sequence()


@pytest.mark.parametrize("raw,field", [
    ({"default": {"theta_score": 1.5}}, "default.theta_score"),
    ({"categories": {"car": {"theta_blo": -0.1}}}, "categories.car.theta_blo"),
    ({"default": {"metric": "l2"}}, "default.metric"),
    ({"default": {"bogus": 1}}, "default.bogus"),
    ({"stages": {"nope": True}}, "stages.nope"),
    ({"order": ["stwo"]}, "order"),
    ({"interpolated_weight": 2.0}, "interpolated_weight"),
    ({"mystery": 1}, "mystery"),
])
def test_config_errors_name_the_field(raw, field):
    with pytest.raises(ConfigError) as err:
        config_from_dict(raw)
    assert err.value.field == field
    assert str(err.value).startswith(field)


# ---- preprocess ----------------------------------------------------------------------

def with_conf(trk, conf):
    return Tracklet(trk.id, trk.cls, tuple(s.with_(conf=conf) for s in trk.states))


@pytest.mark.parametrize("age,conf,removed", [(2, 0.1, True), (2, 0.9, False), (40, 0.05, False)])
def test_ghost_rule_needs_both_criteria(age, conf, removed):
    trk = with_conf(cv_tracklet(0, range(age)), conf)
    out = filter_tracklets(output(trk, length=50), PipelineConfig())
    assert (len(out.tracklets) == 0) is removed


def test_mean_confidence_ignores_interpolated_states():
    trk = Tracklet(0, "car", (box(frame=0, conf=0.1), box(frame=1, conf=0.9, interpolated=True)))
    assert mean_confidence(trk) == pytest.approx(0.1)


def cfg_with(age, score):
    return config_from_dict({"default": {"theta_age": age, "theta_score": score}})


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 6), st.floats(0, 1)), min_size=1, max_size=12),
       st.integers(0, 6), st.floats(0, 1), st.integers(0, 3), st.floats(0, 0.5))
def test_filter_properties(specs, age, score, d_age, d_score):
    trks = [with_conf(cv_tracklet(k, range(a)), c) for k, (a, c) in enumerate(specs)]
    out = output(*trks)
    kept = filter_tracklets(out, cfg_with(age, score)).tracklets
    assert all(t in trks for t in kept)
    stricter = filter_tracklets(out, cfg_with(age + d_age, min(1.0, score + d_score))).tracklets
    assert len(stricter) <= len(kept)
    assert filter_tracklets(out, cfg_with(0, score)).tracklets == out.tracklets
    assert filter_tracklets(out, cfg_with(age, 0.0)).tracklets == out.tracklets


def test_is_ghost_uses_category_thresholds():
    cfg = config_from_dict({"categories": {"pedestrian": {"theta_age": 1}}})
    ped = with_conf(cv_tracklet(0, range(1), cls="pedestrian"), 0.05)
    assert not is_ghost(ped, cfg)
    assert is_ghost(with_conf(cv_tracklet(0, range(1)), 0.05), cfg)


def test_category_config_is_frozen():
    with pytest.raises(Exception):
        CategoryConfig().theta_age = 4
