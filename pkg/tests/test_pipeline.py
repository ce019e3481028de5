import pytest

from conftest import cv_tracklet
from trackrefine.config import STAGES, PipelineConfig
from trackrefine.core import InvalidInputError, TrackerOutput, validate
from trackrefine.io import serialize_track_file
from trackrefine.pipeline import renumber, run_pipeline, run_scenes
from trackrefine.synth import STANDARD_CORRUPTION, corrupt, score, standard_suite

NONE = PipelineConfig(enabled=frozenset())


def output(*trks, length=20, name="t"):
    return TrackerOutput(tuple(trks), length, 2.0, name)


def geometry(out):
    return sorted(tuple(s.numeric() + (s.frame, s.cls)) for t in out.tracklets for s in t.states)


def test_all_stages_disabled_is_identity_up_to_ids():
    inp = output(cv_tracklet(7, range(5)), cv_tracklet(3, range(2, 9), y0=10.0),
                 cv_tracklet(11, range(1), y0=30.0, conf=0.01))
    out = run_pipeline([inp], NONE)
    assert geometry(out) == geometry(inp)
    assert sorted(t.id for t in out.tracklets) == [0, 1, 2]


def test_duplicated_input_fuses_pairwise():
    inp = output(*[cv_tracklet(k, range(20), y0=12.0 * k) for k in range(5)])
    out = run_pipeline([inp, inp], PipelineConfig(enabled=frozenset({"mtm"})))
    assert len(out.tracklets) == 5
    assert geometry(out) == geometry(inp)


def test_empty_input_list_is_an_error():
    with pytest.raises(ValueError):
        run_pipeline([])


def test_mismatched_metadata_is_rejected():
    with pytest.raises(InvalidInputError):
        run_pipeline([output(length=20), output(length=30)])


def test_out_of_range_frames_rejected():
    with pytest.raises(InvalidInputError):
        run_pipeline([output(cv_tracklet(0, range(25)))])


def test_renumber_is_content_ordered():
    a, b = cv_tracklet(5, range(3, 6)), cv_tracklet(9, range(0, 4))
    assert [t.frames[0] for t in renumber([a, b])] == [0, 3]
    assert [t.id for t in renumber([a, b])] == [0, 1]


def test_stage_toggles_and_order():
    cfg = PipelineConfig().with_stages("stw", "mtm", enabled=False)
    assert cfg.stage_sequence() == ("preprocess", "stwo", "global_refine", "local_refine")


@pytest.fixture(scope="module")
def small_suite():
    return standard_suite(n_scenes=3, max_objects=12, seed=5)


def test_full_pipeline_output_is_valid_and_deterministic(small_suite):
    for scene, outs in small_suite:
        a, b = run_pipeline(outs), run_pipeline(outs)
        assert validate(a) == []
        assert serialize_track_file(a) == serialize_track_file(b)


def test_pipeline_improves_on_corrupted_input(small_suite):
    for scene, outs in small_suite:
        refined = score(run_pipeline(outs), scene.gt)
        for o in outs:
            base = score(o, scene.gt)
            assert refined.fragment_recovery >= base.fragment_recovery
            assert refined.mota >= base.mota


def test_trace_and_warnings_are_collected(small_suite):
    trace, warnings = {}, []
    run_pipeline(small_suite[0][1], trace=trace, warnings=warnings)
    assert set(trace) == set(STAGES) - {"local_refine"}
    assert trace["preprocess"][0]["stage"] == "preprocess"
    assert all(set(w) == {"id", "frame", "reason"} for w in warnings)


def test_parallel_scenes_match_serial(small_suite):
    scenes = [outs for _, outs in small_suite]
    serial = run_scenes(scenes, workers=1)
    parallel = run_scenes(scenes, workers=2)
    assert [serialize_track_file(o) for o in serial] == [serialize_track_file(o) for o in parallel]


def test_cascade_is_stable(small_suite):
    once = run_pipeline(small_suite[1][1])
    twice = run_pipeline([once])
    m1, m2 = score(once, small_suite[1][0].gt), score(twice, small_suite[1][0].gt)
    assert m2.ids <= m1.ids and m2.mota >= m1.mota - 0.01


def test_single_tracker_pipeline(small_suite):
    scene, outs = small_suite[2]
    single = corrupt(scene, STANDARD_CORRUPTION, 99).output
    assert score(run_pipeline([single]), scene.gt).mota >= score(single, scene.gt).mota
