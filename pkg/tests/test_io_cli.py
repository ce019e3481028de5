import json
import subprocess
import sys

import pytest

from conftest import cv_tracklet
from trackrefine.cli import cli_main
from trackrefine.config import ConfigError
from trackrefine.core import TrackerOutput
from trackrefine.io import (ParseError, load_config, parse_track_file, read_track_file,
                            serialize_track_file, write_trace, write_track_file)
from trackrefine.synth import generate

RECORD = {"frame": 0, "id": 1, "cls": "car", "x": 1.0, "y": 2.0, "z": 0.5, "w": 1.9, "l": 4.6,
          "h": 1.7, "vx": 3.0, "vy": 0.0, "theta": 0.0, "conf": 0.8}
HEADER = {"scene_id": "s", "scene_length": 10, "frame_rate": 2.0, "source_name": "a"}


def doc(*records, header=HEADER, **top):
    return json.dumps({"header": header, "states": list(records), **top})


def test_minimal_file():
    out = parse_track_file(doc(RECORD))
    assert len(out.tracklets) == 1 and out.tracklets[0].age == 1
    assert out.scene_length == 10 and out.ego is None


def test_records_are_sorted_by_frame():
    out = parse_track_file(doc(dict(RECORD, frame=5), dict(RECORD, frame=2), dict(RECORD, frame=3)))
    assert out.tracklets[0].frames == (2, 3, 5)


def test_duplicate_id_frame_reports_location():
    with pytest.raises(ParseError, match=r"states\[1\].*duplicate"):
        parse_track_file(doc(RECORD, RECORD))


def test_missing_field_is_named():
    rec = dict(RECORD)
    del rec["theta"]
    with pytest.raises(ParseError, match="'theta'"):
        parse_track_file(doc(rec))


def test_category_change_within_id():
    with pytest.raises(ParseError, match="cls"):
        parse_track_file(doc(RECORD, dict(RECORD, frame=1, cls="truck")))


@pytest.mark.parametrize("bad", [
    "not json", "[]", json.dumps({"states": []}),
    json.dumps({"header": {"frame_rate": 2}, "states": []}),
    doc(dict(RECORD, x="far")), doc(dict(RECORD, frame=1.5)), doc(dict(RECORD, interpolated=1)),
])
def test_malformed_documents(bad):
    with pytest.raises(ParseError):
        parse_track_file(bad)


def test_unknown_fields_round_trip():
    text = doc(dict(RECORD, lidar_pts=31), header=dict(HEADER, sensor="lidar"), version=3)
    out = parse_track_file(text)
    assert out.tracklets[0].states[0].extra == {"lidar_pts": 31}
    again = json.loads(serialize_track_file(out))
    assert again["version"] == 3 and again["header"]["sensor"] == "lidar"
    assert again["states"][0]["lidar_pts"] == 31


def test_serialization_is_canonical(tmp_path):
    scene = generate(3, 6, 12)
    text = serialize_track_file(scene.gt)
    reparsed = parse_track_file(text)
    assert serialize_track_file(reparsed) == text
    assert reparsed.tracklets == scene.gt.tracklets
    assert (reparsed.ego == scene.gt.ego).all()
    keys = [(r["id"], r["frame"]) for r in json.loads(text)["states"]]
    assert keys == sorted(keys)
    path = tmp_path / "gt.json"
    write_track_file(scene.gt, path)
    assert path.read_text() == text
    assert read_track_file(path).tracklets == scene.gt.tracklets


def test_config_file(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("default:\n  theta_blo: 0.8\nstages:\n  mtm: false\n")
    cfg = load_config(path)
    assert cfg.for_category("car").theta_blo == 0.8 and "mtm" not in cfg.stage_sequence()
    path.write_text("default:\n  theta_multi: 7\n")
    with pytest.raises(ConfigError, match="default.theta_multi"):
        load_config(path)
    assert load_config(None).stage_sequence()


def test_trace_files(tmp_path):
    write_trace(tmp_path / "t", {"stwo": [{"ids": (1, 2), "cost": 0.1}], "stw": []})
    assert json.loads((tmp_path / "t" / "stwo.jsonl").read_text()) == {"ids": [1, 2], "cost": 0.1}
    assert (tmp_path / "t" / "stw.jsonl").read_text() == ""


# ---- command line -----------------------------------------------------------------

@pytest.fixture
def synth_dir(tmp_path):
    assert cli_main(["synth", "--seed", "4", "--objects", "6", "--frames", "24",
                     "--out-dir", str(tmp_path)]) == 0
    return tmp_path


def test_run_multi_tracker(synth_dir, capsys):
    cfg = synth_dir / "cfg.yaml"
    cfg.write_text("default:\n  topk: 8\n")
    out = synth_dir / "out.json"
    rc = cli_main(["run", "--input", str(synth_dir / "tracker0.json"),
                   "--input", str(synth_dir / "tracker1.json"), "--config", str(cfg),
                   "--output", str(out), "--trace", str(synth_dir / "trace")])
    assert rc == 0
    assert read_track_file(out).source_name == "refined"
    assert sorted(p.name for p in (synth_dir / "trace").iterdir()) == sorted(
        f"{s}.jsonl" for s in ("preprocess", "stwo", "stw", "mtm", "global_refine", "local_refine"))


def test_stage_flags(synth_dir):
    out = synth_dir / "out.json"
    rc = cli_main(["run", "--input", str(synth_dir / "tracker0.json"), "--no-stwo", "--no-stw",
                   "--no-mtm", "--no-preprocess", "--no-global-refine", "--no-local-refine",
                   "--output", str(out)])
    assert rc == 0
    src = read_track_file(synth_dir / "tracker0.json")
    assert read_track_file(out).num_states == src.num_states


def test_run_without_input_is_usage_error(tmp_path, capsys):
    assert cli_main(["run", "--output", str(tmp_path / "o.json")]) == 1
    assert capsys.readouterr().err.startswith("error[usage]:")


def test_unknown_option_is_usage_error(capsys):
    assert cli_main(["run", "--bogus"]) == 1
    assert cli_main([]) == 1
    assert "error[usage]" in capsys.readouterr().err


def test_score_prints_metrics(synth_dir, capsys):
    rc = cli_main(["score", "--pred", str(synth_dir / "gt.json"), "--gt", str(synth_dir / "gt.json")])
    assert rc == 0
    metrics = json.loads(capsys.readouterr().out)
    assert metrics["mota"] == 1.0 and metrics["ids"] == 0


def test_data_errors_exit_two(synth_dir, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(doc(RECORD, RECORD))
    assert cli_main(["validate", str(bad)]) == 2
    assert cli_main(["run", "--input", str(bad), "--output", str(tmp_path / "o.json")]) == 2
    assert cli_main(["run", "--input", str(tmp_path / "missing.json"),
                     "--output", str(tmp_path / "o.json")]) == 2
    cfg = tmp_path / "c.yaml"
    cfg.write_text("default:\n  theta_score: -1\n")
    assert cli_main(["run", "--input", str(synth_dir / "gt.json"), "--config", str(cfg),
                     "--output", str(tmp_path / "o.json")]) == 2
    err = capsys.readouterr().err
    assert err.count("error[data]:") == 4 and "default.theta_score" in err


def test_validate_reports_contract_violations(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(doc(RECORD))
    assert cli_main(["validate", str(good)]) == 0
    bad = tmp_path / "conf.json"
    bad.write_text(doc(dict(RECORD, conf=1.2)))
    assert cli_main(["validate", str(bad)]) == 2
    assert "conf" in capsys.readouterr().err


def test_metadata_mismatch_is_data_error(tmp_path):
    a = TrackerOutput((cv_tracklet(0, range(5)),), 10, 2.0)
    b = TrackerOutput((cv_tracklet(0, range(5)),), 12, 2.0)
    write_track_file(a, tmp_path / "a.json")
    write_track_file(b, tmp_path / "b.json")
    assert cli_main(["run", "--input", str(tmp_path / "a.json"), "--input", str(tmp_path / "b.json"),
                     "--output", str(tmp_path / "o.json")]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "trackrefine", "run"], capture_output=True, text=True)
    assert proc.returncode == 1 and proc.stderr.startswith("error[usage]:")
