import json
import os

import numpy as np
import pytest

from herdwatch import __version__
from herdwatch.cli import main
from herdwatch.common.type_aliases import BoundingBox, TrackRecord, TrackSet
from herdwatch.formats.confusion import save_confusion
from herdwatch.formats.tensors import save_tensor
from herdwatch.formats.tracks import save_tracks
from herdwatch.metrics.classification import ConfusionMatrix

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def _run(capsys, *argv):
    code = main(["--log-level", "WARNING", *argv])
    out = capsys.readouterr().out
    return code, out


def _run_json(capsys, *argv):
    code, out = _run(capsys, *argv)
    assert code == 0
    return json.loads(out)


def _tracks(path, swap_frame=None):
    tracks = TrackSet(
        TrackRecord(
            frame,
            (3 - i) if swap_frame is not None and frame >= swap_frame else i,
            BoundingBox(10.0 + frame, 200.0 * i, 50.0, 50.0),
        )
        for frame in range(1, 21)
        for i in (1, 2)
    )
    save_tracks(tracks, str(path))
    return str(path)


def test_version(capsys):
    with pytest.raises(SystemExit) as e:
        main(["--version"])
    assert e.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_mot_eval(capsys, tmp_path):
    gt = _tracks(tmp_path / "gt.csv")
    document = _run_json(capsys, "mot-eval", gt, gt)
    assert document["result"]["mota"] == 1.0
    assert document["result"]["idf1"] == 1.0
    assert document["manifest"]["subcommand"] == "mot-eval"
    assert document["manifest"]["config"]["iou_gate"] == 0.5
    assert set(document["manifest"]["input_digests"]) == {gt}

    pred = _tracks(tmp_path / "pred.csv", swap_frame=11)
    document = _run_json(capsys, "mot-eval", gt, pred, "--motp", "one-minus-iou")
    assert document["result"]["id_switches"] == 2
    assert document["manifest"]["config"]["distance_mode"] == "one-minus-iou"


def test_mot_eval_errors(capsys, tmp_path):
    gt = _tracks(tmp_path / "gt.csv")
    bad = tmp_path / "bad.csv"
    bad.write_text("frame,id,x,y,w,h,score\n1,1,0,0,10,10,1\n1,2,0,0,10\n")
    code = main(["mot-eval", gt, str(bad)])
    assert code == 2
    assert "line 3" in capsys.readouterr().err

    empty = tmp_path / "empty.csv"
    empty.write_text("frame,id,x,y,w,h,score\n")
    assert main(["mot-eval", str(empty), gt]) == 3
    assert main(["mot-eval", str(tmp_path / "missing.csv"), gt]) == 2


def test_loss_eval(capsys, tmp_path):
    rng = np.random.default_rng(0)
    student = str(tmp_path / "student.dtn")
    teacher = str(tmp_path / "teacher.dtn")
    save_tensor(rng.standard_normal((1, 4, 3, 3)), student)
    save_tensor(rng.standard_normal((1, 4, 3, 3)), teacher)

    document = _run_json(capsys, "loss-eval", teacher, teacher)
    assert document["result"]["loss"]["total"] == pytest.approx(0.0, abs=1e-12)
    assert document["result"]["fidelity"]["cosine_mean"] == pytest.approx(1.0)
    assert document["result"]["fidelity"]["scale_ratio"] == pytest.approx(1.0)
    assert document["result"]["fidelity"]["mse"] == 0.0

    document = _run_json(capsys, "loss-eval", student, teacher, "--gradcheck")
    assert document["result"]["gradcheck_max_rel_error"] < 1e-4
    assert document["manifest"]["config"]["weights"] == {
        "w_dir": 1.0,
        "w_cos": 0.5,
        "w_moment": 0.3,
        "w_raw": 0.1,
    }


def test_loss_eval_errors(tmp_path):
    zeros = str(tmp_path / "zeros.dtn")
    other = str(tmp_path / "other.dtn")
    save_tensor(np.zeros((1, 2, 2, 2)), zeros)
    save_tensor(np.ones((1, 2, 2, 3)), other)
    assert main(["loss-eval", zeros, zeros]) == 4
    assert main(["loss-eval", zeros, other]) == 2
    assert main(["loss-eval", zeros, zeros, "--weights", "1,2"]) == 2


def test_loss_eval_eps_reaches_fidelity(capsys, tmp_path):
    rng = np.random.default_rng(1)
    student_values = rng.standard_normal((1, 4, 3, 3))
    student_values[0, :, 0, 0] = 0
    student = str(tmp_path / "student.dtn")
    teacher = str(tmp_path / "teacher.dtn")
    save_tensor(student_values, student)
    save_tensor(rng.standard_normal((1, 4, 3, 3)), teacher)

    assert main(["--log-level", "WARNING", "loss-eval", student, teacher]) == 4
    capsys.readouterr()
    document = _run_json(capsys, "loss-eval", student, teacher, "--eps")
    assert document["manifest"]["config"]["loss"]["eps"] == pytest.approx(1e-12)
    assert -1.0 <= document["result"]["fidelity"]["cosine_mean"] <= 1.0


def _scenario(tmp_path, **overrides):
    document = {
        "num_identities": 4,
        "num_frames": 40,
        "switch_plan": [[20, 1, 2]],
        "embedding_model": {"dim": 32},
        "seed": 3,
    }
    document.update(overrides)
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(document))
    return str(path)


def test_reid_sim(capsys, tmp_path):
    scenario = _scenario(tmp_path)
    corrected = str(tmp_path / "corrected.csv")
    document = _run_json(capsys, "reid-sim", scenario, "--corrected-out", corrected)
    result = document["result"]
    assert result["idsw_before"] == 2
    assert result["idsw_after"] == 0
    assert result["corrected_switch_count"] == 1
    assert result["false_reinit_count"] == 0
    assert document["manifest"]["seed"] == 3
    assert document["manifest"]["config"]["reid"]["tau_low"] == 0.65
    assert os.path.exists(corrected)

    again = _run_json(capsys, "reid-sim", scenario, "--corrected-out", corrected)
    assert again == document


def test_reid_sim_sweep(capsys, tmp_path):
    document = _run_json(
        capsys, "reid-sim", _scenario(tmp_path), "--sweep", "tau_high=0.78,1.01", "--seed", "9"
    )
    rows = document["result"]
    assert [row["tau_high"] for row in rows] == [0.78, 1.01]
    assert [row["report"]["corrected_switch_count"] for row in rows] == [1, 0]
    assert document["manifest"]["seed"] == 9


def test_reid_sim_errors(tmp_path):
    scenario = _scenario(tmp_path)
    assert main(["reid-sim", scenario, "--tau-low", "0.9", "--tau-high", "0.8"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["reid-sim", str(bad)]) == 2
    assert main(["reid-sim", _scenario(tmp_path, arena=[1280])]) == 2
    assert main(["reid-sim", _scenario(tmp_path, switch_plan=[[20, 1]])]) == 2


def test_manifest_only(capsys, tmp_path):
    scenario = _scenario(tmp_path)
    manifest = _run_json(capsys, "--manifest-only", "reid-sim", scenario)
    assert manifest["subcommand"] == "reid-sim"
    assert manifest["version"] == __version__
    assert manifest["config"]["scenario"]["num_identities"] == 4
    assert len(manifest["input_digests"][scenario]) == 64


def test_prune_sim(capsys):
    document = _run_json(
        capsys,
        "prune-sim",
        "--objects", "8",
        "--per-frame-mb", "5.6",
        "--frames", "600",
        "--keep", "8",
        "--interval", "25",
    )
    result = document["result"]
    assert result["steady_state_per_object_bytes"] == 44_800_000
    assert result["steady_state_per_object_mb"] == pytest.approx(44.8)
    assert result["summary"]["peak_bytes"] <= result["summary"]["bound_bytes"]
    assert result["summary"]["time_to_budget_s"] == pytest.approx(11.905, abs=1e-3)


def test_prune_sim_csv(capsys):
    code, out = _run(capsys, "prune-sim", "--objects", "1", "--frames", "10", "--no-prune", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "frame,bytes"
    assert lines[1:3] == ["1,5600000", "2,11200000"]
    assert len(lines) == 11


def test_storage(capsys):
    document = _run_json(
        capsys,
        "storage",
        "--animals", "200",
        "--cadence-h", "1",
        "--dim", "384",
        "--precision", "half16",
        "--metadata-kb", "10",
    )
    result = document["result"]
    assert result["raw_embedding_bytes_per_animal_year"] == 6_727_680
    assert result["barn_gb_per_year"] == pytest.approx(18.9, rel=0.01)
    assert result["raw_traffic_bytes_per_animal_day"] == 331_776_000
    assert result["reduction_factor"] == 18_000


def test_budget(capsys):
    lines = os.path.join(FIXTURES, "edge_budget.json")
    document = _run_json(capsys, "budget", "--envelope", "16", "--lines", lines)
    assert document["result"]["headroom_gb"] == pytest.approx(4.9, abs=0.01)
    assert document["result"]["unit_mode"] == "decimal"

    code, out = _run(capsys, "budget", "--lines", lines, "--format", "table")
    assert code == 0
    assert "Remaining headroom" in out


def test_budget_line_list(capsys, tmp_path):
    path = tmp_path / "lines.json"
    path.write_text(json.dumps([{"name": "a", "vram_gb": 10}, {"name": "b", "vram_gb": 7}]))
    document = _run_json(capsys, "budget", "--envelope", "16", "--lines", str(path))
    assert document["result"]["over_budget"] is True
    assert main(["budget", "--lines", str(path)]) == 2


def test_cls_eval(capsys, tmp_path):
    path = str(tmp_path / "cm.csv")
    save_confusion(
        ConfusionMatrix(["lying", "sleep"], np.array([[100, 1], [39, 2241]])), path
    )
    document = _run_json(capsys, "cls-eval", path, "--top-k", "1")
    top = document["result"]["top_confusions"]
    assert top == [
        {"true": "sleep", "pred": "lying", "count": 39, "fraction_of_true_class": 39 / 2280}
    ]
    assert document["result"]["report"]["accuracy"] == pytest.approx(2341 / 2381)

    empty = tmp_path / "empty.csv"
    empty.write_text("true\\pred,a\na,0\n")
    assert main(["cls-eval", str(empty)]) == 3
