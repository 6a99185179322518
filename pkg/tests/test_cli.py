import json

import numpy as np
import pytest

from conftest import slow
from visualwordgrid.cli import commands, main
from visualwordgrid.grid import read_tensor

GRID = ["--grid", "16x16", "--dim", "8"]
TINY_NET = ["--epochs", "2", "--batch-size", "4", "--base-channels", "4", "--depth", "2"]


@pytest.fixture(autouse=True)
def _no_user_config(monkeypatch, tmp_path):
    monkeypatch.setenv("VWG_CONFIG_PATH", str(tmp_path / "absent.yaml"))
    monkeypatch.setenv("VWG_THREADS", "2")


def _files(root):
    return {
        path.relative_to(root).as_posix(): path.read_bytes()
        for path in sorted(root.rglob("*"))
        if path.is_file() and path.name != "run.json"
    }


def _synth(out, num=10, seed=4, variant="visual"):
    args = ["synth", "--out", str(out), "--num", str(num), "--seed", str(seed), "--variant", variant]
    assert main(args + ["--width", "128", "--height", "160"]) == 0
    return out / "manifest.json"


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "visualwordgrid" in capsys.readouterr().out


def test_usage_errors_exit_with_two(tmp_path):
    for argv in (
        ["synth", "--out", str(tmp_path), "--num", "0"],
        ["encode", "--dataset", "m.json", "--encoder", "unet", "--out", str(tmp_path)],
        ["train", "--dataset", "m.json", "--encoder", "layout", "--out", "x", "--grid", "16by16"],
        ["evaluate", "--pred", str(tmp_path)],
    ):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2


def test_missing_config_file_fails(tmp_path):
    assert main(["--config", str(tmp_path / "absent.yaml"), "synth", "--out", str(tmp_path / "d")]) == 1


def test_synth_is_reproducible(tmp_path):
    _synth(tmp_path / "a", num=3)
    _synth(tmp_path / "b", num=3)

    files = _files(tmp_path / "a")
    assert files == _files(tmp_path / "b")
    assert len([name for name in files if name.startswith("docs/")]) == 9
    run = json.loads((tmp_path / "a" / "run.json").read_text())
    assert run["command"] == "synth"
    assert run["seed"] == 4


def test_encode_writes_tensors_per_encoder(tmp_path):
    manifest = _synth(tmp_path / "data", num=2)
    doc_id = json.loads(manifest.read_text())["documents"][0]["id"]

    for kind, channels, aux in (("layout", 3, False), ("wordgrid", 8, False), ("vwg-pad", 11, False), ("vwg-2enc", 8, True)):
        out = tmp_path / kind
        assert main(["encode", "--dataset", str(manifest), "--encoder", kind, "--out", str(out)] + GRID) == 0
        main_tensor = read_tensor(out / f"{doc_id}.main.vwgt")
        assert main_tensor.shape == (16, 16, channels)
        assert (out / f"{doc_id}.aux.vwgt").exists() == aux
        mask = read_tensor(out / f"{doc_id}.mask.vwgt")
        assert mask.shape == (16, 16)
        assert set(np.unique(mask)) <= {0.0, 1.0, 2.0, 3.0, 4.0}
        if kind == "layout":
            assert set(np.unique(main_tensor)) <= {0.0, 1.0}


def test_encode_without_image_fails_for_visual_encoders(tmp_path):
    manifest = _synth(tmp_path / "data", num=2)
    data = json.loads(manifest.read_text())
    data["documents"][0]["image"] = None
    manifest.write_text(json.dumps(data))

    args = ["encode", "--dataset", str(manifest), "--out"]
    assert main(args + [str(tmp_path / "pad"), "--encoder", "vwg_pad"] + GRID) == 1
    missing, present = (entry["id"] for entry in data["documents"])
    assert not (tmp_path / "pad" / f"{missing}.main.vwgt").exists()
    assert (tmp_path / "pad" / f"{present}.main.vwgt").exists()
    assert main(args + [str(tmp_path / "words"), "--encoder", "wordgrid"] + GRID) == 0


def test_train_predict_evaluate(tmp_path):
    manifest = _synth(tmp_path / "data")
    ckpt = tmp_path / "model" / "layout.vwgm"
    train_args = ["train", "--dataset", str(manifest), "--encoder", "layout", "--seed", "1"] + GRID + TINY_NET

    assert main(train_args + ["--out", str(ckpt)]) == 0
    history = json.loads((tmp_path / "model" / "layout.vwgm.history.json").read_text())
    assert history["encoder_kind"] == "layout"
    assert len(history["epochs"]) == 2
    assert 0.0 <= history["train_miou"] <= 1.0
    assert (tmp_path / "model" / "layout.vwgm.run.json").exists()

    again = tmp_path / "again.vwgm"
    assert main(train_args + ["--out", str(again)]) == 0
    assert again.read_bytes() == ckpt.read_bytes()

    preds = tmp_path / "preds"
    assert main(["predict", "--ckpt", str(ckpt), "--dataset", str(manifest), "--out", str(preds)]) == 0
    prediction = json.loads(next(path for path in preds.glob("*.json") if path.name != "run.json").read_text())
    assert set(prediction["fields"]) == {"receiver", "supplier", "invoice_info", "total"}

    report_path = tmp_path / "report.json"
    assert main(["evaluate", "--pred", str(preds), "--dataset", str(manifest), "--out", str(report_path)]) == 0
    report = json.loads(report_path.read_text())
    assert report["dataset"]["documents"] == 10
    assert 0.0 <= report["dataset"]["far"] <= 1.0
    assert len(report["per_doc"]) == 10

    next(path for path in preds.glob("*.json") if path.name != "run.json").unlink()
    assert main(["evaluate", "--pred", str(preds), "--dataset", str(manifest), "--out", str(report_path)]) == 1


def test_predict_rejects_other_schema(tmp_path):
    manifest = _synth(tmp_path / "data")
    ckpt = tmp_path / "layout.vwgm"
    args = ["train", "--dataset", str(manifest), "--encoder", "layout", "--out", str(ckpt)]
    assert main(args + GRID + TINY_NET) == 0

    data = json.loads(manifest.read_text())
    data["schema"] = {"fields": ["total"]}
    for entry in data["documents"]:
        entry["annotation"] = None
    manifest.write_text(json.dumps(data))

    assert main(["predict", "--ckpt", str(ckpt), "--dataset", str(manifest), "--out", str(tmp_path / "p")]) == 1


def test_kfold_writes_comparison_table(tmp_path, capsys):
    manifest = _synth(tmp_path / "data")
    out = tmp_path / "ablation"
    args = ["kfold", "--dataset", str(manifest), "--encoders", "layout,wordgrid", "--folds", "1", "--seeds", "0"]

    assert main(args + ["--out", str(out)] + GRID + TINY_NET) == 0

    table = json.loads((out / "ablation.json").read_text())
    assert table["columns"] == ["Approach", "FAR", "WAR", "Inference Time", "#Parameters"]
    assert [row["approach"] for row in table["rows"]] == ["Layout Only", "WordGrid"]
    assert table["rows"][0]["parameters"] < table["rows"][1]["parameters"]
    assert len(table["runs"]) == 2
    printed = capsys.readouterr().out
    assert "Layout Only" in printed and "WordGrid" in printed


def test_kfold_times_a_second_pass_with_the_trained_encoder(tmp_path, monkeypatch):
    manifest = _synth(tmp_path / "data")
    passes = []
    predict_with = commands._predict_with

    def recording(checkpoint, encoder, docs, *, threads):
        passes.append(encoder)
        return predict_with(checkpoint, encoder, docs, threads=threads)

    monkeypatch.setattr(commands, "_predict_with", recording)
    args = ["kfold", "--dataset", str(manifest), "--encoders", "wordgrid", "--folds", "1", "--seeds", "0"]
    assert main(args + ["--out", str(tmp_path / "ablation")] + GRID + TINY_NET) == 0

    assert len(passes) == 2
    assert passes[0] is passes[1]
    run = json.loads((tmp_path / "ablation" / "ablation.json").read_text())["runs"][0]
    assert run["inference_time"] >= 0.0


def test_kfold_table_write_failure_exits_with_one(tmp_path):
    manifest = _synth(tmp_path / "data")
    out = tmp_path / "ablation"
    (out / "ablation.txt").mkdir(parents=True)
    args = ["kfold", "--dataset", str(manifest), "--encoders", "layout", "--folds", "1", "--seeds", "0"]

    assert main(args + ["--out", str(out)] + GRID + TINY_NET) == 1
    assert (out / "ablation.json").exists()


@slow
def test_visual_modalities_rank_as_expected(tmp_path):
    manifest = _synth(tmp_path / "data", num=200, seed=0)
    out = tmp_path / "ablation"
    args = ["kfold", "--dataset", str(manifest), "--encoders", "layout,wordgrid,vwg_pad", "--k", "5"]
    options = ["--folds", "1", "--seeds", "0,1,2", "--grid", "64x64", "--dim", "16", "--base-channels", "8"]
    assert main(args + options + ["--out", str(out)]) == 0

    war = {row["encoder"]: row["war"] for row in json.loads((out / "ablation.json").read_text())["rows"]}
    assert war["vwg_pad"] >= war["wordgrid"] >= war["layout"]
    assert war["vwg_pad"] - war["layout"] >= 0.05
