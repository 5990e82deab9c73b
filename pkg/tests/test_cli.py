import json

from gesturesynth.cli import EXIT_CONFIG, EXIT_OK, EXIT_STAGE, main
from gesturesynth.config import write_config


def _write_config(tmp_path, **overrides):
    values = {"dataset.root": str(tmp_path / "dataset"),
              "grabcut.iterations": 2,
              "gesture.kind": "up",
              "gesture.n_frames": 3,
              "gesture.step": 2}
    values.update(overrides)
    path = tmp_path / "config.cfg"
    write_config(values, path)
    return path


def test_ingest_writes_summary(toy_dataset_root, tmp_path):
    config = _write_config(tmp_path)
    out = tmp_path / "out"
    assert main(["ingest", "--config", str(config), "--out", str(out)]) == EXIT_OK
    summary = json.loads((out / "ingest" / "summary.json").read_text())
    assert summary["n_records"] == 6
    assert summary["environments"] == ["env_a", "env_b"]


def test_extract_then_synth_standalone(toy_dataset_root, tmp_path):
    config = _write_config(tmp_path)
    out = tmp_path / "out"
    assert main(["extract-masks", "--config", str(config),
                 "--out", str(out)]) == EXIT_OK
    listing = (out / "extract" / "extracted.jsonl").read_text().splitlines()
    assert len(listing) == 6

    # a separate invocation must reload the masks from disk
    assert main(["synth-gesture", "--config", str(config),
                 "--out", str(out)]) == EXIT_OK
    meta = json.loads((out / "synth" / "sequence.json").read_text())
    assert len(meta["frames"]) == 3
    assert meta["gesture"]["kind"] == "up"


def test_unknown_config_key_exits_2(tmp_path):
    config = tmp_path / "bad.cfg"
    config.write_text("no.such.key = 1\n")
    assert main(["run", "--config", str(config),
                 "--out", str(tmp_path / "out")]) == EXIT_CONFIG


def test_missing_dataset_root_exits_2(tmp_path):
    config = tmp_path / "c.cfg"
    config.write_text("gesture.kind = up\n")
    assert main(["ingest", "--config", str(config),
                 "--out", str(tmp_path / "out")]) == EXIT_CONFIG


def test_broken_dataset_exits_3(tmp_path):
    config = _write_config(tmp_path)  # dataset dir never created
    assert main(["ingest", "--config", str(config),
                 "--out", str(tmp_path / "out")]) == EXIT_STAGE


def test_stage_missing_prerequisites_exits_3(toy_dataset_root, tmp_path):
    config = _write_config(tmp_path)
    assert main(["assemble", "--config", str(config),
                 "--out", str(tmp_path / "fresh")]) == EXIT_STAGE


def test_make_toy_writes_runnable_workspace(tmp_path, capsys):
    assert main(["make-toy", "--out", str(tmp_path / "toy")]) == EXIT_OK
    assert (tmp_path / "toy" / "config.cfg").is_file()
    assert (tmp_path / "toy" / "data" / "kitchen" / "annotations.csv").is_file()
    assert "gesturesynth run" in capsys.readouterr().out
