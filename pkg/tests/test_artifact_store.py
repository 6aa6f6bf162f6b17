import json

import numpy as np
import pandas as pd

from utils.artifact_store import MANIFEST_SUFFIX, ArtifactStore, dumps


def _store(tmp_path):
    return ArtifactStore(tmp_path / "out", {"seed": 3, "runs": 2}, master_seed=3)


def test_csv_gets_manifest(tmp_path):
    store = _store(tmp_path)
    target = store.write_csv("a.csv", pd.DataFrame({"x": [1, 2]}), extra={"note": "hi"})
    assert target.read_text(encoding="utf-8") == "x\n1\n2\n"
    manifest = json.loads(target.with_name("a.csv" + MANIFEST_SUFFIX).read_text(encoding="utf-8"))
    assert manifest["config"] == {"seed": 3, "runs": 2}
    assert manifest["master_seed"] == 3
    assert manifest["rng"] == "PCG64"
    assert manifest["file"] == "a.csv"
    assert manifest["note"] == "hi"
    assert store.written == [str(target)]


def test_warnings_reach_later_manifests(tmp_path):
    store = _store(tmp_path)
    store.warn("synthetic input")
    store.warn("synthetic input")
    target = store.write_json("s.json", {"b": 1, "a": np.int64(2)})
    assert json.loads(target.read_text(encoding="utf-8")) == {"a": 2, "b": 1}
    manifest = json.loads(target.with_name("s.json" + MANIFEST_SUFFIX).read_text(encoding="utf-8"))
    assert manifest["warnings"] == ["synthetic input"]


def test_dumps_is_sorted_and_numpy_safe():
    text = dumps({"z": np.float64(0.5), "a": np.array([1, 2]), "m": (np.bool_(True),)})
    assert text == '{\n  "a": [\n    1,\n    2\n  ],\n  "m": [\n    true\n  ],\n  "z": 0.5\n}\n'


def test_run_records_resume_only_on_matching_config(tmp_path):
    store = _store(tmp_path)
    frames = {"quakes": pd.DataFrame({"ordinal": [0, 1], "size_signed": [3, -2]})}
    store.save_run("sim", 1, frames, {"seed": 11, "alpha": 0.84})
    assert store.run_record("sim", 1, "quakes").name == "quakes-run001.csv"

    loaded = store.load_run("sim", 1, ("quakes",), {"seed": 11, "alpha": 0.84})
    assert loaded is not None
    assert loaded["quakes"]["size_signed"].tolist() == [3, -2]
    assert store.load_run("sim", 1, ("quakes",), {"seed": 11, "alpha": 0.5}) is None
    assert store.load_run("sim", 2, ("quakes",), {"seed": 11, "alpha": 0.84}) is None
    assert store.load_run("sim", 1, ("quakes", "wealth"), {"seed": 11, "alpha": 0.84}) is None


def test_merge_runs_prepends_run_column():
    merged = ArtifactStore.merge_runs([pd.DataFrame({"v": [1]}), pd.DataFrame({"v": [2, 3]})])
    assert list(merged.columns) == ["run", "v"]
    assert merged["run"].tolist() == [0, 1, 1]
    assert ArtifactStore.merge_runs([]).empty
