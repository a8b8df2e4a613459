import json

import numpy as np
import pytest

from app.core.config_loader import load_pipeline_config
from app.core.errors import StaleArtifactError
from app.models.analysis import ClusterAssignment, ClusterSourceKind
from app.services import artifacts
from app.services.mixing import knn_graph
from app.services.skyculture import load_dataset
from app.workers.jobs_ingest import run_ingest


def test_csv_text_keeps_full_float_precision():
    text = artifacts.csv_text(("a", "b", "c"), [(0.1 + 0.2, np.int64(3), "x,y")])
    assert text == 'a,b,c\n0.30000000000000004,3,"x,y"\n'


def test_atomic_write_leaves_no_temporaries(tmp_path):
    target = tmp_path / "deep" / "file.txt"
    artifacts.atomic_write_text(target, "one\n")
    artifacts.atomic_write_text(target, "two\n")
    assert target.read_text(encoding="utf-8") == "two\n"
    assert sorted(p.name for p in target.parent.iterdir()) == ["file.txt"]


def test_manifest_round_trip(tmp_path):
    out = artifacts.write_csv(tmp_path / "t.csv", ("x",), [(1,), (2,)])
    artifacts.write_manifest(tmp_path, "stage", [out], params={"p": 3}, inputs={"b": "2", "a": "1"}, report={"n": 2})
    manifest = artifacts.verify_manifest(tmp_path, "stage")
    assert manifest["params"] == {"p": 3}
    assert list(manifest["inputs"]) == ["a", "b"]
    assert manifest["outputs"] == {"t.csv": artifacts.sha256_file(out)}
    assert "time" not in json.dumps(manifest)


def test_manifest_is_byte_stable(tmp_path):
    out = artifacts.write_csv(tmp_path / "t.csv", ("x",), [(1,)])
    first = artifacts.write_manifest(tmp_path, "stage", [out], params={"p": 1}).read_bytes()
    second = artifacts.write_manifest(tmp_path, "stage", [out], params={"p": 1}).read_bytes()
    assert first == second


def test_missing_manifest(tmp_path):
    with pytest.raises(StaleArtifactError, match="has not been run"):
        artifacts.verify_manifest(tmp_path, "features")


def test_changed_output_is_detected(tmp_path):
    out = artifacts.write_csv(tmp_path / "t.csv", ("x",), [(1,)])
    artifacts.write_manifest(tmp_path, "stage", [out])
    out.write_text("x\n2\n", encoding="utf-8")
    with pytest.raises(StaleArtifactError, match="hash mismatch"):
        artifacts.verify_manifest(tmp_path, "stage")


def test_deleted_output_is_detected(tmp_path):
    out = artifacts.write_csv(tmp_path / "t.csv", ("x",), [(1,)])
    artifacts.write_manifest(tmp_path, "stage", [out])
    out.unlink()
    with pytest.raises(StaleArtifactError, match="artifact missing"):
        artifacts.verify_manifest(tmp_path, "stage")


def test_unreadable_manifest(tmp_path):
    artifacts.manifest_path(tmp_path, "stage").write_text("{not json", encoding="utf-8")
    with pytest.raises(StaleArtifactError, match="unreadable manifest"):
        artifacts.verify_manifest(tmp_path, "stage")


def test_dataset_artifact_rebuilds_the_dataset(synthetic_sky):
    config = load_pipeline_config(synthetic_sky.config_path)
    report = run_ingest(config)
    original = load_dataset(config)
    restored = artifacts.load_dataset_artifact(config.output_dir)

    assert report["figures"] == len(original.figures)
    assert restored.figures == original.figures
    assert restored.cultures == original.cultures
    assert dict(restored.use_overrides) == dict(original.use_overrides)
    assert restored.pruned_stars == original.pruned_stars
    for fig in restored.figures:
        for star in fig.stars:
            assert restored.catalog.get(star) == original.catalog.get(star)


def test_knn_artifact_round_trip(tmp_path):
    graph = knn_graph(np.random.default_rng(0).normal(size=(12, 3)), 3, nodes=tuple(f"c/F{i}" for i in range(12)))
    out = artifacts.save_knn(tmp_path, graph)
    artifacts.write_manifest(tmp_path, artifacts.KNN, [out], params={"p": 3})
    restored = artifacts.load_knn(tmp_path)
    assert restored.nodes == graph.nodes
    assert np.array_equal(restored.out_edges, graph.out_edges)


def test_clusters_artifact_round_trip(tmp_path):
    assignment = ClusterAssignment(labels={"b/1": "C2", "a/1": "C1"}, source=ClusterSourceKind.RULES, k=7)
    out = artifacts.save_clusters(tmp_path, assignment)
    assert out.read_text(encoding="utf-8") == "figure_id,cluster\na/1,C1\nb/1,C2\n"
    artifacts.write_manifest(tmp_path, artifacts.DIVERSITY, [out], params={"cluster_source": "rules", "k": 7})
    restored = artifacts.load_clusters(tmp_path)
    assert dict(restored.labels) == dict(assignment.labels)
    assert restored.source == ClusterSourceKind.RULES
    assert restored.k == 7


def _stage(out_dir, stage, value, inputs=None):
    out = artifacts.write_csv(out_dir / f"{stage}.csv", ("x",), [(value,)])
    artifacts.write_manifest(out_dir, stage, [out], inputs=inputs)


def test_rerun_upstream_stage_makes_downstream_stale(tmp_path):
    _stage(tmp_path, artifacts.DATASET, 1)
    _stage(tmp_path, artifacts.FEATURES, 1, {artifacts.DATASET: artifacts.manifest_digest(tmp_path, artifacts.DATASET)})
    _stage(tmp_path, artifacts.KNN, 1, {artifacts.FEATURES: artifacts.manifest_digest(tmp_path, artifacts.FEATURES)})
    artifacts.verify_manifest(tmp_path, artifacts.KNN)

    _stage(tmp_path, artifacts.DATASET, 2)
    with pytest.raises(StaleArtifactError, match="'dataset' was re-run after 'features'"):
        artifacts.verify_manifest(tmp_path, artifacts.KNN)

    _stage(tmp_path, artifacts.FEATURES, 2, {artifacts.DATASET: artifacts.manifest_digest(tmp_path, artifacts.DATASET)})
    with pytest.raises(StaleArtifactError, match="'features' was re-run after 'knn'"):
        artifacts.verify_manifest(tmp_path, artifacts.KNN)


def test_identical_rerun_keeps_downstream_valid(tmp_path):
    _stage(tmp_path, artifacts.DATASET, 1)
    _stage(tmp_path, artifacts.KNN, 1, {artifacts.DATASET: artifacts.manifest_digest(tmp_path, artifacts.DATASET)})
    _stage(tmp_path, artifacts.DATASET, 1)
    artifacts.verify_manifest(tmp_path, artifacts.KNN)


def test_removed_upstream_manifest_is_stale(tmp_path):
    _stage(tmp_path, artifacts.DATASET, 1)
    _stage(tmp_path, artifacts.FEATURES, 1, {artifacts.DATASET: artifacts.manifest_digest(tmp_path, artifacts.DATASET)})
    artifacts.manifest_path(tmp_path, artifacts.DATASET).unlink()
    with pytest.raises(StaleArtifactError, match="has not been run"):
        artifacts.verify_manifest(tmp_path, artifacts.FEATURES)
