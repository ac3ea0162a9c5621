import json

import numpy as np
import pytest

from treeph.cli import EXIT_FATAL, EXIT_OK, EXIT_PARTIAL, EXIT_USAGE, main
from treeph.diagram import PersistenceDiagram, write_diagram
from treeph.treeio import ManifestRow, PointCloud, read_manifest, write_manifest, write_point_cloud


@pytest.fixture(scope="module")
def cohort(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    assert main(["synth", "--out", str(root), "--subjects", "5", "--seed", "2"]) == EXIT_OK
    return root / "manifest.csv"


def run_pipeline_args(manifest, out):
    return ["--manifest", str(manifest), "--out", str(out), "--window", "1", "15", "--n-perm", "40"]


def test_synth_writes_manifest(cohort):
    assert len(read_manifest(cohort)) == 5


def test_diagrams_analyze_heatmap(cohort, tmp_path, capsys):
    args = run_pipeline_args(cohort, tmp_path)
    assert main(["diagrams", *args, "-m", "60"]) == EXIT_OK
    assert len(list((tmp_path / "diagrams").iterdir())) == 10
    capsys.readouterr()
    assert main(["analyze", *args, "--covariate", "age", "--dim", "0"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["covariate"] == "age"
    assert main(["analyze", *args, "--covariate", "sex", "--dim", "1", "--control", "residual"]) == EXIT_OK
    assert main(["heatmap", *args, "--n-max", "6"]) == EXIT_OK
    assert (tmp_path / "heatmap_age_rho_dim0.csv").exists()
    assert main(["featurize", *args, "--dim", "1"]) == EXIT_OK


def test_partial_failure_exit_code(cohort, tmp_path):
    rows = read_manifest(cohort)[:2]
    rows.append(ManifestRow("gone", str(tmp_path / "gone.tree"), 30.0, "M"))
    write_manifest(tmp_path / "m.csv", rows)
    code = main(["diagrams", *run_pipeline_args(tmp_path / "m.csv", tmp_path / "out"), "--dims", "0"])
    assert code == EXIT_PARTIAL
    report = json.loads((tmp_path / "out" / "run_report.json").read_text())
    assert [f["subject_id"] for f in report["failed"]] == ["gone"]


def test_usage_errors(cohort, tmp_path):
    assert main(["diagrams", "--out", str(tmp_path)]) == EXIT_USAGE
    assert main(["nonsense"]) == EXIT_USAGE
    assert main(["diagrams", *run_pipeline_args(cohort, tmp_path), "--direction", "1,2"]) == EXIT_USAGE
    assert main(["diagrams", *run_pipeline_args(cohort, tmp_path), "--dims", "2"]) == EXIT_USAGE


def test_fatal_error_exit_code(cohort, tmp_path):
    # analysing before any diagram exists is a fatal, subject-attributed error
    assert main(["analyze", *run_pipeline_args(cohort, tmp_path)]) == EXIT_FATAL


def test_env_overrides(cohort, tmp_path, monkeypatch):
    monkeypatch.setenv("TREEPH_WORKERS", "2")
    monkeypatch.setenv("TREEPH_SEED", "5")
    args = run_pipeline_args(cohort, tmp_path)
    assert main(["diagrams", *args, "-m", "40", "--dims", "1"]) == EXIT_OK
    monkeypatch.delenv("TREEPH_WORKERS")
    monkeypatch.delenv("TREEPH_SEED")
    out2 = tmp_path / "explicit"
    args2 = run_pipeline_args(cohort, out2)
    assert main(["diagrams", *args2, "-m", "40", "--dims", "1", "--seed", "5"]) == EXIT_OK
    a = sorted((tmp_path / "diagrams").iterdir())
    b = sorted((out2 / "diagrams").iterdir())
    assert [p.read_bytes() for p in a] == [p.read_bytes() for p in b]


def test_dist_subcommand(tmp_path, capsys):
    write_diagram(tmp_path / "a.csv", PersistenceDiagram(np.array([[0.0, 2.0]]), 0))
    write_diagram(tmp_path / "b.csv", PersistenceDiagram(np.array([[0.0, 3.0]]), 0))
    assert main(["dist", "--metric", "wasserstein", str(tmp_path / "a.csv"), str(tmp_path / "b.csv")]) == EXIT_OK
    assert float(capsys.readouterr().out) == 1.0
    assert main(["dist", "--metric", "bottleneck", str(tmp_path / "a.csv"), str(tmp_path / "b.csv")]) == EXIT_OK
    assert float(capsys.readouterr().out) == 1.0
    write_point_cloud(tmp_path / "p.xyz", PointCloud(np.zeros((1, 3))))
    write_point_cloud(tmp_path / "q.xyz", PointCloud(np.array([[0.0, 0, 0], [1.0, 0, 0]])))
    assert main(["dist", "--metric", "hausdorff", str(tmp_path / "p.xyz"), str(tmp_path / "q.xyz")]) == EXIT_OK
    assert float(capsys.readouterr().out) == 1.0
    assert main(["dist", "--metric", "wasserstein", "--p", "0.5",
                 str(tmp_path / "a.csv"), str(tmp_path / "b.csv")]) == EXIT_USAGE
