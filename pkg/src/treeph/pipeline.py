"""Cohort pipeline: trees -> diagrams -> features -> statistics.

Output layout under ``out_dir``::

    diagrams/<subject>_dgm0.csv, diagrams/<subject>_dgm1.csv
    run_report.json
    features_dim<d>.csv
    report_<covariate>_dim<d>_<control>.json
    heatmap_<kind>_dim<d>.csv
"""
from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .diagram import read_diagram, write_diagram
from .errors import SubjectError
from .features import LENGTH_EXPONENTS, feature_matrix, features_to_csv, residualize, scale_by_length
from .ph0 import tree_components
from .ph1 import build_rips, default_max_scale, persistence1
from .stats import diproperm, heatmap_from_matrix, pca, pearson
from .treeio import load_tree, read_manifest, subsample, total_length

log = logging.getLogger(__name__)

CONTROLS = ("none", "residual", "L", "sqrtL", "cbrtL")


@dataclass
class PipelineConfig:
    manifest: str
    out_dir: str
    direction: tuple[float, float, float] = (0.0, 0.0, 1.0)
    m: int = 3000
    max_scale: str | float = "bbox"
    n: int = 1
    N: int = 100
    n_perm: int = 1000
    seed: int = 0
    workers: int = 1
    dims: tuple[int, ...] = (0, 1)
    force: bool = False

    def validate(self):
        if not Path(self.manifest).is_file():
            raise FileNotFoundError(f"manifest not found: {self.manifest}")
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if not 1 <= self.n <= self.N:
            raise ValueError("window needs 1 <= n <= N")
        if self.n_perm < 1:
            raise ValueError("n_perm must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if not set(self.dims) <= {0, 1}:
            raise ValueError("dims must be drawn from {0, 1}")
        resolve_max_scale(self.max_scale, np.zeros((1, 3)))

    @property
    def diagram_dir(self):
        return Path(self.out_dir) / "diagrams"


def resolve_max_scale(policy, points) -> float:
    """``"bbox"`` (half the bounding-box diagonal), ``"bbox:<f>"`` (that times f),
    or a positive number in mm."""
    if isinstance(policy, str):
        if policy == "bbox":
            return default_max_scale(points)
        if policy.startswith("bbox:"):
            f = float(policy[5:])
            if f <= 0:
                raise ValueError("bbox fraction must be positive")
            return f * default_max_scale(points)
        policy = float(policy)
    if not policy > 0:
        raise ValueError("max_scale must be positive")
    return float(policy)


def diagram_paths(config, subject_id):
    d = config.diagram_dir
    return {dim: d / f"{subject_id}_dgm{dim}.csv" for dim in (0, 1)}


def _subject_diagrams(job):
    """Worker body: compute and write the requested diagrams for one subject."""
    sid, tree_path, cfg = job
    paths = diagram_paths(cfg, sid)
    tree = load_tree(tree_path)
    written = []
    if 0 in cfg.dims:
        write_diagram(paths[0], tree_components(tree, cfg.direction))
        written.append(0)
    if 1 in cfg.dims:
        cloud = subsample(tree, cfg.m, cfg.seed)
        scale = resolve_max_scale(cfg.max_scale, cloud.points)
        write_diagram(paths[1], persistence1(build_rips(cloud, scale)))
        written.append(1)
    return sid, written


def cmd_diagrams(config: PipelineConfig) -> dict:
    """Compute per-subject diagram files; returns (and writes) the run report.

    Subjects whose requested files already exist are skipped unless
    ``config.force``.  A failing subject is recorded and the run goes on.
    """
    config.validate()
    rows = sorted(read_manifest(config.manifest), key=lambda r: r.subject_id)
    config.diagram_dir.mkdir(parents=True, exist_ok=True)
    todo, skipped = [], []
    for r in rows:
        paths = diagram_paths(config, r.subject_id)
        if not config.force and all(paths[d].exists() for d in config.dims):
            skipped.append(r.subject_id)
        else:
            todo.append((r.subject_id, r.tree_path, config))

    computed, failed = [], []
    if config.workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [(job[0], pool.submit(_subject_diagrams, job)) for job in todo]
            results = []
            for sid, fut in futures:
                try:
                    results.append(fut.result())
                except Exception as exc:  # noqa: BLE001 - recorded per subject
                    failed.append({"subject_id": sid, "error": f"{type(exc).__name__}: {exc}"})
    else:
        results = []
        for job in todo:
            try:
                results.append(_subject_diagrams(job))
            except Exception as exc:  # noqa: BLE001 - recorded per subject
                failed.append({"subject_id": job[0], "error": f"{type(exc).__name__}: {exc}"})
    computed = sorted(sid for sid, _ in results)
    for f in failed:
        log.warning("subject %s failed: %s", f["subject_id"], f["error"])

    report = {
        "n_subjects": len(rows),
        "dims": list(config.dims),
        "computed": computed,
        "skipped": skipped,
        "failed": sorted(failed, key=lambda f: f["subject_id"]),
    }
    Path(config.out_dir, "run_report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return report


def load_cohort_diagrams(config, dim):
    """Manifest rows (sorted by id) with their diagrams of dimension ``dim``."""
    rows = sorted(read_manifest(config.manifest), key=lambda r: r.subject_id)
    diagrams = []
    for r in rows:
        path = diagram_paths(config, r.subject_id)[dim]
        if not path.exists():
            raise SubjectError(r.subject_id, f"missing diagram file {path}; run 'diagrams' first")
        try:
            diagrams.append(read_diagram(path, dim))
        except ValueError as exc:
            raise SubjectError(r.subject_id, str(exc)) from exc
    return rows, diagrams


def cohort_lengths(rows):
    out = []
    for r in rows:
        try:
            out.append(total_length(load_tree(r.tree_path)))
        except (OSError, ValueError) as exc:
            raise SubjectError(r.subject_id, f"cannot compute total length: {exc}") from exc
    return np.array(out)


def apply_control(X, control, lengths=None):
    if control not in CONTROLS:
        raise ValueError(f"control must be one of {CONTROLS}")
    if control == "none":
        return X
    if lengths is None:
        raise ValueError(f"control {control!r} needs total lengths")
    if control == "residual":
        return residualize(X, lengths)
    return scale_by_length(X, lengths, LENGTH_EXPONENTS[control])


def analyze_matrix(X, ages=None, sexes=None, covariate="age", n_pc=3, n_perm=1000, seed=0) -> dict:
    """PCA of the feature matrix, then PC1-vs-age or the sex permutation test."""
    X = np.asarray(X, dtype=float)
    k = max(1, min(n_pc, X.shape[0] - 1, X.shape[1]))
    model = pca(X, k)
    report = {
        "pca": {
            "variances": model.variances.tolist(),
            "explained_ratio": model.explained_ratio.tolist(),
            "loadings": model.loadings.T.tolist(),
        },
        "n_subjects": int(X.shape[0]),
    }
    if covariate == "age":
        res = pearson(model.scores[:, 0], np.asarray(ages, dtype=float))
        report["correlation"] = {"rho": res.rho, "p": res.p_value, "n": res.n}
    elif covariate == "sex":
        sexes = np.asarray(sexes)
        male = sexes == "M"
        res = diproperm(X[male], X[~male], n_perm, seed)
        report["diproperm"] = {
            "observed": res.observed_stat,
            "p_emp": res.p_emp,
            "n_perm": res.n_perm,
            "seed": res.seed,
            "groups": {"M": int(male.sum()), "F": int((~male).sum())},
        }
    else:
        raise ValueError("covariate must be 'age' or 'sex'")
    return report


def cmd_featurize(config: PipelineConfig, dimension=0) -> Path:
    rows, diagrams = load_cohort_diagrams(config, dimension)
    X = feature_matrix(diagrams, config.n, config.N)
    out = Path(config.out_dir) / f"features_dim{dimension}.csv"
    out.write_text(features_to_csv([r.subject_id for r in rows], X, config.n, config.N, dimension), encoding="utf-8")
    return out


def cmd_analyze(config: PipelineConfig, covariate="age", dimension=0, control="none") -> dict:
    """Featurize a cohort, apply a length control, and run the covariate test.

    Writes ``report_<covariate>_dim<d>_<control>.json`` and returns the report.
    """
    rows, diagrams = load_cohort_diagrams(config, dimension)
    X = feature_matrix(diagrams, config.n, config.N)
    lengths = cohort_lengths(rows) if control != "none" else None
    X = apply_control(X, control, lengths)
    report = analyze_matrix(
        X,
        ages=[r.age for r in rows],
        sexes=[r.sex for r in rows],
        covariate=covariate,
        n_perm=config.n_perm,
        seed=config.seed,
    )
    report.update(
        {
            "covariate": covariate,
            "dimension": dimension,
            "control": control,
            "window": [config.n, config.N],
            "subjects": [r.subject_id for r in rows],
        }
    )
    out = Path(config.out_dir) / f"report_{covariate}_dim{dimension}_{control}.json"
    out.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return report


def cmd_heatmap(config: PipelineConfig, covariate="age", dimension=0, N_max=200, control="none"):
    rows, diagrams = load_cohort_diagrams(config, dimension)
    X = feature_matrix(diagrams, 1, N_max)
    if control != "none":
        X = apply_control(X, control, cohort_lengths(rows))
    if covariate == "age":
        grid = heatmap_from_matrix(X, [r.age for r in rows], "age_rho", config.n_perm, config.seed)
    elif covariate == "sex":
        grid = heatmap_from_matrix(X, [r.sex for r in rows], "sex_p", config.n_perm, config.seed)
    else:
        raise ValueError("covariate must be 'age' or 'sex'")
    out = Path(config.out_dir) / f"heatmap_{grid.kind}_dim{dimension}.csv"
    out.write_text(grid.to_csv(), encoding="utf-8")
    return grid

