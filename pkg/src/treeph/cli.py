"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 some subjects failed, 3 fatal error.
``TREEPH_WORKERS`` and ``TREEPH_SEED`` supply defaults for ``--workers`` and
``--seed``.
"""
from __future__ import annotations

import json
import logging
import sys

import click

from . import diagmetrics, pipeline, synth
from .diagram import read_diagram
from .treeio import read_point_cloud

EXIT_OK, EXIT_USAGE, EXIT_PARTIAL, EXIT_FATAL = 0, 1, 2, 3


class PartialFailure(Exception):
    pass


def _direction(text):
    parts = [float(t) for t in text.replace(",", " ").split()]
    if len(parts) != 3:
        raise click.BadParameter("direction needs three components, e.g. '0,0,1'")
    return tuple(parts)


def _max_scale(text):
    try:
        return float(text)
    except ValueError:
        return text


def common_options(f):
    opts = [
        click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False)),
        click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False)),
        click.option("--seed", type=int, default=0, envvar="TREEPH_SEED", show_default=True),
        click.option("--workers", type=click.IntRange(min=1), default=1, envvar="TREEPH_WORKERS", show_default=True),
        click.option("--window", nargs=2, type=int, default=(1, 100), show_default=True, help="n N"),
        click.option("--n-perm", type=click.IntRange(min=1), default=1000, show_default=True),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _config(manifest, out_dir, seed, workers, window, n_perm, **extra):
    return pipeline.PipelineConfig(
        manifest=manifest, out_dir=out_dir, seed=seed, workers=workers,
        n=window[0], N=window[1], n_perm=n_perm, **extra,
    )


@click.group()
@click.option("-v", "--verbose", is_flag=True)
def cli(verbose):
    """Persistent-homology features of embedded trees."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(message)s")


@cli.command()
@common_options
@click.option("--direction", default="0,0,1", show_default=True, help="height direction x,y,z")
@click.option("-m", "--points", "m", type=click.IntRange(min=1), default=3000, show_default=True)
@click.option("--max-scale", default="bbox", show_default=True, help="'bbox', 'bbox:<fraction>' or mm")
@click.option("--dims", default="0,1", show_default=True)
@click.option("--force", is_flag=True, help="recompute existing diagram files")
def diagrams(manifest, out_dir, seed, workers, window, n_perm, direction, m, max_scale, dims, force):
    """Compute Dgm_0 and Dgm_1 files for every subject in the manifest."""
    try:
        dim_set = tuple(sorted({int(d) for d in dims.split(",") if d.strip()}))
    except ValueError:
        raise click.BadParameter("dims must be a comma list of 0 and 1") from None
    cfg = _config(manifest, out_dir, seed, workers, window, n_perm,
                  direction=_direction(direction), m=m, max_scale=_max_scale(max_scale),
                  dims=dim_set, force=force)
    try:
        cfg.validate()
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None
    report = pipeline.cmd_diagrams(cfg)
    click.echo(f"computed {len(report['computed'])}, skipped {len(report['skipped'])}, failed {len(report['failed'])}")
    if report["failed"]:
        raise PartialFailure(f"{len(report['failed'])} subject(s) failed; see run_report.json")


@cli.command()
@common_options
@click.option("--dim", "dimension", type=click.Choice(["0", "1"]), default="0")
def featurize(manifest, out_dir, seed, workers, window, n_perm, dimension):
    """Write the persistence feature matrix of one dimension."""
    cfg = _config(manifest, out_dir, seed, workers, window, n_perm)
    click.echo(str(pipeline.cmd_featurize(cfg, int(dimension))))


@cli.command()
@common_options
@click.option("--covariate", type=click.Choice(["age", "sex"]), default="age")
@click.option("--dim", "dimension", type=click.Choice(["0", "1"]), default="0")
@click.option("--control", type=click.Choice(list(pipeline.CONTROLS)), default="none")
def analyze(manifest, out_dir, seed, workers, window, n_perm, covariate, dimension, control):
    """PCA plus age correlation or sex permutation test; prints the JSON report."""
    cfg = _config(manifest, out_dir, seed, workers, window, n_perm)
    report = pipeline.cmd_analyze(cfg, covariate, int(dimension), control)
    click.echo(json.dumps(report, indent=2, sort_keys=True))


@cli.command()
@common_options
@click.option("--covariate", type=click.Choice(["age", "sex"]), default="age")
@click.option("--dim", "dimension", type=click.Choice(["0", "1"]), default="0")
@click.option("--n-max", type=click.IntRange(min=2), default=200, show_default=True)
@click.option("--control", type=click.Choice(list(pipeline.CONTROLS)), default="none")
def heatmap(manifest, out_dir, seed, workers, window, n_perm, covariate, dimension, n_max, control):
    """Statistic for every feature window n < N <= N_max, as n,N,value CSV."""
    cfg = _config(manifest, out_dir, seed, workers, window, n_perm)
    grid = pipeline.cmd_heatmap(cfg, covariate, int(dimension), n_max, control)
    click.echo(f"{len(grid.entries)} cells written")


@cli.command()
@click.option("--metric", type=click.Choice(["wasserstein", "bottleneck", "hausdorff"]), required=True)
@click.option("--p", "p", type=float, default=1.0, show_default=True, help="Wasserstein exponent")
@click.option("--dim", type=int, default=None, help="dimension to read from multi-dimension diagram files")
@click.argument("a", type=click.Path(exists=True, dir_okay=False))
@click.argument("b", type=click.Path(exists=True, dir_okay=False))
def dist(metric, p, dim, a, b):
    """Distance between two diagram CSVs (or two point clouds for hausdorff)."""
    if metric == "hausdorff":
        value = diagmetrics.hausdorff(read_point_cloud(a), read_point_cloud(b))
    else:
        da, db = read_diagram(a, dim), read_diagram(b, dim)
        if metric == "wasserstein":
            if p < 1:
                raise click.UsageError("--p must be >= 1")
            value = diagmetrics.wasserstein(da, db, diagmetrics.MatchingCost(p=p))
        else:
            value = diagmetrics.bottleneck(da, db)
    click.echo(repr(float(value)))


@cli.command(name="synth")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--subjects", type=click.IntRange(min=1), default=60, show_default=True)
@click.option("--seed", type=int, default=0, envvar="TREEPH_SEED", show_default=True)
@click.option("--bend-base", type=float, default=2.0, show_default=True)
@click.option("--age-slope", type=float, default=0.05, show_default=True, help="bend mm per year")
@click.option("--bend-noise", type=float, default=0.15, show_default=True)
@click.option("--loop-probability", type=float, default=0.9, show_default=True)
@click.option("--sex-effect", type=float, default=1.0, show_default=True)
def synth_cmd(out_dir, subjects, seed, bend_base, age_slope, bend_noise, loop_probability, sex_effect):
    """Write a synthetic cohort: one tree file per subject plus manifest.csv."""
    spec = synth.SynthSpec(
        n_subjects=subjects, seed=seed, bend_base=bend_base, bend_slope=age_slope,
        bend_noise=bend_noise, loop_probability=loop_probability, sex_effect_size=sex_effect,
    )
    try:
        spec.validate()
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None
    trees, rows = synth.generate_cohort(spec)
    click.echo(str(synth.write_cohort(out_dir, trees, rows)))


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="treeph", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_FATAL
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except PartialFailure as exc:
        click.echo(str(exc), err=True)
        return EXIT_PARTIAL
    except Exception as exc:  # noqa: BLE001 - top-level boundary
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        return EXIT_FATAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
