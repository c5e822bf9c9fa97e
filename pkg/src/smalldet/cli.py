"""Command-line interface: simulation, scoring, filtering, dataset stats.

Every command is deterministic given its flags, config file, and seed.
Exit codes: 0 on success (all outputs written), 1 for usage errors,
2 for data errors (malformed CSV/JSON/FTM1/annotation files).

A JSON config file passed via ``--config`` may hold one section per
command (``{"simulate": {...}, "score": {...}, ...}``) whose keys mirror
the long flag names with underscores; explicit flags always win over
config-file values, which win over built-in defaults.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .assign import AssignConfig, MclaWeights, criterion_matrix, scores_to_csv
from .freq import HfpConfig, build_hfp_mask, fd_split, hfp_purify
from .ingest import (
    CocoFormatError,
    CocoValidationError,
    dataset_assignment_stats,
    load_coco,
)
from .priors import LevelSpec
from .sim import (
    SimConfig,
    SizeBins,
    make_assigner,
    report_to_csv,
    report_to_json,
    run_simulation,
)
from .svgplot import bar_chart_svg, pie_chart_svg
from .tensorio import TensorFormatError, read_ftm, write_ftm

__all__ = ["cli", "main", "DataError", "parse_box_csv"]

ASSIGNER_NAMES = ("one_stage_maxiou", "two_stage_maxiou", "mcla")


class DataError(ValueError):
    """Input data problem; mapped to exit status 2."""


def parse_box_csv(text: str, source: str = "<input>") -> np.ndarray:
    """Parse a box list CSV with an ``x1,y1,x2,y2`` header into an array.

    Raises :class:`DataError` naming the offending line on any malformed
    row, and when the file contains no boxes at all.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DataError(f"{source}: empty file, expected an x1,y1,x2,y2 header")
    if [h.strip().lower() for h in header] != ["x1", "y1", "x2", "y2"]:
        raise DataError(
            f"{source}: line 1: expected header x1,y1,x2,y2, got {','.join(header)}"
        )
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            raise DataError(
                f"{source}: line {lineno}: expected 4 values, got {len(row)}"
            )
        try:
            rows.append([float(c) for c in row])
        except ValueError as exc:
            raise DataError(f"{source}: line {lineno}: {exc}") from exc
    if not rows:
        raise DataError(f"{source}: no boxes found")
    arr = np.asarray(rows, dtype=np.float64)
    bad = (arr[:, 2] < arr[:, 0]) | (arr[:, 3] < arr[:, 1])
    if bad.any():
        raise DataError(
            f"{source}: line {int(np.nonzero(bad)[0][0]) + 2}: box corners out of order"
        )
    return arr


def _load_config_section(config_path: str | None, section: str) -> dict:
    if not config_path:
        return {}
    try:
        doc = json.loads(Path(config_path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{config_path}: invalid JSON at byte offset {exc.pos}: {exc.msg}")
    except OSError as exc:
        raise DataError(f"{config_path}: {exc}")
    if not isinstance(doc, dict):
        raise DataError(f"{config_path}: config root must be a JSON object")
    sect = doc.get(section, {})
    if not isinstance(sect, dict):
        raise DataError(f"{config_path}: section {section!r} must be an object")
    return sect


def _pick(flag_value, cfg: dict, key: str, default):
    """Flag beats config file beats default; None marks an unset flag."""
    if flag_value is not None:
        return flag_value
    if key in cfg:
        return cfg[key]
    return default


def _weights_from(cfg: dict, lam1, lam2, lam3, c_poc, c_scc) -> MclaWeights:
    base = MclaWeights()
    return MclaWeights(
        lambda_iou=float(_pick(lam1, cfg, "lambda_iou", base.lambda_iou)),
        lambda_poc=float(_pick(lam2, cfg, "lambda_poc", base.lambda_poc)),
        lambda_scc=float(_pick(lam3, cfg, "lambda_scc", base.lambda_scc)),
        c_poc=float(_pick(c_poc, cfg, "c_poc", base.c_poc)),
        c_scc=float(_pick(c_scc, cfg, "c_scc", base.c_scc)),
    )


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


@click.group()
@click.version_option(version=__version__, prog_name="smalldet")
def cli():
    """Label-assignment analytics and frequency-domain feature tools."""


@cli.command()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON config file; the 'simulate' section applies.")
@click.option("--image-h", type=int, default=None, show_default="800",
              help="Synthetic image height in pixels.")
@click.option("--image-w", type=int, default=None, show_default="800",
              help="Synthetic image width in pixels.")
@click.option("--gts", "n_gts", type=int, default=None, show_default="2000",
              help="Ground-truth boxes per trial.")
@click.option("--max-dim", type=float, default=None, show_default="64",
              help="Upper bound on any box side, in pixels.")
@click.option("--seed", type=int, default=None, show_default="0",
              help="Base seed; trial t uses seed+t.")
@click.option("--trials", type=int, default=None, show_default="5",
              help="Number of independent trials.")
@click.option("--size-range", nargs=2, type=float, default=None,
              show_default="2 64", help="Uniform size range (lo hi), pixels.")
@click.option("--aspect-range", nargs=2, type=float, default=None,
              show_default="0.5 2", help="Uniform aspect range (lo hi).")
@click.option("--assigners", multiple=True,
              type=click.Choice(ASSIGNER_NAMES), default=None,
              help="Restrict to these assigners (default: all three).")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Worker threads for trials; output is identical for any value.")
@click.option("--out-dir", type=click.Path(), default=".", show_default=True,
              help="Directory for report.json/report.csv and charts.")
@click.option("--svg/--no-svg", "emit_svg", default=True, show_default=True,
              help="Also write bars.svg and pie.svg.")
def simulate(config_path, image_h, image_w, n_gts, max_dim, seed, trials,
             size_range, aspect_range, assigners, jobs, out_dir, emit_svg):
    """Run the synthetic label-assignment study and write report files."""
    cfg_file = _load_config_section(config_path, "simulate")
    defaults = SimConfig()
    cfg = SimConfig(
        image_h=int(_pick(image_h, cfg_file, "image_h", defaults.image_h)),
        image_w=int(_pick(image_w, cfg_file, "image_w", defaults.image_w)),
        n_gts=int(_pick(n_gts, cfg_file, "n_gts", defaults.n_gts)),
        max_dim=float(_pick(max_dim, cfg_file, "max_dim", defaults.max_dim)),
        seed=int(_pick(seed, cfg_file, "seed", defaults.seed)),
        trials=int(_pick(trials, cfg_file, "trials", defaults.trials)),
        size_range=tuple(_pick(size_range or None, cfg_file, "size_range",
                               defaults.size_range)),
        aspect_range=tuple(_pick(aspect_range or None, cfg_file, "aspect_range",
                                 defaults.aspect_range)),
    )
    names = assigners or tuple(_pick(None, cfg_file, "assigners", ASSIGNER_NAMES))
    report = run_simulation(cfg, [make_assigner(n) for n in names], jobs=jobs)

    out = Path(out_dir)
    _write(out / "report.json", report_to_json(report))
    _write(out / "report.csv", report_to_csv(report))
    if emit_svg:
        _write(out / "bars.svg", bar_chart_svg(report))
        _write(out / "pie.svg", pie_chart_svg(report))

    click.echo(f"{'assigner':18s} {'bin':8s} {'positives':>10s} {'share%':>8s} {'per-gt':>8s}")
    for stats in report.assigners:
        for k, label in enumerate(report.bin_labels):
            click.echo(
                f"{stats.name:18s} {label:8s} {stats.positives_per_bin[k]:>10d} "
                f"{stats.share_pct_per_bin[k]:>8.2f} "
                f"{stats.mean_positives_per_gt_per_bin[k]:>8.3f}"
            )
    click.echo(f"wrote {out / 'report.json'}")


@cli.command()
@click.argument("gt_csv", type=click.Path(exists=True))
@click.argument("proposal_csv", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON config file; the 'score' section applies.")
@click.option("--criterion", type=click.Choice(["iou", "poc", "scc", "mcla"]),
              default="mcla", show_default=True,
              help="Which score matrix to emit: overlap (iou), center offset "
                   "(poc), shape match (scc), or the weighted combination.")
@click.option("--lambda-iou", type=float, default=None, show_default="1.0",
              help="Weight of the overlap criterion.")
@click.option("--lambda-poc", type=float, default=None, show_default="3.0",
              help="Weight of the center-offset criterion.")
@click.option("--lambda-scc", type=float, default=None, show_default="1.0",
              help="Weight of the shape criterion.")
@click.option("--c-poc", type=float, default=None, show_default="20.0",
              help="Non-linear mapping factor of the center-offset criterion.")
@click.option("--c-scc", type=float, default=None, show_default="0.25",
              help="Non-linear mapping factor of the shape criterion.")
@click.option("--out", "-o", type=click.Path(), default="-", show_default=True,
              help="Output CSV path, or - for standard output.")
def score(gt_csv, proposal_csv, config_path, criterion, lambda_iou, lambda_poc,
          lambda_scc, c_poc, c_scc, out):
    """Score proposals against ground truths and emit the CSV matrix."""
    cfg_file = _load_config_section(config_path, "score")
    weights = _weights_from(cfg_file, lambda_iou, lambda_poc, lambda_scc,
                            c_poc, c_scc)
    gts = parse_box_csv(Path(gt_csv).read_text(encoding="utf-8"), gt_csv)
    props = parse_box_csv(Path(proposal_csv).read_text(encoding="utf-8"),
                          proposal_csv)
    text = scores_to_csv(criterion_matrix(gts, props, criterion, weights))
    if out == "-":
        click.echo(text, nl=False)
    else:
        _write(Path(out), text)
        click.echo(f"wrote {out}")


@cli.command()
@click.argument("input_ftm", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON config file; the 'purify' section applies.")
@click.option("--level", type=int, default=0, show_default=True,
              help="Pyramid level of the input tensor (0 = finest).")
@click.option("--relay-level", type=int, default=None, show_default="2",
              help="Purification applies to levels below this.")
@click.option("--intensity", type=float, default=None, show_default="0.05",
              help="Fraction of the spectral half-extent removed at level 0.")
@click.option("--residual-weight", type=float, default=None, show_default="0.3",
              help="Weight of the filtered branch in the residual sum.")
@click.option("--out", "-o", type=click.Path(), default=None,
              help="Output FTM1 path [default: <stem>.purified.ftm].")
@click.option("--emit-mask", type=click.Path(), default=None,
              help="Also write the binary mask as a single-channel FTM1 file.")
def purify(input_ftm, config_path, level, relay_level, intensity,
           residual_weight, out, emit_mask):
    """Residual highpass purification of an FTM1 feature tensor."""
    cfg_file = _load_config_section(config_path, "purify")
    base = HfpConfig()
    cfg = HfpConfig(
        relay_level=int(_pick(relay_level, cfg_file, "relay_level", base.relay_level)),
        intensity=float(_pick(intensity, cfg_file, "intensity", base.intensity)),
        residual_weight=float(_pick(residual_weight, cfg_file, "residual_weight",
                                    base.residual_weight)),
    )
    tensor = read_ftm(input_ftm)
    try:
        result = hfp_purify(tensor.astype(np.float64), level, cfg)
    except ValueError as exc:
        raise DataError(str(exc))
    out_path = Path(out) if out else Path(input_ftm).with_suffix(".purified.ftm")
    write_ftm(out_path, result)
    if emit_mask:
        mask = build_hfp_mask(tensor.shape[0], tensor.shape[1], level, cfg)
        write_ftm(Path(emit_mask), mask[:, :, None])
    click.echo(f"wrote {out_path}")


@cli.command()
@click.argument("input_ftm", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON config file; the 'fdsplit' section applies.")
@click.option("--low-cutoff", type=float, default=None, show_default="0.85",
              help="Lowpass cutoff as a fraction of the spectral half-extent.")
@click.option("--high-cutoff", type=float, default=None, show_default="0.10",
              help="Highpass cutoff as a fraction of the spectral half-extent.")
@click.option("--out-stem", type=click.Path(), default=None,
              help="Stem for outputs [default: input path without suffix].")
def fdsplit(input_ftm, config_path, low_cutoff, high_cutoff, out_stem):
    """Split an FTM1 tensor into <stem>.low.ftm and <stem>.high.ftm."""
    cfg_file = _load_config_section(config_path, "fdsplit")
    d_l = float(_pick(low_cutoff, cfg_file, "low_cutoff", 0.85))
    d_h = float(_pick(high_cutoff, cfg_file, "high_cutoff", 0.10))
    tensor = read_ftm(input_ftm).astype(np.float64)
    try:
        low, high = fd_split(tensor, d_l, d_h)
    except ValueError as exc:
        raise DataError(str(exc))
    stem = Path(out_stem) if out_stem else Path(input_ftm).with_suffix("")
    low_path = stem.with_name(stem.name + ".low.ftm")
    high_path = stem.with_name(stem.name + ".high.ftm")
    write_ftm(low_path, low)
    write_ftm(high_path, high)
    click.echo(f"wrote {low_path}")
    click.echo(f"wrote {high_path}")


@cli.command()
@click.argument("annotations", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON config file; the 'stats' section applies (may "
                   "provide custom pyramid 'levels').")
@click.option("--assigner", type=click.Choice(ASSIGNER_NAMES), default="mcla",
              show_default=True, help="Assignment strategy to evaluate.")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Worker threads over images; output identical for any value.")
@click.option("--out-dir", type=click.Path(), default=".", show_default=True,
              help="Directory for report.json/report.csv and charts.")
@click.option("--svg/--no-svg", "emit_svg", default=True, show_default=True,
              help="Also write bars.svg and pie.svg.")
def stats(annotations, config_path, assigner, jobs, out_dir, emit_svg):
    """Assignment statistics over a COCO-format annotation file."""
    cfg_file = _load_config_section(config_path, "stats")
    adef = make_assigner(assigner)
    if "levels" in cfg_file:
        from .priors import PyramidSpec
        from .sim import PRIOR_SCHEMES

        levels = tuple(
            LevelSpec(
                stride=float(lv["stride"]),
                base_size=float(lv["base_size"]),
                scales=tuple(float(s) for s in lv["scales"]),
                ratios=tuple(float(r) for r in lv["ratios"]),
            )
            for lv in cfg_file["levels"]
        )
        scheme_name = f"custom:{assigner}"
        PRIOR_SCHEMES[scheme_name] = lambda h, w: PyramidSpec(h, w, levels)
        adef = type(adef)(adef.name, scheme_name, adef.config, adef.weights)
    try:
        ds = load_coco(annotations)
    except (CocoFormatError, CocoValidationError) as exc:
        raise DataError(str(exc))
    report = dataset_assignment_stats(ds, adef, jobs=jobs, source=str(annotations))
    out = Path(out_dir)
    _write(out / "report.json", report_to_json(report))
    _write(out / "report.csv", report_to_csv(report))
    if emit_svg:
        _write(out / "bars.svg", bar_chart_svg(report))
        _write(out / "pie.svg", pie_chart_svg(report))
    stats_ = report.assigners[0]
    click.echo(f"{'bin':8s} {'gt_count':>9s} {'positives':>10s} {'share%':>8s}")
    for k, label in enumerate(report.bin_labels):
        click.echo(
            f"{label:8s} {stats_.gt_count_per_bin[k]:>9d} "
            f"{stats_.positives_per_bin[k]:>10d} {stats_.share_pct_per_bin[k]:>8.2f}"
        )
    click.echo(f"wrote {out / 'report.json'}")


def main(argv=None) -> None:
    """Entry point mapping exceptions onto the documented exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.UsageError as exc:
        exc.show(file=sys.stderr)
        sys.exit(1)
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        sys.exit(1)
    except (DataError, CocoFormatError, CocoValidationError, TensorFormatError,
            ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()
