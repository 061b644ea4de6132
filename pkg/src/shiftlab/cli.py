"""Command-line interface.

Every subcommand names its inputs and outputs explicitly, accepts a
--config run file supplying defaults for any option not given on the
command line, and appends a provenance record beside its outputs. Outputs
are pure functions of inputs plus seeds: reruns rewrite them
byte-identically (the provenance log is append-only and carries the only
timestamps). Exit status is 0 on success, 1 on domain errors, which are
printed as one line on stderr.
"""

from __future__ import annotations

import sys
from pathlib import Path
from types import SimpleNamespace

import click
from click.core import ParameterSource

from . import __version__
from .catalog import read_catalog
from .config import load_config
from .embeddings import read_embeddings
from .errors import ShiftlabError, ValidationError
from .evaluator import (
    build_overlap,
    compare_recipes,
    make_eval_row,
    read_comparison,
    read_eval_rows,
    read_overlap,
    restricted_accuracy,
    write_comparison,
    write_eval_rows,
    write_overlap,
)
from .filtering import DEFAULT_CAPTION_TEMPLATE, DEFAULT_THRESHOLD, filter_by_caption, write_filter_report
from .lineio import dumps, write_lines
from .manifests import read_dataset_manifest
from .metrics import (
    ClassifierPoint,
    accuracy,
    accuracy_gap,
    class_fid,
    diversity,
    effective_robustness,
    fid_with_info,
    fit_baseline,
    read_fit,
    read_zoo,
    read_zoo_by_dataset,
    write_fit,
)
from .mixture import grid_plans, plan_fixed_budget, plan_mixture, write_plan
from .predictions import read_prediction_log
from .prompts import (
    build_manifest,
    expand_prompts,
    load_default_templates,
    read_templates,
    write_generation_manifest,
)
from .provenance import append_record
from .report.scatter import read_scatter, render_er_scatter, write_scatter
from .report.tables import render_table

_CONFIG_HELP = "Run file (JSON or YAML) supplying defaults for omitted options."
_THREADS_HELP = "Worker threads for per-class stages; output is identical for any value."


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _merged(ctx: click.Context, config_path: str | None, **values) -> SimpleNamespace:
    """Apply config-file defaults to options left at their click default."""
    if config_path:
        cfg = load_config(config_path)
        for name, value in values.items():
            if ctx.get_parameter_source(name) == ParameterSource.DEFAULT and name in cfg:
                values[name] = cfg[name]
    return SimpleNamespace(**values)


def _need(value, flag: str):
    if value is None:
        _fail(f"missing required option {flag} (flag or config)")
    return value


def _record(command: str, args: dict, inputs: list, outputs: list) -> None:
    anchor = Path(outputs[0]).parent if outputs else Path.cwd()
    append_record(anchor, command, args, inputs, outputs, version=__version__)


def _echo_record(obj: dict) -> None:
    click.echo(dumps(obj))


class _Group(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except ShiftlabError as exc:
            _fail(str(exc))
        except OSError as exc:
            _fail(f"{exc.filename or ''}: {exc.strerror or exc}".lstrip(": "))


@click.group(cls=_Group)
@click.version_option(version=__version__, prog_name="shiftlab")
def main():
    """Deterministic planning and analytics for real/generated mixtures."""


# ---------------------------------------------------------------- prompts


@main.group()
def prompts():
    """Prompt template expansion."""


@prompts.command("expand")
@click.option("--catalog", "catalog_path", type=click.Path(), default=None, help="Class catalog (TSV).")
@click.option("--templates", "templates_path", type=click.Path(), default=None, help="Template file; default is the built-in 80-template set.")
@click.option("-o", "--out", "out_path", type=click.Path(), default=None, help="Output prompts file (JSONL).")
@click.option("--config", "config_path", type=click.Path(), default=None, help=_CONFIG_HELP)
@click.pass_context
def prompts_expand(ctx, catalog_path, templates_path, out_path, config_path):
    """Expand every template for every class, ordered by class then template."""
    p = _merged(ctx, config_path, catalog_path=catalog_path,
                templates_path=templates_path, out_path=out_path)
    catalog = read_catalog(_need(p.catalog_path, "--catalog"))
    templates = read_templates(p.templates_path) if p.templates_path else load_default_templates()
    out = Path(_need(p.out_path, "--out"))
    rows = expand_prompts(catalog, templates)
    write_lines(out, (
        {"class_id": r.class_id, "template_index": r.template_index, "prompt": r.text}
        for r in rows
    ))
    inputs = [p.catalog_path] + ([p.templates_path] if p.templates_path else [])
    _record("prompts expand", {"catalog": str(p.catalog_path), "templates": p.templates_path and str(p.templates_path)},
            inputs, [out])
    click.echo(f"wrote {len(rows)} prompts to {out}")


# ---------------------------------------------------------------- manifest


@main.group()
def manifest():
    """Generation manifest construction."""


@manifest.command("build")
@click.option("--catalog", "catalog_path", type=click.Path(), default=None)
@click.option("--templates", "templates_path", type=click.Path(), default=None)
@click.option("--strategy", type=click.Choice(["class_labels", "real_images", "real_images_and_class_labels"]), default="class_labels", show_default=True)
@click.option("--replicas", type=int, default=None, help="Rows per class.")
@click.option("--seed", type=int, default=0, show_default=True, help="Master seed.")
@click.option("--source-manifest", "source_path", type=click.Path(), default=None, help="Real-image pool for conditioning strategies.")
@click.option("-o", "--out", "out_path", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(), default=None, help=_CONFIG_HELP)
@click.pass_context
def manifest_build(ctx, catalog_path, templates_path, strategy, replicas, seed, source_path, out_path, config_path):
    """Build a per-class generation work order with derived seeds."""
    p = _merged(ctx, config_path, catalog_path=catalog_path, templates_path=templates_path,
                strategy=strategy, replicas=replicas, seed=seed,
                source_path=source_path, out_path=out_path)
    catalog = read_catalog(_need(p.catalog_path, "--catalog"))
    templates = read_templates(p.templates_path) if p.templates_path else load_default_templates()
    source = read_dataset_manifest(p.source_path, catalog) if p.source_path else None
    out = Path(_need(p.out_path, "--out"))
    m = build_manifest(
        catalog, templates, p.strategy,
        replicas_per_class=int(_need(p.replicas, "--replicas")),
        master_seed=int(p.seed),
        source_manifest=source,
    )
    write_generation_manifest(m, out)
    inputs = [p.catalog_path] + [x for x in (p.templates_path, p.source_path) if x]
    _record("manifest build",
            {"strategy": p.strategy, "replicas": int(p.replicas), "seed": int(p.seed)},
            inputs, [out])
    click.echo(f"wrote {len(m)} generation rows to {out}")


# ---------------------------------------------------------------- mixture


@main.group()
def mixture():
    """Seeded real/generated mixture planning."""


def _load_pools(p, catalog):
    real = read_dataset_manifest(_need(p.real_path, "--real"), catalog)
    gen = read_dataset_manifest(_need(p.gen_path, "--gen"), catalog)
    return real, gen


@mixture.command("plan")
@click.option("--real", "real_path", type=click.Path(), default=None, help="Real pool manifest.")
@click.option("--gen", "gen_path", type=click.Path(), default=None, help="Generated pool manifest.")
@click.option("--catalog", "catalog_path", type=click.Path(), default=None)
@click.option("--real-fraction", type=float, default=None)
@click.option("--gen-fraction", type=float, default=None)
@click.option("--unit-size", type=int, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threads", type=int, default=1, envvar="SHIFTLAB_THREADS", help=_THREADS_HELP)
@click.option("-o", "--out", "out_path", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(), default=None, help=_CONFIG_HELP)
@click.pass_context
def mixture_plan(ctx, real_path, gen_path, catalog_path, real_fraction, gen_fraction, unit_size, seed, threads, out_path, config_path):
    """Draw one mixture: fractions are relative to --unit-size."""
    p = _merged(ctx, config_path, real_path=real_path, gen_path=gen_path,
                catalog_path=catalog_path, real_fraction=real_fraction,
                gen_fraction=gen_fraction, unit_size=unit_size, seed=seed,
                threads=threads, out_path=out_path)
    del threads  # planning is sequential by design; the flag is accepted for symmetry
    catalog = read_catalog(p.catalog_path) if p.catalog_path else None
    real, gen = _load_pools(p, catalog)
    out = Path(_need(p.out_path, "--out"))
    plan = plan_mixture(
        real, gen,
        real_fraction=float(_need(p.real_fraction, "--real-fraction")),
        gen_fraction=float(_need(p.gen_fraction, "--gen-fraction")),
        unit_size=int(_need(p.unit_size, "--unit-size")),
        seed=int(p.seed),
        catalog=catalog,
    )
    write_plan(plan, out)
    inputs = [p.real_path, p.gen_path] + ([p.catalog_path] if p.catalog_path else [])
    _record("mixture plan",
            {"real_fraction": plan.real_fraction, "gen_fraction": plan.gen_fraction,
             "unit_size": plan.unit_size, "seed": plan.seed},
            inputs, [out])
    click.echo(f"planned {len(plan)} entries to {out}")


@mixture.command("grid")
@click.option("--real", "real_path", type=click.Path(), default=None)
@click.option("--gen", "gen_path", type=click.Path(), default=None)
@click.option("--catalog", "catalog_path", type=click.Path(), default=None)
@click.option("--unit-size", type=int, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threads", type=int, default=1, envvar="SHIFTLAB_THREADS", help=_THREADS_HELP)
@click.option("--out-dir", "out_dir", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(), default=None, help=_CONFIG_HELP)
@click.pass_context
def mixture_grid(ctx, real_path, gen_path, catalog_path, unit_size, seed, threads, out_dir, config_path):
    """Plan all nine fraction cells into an output directory."""
    p = _merged(ctx, config_path, real_path=real_path, gen_path=gen_path,
                catalog_path=catalog_path, unit_size=unit_size, seed=seed,
                threads=threads, out_dir=out_dir)
    del threads
    catalog = read_catalog(p.catalog_path) if p.catalog_path else None
    real, gen = _load_pools(p, catalog)
    out = Path(_need(p.out_dir, "--out-dir"))
    out.mkdir(parents=True, exist_ok=True)
    plans = grid_plans(real, gen, int(_need(p.unit_size, "--unit-size")), int(p.seed), catalog=catalog)
    paths = []
    for plan in plans:
        name = f"plan_r{_fraction_token(plan.real_fraction)}_g{_fraction_token(plan.gen_fraction)}.jsonl"
        write_plan(plan, out / name)
        paths.append(out / name)
    inputs = [p.real_path, p.gen_path] + ([p.catalog_path] if p.catalog_path else [])
    _record("mixture grid", {"unit_size": int(p.unit_size), "seed": int(p.seed)}, inputs, paths)
    click.echo(f"wrote {len(paths)} plans to {out}")


def _fraction_token(fraction: float) -> str:
    return f"{int(round(fraction * 100))}"


@mixture.command("fixed-budget")
@click.option("--real", "real_path", type=click.Path(), default=None)
@click.option("--gen", "gen_path", type=click.Path(), default=None)
@click.option("--catalog", "catalog_path", type=click.Path(), default=None)
@click.option("--gen-share", type=float, default=None, help="Share of the budget that is generated, within [0, 1].")
@click.option("--budget", type=int, default=None, help="Total rows in the plan.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threads", type=int, default=1, envvar="SHIFTLAB_THREADS", help=_THREADS_HELP)
@click.option("-o", "--out", "out_path", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(), default=None, help=_CONFIG_HELP)
@click.pass_context
def mixture_fixed_budget(ctx, real_path, gen_path, catalog_path, gen_share, budget, seed, threads, out_path, config_path):
    """Hold total size constant while varying the generated share."""
    p = _merged(ctx, config_path, real_path=real_path, gen_path=gen_path,
                catalog_path=catalog_path, gen_share=gen_share, budget=budget,
                seed=seed, threads=threads, out_path=out_path)
    del threads
    catalog = read_catalog(p.catalog_path) if p.catalog_path else None
    real, gen = _load_pools(p, catalog)
    out = Path(_need(p.out_path, "--out"))
    plan = plan_fixed_budget(
        real, gen,
        gen_share=float(_need(p.gen_share, "--gen-share")),
        budget=int(_need(p.budget, "--budget")),
        seed=int(p.seed),
        catalog=catalog,
    )
    write_plan(plan, out)
    inputs = [p.real_path, p.gen_path] + ([p.catalog_path] if p.catalog_path else [])
    _record("mixture fixed-budget",
            {"gen_share": float(p.gen_share), "budget": int(p.budget), "seed": int(p.seed)},
            inputs, [out])
    click.echo(f"planned {len(plan)} entries to {out}")


# ---------------------------------------------------------------- filter


@main.group(name="filter")
def filter_group():
    """Caption-similarity filtering."""


@filter_group.command("run")
@click.option("--images", "images_path", type=click.Path(), default=None, help="Image embedding payload.")
@click.option("--captions", "captions_path", type=click.Path(), default=None, help="Caption embedding payload, one row per class.")
@click.option("--threshold", type=float, default=DEFAULT_THRESHOLD, show_default=True)
@click.option("--caption-template", type=str, default=DEFAULT_CAPTION_TEMPLATE, show_default=True, help="Recorded in the report for provenance.")
@click.option("--threads", type=int, default=1, envvar="SHIFTLAB_THREADS", help=_THREADS_HELP)
@click.option("-o", "--out", "out_path", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(), default=None, help=_CONFIG_HELP)
@click.pass_context
def filter_run(ctx, images_path, captions_path, threshold, caption_template, threads, out_path, config_path):
    """Keep images whose caption similarity is at or above the threshold."""
    p = _merged(ctx, config_path, images_path=images_path, captions_path=captions_path,
                threshold=threshold, caption_template=caption_template,
                threads=threads, out_path=out_path)
    del threads  # one vectorized pass; order-independent by construction
    images = read_embeddings(_need(p.images_path, "--images"))
    captions = read_embeddings(_need(p.captions_path, "--captions"))
    out = Path(_need(p.out_path, "--out"))
    report = filter_by_caption(images, captions, threshold=float(p.threshold),
                               caption_template=str(p.caption_template))
    write_filter_report(report, out)
    _record("filter run", {"threshold": float(p.threshold), "caption_template": str(p.caption_template)},
            [p.images_path, p.captions_path], [out])
    click.echo(f"kept {report.kept_count}, removed {report.removed_count} -> {out}")


# ---------------------------------------------------------------- metrics


@main.group()
def metrics():
    """Accuracy, gaps, distances, diversity."""


@metrics.command("accuracy")
@click.option("--log", "log_path", type=click.Path(), default=None, help="Prediction log (JSONL).")
@click.option("--classes", "classes_spec", type=str, default=None, help="Comma-separated class ids to restrict to.")
@click.option("-o", "--out", "out_path", type=click.Path(), default=None, help="Optional output record.")
@click.option("--config", "config_path", type=click.Path(), default=None, help=_CONFIG_HELP)
@click.pass_context
def metrics_accuracy(ctx, log_path, classes_spec, out_path, config_path):
    """Top-1 accuracy of a prediction log, in percent."""
    p = _merged(ctx, config_path, log_path=log_path, classes_spec=classes_spec, out_path=out_path)
    log = read_prediction_log(_need(p.log_path, "--log"))
    classes = None
    if p.classes_spec:
        classes = [int(tok) for tok in str(p.classes_spec).split(",") if tok.strip()]
    value = accuracy(log, classes=classes)
    class_set = set(classes) if classes is not None else None
    record = {
        "kind": "accuracy",
        "classifier_id": log.classifier_id,
        "dataset_tag": log.dataset_tag,
        "accuracy": value,
        "n_records": len(log) if class_set is None else sum(1 for r in log.records if r[1] in class_set),
        "restricted": classes is not None,
    }
    _echo_record(record)
    if p.out_path:
        write_lines(Path(p.out_path), [record])
        _record("metrics accuracy", {"classes": p.classes_spec}, [p.log_path], [Path(p.out_path)])


@metrics.command("ag")
@click.option("--shifted", type=float, default=None, help="Shifted accuracy in percent.")
@click.option("--source", type=float, default=None, help="Source accuracy in percent.")
@click.option("--shifted-log", "shifted_log", type=click.Path(), default=None)
@click.option("--source-log", "source_log", type=click.Path(), default=None)
@click.option("-o", "--out", "out_path", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(), default=None, help=_CONFIG_HELP)
@click.pass_context
def metrics_ag(ctx, shifted, source, shifted_log, source_log, out_path, config_path):
    """Accuracy gap: shifted minus source, from values or from logs."""
    p = _merged(ctx, config_path, shifted=shifted, source=source,
                shifted_log=shifted_log, source_log=source_log, out_path=out_path)
    inputs = []
    if p.shifted_log is not None:
        p.shifted = accuracy(read_prediction_log(p.shifted_log))
        inputs.append(p.shifted_log)
    if p.source_log is not None:
        p.source = accuracy(read_prediction_log(p.source_log))
        inputs.append(p.source_log)
    if p.shifted is None or p.source is None:
        _fail("need --shifted/--source values or --shifted-log/--source-log files")
    gap = accuracy_gap(float(p.shifted), float(p.source))
    record = {"kind": "accuracy_gap", "shifted": float(p.shifted), "source": float(p.source), "gap": gap}
    _echo_record(record)
    if p.out_path:
        write_lines(Path(p.out_path), [record])
        _record("metrics ag", {}, inputs, [Path(p.out_path)])


@metrics.command("fid")
@click.option("--a", "a_path", type=click.Path(), default=None, help="First embedding payload.")
@click.option("--b", "b_path", type=click.Path(), default=None, help="Second embedding payload.")
@click.option("--pooled", is_flag=True, default=False, help="Whole-set distance instead of the class-averaged default.")
@click.option("--min-per-class", type=int, default=2, show_default=True)
@click.option("--threads", type=int, default=1, envvar="SHIFTLAB_THREADS", help=_THREADS_HELP)
@click.option("-o", "--out", "out_path", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(), default=None, help=_CONFIG_HELP)
@click.pass_context
def metrics_fid(ctx, a_path, b_path, pooled, min_per_class, threads, out_path, config_path):
    """Frechet distance between two embedding sets."""
    p = _merged(ctx, config_path, a_path=a_path, b_path=b_path, pooled=pooled,
                min_per_class=min_per_class, threads=threads, out_path=out_path)
    a = read_embeddings(_need(p.a_path, "--a"))
    b = read_embeddings(_need(p.b_path, "--b"))
    if p.pooled:
        value, regularized = fid_with_info(a.vectors, b.vectors)
        record = {"kind": "fid", "value": value, "regularization_used": regularized}
    else:
        result = class_fid(a, b, min_per_class=int(p.min_per_class), threads=int(p.threads))
        record = {
            "kind": "class_fid",
            "mean": result.mean,
            "n_classes": result.n_classes,
            "regularization_used": result.regularization_used,
            "skipped_classes": list(result.skipped_classes),
            "per_class": {str(cid): v for cid, v in sorted(result.per_class.items())},
        }
    _echo_record(record)
    if p.out_path:
        write_lines(Path(p.out_path), [record])
        _record("metrics fid",
                {"pooled": bool(p.pooled), "min_per_class": int(p.min_per_class)},
                [p.a_path, p.b_path], [Path(p.out_path)])


@metrics.command("diversity")
@click.option("--embeddings", "embeddings_path", type=click.Path(), default=None)
@click.option("--threads", type=int, default=1, envvar="SHIFTLAB_THREADS", help=_THREADS_HELP)
@click.option("-o", "--out", "out_path", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(), default=None, help=_CONFIG_HELP)
@click.pass_context
def metrics_diversity(ctx, embeddings_path, threads, out_path, config_path):
    """Per-class mean pairwise dissimilarity of an embedding set."""
    p = _merged(ctx, config_path, embeddings_path=embeddings_path, threads=threads, out_path=out_path)
    del threads
    es = read_embeddings(_need(p.embeddings_path, "--embeddings"))
    result = diversity(es)
    record = {
        "kind": "diversity",
        "mean": result.mean,
        "per_class": {str(cid): v for cid, v in sorted(result.per_class.items())},
    }
    _echo_record(record)
    if p.out_path:
        write_lines(Path(p.out_path), [record])
        _record("metrics diversity", {}, [p.embeddings_path], [Path(p.out_path)])


# ---------------------------------------------------------------- er


@main.group()
def er():
    """Baseline fits and effective robustness."""


@er.command("fit")
@click.option("--zoo", "zoo_path", type=click.Path(), default=None, help="Classifier points (JSONL).")
@click.option("--dataset", "dataset_tag", type=str, default=None, help="Keep only points with this dataset_tag.")
@click.option("-o", "--out", "out_path", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(), default=None, help=_CONFIG_HELP)
@click.pass_context
def er_fit(ctx, zoo_path, dataset_tag, out_path, config_path):
    """Least-squares baseline through a zoo of classifier points."""
    p = _merged(ctx, config_path, zoo_path=zoo_path, dataset_tag=dataset_tag, out_path=out_path)
    points = read_zoo(_need(p.zoo_path, "--zoo"), dataset_tag=p.dataset_tag)
    fit = fit_baseline(points)
    record = {"kind": "baseline_fit", "slope": fit.slope, "intercept": fit.intercept,
              "n_points": fit.n_points, "residual_rms": fit.residual_rms}
    _echo_record(record)
    if p.out_path:
        write_fit(fit, Path(p.out_path), dataset_tag=p.dataset_tag or "")
        _record("er fit", {"dataset": p.dataset_tag}, [p.zoo_path], [Path(p.out_path)])


@er.command("score")
@click.option("--fit", "fit_path", type=click.Path(), default=None, help="Baseline fit record.")
@click.option("--source-accuracy", type=float, default=None)
@click.option("--shifted-accuracy", type=float, default=None)
@click.option("--classifier-id", type=str, default="query", show_default=True)
@click.option("-o", "--out", "out_path", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(), default=None, help=_CONFIG_HELP)
@click.pass_context
def er_score(ctx, fit_path, source_accuracy, shifted_accuracy, classifier_id, out_path, config_path):
    """Score one classifier's robustness against a stored baseline fit."""
    p = _merged(ctx, config_path, fit_path=fit_path, source_accuracy=source_accuracy,
                shifted_accuracy=shifted_accuracy, classifier_id=classifier_id, out_path=out_path)
    fit = read_fit(_need(p.fit_path, "--fit"))
    point = ClassifierPoint(
        classifier_id=str(p.classifier_id),
        source_accuracy=float(_need(p.source_accuracy, "--source-accuracy")),
        shifted_accuracy=float(_need(p.shifted_accuracy, "--shifted-accuracy")),
    )
    value = effective_robustness(point, fit)
    record = {"kind": "effective_robustness", "classifier_id": point.classifier_id,
              "source_accuracy": point.source_accuracy,
              "shifted_accuracy": point.shifted_accuracy, "er": value}
    _echo_record(record)
    if p.out_path:
        write_lines(Path(p.out_path), [record])
        _record("er score", {"classifier_id": point.classifier_id}, [p.fit_path], [Path(p.out_path)])


# ---------------------------------------------------------------- eval


@main.group(name="eval")
def eval_group():
    """Cross-dataset evaluation."""


@eval_group.command("overlap")
@click.option("--source-catalog", "source_catalog_path", type=click.Path(), default=None)
@click.option("--target-catalog", "target_catalog_path", type=click.Path(), default=None)
@click.option("--source-tag", type=str, default="source", show_default=True)
@click.option("--target-tag", type=str, default="target", show_default=True)
@click.option("-o", "--out", "out_path", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(), default=None, help=_CONFIG_HELP)
@click.pass_context
def eval_overlap(ctx, source_catalog_path, target_catalog_path, source_tag, target_tag, out_path, config_path):
    """Build a class overlap map by normalized-name matching."""
    p = _merged(ctx, config_path, source_catalog_path=source_catalog_path,
                target_catalog_path=target_catalog_path, source_tag=source_tag,
                target_tag=target_tag, out_path=out_path)
    source = read_catalog(_need(p.source_catalog_path, "--source-catalog"))
    target = read_catalog(_need(p.target_catalog_path, "--target-catalog"))
    out = Path(_need(p.out_path, "--out"))
    overlap = build_overlap(source, target, source_tag=str(p.source_tag), target_tag=str(p.target_tag))
    write_overlap(overlap, out)
    unmatched_path = out.with_name(out.name + ".unmatched.json")
    write_lines(unmatched_path, [{
        "kind": "overlap_unmatched",
        "source_tag": overlap.source_tag,
        "target_tag": overlap.target_tag,
        "unmatched_source": list(overlap.unmatched_source),
        "unmatched_target": list(overlap.unmatched_target),
    }])
    _record("eval overlap", {"source_tag": str(p.source_tag), "target_tag": str(p.target_tag)},
            [p.source_catalog_path, p.target_catalog_path], [out, unmatched_path])
    click.echo(
        f"matched {len(overlap)} classes "
        f"({len(overlap.unmatched_source)} source, {len(overlap.unmatched_target)} target unmatched) -> {out}"
    )


@eval_group.command("run")
@click.option("--log", "log_path", type=click.Path(), default=None)
@click.option("--overlap", "overlap_path", type=click.Path(), default=None, help="Restrict scoring to this overlap map.")
@click.option("--side", type=click.Choice(["auto", "source", "target"]), default="auto", show_default=True)
@click.option("-o", "--out", "out_path", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(), default=None, help=_CONFIG_HELP)
@click.pass_context
def eval_run(ctx, log_path, overlap_path, side, out_path, config_path):
    """Score one prediction log, optionally restricted to an overlap."""
    p = _merged(ctx, config_path, log_path=log_path, overlap_path=overlap_path,
                side=side, out_path=out_path)
    log = read_prediction_log(_need(p.log_path, "--log"))
    if p.overlap_path:
        overlap = read_overlap(p.overlap_path)
        value = restricted_accuracy(log, overlap, side=str(p.side))
    else:
        value = accuracy(log)
    record = {
        "kind": "accuracy",
        "classifier_id": log.classifier_id,
        "dataset_tag": log.dataset_tag,
        "accuracy": value,
        "restricted": bool(p.overlap_path),
    }
    _echo_record(record)
    if p.out_path:
        write_lines(Path(p.out_path), [record])
        inputs = [p.log_path] + ([p.overlap_path] if p.overlap_path else [])
        _record("eval run", {"side": str(p.side)}, inputs, [Path(p.out_path)])


@eval_group.command("compare")
@click.option("--rows", "rows_path", type=click.Path(), default=None, help="Eval rows (JSONL).")
@click.option("--zoo", "zoo_path", type=click.Path(), default=None, help="Baseline points for robustness, grouped by dataset_tag.")
@click.option("--shifted-order", "shifted_order_spec", type=str, default=None, help="Comma-separated shifted dataset order.")
@click.option("-o", "--out", "out_path", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(), default=None, help=_CONFIG_HELP)
@click.pass_context
def eval_compare(ctx, rows_path, zoo_path, shifted_order_spec, out_path, config_path):
    """Assemble the comparison table from eval rows and optional zoos."""
    p = _merged(ctx, config_path, rows_path=rows_path, zoo_path=zoo_path,
                shifted_order_spec=shifted_order_spec, out_path=out_path)
    rows = read_eval_rows(_need(p.rows_path, "--rows"))
    zoos = read_zoo_by_dataset(p.zoo_path) if p.zoo_path else {}
    shifted_order = None
    if p.shifted_order_spec:
        shifted_order = [tok.strip() for tok in str(p.shifted_order_spec).split(",") if tok.strip()]
    out = Path(_need(p.out_path, "--out"))
    comparison = compare_recipes(rows, zoos=zoos, shifted_order=shifted_order)
    write_comparison(comparison, out)
    inputs = [p.rows_path] + ([p.zoo_path] if p.zoo_path else [])
    _record("eval compare", {"shifted_order": p.shifted_order_spec}, inputs, [out])
    click.echo(f"compared {len(comparison.rows)} rows -> {out}")


# ---------------------------------------------------------------- report


@main.group()
def report():
    """Tables and scatter plot data."""


@report.command("table")
@click.option("--comparison", "comparison_path", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["text", "csv", "md"]), default="text", show_default=True)
@click.option("--columns", "columns_spec", type=str, default="acc", show_default=True, help="Comma-separated subset of acc,ag,er.")
@click.option("-o", "--out", "out_path", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(), default=None, help=_CONFIG_HELP)
@click.pass_context
def report_table(ctx, comparison_path, fmt, columns_spec, out_path, config_path):
    """Render a comparison to aligned text, CSV, or Markdown."""
    p = _merged(ctx, config_path, comparison_path=comparison_path, fmt=fmt,
                columns_spec=columns_spec, out_path=out_path)
    comparison = read_comparison(_need(p.comparison_path, "--comparison"))
    columns = tuple(tok.strip() for tok in str(p.columns_spec).split(",") if tok.strip())
    text = render_table(comparison, fmt=str(p.fmt), columns=columns)
    if p.out_path:
        Path(p.out_path).write_text(text, encoding="utf-8")
        _record("report table", {"format": str(p.fmt), "columns": str(p.columns_spec)},
                [p.comparison_path], [Path(p.out_path)])
        click.echo(f"wrote table to {p.out_path}")
    else:
        click.echo(text, nl=False)


@report.command("scatter")
@click.option("--zoo", "zoo_path", type=click.Path(), default=None)
@click.option("--dataset", "dataset_tag", type=str, default=None, help="Keep only zoo points with this dataset_tag.")
@click.option("--fit", "fit_path", type=click.Path(), default=None, help="Stored fit; default fits the zoo.")
@click.option("--queries", "queries_path", type=click.Path(), default=None, help="Query points (JSONL like a zoo file).")
@click.option("-o", "--out", "out_path", type=click.Path(), default=None)
@click.option("--figure/--no-figure", "want_figure", default=True, show_default=True, help="Also render a PNG next to the plot data.")
@click.option("--config", "config_path", type=click.Path(), default=None, help=_CONFIG_HELP)
@click.pass_context
def report_scatter(ctx, zoo_path, dataset_tag, fit_path, queries_path, out_path, want_figure, config_path):
    """Emit robustness scatter plot data, plus a rendered figure."""
    p = _merged(ctx, config_path, zoo_path=zoo_path, dataset_tag=dataset_tag,
                fit_path=fit_path, queries_path=queries_path, out_path=out_path,
                want_figure=want_figure)
    zoo = read_zoo(_need(p.zoo_path, "--zoo"), dataset_tag=p.dataset_tag)
    if not zoo:
        _fail(f"zoo {p.zoo_path} has no points" + (f" for dataset {p.dataset_tag!r}" if p.dataset_tag else ""))
    fit = read_fit(p.fit_path) if p.fit_path else fit_baseline(zoo)
    queries = read_zoo(p.queries_path, dataset_tag=p.dataset_tag) if p.queries_path else []
    out = Path(_need(p.out_path, "--out"))
    document = render_er_scatter(zoo, fit, queries)
    write_scatter(document, out)
    outputs = [out]
    if p.want_figure:
        from .report.figures import render_scatter_figure

        figure_path = out.with_suffix(".png")
        render_scatter_figure(read_scatter(out), figure_path)
        outputs.append(figure_path)
    inputs = [p.zoo_path] + [x for x in (p.fit_path, p.queries_path) if x]
    _record("report scatter", {"dataset": p.dataset_tag, "figure": bool(p.want_figure)},
            inputs, outputs)
    click.echo(f"wrote scatter data to {out}" + (f" and figure to {outputs[-1]}" if p.want_figure else ""))


# ---------------------------------------------------------------- study


@main.group()
def study():
    """Whole-experiment runs from a declarative config."""


@study.command("run")
@click.option("--config", "config_path", type=click.Path(), required=True, help="Study description (JSON or YAML).")
@click.option("--out-dir", "out_dir", type=click.Path(), default=None)
def study_run(config_path, out_dir):
    """Score logs, fit baselines, and render every report in one go.

    Config schema (dataset tags are free strings):

    \b
      source_tag: tag of the unshifted dataset
      shifted_order: [tag, ...] column order, optional
      logs: [{classifier_id, training_recipe, dataset_tag, path}, ...]
      overlaps: {tag: overlap_map_path, ...} restricted scoring, optional
      zoo: classifier points file with dataset_tag field, optional
      include_source_in_average: bool, default true
      columns: [acc, ag, er], default [acc]
      formats: [text, csv, md], default [text]
      out_dir: fallback for --out-dir
    """
    cfg = load_config(config_path)
    out = Path(out_dir or cfg.get("out_dir") or _fail("missing --out-dir"))
    out.mkdir(parents=True, exist_ok=True)
    source_tag = cfg.get("source_tag") or _fail("study config needs source_tag")
    log_specs = cfg.get("logs") or _fail("study config needs logs")
    overlaps = {
        str(tag): read_overlap(path) for tag, path in (cfg.get("overlaps") or {}).items()
    }

    per_recipe: dict[tuple[str, str], dict[str, float]] = {}
    inputs = [config_path]
    for spec in log_specs:
        tag = str(spec["dataset_tag"])
        log = read_prediction_log(spec["path"])
        inputs.append(spec["path"])
        if tag in overlaps:
            value = restricted_accuracy(log, overlaps[tag])
        else:
            value = accuracy(log)
        key = (str(spec["classifier_id"]), str(spec["training_recipe"]))
        per_recipe.setdefault(key, {})
        if tag in per_recipe[key]:
            raise ValidationError(
                f"duplicate log for classifier {key[0]!r} recipe {key[1]!r} dataset {tag!r}"
            )
        per_recipe[key][tag] = value

    include_source = bool(cfg.get("include_source_in_average", True))
    rows = [
        make_eval_row(cid, recipe, str(source_tag), per_dataset, include_source)
        for (cid, recipe), per_dataset in per_recipe.items()
    ]
    rows_path = out / "eval_rows.jsonl"
    write_eval_rows(rows, rows_path)

    zoos = {}
    if cfg.get("zoo"):
        zoos = read_zoo_by_dataset(cfg["zoo"])
        inputs.append(cfg["zoo"])
    shifted_order = [str(t) for t in cfg.get("shifted_order", [])] or None
    comparison = compare_recipes(rows, zoos=zoos, shifted_order=shifted_order)
    comparison_path = out / "comparison.jsonl"
    write_comparison(comparison, comparison_path)

    outputs = [rows_path, comparison_path]
    columns = tuple(cfg.get("columns", ["acc"]))
    for fmt in cfg.get("formats", ["text"]):
        table_path = out / f"table.{'txt' if fmt == 'text' else fmt}"
        table_path.write_text(render_table(comparison, fmt=str(fmt), columns=columns), encoding="utf-8")
        outputs.append(table_path)

    for tag, fit in sorted(comparison.fits.items()):
        queries = [
            ClassifierPoint(f"{row.classifier_id}:{row.training_recipe}",
                            row.source_accuracy, row.cells[tag].accuracy)
            for row in comparison.rows
        ]
        document = render_er_scatter(zoos[tag], fit, queries)
        scatter_path = out / f"scatter_{tag}.jsonl"
        write_scatter(document, scatter_path)
        from .report.figures import render_scatter_figure

        figure_path = scatter_path.with_suffix(".png")
        render_scatter_figure(read_scatter(scatter_path), figure_path)
        outputs.extend([scatter_path, figure_path])

    _record("study run", {"config": str(config_path)}, inputs, outputs)
    click.echo(f"study complete: {len(rows)} rows, outputs in {out}")


if __name__ == "__main__":
    main()
