"""Command line entry points for the adapter.

Four commands mirror the four jobs: embed-images, embed-captions,
export-predictions, generate. Inputs and outputs are engine
interchange files; model choices are named by identifier strings so a
run records exactly which encoder, classifier, and pipeline produced
its files.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from .classify import check_label_space, nearest_caption, parse_classifier
from .encoders import EMBED_DIM, ENCODER_ID, image_vector, load_image, text_vector
from .errors import AdapterError
from .formats import (
    read_catalog,
    read_dataset_manifest,
    read_generation_manifest,
    resolve_uri,
    write_dataset_manifest,
    write_embeddings,
    write_jsonl,
    write_prediction_log,
)
from .generate import PIPELINE_ID, generate

PLACEHOLDER = "{class label}"
DEFAULT_TEMPLATE = "a photo of a {class label}."


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


class _Commands(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except AdapterError as exc:
            _fail(str(exc))
        except OSError as exc:
            _fail(f"{exc.filename or ''}: {exc.strerror or exc}".lstrip(": "))


@click.group(cls=_Commands)
def main():
    """Model adapter: embeddings, prediction logs, and generated images."""


def _check_encoder(encoder: str) -> None:
    if encoder != ENCODER_ID:
        raise AdapterError(f"unknown encoder {encoder!r}, this build ships {ENCODER_ID!r}")


def _expand(template: str, name: str) -> str:
    if PLACEHOLDER not in template:
        raise AdapterError(f'template must contain the "{PLACEHOLDER}" placeholder')
    return template.replace(PLACEHOLDER, name)


def _stack(vectors: list[np.ndarray]) -> np.ndarray:
    if not vectors:
        return np.zeros((0, EMBED_DIM), dtype=np.float32)
    return np.stack(vectors)


@main.command("embed-images")
@click.option("--manifest", "manifest_path", type=click.Path(), required=True,
              help="Dataset manifest naming the images.")
@click.option("--encoder", type=str, default=ENCODER_ID, show_default=True)
@click.option("-o", "--out", "out_path", type=click.Path(), required=True,
              help="Embedding payload; the sidecar lands next to it.")
def embed_images(manifest_path, encoder, out_path):
    """Embed every image in a manifest, in manifest order."""
    _check_encoder(encoder)
    header, entries = read_dataset_manifest(manifest_path)
    base = Path(manifest_path).parent
    tag = str(header["dataset_tag"])
    vectors, rows, skips = [], [], []
    for sid, cid, uri in entries:
        try:
            vec = image_vector(load_image(resolve_uri(uri, base)))
        except (AdapterError, OSError) as exc:
            skips.append({"sample_id": sid, "reason": str(exc)})
            continue
        vectors.append(vec)
        rows.append({"sample_id": sid, "class_id": cid, "dataset_tag": tag, "modality": "image"})
    write_embeddings(out_path, _stack(vectors), rows, encoder=encoder)
    if skips:
        skips_path = f"{out_path}.skips.jsonl"
        write_jsonl(skips_path, skips)
        click.echo(f"skipped {len(skips)} unreadable image(s), reasons in {skips_path}", err=True)
    click.echo(f"embedded {len(rows)} of {len(entries)} images to {out_path}")


@main.command("embed-captions")
@click.option("--catalog", "catalog_path", type=click.Path(), required=True)
@click.option("--template", type=str, default=DEFAULT_TEMPLATE, show_default=True)
@click.option("--dataset-tag", type=str, default="captions", show_default=True)
@click.option("--encoder", type=str, default=ENCODER_ID, show_default=True)
@click.option("-o", "--out", "out_path", type=click.Path(), required=True)
def embed_captions(catalog_path, template, dataset_tag, encoder, out_path):
    """Embed one proxy caption per catalog class."""
    _check_encoder(encoder)
    names = read_catalog(catalog_path)
    vectors, rows = [], []
    for cid, name in enumerate(names):
        vectors.append(text_vector(_expand(template, name)))
        rows.append({
            "sample_id": f"caption-{cid:05d}",
            "class_id": cid,
            "dataset_tag": dataset_tag,
            "modality": "text",
        })
    write_embeddings(out_path, _stack(vectors), rows, encoder=encoder)
    click.echo(f"embedded {len(rows)} captions to {out_path}")


@main.command("export-predictions")
@click.option("--manifest", "manifest_path", type=click.Path(), required=True)
@click.option("--catalog", "catalog_path", type=click.Path(), required=True)
@click.option("--classifier", "classifier_spec", type=str, default="nearest-caption",
              show_default=True, help='"nearest-caption" or "constant:<k>".')
@click.option("--template", type=str, default=DEFAULT_TEMPLATE, show_default=True,
              help="Caption template for the nearest-caption classifier.")
@click.option("--classifier-id", type=str, default=None,
              help="Identifier recorded in the log; defaults to the classifier string plus the encoder id.")
@click.option("--dataset-tag", type=str, default=None,
              help="Tag recorded in the log; defaults to the manifest's tag.")
@click.option("-o", "--out", "out_path", type=click.Path(), required=True)
def export_predictions(manifest_path, catalog_path, classifier_spec, template,
                       classifier_id, dataset_tag, out_path):
    """Run a classifier over a manifest and export its prediction log."""
    kind, constant_class = parse_classifier(classifier_spec)
    names = read_catalog(catalog_path)
    header, entries = read_dataset_manifest(manifest_path)
    tag = dataset_tag if dataset_tag is not None else str(header["dataset_tag"])
    base = Path(manifest_path).parent

    if kind == "constant":
        check_label_space([constant_class], len(names))
        records = [(sid, cid, constant_class) for sid, cid, uri in entries]
        skips = []
        log_id = classifier_id or classifier_spec
    else:
        captions = np.stack([text_vector(_expand(template, name)) for name in names])
        vectors, kept, skips = [], [], []
        for sid, cid, uri in entries:
            try:
                vectors.append(image_vector(load_image(resolve_uri(uri, base))))
            except (AdapterError, OSError) as exc:
                skips.append({"sample_id": sid, "reason": str(exc)})
                continue
            kept.append((sid, cid))
        preds = nearest_caption(_stack(vectors), captions, range(len(names))) if kept else []
        records = [(sid, cid, pred) for (sid, cid), pred in zip(kept, preds)]
        log_id = classifier_id or f"{classifier_spec}@{ENCODER_ID}"

    write_prediction_log(out_path, log_id, tag, records)
    if skips:
        skips_path = f"{out_path}.skips.jsonl"
        write_jsonl(skips_path, skips)
        click.echo(f"skipped {len(skips)} unreadable image(s), reasons in {skips_path}", err=True)
    click.echo(f"exported {len(records)} predictions of {log_id!r} to {out_path}")


@main.command("generate")
@click.option("--manifest", "manifest_path", type=click.Path(), required=True,
              help="Generation manifest to execute.")
@click.option("--dataset-tag", type=str, default="generated", show_default=True,
              help="Tag of the produced dataset manifest.")
@click.option("--source-manifest", "source_path", type=click.Path(), default=None,
              help="Real pool supplying conditioning images.")
@click.option("--pipeline", type=str, default=PIPELINE_ID, show_default=True)
@click.option("-o", "--out-dir", "out_dir", type=click.Path(), required=True)
def generate_cmd(manifest_path, dataset_tag, source_path, pipeline, out_dir):
    """Execute a generation manifest into a directory of images."""
    if pipeline != PIPELINE_ID:
        raise AdapterError(f"unknown pipeline {pipeline!r}, this build ships {PIPELINE_ID!r}")
    rows = read_generation_manifest(manifest_path)
    source_index = None
    if source_path is not None:
        _, source_entries = read_dataset_manifest(source_path)
        source_base = Path(source_path).parent
        source_index = {sid: resolve_uri(uri, source_base) for sid, cid, uri in source_entries}
    out = Path(out_dir)
    entries, skips = generate(rows, out, source_index)
    write_dataset_manifest(out / "produced_manifest.jsonl", dataset_tag, "generated",
                           entries, pipeline=pipeline)
    if skips:
        write_jsonl(out / "skips.jsonl", skips)
    rate = 100.0 * len(skips) / len(rows) if rows else 0.0
    click.echo(f"produced {len(entries)} of {len(rows)} images, "
               f"skipped {len(skips)} (failure rate {rate:.1f}%)")


if __name__ == "__main__":
    main()
