"""Adapter-written files must parse through the engine's own readers.

The two packages share no code, so these tests import the engine and
feed it files produced by the adapter's independent writers, and feed
the adapter files produced by the engine. That import is the point: it
proves the on-disk contract, not any shared implementation.
"""

import logging
from pathlib import Path

import numpy as np
import pytest

from shiftlab.catalog import ClassCatalog, write_catalog
from shiftlab.embeddings import read_embeddings
from shiftlab.manifests import read_dataset_manifest
from shiftlab.predictions import read_prediction_log
from shiftlab.prompts import TemplateSet, build_manifest, write_generation_manifest

from shiftlab_adapter.errors import AdapterError
from shiftlab_adapter.formats import (
    read_catalog,
    read_generation_manifest,
    resolve_uri,
    write_dataset_manifest,
    write_embeddings,
    write_prediction_log,
)

from adapter_helpers import NAMES, write_catalog_file


def test_embeddings_file_passes_engine_reader(tmp_path, caplog):
    rng = np.random.default_rng(7)
    vectors = rng.standard_normal((7, 16)).astype(np.float32)
    rows = [
        {"sample_id": f"img-{i:03d}", "class_id": i % 3, "dataset_tag": "toy", "modality": "image"}
        for i in range(7)
    ]
    payload = tmp_path / "toy.gseb"
    write_embeddings(payload, vectors, rows, encoder="toy-bow-blue-v1")

    with caplog.at_level(logging.WARNING):
        es = read_embeddings(payload)
    assert np.array_equal(es.vectors, vectors)
    assert list(es.sample_ids) == [f"img-{i:03d}" for i in range(7)]
    assert list(es.class_ids) == [i % 3 for i in range(7)]
    assert es.dataset_tag == "toy"
    assert es.modality == "image"
    # the encoder identity rides as an extra sidecar field the engine ignores
    assert any("ignored 7 unknown sidecar field(s)" in rec.getMessage() for rec in caplog.records)


def test_embeddings_writer_rejects_bad_rows(tmp_path):
    with pytest.raises(AdapterError, match="missing field"):
        write_embeddings(tmp_path / "x.gseb", np.zeros((1, 4), np.float32),
                         [{"sample_id": "a"}], encoder="e")
    with pytest.raises(AdapterError, match="sidecar rows"):
        write_embeddings(tmp_path / "x.gseb", np.zeros((2, 4), np.float32),
                         [{"sample_id": "a", "class_id": 0, "dataset_tag": "t", "modality": "image"}],
                         encoder="e")


def test_prediction_log_passes_engine_reader(tmp_path):
    path = tmp_path / "preds.jsonl"
    records = [("s-0", 0, 0), ("s-1", 1, 2), ("s-2", 2, 2)]
    write_prediction_log(path, "toy-clf", "toy-set", records)
    log = read_prediction_log(path)
    assert log.classifier_id == "toy-clf"
    assert log.dataset_tag == "toy-set"
    assert log.records == tuple(records)


def test_dataset_manifest_passes_engine_reader(tmp_path):
    path = tmp_path / "pool.jsonl"
    entries = [(f"gen-{i}", i % 2, f"images/gen-{i}.png") for i in range(6)]
    write_dataset_manifest(path, "toy-gen", "generated", entries, pipeline="procedural-v1")
    manifest = read_dataset_manifest(path)
    assert manifest.dataset_tag == "toy-gen"
    assert manifest.origin == "generated"
    assert [(e.sample_id, e.class_id, e.uri) for e in manifest.entries] == entries


def test_reads_engine_catalog(tmp_path):
    path = tmp_path / "catalog.tsv"
    write_catalog(ClassCatalog(tuple(NAMES)), path)
    assert read_catalog(path) == NAMES


def test_catalog_reader_rejects_bad_files(tmp_path):
    dup = tmp_path / "dup.tsv"
    dup.write_text("0\ttench\n1\ttench\n", encoding="utf-8")
    with pytest.raises(AdapterError, match="duplicate class name"):
        read_catalog(dup)

    sparse = tmp_path / "sparse.tsv"
    sparse.write_text("0\ttench\n2\tgoldfish\n", encoding="utf-8")
    with pytest.raises(AdapterError, match="dense"):
        read_catalog(sparse)

    alpha = tmp_path / "alpha.tsv"
    alpha.write_text("zero\ttench\n", encoding="utf-8")
    with pytest.raises(AdapterError, match="not an integer"):
        read_catalog(alpha)


def test_reads_engine_generation_manifest(tmp_path):
    catalog = ClassCatalog(("tench", "goldfish"))
    templates = TemplateSet(("a photo of a {class label}.", "a sketch of a {class label}."))
    manifest = build_manifest(catalog, templates, strategy="class_labels",
                              replicas_per_class=3, master_seed=5)
    path = tmp_path / "gen.jsonl"
    write_generation_manifest(manifest, path)

    rows = read_generation_manifest(path)
    assert len(rows) == 6
    assert [r["gen_id"] for r in rows] == [r.gen_id for r in manifest.rows]
    assert all(r["strategy"] == "class_labels" for r in rows)
    assert all(isinstance(r["seed"], int) and r["seed"] >= 0 for r in rows)


def test_generation_manifest_reader_rejects_duplicates(tmp_path):
    path = tmp_path / "gen.jsonl"
    row = ('{"class_id":0,"gen_id":"gen-x","generator":"g","prompt":"p",'
           '"replica_index":0,"seed":1,"strategy":"class_labels"}\n')
    path.write_text(row + row, encoding="utf-8")
    with pytest.raises(AdapterError, match="duplicate gen_id"):
        read_generation_manifest(path)


def test_writes_are_atomic(tmp_path):
    write_prediction_log(tmp_path / "p.jsonl", "c", "d", [("s", 0, 0)])
    write_dataset_manifest(tmp_path / "m.jsonl", "t", "real", [("s", 0, "u")])
    write_embeddings(tmp_path / "e.gseb", np.ones((1, 4), np.float32),
                     [{"sample_id": "s", "class_id": 0, "dataset_tag": "t", "modality": "image"}],
                     encoder="e")
    leftovers = [p.name for p in tmp_path.iterdir() if p.name.endswith(".tmp")]
    assert leftovers == []


def test_resolve_uri(tmp_path):
    assert resolve_uri("images/a.png", tmp_path) == tmp_path / "images" / "a.png"
    assert resolve_uri("/abs/a.png", tmp_path) == Path("/abs/a.png")
    assert resolve_uri("file:///abs/a.png", tmp_path).as_posix() == "/abs/a.png"
    assert resolve_uri("file://rel/a.png", tmp_path) == tmp_path / "rel" / "a.png"


def test_catalog_file_from_helper_round_trips(tmp_path):
    path = write_catalog_file(tmp_path / "catalog.tsv")
    assert read_catalog(path) == NAMES
