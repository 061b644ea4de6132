"""The binary container layout is frozen; the byte oracle below is authoritative."""

import json
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftlab import EmbeddingSet, FormatError, ValidationError, read_embeddings, write_embeddings
from tests.conftest import make_embeddings

HEADER = struct.Struct("<4sIQIB3s")


def test_payload_bytes_match_hand_assembled_oracle(tmp_path):
    vecs = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]], dtype=np.float32)
    es = make_embeddings(vecs, class_ids=[0, 1], tag="toy")
    p = tmp_path / "e.gseb"
    write_embeddings(es, p)
    expected = HEADER.pack(b"GSEB", 1, 2, 3, 0, b"\x00\x00\x00") + struct.pack("<6f", 1, 2, 3, 4, 5, 6)
    assert p.read_bytes() == expected


def test_sidecar_is_one_json_object_per_row(tmp_path):
    es = make_embeddings(np.eye(2, dtype=np.float32), class_ids=[1, 0], tag="toy", modality="text")
    p = tmp_path / "e.gseb"
    write_embeddings(es, p)
    rows = [json.loads(line) for line in (tmp_path / "e.gseb.idx").read_text(encoding="utf-8").splitlines()]
    assert len(rows) == 2
    assert rows[0] == {"sample_id": "s-0000", "class_id": 1, "dataset_tag": "toy", "modality": "text"}


def test_round_trip_field_equality(tmp_path, rng):
    vecs = rng.normal(size=(7, 5)).astype(np.float32)
    es = make_embeddings(vecs, class_ids=[0, 0, 1, 1, 2, 2, 2], tag="rt", modality="image")
    p = tmp_path / "e.gseb"
    write_embeddings(es, p)
    back = read_embeddings(p)
    assert back.dim == es.dim
    assert back.sample_ids == es.sample_ids
    assert back.dataset_tag == es.dataset_tag
    assert back.modality == es.modality
    assert np.array_equal(back.class_ids, es.class_ids)
    assert np.array_equal(back.vectors, es.vectors)


def test_second_write_is_byte_identical(tmp_path, rng):
    es = make_embeddings(rng.normal(size=(4, 3)).astype(np.float32), class_ids=[0, 1, 0, 1])
    a, b = tmp_path / "a.gseb", tmp_path / "b.gseb"
    write_embeddings(es, a)
    write_embeddings(read_embeddings(a), b)
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.gseb.idx").read_bytes() == (tmp_path / "b.gseb.idx").read_bytes()


def test_empty_set_round_trips(tmp_path):
    es = EmbeddingSet(dim=4, sample_ids=(), class_ids=np.zeros(0, dtype=np.int64),
                      vectors=np.zeros((0, 4), dtype=np.float32), dataset_tag="", modality="image")
    p = tmp_path / "empty.gseb"
    write_embeddings(es, p)
    back = read_embeddings(p)
    assert len(back.sample_ids) == 0 and back.dim == 4


def _write_valid(tmp_path, n=2, d=3):
    es = make_embeddings(np.arange(n * d, dtype=np.float32).reshape(n, d) + 1.0,
                         class_ids=list(range(n)))
    p = tmp_path / "v.gseb"
    write_embeddings(es, p)
    return p


def test_bad_magic(tmp_path):
    p = _write_valid(tmp_path)
    raw = bytearray(p.read_bytes())
    raw[:4] = b"NOPE"
    p.write_bytes(bytes(raw))
    with pytest.raises(FormatError, match="magic"):
        read_embeddings(p)


def test_unsupported_version(tmp_path):
    p = _write_valid(tmp_path)
    raw = bytearray(p.read_bytes())
    raw[4:8] = struct.pack("<I", 2)
    p.write_bytes(bytes(raw))
    with pytest.raises(FormatError, match="version"):
        read_embeddings(p)


def test_unsupported_dtype(tmp_path):
    p = _write_valid(tmp_path)
    raw = bytearray(p.read_bytes())
    raw[20] = 1
    p.write_bytes(bytes(raw))
    with pytest.raises(FormatError, match="dtype"):
        read_embeddings(p)


def test_nonzero_reserved(tmp_path):
    p = _write_valid(tmp_path)
    raw = bytearray(p.read_bytes())
    raw[21] = 7
    p.write_bytes(bytes(raw))
    with pytest.raises(FormatError, match="reserved"):
        read_embeddings(p)


def test_truncated_header(tmp_path):
    p = tmp_path / "t.gseb"
    p.write_bytes(b"GSEB\x01")
    with pytest.raises(FormatError, match="header"):
        read_embeddings(p)


def test_truncated_payload(tmp_path):
    p = _write_valid(tmp_path)
    raw = p.read_bytes()
    p.write_bytes(raw[:-4])
    with pytest.raises(FormatError, match="truncated"):
        read_embeddings(p)


def test_trailing_bytes(tmp_path):
    p = _write_valid(tmp_path)
    p.write_bytes(p.read_bytes() + b"\x00\x00\x00\x00")
    with pytest.raises(FormatError, match="trailing"):
        read_embeddings(p)


def test_sidecar_row_count_mismatch(tmp_path):
    p = _write_valid(tmp_path)
    idx = tmp_path / "v.gseb.idx"
    lines = idx.read_text(encoding="utf-8").splitlines()
    idx.write_text(lines[0] + "\n", encoding="utf-8")
    with pytest.raises(FormatError, match="rows"):
        read_embeddings(p)


def test_sidecar_mixed_dataset_tags(tmp_path):
    p = _write_valid(tmp_path)
    idx = tmp_path / "v.gseb.idx"
    lines = [json.loads(l) for l in idx.read_text(encoding="utf-8").splitlines()]
    lines[1]["dataset_tag"] = "other"
    idx.write_text("\n".join(json.dumps(l) for l in lines) + "\n", encoding="utf-8")
    with pytest.raises(FormatError, match="dataset_tag"):
        read_embeddings(p)


def test_sidecar_unknown_fields_tolerated_with_warning(tmp_path, caplog):
    p = _write_valid(tmp_path)
    idx = tmp_path / "v.gseb.idx"
    lines = [json.loads(l) for l in idx.read_text(encoding="utf-8").splitlines()]
    for l in lines:
        l["encoder"] = "toy-v1"
    idx.write_text("\n".join(json.dumps(l) for l in lines) + "\n", encoding="utf-8")
    with caplog.at_level("WARNING"):
        back = read_embeddings(p)
    assert len(back.sample_ids) == 2
    assert any("unknown sidecar field" in rec.getMessage() for rec in caplog.records)


def test_duplicate_sample_ids_rejected():
    with pytest.raises(ValidationError, match="duplicate"):
        EmbeddingSet(dim=2, sample_ids=("a", "a"), class_ids=np.zeros(2, dtype=np.int64),
                     vectors=np.zeros((2, 2), dtype=np.float32), dataset_tag="t")


def test_nonfinite_vectors_rejected():
    v = np.zeros((1, 2), dtype=np.float32)
    v[0, 0] = np.nan
    with pytest.raises(ValidationError, match="finite"):
        EmbeddingSet(dim=2, sample_ids=("a",), class_ids=np.zeros(1, dtype=np.int64),
                     vectors=v, dataset_tag="t")


@given(st.integers(min_value=0, max_value=12), st.integers(min_value=1, max_value=6))
@settings(max_examples=25, deadline=None)
def test_round_trip_property(tmp_path_factory, n, d):
    tmp = tmp_path_factory.mktemp("rt")
    rng = np.random.default_rng(n * 31 + d)
    es = make_embeddings(rng.normal(size=(n, d)).astype(np.float32),
                         class_ids=rng.integers(0, 4, size=n))
    p = tmp / "p.gseb"
    write_embeddings(es, p)
    back = read_embeddings(p)
    assert np.array_equal(back.vectors, es.vectors)
    assert back.sample_ids == es.sample_ids
