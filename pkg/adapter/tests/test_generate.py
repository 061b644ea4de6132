import json

import numpy as np
from PIL import Image

from shiftlab_adapter.encoders import image_vector, load_image, text_vector
from shiftlab_adapter.formats import read_dataset_manifest, write_dataset_manifest, write_jsonl
from shiftlab_adapter.generate import PIPELINE_ID, generate, render

from adapter_helpers import run_cli


def make_row(gen_id, cid, seed, prompt=None, cond=None, strategy="class_labels"):
    row = {
        "class_id": cid,
        "gen_id": gen_id,
        "generator": "splitmix64-keysort-v1",
        "replica_index": 0,
        "seed": seed,
        "strategy": strategy,
    }
    if prompt is not None:
        row["prompt"] = prompt
    if cond is not None:
        row["conditioning_sample_id"] = cond
    return row


def cos(a, b):
    a = np.asarray(a, np.float64)
    b = np.asarray(b, np.float64)
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))


def test_single_row_produces_one_image(tmp_path):
    rows = [make_row("gen-c00000-r0000000", 0, 7, prompt="a photo of a tench.")]
    entries, skips = generate(rows, tmp_path)
    assert skips == []
    assert entries == [("gen-c00000-r0000000", 0, "gen-c00000-r0000000.png")]
    img = Image.open(tmp_path / "gen-c00000-r0000000.png")
    assert img.size == (64, 64)
    assert img.mode == "RGB"


def test_rerun_reproduces_files_byte_for_byte(tmp_path):
    rows = [make_row(f"gen-{i}", i % 2, 1000 + i, prompt=f"a photo number {i}.") for i in range(5)]
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    entries_a, _ = generate(rows, a_dir)
    entries_b, _ = generate(rows, b_dir)
    assert entries_a == entries_b
    for _, _, name in entries_a:
        assert (a_dir / name).read_bytes() == (b_dir / name).read_bytes()


def test_image_conditioning_plants_the_source_embedding(tmp_path):
    real = tmp_path / "real.png"
    render(text_vector("a photo of a kite."), seed=3).save(real, format="PNG")
    target = image_vector(load_image(real))

    rows = [make_row("gen-cond", 9, 44, cond="real-0", strategy="real_images")]
    entries, skips = generate(rows, tmp_path / "out", {"real-0": real})
    assert skips == []
    produced = image_vector(load_image(tmp_path / "out" / entries[0][2]))
    assert cos(produced, target) > 0.999


def test_joint_conditioning_mixes_text_and_image(tmp_path):
    real = tmp_path / "real.png"
    render(text_vector("a photo of a jay."), seed=3).save(real, format="PNG")
    text = text_vector("a sketch of a jay.").astype(np.float64)
    img = image_vector(load_image(real)).astype(np.float64)

    rows = [make_row("gen-joint", 6, 44, prompt="a sketch of a jay.",
                     cond="real-0", strategy="real_images_and_class_labels")]
    entries, skips = generate(rows, tmp_path / "out", {"real-0": real})
    assert skips == []
    produced = image_vector(load_image(tmp_path / "out" / entries[0][2]))
    assert cos(produced, (text + img) / np.linalg.norm(text + img)) > 0.999


def test_failed_rows_are_recorded_and_skipped(tmp_path):
    corrupt = tmp_path / "corrupt.png"
    corrupt.write_bytes(b"junk bytes, not an image")
    good = tmp_path / "good.png"
    render(text_vector("a photo of a bulbul."), seed=3).save(good, format="PNG")

    rows = [
        make_row("gen-0", 0, 1, prompt="a photo of a tench."),
        make_row("gen-1", 1, 2, cond="real-bad", strategy="real_images"),
        make_row("gen-2", 2, 3, cond="real-good", strategy="real_images"),
        make_row("gen-3", 3, 4, cond="real-missing", strategy="real_images"),
        make_row("gen-4", 4, 5),
    ]
    index = {"real-bad": corrupt, "real-good": good}
    entries, skips = generate(rows, tmp_path / "out", index)

    assert [e[0] for e in entries] == ["gen-0", "gen-2"]
    reasons = {s["gen_id"]: s["reason"] for s in skips}
    assert set(reasons) == {"gen-1", "gen-3", "gen-4"}
    assert "not in the source manifest" in reasons["gen-3"]
    assert "neither" in reasons["gen-4"]


def test_conditioning_without_source_manifest_is_skipped(tmp_path):
    rows = [make_row("gen-0", 0, 1, cond="real-0", strategy="real_images")]
    entries, skips = generate(rows, tmp_path)
    assert entries == []
    assert "no source manifest" in skips[0]["reason"]


def test_generate_cli_writes_manifest_and_skips(tmp_path):
    src_dir = tmp_path / "real"
    src_dir.mkdir()
    render(text_vector("a photo of a tench."), seed=8).save(src_dir / "real-0.png", format="PNG")
    (src_dir / "real-1.png").write_bytes(b"broken")
    write_dataset_manifest(src_dir / "manifest.jsonl", "toy-real", "real",
                           [("real-0", 0, "real-0.png"), ("real-1", 1, "real-1.png")])

    genman = tmp_path / "genman.jsonl"
    write_jsonl(genman, [
        make_row("gen-0", 0, 1, cond="real-0", strategy="real_images"),
        make_row("gen-1", 1, 2, cond="real-1", strategy="real_images"),
    ])

    out_dir = tmp_path / "out"
    proc = run_cli("shiftlab_adapter.cli", "generate", "--manifest", genman,
                   "--source-manifest", src_dir / "manifest.jsonl",
                   "--dataset-tag", "toy-gen", "-o", out_dir)
    assert "failure rate 50.0%" in proc.stdout

    header, entries = read_dataset_manifest(out_dir / "produced_manifest.jsonl")
    assert header["dataset_tag"] == "toy-gen"
    assert header["origin"] == "generated"
    assert header["pipeline"] == PIPELINE_ID
    assert [e[0] for e in entries] == ["gen-0"]

    skips = [json.loads(line) for line in (out_dir / "skips.jsonl").read_text().splitlines()]
    assert skips[0]["gen_id"] == "gen-1"
