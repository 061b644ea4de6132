import pytest

from shiftlab import ClassCatalog, ValidationError, build_manifest, expand_prompts, load_default_templates
from shiftlab.prompts import (
    PLACEHOLDER,
    TemplateSet,
    read_generation_manifest,
    read_templates,
    write_generation_manifest,
)
from shiftlab.rng import mix64, permutation, splitmix64
from tests.conftest import make_pool

CAT = ClassCatalog(("tench", "goldfish", "white shark"))


def test_default_template_set_has_eighty_entries():
    ts = load_default_templates()
    assert len(ts.templates) == 80
    assert len(set(ts.templates)) == 80
    assert all(PLACEHOLDER in t for t in ts.templates)
    assert "a photo of a {class label}." in ts.templates


def test_template_requires_exactly_one_placeholder():
    with pytest.raises(ValidationError):
        TemplateSet(("no placeholder here",))
    with pytest.raises(ValidationError):
        TemplateSet(("{class label} and {class label}",))


def test_expand_renders_and_orders_by_class_then_template():
    ts = TemplateSet(("a photo of a {class label}.", "art of the {class label}."))
    prompts = expand_prompts(CAT, ts)
    assert len(prompts) == 6
    assert [(p.class_id, p.template_index) for p in prompts] == [
        (0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1)]
    assert prompts[0].text == "a photo of a tench."
    assert prompts[5].text == "art of the white shark."


def test_read_templates_file(tmp_path):
    p = tmp_path / "t.txt"
    p.write_text("one {class label}.\n\ntwo {class label}.\n", encoding="utf-8")
    ts = read_templates(p)
    assert ts.templates == ("one {class label}.", "two {class label}.")


def test_manifest_rows_cycle_templates_and_derive_seeds():
    ts = TemplateSet(("t0 {class label}", "t1 {class label}"))
    m = build_manifest(CAT, ts, "class_labels", replicas_per_class=3, master_seed=42)
    rows = [r for r in m.rows if r.class_id == 1]
    assert [r.replica_index for r in rows] == [0, 1, 2]
    # replica r uses template r mod T
    assert rows[0].prompt == "t0 goldfish"
    assert rows[1].prompt == "t1 goldfish"
    assert rows[2].prompt == "t0 goldfish"
    # row seed: stream keyed by (master, class), indexed by replica
    base = mix64(42, 1)
    assert rows[0].seed == splitmix64(base ^ 0)
    assert rows[2].seed == splitmix64(base ^ 2)
    assert rows[0].gen_id == "gen-c00001-r0000000"


def test_manifest_gen_ids_unique_and_strategy_recorded():
    ts = TemplateSet(("x {class label}",))
    m = build_manifest(CAT, ts, "class_labels", replicas_per_class=5, master_seed=0)
    ids = [r.gen_id for r in m.rows]
    assert len(set(ids)) == len(ids) == 15
    assert m.strategy == "class_labels"
    assert all(r.conditioning_sample_id is None for r in m.rows)


def test_conditioning_draws_cycle_a_seeded_permutation():
    ts = TemplateSet(("x {class label}",))
    pool = make_pool("real", "real", per_class=4)
    m = build_manifest(CAT, ts, "real_images", replicas_per_class=6,
                       master_seed=9, source_manifest=pool)
    rows = [r for r in m.rows if r.class_id == 2]
    pool_ids = sorted(e.sample_id for e in pool.entries if e.class_id == 2)
    order = permutation(4, mix64(9, 3, 2))
    expected = [pool_ids[order[r % 4]] for r in range(6)]
    assert [r.conditioning_sample_id for r in rows] == expected
    # pure image conditioning carries no prompt text
    assert all(r.prompt is None for r in rows)


def test_joint_strategy_has_both_prompt_and_conditioning():
    ts = TemplateSet(("x {class label}",))
    pool = make_pool("real", "real", per_class=2)
    m = build_manifest(CAT, ts, "real_images_and_class_labels", replicas_per_class=2,
                       master_seed=1, source_manifest=pool)
    assert all(r.prompt is not None and r.conditioning_sample_id is not None for r in m.rows)


def test_conditioning_requires_source_manifest():
    ts = TemplateSet(("x {class label}",))
    with pytest.raises(ValidationError):
        build_manifest(CAT, ts, "real_images", replicas_per_class=1, master_seed=0)


def test_unknown_strategy_rejected():
    ts = TemplateSet(("x {class label}",))
    with pytest.raises(ValidationError):
        build_manifest(CAT, ts, "freestyle", replicas_per_class=1, master_seed=0)


def test_manifest_round_trip(tmp_path):
    ts = TemplateSet(("t0 {class label}", "t1 {class label}"))
    m = build_manifest(CAT, ts, "class_labels", replicas_per_class=4, master_seed=3)
    p = tmp_path / "gen.jsonl"
    write_generation_manifest(m, p)
    back = read_generation_manifest(p)
    assert back.strategy == m.strategy
    assert back.rows == m.rows
    # per-row seeds carry the full derivation; the master key is not stored
    assert back.master_seed is None


def test_same_seed_same_manifest_different_seed_differs():
    ts = TemplateSet(("x {class label}",))
    a = build_manifest(CAT, ts, "class_labels", replicas_per_class=3, master_seed=5)
    b = build_manifest(CAT, ts, "class_labels", replicas_per_class=3, master_seed=5)
    c = build_manifest(CAT, ts, "class_labels", replicas_per_class=3, master_seed=6)
    assert a.rows == b.rows
    assert [r.seed for r in a.rows] != [r.seed for r in c.rows]
