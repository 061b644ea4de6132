import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftlab import FormatError, ValidationError, grid_plans, plan_fixed_budget, plan_mixture
from shiftlab.mixture import MixturePlan, read_plan, round_half_up, write_plan
from tests.conftest import make_pool


def test_round_half_up_values():
    assert round_half_up(0.0) == 0
    assert round_half_up(0.5) == 1
    assert round_half_up(1.5) == 2
    assert round_half_up(2.5) == 3
    assert round_half_up(2.4999999) == 2
    # float grid products land a hair under the half; the +0.5 floor absorbs it
    assert round_half_up(0.1 + 0.2) == 0
    with pytest.raises(ValidationError):
        round_half_up(-0.5)


def test_plan_counts_follow_fractions():
    real = make_pool("real", "real", per_class=40)
    gen = make_pool("gen", "generated", per_class=80)
    plan = plan_mixture(real, gen, real_fraction=0.5, gen_fraction=1.0, unit_size=90, seed=1)
    n_real = sum(1 for origin, _ in plan.entries if origin == "real")
    assert n_real == 45
    assert len(plan) - n_real == 90


def test_plan_is_deterministic_and_seed_sensitive():
    real = make_pool("real", "real", per_class=40)
    gen = make_pool("gen", "generated", per_class=40)
    a = plan_mixture(real, gen, 0.5, 0.5, 60, seed=3)
    b = plan_mixture(real, gen, 0.5, 0.5, 60, seed=3)
    c = plan_mixture(real, gen, 0.5, 0.5, 60, seed=4)
    assert a.entries == b.entries
    assert a.entries != c.entries


def test_plan_real_block_precedes_generated_and_classes_ascend():
    real = make_pool("real", "real", per_class=40)
    gen = make_pool("gen", "generated", per_class=40)
    plan = plan_mixture(real, gen, 0.25, 0.25, 24, seed=7)
    origins = [origin for origin, _ in plan.entries]
    assert origins == ["real"] * 6 + ["generated"] * 6
    by_class = {e.sample_id: e.class_id for e in list(real.entries) + list(gen.entries)}
    real_classes = [by_class[sid] for origin, sid in plan.entries if origin == "real"]
    assert real_classes == sorted(real_classes)


def test_stratification_deviates_at_most_one_from_proportional():
    # class pools 10/20/30: a 30-row draw should take 5/10/15
    entries = []
    from shiftlab import DatasetManifest, ManifestEntry
    for cid, n in enumerate((10, 20, 30)):
        for i in range(n):
            entries.append(ManifestEntry(f"r-{cid}-{i}", cid, "u"))
    real = DatasetManifest("real", "real", tuple(entries))
    gen = make_pool("gen", "generated", per_class=20)
    plan = plan_mixture(real, gen, real_fraction=1.0, gen_fraction=0.0, unit_size=30, seed=0)
    counts = {}
    for origin, sid in plan.entries:
        cid = int(sid.split("-")[1])
        counts[cid] = counts.get(cid, 0) + 1
    assert counts == {0: 5, 1: 10, 2: 15}


def test_apportionment_tie_goes_to_smaller_class_id():
    # two equal pools, odd target: the extra sample lands on class 0
    from shiftlab import DatasetManifest, ManifestEntry
    entries = [ManifestEntry(f"r-{cid}-{i}", cid, "u") for cid in (0, 1) for i in range(10)]
    real = DatasetManifest("real", "real", tuple(entries))
    gen = make_pool("gen", "generated", per_class=10, n_classes=2)
    plan = plan_mixture(real, gen, real_fraction=1.0, gen_fraction=0.0, unit_size=5, seed=0)
    counts = {0: 0, 1: 0}
    for _, sid in plan.entries:
        counts[int(sid.split("-")[1])] += 1
    assert counts == {0: 3, 1: 2}


def test_pool_too_small_reports_need_and_have():
    real = make_pool("real", "real", per_class=5)
    gen = make_pool("gen", "generated", per_class=5)
    with pytest.raises(ValidationError, match="need 30 samples, have 15"):
        plan_mixture(real, gen, real_fraction=2.0, gen_fraction=0.0, unit_size=15, seed=0)


def test_grid_sizes_match_worked_example():
    real = make_pool("real", "real", per_class=40)
    gen = make_pool("gen", "generated", per_class=80)
    plans = grid_plans(real, gen, unit_size=100, seed=11)
    # real-major order over {0.25,0.5,1.0} x {0.5,1.0,2.0}
    assert [len(p) for p in plans] == [75, 125, 225, 100, 150, 250, 150, 200, 300]
    fractions = [(p.real_fraction, p.gen_fraction) for p in plans]
    assert fractions[0] == (0.25, 0.5)
    assert fractions[-1] == (1.0, 2.0)


def test_grid_cells_draw_independently():
    real = make_pool("real", "real", per_class=40)
    gen = make_pool("gen", "generated", per_class=80)
    plans = grid_plans(real, gen, unit_size=40, seed=11)
    a = [sid for origin, sid in plans[0].entries if origin == "real"]
    b = [sid for origin, sid in plans[3].entries if origin == "real"]
    assert a != b[: len(a)]


def test_fixed_budget_total_is_exact():
    real = make_pool("real", "real", per_class=40)
    gen = make_pool("gen", "generated", per_class=40)
    for share in (0.0, 0.3, 0.5, 0.77, 1.0):
        plan = plan_fixed_budget(real, gen, gen_share=share, budget=100, seed=2)
        assert len(plan) == 100
        n_gen = sum(1 for origin, _ in plan.entries if origin == "generated")
        assert n_gen == round_half_up(share * 100)


def test_fixed_budget_share_bounds():
    real = make_pool("real", "real", per_class=40)
    gen = make_pool("gen", "generated", per_class=40)
    with pytest.raises(ValidationError):
        plan_fixed_budget(real, gen, gen_share=1.2, budget=10, seed=0)


def test_plan_invariant_rejects_wrong_counts():
    with pytest.raises(ValidationError):
        MixturePlan(real_fraction=1.0, gen_fraction=0.0, unit_size=2, seed=0,
                    entries=(("real", "a"),))


def test_plan_rejects_duplicate_entries():
    with pytest.raises(ValidationError):
        MixturePlan(real_fraction=2.0, gen_fraction=0.0, unit_size=1, seed=0,
                    entries=(("real", "a"), ("real", "a")))


def test_plan_round_trip(tmp_path):
    real = make_pool("real", "real", per_class=40)
    gen = make_pool("gen", "generated", per_class=40)
    plan = plan_mixture(real, gen, 0.5, 0.5, 30, seed=5)
    p = tmp_path / "plan.jsonl"
    write_plan(plan, p)
    back = read_plan(p)
    assert back == plan


def test_read_plan_rejects_foreign_generator(tmp_path):
    real = make_pool("real", "real", per_class=10)
    gen = make_pool("gen", "generated", per_class=10)
    plan = plan_mixture(real, gen, 0.5, 0.5, 10, seed=5)
    p = tmp_path / "plan.jsonl"
    write_plan(plan, p)
    text = p.read_text(encoding="utf-8").replace("splitmix64-keysort-v1", "mt19937-v0")
    p.write_text(text, encoding="utf-8")
    with pytest.raises(FormatError, match="generator"):
        read_plan(p)


@given(st.integers(min_value=0, max_value=2**32), st.sampled_from([0.25, 0.5, 1.0]),
       st.sampled_from([0.5, 1.0, 2.0]))
@settings(max_examples=20, deadline=None)
def test_plan_property_counts_and_uniqueness(seed, rf, gf):
    real = make_pool("real", "real", per_class=80)
    gen = make_pool("gen", "generated", per_class=160)
    plan = plan_mixture(real, gen, rf, gf, 60, seed=seed)
    assert len(set(plan.entries)) == len(plan.entries)
    n_real = sum(1 for origin, _ in plan.entries if origin == "real")
    assert n_real == round_half_up(rf * 60)
    assert len(plan) - n_real == round_half_up(gf * 60)
