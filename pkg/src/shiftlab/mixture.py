"""Mixture plans: deterministic draws of real and generated samples.

Fractions are declared relative to a unit size, not to pool sizes, so
"100% real + 200% generated" at unit 130000 means 130000 real rows and
260000 generated rows regardless of how large the pools are. Requested
counts are round-half-up of fraction * unit_size.

Sampling is class-stratified: within a pool, per-class targets are the
pool's own class proportions apportioned by largest remainder (ties broken
toward the smaller class id), which keeps every per-class count within one
sample of exact proportionality and sums exactly to the target. Each class
pool is canonicalized by sample_id sort, shuffled with the documented
generator (seed mix64(plan_seed, origin_lane, class_id), origin_lane 0 for
real and 1 for generated), and the first k entries are taken. Plan entries
list the real block then the generated block, classes in ascending id
order, selection order within a class.

The 3x3 grid crosses real fractions {0.25, 0.5, 1.0} with generated
fractions {0.5, 1.0, 2.0}; cell index runs real-major (cell 0 is
0.25/0.5, cell 2 is 0.25/2.0, cell 8 is 1.0/2.0) and each cell plans with
seed mix64(seed, 2, cell_index).

Fixed-budget plans hold the total row count constant: round-half-up of
gen_share * budget rows are generated and the remainder real.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .catalog import ClassCatalog
from .errors import FormatError, ValidationError
from .lineio import dumps, iter_records, require
from .manifests import DatasetManifest
from .rng import GENERATOR_ID, mix64, permutation

REAL_GRID_FRACTIONS = (0.25, 0.5, 1.0)
GEN_GRID_FRACTIONS = (0.5, 1.0, 2.0)

_REAL_LANE = 0
_GEN_LANE = 1
_GRID_LANE = 2


def round_half_up(x: float) -> int:
    """Round to nearest integer, halves away from zero toward +inf.

    Python's round() ties to even; plan sizes are specified half-up, so
    0.5 -> 1 and 2.5 -> 3.
    """
    if x < 0:
        raise ValidationError(f"cannot size a negative count: {x}")
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class MixturePlan:
    """An ordered draw of (origin, sample_id) pairs.

    Invariants: entry counts per origin equal round_half_up(fraction *
    unit_size) and no (origin, sample_id) pair repeats.
    """

    real_fraction: float
    gen_fraction: float
    unit_size: int
    seed: int
    entries: tuple[tuple[str, str], ...] = field(default=())

    def __post_init__(self):
        n_real = sum(1 for origin, _ in self.entries if origin == "real")
        n_gen = len(self.entries) - n_real
        if n_real != round_half_up(self.real_fraction * self.unit_size):
            raise ValidationError(
                f"plan holds {n_real} real entries, fraction demands "
                f"{round_half_up(self.real_fraction * self.unit_size)}"
            )
        if n_gen != round_half_up(self.gen_fraction * self.unit_size):
            raise ValidationError(
                f"plan holds {n_gen} generated entries, fraction demands "
                f"{round_half_up(self.gen_fraction * self.unit_size)}"
            )
        if len(set(self.entries)) != len(self.entries):
            raise ValidationError("duplicate (origin, sample_id) entry in plan")

    def __len__(self) -> int:
        return len(self.entries)


def _apportion(pool_counts: dict[int, int], target: int) -> dict[int, int]:
    """Largest-remainder apportionment of target across classes.

    Quotas are target * count / total; every result is floor(quota) or
    floor(quota) + 1, so no class deviates from exact proportionality by
    more than one sample.
    """
    total = sum(pool_counts.values())
    cids = sorted(pool_counts)
    base: dict[int, int] = {}
    remainders: list[tuple[float, int]] = []
    assigned = 0
    for cid in cids:
        quota = target * pool_counts[cid] / total
        b = math.floor(quota)
        base[cid] = b
        assigned += b
        remainders.append((quota - b, cid))
    # stable order: largest remainder first, then smaller class id
    remainders.sort(key=lambda t: (-t[0], t[1]))
    for _, cid in remainders[: target - assigned]:
        base[cid] += 1
    return base


def _draw(pool: DatasetManifest, target: int, seed: int, lane: int, origin: str) -> list[tuple[str, str]]:
    if target == 0:
        return []
    if target > len(pool):
        raise ValidationError(
            f"{origin} pool too small: need {target} samples, have {len(pool)}"
        )
    by_class = pool.by_class()
    counts = {cid: len(entries) for cid, entries in by_class.items()}
    take = _apportion(counts, target)
    out: list[tuple[str, str]] = []
    for cid in sorted(by_class):
        k = take.get(cid, 0)
        if k == 0:
            continue
        ids = sorted(e.sample_id for e in by_class[cid])
        order = permutation(len(ids), mix64(seed, lane, cid))
        out.extend((origin, ids[int(i)]) for i in order[:k])
    return out


def _validate_pools(real: DatasetManifest, gen: DatasetManifest, catalog: ClassCatalog | None) -> None:
    if catalog is None:
        return
    for pool in (real, gen):
        for e in pool.entries:
            if e.class_id not in catalog:
                raise ValidationError(
                    f"{pool.origin} pool entry {e.sample_id!r}: unknown class id {e.class_id}"
                )


def plan_mixture(
    real: DatasetManifest,
    gen: DatasetManifest,
    real_fraction: float,
    gen_fraction: float,
    unit_size: int,
    seed: int,
    catalog: ClassCatalog | None = None,
) -> MixturePlan:
    if unit_size < 1:
        raise ValidationError("unit_size must be a positive integer")
    if real_fraction < 0 or gen_fraction < 0:
        raise ValidationError("fractions must be nonnegative")
    _validate_pools(real, gen, catalog)
    n_real = round_half_up(real_fraction * unit_size)
    n_gen = round_half_up(gen_fraction * unit_size)
    entries = _draw(real, n_real, seed, _REAL_LANE, "real")
    entries += _draw(gen, n_gen, seed, _GEN_LANE, "generated")
    return MixturePlan(
        real_fraction=real_fraction,
        gen_fraction=gen_fraction,
        unit_size=unit_size,
        seed=seed,
        entries=tuple(entries),
    )


def plan_fixed_budget(
    real: DatasetManifest,
    gen: DatasetManifest,
    gen_share: float,
    budget: int,
    seed: int,
    catalog: ClassCatalog | None = None,
) -> MixturePlan:
    """Constant total size: gen_share of the budget generated, rest real."""
    if budget < 1:
        raise ValidationError("budget must be a positive integer")
    if not 0.0 <= gen_share <= 1.0:
        raise ValidationError(f"gen_share must be within [0, 1], got {gen_share}")
    n_gen = round_half_up(gen_share * budget)
    n_real = budget - n_gen
    return plan_mixture(
        real, gen,
        real_fraction=n_real / budget,
        gen_fraction=n_gen / budget,
        unit_size=budget,
        seed=seed,
        catalog=catalog,
    )


def grid_plans(
    real: DatasetManifest,
    gen: DatasetManifest,
    unit_size: int,
    seed: int,
    catalog: ClassCatalog | None = None,
) -> list[MixturePlan]:
    """All nine real x generated fraction cells, each with its own seed."""
    plans = []
    cell = 0
    for rf in REAL_GRID_FRACTIONS:
        for gf in GEN_GRID_FRACTIONS:
            plans.append(plan_mixture(
                real, gen, rf, gf, unit_size,
                seed=mix64(seed, _GRID_LANE, cell),
                catalog=catalog,
            ))
            cell += 1
    return plans


def write_plan(plan: MixturePlan, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps({
            "kind": "mixture_plan",
            "real_fraction": plan.real_fraction,
            "gen_fraction": plan.gen_fraction,
            "unit_size": plan.unit_size,
            "seed": plan.seed,
            "generator": GENERATOR_ID,
        }))
        fh.write("\n")
        for origin, sid in plan.entries:
            fh.write(dumps({"origin": origin, "sample_id": sid}))
            fh.write("\n")


def read_plan(path: str | Path) -> MixturePlan:
    path = Path(path)
    header = None
    entries: list[tuple[str, str]] = []
    for lineno, obj in iter_records(path):
        where = f"{path}:{lineno}"
        if header is None:
            if obj.get("kind") != "mixture_plan":
                raise FormatError(f"{where}: first line must be a mixture_plan header")
            if obj.get("generator") != GENERATOR_ID:
                raise FormatError(
                    f"{where}: plan was produced by generator {obj.get('generator')!r}, "
                    f"this build implements {GENERATOR_ID!r}"
                )
            header = obj
            continue
        origin = str(require(obj, "origin", where))
        if origin not in ("real", "generated"):
            raise FormatError(f"{where}: bad origin {origin!r}")
        entries.append((origin, str(require(obj, "sample_id", where))))
    if header is None:
        raise FormatError(f"{path}: empty plan file, header line required")
    try:
        return MixturePlan(
            real_fraction=float(require(header, "real_fraction", f"{path}:1")),
            gen_fraction=float(require(header, "gen_fraction", f"{path}:1")),
            unit_size=int(require(header, "unit_size", f"{path}:1")),
            seed=int(require(header, "seed", f"{path}:1")),
            entries=tuple(entries),
        )
    except ValidationError as exc:
        raise FormatError(f"{path}: {exc}") from exc
