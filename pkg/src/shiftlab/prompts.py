"""Prompt expansion and generation-manifest construction.

A template is a string containing the placeholder "{class label}" exactly
once; expansion substitutes the class display name verbatim and leaves the
rest of the template untouched. The default set of 80 photo/art/style
templates ships as package data.

Generation manifests enumerate exactly replicas_per_class rows per class,
ordered by (class_id, replica_index). Replica r of a class uses template
r mod T, so the template cycle restarts per class. Per-row seeds are
mix64(master_seed, class_id, replica_index), which depends only on those
three values: reordering the catalog file, adding classes, or changing the
template set never changes the seed a given (class, replica) pair gets.

When a strategy conditions on real images, conditioning samples are drawn
per class from the source manifest by a seeded shuffle without
replacement (seed mix64(master_seed, 3, class_id)), cycling once the pool
is exhausted. The pool is canonicalized by sample_id sort first, so draws
are stable under source-manifest row order.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .catalog import ClassCatalog
from .errors import FormatError, ValidationError
from .lineio import dumps, iter_records, require
from .manifests import DatasetManifest
from .rng import GENERATOR_ID, derived_seeds, mix64, permutation

PLACEHOLDER = "{class label}"

STRATEGIES = ("class_labels", "real_images", "real_images_and_class_labels")

# lane constant separating conditioning draws from row seeds in mix64
_COND_LANE = 3


@dataclass(frozen=True)
class TemplateSet:
    """An ordered, duplicate-free list of prompt templates."""

    templates: tuple[str, ...]

    def __post_init__(self):
        if not self.templates:
            raise ValidationError("template set must not be empty")
        seen = set()
        for i, t in enumerate(self.templates):
            if t.count(PLACEHOLDER) != 1:
                raise ValidationError(
                    f"template {i} must contain {PLACEHOLDER!r} exactly once: {t!r}"
                )
            if t in seen:
                raise ValidationError(f"duplicate template: {t!r}")
            seen.add(t)

    def __len__(self) -> int:
        return len(self.templates)

    def expand(self, template_index: int, class_name: str) -> str:
        return self.templates[template_index].replace(PLACEHOLDER, class_name)


def load_default_templates() -> TemplateSet:
    text = (
        importlib.resources.files("shiftlab.data")
        .joinpath("templates_default.txt")
        .read_text(encoding="utf-8")
    )
    return TemplateSet(tuple(line for line in text.splitlines() if line.strip()))


def read_templates(path: str | Path) -> TemplateSet:
    with open(path, encoding="utf-8") as fh:
        lines = tuple(line.rstrip("\n") for line in fh if line.strip())
    if not lines:
        raise FormatError(f"{path}: template file is empty")
    return TemplateSet(lines)


@dataclass(frozen=True)
class Prompt:
    class_id: int
    template_index: int
    text: str


def expand_prompts(catalog: ClassCatalog, templates: TemplateSet) -> list[Prompt]:
    """Full cross product, ordered by (class_id, template_index)."""
    out = []
    for cid, name in enumerate(catalog.names):
        for ti, _ in enumerate(templates.templates):
            out.append(Prompt(cid, ti, templates.expand(ti, name)))
    return out


@dataclass(frozen=True, slots=True)
class GenerationRow:
    gen_id: str
    class_id: int
    replica_index: int
    strategy: str
    seed: int
    prompt: str | None
    conditioning_sample_id: str | None


@dataclass(frozen=True)
class GenerationManifest:
    """Work order for an image generator: one row per image to produce.

    master_seed is None for manifests read back from disk; per-row seeds
    are the operative values and are always present.
    """

    strategy: str
    master_seed: int | None
    rows: tuple[GenerationRow, ...] = field(default=())

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValidationError(f"unknown strategy {self.strategy!r}")
        seen = set()
        for row in self.rows:
            if row.gen_id in seen:
                raise ValidationError(f"duplicate gen id {row.gen_id!r}")
            seen.add(row.gen_id)

    def __len__(self) -> int:
        return len(self.rows)


def build_manifest(
    catalog: ClassCatalog,
    templates: TemplateSet,
    strategy: str,
    replicas_per_class: int,
    master_seed: int,
    source_manifest: DatasetManifest | None = None,
) -> GenerationManifest:
    if strategy not in STRATEGIES:
        raise ValidationError(f"unknown strategy {strategy!r}, expected one of {STRATEGIES}")
    if replicas_per_class < 1:
        raise ValidationError("replicas_per_class must be >= 1")
    wants_prompt = strategy in ("class_labels", "real_images_and_class_labels")
    wants_conditioning = strategy in ("real_images", "real_images_and_class_labels")

    conditioning: dict[int, list[str]] = {}
    if wants_conditioning:
        if source_manifest is None:
            raise ValidationError(f"strategy {strategy!r} requires a source manifest")
        pools = source_manifest.by_class()
        for cid in range(len(catalog)):
            pool = sorted(e.sample_id for e in pools.get(cid, ()))
            if not pool:
                raise ValidationError(
                    f"class {cid} ({catalog.names[cid]!r}) has no source samples to condition on"
                )
            order = permutation(len(pool), mix64(master_seed, _COND_LANE, cid))
            conditioning[cid] = [pool[int(i)] for i in order]

    n_templates = len(templates)
    rows: list[GenerationRow] = []
    for cid, name in enumerate(catalog.names):
        row_seeds = _row_seeds(master_seed, cid, replicas_per_class)
        prompt_cycle = None
        if wants_prompt:
            prompt_cycle = [templates.expand(ti, name) for ti in range(n_templates)]
        pool = conditioning.get(cid)
        for r in range(replicas_per_class):
            rows.append(GenerationRow(
                gen_id=f"gen-c{cid:05d}-r{r:07d}",
                class_id=cid,
                replica_index=r,
                strategy=strategy,
                seed=int(row_seeds[r]),
                prompt=prompt_cycle[r % n_templates] if prompt_cycle is not None else None,
                conditioning_sample_id=pool[r % len(pool)] if pool is not None else None,
            ))
    return GenerationManifest(strategy=strategy, master_seed=master_seed, rows=tuple(rows))


def _row_seeds(master_seed: int, class_id: int, count: int) -> np.ndarray:
    # mix64(master_seed, class_id, r) for r in range(count), vectorized
    return derived_seeds(master_seed, class_id, count)


def write_generation_manifest(manifest: GenerationManifest, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in manifest.rows:
            obj = {
                "gen_id": row.gen_id,
                "class_id": row.class_id,
                "replica_index": row.replica_index,
                "strategy": row.strategy,
                "seed": row.seed,
                "generator": GENERATOR_ID,
            }
            if row.prompt is not None:
                obj["prompt"] = row.prompt
            if row.conditioning_sample_id is not None:
                obj["conditioning_sample_id"] = row.conditioning_sample_id
            fh.write(dumps(obj))
            fh.write("\n")


def read_generation_manifest(path: str | Path) -> GenerationManifest:
    path = Path(path)
    rows: list[GenerationRow] = []
    strategies: set[str] = set()
    for lineno, obj in iter_records(path):
        where = f"{path}:{lineno}"
        strategy = str(require(obj, "strategy", where))
        strategies.add(strategy)
        ints = {}
        for name in ("seed", "class_id", "replica_index"):
            value = require(obj, name, where)
            if not isinstance(value, int) or isinstance(value, bool):
                raise FormatError(f"{where}: {name} must be an integer")
            ints[name] = value
        rows.append(GenerationRow(
            gen_id=str(require(obj, "gen_id", where)),
            class_id=ints["class_id"],
            replica_index=ints["replica_index"],
            strategy=strategy,
            seed=ints["seed"],
            prompt=obj.get("prompt"),
            conditioning_sample_id=obj.get("conditioning_sample_id"),
        ))
    if not rows:
        raise FormatError(f"{path}: generation manifest is empty")
    if len(strategies) > 1:
        raise FormatError(f"{path}: mixed strategies {sorted(strategies)}")
    try:
        return GenerationManifest(strategy=strategies.pop(), master_seed=None, rows=tuple(rows))
    except ValidationError as exc:
        raise FormatError(f"{path}: {exc}") from exc
