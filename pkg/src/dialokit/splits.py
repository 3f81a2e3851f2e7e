"""Deterministic training-split construction.

Three protocols: a percentage subsample of the corpus, a fixed number
of examples per intent label, and leave-one-domain-out transfer.  All
sampling flows through numpy's PCG64 generator seeded with an explicit
64-bit seed, so a split manifest is reproducible from (protocol,
parameters, seed) alone; selections are returned in the original corpus
order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .schema import Dialogue


class SplitError(ValueError):
    """A split cannot be built from the given corpus."""


@dataclass(frozen=True)
class SplitManifest:
    """A reproducible description of one split."""

    protocol: str
    seed: int
    parameters: dict = field(default_factory=dict)
    partitions: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self):
        seen: set[str] = set()
        for name, members in self.partitions.items():
            overlap = seen.intersection(members)
            if overlap:
                raise SplitError(
                    f"partition {name!r} overlaps another partition: {sorted(overlap)[:3]}"
                )
            seen.update(members)

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "seed": self.seed,
            "parameters": dict(self.parameters),
            "partitions": {k: list(v) for k, v in self.partitions.items()},
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "SplitManifest":
        return cls(
            protocol=raw["protocol"],
            seed=int(raw["seed"]),
            parameters=dict(raw.get("parameters", {})),
            partitions={k: list(v) for k, v in raw.get("partitions", {}).items()},
        )


def write_manifest(manifest: SplitManifest, path: str | Path) -> None:
    Path(path).write_text(json.dumps(manifest.to_dict(), indent=2) + "\n", encoding="utf-8")


def read_manifest(path: str | Path) -> SplitManifest:
    return SplitManifest.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def percent_subsample(ids: Sequence[str], pct: float, seed: int) -> list[str]:
    """Select ``floor(len(ids) * pct / 100)`` ids (at least one).

    Uniform without replacement, returned in original order.  The same
    (ids, pct, seed) always select the same subset.
    """
    if not ids:
        raise SplitError("cannot subsample an empty id list")
    if not (0.0 < pct <= 100.0):
        raise SplitError(f"pct must be in (0, 100], got {pct}")
    # epsilon keeps the floor exact when n*pct/100 lands on an integer
    size = max(1, int(len(ids) * pct / 100.0 + 1e-9))
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(ids), size=size, replace=False)
    return [ids[i] for i in sorted(int(c) for c in chosen)]


def k_per_intent(examples: Sequence[tuple[str, str]], k: int, seed: int) -> list[str]:
    """Select up to ``k`` example ids per intent label.

    Intents with fewer than ``k`` examples contribute all of them.  The
    union is returned in original order.
    """
    if k < 1:
        raise SplitError(f"k must be >= 1, got {k}")
    positions: dict[str, list[int]] = {}
    for i, (_, intent) in enumerate(examples):
        positions.setdefault(intent, []).append(i)
    rng = np.random.default_rng(seed)
    selected: set[int] = set()
    for intent in sorted(positions):
        pool = positions[intent]
        take = min(k, len(pool))
        chosen = rng.choice(len(pool), size=take, replace=False)
        selected.update(pool[int(c)] for c in chosen)
    return [examples[i][0] for i in sorted(selected)]


def leave_one_domain_out(
    dialogues: Sequence[Dialogue],
    target_domain: str,
    seed: int,
    validation_size: int = 200,
) -> tuple[list[str], list[str], list[str]]:
    """(source_train, source_validation, target_test) dialogue ids.

    Multi-domain dialogues are excluded outright.  Single-domain
    dialogues in the target domain form the test set; the remaining
    single-domain dialogues form the source pool, from which exactly
    ``validation_size`` are sampled for validation and the rest kept
    for training (both in original order).
    """
    domains_seen = set()
    for d in dialogues:
        domains_seen.update(d.domains)
    if target_domain not in domains_seen:
        raise SplitError(f"target domain {target_domain!r} does not occur in the corpus")

    source_pool: list[str] = []
    target_test: list[str] = []
    for d in dialogues:
        if len(d.domains) != 1:
            continue
        (domain,) = d.domains
        if domain == target_domain:
            target_test.append(d.id)
        else:
            source_pool.append(d.id)

    if len(source_pool) < validation_size:
        raise SplitError(
            f"source pool has {len(source_pool)} dialogues, "
            f"need {validation_size} for validation "
            f"(short by {validation_size - len(source_pool)})"
        )
    rng = np.random.default_rng(seed)
    chosen = set(int(c) for c in rng.choice(len(source_pool), size=validation_size, replace=False))
    source_validation = [source_pool[i] for i in sorted(chosen)]
    source_train = [source_pool[i] for i in range(len(source_pool)) if i not in chosen]
    return source_train, source_validation, target_test


def filter_by_ids(dialogues: Iterable[Dialogue], ids: Iterable[str]) -> list[Dialogue]:
    """Dialogues whose id is in ``ids``, preserving corpus order."""
    wanted = set(ids)
    return [d for d in dialogues if d.id in wanted]
