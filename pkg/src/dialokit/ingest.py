"""Dataset adapters: third-party formats to the canonical schema.

Three adapter families cover the annotated source shapes that need real
conversion (wizard-of-oz style task-oriented logs, intent-labeled
utterance tables, dialogue/summary pairs); everything else enters
through the canonical line-delimited format directly.  Adapters are
deterministic (same raw record, same output, ids included) and their
output always passes ``validate_dialogue``.

Single bad records never kill a run: the file driver counts them with a
reason and keeps going.  Only an unreadable file is fatal.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from .schema import (
    BeliefState,
    Dialogue,
    DialogueAct,
    Goal,
    GoalDomain,
    OPEN_DOMAIN,
    SchemaError,
    Speaker,
    TaskKind,
    Turn,
    dialogue_from_dict,
    dumps_dialogue,
    validate_dialogue,
)

ADAPTERS = ("canonical", "wizard", "intent_table", "summ_pair")


class IngestError(ValueError):
    """The input file itself is unusable."""


class AdapterRejection(ValueError):
    """One record could not be converted; carries the record id."""

    def __init__(self, record_id: object, reason: str):
        super().__init__(f"{record_id}: {reason}")
        self.record_id = record_id
        self.reason = reason


@dataclass(frozen=True)
class DatasetDescriptor:
    """What a source dataset provides and how to read it."""

    name: str
    tasks: frozenset[TaskKind]
    adapter: str
    domain_count: int | str = 1

    def __post_init__(self):
        if not self.tasks:
            raise IngestError(f"dataset {self.name!r}: tasks must be non-empty")
        if self.adapter not in ADAPTERS:
            raise IngestError(
                f"dataset {self.name!r}: unknown adapter {self.adapter!r} "
                f"(registered: {', '.join(ADAPTERS)})"
            )


@dataclass(frozen=True)
class IngestStats:
    """Accounting for one ingest run.

    ``dialogues_read`` counts every record attempted; ``utterances_read``
    sums turn counts over accepted dialogues only.
    """

    dialogues_read: int = 0
    utterances_read: int = 0
    rejections: tuple[tuple[object, str], ...] = ()

    @property
    def dialogues_rejected(self) -> int:
        return len(self.rejections)

    @property
    def dialogues_accepted(self) -> int:
        return self.dialogues_read - self.dialogues_rejected


# ---------------------------------------------------------------------------
# Adapters


def _parse_slots(raw: Any, default_domain: str, where: str, record_id: object) -> list:
    triples = []
    if isinstance(raw, dict):
        for slot, value in raw.items():
            triples.append((default_domain, str(slot), str(value)))
    elif isinstance(raw, list):
        for entry in raw:
            if isinstance(entry, (list, tuple)) and len(entry) == 3:
                triples.append((str(entry[0]), str(entry[1]), str(entry[2])))
            elif isinstance(entry, (list, tuple)) and len(entry) == 2:
                triples.append((default_domain, str(entry[0]), str(entry[1])))
            else:
                raise AdapterRejection(
                    record_id, f"{where}: slot entries must be [domain, slot, value] or [slot, value]"
                )
    else:
        raise AdapterRejection(record_id, f"{where}: slots must be a list or mapping")
    return triples


def _parse_goal(raw: Any, record_id: object) -> Goal:
    if not isinstance(raw, dict):
        raise AdapterRejection(record_id, "goal: expected object keyed by domain")
    domains = {}
    for domain, gd in raw.items():
        if not isinstance(gd, dict):
            raise AdapterRejection(record_id, f"goal[{domain}]: expected object")
        domains[domain] = GoalDomain(
            constraints={str(k): str(v) for k, v in gd.get("constraints", {}).items()},
            requestables=frozenset(str(r) for r in gd.get("requestables", [])),
            entity_required=bool(gd.get("entity_required", False)),
        )
    return Goal(domains)


def adapt_wizard_style(raw: dict, dataset: str = "wizard") -> Dialogue:
    """Convert a wizard-of-oz style record with per-exchange annotations.

    The record holds alternating user/system ``exchanges``; each user
    side may annotate the slot values it introduced, and the emitted
    user turns carry the accumulated belief state.  Raises
    ``AdapterRejection`` when an utterance is missing.
    """
    if not isinstance(raw, dict):
        raise AdapterRejection("?", "record must be an object")
    record_id = raw.get("id") or "?"
    if record_id == "?":
        raise AdapterRejection("?", "record has no id")

    if "domains" in raw:
        domains = frozenset(str(d) for d in raw["domains"])
    elif "domain" in raw:
        domains = frozenset({str(raw["domain"])})
    else:
        raise AdapterRejection(record_id, "record has no domain(s)")
    default_domain = sorted(domains)[0]

    exchanges = raw.get("exchanges")
    if not isinstance(exchanges, list) or not exchanges:
        raise AdapterRejection(record_id, "exchanges: must be a non-empty list")

    turns: list[Turn] = []
    state = BeliefState()
    for i, exchange in enumerate(exchanges):
        if not isinstance(exchange, dict):
            raise AdapterRejection(record_id, f"exchanges[{i}]: expected object")
        user_text = exchange.get("user")
        if not isinstance(user_text, str) or not user_text.strip():
            raise AdapterRejection(record_id, f"exchanges[{i}].user: utterance text missing")
        if "slots" in exchange:
            state = state.updated(
                _parse_slots(exchange["slots"], default_domain, f"exchanges[{i}].slots", record_id)
            )
        turns.append(Turn(index=len(turns), speaker=Speaker.SPEAKER1, text=user_text, belief=state))

        system_text = exchange.get("system")
        if not isinstance(system_text, str) or not system_text.strip():
            raise AdapterRejection(record_id, f"exchanges[{i}].system: utterance text missing")
        acts = None
        if "acts" in exchange:
            if not isinstance(exchange["acts"], list):
                raise AdapterRejection(record_id, f"exchanges[{i}].acts: expected list")
            acts = tuple(
                DialogueAct(
                    act=str(a.get("act", "")),
                    domain=str(a.get("domain", default_domain)),
                    slot=a.get("slot"),
                    value=a.get("value"),
                )
                for a in exchange["acts"]
            )
        turns.append(
            Turn(
                index=len(turns),
                speaker=Speaker.SPEAKER2,
                text=system_text,
                acts=acts,
                db_result=exchange.get("db_result"),
            )
        )

    return Dialogue(
        id=str(record_id),
        dataset=dataset,
        domains=domains,
        turns=tuple(turns),
        goal=_parse_goal(raw["goal"], record_id) if "goal" in raw else None,
    )


def adapt_intent_row(text: str, label: str, ordinal: int, dataset: str) -> Dialogue:
    """One (utterance, intent) row as a single-turn dialogue."""
    if not isinstance(text, str) or not text.strip():
        raise AdapterRejection(ordinal, f"row {ordinal}: utterance text must be non-empty")
    if not isinstance(label, str) or not label.strip():
        raise AdapterRejection(ordinal, f"row {ordinal}: intent label must be non-empty")
    return Dialogue(
        id=f"{dataset}-{ordinal}",
        dataset=dataset,
        domains=frozenset({OPEN_DOMAIN}),
        turns=(Turn(index=0, speaker=Speaker.SPEAKER1, text=text, intent=label),),
    )


def adapt_intent_table(
    rows: Sequence[tuple[str, str]], dataset: DatasetDescriptor | str
) -> list[Dialogue]:
    """Convert an intent-labeled utterance table, one dialogue per row.

    Ids derive from the row ordinal, so the same table always yields
    the same dialogues.  A bad row raises ``AdapterRejection``; use the
    file driver to skip and count bad rows instead.
    """
    name = dataset.name if isinstance(dataset, DatasetDescriptor) else dataset
    return [adapt_intent_row(text, label, i, name) for i, (text, label) in enumerate(rows)]


def adapt_summ_pair(
    dialogue_text: Sequence[tuple[str, str]],
    summary: str,
    *,
    dataset: str = "summ",
    dialogue_id: str | None = None,
) -> Dialogue:
    """Convert (speaker-tagged turns, summary) into a dialogue.

    The first distinct source speaker becomes speaker1 and every other
    speaker folds into speaker2, so multi-party transcripts stay within
    the two-role schema.
    """
    if not isinstance(summary, str) or not summary.strip():
        raise AdapterRejection(dialogue_id or "?", "summary: must be non-empty")
    if not dialogue_text:
        raise AdapterRejection(dialogue_id or "?", "turns: must be non-empty")

    first_tag: str | None = None
    turns = []
    for i, entry in enumerate(dialogue_text):
        tag, text = entry
        if not isinstance(text, str) or not text.strip():
            raise AdapterRejection(dialogue_id or "?", f"turns[{i}]: utterance text missing")
        if first_tag is None:
            first_tag = tag
        speaker = Speaker.SPEAKER1 if tag == first_tag else Speaker.SPEAKER2
        turns.append(Turn(index=i, speaker=speaker, text=text))

    return Dialogue(
        id=dialogue_id or f"{dataset}-0",
        dataset=dataset,
        domains=frozenset({OPEN_DOMAIN}),
        turns=tuple(turns),
        summary=summary,
    )


# ---------------------------------------------------------------------------
# File drivers


def load_canonical(path: str | Path) -> tuple[list[Dialogue], IngestStats]:
    """Read a canonical line-delimited corpus.

    Malformed lines and invariant violations become rejection entries;
    duplicate ids are rejected to keep ids unique within the corpus.
    Every returned dialogue passes ``validate_dialogue``.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from None

    dialogues: list[Dialogue] = []
    rejections: list[tuple[object, str]] = []
    seen_ids: set[str] = set()
    read = 0
    utterances = 0
    for ordinal, line in enumerate(lines):
        if not line.strip():
            continue
        read += 1
        try:
            dialogue = dialogue_from_dict(json.loads(line))
        except (json.JSONDecodeError, SchemaError) as exc:
            rejections.append((ordinal, str(exc)))
            continue
        violations = validate_dialogue(dialogue)
        if violations:
            rejections.append((ordinal, "; ".join(violations)))
            continue
        if dialogue.id in seen_ids:
            rejections.append((ordinal, f"duplicate dialogue id {dialogue.id!r}"))
            continue
        seen_ids.add(dialogue.id)
        dialogues.append(dialogue)
        utterances += len(dialogue.turns)

    return dialogues, IngestStats(
        dialogues_read=read, utterances_read=utterances, rejections=tuple(rejections)
    )


def _iter_json_lines(path: Path):
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from None
    for ordinal, line in enumerate(lines):
        if line.strip():
            yield ordinal, line


def ingest_file(
    path: str | Path, adapter: str, dataset: str | None = None
) -> tuple[list[Dialogue], IngestStats]:
    """Convert one file with the named adapter, skipping bad records.

    Input is line-delimited JSON whose record shape depends on the
    adapter: ``canonical`` takes canonical dialogues, ``wizard`` takes
    exchange records, ``intent_table`` takes ``{"text", "label"}`` rows,
    ``summ_pair`` takes ``{"turns", "summary"}`` records.
    """
    path = Path(path)
    if adapter not in ADAPTERS:
        raise IngestError(f"unknown adapter {adapter!r} (registered: {', '.join(ADAPTERS)})")
    if adapter == "canonical":
        return load_canonical(path)

    name = dataset or path.stem
    dialogues: list[Dialogue] = []
    rejections: list[tuple[object, str]] = []
    seen_ids: set[str] = set()
    read = 0
    utterances = 0
    for ordinal, line in _iter_json_lines(path):
        read += 1
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            rejections.append((ordinal, f"not valid JSON: {exc}"))
            continue
        try:
            if adapter == "wizard":
                dialogue = adapt_wizard_style(raw, dataset=name)
            elif adapter == "intent_table":
                dialogue = adapt_intent_row(
                    raw.get("text", ""), raw.get("label", ""), ordinal, name
                )
            else:
                turns = [(str(t[0]), str(t[1])) for t in raw.get("turns", [])]
                dialogue = adapt_summ_pair(
                    turns,
                    raw.get("summary", ""),
                    dataset=name,
                    dialogue_id=str(raw["id"]) if "id" in raw else f"{name}-{ordinal}",
                )
        except AdapterRejection as exc:
            rejections.append((ordinal, exc.reason))
            continue

        violations = validate_dialogue(dialogue)
        if violations:
            rejections.append((ordinal, "; ".join(violations)))
            continue
        if dialogue.id in seen_ids:
            rejections.append((ordinal, f"duplicate dialogue id {dialogue.id!r}"))
            continue
        seen_ids.add(dialogue.id)
        dialogues.append(dialogue)
        utterances += len(dialogue.turns)

    return dialogues, IngestStats(
        dialogues_read=read, utterances_read=utterances, rejections=tuple(rejections)
    )


def write_canonical(dialogues: Iterable[Dialogue], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for dialogue in dialogues:
            fh.write(dumps_dialogue(dialogue))
            fh.write("\n")


def write_rejection_log(stats: IngestStats, path: str | Path) -> None:
    """Line-delimited (input ordinal, reason) records."""
    with open(path, "w", encoding="utf-8") as fh:
        for ordinal, reason in stats.rejections:
            fh.write(json.dumps({"ordinal": ordinal, "reason": reason}, ensure_ascii=False))
            fh.write("\n")
