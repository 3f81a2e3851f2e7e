"""Canonical dialogue data model.

Every other module reads and writes these types.  A corpus on disk is
line-delimited JSON, one dialogue per line (see ``dialogue_to_dict`` /
``dialogue_from_dict`` for the exact field layout); optional fields are
omitted when absent.

All types are immutable value objects: construct once, share freely.
Structural problems are reported by ``validate_dialogue`` as a list of
violation strings rather than raised, so loaders can count and skip bad
records without dying.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Iterator

from .text import normalize_token, normalize_value

BeliefTriple = tuple[str, str, str]


class SchemaError(ValueError):
    """A record does not have the canonical structure."""


class Speaker(Enum):
    """One of the two conversation roles.

    ``SPEAKER1`` is the user side, ``SPEAKER2`` the system side.  Open
    domain corpora with more than two interlocutors must be folded into
    these two roles at ingest time.
    """

    SPEAKER1 = "speaker1"
    SPEAKER2 = "speaker2"

    @property
    def prefix(self) -> str:
        """Role prefix used when rendering dialogue context."""
        return "user" if self is Speaker.SPEAKER1 else "system"

    @classmethod
    def from_string(cls, raw: str) -> "Speaker":
        try:
            return cls(raw)
        except ValueError:
            raise SchemaError(f"unknown speaker role: {raw!r}") from None


class TaskKind(Enum):
    """The seven supported training tasks."""

    NLG = "nlg"
    DST = "dst"
    POL = "pol"
    IC = "ic"
    MCQA = "mcqa"
    NUP = "nup"
    SUMM = "summ"

    @classmethod
    def from_string(cls, raw: str) -> "TaskKind":
        try:
            return cls(raw.strip().lower())
        except ValueError:
            raise SchemaError(f"unknown task: {raw!r}") from None


#: Fixed task ordering used wherever tasks are enumerated.
TASK_ORDER: tuple[TaskKind, ...] = (
    TaskKind.NLG,
    TaskKind.DST,
    TaskKind.POL,
    TaskKind.IC,
    TaskKind.MCQA,
    TaskKind.NUP,
    TaskKind.SUMM,
)

#: Sentinel domain for open-domain corpora.
OPEN_DOMAIN = "open"


class BeliefState:
    """An immutable set of (domain, slot, value) constraints.

    At most one value per (domain, slot) pair; later triples passed to
    the constructor win, matching how a dialogue state is updated turn
    by turn.  Domain and slot are normalized to lowercase tokens and
    values to canonical text on construction, so two states compare
    equal whenever their normalized triple sets do, regardless of
    insertion order.
    """

    __slots__ = ("_triples",)

    def __init__(self, triples: Iterable[BeliefTriple] = ()):
        by_slot: dict[tuple[str, str], str] = {}
        for domain, slot, value in triples:
            key = (normalize_token(domain), normalize_token(slot))
            by_slot[key] = normalize_value(value)
        self._triples = frozenset((d, s, v) for (d, s), v in by_slot.items())

    @property
    def triples(self) -> frozenset[BeliefTriple]:
        return self._triples

    def sorted_triples(self) -> list[BeliefTriple]:
        return sorted(self._triples)

    def updated(self, triples: Iterable[BeliefTriple]) -> "BeliefState":
        """New state with ``triples`` applied on top of this one."""
        return BeliefState(self.sorted_triples() + list(triples))

    def value_of(self, domain: str, slot: str) -> str | None:
        key = (normalize_token(domain), normalize_token(slot))
        for d, s, v in self._triples:
            if (d, s) == key:
                return v
        return None

    def __iter__(self) -> Iterator[BeliefTriple]:
        return iter(self.sorted_triples())

    def __len__(self) -> int:
        return len(self._triples)

    def __bool__(self) -> bool:
        return bool(self._triples)

    def __contains__(self, triple: BeliefTriple) -> bool:
        return triple in self._triples

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BeliefState):
            return NotImplemented
        return self._triples == other._triples

    def __hash__(self) -> int:
        return hash(self._triples)

    def __repr__(self) -> str:
        inner = ", ".join(f"({d}, {s}, {v})" for d, s, v in self.sorted_triples())
        return f"BeliefState({{{inner}}})"


@dataclass(frozen=True)
class DialogueAct:
    """A single system act: what the policy decided to say."""

    act: str
    domain: str
    slot: str | None = None
    value: str | None = None


@dataclass(frozen=True)
class Turn:
    """One utterance with its optional annotations.

    ``index`` must equal the turn's position in the owning dialogue.
    ``belief`` carries the cumulative state up to and including this
    turn; ``db_result`` is the number of database entities matching the
    current constraints when the owning dataset provides one.
    """

    index: int
    speaker: Speaker
    text: str
    belief: BeliefState | None = None
    acts: tuple[DialogueAct, ...] | None = None
    intent: str | None = None
    db_result: int | None = None


@dataclass(frozen=True)
class GoalDomain:
    """What the user wants within one domain."""

    constraints: dict[str, str] = field(default_factory=dict)
    requestables: frozenset[str] = frozenset()
    entity_required: bool = False


@dataclass(frozen=True)
class Goal:
    """Per-domain user goal; drives the inform/success judgments."""

    domains: dict[str, GoalDomain] = field(default_factory=dict)

    def items(self):
        return self.domains.items()

    def __bool__(self) -> bool:
        return bool(self.domains)


@dataclass(frozen=True)
class McqaItem:
    """A multiple-choice question grounded in the dialogue."""

    question: str
    options: tuple[str, ...]
    answer_index: int


@dataclass(frozen=True)
class NupCandidate:
    """A candidate next utterance and whether it is the true one."""

    text: str
    is_next: bool


@dataclass(frozen=True)
class Dialogue:
    """A two-speaker conversation with optional annotations.

    ``domains`` is never empty; open-domain data uses the sentinel
    ``{"open"}``.  Consecutive turns by the same speaker are legal
    (open-domain corpora contain them).
    """

    id: str
    dataset: str
    domains: frozenset[str]
    turns: tuple[Turn, ...]
    goal: Goal | None = None
    summary: str | None = None
    mcqa: tuple[McqaItem, ...] | None = None
    nup_candidates: tuple[NupCandidate, ...] | None = None

    def turns_by(self, speaker: Speaker) -> list[Turn]:
        return [t for t in self.turns if t.speaker is speaker]


def validate_dialogue(dialogue: Dialogue) -> list[str]:
    """Check every schema invariant; return one message per violation.

    Pure and deterministic: the same dialogue always yields the same
    list, and a valid dialogue yields ``[]``.  Messages name the field
    and the rule broken.
    """
    violations: list[str] = []

    if not dialogue.id or not dialogue.id.strip():
        violations.append("id: must be non-empty")
    if not dialogue.dataset or not dialogue.dataset.strip():
        violations.append("dataset: must be non-empty")
    if not dialogue.domains:
        violations.append("domains: must be non-empty (use 'open' for open-domain data)")
    else:
        for domain in sorted(dialogue.domains):
            if not domain or not domain.strip():
                violations.append("domains: domain tokens must be non-empty")
                break

    if not dialogue.turns:
        violations.append("turns: must be non-empty")
    for position, turn in enumerate(dialogue.turns):
        where = f"turns[{position}]"
        if turn.index != position:
            violations.append(f"{where}.index: must equal position {position}, got {turn.index}")
        if not isinstance(turn.speaker, Speaker):
            violations.append(f"{where}.speaker: must be a Speaker role")
        if not turn.text or not turn.text.strip():
            violations.append(f"{where}.text: must be non-empty after trimming")
        if turn.belief is not None:
            for d, s, v in turn.belief.sorted_triples():
                if not d:
                    violations.append(f"{where}.belief: domain must be non-empty")
                if not s:
                    violations.append(f"{where}.belief: slot must be non-empty (domain={d!r})")
                if not v:
                    violations.append(
                        f"{where}.belief: value must be non-empty after normalization "
                        f"(domain={d!r}, slot={s!r})"
                    )
        if turn.acts is not None:
            for j, act in enumerate(turn.acts):
                if not act.act or not act.act.strip():
                    violations.append(f"{where}.acts[{j}].act: must be non-empty")
                if not act.domain or not act.domain.strip():
                    violations.append(f"{where}.acts[{j}].domain: must be non-empty")
        if turn.intent is not None and not turn.intent.strip():
            violations.append(f"{where}.intent: must be non-empty when present")
        if turn.db_result is not None and turn.db_result < 0:
            violations.append(f"{where}.db_result: must be >= 0")

    if dialogue.goal is not None:
        for domain in dialogue.goal.domains:
            if not domain or not domain.strip():
                violations.append("goal: domain keys must be non-empty")

    if dialogue.summary is not None and not dialogue.summary.strip():
        violations.append("summary: must be non-empty when present")

    if dialogue.mcqa is not None:
        for j, item in enumerate(dialogue.mcqa):
            where = f"mcqa[{j}]"
            if not item.question or not item.question.strip():
                violations.append(f"{where}.question: must be non-empty")
            if len(item.options) < 2:
                violations.append(f"{where}.options: must have at least 2 options")
            if not (0 <= item.answer_index < len(item.options)):
                violations.append(
                    f"{where}.answer_index: must be in [0, {len(item.options)}), "
                    f"got {item.answer_index}"
                )

    if dialogue.nup_candidates is not None:
        for j, cand in enumerate(dialogue.nup_candidates):
            if not cand.text or not cand.text.strip():
                violations.append(f"nup_candidates[{j}].text: must be non-empty")

    return violations


# ---------------------------------------------------------------------------
# Canonical JSON form


def dialogue_to_dict(dialogue: Dialogue) -> dict[str, Any]:
    """Render a dialogue in the canonical field layout.

    Collections with set semantics (domains, belief triples,
    requestables) are sorted so equal dialogues serialize to identical
    bytes.
    """
    turns = []
    for turn in dialogue.turns:
        td: dict[str, Any] = {
            "index": turn.index,
            "speaker": turn.speaker.value,
            "text": turn.text,
        }
        if turn.belief is not None:
            td["belief"] = [list(t) for t in turn.belief.sorted_triples()]
        if turn.acts is not None:
            td["acts"] = [
                {
                    k: v
                    for k, v in (
                        ("act", a.act),
                        ("domain", a.domain),
                        ("slot", a.slot),
                        ("value", a.value),
                    )
                    if v is not None
                }
                for a in turn.acts
            ]
        if turn.intent is not None:
            td["intent"] = turn.intent
        if turn.db_result is not None:
            td["db_result"] = turn.db_result
        turns.append(td)

    out: dict[str, Any] = {
        "id": dialogue.id,
        "dataset": dialogue.dataset,
        "domains": sorted(dialogue.domains),
        "turns": turns,
    }
    if dialogue.goal is not None:
        out["goal"] = {
            domain: {
                "constraints": dict(sorted(gd.constraints.items())),
                "requestables": sorted(gd.requestables),
                "entity_required": gd.entity_required,
            }
            for domain, gd in sorted(dialogue.goal.domains.items())
        }
    if dialogue.summary is not None:
        out["summary"] = dialogue.summary
    if dialogue.mcqa is not None:
        out["mcqa"] = [
            {"question": m.question, "options": list(m.options), "answer_index": m.answer_index}
            for m in dialogue.mcqa
        ]
    if dialogue.nup_candidates is not None:
        out["nup_candidates"] = [{"text": c.text, "is_next": c.is_next} for c in dialogue.nup_candidates]
    return out


def _require(mapping: dict[str, Any], key: str, kind: type, where: str) -> Any:
    if key not in mapping:
        raise SchemaError(f"{where}: missing required field {key!r}")
    value = mapping[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise SchemaError(f"{where}.{key}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def dialogue_from_dict(raw: dict[str, Any]) -> Dialogue:
    """Parse the canonical field layout; raise ``SchemaError`` if malformed.

    Structural problems (missing fields, wrong types) raise; invariant
    problems (empty text, bad indices) parse fine and are left for
    ``validate_dialogue``.
    """
    if not isinstance(raw, dict):
        raise SchemaError(f"dialogue: expected object, got {type(raw).__name__}")
    where = f"dialogue {raw.get('id', '?')!r}"

    turns = []
    raw_turns = _require(raw, "turns", list, where)
    for i, rt in enumerate(raw_turns):
        if not isinstance(rt, dict):
            raise SchemaError(f"{where}.turns[{i}]: expected object")
        belief = None
        if "belief" in rt:
            triples = rt["belief"]
            if not isinstance(triples, list):
                raise SchemaError(f"{where}.turns[{i}].belief: expected list of triples")
            parsed = []
            for t in triples:
                if not isinstance(t, (list, tuple)) or len(t) != 3:
                    raise SchemaError(f"{where}.turns[{i}].belief: each entry must be [domain, slot, value]")
                parsed.append((str(t[0]), str(t[1]), str(t[2])))
            belief = BeliefState(parsed)
        acts = None
        if "acts" in rt:
            if not isinstance(rt["acts"], list):
                raise SchemaError(f"{where}.turns[{i}].acts: expected list")
            acts = tuple(
                DialogueAct(
                    act=_require(a, "act", str, f"{where}.turns[{i}].acts"),
                    domain=_require(a, "domain", str, f"{where}.turns[{i}].acts"),
                    slot=a.get("slot"),
                    value=a.get("value"),
                )
                for a in rt["acts"]
            )
        turns.append(
            Turn(
                index=_require(rt, "index", int, f"{where}.turns[{i}]"),
                speaker=Speaker.from_string(_require(rt, "speaker", str, f"{where}.turns[{i}]")),
                text=_require(rt, "text", str, f"{where}.turns[{i}]"),
                belief=belief,
                acts=acts,
                intent=rt.get("intent"),
                db_result=rt.get("db_result"),
            )
        )

    goal = None
    if "goal" in raw:
        if not isinstance(raw["goal"], dict):
            raise SchemaError(f"{where}.goal: expected object keyed by domain")
        goal_domains = {}
        for domain, gd in raw["goal"].items():
            if not isinstance(gd, dict):
                raise SchemaError(f"{where}.goal[{domain}]: expected object")
            goal_domains[domain] = GoalDomain(
                constraints={str(k): str(v) for k, v in gd.get("constraints", {}).items()},
                requestables=frozenset(str(r) for r in gd.get("requestables", [])),
                entity_required=bool(gd.get("entity_required", False)),
            )
        goal = Goal(goal_domains)

    mcqa = None
    if "mcqa" in raw:
        if not isinstance(raw["mcqa"], list):
            raise SchemaError(f"{where}.mcqa: expected list")
        mcqa = tuple(
            McqaItem(
                question=_require(m, "question", str, f"{where}.mcqa"),
                options=tuple(str(o) for o in _require(m, "options", list, f"{where}.mcqa")),
                answer_index=_require(m, "answer_index", int, f"{where}.mcqa"),
            )
            for m in raw["mcqa"]
        )

    nup = None
    if "nup_candidates" in raw:
        if not isinstance(raw["nup_candidates"], list):
            raise SchemaError(f"{where}.nup_candidates: expected list")
        nup = tuple(
            NupCandidate(
                text=_require(c, "text", str, f"{where}.nup_candidates"),
                is_next=bool(_require(c, "is_next", bool, f"{where}.nup_candidates")),
            )
            for c in raw["nup_candidates"]
        )

    return Dialogue(
        id=_require(raw, "id", str, where),
        dataset=_require(raw, "dataset", str, where),
        domains=frozenset(str(d) for d in _require(raw, "domains", list, where)),
        turns=tuple(turns),
        goal=goal,
        summary=raw.get("summary"),
        mcqa=mcqa,
        nup_candidates=nup,
    )


def dumps_dialogue(dialogue: Dialogue) -> str:
    """One canonical JSON line (no trailing newline)."""
    return json.dumps(dialogue_to_dict(dialogue), ensure_ascii=False)


def loads_dialogue(line: str) -> Dialogue:
    """Parse one canonical JSON line; raise ``SchemaError`` if malformed."""
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from None
    return dialogue_from_dict(raw)
