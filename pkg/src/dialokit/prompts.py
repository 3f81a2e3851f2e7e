"""Compilation of canonical dialogues into prompted seq2seq records.

Each training task turns a dialogue into zero or more (source, target)
text pairs by wrapping raw text in a task-specific template.  The
default templates use plain task-name prefixes and can be replaced
wholesale from a flat key-value file (``dst.source = ...``).

The flat rendering of belief states defined here (and its lenient
inverse) is also what the metrics module uses to compare predicted
states, so the two directions live side by side.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .schema import (
    BeliefState,
    Dialogue,
    DialogueAct,
    Speaker,
    TaskKind,
    TASK_ORDER,
    Turn,
)

_PLACEHOLDER_RE = re.compile(r"\{(\w+)\}")

#: Placeholders each task may use, per side.
ALLOWED_PLACEHOLDERS: dict[TaskKind, tuple[frozenset[str], frozenset[str]]] = {
    TaskKind.NLG: (frozenset({"context"}), frozenset({"response"})),
    TaskKind.DST: (frozenset({"context", "ontology"}), frozenset({"state"})),
    TaskKind.POL: (frozenset({"context"}), frozenset({"acts"})),
    TaskKind.IC: (frozenset({"context", "utterance"}), frozenset({"intent"})),
    TaskKind.MCQA: (frozenset({"context", "question", "options"}), frozenset({"answer"})),
    TaskKind.NUP: (frozenset({"context", "candidate"}), frozenset({"yes_no"})),
    TaskKind.SUMM: (frozenset({"context"}), frozenset({"summary"})),
}

_OPTION_LETTERS = "abcdefghijklmnopqrstuvwxyz"


class PromptError(ValueError):
    """A template or its inputs are unusable."""


@dataclass(frozen=True)
class PromptTemplate:
    """Source/target patterns for one task.

    Placeholders are written ``{name}``; each side may only use the
    names registered for the task in ``ALLOWED_PLACEHOLDERS``.
    """

    task: TaskKind
    source_pattern: str
    target_pattern: str

    def __post_init__(self):
        allowed_src, allowed_tgt = ALLOWED_PLACEHOLDERS[self.task]
        for side, pattern, allowed in (
            ("source", self.source_pattern, allowed_src),
            ("target", self.target_pattern, allowed_tgt),
        ):
            if not pattern.strip():
                raise PromptError(f"{self.task.value}.{side}: pattern must be non-empty")
            for name in _PLACEHOLDER_RE.findall(pattern):
                if name not in allowed:
                    raise PromptError(
                        f"{self.task.value}.{side}: placeholder {{{name}}} not defined for this task "
                        f"(allowed: {', '.join(sorted(allowed)) or 'none'})"
                    )


@dataclass(frozen=True)
class PromptedExample:
    """One compiled seq2seq record."""

    task: TaskKind
    dataset: str
    id: str
    source_text: str
    target_text: str


@dataclass(frozen=True)
class CompileStats:
    """Bookkeeping from one compilation run."""

    dialogues: int
    per_task: dict[TaskKind, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.per_task.values())


def default_templates() -> dict[TaskKind, PromptTemplate]:
    """Built-in template set, one per task."""
    patterns = {
        TaskKind.NLG: ("translate dialogue to system response: {context}", "{response}"),
        TaskKind.DST: ("translate dialogue to belief state: {context}", "{state}"),
        TaskKind.POL: ("translate dialogue to dialogue action: {context}", "{acts}"),
        TaskKind.IC: ("translate dialogue to user intent: {utterance}", "{intent}"),
        TaskKind.MCQA: (
            "answer the question from the dialogue: {context} question: {question} options: {options}",
            "{answer}",
        ),
        TaskKind.NUP: (
            "judge the candidate next utterance: {context} candidate: {candidate}",
            "{yes_no}",
        ),
        TaskKind.SUMM: ("summarize the dialogue: {context}", "{summary}"),
    }
    return {task: PromptTemplate(task, src, tgt) for task, (src, tgt) in patterns.items()}


def parse_template_file(text: str) -> dict[TaskKind, PromptTemplate]:
    """Parse ``<task>.source`` / ``<task>.target`` key-value lines.

    Lines starting with ``#`` and blank lines are skipped.  Tasks not
    mentioned fall back to the default template; a task with only one
    side overridden keeps the default for the other.
    """
    overrides: dict[TaskKind, dict[str, str]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise PromptError(f"template file line {lineno}: expected 'task.side = pattern'")
        key, _, pattern = stripped.partition("=")
        key = key.strip()
        if "." not in key:
            raise PromptError(f"template file line {lineno}: key {key!r} must be '<task>.<side>'")
        task_name, _, side = key.partition(".")
        if side not in ("source", "target"):
            raise PromptError(f"template file line {lineno}: side must be 'source' or 'target'")
        task = TaskKind.from_string(task_name)
        overrides.setdefault(task, {})[side] = pattern.strip()

    templates = default_templates()
    for task, sides in overrides.items():
        base = templates[task]
        templates[task] = PromptTemplate(
            task,
            sides.get("source", base.source_pattern),
            sides.get("target", base.target_pattern),
        )
    return templates


def load_templates(path: str | Path) -> dict[TaskKind, PromptTemplate]:
    return parse_template_file(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Flat renderings


def linearize_belief_state(state: BeliefState) -> str:
    """Render a state as ``[domain] slot value , slot value ...``.

    Domains and slots are sorted lexicographically so the rendering is
    a canonical form; the empty state renders as ``none``.
    """
    if not state:
        return "none"
    by_domain: dict[str, list[tuple[str, str]]] = {}
    for d, s, v in state.sorted_triples():
        by_domain.setdefault(d, []).append((s, v))
    groups = []
    for domain in sorted(by_domain):
        pairs = " , ".join(f"{s} {v}" for s, v in sorted(by_domain[domain]))
        groups.append(f"[{domain}] {pairs}")
    return " ".join(groups)


def parse_belief_state_with_stats(text: str) -> tuple[BeliefState, int]:
    """Lenient inverse of ``linearize_belief_state``.

    Extracts every well-formed ``[domain] slot value`` group from
    free-form model output.  Within a group, segments are separated by
    commas; the first token of a segment is the slot and everything up
    to the next comma or bracket is the value.  Malformed segments are
    dropped; the second return value counts them.
    """
    stripped = text.strip()
    if not stripped or stripped == "none":
        return BeliefState(), 0

    dropped = 0
    triples: list[tuple[str, str, str]] = []
    first_bracket = stripped.find("[")
    if first_bracket == -1:
        return BeliefState(), 1
    if stripped[:first_bracket].strip():
        dropped += 1

    for match in re.finditer(r"\[\s*([^\[\]]*?)\s*\]([^\[]*)", stripped):
        domain, body = match.group(1), match.group(2)
        if not domain:
            dropped += 1
            continue
        segments = body.split(",")
        group_tokens = 0
        for segment in segments:
            tokens = segment.split()
            group_tokens += len(tokens)
            if len(tokens) >= 2:
                triples.append((domain, tokens[0], " ".join(tokens[1:])))
            elif tokens:
                # a slot with no value
                dropped += 1
        if group_tokens == 0:
            # a bare domain with nothing in it
            dropped += 1
    return BeliefState(triples), dropped


def parse_belief_state(text: str) -> BeliefState:
    """``parse_belief_state_with_stats`` without the drop count."""
    return parse_belief_state_with_stats(text)[0]


def linearize_acts(acts: Iterable[DialogueAct]) -> str:
    """Render system acts as ``[domain] act slot , act slot ...``.

    Same grouping and ordering discipline as the belief rendering;
    an empty act list renders as ``none``.
    """
    by_domain: dict[str, list[str]] = {}
    for act in acts:
        rendered = act.act if not act.slot else f"{act.act} {act.slot}"
        by_domain.setdefault(act.domain, []).append(rendered)
    if not by_domain:
        return "none"
    groups = []
    for domain in sorted(by_domain):
        groups.append(f"[{domain}] " + " , ".join(sorted(by_domain[domain])))
    return " ".join(groups)


def render_context(turns: Sequence[Turn], db_result: int | None = None) -> str:
    """Join turns as ``user: ... system: ...``, optionally with a db count."""
    parts = [f"{t.speaker.prefix}: {t.text}" for t in turns]
    if db_result is not None:
        parts.append(f"db: {db_result}")
    return " ".join(parts)


def render_options(options: Sequence[str]) -> str:
    """``a) first b) second ...``"""
    return " ".join(f"{_OPTION_LETTERS[i]}) {opt}" for i, opt in enumerate(options))


# ---------------------------------------------------------------------------
# Example ids

_ID_SEP = "::"


def make_example_id(dialogue_id: str, turn_key: object, task: TaskKind) -> str:
    return f"{dialogue_id}{_ID_SEP}{turn_key}{_ID_SEP}{task.value}"


def split_example_id(example_id: str) -> tuple[str, str, str]:
    """Break an example id into (dialogue id, turn key, task name)."""
    parts = example_id.rsplit(_ID_SEP, 2)
    if len(parts) != 3:
        raise PromptError(f"example id {example_id!r} is not 'dialogue::turn::task'")
    return parts[0], parts[1], parts[2]


# ---------------------------------------------------------------------------
# Compilation


def apply_prompt(
    task: TaskKind,
    values: Mapping[str, str],
    template: PromptTemplate,
    *,
    dataset: str = "",
    example_id: str = "",
) -> PromptedExample:
    """Substitute placeholder values into a template.

    Pure string substitution in a single pass (substituted text is never
    rescanned); no truncation happens at this layer.  A placeholder in
    the pattern with no supplied value raises ``PromptError`` naming it.
    """
    if template.task is not task:
        raise PromptError(f"template is for {template.task.value}, asked to compile {task.value}")

    def substitute(pattern: str) -> str:
        def repl(match: re.Match) -> str:
            name = match.group(1)
            if name not in values:
                raise PromptError(f"no value supplied for placeholder {{{name}}}")
            return values[name]

        return _PLACEHOLDER_RE.sub(repl, pattern)

    return PromptedExample(
        task=task,
        dataset=dataset,
        id=example_id,
        source_text=substitute(template.source_pattern),
        target_text=substitute(template.target_pattern),
    )


def _nup_rng(seed: int, dialogue_id: str, turn_key: object) -> np.random.Generator:
    # Seed derived from (seed, dialogue, turn) so output does not depend
    # on how the corpus is sharded or which other tasks are compiled.
    digest = hashlib.sha256(f"{seed}:{dialogue_id}:{turn_key}".encode("utf-8")).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def _dialogue_ontology(dialogue: Dialogue) -> str:
    pairs: dict[str, set[str]] = {}
    for turn in dialogue.turns:
        if turn.belief is None:
            continue
        for d, s, _ in turn.belief.sorted_triples():
            pairs.setdefault(d, set()).add(s)
    if not pairs:
        return "none"
    groups = [f"[{d}] " + " , ".join(sorted(slots)) for d, slots in sorted(pairs.items())]
    return " ".join(groups)


NupPool = Sequence[tuple[tuple[str, int], str]]


def build_nup_pool(dialogues: Iterable[Dialogue]) -> list[tuple[tuple[str, int], str]]:
    """All system turns in a corpus, keyed by (dialogue id, turn index)."""
    return [
        ((d.id, t.index), t.text)
        for d in dialogues
        for t in d.turns
        if t.speaker is Speaker.SPEAKER2
    ]


def derive_task_examples(
    dialogue: Dialogue,
    task: TaskKind,
    template: PromptTemplate,
    *,
    neg_k: int = 1,
    seed: int = 0,
    nup_pool: NupPool | None = None,
) -> list[PromptedExample]:
    """All examples one dialogue contributes to one task.

    Returns an empty list when the dialogue lacks the annotations the
    task needs.  For next-utterance prediction, negatives are drawn
    without replacement from ``nup_pool`` (system turns of the corpus
    being compiled; defaults to this dialogue's own system turns),
    excluding the positive turn itself and any pool entry with the same
    text.  When a dialogue carries explicit ``nup_candidates`` those are
    used verbatim instead of sampling.
    """
    examples: list[PromptedExample] = []

    def emit(turn_key: object, values: Mapping[str, str]) -> None:
        example = apply_prompt(
            task,
            values,
            template,
            dataset=dialogue.dataset,
            example_id=make_example_id(dialogue.id, turn_key, task),
        )
        if example.source_text.strip() and example.target_text.strip():
            examples.append(example)

    if task is TaskKind.NLG:
        for turn in dialogue.turns:
            if turn.speaker is not Speaker.SPEAKER2:
                continue
            context = render_context(dialogue.turns[: turn.index], db_result=turn.db_result)
            emit(turn.index, {"context": context, "response": turn.text})

    elif task is TaskKind.DST:
        ontology = _dialogue_ontology(dialogue)
        for turn in dialogue.turns:
            if turn.speaker is not Speaker.SPEAKER1 or turn.belief is None:
                continue
            context = render_context(dialogue.turns[: turn.index + 1])
            emit(
                turn.index,
                {
                    "context": context,
                    "ontology": ontology,
                    "state": linearize_belief_state(turn.belief),
                },
            )

    elif task is TaskKind.POL:
        for turn in dialogue.turns:
            if turn.speaker is not Speaker.SPEAKER2 or turn.acts is None:
                continue
            context = render_context(dialogue.turns[: turn.index])
            emit(turn.index, {"context": context, "acts": linearize_acts(turn.acts)})

    elif task is TaskKind.IC:
        for turn in dialogue.turns:
            if turn.intent is None:
                continue
            context = render_context(dialogue.turns[: turn.index + 1])
            emit(turn.index, {"context": context, "utterance": turn.text, "intent": turn.intent})

    elif task is TaskKind.MCQA:
        context = render_context(dialogue.turns)
        for j, item in enumerate(dialogue.mcqa or ()):
            if not (0 <= item.answer_index < len(item.options)):
                continue
            letter = _OPTION_LETTERS[item.answer_index]
            emit(
                f"q{j}",
                {
                    "context": context,
                    "question": item.question,
                    "options": render_options(item.options),
                    "answer": f"{letter}) {item.options[item.answer_index]}",
                },
            )

    elif task is TaskKind.NUP:
        if dialogue.nup_candidates is not None:
            context = render_context(dialogue.turns)
            for j, cand in enumerate(dialogue.nup_candidates):
                emit(
                    f"c{j}",
                    {
                        "context": context,
                        "candidate": cand.text,
                        "yes_no": "yes" if cand.is_next else "no",
                    },
                )
        else:
            pool = nup_pool if nup_pool is not None else build_nup_pool([dialogue])
            for turn in dialogue.turns:
                if turn.speaker is not Speaker.SPEAKER2:
                    continue
                context = render_context(dialogue.turns[: turn.index])
                emit(turn.index, {"context": context, "candidate": turn.text, "yes_no": "yes"})
                negatives = [
                    text
                    for key, text in pool
                    if key != (dialogue.id, turn.index) and text != turn.text
                ]
                if not negatives or neg_k <= 0:
                    continue
                rng = _nup_rng(seed, dialogue.id, turn.index)
                take = min(neg_k, len(negatives))
                chosen = rng.choice(len(negatives), size=take, replace=False)
                for j, neg_idx in enumerate(sorted(int(i) for i in chosen)):
                    emit(
                        f"{turn.index}+n{j}",
                        {"context": context, "candidate": negatives[neg_idx], "yes_no": "no"},
                    )

    elif task is TaskKind.SUMM:
        if dialogue.summary is not None and dialogue.summary.strip():
            context = render_context(dialogue.turns)
            emit(0, {"context": context, "summary": dialogue.summary})

    return examples


def compile_corpus(
    dialogues: Sequence[Dialogue],
    tasks: Iterable[TaskKind],
    templates: Mapping[TaskKind, PromptTemplate] | None = None,
    *,
    neg_k: int = 1,
    seed: int = 0,
) -> tuple[list[PromptedExample], CompileStats]:
    """Compile a corpus over the requested tasks, in canonical order.

    Records come out grouped by dialogue, tasks within a dialogue in
    the fixed order NLG, DST, POL, IC, MCQA, NUP, SUMM.  Deterministic:
    the same inputs, templates, ``neg_k`` and ``seed`` always produce
    the same records.
    """
    templates = templates or default_templates()
    requested = set(tasks)
    ordered_tasks = [t for t in TASK_ORDER if t in requested]
    for task in ordered_tasks:
        if task not in templates:
            raise PromptError(f"no template supplied for task {task.value}")

    nup_pool = build_nup_pool(dialogues) if TaskKind.NUP in requested else None

    records: list[PromptedExample] = []
    per_task: dict[TaskKind, int] = {t: 0 for t in ordered_tasks}
    for dialogue in dialogues:
        for task in ordered_tasks:
            derived = derive_task_examples(
                dialogue, task, templates[task], neg_k=neg_k, seed=seed, nup_pool=nup_pool
            )
            per_task[task] += len(derived)
            records.extend(derived)
    return records, CompileStats(dialogues=len(dialogues), per_task=per_task)


# ---------------------------------------------------------------------------
# Compiled-corpus file format


def example_to_dict(example: PromptedExample) -> dict[str, str]:
    return {
        "task": example.task.value,
        "dataset": example.dataset,
        "id": example.id,
        "source_text": example.source_text,
        "target_text": example.target_text,
    }


def example_from_dict(raw: dict) -> PromptedExample:
    try:
        return PromptedExample(
            task=TaskKind.from_string(raw["task"]),
            dataset=raw["dataset"],
            id=raw["id"],
            source_text=raw["source_text"],
            target_text=raw["target_text"],
        )
    except KeyError as exc:
        raise PromptError(f"compiled record missing field {exc.args[0]!r}") from None


def write_compiled(examples: Iterable[PromptedExample], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for example in examples:
            fh.write(json.dumps(example_to_dict(example), ensure_ascii=False))
            fh.write("\n")


def read_compiled(path: str | Path) -> list[PromptedExample]:
    examples = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                examples.append(example_from_dict(json.loads(line)))
    return examples
