"""Evaluation metrics: corpus BLEU, inform/success, combined score,
joint goal accuracy, intent accuracy, and ROUGE-1/2/L.

All scores are reported on the 0-100 scale.  Tokenization is the shared
``dialokit.text.tokenize`` (lowercase, punctuation separated); exact
match comparisons normalize through ``normalize_value``.  Every
function here is pure and deterministic.

Inform and success use a simplified judgment: a goal domain that needs
an entity is satisfied when some predicted response carries the
``[<domain>_name]`` placeholder or the literal name of a database
entity matching the goal constraints, and a requestable slot ``r`` of
domain ``d`` is satisfied by ``[<d>_<r>]`` or ``[value_<r>]``.  This is
deliberately not the full benchmark evaluator state machine.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .prompts import parse_belief_state
from .schema import BeliefState, Dialogue, Speaker, TaskKind
from .text import normalize_token, normalize_value, tokenize

Tokens = Sequence[str]


class MetricError(ValueError):
    """Inputs on which a metric is undefined."""


# ---------------------------------------------------------------------------
# Prediction sets


@dataclass(frozen=True)
class PredictionSet:
    """Model outputs for one task, keyed by (dialogue id, turn index)."""

    task: TaskKind
    by_dialogue: dict[str, dict[int, str]] = field(default_factory=dict)

    @classmethod
    def from_records(
        cls, task: TaskKind, records: Iterable[tuple[str, int, str]]
    ) -> "PredictionSet":
        by_dialogue: dict[str, dict[int, str]] = {}
        for dialogue_id, turn_index, text in records:
            turns = by_dialogue.setdefault(dialogue_id, {})
            if turn_index in turns:
                raise MetricError(
                    f"duplicate prediction for ({dialogue_id!r}, turn {turn_index})"
                )
            turns[turn_index] = text
        return cls(task=task, by_dialogue=by_dialogue)

    def get(self, dialogue_id: str, turn_index: int) -> str | None:
        return self.by_dialogue.get(dialogue_id, {}).get(turn_index)

    def texts_for(self, dialogue_id: str) -> list[str]:
        turns = self.by_dialogue.get(dialogue_id, {})
        return [turns[i] for i in sorted(turns)]

    def __len__(self) -> int:
        return sum(len(t) for t in self.by_dialogue.values())


def read_prediction_file(path: str | Path) -> list[tuple[str, int, str, str]]:
    """Read line-delimited (dialogue_id, turn_index, task, text) records."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                records.append(
                    (raw["dialogue_id"], int(raw["turn_index"]), raw["task"], raw["text"])
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise MetricError(f"{path}:{lineno}: bad prediction record ({exc})") from None
    return records


def predictions_for_task(
    records: Iterable[tuple[str, int, str, str]], task: TaskKind
) -> PredictionSet:
    return PredictionSet.from_records(
        task, [(d, t, text) for d, t, name, text in records if TaskKind.from_string(name) is task]
    )


# ---------------------------------------------------------------------------
# Entity database


@dataclass(frozen=True)
class EntityDb:
    """Flat per-domain entity lists used by the inform judgment."""

    domains: dict[str, list[dict[str, str]]] = field(default_factory=dict)

    @classmethod
    def from_entities(cls, entities: Iterable[tuple[str, Mapping[str, str]]]) -> "EntityDb":
        domains: dict[str, list[dict[str, str]]] = {}
        seen: dict[str, set[str]] = {}
        for domain, entity in entities:
            if "name" not in entity:
                raise MetricError(f"entity in domain {domain!r} has no 'name' slot")
            name = normalize_value(entity["name"])
            if name in seen.setdefault(domain, set()):
                raise MetricError(f"duplicate entity name {name!r} in domain {domain!r}")
            seen[domain].add(name)
            domains.setdefault(domain, []).append({k: str(v) for k, v in entity.items()})
        return cls(domains=domains)

    def matching_names(self, domain: str, constraints: Mapping[str, str]) -> list[str]:
        """Names of entities consistent with the constraints.

        An entity matches when every constraint slot it defines agrees
        by normalized string equality; constraint slots the entity does
        not define are ignored.
        """
        names = []
        for entity in self.domains.get(domain, []):
            ok = True
            for slot, wanted in constraints.items():
                if slot in entity and normalize_value(entity[slot]) != normalize_value(wanted):
                    ok = False
                    break
            if ok:
                names.append(normalize_value(entity["name"]))
        return names


def load_entity_db(path: str | Path) -> EntityDb:
    """Read one entity per line: ``{"domain": ..., "name": ..., <slot>: ...}``."""
    entities = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                domain = raw.pop("domain")
            except (json.JSONDecodeError, KeyError) as exc:
                raise MetricError(f"{path}:{lineno}: bad entity record ({exc})") from None
            entities.append((domain, raw))
    return EntityDb.from_entities(entities)


# ---------------------------------------------------------------------------
# Reports


@dataclass
class MetricReport:
    """Named metric values with their supporting counts.

    ``values`` are on the 0-100 scale.  Rate metrics also record their
    raw numerator/denominator in ``counts``; auxiliary integer tallies
    (missing predictions, excluded dialogues) go in ``tallies``.
    """

    values: dict[str, float] = field(default_factory=dict)
    counts: dict[str, tuple[float, float]] = field(default_factory=dict)
    tallies: dict[str, int] = field(default_factory=dict)

    def add_rate(self, name: str, numerator: float, denominator: float) -> None:
        value = 100.0 * numerator / denominator if denominator else 0.0
        self.values[name] = value
        self.counts[name] = (numerator, denominator)

    def add_value(self, name: str, value: float) -> None:
        self.values[name] = value

    def check(self) -> None:
        for name, value in self.values.items():
            if name in self.counts:
                num, den = self.counts[name]
                if not (0.0 <= value <= 100.0):
                    raise MetricError(f"{name}: rate {value} outside [0, 100]")
                expected = 100.0 * num / den if den else 0.0
                if abs(expected - value) > 1e-9:
                    raise MetricError(f"{name}: value {value} inconsistent with {num}/{den}")

    def to_dict(self) -> dict:
        return {
            "values": dict(self.values),
            "counts": {k: list(v) for k, v in self.counts.items()},
            "tallies": dict(self.tallies),
        }

    def render_table(self) -> str:
        width = max([len(n) for n in self.values] + [6])
        lines = [f"{'metric'.ljust(width)}  {'value':>10}  {'num':>10}  {'den':>10}"]
        for name, value in self.values.items():
            num, den = self.counts.get(name, (float("nan"), float("nan")))
            num_s = f"{num:.6g}" if num == num else "-"
            den_s = f"{den:.6g}" if den == den else "-"
            lines.append(f"{name.ljust(width)}  {value:>10.3f}  {num_s:>10}  {den_s:>10}")
        for name, tally in self.tallies.items():
            lines.append(f"{name.ljust(width)}  {tally:>10d}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# BLEU


def _ngram_counts(tokens: Tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu_corpus(pairs: Sequence[tuple[Tokens, Tokens]]) -> float:
    """Corpus-level BLEU-4 with brevity penalty, 0-100.

    Clipped n-gram matches and totals are pooled over the whole corpus,
    then combined as the uniform geometric mean of p1..p4 times
    ``exp(min(0, 1 - ref_len/hyp_len))``.  No smoothing: if any pooled
    precision is zero the score is zero.  An empty hypothesis simply
    contributes zero matches and zero length.
    """
    if not pairs:
        raise MetricError("corpus BLEU is undefined for an empty pair list")
    clipped = [0] * 4
    totals = [0] * 4
    hyp_len = 0
    ref_len = 0
    for hyp, ref in pairs:
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, 5):
            hyp_counts = _ngram_counts(hyp, n)
            if not hyp_counts:
                continue
            ref_counts = _ngram_counts(ref, n)
            totals[n - 1] += sum(hyp_counts.values())
            clipped[n - 1] += sum(
                min(count, ref_counts[gram]) for gram, count in hyp_counts.items()
            )
    if hyp_len == 0:
        return 0.0
    if any(c == 0 for c in clipped) or any(t == 0 for t in totals):
        return 0.0
    log_mean = sum(0.25 * math.log(clipped[i] / totals[i]) for i in range(4))
    brevity = math.exp(min(0.0, 1.0 - ref_len / hyp_len))
    return 100.0 * brevity * math.exp(log_mean)


def clipped_precisions(pairs: Sequence[tuple[Tokens, Tokens]]) -> list[tuple[int, int]]:
    """Pooled (clipped matches, total n-grams) for n = 1..4.

    Exposed so the aggregation inside ``bleu_corpus`` can be checked
    against independent counters.
    """
    clipped = [0] * 4
    totals = [0] * 4
    for hyp, ref in pairs:
        for n in range(1, 5):
            hyp_counts = _ngram_counts(hyp, n)
            ref_counts = _ngram_counts(ref, n)
            totals[n - 1] += sum(hyp_counts.values())
            clipped[n - 1] += sum(
                min(count, ref_counts[gram]) for gram, count in hyp_counts.items()
            )
    return list(zip(clipped, totals))


# ---------------------------------------------------------------------------
# ROUGE


def _lcs_length(a: Tokens, b: Tokens) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0]
        for j, y in enumerate(b, start=1):
            curr.append(prev[j - 1] + 1 if x == y else max(prev[j], curr[j - 1]))
        prev = curr
    return prev[-1]


def _f1(overlap: float, hyp_total: float, ref_total: float) -> float:
    if hyp_total == 0 or ref_total == 0:
        return 0.0
    precision = overlap / hyp_total
    recall = overlap / ref_total
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def rouge_scores(hyp: Tokens, ref: Tokens) -> tuple[float, float, float]:
    """(ROUGE-1, ROUGE-2, ROUGE-L) F1 scores for one pair, each 0-100.

    R1/R2 use clipped n-gram overlap; RL uses longest common
    subsequence length over the token sequences.  An empty hypothesis
    scores (0, 0, 0); an empty reference is an error.
    """
    if not ref:
        raise MetricError("ROUGE is undefined for an empty reference")
    if not hyp:
        return (0.0, 0.0, 0.0)
    scores = []
    for n in (1, 2):
        hyp_counts = _ngram_counts(hyp, n)
        ref_counts = _ngram_counts(ref, n)
        overlap = sum(min(c, ref_counts[g]) for g, c in hyp_counts.items())
        scores.append(100.0 * _f1(overlap, sum(hyp_counts.values()), sum(ref_counts.values())))
    lcs = _lcs_length(hyp, ref)
    scores.append(100.0 * _f1(lcs, len(hyp), len(ref)))
    return (scores[0], scores[1], scores[2])


def rouge_corpus(pairs: Sequence[tuple[Tokens, Tokens]]) -> tuple[float, float, float]:
    """Unweighted mean of per-pair ROUGE scores."""
    if not pairs:
        raise MetricError("corpus ROUGE is undefined for an empty pair list")
    sums = [0.0, 0.0, 0.0]
    for hyp, ref in pairs:
        r1, r2, rl = rouge_scores(hyp, ref)
        sums[0] += r1
        sums[1] += r2
        sums[2] += rl
    n = len(pairs)
    return (sums[0] / n, sums[1] / n, sums[2] / n)


# ---------------------------------------------------------------------------
# Inform / success / combined


def _normalize_response(text: str) -> str:
    return " ".join(text.lower().split())


def judge_dialogue(
    dialogue: Dialogue, responses: Sequence[str], db: EntityDb | None = None
) -> tuple[bool, bool]:
    """(inform, success) judgment for one dialogue with a goal.

    Inform holds when every goal domain that requires an entity is
    mentioned via its name placeholder or a literal matching entity
    name.  Success additionally requires every requestable slot of
    every goal domain to appear as a placeholder.
    """
    if dialogue.goal is None:
        raise MetricError(f"dialogue {dialogue.id!r} has no goal to judge against")
    joined = " ".join(_normalize_response(r) for r in responses)

    inform = True
    for domain, gd in dialogue.goal.items():
        if not gd.entity_required:
            continue
        placeholder = f"[{normalize_token(domain)}_name]"
        if placeholder in joined:
            continue
        names = db.matching_names(domain, gd.constraints) if db is not None else []
        if not any(name and name in joined for name in names):
            inform = False
            break

    success = inform
    if success:
        for domain, gd in dialogue.goal.items():
            for slot in gd.requestables:
                token = normalize_token(slot)
                domain_ph = f"[{normalize_token(domain)}_{token}]"
                value_ph = f"[value_{token}]"
                if domain_ph not in joined and value_ph not in joined:
                    success = False
                    break
            if not success:
                break
    return inform, success


@dataclass(frozen=True)
class InformSuccessResult:
    inform_rate: float
    success_rate: float
    informed: int
    succeeded: int
    judged: int
    excluded: int


def inform_success_detailed(
    dialogues: Sequence[Dialogue],
    preds: PredictionSet,
    db: EntityDb | None = None,
) -> InformSuccessResult:
    informed = succeeded = judged = excluded = 0
    for dialogue in dialogues:
        if dialogue.goal is None:
            excluded += 1
            continue
        inform, success = judge_dialogue(dialogue, preds.texts_for(dialogue.id), db)
        judged += 1
        informed += int(inform)
        succeeded += int(success)
    inform_rate = 100.0 * informed / judged if judged else 0.0
    success_rate = 100.0 * succeeded / judged if judged else 0.0
    return InformSuccessResult(inform_rate, success_rate, informed, succeeded, judged, excluded)


def inform_success(
    dialogues: Sequence[Dialogue],
    preds: PredictionSet,
    db: EntityDb | None = None,
) -> tuple[float, float]:
    """Dialogue-level inform and success rates, each 0-100."""
    result = inform_success_detailed(dialogues, preds, db)
    return result.inform_rate, result.success_rate


def combined_score(bleu: float, inform: float, success: float) -> float:
    """BLEU plus half the sum of inform and success rates."""
    for name, value in (("bleu", bleu), ("inform", inform), ("success", success)):
        if not (0.0 <= value <= 100.0):
            raise MetricError(f"{name}={value} outside [0, 100]")
    return bleu + 0.5 * (inform + success)


# ---------------------------------------------------------------------------
# Joint goal accuracy


def gold_states_from_dialogues(
    dialogues: Iterable[Dialogue],
) -> dict[tuple[str, int], BeliefState]:
    """Gold states at every annotated user turn, matching how the
    corpus compiler selects state-tracking examples."""
    gold = {}
    for dialogue in dialogues:
        for turn in dialogue.turns:
            if turn.speaker is Speaker.SPEAKER1 and turn.belief is not None:
                gold[(dialogue.id, turn.index)] = turn.belief
    return gold


@dataclass(frozen=True)
class JgaResult:
    rate: float
    matched: int
    total: int
    missing: int


def joint_goal_accuracy_detailed(
    gold: Mapping[tuple[str, int], BeliefState], preds: PredictionSet
) -> JgaResult:
    if not gold:
        raise MetricError("joint goal accuracy is undefined with no annotated turns")
    matched = missing = 0
    for (dialogue_id, turn_index), state in gold.items():
        text = preds.get(dialogue_id, turn_index)
        if text is None:
            missing += 1
            continue
        if parse_belief_state(text) == state:
            matched += 1
    return JgaResult(100.0 * matched / len(gold), matched, len(gold), missing)


def joint_goal_accuracy(
    gold: Mapping[tuple[str, int], BeliefState], preds: PredictionSet
) -> float:
    """Fraction of annotated turns whose predicted state equals gold, 0-100.

    Predicted text is parsed with the lenient belief parser; equality is
    set equality of normalized triples.  Turns with no prediction score
    zero and are tallied separately in the detailed variant.
    """
    return joint_goal_accuracy_detailed(gold, preds).rate


# ---------------------------------------------------------------------------
# Intent accuracy


def intent_accuracy(gold_labels: Sequence[str], pred_labels: Sequence[str]) -> float:
    """Exact-match accuracy after value normalization, 0-100."""
    if len(gold_labels) != len(pred_labels):
        raise MetricError(
            f"gold/pred length mismatch: {len(gold_labels)} vs {len(pred_labels)}"
        )
    if not gold_labels:
        raise MetricError("intent accuracy is undefined with no labels")
    correct = sum(
        normalize_value(g) == normalize_value(p) for g, p in zip(gold_labels, pred_labels)
    )
    return 100.0 * correct / len(gold_labels)


# ---------------------------------------------------------------------------
# Report assembly (one per evaluation task)


def evaluate_dst(dialogues: Sequence[Dialogue], preds: PredictionSet) -> MetricReport:
    gold = gold_states_from_dialogues(dialogues)
    result = joint_goal_accuracy_detailed(gold, preds)
    report = MetricReport()
    report.add_rate("jga", result.matched, result.total)
    report.tallies["missing_predictions"] = result.missing
    return report


def _nlg_pairs(
    dialogues: Sequence[Dialogue], preds: PredictionSet
) -> tuple[list[tuple[list[str], list[str]]], int]:
    pairs = []
    missing = 0
    for dialogue in dialogues:
        for turn in dialogue.turns:
            if turn.speaker is not Speaker.SPEAKER2:
                continue
            text = preds.get(dialogue.id, turn.index)
            if text is None:
                missing += 1
                text = ""
            pairs.append((tokenize(text), tokenize(turn.text)))
    return pairs, missing


def evaluate_nlg(dialogues: Sequence[Dialogue], preds: PredictionSet) -> MetricReport:
    pairs, missing = _nlg_pairs(dialogues, preds)
    report = MetricReport()
    report.add_value("bleu", bleu_corpus(pairs) if pairs else 0.0)
    report.tallies["missing_predictions"] = missing
    return report


def evaluate_e2e(
    dialogues: Sequence[Dialogue], preds: PredictionSet, db: EntityDb | None = None
) -> MetricReport:
    pairs, missing = _nlg_pairs(dialogues, preds)
    bleu = bleu_corpus(pairs) if pairs else 0.0
    result = inform_success_detailed(dialogues, preds, db)
    report = MetricReport()
    report.add_value("bleu", bleu)
    report.add_rate("inform", result.informed, result.judged)
    report.add_rate("success", result.succeeded, result.judged)
    report.add_value(
        "combined_score", combined_score(bleu, result.inform_rate, result.success_rate)
    )
    report.tallies["missing_predictions"] = missing
    report.tallies["excluded_no_goal"] = result.excluded
    return report


def evaluate_ic(dialogues: Sequence[Dialogue], preds: PredictionSet) -> MetricReport:
    gold_labels = []
    pred_labels = []
    missing = 0
    for dialogue in dialogues:
        for turn in dialogue.turns:
            if turn.intent is None:
                continue
            text = preds.get(dialogue.id, turn.index)
            if text is None:
                missing += 1
                text = ""
            gold_labels.append(turn.intent)
            pred_labels.append(text)
    report = MetricReport()
    if gold_labels:
        correct = sum(
            normalize_value(g) == normalize_value(p)
            for g, p in zip(gold_labels, pred_labels)
        )
        report.add_rate("intent_accuracy", correct, len(gold_labels))
    else:
        report.add_rate("intent_accuracy", 0, 0)
    report.tallies["missing_predictions"] = missing
    return report


def evaluate_summ(dialogues: Sequence[Dialogue], preds: PredictionSet) -> MetricReport:
    pairs = []
    missing = 0
    for dialogue in dialogues:
        if dialogue.summary is None:
            continue
        text = preds.get(dialogue.id, 0)
        if text is None:
            missing += 1
            text = ""
        pairs.append((tokenize(text), tokenize(dialogue.summary)))
    report = MetricReport()
    if pairs:
        r1, r2, rl = rouge_corpus(pairs)
    else:
        r1 = r2 = rl = 0.0
    report.add_value("rouge1", r1)
    report.add_value("rouge2", r2)
    report.add_value("rougeL", rl)
    report.tallies["missing_predictions"] = missing
    return report
