"""Acceptance suite: one test per release criterion.

Each test prints a single PASS/FAIL line (run with ``pytest -s`` to see
them on success).  Expected values come from independent oracles
computed inside this module, from hand arithmetic, or from published
reference rows; tolerances are stated inline.
"""

import json
import random
import time
from contextlib import contextmanager

import pytest

from dialokit import (
    AnalysisSample,
    AspectProfile,
    BeliefState,
    Dialogue,
    Goal,
    GoalDomain,
    PredictionSet,
    Speaker,
    TaskKind,
    Turn,
    assign_bucket,
    combined_score,
    compile_corpus,
    default_bucket_specs,
    fine_grained_report,
    inform_success,
    joint_goal_accuracy,
    leave_one_domain_out,
    linearize_belief_state,
    parse_belief_state,
    percent_subsample,
    rouge_scores,
    write_compiled,
)
from dialokit.metrics import clipped_precisions, judge_dialogue
from helpers import (
    oracle_lcs,
    oracle_ngram_stats,
    oracle_rouge,
    random_belief_state,
    toy_corpus,
)


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"FAIL  {name}")
        raise
    print(f"PASS  {name}")


def test_combined_score_identity():
    with criterion("combined score reproduces the published reference rows within 0.005"):
        assert combined_score(18.57, 92.20, 79.30) == pytest.approx(104.32, abs=0.005)
        assert combined_score(18.62, 89.20, 79.40) == pytest.approx(102.92, abs=0.005)


def test_metric_oracle_suite():
    name = ("ROUGE and BLEU n-gram counts match brute-force oracles on 1000 pairs "
            "(len <= 12) within 1e-9, under 10 s")
    with criterion(name):
        rng = random.Random(2024)
        vocab = list("abcdef")
        start = time.monotonic()
        for _ in range(1000):
            hyp = [rng.choice(vocab) for _ in range(rng.randint(0, 12))]
            ref = [rng.choice(vocab) for _ in range(rng.randint(1, 12))]

            mine = rouge_scores(hyp, ref)
            expected = oracle_rouge(hyp, ref)
            for a, b in zip(mine, expected):
                assert abs(a - b) <= 1e-9

            for n in range(1, 5):
                assert clipped_precisions([(hyp, ref)])[n - 1] == oracle_ngram_stats(hyp, ref, n)
        elapsed = time.monotonic() - start
        assert elapsed < 10.0, f"oracle suite took {elapsed:.1f}s"


def test_jga_brute_force():
    with criterion("joint goal accuracy equals the naive set-comparison oracle on "
                   "500 random state pairs"):
        rng = random.Random(99)
        gold = {}
        records = []
        matches = 0
        for i in range(500):
            g = random_belief_state(rng, max_triples=6)
            roll = rng.random()
            if roll < 0.4:
                p = g
            elif roll < 0.6:
                p = BeliefState(list(reversed(g.sorted_triples())))
            else:
                p = random_belief_state(rng, max_triples=6)
            gold[(f"d{i % 37}", 2 * (i // 37))] = g
            records.append((f"d{i % 37}", 2 * (i // 37), linearize_belief_state(p)))
            matches += int(set(g.triples) == set(p.triples))
        preds = PredictionSet.from_records(TaskKind.DST, records)
        assert joint_goal_accuracy(gold, preds) == 100.0 * matches / 500


def _random_goal_fixture(rng: random.Random, i: int) -> tuple[Dialogue, list[str]]:
    domains = rng.sample(["restaurant", "hotel", "taxi"], k=rng.randint(1, 2))
    goal_domains = {}
    for domain in domains:
        goal_domains[domain] = GoalDomain(
            constraints={"food": "thai"} if rng.random() < 0.5 else {},
            requestables=frozenset(
                rng.sample(["phone", "address", "postcode"], k=rng.randint(0, 3))
            ),
            entity_required=rng.random() < 0.8,
        )
    dialogue = Dialogue(
        id=f"fx-{i}",
        dataset="fixtures",
        domains=frozenset(domains),
        turns=(
            Turn(0, Speaker.SPEAKER1, "hello"),
            Turn(1, Speaker.SPEAKER2, "hi"),
        ),
        goal=Goal(goal_domains),
    )
    fragments = [
        "[restaurant_name]", "[hotel_name]", "[taxi_name]",
        "[restaurant_phone]", "[value_address]", "[value_postcode]",
        "[hotel_phone]", "nothing to see",
    ]
    responses = [
        " ".join(rng.sample(fragments, k=rng.randint(0, 4)))
        for _ in range(rng.randint(1, 3))
    ]
    return dialogue, responses


def test_success_never_exceeds_inform():
    with criterion("success implies inform on 200 randomized goal/response fixtures"):
        rng = random.Random(7)
        corpus = []
        records = []
        for i in range(200):
            dialogue, responses = _random_goal_fixture(rng, i)
            corpus.append(dialogue)
            for t, text in enumerate(responses):
                records.append((dialogue.id, t, text))
            inform, success = judge_dialogue(dialogue, responses)
            assert success <= inform, f"fixture {i}: success={success} > inform={inform}"
        preds = PredictionSet.from_records(TaskKind.NLG, records)
        inform_rate, success_rate = inform_success(corpus, preds)
        assert success_rate <= inform_rate


def test_belief_state_round_trip():
    with criterion("flat rendering then parsing is the identity on 1000 random states"):
        rng = random.Random(4242)
        for _ in range(1000):
            state = random_belief_state(rng, max_triples=6, wild=True)
            assert parse_belief_state(linearize_belief_state(state)) == state


def test_bucketing_partition_and_reweighting():
    name = ("every bucket spec partitions 1000 synthetic samples exactly and "
            "count-weighted bucket means equal corpus means within 1e-9")
    with criterion(name):
        rng = random.Random(11)
        samples = []
        for i in range(1000):
            samples.append(
                AnalysisSample(
                    id=f"s{i}",
                    profile=AspectProfile(
                        sp1_len=rng.uniform(0, 40),
                        sp2_len=rng.uniform(0, 40),
                        utr_num=rng.randint(1, 30),
                        refe_len=rng.randint(1, 90),
                    ),
                    values={"acc": float(rng.choice([0, 100])), "score": rng.uniform(0, 100)},
                )
            )
        for spec in default_bucket_specs().values():
            membership = [set() for _ in spec.intervals]
            for s in samples:
                membership[assign_bucket(s.profile.value(spec.aspect), spec)].add(s.id)
            for a in range(len(membership)):
                for b in range(a + 1, len(membership)):
                    assert not membership[a] & membership[b]
            assert set.union(*membership) == {s.id for s in samples}

            report = fine_grained_report(samples, [spec])
            assert sum(r.count for r in report.rows) == 1000
            for key in ("acc", "score"):
                corpus_mean = sum(s.values[key] for s in samples) / len(samples)
                weighted = sum(r.count * r.metrics[key] for r in report.rows if r.count) / 1000
                assert abs(weighted - corpus_mean) <= 1e-9


def test_split_determinism_and_arithmetic():
    with criterion("percent subsample of 1000 ids at 1% returns exactly 10 ids, "
                   "byte-identical across 5 runs"):
        ids = [f"id-{i:04d}" for i in range(1000)]
        outputs = {json.dumps(percent_subsample(ids, 1, seed=77)).encode() for _ in range(5)}
        assert len(outputs) == 1
        assert len(percent_subsample(ids, 1, seed=77)) == 10

    with criterion("leave-one-domain-out excludes every multi-domain dialogue and "
                   "yields exactly 200 validation samples"):
        def mk(i, domains):
            return Dialogue(
                id=f"d{i}", dataset="t", domains=frozenset(domains),
                turns=(Turn(0, Speaker.SPEAKER1, "hi"), Turn(1, Speaker.SPEAKER2, "yes")),
            )

        corpus = []
        n = 0
        for domain in ("train", "taxi", "restaurant", "hotel", "attraction"):
            for _ in range(80):
                corpus.append(mk(n, {domain}))
                n += 1
        injected = []
        for _ in range(40):
            corpus.append(mk(n, {"hotel", "taxi"}))
            injected.append(f"d{n}")
            n += 1
        train, validation, test = leave_one_domain_out(corpus, "taxi", seed=3)
        all_ids = set(train) | set(validation) | set(test)
        assert not all_ids & set(injected)
        assert len(validation) == 200


def test_compile_determinism_and_recount(tmp_path):
    def recount(dialogues, neg_k):
        counts = {t: 0 for t in TaskKind}
        pool = [
            ((d.id, t.index), t.text)
            for d in dialogues for t in d.turns if t.speaker is Speaker.SPEAKER2
        ]
        for d in dialogues:
            for t in d.turns:
                if t.speaker is Speaker.SPEAKER2:
                    counts[TaskKind.NLG] += 1
                    if t.acts is not None:
                        counts[TaskKind.POL] += 1
                if t.speaker is Speaker.SPEAKER1 and t.belief is not None:
                    counts[TaskKind.DST] += 1
                if t.intent is not None:
                    counts[TaskKind.IC] += 1
            counts[TaskKind.MCQA] += len(d.mcqa or ())
            if d.nup_candidates is not None:
                counts[TaskKind.NUP] += len(d.nup_candidates)
            else:
                for t in d.turns:
                    if t.speaker is not Speaker.SPEAKER2:
                        continue
                    available = sum(
                        1 for key, text in pool
                        if key != (d.id, t.index) and text != t.text
                    )
                    counts[TaskKind.NUP] += 1 + min(neg_k, available)
            if d.summary is not None and d.summary.strip():
                counts[TaskKind.SUMM] += 1
        return counts

    with criterion("compiling 50 toy dialogues over all 7 tasks twice with one seed "
                   "is byte-identical and per-task counts match an independent recount"):
        corpus = toy_corpus(50)
        blobs = []
        for run in range(2):
            records, stats = compile_corpus(corpus, list(TaskKind), neg_k=2, seed=123)
            path = tmp_path / f"run{run}.jsonl"
            write_compiled(records, path)
            blobs.append(path.read_bytes())
        assert blobs[0] == blobs[1]

        expected = recount(corpus, neg_k=2)
        for task in TaskKind:
            assert stats.per_task.get(task, 0) == expected[task], task
