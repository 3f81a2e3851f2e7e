"""Shared toy-corpus builders and independent oracles.

The oracles deliberately avoid the code paths used by the library:
n-gram tallies are counted by scanning, LCS is found by enumerating
subsequences, and state comparison happens on raw triple sets.
"""

from __future__ import annotations

import random

from dialokit import (
    BeliefState,
    Dialogue,
    DialogueAct,
    Goal,
    GoalDomain,
    McqaItem,
    Speaker,
    Turn,
)

# ---------------------------------------------------------------------------
# Toy dialogues

FOODS = ["italian", "thai", "chinese", "british", "indian", "french"]
AREAS = ["centre", "north", "south", "east", "west"]


def tod_dialogue(i: int, dataset: str = "toytod", domain: str = "restaurant") -> Dialogue:
    """Three-exchange task-oriented dialogue with DST/POL/goal annotations."""
    food = FOODS[i % len(FOODS)]
    area = AREAS[i % len(AREAS)]
    s1 = BeliefState([(domain, "food", food)])
    s2 = s1.updated([(domain, "area", area)])
    s3 = s2.updated([(domain, "pricerange", "cheap")])
    turns = (
        Turn(0, Speaker.SPEAKER1, f"i want {food} food", belief=s1),
        Turn(1, Speaker.SPEAKER2, f"which area do you prefer for {food} food",
             acts=(DialogueAct("request", domain, "area"),)),
        Turn(2, Speaker.SPEAKER1, f"somewhere in the {area}", belief=s2),
        Turn(3, Speaker.SPEAKER2, f"[{domain}_name] is a {food} place in the {area}",
             acts=(DialogueAct("inform", domain, "name"),), db_result=(i % 4) + 1),
        Turn(4, Speaker.SPEAKER1, "something cheap please and give me the phone number",
             belief=s3),
        Turn(5, Speaker.SPEAKER2, f"sure , the phone number of [{domain}_name] is "
             f"[{domain}_phone]",
             acts=(DialogueAct("inform", domain, "phone"),)),
    )
    goal = Goal({
        domain: GoalDomain(
            constraints={"food": food, "area": area},
            requestables=frozenset({"phone"}),
            entity_required=True,
        )
    })
    return Dialogue(
        id=f"{dataset}-{i}", dataset=dataset, domains=frozenset({domain}),
        turns=turns, goal=goal,
    )


def ic_dialogue(i: int, dataset: str = "toyic") -> Dialogue:
    intents = ["book_restaurant", "play_music", "get_weather", "transfer_money"]
    texts = [
        "book a table for two",
        "play some jazz for me",
        "what is the weather like",
        "send money to my sister",
    ]
    return Dialogue(
        id=f"{dataset}-{i}", dataset=dataset, domains=frozenset({"open"}),
        turns=(Turn(0, Speaker.SPEAKER1, texts[i % 4], intent=intents[i % 4]),),
    )


def summ_dialogue(i: int, dataset: str = "toysumm") -> Dialogue:
    turns = (
        Turn(0, Speaker.SPEAKER1, "did you watch the game last night"),
        Turn(1, Speaker.SPEAKER2, "yes it went to extra time"),
        Turn(2, Speaker.SPEAKER1, "the keeper saved two penalties"),
        Turn(3, Speaker.SPEAKER2, "they deserved the cup this year"),
    )
    return Dialogue(
        id=f"{dataset}-{i}", dataset=dataset, domains=frozenset({"open"}),
        turns=turns, summary=f"two friends discuss match number {i} and the cup final",
    )


def mcqa_dialogue(i: int, dataset: str = "toymcqa") -> Dialogue:
    turns = (
        Turn(0, Speaker.SPEAKER1, "where shall we meet tomorrow"),
        Turn(1, Speaker.SPEAKER2, "the cafe by the station at nine"),
    )
    item = McqaItem(
        question="where will they meet",
        options=("the library", "the cafe by the station", "the park"),
        answer_index=1,
    )
    return Dialogue(
        id=f"{dataset}-{i}", dataset=dataset, domains=frozenset({"open"}),
        turns=turns, mcqa=(item,),
    )


def toy_corpus(n: int = 50) -> list[Dialogue]:
    """Mixed corpus exercising all seven tasks."""
    out: list[Dialogue] = []
    for i in range(n):
        kind = i % 4
        if kind == 0:
            out.append(tod_dialogue(i))
        elif kind == 1:
            out.append(ic_dialogue(i))
        elif kind == 2:
            out.append(summ_dialogue(i))
        else:
            out.append(mcqa_dialogue(i))
    return out


def random_belief_state(rng: random.Random, max_triples: int = 5,
                        wild: bool = False) -> BeliefState:
    """Random valid state; ``wild`` draws values with hostile characters."""
    domains = ["restaurant", "hotel", "taxi", "train", "attraction"]
    slots = ["food", "area", "pricerange", "stars", "destination", "leaveat"]
    words = ["cheap", "north", "thai", "4", "cambridge", "expensive", "b (b)", "o'neil"]
    triples = []
    for _ in range(rng.randint(0, max_triples)):
        value_words = [rng.choice(words) for _ in range(rng.randint(1, 3))]
        value = " ".join(value_words)
        if wild:
            value = rng.choice(["", "[", "]", ",", "  "]).join([value] + value_words[:1])
        triples.append((rng.choice(domains), rng.choice(slots), value))
    state = BeliefState(triples)
    # construction may normalize a hostile value to nothing; keep only valid states
    return BeliefState([(d, s, v) for d, s, v in state.sorted_triples() if v])


# ---------------------------------------------------------------------------
# Independent oracles


def oracle_ngram_stats(hyp: list, ref: list, n: int) -> tuple[int, int]:
    """(clipped matches, total) for order-n n-grams, by direct scanning."""
    hyp_ngrams = [tuple(hyp[i:i + n]) for i in range(len(hyp) - n + 1)]
    ref_ngrams = [tuple(ref[i:i + n]) for i in range(len(ref) - n + 1)]
    clipped = 0
    for gram in set(hyp_ngrams):
        in_hyp = sum(1 for g in hyp_ngrams if g == gram)
        in_ref = sum(1 for g in ref_ngrams if g == gram)
        clipped += min(in_hyp, in_ref)
    return clipped, len(hyp_ngrams)


def oracle_f1(overlap: float, hyp_total: float, ref_total: float) -> float:
    if hyp_total == 0 or ref_total == 0:
        return 0.0
    p = overlap / hyp_total
    r = overlap / ref_total
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def oracle_lcs(a: list, b: list) -> int:
    """Exhaustive LCS: enumerate subsequences of the shorter sequence."""
    short, long_ = (a, b) if len(a) <= len(b) else (b, a)
    best = 0
    for mask in range(1 << len(short)):
        picked = [short[i] for i in range(len(short)) if mask >> i & 1]
        if len(picked) <= best:
            continue
        it = iter(long_)
        if all(tok in it for tok in picked):
            best = len(picked)
    return best


def oracle_rouge(hyp: list, ref: list) -> tuple[float, float, float]:
    if not hyp:
        return (0.0, 0.0, 0.0)
    c1, h1 = oracle_ngram_stats(hyp, ref, 1)
    c2, h2 = oracle_ngram_stats(hyp, ref, 2)
    r1 = 100.0 * oracle_f1(c1, h1, max(len(ref), 0))
    r2 = 100.0 * oracle_f1(c2, h2, max(len(ref) - 1, 0))
    lcs = oracle_lcs(hyp, ref)
    rl = 100.0 * oracle_f1(lcs, len(hyp), len(ref))
    return (r1, r2, rl)
