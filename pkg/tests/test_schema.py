import random

import pytest

from dialokit import (
    BeliefState,
    Dialogue,
    McqaItem,
    SchemaError,
    Speaker,
    TaskKind,
    Turn,
    dialogue_from_dict,
    dumps_dialogue,
    loads_dialogue,
    validate_dialogue,
)
from helpers import random_belief_state, tod_dialogue, toy_corpus


def two_turn_dialogue(**overrides) -> Dialogue:
    fields = dict(
        id="d1",
        dataset="toy",
        domains=frozenset({"restaurant"}),
        turns=(
            Turn(0, Speaker.SPEAKER1, "hello"),
            Turn(1, Speaker.SPEAKER2, "hi , how can i help"),
        ),
    )
    fields.update(overrides)
    return Dialogue(**fields)


class TestValidateDialogue:
    def test_well_formed_dialogue_has_no_violations(self):
        assert validate_dialogue(two_turn_dialogue()) == []

    def test_empty_turn_text_is_named(self):
        d = two_turn_dialogue(
            turns=(Turn(0, Speaker.SPEAKER1, "hello"), Turn(1, Speaker.SPEAKER2, "   "))
        )
        violations = validate_dialogue(d)
        assert len(violations) == 1
        assert "turns[1]" in violations[0]
        assert "non-empty" in violations[0]

    def test_mcqa_answer_index_out_of_bounds(self):
        d = two_turn_dialogue(
            mcqa=(McqaItem(question="q", options=("a", "b"), answer_index=2),)
        )
        violations = validate_dialogue(d)
        assert len(violations) == 1
        assert "answer_index" in violations[0]

    def test_turn_index_must_match_position(self):
        d = two_turn_dialogue(
            turns=(Turn(3, Speaker.SPEAKER1, "hello"), Turn(1, Speaker.SPEAKER2, "hi"))
        )
        assert any("index" in v for v in validate_dialogue(d))

    def test_empty_domains_flagged(self):
        d = two_turn_dialogue(domains=frozenset())
        assert any(v.startswith("domains") for v in validate_dialogue(d))

    def test_consecutive_same_speaker_turns_are_legal(self):
        d = two_turn_dialogue(
            turns=(
                Turn(0, Speaker.SPEAKER1, "hello"),
                Turn(1, Speaker.SPEAKER1, "anyone there"),
                Turn(2, Speaker.SPEAKER2, "yes , hello"),
            )
        )
        assert validate_dialogue(d) == []

    def test_is_pure_and_deterministic(self):
        d = two_turn_dialogue(
            turns=(Turn(0, Speaker.SPEAKER1, ""), Turn(2, Speaker.SPEAKER2, "hi"))
        )
        assert validate_dialogue(d) == validate_dialogue(d)


class TestBeliefState:
    def test_equality_ignores_insertion_order(self):
        a = BeliefState([("r", "food", "thai"), ("r", "area", "north")])
        b = BeliefState([("r", "area", "north"), ("r", "food", "thai")])
        assert a == b
        assert hash(a) == hash(b)

    def test_equality_under_random_permutations(self):
        rng = random.Random(7)
        for _ in range(200):
            state = random_belief_state(rng)
            triples = state.sorted_triples()
            rng.shuffle(triples)
            assert BeliefState(triples) == state

    def test_one_value_per_domain_slot_pair_last_wins(self):
        state = BeliefState([("r", "food", "thai"), ("r", "food", "italian")])
        assert state.sorted_triples() == [("r", "food", "italian")]

    def test_normalizes_on_construction(self):
        state = BeliefState([("Restaurant", "Food", "  Thai  ")])
        assert state.sorted_triples() == [("restaurant", "food", "thai")]

    def test_updated_accumulates(self):
        s1 = BeliefState([("r", "food", "thai")])
        s2 = s1.updated([("r", "area", "north")])
        assert len(s1) == 1
        assert len(s2) == 2
        assert s2.value_of("r", "food") == "thai"


class TestSerialization:
    def test_round_trip_equality_on_toy_corpus(self):
        for d in toy_corpus(40):
            assert validate_dialogue(d) == []
            assert loads_dialogue(dumps_dialogue(d)) == d

    def test_round_trip_full_featured(self):
        d = tod_dialogue(3)
        again = loads_dialogue(dumps_dialogue(d))
        assert again == d
        assert again.goal == d.goal

    def test_optional_fields_omitted(self):
        line = dumps_dialogue(two_turn_dialogue())
        assert "goal" not in line
        assert "summary" not in line
        assert "mcqa" not in line

    def test_serialization_is_byte_deterministic(self):
        d = tod_dialogue(5)
        assert dumps_dialogue(d) == dumps_dialogue(d)

    def test_malformed_json_raises(self):
        with pytest.raises(SchemaError):
            loads_dialogue("{not json")

    def test_missing_required_field_raises(self):
        with pytest.raises(SchemaError, match="turns"):
            dialogue_from_dict({"id": "x", "dataset": "y", "domains": ["a"]})

    def test_bad_speaker_raises(self):
        with pytest.raises(SchemaError, match="speaker"):
            dialogue_from_dict(
                {
                    "id": "x",
                    "dataset": "y",
                    "domains": ["a"],
                    "turns": [{"index": 0, "speaker": "narrator", "text": "hi"}],
                }
            )


def test_task_kind_has_exactly_seven_variants():
    assert {t.value for t in TaskKind} == {"nlg", "dst", "pol", "ic", "mcqa", "nup", "summ"}


def test_speaker_roles():
    assert Speaker.SPEAKER1.prefix == "user"
    assert Speaker.SPEAKER2.prefix == "system"
    with pytest.raises(SchemaError):
        Speaker.from_string("speaker3")
