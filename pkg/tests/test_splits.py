import pytest

from dialokit import (
    Dialogue,
    Speaker,
    SplitError,
    SplitManifest,
    Turn,
    k_per_intent,
    leave_one_domain_out,
    percent_subsample,
)
from dialokit.splits import filter_by_ids, read_manifest, write_manifest


def single_domain_dialogue(i: int, domain: str) -> Dialogue:
    return Dialogue(
        id=f"d-{domain}-{i}",
        dataset="toy",
        domains=frozenset({domain}),
        turns=(Turn(0, Speaker.SPEAKER1, "hello"), Turn(1, Speaker.SPEAKER2, "hi")),
    )


def multi_domain_dialogue(i: int, domains: set[str]) -> Dialogue:
    return Dialogue(
        id=f"d-multi-{i}",
        dataset="toy",
        domains=frozenset(domains),
        turns=(Turn(0, Speaker.SPEAKER1, "hello"), Turn(1, Speaker.SPEAKER2, "hi")),
    )


class TestPercentSubsample:
    def test_one_percent_of_1000(self):
        ids = [f"id-{i}" for i in range(1000)]
        assert len(percent_subsample(ids, 1, seed=0)) == 10

    def test_floor_on_8438(self):
        ids = [f"id-{i}" for i in range(8438)]
        assert len(percent_subsample(ids, 1, seed=0)) == 84

    def test_minimum_one(self):
        assert len(percent_subsample(["only"], 1, seed=0)) == 1

    def test_size_formula_across_n(self):
        for n in (1, 7, 19, 99, 100, 101, 250):
            ids = [str(i) for i in range(n)]
            for pct in (1, 5, 10, 20, 50, 100):
                expected = max(1, n * pct // 100)
                assert len(percent_subsample(ids, pct, seed=3)) == expected

    def test_deterministic_and_original_order(self):
        ids = [f"id-{i}" for i in range(500)]
        first = percent_subsample(ids, 5, seed=42)
        for _ in range(4):
            assert percent_subsample(ids, 5, seed=42) == first
        positions = [ids.index(x) for x in first]
        assert positions == sorted(positions)

    def test_different_seeds_differ(self):
        ids = [f"id-{i}" for i in range(500)]
        assert percent_subsample(ids, 5, seed=1) != percent_subsample(ids, 5, seed=2)

    def test_empty_ids_rejected(self):
        with pytest.raises(SplitError):
            percent_subsample([], 10, seed=0)

    def test_pct_bounds(self):
        with pytest.raises(SplitError):
            percent_subsample(["a"], 0, seed=0)
        with pytest.raises(SplitError):
            percent_subsample(["a"], 101, seed=0)


class TestKPerIntent:
    def test_k_times_intent_count(self):
        examples = [
            (f"ex-{intent}-{j}", f"intent-{intent}")
            for intent in range(77)
            for j in range(12)
        ]
        assert len(k_per_intent(examples, 10, seed=0)) == 770

    def test_clamps_to_available(self):
        examples = [("a", "x"), ("b", "x"), ("c", "x"), ("d", "y")]
        selected = k_per_intent(examples, 10, seed=0)
        assert sorted(selected) == ["a", "b", "c", "d"]

    def test_one_per_intent(self):
        examples = [(f"ex-{i}-{j}", f"intent-{i}") for i in range(5) for j in range(4)]
        selected = k_per_intent(examples, 1, seed=7)
        assert len(selected) == 5
        intents = {e[1] for e in examples if e[0] in set(selected)}
        assert len(intents) == 5

    def test_deterministic(self):
        examples = [(f"ex-{i}-{j}", f"intent-{i}") for i in range(10) for j in range(20)]
        assert k_per_intent(examples, 3, seed=5) == k_per_intent(examples, 3, seed=5)

    def test_k_below_one_rejected(self):
        with pytest.raises(SplitError):
            k_per_intent([("a", "x")], 0, seed=0)


class TestLeaveOneDomainOut:
    def build_corpus(self):
        corpus = []
        domains = ["train", "taxi", "restaurant", "hotel", "attraction"]
        for domain in domains:
            corpus.extend(single_domain_dialogue(i, domain) for i in range(70))
        corpus.append(multi_domain_dialogue(0, {"hotel", "taxi"}))
        corpus.append(multi_domain_dialogue(1, {"train", "restaurant"}))
        return corpus

    def test_target_test_contains_only_target_domain(self):
        corpus = self.build_corpus()
        train, validation, test = leave_one_domain_out(corpus, "taxi", seed=0)
        assert test == [d.id for d in corpus if d.domains == frozenset({"taxi"})]
        assert all("taxi" not in i for i in train + validation)

    def test_multi_domain_dialogues_excluded_everywhere(self):
        corpus = self.build_corpus()
        train, validation, test = leave_one_domain_out(corpus, "taxi", seed=0)
        everything = set(train) | set(validation) | set(test)
        assert "d-multi-0" not in everything
        assert "d-multi-1" not in everything

    def test_validation_is_exactly_200(self):
        corpus = self.build_corpus()
        train, validation, test = leave_one_domain_out(corpus, "taxi", seed=0)
        assert len(validation) == 200
        assert len(train) == 4 * 70 - 200

    def test_partitions_disjoint(self):
        corpus = self.build_corpus()
        train, validation, test = leave_one_domain_out(corpus, "hotel", seed=1)
        assert not set(train) & set(validation)
        assert not set(train) & set(test)
        assert not set(validation) & set(test)

    def test_shortfall_is_named(self):
        corpus = [single_domain_dialogue(i, "taxi") for i in range(5)]
        corpus += [single_domain_dialogue(i, "train") for i in range(10)]
        with pytest.raises(SplitError, match="need 200"):
            leave_one_domain_out(corpus, "taxi", seed=0)

    def test_unknown_target_domain_rejected(self):
        corpus = [single_domain_dialogue(0, "taxi")]
        with pytest.raises(SplitError, match="does not occur"):
            leave_one_domain_out(corpus, "bus", seed=0)

    def test_deterministic(self):
        corpus = self.build_corpus()
        assert leave_one_domain_out(corpus, "train", seed=9) == leave_one_domain_out(
            corpus, "train", seed=9
        )


class TestManifest:
    def test_round_trip(self, tmp_path):
        manifest = SplitManifest(
            protocol="percent",
            seed=13,
            parameters={"pct": 5.0, "unit": "dialogue"},
            partitions={"train": ["a", "b"]},
        )
        path = tmp_path / "m.json"
        write_manifest(manifest, path)
        assert read_manifest(path) == manifest

    def test_overlapping_partitions_rejected(self):
        with pytest.raises(SplitError, match="overlaps"):
            SplitManifest(
                protocol="percent",
                seed=0,
                partitions={"a": ["x", "y"], "b": ["y"]},
            )

    def test_filter_by_ids_preserves_order(self):
        corpus = [single_domain_dialogue(i, "taxi") for i in range(5)]
        picked = filter_by_ids(corpus, {"d-taxi-3", "d-taxi-1"})
        assert [d.id for d in picked] == ["d-taxi-1", "d-taxi-3"]
