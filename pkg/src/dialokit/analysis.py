"""Fine-grained bucketed evaluation.

Test sets are partitioned by per-dialogue aspect values (mean words per
speaker, utterance count, reference-summary length) and metrics are
reported per bucket, which is where differences on long dialogues or
lengthy responses become visible.  Sample-decomposable metrics are
averaged within each bucket; corpus-level metrics (BLEU, inform,
success, joint goal accuracy) are recomputed per bucket over that
bucket's members.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

from . import metrics as m
from .schema import Dialogue, Speaker
from .text import tokenize

ASPECT_NAMES = ("sp1_len", "sp2_len", "utr_num", "refe_len")


class AnalysisError(ValueError):
    """A bucket specification or sample set is unusable."""


@dataclass(frozen=True)
class AspectProfile:
    """Per-dialogue values of the four analysis aspects.

    ``sp1_len``/``sp2_len`` are mean token counts per turn of that
    speaker (0 when the speaker never talks); ``refe_len`` exists only
    when the dialogue has a reference summary.
    """

    sp1_len: float
    sp2_len: float
    utr_num: int
    refe_len: int | None = None

    def value(self, aspect: str) -> float | None:
        if aspect not in ASPECT_NAMES:
            raise AnalysisError(f"unknown aspect {aspect!r} (expected one of {ASPECT_NAMES})")
        return getattr(self, aspect)


def compute_aspects(dialogue: Dialogue) -> AspectProfile:
    """Aspect values for one dialogue, using the shared tokenizer."""
    lengths = {Speaker.SPEAKER1: [], Speaker.SPEAKER2: []}
    for turn in dialogue.turns:
        lengths[turn.speaker].append(len(tokenize(turn.text)))

    def mean(xs: list[int]) -> float:
        return sum(xs) / len(xs) if xs else 0.0

    return AspectProfile(
        sp1_len=mean(lengths[Speaker.SPEAKER1]),
        sp2_len=mean(lengths[Speaker.SPEAKER2]),
        utr_num=len(dialogue.turns),
        refe_len=len(tokenize(dialogue.summary)) if dialogue.summary is not None else None,
    )


@dataclass(frozen=True)
class BucketSpec:
    """Contiguous half-open intervals partitioning one aspect's range.

    ``intervals`` are (low, high) with ``high=None`` meaning unbounded;
    consecutive intervals must share their boundary.  Values below the
    first interval fall into bucket 0.
    """

    aspect: str
    intervals: tuple[tuple[float, float | None], ...]

    def __post_init__(self):
        if self.aspect not in ASPECT_NAMES:
            raise AnalysisError(f"unknown aspect {self.aspect!r}")
        if not self.intervals:
            raise AnalysisError(f"{self.aspect}: needs at least one interval")
        if self.intervals[-1][1] is not None:
            raise AnalysisError(f"{self.aspect}: last interval must be unbounded above")
        for i, (low, high) in enumerate(self.intervals):
            if high is not None and high <= low:
                raise AnalysisError(f"{self.aspect}: interval {i} is empty ({low}, {high})")
            if i + 1 < len(self.intervals) and self.intervals[i + 1][0] != high:
                raise AnalysisError(
                    f"{self.aspect}: intervals {i} and {i + 1} are not contiguous"
                )

    @classmethod
    def from_edges(cls, aspect: str, edges: Sequence[float]) -> "BucketSpec":
        """Build from ascending lower bounds; the last bucket is open-ended."""
        if not edges or sorted(edges) != list(edges):
            raise AnalysisError(f"{aspect}: edges must be ascending, got {edges}")
        intervals = []
        for i, low in enumerate(edges):
            high = edges[i + 1] if i + 1 < len(edges) else None
            intervals.append((float(low), None if high is None else float(high)))
        return cls(aspect=aspect, intervals=tuple(intervals))

    def label(self, index: int) -> str:
        low, high = self.intervals[index]
        if high is None:
            return f"{low:g}+"
        if float(low).is_integer() and float(high).is_integer():
            return f"{int(low)}-{int(high) - 1}"
        return f"[{low:g},{high:g})"

    def labels(self) -> list[str]:
        return [self.label(i) for i in range(len(self.intervals))]


def default_bucket_specs() -> dict[str, BucketSpec]:
    """The stock three-way bucketings per aspect."""
    return {
        "sp1_len": BucketSpec.from_edges("sp1_len", [6, 11, 16]),
        "sp2_len": BucketSpec.from_edges("sp2_len", [6, 11, 16]),
        "utr_num": BucketSpec.from_edges("utr_num", [2, 6, 10]),
        "refe_len": BucketSpec.from_edges("refe_len", [4, 24, 44]),
    }


def assign_bucket(value: float, spec: BucketSpec) -> int:
    """Index of the interval containing ``value`` (clamped to bucket 0)."""
    lows = [low for low, _ in spec.intervals]
    return max(0, bisect_right(lows, value) - 1)


@dataclass(frozen=True)
class AnalysisSample:
    """One scored test sample: aspects plus per-sample metric values.

    ``data`` is an opaque payload handed back to corpus-metric
    callables for per-bucket recomputation.
    """

    id: str
    profile: AspectProfile
    values: dict[str, float] = field(default_factory=dict)
    data: Any = None


CorpusMetric = Callable[[Sequence[AnalysisSample]], float]


@dataclass(frozen=True)
class BucketRow:
    aspect: str
    bucket: int
    label: str
    count: int
    metrics: dict[str, float | None]


@dataclass(frozen=True)
class FineGrainedReport:
    rows: tuple[BucketRow, ...]
    skipped: dict[str, int]

    def render_csv(self) -> str:
        names: list[str] = []
        for row in self.rows:
            for name in row.metrics:
                if name not in names:
                    names.append(name)
        lines = ["aspect,bucket,count," + ",".join(names)]
        for row in self.rows:
            cells = [row.aspect, row.label, str(row.count)]
            for name in names:
                value = row.metrics.get(name)
                cells.append("" if value is None else f"{value:.6f}")
            lines.append(",".join(cells))
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "rows": [
                {
                    "aspect": r.aspect,
                    "bucket": r.bucket,
                    "label": r.label,
                    "count": r.count,
                    "metrics": dict(r.metrics),
                }
                for r in self.rows
            ],
            "skipped": dict(self.skipped),
        }


def fine_grained_report(
    samples: Sequence[AnalysisSample],
    specs: Sequence[BucketSpec],
    corpus_metrics: Mapping[str, CorpusMetric] | None = None,
) -> FineGrainedReport:
    """Bucket the samples under each spec and aggregate metrics.

    Per-sample metric values are averaged within the bucket; entries in
    ``corpus_metrics`` are called on the bucket's members.  Empty
    buckets emit a row with count 0 and null metrics.  Samples whose
    profile lacks the spec's aspect are skipped and tallied.  The
    output does not depend on the order of ``samples``.
    """
    corpus_metrics = corpus_metrics or {}
    # sorted so column order never depends on sample order
    value_names = sorted({name for sample in samples for name in sample.values})

    rows: list[BucketRow] = []
    skipped: dict[str, int] = {}
    for spec in specs:
        buckets: list[list[AnalysisSample]] = [[] for _ in spec.intervals]
        skipped[spec.aspect] = 0
        for sample in samples:
            value = sample.profile.value(spec.aspect)
            if value is None:
                skipped[spec.aspect] += 1
                continue
            buckets[assign_bucket(value, spec)].append(sample)
        for index, members in enumerate(buckets):
            members = sorted(members, key=lambda s: s.id)
            metrics_out: dict[str, float | None] = {}
            for name in value_names:
                carrying = [s.values[name] for s in members if name in s.values]
                metrics_out[name] = sum(carrying) / len(carrying) if carrying else None
            for name, fn in corpus_metrics.items():
                metrics_out[name] = fn(members) if members else None
            rows.append(
                BucketRow(
                    aspect=spec.aspect,
                    bucket=index,
                    label=spec.label(index),
                    count=len(members),
                    metrics=metrics_out,
                )
            )
    return FineGrainedReport(rows=tuple(rows), skipped=skipped)


# ---------------------------------------------------------------------------
# Task-specific sample builders


def samples_for_dst(
    dialogues: Sequence[Dialogue], preds: m.PredictionSet
) -> tuple[list[AnalysisSample], dict[str, CorpusMetric]]:
    """Per-dialogue turn-match rates, with corpus JGA recomputed per bucket."""
    samples = []
    for dialogue in dialogues:
        gold = m.gold_states_from_dialogues([dialogue])
        if not gold:
            continue
        result = m.joint_goal_accuracy_detailed(gold, preds)
        samples.append(
            AnalysisSample(
                id=dialogue.id,
                profile=compute_aspects(dialogue),
                values={"turn_match_rate": result.rate},
                data=dialogue,
            )
        )

    def bucket_jga(members: Sequence[AnalysisSample]) -> float:
        gold = m.gold_states_from_dialogues([s.data for s in members])
        return m.joint_goal_accuracy_detailed(gold, preds).rate

    return samples, {"jga": bucket_jga}


def samples_for_summ(
    dialogues: Sequence[Dialogue], preds: m.PredictionSet
) -> tuple[list[AnalysisSample], dict[str, CorpusMetric]]:
    """Per-dialogue ROUGE scores; all three decompose over samples."""
    samples = []
    for dialogue in dialogues:
        if dialogue.summary is None:
            continue
        hyp = tokenize(preds.get(dialogue.id, 0) or "")
        r1, r2, rl = m.rouge_scores(hyp, tokenize(dialogue.summary))
        samples.append(
            AnalysisSample(
                id=dialogue.id,
                profile=compute_aspects(dialogue),
                values={"rouge1": r1, "rouge2": r2, "rougeL": rl},
                data=dialogue,
            )
        )
    return samples, {}


def samples_for_e2e(
    dialogues: Sequence[Dialogue],
    preds: m.PredictionSet,
    db: m.EntityDb | None = None,
) -> tuple[list[AnalysisSample], dict[str, CorpusMetric]]:
    """E2E samples; BLEU/inform/success recomputed per bucket."""
    samples = [
        AnalysisSample(id=d.id, profile=compute_aspects(d), values={}, data=d)
        for d in dialogues
    ]

    def bucket_report(members: Sequence[AnalysisSample]) -> m.MetricReport:
        return m.evaluate_e2e([s.data for s in members], preds, db)

    def make(name: str) -> CorpusMetric:
        def fn(members: Sequence[AnalysisSample]) -> float:
            return bucket_report(members).values[name]

        return fn

    return samples, {
        "bleu": make("bleu"),
        "inform": make("inform"),
        "success": make("success"),
        "combined_score": make("combined_score"),
    }


def samples_from_values(
    rows: Iterable[tuple[str, AspectProfile, Mapping[str, float]]]
) -> list[AnalysisSample]:
    """Convenience for building samples from precomputed values."""
    return [AnalysisSample(id=i, profile=p, values=dict(v)) for i, p, v in rows]
