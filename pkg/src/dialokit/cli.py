"""Command-line entry point.

Five verbs: ``compile`` (canonical corpus to prompted records),
``evaluate`` (score a prediction file), ``analyze`` (bucketed report),
``split`` (build a split manifest), ``stats`` (corpus accounting).
stdout carries the human-readable report only; machine-readable
artifacts go to ``--out`` paths.  Exit codes: 0 success, 1 usage
error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analysis, ingest, metrics, prompts, splits
from .schema import SchemaError, TaskKind, TASK_ORDER, Speaker


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1; argparse's default of 2 is reserved for data errors
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="dialokit", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p_compile = sub.add_parser("compile", help="compile dialogues into prompted records")
    p_compile.add_argument("--tasks", default="nlg,dst,pol,ic,mcqa,nup,summ",
                           help="comma-separated task list")
    p_compile.add_argument("--templates", help="template override file")
    p_compile.add_argument("--neg-k", type=int, default=1,
                           help="negatives per next-utterance positive")
    p_compile.add_argument("--seed", type=int, default=0)
    p_compile.add_argument("--in", dest="infile", required=True, help="input corpus file")
    p_compile.add_argument("--out", dest="outfile", required=True, help="compiled records file")
    p_compile.add_argument("--adapter", choices=ingest.ADAPTERS, default="canonical")
    p_compile.add_argument("--dataset", help="dataset name for non-canonical adapters")
    p_compile.add_argument("--rejects", help="write rejection log here")
    p_compile.add_argument("--manifest", help="split manifest to filter by")
    p_compile.add_argument("--partition", help="manifest partition name")

    p_eval = sub.add_parser("evaluate", help="score a prediction file against a gold corpus")
    p_eval.add_argument("--task", required=True, choices=["dst", "nlg", "e2e", "ic", "summ"])
    p_eval.add_argument("--gold", required=True, help="canonical gold corpus")
    p_eval.add_argument("--pred", required=True, help="prediction file")
    p_eval.add_argument("--db", help="entity database file (e2e)")
    p_eval.add_argument("--out", dest="outfile", help="write JSON report here")
    p_eval.add_argument("--manifest", help="split manifest to filter by")
    p_eval.add_argument("--partition", help="manifest partition name")

    p_analyze = sub.add_parser("analyze", help="bucketed fine-grained report")
    p_analyze.add_argument("--task", required=True, choices=["dst", "e2e", "summ"])
    p_analyze.add_argument("--gold", required=True)
    p_analyze.add_argument("--pred", required=True)
    p_analyze.add_argument("--db", help="entity database file (e2e)")
    p_analyze.add_argument("--aspects", default="sp1_len,sp2_len,utr_num",
                           help="comma-separated aspect names")
    p_analyze.add_argument("--buckets", help="JSON file mapping aspect to bucket edges")
    p_analyze.add_argument("--out", dest="outfile", help="write JSON report here")

    p_split = sub.add_parser("split", help="build a deterministic split manifest")
    p_split.add_argument("--protocol", required=True,
                         choices=["percent", "per_intent", "domain_transfer"])
    p_split.add_argument("--pct", type=float, help="percentage for the percent protocol")
    p_split.add_argument("--k", type=int, help="examples per intent for per_intent")
    p_split.add_argument("--target-domain", help="held-out domain for domain_transfer")
    p_split.add_argument("--val-size", type=int, default=200,
                         help="validation sample count for domain_transfer")
    p_split.add_argument("--unit", choices=["dialogue", "turn"], default="dialogue",
                         help="sampling granularity for the percent protocol")
    p_split.add_argument("--seed", type=int, default=0)
    p_split.add_argument("--in", dest="infile", required=True)
    p_split.add_argument("--out", dest="outfile", required=True, help="manifest file")

    p_stats = sub.add_parser("stats", help="corpus statistics")
    p_stats.add_argument("--in", dest="infile", required=True)
    p_stats.add_argument("--adapter", choices=ingest.ADAPTERS, default="canonical")
    p_stats.add_argument("--dataset", help="dataset name for non-canonical adapters")

    return parser


def _load_corpus(path: str, adapter: str = "canonical", dataset: str | None = None):
    dialogues, stats = ingest.ingest_file(path, adapter, dataset)
    return dialogues, stats


def _manifest_dialogue_ids(manifest_path: str, partition: str | None) -> set[str]:
    manifest = splits.read_manifest(manifest_path)
    if partition is None:
        if len(manifest.partitions) != 1:
            raise UsageError(
                f"manifest has partitions {sorted(manifest.partitions)}; pick one with --partition"
            )
        (partition,) = manifest.partitions
    if partition not in manifest.partitions:
        raise UsageError(f"manifest has no partition {partition!r}")
    members = manifest.partitions[partition]
    # turn-unit members look like dialogue::turn; reduce to dialogue ids
    return {m.split("::")[0] for m in members}


def _run_compile(args) -> int:
    dialogues, stats = _load_corpus(args.infile, args.adapter, args.dataset)
    if args.manifest:
        dialogues = splits.filter_by_ids(
            dialogues, _manifest_dialogue_ids(args.manifest, args.partition)
        )
    tasks = [TaskKind.from_string(t) for t in args.tasks.split(",") if t.strip()]
    templates = prompts.load_templates(args.templates) if args.templates else None
    records, cstats = prompts.compile_corpus(
        dialogues, tasks, templates, neg_k=args.neg_k, seed=args.seed
    )
    prompts.write_compiled(records, args.outfile)
    if args.rejects:
        ingest.write_rejection_log(stats, args.rejects)

    print(f"dialogues read:     {stats.dialogues_read}")
    print(f"dialogues rejected: {stats.dialogues_rejected}")
    print(f"dialogues compiled: {cstats.dialogues}")
    for task in TASK_ORDER:
        if task in cstats.per_task:
            print(f"  {task.value:>5}: {cstats.per_task[task]} records")
    print(f"total records:      {cstats.total}")
    return 0


def _run_evaluate(args) -> int:
    dialogues, _ = _load_corpus(args.gold)
    if args.manifest:
        dialogues = splits.filter_by_ids(
            dialogues, _manifest_dialogue_ids(args.manifest, args.partition)
        )
    records = metrics.read_prediction_file(args.pred)
    db = metrics.load_entity_db(args.db) if args.db else None

    if args.task == "dst":
        preds = metrics.predictions_for_task(records, TaskKind.DST)
        report = metrics.evaluate_dst(dialogues, preds)
    elif args.task == "nlg":
        preds = metrics.predictions_for_task(records, TaskKind.NLG)
        report = metrics.evaluate_nlg(dialogues, preds)
    elif args.task == "e2e":
        preds = metrics.predictions_for_task(records, TaskKind.NLG)
        report = metrics.evaluate_e2e(dialogues, preds, db)
    elif args.task == "ic":
        preds = metrics.predictions_for_task(records, TaskKind.IC)
        report = metrics.evaluate_ic(dialogues, preds)
    else:
        preds = metrics.predictions_for_task(records, TaskKind.SUMM)
        report = metrics.evaluate_summ(dialogues, preds)

    report.check()
    print(report.render_table())
    if args.outfile:
        Path(args.outfile).write_text(
            json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8"
        )
    return 0


def _run_analyze(args) -> int:
    dialogues, _ = _load_corpus(args.gold)
    records = metrics.read_prediction_file(args.pred)
    db = metrics.load_entity_db(args.db) if args.db else None

    if args.task == "dst":
        preds = metrics.predictions_for_task(records, TaskKind.DST)
        samples, corpus_metrics = analysis.samples_for_dst(dialogues, preds)
    elif args.task == "e2e":
        preds = metrics.predictions_for_task(records, TaskKind.NLG)
        samples, corpus_metrics = analysis.samples_for_e2e(dialogues, preds, db)
    else:
        preds = metrics.predictions_for_task(records, TaskKind.SUMM)
        samples, corpus_metrics = analysis.samples_for_summ(dialogues, preds)

    spec_map = analysis.default_bucket_specs()
    if args.buckets:
        overrides = json.loads(Path(args.buckets).read_text(encoding="utf-8"))
        for aspect, edges in overrides.items():
            spec_map[aspect] = analysis.BucketSpec.from_edges(aspect, edges)
    aspects = [a.strip() for a in args.aspects.split(",") if a.strip()]
    for aspect in aspects:
        if aspect not in spec_map:
            raise UsageError(f"unknown aspect {aspect!r}")
    report = analysis.fine_grained_report(
        samples, [spec_map[a] for a in aspects], corpus_metrics
    )
    print(report.render_csv())
    if args.outfile:
        Path(args.outfile).write_text(
            json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8"
        )
    return 0


def _run_split(args) -> int:
    if args.protocol == "percent" and args.pct is None:
        raise UsageError("--pct is required for the percent protocol")
    if args.protocol == "per_intent" and args.k is None:
        raise UsageError("--k is required for the per_intent protocol")
    if args.protocol == "domain_transfer" and not args.target_domain:
        raise UsageError("--target-domain is required for the domain_transfer protocol")
    dialogues, _ = _load_corpus(args.infile)
    if args.protocol == "percent":
        if args.unit == "dialogue":
            ids = [d.id for d in dialogues]
        else:
            ids = [f"{d.id}::{t.index}" for d in dialogues for t in d.turns]
        selected = splits.percent_subsample(ids, args.pct, args.seed)
        manifest = splits.SplitManifest(
            protocol="percent",
            seed=args.seed,
            parameters={"pct": args.pct, "unit": args.unit},
            partitions={"train": selected},
        )
    elif args.protocol == "per_intent":
        examples = [
            (f"{d.id}::{t.index}", t.intent)
            for d in dialogues
            for t in d.turns
            if t.intent is not None
        ]
        selected = splits.k_per_intent(examples, args.k, args.seed)
        manifest = splits.SplitManifest(
            protocol="per_intent",
            seed=args.seed,
            parameters={"k": args.k},
            partitions={"train": selected},
        )
    else:
        train, validation, test = splits.leave_one_domain_out(
            dialogues, args.target_domain, args.seed, validation_size=args.val_size
        )
        manifest = splits.SplitManifest(
            protocol="domain_transfer",
            seed=args.seed,
            parameters={"target_domain": args.target_domain, "validation_size": args.val_size},
            partitions={"source_train": train, "source_validation": validation,
                        "target_test": test},
        )

    splits.write_manifest(manifest, args.outfile)
    for name, members in manifest.partitions.items():
        print(f"{name}: {len(members)} ids")
    return 0


def _run_stats(args) -> int:
    dialogues, stats = _load_corpus(args.infile, args.adapter, args.dataset)
    domains = sorted({dom for d in dialogues for dom in d.domains})
    coverage = {task: 0 for task in TASK_ORDER}
    for d in dialogues:
        has_system = any(t.speaker is Speaker.SPEAKER2 for t in d.turns)
        if has_system:
            coverage[TaskKind.NLG] += 1
        if any(t.speaker is Speaker.SPEAKER1 and t.belief is not None for t in d.turns):
            coverage[TaskKind.DST] += 1
        if any(t.speaker is Speaker.SPEAKER2 and t.acts is not None for t in d.turns):
            coverage[TaskKind.POL] += 1
        if any(t.intent is not None for t in d.turns):
            coverage[TaskKind.IC] += 1
        if d.mcqa:
            coverage[TaskKind.MCQA] += 1
        if d.nup_candidates or has_system:
            coverage[TaskKind.NUP] += 1
        if d.summary is not None:
            coverage[TaskKind.SUMM] += 1

    print(f"dialogues:  {len(dialogues)}")
    print(f"utterances: {stats.utterances_read}")
    print(f"rejected:   {stats.dialogues_rejected}")
    print(f"domains:    {len(domains)} ({', '.join(domains[:10])}{'...' if len(domains) > 10 else ''})")
    print("task coverage (dialogues usable per task):")
    for task in TASK_ORDER:
        print(f"  {task.value:>5}: {coverage[task]}")
    return 0


_RUNNERS = {
    "compile": _run_compile,
    "evaluate": _run_evaluate,
    "analyze": _run_analyze,
    "split": _run_split,
    "stats": _run_stats,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"dialokit: error: {exc}", file=sys.stderr)
        return 1
    try:
        return _RUNNERS[args.verb](args)
    except UsageError as exc:
        print(f"dialokit: error: {exc}", file=sys.stderr)
        return 1
    except (
        ingest.IngestError,
        metrics.MetricError,
        prompts.PromptError,
        splits.SplitError,
        analysis.AnalysisError,
        SchemaError,
        OSError,
        json.JSONDecodeError,
    ) as exc:
        print(f"dialokit: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
