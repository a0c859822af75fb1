"""End-to-end run orchestration: filter, GEC, NMT, APE, QE, quantize, triage.

A run computes everything in memory and commits through a single store
transaction, so a failing stage leaves the project byte-identical to its
pre-run state.  Per-stage progress counters go to the store's progress
sidecar so a second client can poll the report endpoint mid-run.
"""

from __future__ import annotations

from datetime import datetime, timezone

from corpusforge.adapters import STAGES, invoke_stage
from corpusforge.domain import LEVELS_ASCENDING, SentencePair, StageTrace
from corpusforge.errors import StateError, ValidationError
from corpusforge.filtering import filter_corpus
from corpusforge.scoring import MetricRegistry, aggregate_metrics
from corpusforge.store import Store
from corpusforge.triage import create_review_tasks, estimate_cost, quantize

PREVIEW_STAGES = ("filter", "gec", "nmt", "ape", "qe")


def _utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def validate_report(report: dict) -> None:
    """Conservation checks every successful run must satisfy."""
    counts = report["stage_counts"]
    if counts["ingested"] != counts["filtered_out"] + counts["scored"]:
        raise ValidationError(
            "report does not conserve segments: "
            f"{counts['ingested']} != {counts['filtered_out']} + {counts['scored']}"
        )
    histogram_total = sum(report["level_histogram"].values())
    if histogram_total != counts["scored"]:
        raise ValidationError(
            f"level histogram sums to {histogram_total}, expected {counts['scored']}"
        )


def run_pipeline(store: Store, project_id: str) -> dict:
    """Run all stages for a project and return the committed report."""
    project = store.get_project(project_id)
    config = project.config
    store.begin_run(project_id)
    try:
        started_at = _utc_now()
        segments = store.get_segments(project_id)
        total = len(segments)

        def progress(stage: str, done: int) -> None:
            store.set_progress(
                project_id,
                {"running": True, "stage": stage, "done": done, "total": total},
            )

        progress("filter", 0)
        retained, filter_report = filter_corpus(segments, config.filter_rules)
        progress("gec", len(retained))

        sources = {segment.id: segment.text for segment in retained}
        ids = [segment.id for segment in retained]
        src, tgt = config.source_lang, config.target_lang

        # Adapter preconditions forbid empty batches; an empty corpus just
        # short-circuits to an all-zero report.
        if ids:
            corrected = invoke_stage(
                config.adapters["gec"],
                "gec",
                [{"id": i, "source_text": sources[i]} for i in ids],
                src,
                tgt,
            )
        else:
            corrected = {}
        gec_changed = sum(1 for i in ids if corrected[i] != sources[i])
        progress("nmt", len(retained))

        if ids:
            raw_targets = invoke_stage(
                config.adapters["nmt"],
                "nmt",
                [{"id": i, "source_text": corrected[i]} for i in ids],
                src,
                tgt,
            )
        else:
            raw_targets = {}
        progress("ape", len(retained))

        if ids:
            edited = invoke_stage(
                config.adapters["ape"],
                "ape",
                [
                    {"id": i, "source_text": corrected[i], "target_text": raw_targets[i]}
                    for i in ids
                ],
                src,
                tgt,
            )
        else:
            edited = {}
        ape_changed = sum(1 for i in ids if edited[i] != raw_targets[i])
        progress("qe", len(retained))

        qe_binding = config.adapters["qe"]
        pairs: list[SentencePair] = []
        for segment in retained:
            pair = SentencePair.fresh(
                segment,
                source=corrected[segment.id],
                target=edited[segment.id],
                raw_target=raw_targets[segment.id],
            )
            pair.stage_trace = [
                StageTrace("gec", config.adapters["gec"].adapter_id,
                           corrected[segment.id] != segment.text),
                StageTrace("nmt", config.adapters["nmt"].adapter_id,
                           raw_targets[segment.id] != corrected[segment.id]),
                StageTrace("ape", config.adapters["ape"].adapter_id,
                           edited[segment.id] != raw_targets[segment.id]),
                StageTrace("qe", qe_binding.adapter_id, False),
            ]
            pairs.append(pair)

        registry = MetricRegistry.from_binding(qe_binding)
        metric_rows = registry.score_batch([(p.source, p.target) for p in pairs])
        for pair, metric_scores in zip(pairs, metric_rows):
            pair.score = aggregate_metrics(metric_scores)
        progress("quantize", len(retained))

        levels = quantize(
            [(pair.segment_id, pair.score.final) for pair in pairs], config.quantizer
        )
        for pair in pairs:
            pair.level = levels[pair.segment_id]

        tasks = create_review_tasks(pairs, config.pricing, project_id)
        cost = estimate_cost(levels, config.pricing)

        histogram = {level.value: 0 for level in LEVELS_ASCENDING}
        for level in levels.values():
            histogram[level.value] += 1

        report = {
            "project_id": project_id,
            "stage_counts": {
                "ingested": total,
                "filtered_out": total - len(retained),
                "gec_changed": gec_changed,
                "translated": len(retained),
                "ape_changed": ape_changed,
                "scored": len(pairs),
            },
            "filter_rejections": dict(filter_report.rejections),
            "level_histogram": histogram,
            "cost": cost.to_dict(),
            "adapter_ids": {stage: config.adapters[stage].adapter_id for stage in STAGES},
            "started_at": started_at,
            "finished_at": _utc_now(),
            "config_fingerprint": config.fingerprint(),
        }
        validate_report(report)
        store.replace_run_results(project_id, segments, pairs, tasks, report)
        return report
    except BaseException:
        store.abort_run(project_id)
        raise


def preview_stage(
    store: Store, project_id: str, stage: str, sample_size: int
) -> list[dict]:
    """Run one stage on a sample without persisting anything.

    filter/gec/nmt are recomputed from the ingested segments; ape/qe need
    persisted pairs from a previous run because their inputs are NMT
    outputs.
    """
    if stage not in PREVIEW_STAGES:
        raise ValidationError(f"unknown preview stage {stage!r}")
    if sample_size < 1:
        raise ValidationError("sample_size must be >= 1")
    project = store.get_project(project_id)
    config = project.config
    if not project.corpus_ingested:
        raise StateError(f"project {project_id!r} has no ingested corpus")

    if stage in ("filter", "gec", "nmt"):
        segments = store.get_segments(project_id)
        if stage == "filter":
            sample = segments[:sample_size]
            filter_corpus(sample, config.filter_rules)
            return [
                {
                    "id": segment.id,
                    "input": segment.text,
                    "output": (
                        "retained"
                        if segment.verdict == "retained"
                        else f"rejected:{segment.reject_reason}"
                    ),
                }
                for segment in sample
            ]
        retained, _ = filter_corpus(segments, config.filter_rules)
        sample = retained[:sample_size]
        if not sample:
            return []
        items = [{"id": s.id, "source_text": s.text} for s in sample]
        corrected = invoke_stage(
            config.adapters["gec"], "gec", items, config.source_lang, config.target_lang
        )
        if stage == "gec":
            return [
                {"id": s.id, "input": s.text, "output": corrected[s.id]} for s in sample
            ]
        translated = invoke_stage(
            config.adapters["nmt"],
            "nmt",
            [{"id": s.id, "source_text": corrected[s.id]} for s in sample],
            config.source_lang,
            config.target_lang,
        )
        return [
            {"id": s.id, "input": corrected[s.id], "output": translated[s.id]}
            for s in sample
        ]

    pairs = store.get_pairs(project_id)
    if not pairs:
        raise StateError(
            f"stage {stage!r} needs nmt output; no pairs exist yet",
            details={"missing_stage": "nmt"},
        )
    sample_pairs = pairs[:sample_size]
    if stage == "ape":
        items = [
            {"id": p.segment_id, "source_text": p.source, "target_text": p.raw_target}
            for p in sample_pairs
        ]
        edited = invoke_stage(
            config.adapters["ape"], "ape", items, config.source_lang, config.target_lang
        )
        return [
            {"id": p.segment_id, "input": p.raw_target, "output": edited[p.segment_id]}
            for p in sample_pairs
        ]
    items = [
        {"id": p.segment_id, "source_text": p.source, "target_text": p.target}
        for p in sample_pairs
    ]
    scores = invoke_stage(
        config.adapters["qe"], "qe", items, config.source_lang, config.target_lang
    )
    return [
        {"id": p.segment_id, "input": p.target, "output": scores[p.segment_id]}
        for p in sample_pairs
    ]
