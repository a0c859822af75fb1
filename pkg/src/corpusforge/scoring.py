"""Sentence-level quality scoring and metric aggregation.

Each registered metric yields a normalized per-sentence score in [0,1]
(higher = better); the final quality value is their arithmetic mean.
Inverted error-like metrics must be transformed adapter-side before
registration so a single orientation holds everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from corpusforge import adapters, kernels
from corpusforge.adapters import AdapterBinding
from corpusforge.domain import QualityScore, SentencePair
from corpusforge.errors import ValidationError

# batch scorer: list of (source, target) -> list of scores in [0,1]
BatchScorer = Callable[[list], list]

HEURISTIC_METRIC_ID = "heuristic-qe"


def heuristic_qe(source: str, target: str) -> float:
    """Deterministic reference scorer; total on arbitrary text, bounded in [0,1]."""
    return kernels.quality_score(source, target)


def aggregate_metrics(metric_scores: dict[str, float]) -> QualityScore:
    """Mean of per-metric scores; fsum keeps the result order-independent."""
    if not metric_scores:
        raise ValidationError("metric_scores must be non-empty")
    for metric_id, value in metric_scores.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"metric {metric_id!r} score is not a number")
        if not (0.0 <= value <= 1.0):
            raise ValidationError(f"metric {metric_id!r} score {value} outside [0, 1]")
    final = math.fsum(metric_scores.values()) / len(metric_scores)
    score = QualityScore(metric_scores=dict(metric_scores), final=final)
    score.validate()
    return score


def _heuristic_batch(batch: list) -> list:
    return [kernels.quality_score(source, target) for source, target in batch]


@dataclass
class MetricRegistry:
    """Ordered set of (metric id, batch scorer); ids must be unique."""

    metrics: list[tuple[str, BatchScorer]] = field(default_factory=list)

    def register(self, metric_id: str, scorer: BatchScorer) -> None:
        if not metric_id:
            raise ValidationError("metric id must be non-empty")
        if any(existing == metric_id for existing, _ in self.metrics):
            raise ValidationError(f"metric id {metric_id!r} already registered")
        self.metrics.append((metric_id, scorer))

    def validate(self) -> None:
        if not self.metrics:
            raise ValidationError("registry must have at least one metric")

    @classmethod
    def builtin(cls) -> "MetricRegistry":
        registry = cls()
        registry.register(HEURISTIC_METRIC_ID, _heuristic_batch)
        return registry

    @classmethod
    def from_binding(cls, binding: AdapterBinding) -> "MetricRegistry":
        """Registry backed by the project's qe adapter binding.

        Builtin bindings resolve to the local heuristic unless they name
        the fault adapter, which must keep failing when invoked through
        scoring too.
        """
        if binding.kind == "builtin" and binding.adapter_id != adapters.FAULT_ADAPTER_ID:
            registry = cls()
            registry.register(binding.adapter_id, _heuristic_batch)
            return registry
        registry = cls()
        registry.register(
            binding.adapter_id,
            lambda batch: adapters.qe_score(batch, binding),
        )
        return registry

    def score_batch(self, pairs: list[tuple[str, str]]) -> list[dict[str, float]]:
        """Score (source, target) pairs under every metric.

        A metric failure propagates; partial metric sets are never
        averaged silently.
        """
        self.validate()
        if not pairs:
            return []
        per_pair: list[dict[str, float]] = [{} for _ in pairs]
        for metric_id, scorer in self.metrics:
            values = scorer(list(pairs))
            if len(values) != len(pairs):
                raise ValidationError(
                    f"metric {metric_id!r} returned {len(values)} scores for {len(pairs)} pairs"
                )
            for scores, value in zip(per_pair, values):
                scores[metric_id] = value
        return per_pair


def score_pair(pair: SentencePair, registry: MetricRegistry) -> QualityScore:
    if not pair.source:
        raise ValidationError(f"pair {pair.segment_id}: source is empty")
    if pair.target is None:
        raise ValidationError(f"pair {pair.segment_id}: target is missing")
    scores = registry.score_batch([(pair.source, pair.target)])[0]
    return aggregate_metrics(scores)
