"""Core domain records: segments, sentence pairs, quality scores, levels, pricing.

All records are plain dataclasses with explicit ``validate`` methods and
dict round-trip serialization.  They are treated as immutable values
outside the store: mutation happens by writing a new version through a
store transaction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from corpusforge.errors import ValidationError

SCORE_TOLERANCE = 1e-9


class QualityLevel(Enum):
    """Three-level quality band; total order low < middle < high."""

    LOW = "low"
    MIDDLE = "middle"
    HIGH = "high"

    @classmethod
    def parse(cls, value: str) -> "QualityLevel":
        try:
            return cls(value)
        except ValueError:
            raise ValidationError(f"unknown quality level: {value!r}") from None

    @property
    def rank(self) -> int:
        return _LEVEL_RANK[self]


_LEVEL_RANK = {QualityLevel.LOW: 0, QualityLevel.MIDDLE: 1, QualityLevel.HIGH: 2}

LEVELS_ASCENDING = (QualityLevel.LOW, QualityLevel.MIDDLE, QualityLevel.HIGH)


def level_order(a: QualityLevel, b: QualityLevel) -> str:
    """Compare two levels under the total order; returns less/equal/greater."""
    if a.rank < b.rank:
        return "less"
    if a.rank > b.rank:
        return "greater"
    return "equal"


class PairStatus(Enum):
    DRAFT = "draft"
    AUTO_ACCEPTED = "auto_accepted"
    PENDING_REVIEW = "pending_review"
    IN_REVIEW = "in_review"
    ACCEPTED = "accepted"
    EDITED = "edited"
    REJECTED = "rejected"

    @classmethod
    def parse(cls, value: str) -> "PairStatus":
        try:
            return cls(value)
        except ValueError:
            raise ValidationError(f"unknown pair status: {value!r}") from None


# Statuses a pair can only reach through the review state machine.
TERMINAL_STATUSES = frozenset(
    {PairStatus.AUTO_ACCEPTED, PairStatus.ACCEPTED, PairStatus.EDITED, PairStatus.REJECTED}
)

STAGE_ORDER = ("gec", "nmt", "ape", "qe")


@dataclass
class Segment:
    """One source-language sentence with provenance and filter verdict."""

    id: str
    text: str
    lang: str
    origin_line: int
    verdict: str | None = None  # "retained" | "rejected" | None before filtering
    reject_reason: str | None = None

    def validate(self) -> None:
        if not self.id:
            raise ValidationError("segment id must be non-empty")
        if self.origin_line < 1:
            raise ValidationError(f"segment {self.id}: origin_line must be >= 1")
        if self.verdict not in (None, "retained", "rejected"):
            raise ValidationError(f"segment {self.id}: bad verdict {self.verdict!r}")
        if self.verdict == "rejected" and not self.reject_reason:
            raise ValidationError(f"segment {self.id}: rejected without a reason code")
        if self.verdict != "rejected" and self.reject_reason is not None:
            raise ValidationError(f"segment {self.id}: reason set on non-rejected segment")
        if self.verdict == "retained" and not self.text.strip():
            raise ValidationError(f"segment {self.id}: retained text is blank")

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "lang": self.lang,
            "origin_line": self.origin_line,
            "verdict": self.verdict,
            "reject_reason": self.reject_reason,
        }

    @classmethod
    def from_record(cls, record: dict) -> "Segment":
        return cls(
            id=record["id"],
            text=record["text"],
            lang=record["lang"],
            origin_line=record["origin_line"],
            verdict=record.get("verdict"),
            reject_reason=record.get("reject_reason"),
        )


@dataclass
class StageTrace:
    """Provenance for one pipeline stage applied to a pair."""

    stage: str
    adapter_id: str
    changed: bool

    def to_record(self) -> list:
        return [self.stage, self.adapter_id, self.changed]

    @classmethod
    def from_record(cls, record: list) -> "StageTrace":
        return cls(stage=record[0], adapter_id=record[1], changed=bool(record[2]))


@dataclass
class QualityScore:
    """Per-metric normalized scores plus their aggregated final value."""

    metric_scores: dict[str, float]
    final: float

    def validate(self) -> None:
        if not self.metric_scores:
            raise ValidationError("metric_scores must be non-empty")
        for metric_id, value in self.metric_scores.items():
            if not (0.0 <= value <= 1.0):
                raise ValidationError(
                    f"metric {metric_id!r} score {value} outside [0, 1]"
                )
        mean = math.fsum(self.metric_scores.values()) / len(self.metric_scores)
        if abs(self.final - mean) > SCORE_TOLERANCE:
            raise ValidationError(
                f"final {self.final} is not the mean of metric scores ({mean})"
            )

    def to_record(self) -> dict:
        return {"metrics": dict(self.metric_scores), "final": self.final}

    @classmethod
    def from_record(cls, record: dict) -> "QualityScore":
        return cls(metric_scores=dict(record["metrics"]), final=record["final"])


@dataclass
class SentencePair:
    """A source sentence with its machine target and per-stage provenance."""

    segment_id: str
    source: str
    target: str
    raw_target: str
    stage_trace: list[StageTrace] = field(default_factory=list)
    score: QualityScore | None = None
    level: QualityLevel | None = None
    status: PairStatus = PairStatus.DRAFT
    origin_line: int = 1
    version: int = 0

    @classmethod
    def fresh(cls, segment: Segment, source: str, target: str, raw_target: str) -> "SentencePair":
        """The only sanctioned way to create a new pair: always a draft."""
        pair = cls(
            segment_id=segment.id,
            source=source,
            target=target,
            raw_target=raw_target,
            origin_line=segment.origin_line,
        )
        pair.validate(new=True)
        return pair

    def validate(self, new: bool = False) -> None:
        if not self.segment_id:
            raise ValidationError("pair segment_id must be non-empty")
        if new and self.status is not PairStatus.DRAFT:
            raise ValidationError(
                f"pair {self.segment_id}: new pairs must be drafts, got {self.status.value}"
            )
        if (self.score is None) != (self.level is None):
            raise ValidationError(
                f"pair {self.segment_id}: level must be present iff score is present"
            )
        if self.score is not None:
            self.score.validate()
        if self.status is PairStatus.AUTO_ACCEPTED and self.level is not QualityLevel.HIGH:
            raise ValidationError(
                f"pair {self.segment_id}: auto_accepted requires level high"
            )
        if self.status in (PairStatus.PENDING_REVIEW, PairStatus.IN_REVIEW) and self.level not in (
            QualityLevel.MIDDLE,
            QualityLevel.LOW,
        ):
            raise ValidationError(
                f"pair {self.segment_id}: {self.status.value} requires level middle or low"
            )
        stages = [trace.stage for trace in self.stage_trace]
        if stages != list(STAGE_ORDER[: len(stages)]):
            raise ValidationError(
                f"pair {self.segment_id}: stage trace {stages} out of pipeline order"
            )

    def to_record(self) -> dict:
        return {
            "segment_id": self.segment_id,
            "source": self.source,
            "target": self.target,
            "raw_target": self.raw_target,
            "stage_trace": [trace.to_record() for trace in self.stage_trace],
            "score": self.score.to_record() if self.score else None,
            "level": self.level.value if self.level else None,
            "status": self.status.value,
            "origin_line": self.origin_line,
            "version": self.version,
        }

    @classmethod
    def from_record(cls, record: dict) -> "SentencePair":
        score = record.get("score")
        level = record.get("level")
        pair = cls(
            segment_id=record["segment_id"],
            source=record["source"],
            target=record["target"],
            raw_target=record["raw_target"],
            stage_trace=[StageTrace.from_record(t) for t in record.get("stage_trace", [])],
            score=QualityScore.from_record(score) if score else None,
            level=QualityLevel.parse(level) if level else None,
            status=PairStatus.parse(record["status"]),
            origin_line=record.get("origin_line", 1),
            version=record.get("version", 0),
        )
        pair.validate()
        return pair


@dataclass
class PricingTable:
    """Per-segment editing prices in integer minor currency units."""

    currency: str = "USD"
    per_segment: dict[QualityLevel, int] = field(
        default_factory=lambda: {
            QualityLevel.HIGH: 0,
            QualityLevel.MIDDLE: 100,
            QualityLevel.LOW: 300,
        }
    )
    from_scratch_per_segment: int = 500

    def validate(self) -> None:
        for level in LEVELS_ASCENDING:
            if level not in self.per_segment:
                raise ValidationError(f"pricing missing level {level.value}")
            price = self.per_segment[level]
            if not isinstance(price, int) or isinstance(price, bool) or price < 0:
                raise ValidationError(
                    f"pricing for {level.value} must be a non-negative integer of minor units"
                )
        if not isinstance(self.from_scratch_per_segment, int) or self.from_scratch_per_segment < 0:
            raise ValidationError("from_scratch_per_segment must be a non-negative integer")
        high = self.per_segment[QualityLevel.HIGH]
        middle = self.per_segment[QualityLevel.MIDDLE]
        low = self.per_segment[QualityLevel.LOW]
        if not high <= middle <= low:
            raise ValidationError(
                f"pricing must satisfy high <= middle <= low, got {high}/{middle}/{low}"
            )
        if self.from_scratch_per_segment < low:
            raise ValidationError(
                "from_scratch_per_segment must be at least the low-level price"
            )

    def to_dict(self) -> dict:
        return {
            "currency": self.currency,
            "per_segment": {level.value: price for level, price in self.per_segment.items()},
            "from_scratch_per_segment": self.from_scratch_per_segment,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PricingTable":
        table = cls(
            currency=data.get("currency", "USD"),
            per_segment={
                QualityLevel.parse(level): price
                for level, price in data.get("per_segment", {}).items()
            },
            from_scratch_per_segment=data.get("from_scratch_per_segment", 500),
        )
        table.validate()
        return table
