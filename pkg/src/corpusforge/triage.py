"""Quality quantization, cost estimation, and the human review loop.

Scores are quantized into high/middle/low either by percentile (default)
or by absolute thresholds.  High pairs are auto-accepted; middle and low
pairs each get one priced review task driven through a fixed transition
table with optimistic concurrency on version counters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from corpusforge.domain import (
    LEVELS_ASCENDING,
    PairStatus,
    PricingTable,
    QualityLevel,
    SentencePair,
)
from corpusforge.errors import ConflictError, StateError, ValidationError
from corpusforge.scoring import MetricRegistry, score_pair

TASK_STATES = ("pending", "in_review", "resolved_accept", "resolved_edit", "resolved_reject")
ACTIONS = ("claim", "release", "accept", "edit", "reject")
LIVE_STATES = frozenset({"pending", "in_review"})

# The complete legal state machine; anything absent is a state error.
TRANSITIONS = {
    ("pending", "claim"): "in_review",
    ("in_review", "release"): "pending",
    ("in_review", "accept"): "resolved_accept",
    ("in_review", "edit"): "resolved_edit",
    ("in_review", "reject"): "resolved_reject",
}

# Task resolution drives the pair status.
_PAIR_STATUS_FOR = {
    "claim": PairStatus.IN_REVIEW,
    "release": PairStatus.PENDING_REVIEW,
    "accept": PairStatus.ACCEPTED,
    "edit": PairStatus.EDITED,
    "reject": PairStatus.REJECTED,
}


@dataclass
class QuantizerConfig:
    mode: str = "percentile"
    high_fraction: float = 0.20
    low_fraction: float = 0.20
    high_threshold: float = 0.80
    low_threshold: float = 0.20

    def validate(self) -> None:
        if self.mode not in ("percentile", "absolute"):
            raise ValidationError(f"unknown quantizer mode {self.mode!r}")
        if not (0.0 <= self.high_fraction <= 0.5):
            raise ValidationError("high_fraction must lie in [0, 0.5]")
        if not (0.0 <= self.low_fraction <= 0.5):
            raise ValidationError("low_fraction must lie in [0, 0.5]")
        if self.high_fraction + self.low_fraction > 1.0:
            raise ValidationError("high_fraction + low_fraction must not exceed 1")
        if not (0.0 <= self.low_threshold <= 1.0 and 0.0 <= self.high_threshold <= 1.0):
            raise ValidationError("thresholds must lie in [0, 1]")
        if self.low_threshold > self.high_threshold:
            raise ValidationError("low_threshold must not exceed high_threshold")

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "high_fraction": self.high_fraction,
            "low_fraction": self.low_fraction,
            "high_threshold": self.high_threshold,
            "low_threshold": self.low_threshold,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QuantizerConfig":
        config = cls(**{k: v for k, v in data.items() if k in cls.__dataclass_fields__})
        config.validate()
        return config


@dataclass
class ReviewTask:
    """Priced, state-machined unit of human supervision for one middle/low pair."""

    task_id: str
    project_id: str
    pair_id: str
    level: QualityLevel
    price: int
    state: str = "pending"
    assignee: str | None = None
    edited_target: str | None = None
    version: int = 0

    def validate(self) -> None:
        if self.level is QualityLevel.HIGH:
            raise ValidationError(f"task {self.task_id}: high pairs are never tasked")
        if self.state not in TASK_STATES:
            raise ValidationError(f"task {self.task_id}: unknown state {self.state!r}")
        if self.price < 0:
            raise ValidationError(f"task {self.task_id}: negative price")
        if self.version < 0:
            raise ValidationError(f"task {self.task_id}: negative version")
        has_edit = bool(self.edited_target)
        if has_edit != (self.state == "resolved_edit"):
            raise ValidationError(
                f"task {self.task_id}: edited_target present iff state is resolved_edit"
            )

    def to_record(self) -> dict:
        return {
            "task_id": self.task_id,
            "project_id": self.project_id,
            "pair_id": self.pair_id,
            "level": self.level.value,
            "price": self.price,
            "state": self.state,
            "assignee": self.assignee,
            "edited_target": self.edited_target,
            "version": self.version,
        }

    @classmethod
    def from_record(cls, record: dict) -> "ReviewTask":
        task = cls(
            task_id=record["task_id"],
            project_id=record["project_id"],
            pair_id=record["pair_id"],
            level=QualityLevel.parse(record["level"]),
            price=record["price"],
            state=record["state"],
            assignee=record.get("assignee"),
            edited_target=record.get("edited_target"),
            version=record.get("version", 0),
        )
        task.validate()
        return task


@dataclass
class CostSummary:
    """Exact integer minor-unit cost roll-up over quantized pairs."""

    currency: str
    per_level_counts: dict[QualityLevel, int] = field(default_factory=dict)
    per_level_cost: dict[QualityLevel, int] = field(default_factory=dict)
    total_editing_cost: int = 0
    from_scratch_cost: int = 0
    estimated_savings: int = 0

    def validate(self) -> None:
        if self.total_editing_cost != sum(self.per_level_cost.values()):
            raise ValidationError("total_editing_cost does not equal the per-level sum")
        if self.estimated_savings != self.from_scratch_cost - self.total_editing_cost:
            raise ValidationError("estimated_savings does not match the cost difference")
        if self.estimated_savings < 0:
            raise ValidationError("estimated_savings must be non-negative")

    def to_dict(self) -> dict:
        return {
            "currency": self.currency,
            "per_level_counts": {
                level.value: self.per_level_counts[level] for level in LEVELS_ASCENDING
            },
            "per_level_cost": {
                level.value: self.per_level_cost[level] for level in LEVELS_ASCENDING
            },
            "total_editing_cost": self.total_editing_cost,
            "from_scratch_cost": self.from_scratch_cost,
            "estimated_savings": self.estimated_savings,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CostSummary":
        summary = cls(
            currency=data["currency"],
            per_level_counts={
                QualityLevel.parse(k): v for k, v in data["per_level_counts"].items()
            },
            per_level_cost={
                QualityLevel.parse(k): v for k, v in data["per_level_cost"].items()
            },
            total_editing_cost=data["total_editing_cost"],
            from_scratch_cost=data["from_scratch_cost"],
            estimated_savings=data["estimated_savings"],
        )
        summary.validate()
        return summary


def quantize(
    scored: list[tuple[str, float]], config: QuantizerConfig
) -> dict[str, QualityLevel]:
    """Partition scored pairs into levels; total, disjoint, order-independent.

    Percentile mode sorts by score descending with pair_id as tie-break,
    takes the first floor(high_fraction*n) as high and the last
    floor(low_fraction*n) as low.  Absolute mode uses >= for the high
    threshold and strict < for the low one.
    """
    config.validate()
    seen = set()
    for pair_id, score in scored:
        if pair_id in seen:
            raise ValidationError(f"duplicate pair id {pair_id!r} in quantize input")
        seen.add(pair_id)
        if not (0.0 <= score <= 1.0):
            raise ValidationError(f"score {score} for {pair_id!r} outside [0, 1]")

    if config.mode == "absolute":
        levels = {}
        for pair_id, score in scored:
            if score >= config.high_threshold:
                levels[pair_id] = QualityLevel.HIGH
            elif score < config.low_threshold:
                levels[pair_id] = QualityLevel.LOW
            else:
                levels[pair_id] = QualityLevel.MIDDLE
        return levels

    n = len(scored)
    high_count = math.floor(config.high_fraction * n)
    low_count = math.floor(config.low_fraction * n)
    ordered = sorted(scored, key=lambda item: (-item[1], item[0]))
    levels = {}
    for index, (pair_id, _) in enumerate(ordered):
        if index < high_count:
            levels[pair_id] = QualityLevel.HIGH
        elif index >= n - low_count:
            levels[pair_id] = QualityLevel.LOW
        else:
            levels[pair_id] = QualityLevel.MIDDLE
    return levels


def estimate_cost(
    levels: dict[str, QualityLevel], pricing: PricingTable
) -> CostSummary:
    pricing.validate()
    counts = {level: 0 for level in LEVELS_ASCENDING}
    for level in levels.values():
        counts[level] += 1
    per_level_cost = {
        level: counts[level] * pricing.per_segment[level] for level in LEVELS_ASCENDING
    }
    total_editing = sum(per_level_cost.values())
    from_scratch = len(levels) * pricing.from_scratch_per_segment
    summary = CostSummary(
        currency=pricing.currency,
        per_level_counts=counts,
        per_level_cost=per_level_cost,
        total_editing_cost=total_editing,
        from_scratch_cost=from_scratch,
        estimated_savings=from_scratch - total_editing,
    )
    summary.validate()
    return summary


def task_id_for(pair_id: str) -> str:
    return f"t:{pair_id}"


def create_review_tasks(
    pairs: list[SentencePair],
    pricing: PricingTable,
    project_id: str,
    live_task_pair_ids: frozenset = frozenset(),
) -> list[ReviewTask]:
    """One pending task per middle/low pair; high pairs become auto_accepted.

    live_task_pair_ids holds pair ids that already have an unresolved
    task; hitting one is a conflict, not a silent second task.
    """
    pricing.validate()
    tasks = []
    for pair in pairs:
        if pair.level is None:
            raise ValidationError(f"pair {pair.segment_id} has no level")
        if pair.level is QualityLevel.HIGH:
            pair.status = PairStatus.AUTO_ACCEPTED
            continue
        if pair.segment_id in live_task_pair_ids:
            raise ConflictError(
                f"pair {pair.segment_id} already has a live review task"
            )
        pair.status = PairStatus.PENDING_REVIEW
        task = ReviewTask(
            task_id=task_id_for(pair.segment_id),
            project_id=project_id,
            pair_id=pair.segment_id,
            level=pair.level,
            price=pricing.per_segment[pair.level],
        )
        task.validate()
        tasks.append(task)
    return tasks


def transition_task(
    store,
    task_id: str,
    action: str,
    expected_version: int,
    assignee: str | None = None,
    edited_target: str | None = None,
) -> ReviewTask:
    """Drive one task through the transition table with compare-and-set.

    The version check happens twice: optimistically here against the
    loaded copy, then atomically inside the store write, so two racers
    with the same expected_version still produce exactly one winner.
    """
    if action not in ACTIONS:
        raise ValidationError(f"unknown action {action!r}")
    task = store.get_task(task_id)
    if task.version != expected_version:
        raise ConflictError(
            f"task {task_id} is at version {task.version}, not {expected_version}",
            details={"current_version": task.version},
        )
    key = (task.state, action)
    if key not in TRANSITIONS:
        raise StateError(f"action {action!r} is not legal in state {task.state!r}")
    pair = store.get_pair(task.project_id, task.pair_id)
    pair_version = pair.version

    if action == "claim":
        task.assignee = assignee
    elif action == "release":
        task.assignee = None
    elif action == "edit":
        if not edited_target or not edited_target.strip():
            raise ValidationError("edit requires a non-empty edited_target")
        task.edited_target = edited_target
        pair.target = edited_target
        project = store.get_project(task.project_id)
        registry = MetricRegistry.from_binding(project.config.adapters["qe"])
        pair.score = score_pair(pair, registry)
        # Level deliberately stays as quantized; the pair is terminal now.
    task.state = TRANSITIONS[key]
    pair.status = _PAIR_STATUS_FOR[action]
    task.version += 1
    pair.version += 1
    task.validate()
    pair.validate()
    store.update_task_and_pair(task, pair, expected_version, pair_version)
    return task
