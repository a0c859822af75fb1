import math
import random
import threading

import pytest

from corpusforge.domain import PairStatus, PricingTable, QualityLevel, Segment, SentencePair
from corpusforge.errors import ConflictError, StateError, ValidationError
from corpusforge.pipeline import run_pipeline
from corpusforge.triage import (
    ACTIONS,
    TASK_STATES,
    TRANSITIONS,
    QuantizerConfig,
    create_review_tasks,
    estimate_cost,
    quantize,
    transition_task,
)
from tests.conftest import make_demo_project

H, M, L = QualityLevel.HIGH, QualityLevel.MIDDLE, QualityLevel.LOW


def test_quantize_percentile_example():
    levels = quantize(
        [("a", 0.1), ("b", 0.3), ("c", 0.5), ("d", 0.7), ("e", 0.9)],
        QuantizerConfig(),
    )
    assert levels == {"e": H, "d": M, "c": M, "b": M, "a": L}


def test_quantize_small_n_all_middle():
    levels = quantize([("a", 0.1), ("b", 0.5), ("c", 0.9)], QuantizerConfig())
    assert set(levels.values()) == {M}


def test_quantize_absolute_boundaries():
    config = QuantizerConfig(mode="absolute")
    levels = quantize([("a", 0.80), ("b", 0.19), ("c", 0.20)], config)
    assert levels == {"a": H, "b": L, "c": M}


def test_quantize_rejects_duplicates_and_bad_scores():
    with pytest.raises(ValidationError):
        quantize([("a", 0.1), ("a", 0.2)], QuantizerConfig())
    with pytest.raises(ValidationError):
        quantize([("a", 1.2)], QuantizerConfig())


def oracle_percentile(scored, config):
    """Independent route: partition a fully sorted copy by slicing."""
    n = len(scored)
    h = math.floor(config.high_fraction * n)
    l = math.floor(config.low_fraction * n)
    ordered = sorted(scored, key=lambda item: (-item[1], item[0]))
    out = {}
    for pair_id, _ in ordered[:h]:
        out[pair_id] = H
    for pair_id, _ in ordered[h:n - l] if l else ordered[h:]:
        out[pair_id] = M
    if l:
        for pair_id, _ in ordered[n - l:]:
            out[pair_id] = L
    return out


def test_quantize_matches_oracle_with_ties():
    rng = random.Random(21)
    for _ in range(300):
        n = rng.randrange(30)
        # Coarse grid forces plenty of score ties.
        scored = [(f"p:{i}", rng.randrange(6) / 5) for i in range(n)]
        config = QuantizerConfig(
            high_fraction=rng.randrange(6) / 10, low_fraction=rng.randrange(6) / 10
        )
        levels = quantize(scored, config)
        assert levels == oracle_percentile(scored, config)
        # Permutation invariance.
        shuffled = scored[:]
        rng.shuffle(shuffled)
        assert quantize(shuffled, config) == levels
        # Monotone in score.
        by_id = dict(scored)
        for a, la in levels.items():
            for b, lb in levels.items():
                if by_id[a] > by_id[b]:
                    assert la.rank >= lb.rank


def test_estimate_cost_example():
    pricing = PricingTable()
    levels = {}
    for i in range(10):
        levels[f"h{i}"] = H
    for i in range(5):
        levels[f"m{i}"] = M
    for i in range(2):
        levels[f"l{i}"] = L
    summary = estimate_cost(levels, pricing)
    assert summary.total_editing_cost == 1100
    assert summary.from_scratch_cost == 8500
    assert summary.estimated_savings == 7400
    assert summary.per_level_counts == {H: 10, M: 5, L: 2}


def test_estimate_cost_degenerate():
    summary = estimate_cost({}, PricingTable())
    assert summary.total_editing_cost == 0
    assert summary.from_scratch_cost == 0
    assert summary.estimated_savings == 0
    all_high = estimate_cost({"a": H, "b": H}, PricingTable())
    assert all_high.total_editing_cost == 0


def make_scored_pair(i, level):
    seg = Segment(id=f"p:{i}", text="src here.", lang="en", origin_line=i)
    pair = SentencePair.fresh(seg, "src here.", "here src.", "here src.")
    from corpusforge.domain import QualityScore
    pair.score = QualityScore({"m": 0.5}, 0.5)
    pair.level = level
    return pair


def test_create_review_tasks():
    pricing = PricingTable()
    pairs = [make_scored_pair(1, H), make_scored_pair(2, M), make_scored_pair(3, L)]
    tasks = create_review_tasks(pairs, pricing, "p")
    assert [t.pair_id for t in tasks] == ["p:2", "p:3"]
    assert [t.price for t in tasks] == [100, 300]
    assert all(t.state == "pending" for t in tasks)
    assert pairs[0].status is PairStatus.AUTO_ACCEPTED
    assert pairs[1].status is PairStatus.PENDING_REVIEW
    assert create_review_tasks([], pricing, "p") == []


def test_create_review_tasks_live_conflict():
    with pytest.raises(ConflictError):
        create_review_tasks(
            [make_scored_pair(2, M)], PricingTable(), "p",
            live_task_pair_ids=frozenset({"p:2"}),
        )


def test_task_prices_match_pricing_lookup():
    rng = random.Random(22)
    for _ in range(100):
        middle = rng.randrange(0, 500)
        low = rng.randrange(middle, 1000)
        pricing = PricingTable(per_segment={H: 0, M: middle, L: low},
                               from_scratch_per_segment=low + rng.randrange(0, 500))
        pairs = [make_scored_pair(i, rng.choice([H, M, L])) for i in range(1, 20)]
        for task in create_review_tasks(pairs, pricing, "p"):
            assert task.price == pricing.per_segment[task.level]


def test_transition_table_is_exactly_the_legal_set():
    for state in TASK_STATES:
        for action in ACTIONS:
            legal = (state, action) in TRANSITIONS
            if state == "pending":
                assert legal == (action == "claim")
            elif state == "in_review":
                assert legal == (action in ("release", "accept", "edit", "reject"))
            else:
                assert not legal  # resolved states are terminal


def run_demo(store):
    pid = make_demo_project(store)
    run_pipeline(store, pid)
    return pid


def test_claim_edit_resolve_flow(mem_store):
    pid = run_demo(mem_store)
    task = mem_store.get_tasks(pid)[0]
    task = transition_task(mem_store, task.task_id, "claim", 0, assignee="rev1")
    assert task.state == "in_review" and task.version == 1
    pair = mem_store.get_pair(pid, task.pair_id)
    assert pair.status is PairStatus.IN_REVIEW

    task = transition_task(mem_store, task.task_id, "edit", 1,
                           edited_target="Edited target.")
    assert task.state == "resolved_edit"
    pair = mem_store.get_pair(pid, task.pair_id)
    assert pair.status is PairStatus.EDITED
    assert pair.target == "Edited target."
    # Fresh score equals direct invocation of the scorer.
    from corpusforge.scoring import heuristic_qe
    assert pair.score.final == heuristic_qe(pair.source, "Edited target.")
    # Level stays as quantized; the pair is terminal.
    assert pair.level is not None


def test_release_returns_to_pending(mem_store):
    pid = run_demo(mem_store)
    task = mem_store.get_tasks(pid)[0]
    transition_task(mem_store, task.task_id, "claim", 0, assignee="rev1")
    task = transition_task(mem_store, task.task_id, "release", 1)
    assert task.state == "pending" and task.assignee is None
    assert mem_store.get_pair(pid, task.pair_id).status is PairStatus.PENDING_REVIEW


def test_accept_and_reject(mem_store):
    pid = run_demo(mem_store)
    tasks = mem_store.get_tasks(pid)
    transition_task(mem_store, tasks[0].task_id, "claim", 0)
    accepted = transition_task(mem_store, tasks[0].task_id, "accept", 1)
    assert accepted.state == "resolved_accept"
    assert mem_store.get_pair(pid, accepted.pair_id).status is PairStatus.ACCEPTED

    transition_task(mem_store, tasks[1].task_id, "claim", 0)
    rejected = transition_task(mem_store, tasks[1].task_id, "reject", 1)
    assert mem_store.get_pair(pid, rejected.pair_id).status is PairStatus.REJECTED


def test_pending_accept_is_state_error(mem_store):
    pid = run_demo(mem_store)
    task = mem_store.get_tasks(pid)[0]
    with pytest.raises(StateError):
        transition_task(mem_store, task.task_id, "accept", 0)


def test_stale_version_is_conflict_and_no_write(mem_store):
    pid = run_demo(mem_store)
    task = mem_store.get_tasks(pid)[0]
    transition_task(mem_store, task.task_id, "claim", 0)
    before = mem_store.dump()
    with pytest.raises(ConflictError):
        transition_task(mem_store, task.task_id, "accept", 0)
    assert mem_store.dump() == before


def test_edit_requires_non_empty_target(mem_store):
    pid = run_demo(mem_store)
    task = mem_store.get_tasks(pid)[0]
    transition_task(mem_store, task.task_id, "claim", 0)
    with pytest.raises(ValidationError):
        transition_task(mem_store, task.task_id, "edit", 1, edited_target="   ")


def test_concurrent_claim_single_winner(store):
    pid = run_demo(store)
    task = store.get_tasks(pid)[0]
    barrier = threading.Barrier(2)
    outcomes = []

    def racer(name):
        barrier.wait()
        try:
            transition_task(store, task.task_id, "claim", 0, assignee=name)
            outcomes.append(("ok", name))
        except ConflictError:
            outcomes.append(("conflict", name))

    threads = [threading.Thread(target=racer, args=(f"rev{i}",)) for i in range(2)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert sorted(kind for kind, _ in outcomes) == ["conflict", "ok"]
    assert store.get_task(task.task_id).state == "in_review"
