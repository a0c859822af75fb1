"""Acceptance gate: one test per release criterion.

Each test announces its criterion with a single ``[acceptance] name: PASS``
(or FAIL) line on the real stdout, then proves the property with oracles
that are independent of the implementation under test.
"""

import importlib.resources
import json
import math
import random
import re
import threading
import time
from contextlib import contextmanager

import pytest
from fastapi.testclient import TestClient

from corpusforge.cli import main
from corpusforge.config import ProjectConfig
from corpusforge.domain import PricingTable, QualityLevel
from corpusforge.errors import ConflictError, StageFailure, StateError
from corpusforge.filtering import FilterRuleSet, filter_corpus
from corpusforge.pipeline import run_pipeline
from corpusforge.scoring import aggregate_metrics, heuristic_qe
from corpusforge.service import create_app
from corpusforge.store import Store
from corpusforge.triage import (
    ACTIONS,
    TASK_STATES,
    TRANSITIONS,
    QuantizerConfig,
    estimate_cost,
    quantize,
    transition_task,
)
from tests.conftest import DEMO_CORPUS, make_demo_project
from tests.test_service import check_schema

SAMPLE = importlib.resources.files("corpusforge") / "sample_data" / "corpus_100.txt"

H, M, L = QualityLevel.HIGH, QualityLevel.MIDDLE, QualityLevel.LOW

WORDS = (
    "river stone meadow harbor lantern walnut copper meadowlark engine "
    "quiet basket thread signal motive cedar hollow"
).split()


@pytest.fixture()
def announce(capsys):
    @contextmanager
    def _announce(name):
        try:
            yield
        except BaseException:
            with capsys.disabled():
                print(f"[acceptance] {name}: FAIL")
            raise
        else:
            with capsys.disabled():
                print(f"[acceptance] {name}: PASS")

    return _announce


def test_end_to_end_determinism(announce, tmp_path, capsys):
    with announce("end-to-end determinism"):
        started = time.monotonic()
        reports = []
        outputs = []
        for i in range(2):
            out = tmp_path / f"dataset-{i}.jsonl"
            assert main(["run", "--input", str(SAMPLE), "--out", str(out)]) == 0
            reports.append(json.loads(capsys.readouterr().out))
            outputs.append(out.read_bytes())
        elapsed = time.monotonic() - started

        assert outputs[0] == outputs[1]
        for report in reports:
            report.pop("started_at")
            report.pop("finished_at")
        assert reports[0] == reports[1]
        assert elapsed < 5.0


def random_corpus_lines(rng):
    n = rng.randrange(0, 501)
    lines = []
    for _ in range(n):
        roll = rng.random()
        if roll < 0.08:
            lines.append("")
        elif roll < 0.16 and lines:
            lines.append(rng.choice(lines))
        elif roll < 0.20:
            lines.append("x" * rng.randrange(1001, 1400))
        elif roll < 0.23:
            lines.append(" ".join("t%d" % rng.randrange(9) for _ in range(160)))
        elif roll < 0.26:
            lines.append("1234 5678 !!")
        elif roll < 0.29:
            lines.append("가나다 라마바 사아자.")
        else:
            k = rng.randrange(2, 9)
            lines.append(" ".join(rng.choice(WORDS) for _ in range(k)) + ".")
    return lines


def test_conservation_laws(announce):
    with announce("conservation laws"):
        rng = random.Random(101)
        for round_no in range(200):
            lines = random_corpus_lines(rng)
            payload = ("\n".join(lines) + "\n").encode("utf-8") if lines else b""

            store = Store()
            try:
                pid = store.create_project("p", project_id="p").project_id
                assert store.ingest_corpus(pid, payload) == len(lines)

                retained, filter_report = filter_corpus(
                    store.get_segments(pid), FilterRuleSet()
                )
                assert filter_report.input_count == len(lines)
                assert (
                    filter_report.retained_count
                    + sum(filter_report.rejections.values())
                    == filter_report.input_count
                )
                assert filter_report.retained_count == len(retained)

                report = run_pipeline(store, pid)
                counts = report["stage_counts"]
                assert counts["ingested"] == len(lines)
                assert counts["ingested"] == counts["filtered_out"] + counts["scored"]
                assert sum(report["level_histogram"].values()) == counts["scored"]
                assert counts["translated"] == counts["scored"]
                assert report["filter_rejections"] == filter_report.rejections
            finally:
                store.close()


def sort_and_slice_oracle(scored, config):
    ordered = sorted(scored, key=lambda item: (-item[1], item[0]))
    n = len(ordered)
    h = math.floor(config.high_fraction * n)
    l = math.floor(config.low_fraction * n)
    levels = {}
    for index, (pair_id, _) in enumerate(ordered):
        if index < h:
            levels[pair_id] = H
        elif l and index >= n - l:
            levels[pair_id] = L
        else:
            levels[pair_id] = M
    return levels


def test_quantizer_oracle_equivalence(announce):
    with announce("quantizer oracle equivalence"):
        rng = random.Random(102)
        for _ in range(1000):
            n = rng.randrange(0, 40)
            # Coarse score grid so ties are the norm, not the exception.
            scored = [(f"p{i}", rng.randrange(0, 11) / 10) for i in range(n)]
            config = QuantizerConfig(
                high_fraction=rng.randrange(0, 6) / 10,
                low_fraction=rng.randrange(0, 6) / 10,
            )
            levels = quantize(scored, config)
            assert levels == sort_and_slice_oracle(scored, config)

            shuffled = scored[:]
            rng.shuffle(shuffled)
            assert quantize(shuffled, config) == levels

            score_of = dict(scored)
            for a, level_a in levels.items():
                for b, level_b in levels.items():
                    if score_of[a] > score_of[b]:
                        assert level_a.rank >= level_b.rank


def random_utf8_text(rng):
    alphabet = "abz .,!?\téü가나世界\U0001f600́"
    return "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 40)))


def test_scoring_properties(announce):
    with announce("scoring oracles"):
        assert heuristic_qe("the cat sat.", "the cat sat.") == 0.70
        assert heuristic_qe("aa bb cc.", "xx yy zz.") == 1.0
        assert heuristic_qe("Hello.", "") == 0.0

        rng = random.Random(103)
        for _ in range(10_000):
            score = heuristic_qe(random_utf8_text(rng), random_utf8_text(rng))
            assert 0.0 <= score <= 1.0

        for _ in range(1000):
            values = {f"m{i}": rng.random() for i in range(rng.randrange(1, 9))}
            total = 0.0
            for value in values.values():
                total += value
            assert abs(aggregate_metrics(values).final - total / len(values)) <= 1e-9


def test_cost_arithmetic(announce):
    with announce("cost arithmetic"):
        rng = random.Random(104)
        for _ in range(1000):
            high = rng.randrange(0, 200)
            middle = rng.randrange(high, 600)
            low = rng.randrange(middle, 1200)
            pricing = PricingTable(
                per_segment={H: high, M: middle, L: low},
                from_scratch_per_segment=rng.randrange(low, low + 800),
            )
            levels = {}
            for i in range(rng.randrange(0, 120)):
                levels[f"p{i}"] = rng.choice((H, M, L))

            summary = estimate_cost(levels, pricing)
            counts = {level: 0 for level in (H, M, L)}
            for level in levels.values():
                counts[level] += 1
            assert summary.per_level_counts == counts
            for level in (H, M, L):
                assert (
                    summary.per_level_cost[level]
                    == counts[level] * pricing.per_segment[level]
                )
            assert summary.total_editing_cost == sum(summary.per_level_cost.values())
            assert (
                summary.from_scratch_cost
                == len(levels) * pricing.from_scratch_per_segment
            )
            assert (
                summary.estimated_savings
                == summary.from_scratch_cost - summary.total_editing_cost
            )
            assert summary.estimated_savings >= 0


LEGAL = {
    ("pending", "claim"),
    ("in_review", "release"),
    ("in_review", "accept"),
    ("in_review", "edit"),
    ("in_review", "reject"),
}

DRIVE_PATH = {
    "pending": (),
    "in_review": ("claim",),
    "resolved_accept": ("claim", "accept"),
    "resolved_edit": ("claim", "edit"),
    "resolved_reject": ("claim", "reject"),
}


def drive(store, task_id, actions):
    version = store.get_task(task_id).version
    for action in actions:
        kwargs = {"edited_target": "Replacement target."} if action == "edit" else {}
        task = transition_task(store, task_id, action, version, **kwargs)
        version = task.version
    return version


def test_triage_state_machine(announce):
    with announce("triage state machine"):
        # Exhaustive enumeration against the live implementation.
        store = Store()
        try:
            pid = store.create_project("p", project_id="p").project_id
            store.ingest_corpus(pid, SAMPLE.read_bytes())
            run_pipeline(store, pid)
            tasks = iter(store.get_tasks(pid))
            for state in TASK_STATES:
                for action in ACTIONS:
                    task = next(tasks)
                    version = drive(store, task.task_id, DRIVE_PATH[state])
                    if (state, action) in LEGAL:
                        kwargs = (
                            {"edited_target": "Replacement target."}
                            if action == "edit"
                            else {}
                        )
                        after = transition_task(
                            store, task.task_id, action, version, **kwargs
                        )
                        assert after.state == TRANSITIONS[(state, action)]
                        assert after.state in TASK_STATES
                    else:
                        assert (state, action) not in TRANSITIONS
                        with pytest.raises(StateError):
                            transition_task(store, task.task_id, action, version)
                        assert store.get_task(task.task_id).state == state
        finally:
            store.close()

        # Sequence fuzzing over the (just verified) transition table.
        rng = random.Random(105)
        for _ in range(10_000):
            state = "pending"
            for _ in range(rng.randrange(1, 9)):
                action = rng.choice(ACTIONS)
                state = TRANSITIONS.get((state, action), state)
                assert state in TASK_STATES


def test_concurrent_claim_single_winner(announce, tmp_path):
    with announce("concurrent claim"):
        store = Store(str(tmp_path / "race.db"))
        try:
            pid = make_demo_project(store)
            run_pipeline(store, pid)
            task_id = store.get_tasks(pid)[0].task_id
            barrier = threading.Barrier(8)
            wins, conflicts = [], []

            def racer(name):
                barrier.wait()
                try:
                    transition_task(store, task_id, "claim", 0, assignee=name)
                    wins.append(name)
                except ConflictError:
                    conflicts.append(name)

            threads = [
                threading.Thread(target=racer, args=(f"rev{i}",)) for i in range(8)
            ]
            for thread in threads:
                thread.start()
            for thread in threads:
                thread.join()

            assert len(wins) == 1 and len(conflicts) == 7
            final = store.get_task(task_id)
            assert final.state == "in_review" and final.assignee == wins[0]
        finally:
            store.close()


def test_atomic_rollback_per_stage(announce):
    with announce("atomic rollback"):
        for stage in ("gec", "nmt", "ape", "qe"):
            store = Store()
            try:
                config = ProjectConfig.from_dict(
                    {"adapters": {stage: {"adapter_id": "fault"}}}
                )
                pid = make_demo_project(store, config=config)
                snapshot = store.dump()
                with pytest.raises(StageFailure):
                    run_pipeline(store, pid)
                assert store.dump() == snapshot
            finally:
                store.close()


def test_api_contract(announce):
    with announce("api contract"):
        store = Store()
        try:
            client = TestClient(create_app(store))

            body = client.get("/api/health").json()
            check_schema(body, "health.json")

            response = client.post(
                "/api/projects", json={"name": "demo", "project_id": "demo"}
            )
            assert response.status_code == 201
            check_schema(response.json(), "project.json")

            listing = client.get("/api/projects")
            assert listing.status_code == 200
            check_schema(listing.json(), "project_list.json")
            check_schema(client.get("/api/projects/demo").json(), "project.json")

            response = client.post(
                "/api/projects/demo/corpus",
                content=DEMO_CORPUS,
                headers={"content-type": "text/plain"},
            )
            assert response.status_code == 200
            check_schema(response.json(), "ingest.json")
            assert response.json()["ingested"] == 7

            report = client.post("/api/projects/demo/run")
            assert report.status_code == 200
            check_schema(report.json(), "report.json")
            assert report.json()["level_histogram"] == {"low": 1, "middle": 3, "high": 1}
            check_schema(client.get("/api/projects/demo/report").json(), "report.json")

            preview = client.get("/api/projects/demo/preview?stage=filter&n=3")
            assert preview.status_code == 200
            check_schema(preview.json(), "preview.json")

            page = client.get("/api/projects/demo/tasks")
            assert page.status_code == 200
            check_schema(page.json(), "task_page.json")
            assert page.json()["total"] == 4

            claimed = client.post(
                "/api/tasks/t:demo:2/claim",
                json={"expected_version": 0, "assignee": "rev"},
            )
            assert claimed.status_code == 200
            check_schema(claimed.json(), "task.json")

            released = client.post(
                "/api/tasks/t:demo:2/release", json={"expected_version": 1}
            )
            assert released.status_code == 200
            check_schema(released.json(), "task.json")

            client.post("/api/tasks/t:demo:2/claim", json={"expected_version": 2})
            resolved = client.post(
                "/api/tasks/t:demo:2/resolve",
                json={"action": "accept", "expected_version": 3},
            )
            assert resolved.status_code == 200
            check_schema(resolved.json(), "task.json")
            assert resolved.json()["state"] == "resolved_accept"

            export = client.get("/api/projects/demo/export")
            assert export.status_code == 200
            for line in export.content.decode("utf-8").splitlines():
                check_schema(json.loads(line), "export_record.json")
            assert (
                client.get("/api/projects/demo/export?format=tsv").status_code == 200
            )

            # Every error code maps to its contract status.
            cases = [
                ("validation", 400,
                 lambda: client.post("/api/projects", json={"name": 7})),
                ("format", 400,
                 lambda: client.post(
                     "/api/projects/fresh/corpus", content=b"\xff",
                     headers={"content-type": "text/plain"})),
                ("not_found", 404, lambda: client.get("/api/projects/ghost")),
                ("conflict", 409,
                 lambda: client.post(
                     "/api/tasks/t:demo:2/claim", json={"expected_version": 0})),
                ("state", 422,
                 lambda: client.get("/api/projects/fresh/export")),
                ("stage_failure", 502,
                 lambda: client.post("/api/projects/faulty/run")),
            ]
            client.post("/api/projects", json={"name": "fresh", "project_id": "fresh"})
            client.post(
                "/api/projects",
                json={
                    "name": "faulty",
                    "project_id": "faulty",
                    "config": {"adapters": {"qe": {"adapter_id": "fault"}}},
                },
            )
            client.post(
                "/api/projects/fresh/corpus",
                content=b"some words here.\n",
                headers={"content-type": "text/plain"},
            )
            client.post(
                "/api/projects/faulty/corpus",
                content=b"some words here.\n",
                headers={"content-type": "text/plain"},
            )
            for code, status, call in cases:
                response = call()
                assert response.status_code == status, (code, response.text)
                check_schema(response.json(), "error.json")
                assert response.json()["code"] == code
        finally:
            store.close()
