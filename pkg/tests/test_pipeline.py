import pytest

from corpusforge import adapters, pipeline
from corpusforge.config import ProjectConfig
from corpusforge.errors import ConflictError, StageFailure, StateError, ValidationError
from corpusforge.pipeline import preview_stage, run_pipeline, validate_report
from tests.conftest import DEMO_CORPUS, make_demo_project


def fault_config(stage):
    return ProjectConfig.from_dict({"adapters": {stage: {"adapter_id": "fault"}}})


def test_demo_run_report(mem_store):
    pid = make_demo_project(mem_store)
    report = run_pipeline(mem_store, pid)
    assert report["stage_counts"] == {
        "ingested": 7,
        "filtered_out": 2,
        "gec_changed": 0,
        "translated": 5,
        "ape_changed": 0,
        "scored": 5,
    }
    assert report["filter_rejections"] == {"duplicate": 1, "empty": 1}
    assert report["level_histogram"] == {"low": 1, "middle": 3, "high": 1}
    assert report["cost"]["total_editing_cost"] == 600
    assert report["cost"]["from_scratch_cost"] == 2500
    assert report["cost"]["estimated_savings"] == 1900
    assert report["adapter_ids"] == {
        "gec": "builtin-gec",
        "nmt": "builtin-nmt",
        "ape": "builtin-ape",
        "qe": "builtin-qe",
    }
    assert report["config_fingerprint"] == mem_store.get_project(pid).config.fingerprint()
    assert mem_store.get_report(pid) == report


def test_demo_run_pairs_and_tasks(mem_store):
    pid = make_demo_project(mem_store)
    run_pipeline(mem_store, pid)
    pairs = {p.segment_id: p for p in mem_store.get_pairs(pid)}
    first = pairs["demo:1"]
    assert first.source == "Good morning."
    assert first.target == "morning Good."
    assert first.score.final == 1.0
    assert first.level.value == "high"
    assert first.status.value == "auto_accepted"
    assert [t.stage for t in first.stage_trace] == ["gec", "nmt", "ape", "qe"]
    assert [t.adapter_id for t in first.stage_trace] == [
        "builtin-gec", "builtin-nmt", "builtin-ape", "builtin-qe",
    ]
    assert [t.changed for t in first.stage_trace] == [False, True, False, False]

    tasks = mem_store.get_tasks(pid)
    assert [(t.task_id, t.level.value, t.price) for t in tasks] == [
        ("t:demo:2", "middle", 100),
        ("t:demo:3", "middle", 100),
        ("t:demo:4", "middle", 100),
        ("t:demo:5", "low", 300),
    ]


def test_empty_corpus_all_zero_no_adapter_calls(mem_store, monkeypatch):
    pid = mem_store.create_project("p", project_id="p").project_id
    mem_store.ingest_corpus(pid, b"\n\n")

    def forbid(*args, **kwargs):
        raise AssertionError("adapter invoked for empty retained set")

    monkeypatch.setattr(pipeline, "invoke_stage", forbid)
    report = run_pipeline(mem_store, pid)
    assert report["stage_counts"] == {
        "ingested": 2, "filtered_out": 2, "gec_changed": 0,
        "translated": 0, "ape_changed": 0, "scored": 0,
    }
    assert report["level_histogram"] == {"low": 0, "middle": 0, "high": 0}
    assert report["cost"]["estimated_savings"] == 0
    assert mem_store.get_tasks(pid) == []


def test_all_duplicates_scores_one(mem_store):
    pid = mem_store.create_project("p", project_id="p").project_id
    mem_store.ingest_corpus(pid, b"hello world.\nhello world.\nhello world.\n")
    report = run_pipeline(mem_store, pid)
    assert report["stage_counts"]["scored"] == 1
    assert report["filter_rejections"] == {"duplicate": 2}
    # n=1 leaves no room for high/low fractions.
    assert report["level_histogram"] == {"low": 0, "middle": 1, "high": 0}


def test_run_requires_corpus(mem_store):
    pid = mem_store.create_project("p", project_id="p").project_id
    with pytest.raises(StateError):
        run_pipeline(mem_store, pid)


def test_concurrent_run_conflicts_and_keeps_lease(mem_store):
    pid = make_demo_project(mem_store)
    mem_store.begin_run(pid)
    with pytest.raises(ConflictError):
        run_pipeline(mem_store, pid)
    # The losing attempt must not release the winner's lease.
    with pytest.raises(ConflictError):
        mem_store.begin_run(pid)
    mem_store.abort_run(pid)


@pytest.mark.parametrize("stage", ["gec", "nmt", "ape", "qe"])
def test_failed_stage_leaves_store_untouched(mem_store, stage):
    pid = make_demo_project(mem_store, config=fault_config(stage))
    before = mem_store.dump()
    with pytest.raises(StageFailure):
        run_pipeline(mem_store, pid)
    assert mem_store.dump() == before
    assert mem_store.get_progress(pid) is None
    # Lease released: the project can run again.
    mem_store.begin_run(pid)
    mem_store.abort_run(pid)


def test_progress_written_then_cleared(mem_store):
    pid = make_demo_project(mem_store)
    seen = []
    original = mem_store.set_progress

    def spy(project_id, payload):
        seen.append(payload["stage"])
        original(project_id, payload)

    mem_store.set_progress = spy
    try:
        run_pipeline(mem_store, pid)
    finally:
        mem_store.set_progress = original
    assert seen == ["filter", "gec", "nmt", "ape", "qe", "quantize"]
    assert mem_store.get_progress(pid) is None


def test_rerun_is_rejected(mem_store):
    pid = make_demo_project(mem_store)
    run_pipeline(mem_store, pid)
    # The corpus lock means the only path to a second run is a fresh project.
    report = mem_store.get_report(pid)
    assert report["stage_counts"]["ingested"] == 7
    mem_store.begin_run(pid)
    mem_store.abort_run(pid)


def test_validate_report_rejects_inconsistency():
    report = {
        "stage_counts": {"ingested": 5, "filtered_out": 1, "scored": 3},
        "level_histogram": {"low": 1, "middle": 1, "high": 1},
    }
    with pytest.raises(ValidationError):
        validate_report(report)
    report["stage_counts"]["scored"] = 4
    with pytest.raises(ValidationError):
        validate_report(report)
    report["level_histogram"]["middle"] = 2
    validate_report(report)


def test_preview_filter(mem_store):
    pid = make_demo_project(mem_store)
    rows = preview_stage(mem_store, pid, "filter", 7)
    assert [r["output"] for r in rows] == [
        "retained", "retained", "retained", "retained", "retained",
        "rejected:duplicate", "rejected:empty",
    ]
    assert rows[0] == {"id": "demo:1", "input": "Good morning.", "output": "retained"}
    assert len(preview_stage(mem_store, pid, "filter", 2)) == 2
    assert len(preview_stage(mem_store, pid, "filter", 99)) == 7


def test_preview_gec_matches_direct_call(mem_store):
    pid = make_demo_project(mem_store)
    rows = preview_stage(mem_store, pid, "gec", 3)
    config = mem_store.get_project(pid).config
    texts = [r["input"] for r in rows]
    direct = adapters.gec_correct(texts, config.adapters["gec"], config.source_lang)
    assert [r["output"] for r in rows] == direct


def test_preview_nmt_uses_gec_output(mem_store):
    pid = mem_store.create_project("p", project_id="p").project_id
    mem_store.ingest_corpus(pid, b"Hold on , please.\n")
    rows = preview_stage(mem_store, pid, "nmt", 5)
    assert rows[0]["input"] == "Hold on, please."  # post-GEC, not the raw line
    config = mem_store.get_project(pid).config
    direct = adapters.nmt_translate(
        ["Hold on, please."], config.adapters["nmt"],
        config.source_lang, config.target_lang,
    )
    assert rows[0]["output"] == direct[0]


def test_preview_ape_qe_need_pairs(mem_store):
    pid = make_demo_project(mem_store)
    for stage in ("ape", "qe"):
        with pytest.raises(StateError) as exc:
            preview_stage(mem_store, pid, stage, 3)
        assert exc.value.details == {"missing_stage": "nmt"}
    run_pipeline(mem_store, pid)
    ape_rows = preview_stage(mem_store, pid, "ape", 2)
    pairs = mem_store.get_pairs(pid)
    assert ape_rows[0]["input"] == pairs[0].raw_target
    qe_rows = preview_stage(mem_store, pid, "qe", 2)
    assert qe_rows[0]["input"] == pairs[0].target
    assert qe_rows[0]["output"] == pairs[0].score.final


def test_preview_validation(mem_store):
    pid = make_demo_project(mem_store)
    with pytest.raises(ValidationError):
        preview_stage(mem_store, pid, "quantize", 3)
    with pytest.raises(ValidationError):
        preview_stage(mem_store, pid, "filter", 0)
    empty = mem_store.create_project("e", project_id="e").project_id
    with pytest.raises(StateError):
        preview_stage(mem_store, empty, "filter", 3)


def test_preview_persists_nothing(mem_store):
    pid = make_demo_project(mem_store)
    before = mem_store.dump()
    preview_stage(mem_store, pid, "filter", 7)
    preview_stage(mem_store, pid, "nmt", 3)
    assert mem_store.dump() == before
