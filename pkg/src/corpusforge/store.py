"""Durable single-file persistence built on sqlite3.

One database file per deployment holds projects, segments, pairs, review
tasks, and reports.  All writes run in explicit transactions under a
process-wide lock; entity updates use compare-and-set on version columns
so concurrent writers never lose updates.  Run results are committed in
one transaction, which is what makes pipeline abort trivially atomic:
nothing of a failed run ever reaches the database.

Per-run progress counters live in a JSON sidecar next to the database,
not in the database itself, so mid-run polling never contends with the
run's own transaction and crash leftovers cannot corrupt durable state.
"""

from __future__ import annotations

import json
import os
import re
import sqlite3
import threading
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone

from corpusforge.config import ProjectConfig
from corpusforge.domain import (
    PairStatus,
    QualityLevel,
    QualityScore,
    Segment,
    SentencePair,
    StageTrace,
)
from corpusforge.errors import (
    ConflictError,
    FormatError,
    NotFoundError,
    StateError,
    ValidationError,
)
from corpusforge.triage import TASK_STATES, ReviewTask

FORMAT_VERSION = 1

DEFAULT_EXPORT_STATUSES = frozenset(
    {PairStatus.AUTO_ACCEPTED, PairStatus.ACCEPTED, PairStatus.EDITED}
)

_PROJECT_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]{0,63}$")

_SCHEMA = """
CREATE TABLE IF NOT EXISTS meta (
    key TEXT PRIMARY KEY,
    value TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS projects (
    project_id TEXT PRIMARY KEY,
    name TEXT NOT NULL,
    config_json TEXT NOT NULL,
    created_at TEXT NOT NULL,
    corpus_ingested INTEGER NOT NULL DEFAULT 0,
    has_run INTEGER NOT NULL DEFAULT 0,
    run_active INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS segments (
    project_id TEXT NOT NULL,
    segment_id TEXT NOT NULL,
    origin_line INTEGER NOT NULL,
    text TEXT NOT NULL,
    lang TEXT NOT NULL,
    verdict TEXT,
    reject_reason TEXT,
    PRIMARY KEY (project_id, segment_id)
);
CREATE TABLE IF NOT EXISTS pairs (
    project_id TEXT NOT NULL,
    pair_id TEXT NOT NULL,
    origin_line INTEGER NOT NULL,
    source TEXT NOT NULL,
    target TEXT NOT NULL,
    raw_target TEXT NOT NULL,
    stage_trace TEXT NOT NULL,
    metrics TEXT,
    final_score REAL,
    level TEXT,
    status TEXT NOT NULL,
    version INTEGER NOT NULL DEFAULT 0,
    PRIMARY KEY (project_id, pair_id)
);
CREATE TABLE IF NOT EXISTS tasks (
    task_id TEXT PRIMARY KEY,
    project_id TEXT NOT NULL,
    pair_id TEXT NOT NULL,
    level TEXT NOT NULL,
    price INTEGER NOT NULL,
    state TEXT NOT NULL,
    assignee TEXT,
    edited_target TEXT,
    version INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS reports (
    project_id TEXT PRIMARY KEY,
    report_json TEXT NOT NULL
);
"""


def _utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class ProjectRecord:
    project_id: str
    name: str
    config: ProjectConfig
    created_at: str
    corpus_ingested: bool = False
    has_run: bool = False
    run_active: bool = False

    def to_dict(self) -> dict:
        return {
            "project_id": self.project_id,
            "name": self.name,
            "created_at": self.created_at,
            "corpus_ingested": self.corpus_ingested,
            "has_run": self.has_run,
            "run_active": self.run_active,
            "config": self.config.to_dict(),
        }


class Store:
    """Embedded store; one instance per database file, shareable across threads."""

    def __init__(self, path: str = ":memory:"):
        self.path = path
        self._lock = threading.Lock()
        self._memory_progress: dict[str, dict] = {}
        self._conn = sqlite3.connect(
            path, check_same_thread=False, isolation_level=None
        )
        self._conn.row_factory = sqlite3.Row
        with self._lock:
            if path != ":memory:":
                self._conn.execute("PRAGMA journal_mode=WAL")
            self._conn.execute("PRAGMA foreign_keys=ON")
            self._conn.execute("BEGIN IMMEDIATE")
            try:
                for statement in _SCHEMA.split(";\n"):
                    if statement.strip():
                        self._conn.execute(statement)
                row = self._conn.execute(
                    "SELECT value FROM meta WHERE key='format_version'"
                ).fetchone()
                if row is None:
                    self._conn.execute(
                        "INSERT INTO meta (key, value) VALUES ('format_version', ?)",
                        (str(FORMAT_VERSION),),
                    )
                elif int(row["value"]) != FORMAT_VERSION:
                    raise FormatError(
                        f"storage format version {row['value']} is not supported"
                    )
                # A lease can only be stale here: no run survives a restart.
                self._conn.execute("UPDATE projects SET run_active=0 WHERE run_active=1")
                self._conn.execute("COMMIT")
            except BaseException:
                self._conn.execute("ROLLBACK")
                raise

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    # -- transaction helper -------------------------------------------------

    def _tx(self):
        return _Transaction(self)

    # -- progress sidecar ---------------------------------------------------

    def _progress_path(self, project_id: str) -> str | None:
        if self.path == ":memory:":
            return None
        return os.path.join(
            os.path.dirname(os.path.abspath(self.path)), f"progress-{project_id}.json"
        )

    def set_progress(self, project_id: str, progress: dict) -> None:
        path = self._progress_path(project_id)
        if path is None:
            self._memory_progress[project_id] = dict(progress)
            return
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as handle:
            json.dump(progress, handle)
        os.replace(tmp, path)

    def get_progress(self, project_id: str) -> dict | None:
        path = self._progress_path(project_id)
        if path is None:
            return self._memory_progress.get(project_id)
        try:
            with open(path, encoding="utf-8") as handle:
                return json.load(handle)
        except (FileNotFoundError, ValueError):
            return None

    def clear_progress(self, project_id: str) -> None:
        path = self._progress_path(project_id)
        if path is None:
            self._memory_progress.pop(project_id, None)
            return
        try:
            os.remove(path)
        except FileNotFoundError:
            pass

    # -- projects -----------------------------------------------------------

    def create_project(
        self,
        name: str,
        config: ProjectConfig | None = None,
        project_id: str | None = None,
    ) -> ProjectRecord:
        if not name or not name.strip():
            raise ValidationError("project name must be non-empty")
        config = config or ProjectConfig()
        config.validate()
        if project_id is None:
            project_id = uuid.uuid4().hex[:12]
        if not _PROJECT_ID_RE.match(project_id):
            raise ValidationError(
                f"project id {project_id!r} must match {_PROJECT_ID_RE.pattern}"
            )
        record = ProjectRecord(
            project_id=project_id,
            name=name,
            config=config,
            created_at=_utc_now(),
        )
        with self._tx() as conn:
            existing = conn.execute(
                "SELECT 1 FROM projects WHERE project_id=?", (project_id,)
            ).fetchone()
            if existing:
                raise ConflictError(f"project {project_id!r} already exists")
            conn.execute(
                "INSERT INTO projects (project_id, name, config_json, created_at) "
                "VALUES (?, ?, ?, ?)",
                (
                    project_id,
                    name,
                    json.dumps(config.to_dict(), ensure_ascii=False),
                    record.created_at,
                ),
            )
        return record

    def _row_to_project(self, row: sqlite3.Row) -> ProjectRecord:
        return ProjectRecord(
            project_id=row["project_id"],
            name=row["name"],
            config=ProjectConfig.from_dict(json.loads(row["config_json"])),
            created_at=row["created_at"],
            corpus_ingested=bool(row["corpus_ingested"]),
            has_run=bool(row["has_run"]),
            run_active=bool(row["run_active"]),
        )

    def get_project(self, project_id: str) -> ProjectRecord:
        with self._lock:
            row = self._conn.execute(
                "SELECT * FROM projects WHERE project_id=?", (project_id,)
            ).fetchone()
        if row is None:
            raise NotFoundError(f"project {project_id!r} does not exist")
        return self._row_to_project(row)

    def list_projects(self) -> list[ProjectRecord]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT * FROM projects ORDER BY created_at, project_id"
            ).fetchall()
        return [self._row_to_project(row) for row in rows]

    # -- corpus ingestion ---------------------------------------------------

    def ingest_corpus(self, project_id: str, payload: bytes, format: str = "txt") -> int:
        if format not in ("txt", "jsonl"):
            raise ValidationError(f"unknown corpus format {format!r}")
        project = self.get_project(project_id)
        if project.has_run:
            raise ConflictError(
                f"project {project_id!r} already ran; corpus is frozen"
            )
        try:
            text = payload.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError(
                f"payload is not valid UTF-8 at byte {exc.start}",
                details={"byte_offset": exc.start},
            ) from None

        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()

        segments: list[Segment] = []
        seen_ids: set[str] = set()
        for index, line in enumerate(lines):
            origin_line = index + 1
            if format == "txt":
                segment_id = f"{project_id}:{origin_line}"
                segment_text = line
            else:
                if not line.strip():
                    raise FormatError(
                        f"line {origin_line}: blank line in jsonl corpus",
                        details={"line": origin_line},
                    )
                try:
                    record = json.loads(line)
                except ValueError:
                    raise FormatError(
                        f"line {origin_line}: invalid JSON",
                        details={"line": origin_line},
                    ) from None
                if not isinstance(record, dict):
                    raise FormatError(
                        f"line {origin_line}: expected a JSON object",
                        details={"line": origin_line},
                    )
                # "source" as fallback lets exported datasets re-ingest.
                segment_text = record.get("text", record.get("source"))
                if not isinstance(segment_text, str):
                    raise FormatError(
                        f'line {origin_line}: missing "text" field',
                        details={"line": origin_line},
                    )
                segment_id = record.get("id") or f"{project_id}:{origin_line}"
                if not isinstance(segment_id, str):
                    raise FormatError(
                        f'line {origin_line}: "id" must be a string',
                        details={"line": origin_line},
                    )
            if segment_id in seen_ids:
                raise ValidationError(f"duplicate segment id {segment_id!r}")
            seen_ids.add(segment_id)
            segment = Segment(
                id=segment_id,
                text=segment_text,
                lang=project.config.source_lang,
                origin_line=origin_line,
            )
            segment.validate()
            segments.append(segment)

        with self._tx() as conn:
            row = conn.execute(
                "SELECT has_run, run_active FROM projects WHERE project_id=?",
                (project_id,),
            ).fetchone()
            if row is None:
                raise NotFoundError(f"project {project_id!r} does not exist")
            if row["has_run"]:
                raise ConflictError(
                    f"project {project_id!r} already ran; corpus is frozen"
                )
            if row["run_active"]:
                raise ConflictError(f"project {project_id!r} has a run in progress")
            conn.execute("DELETE FROM segments WHERE project_id=?", (project_id,))
            conn.execute("DELETE FROM pairs WHERE project_id=?", (project_id,))
            conn.execute("DELETE FROM tasks WHERE project_id=?", (project_id,))
            conn.execute("DELETE FROM reports WHERE project_id=?", (project_id,))
            conn.executemany(
                "INSERT INTO segments (project_id, segment_id, origin_line, text, lang) "
                "VALUES (?, ?, ?, ?, ?)",
                [
                    (project_id, s.id, s.origin_line, s.text, s.lang)
                    for s in segments
                ],
            )
            conn.execute(
                "UPDATE projects SET corpus_ingested=1 WHERE project_id=?",
                (project_id,),
            )
        return len(segments)

    def get_segments(self, project_id: str) -> list[Segment]:
        self.get_project(project_id)
        with self._lock:
            rows = self._conn.execute(
                "SELECT * FROM segments WHERE project_id=? ORDER BY origin_line",
                (project_id,),
            ).fetchall()
        return [
            Segment(
                id=row["segment_id"],
                text=row["text"],
                lang=row["lang"],
                origin_line=row["origin_line"],
                verdict=row["verdict"],
                reject_reason=row["reject_reason"],
            )
            for row in rows
        ]

    def export_corpus(self, project_id: str, format: str = "txt") -> bytes:
        if format != "txt":
            raise ValidationError(f"unsupported corpus export format {format!r}")
        segments = self.get_segments(project_id)
        if not segments:
            return b""
        return ("\n".join(segment.text for segment in segments) + "\n").encode("utf-8")

    # -- run lease and atomic commit ----------------------------------------

    def begin_run(self, project_id: str) -> None:
        with self._tx() as conn:
            row = conn.execute(
                "SELECT corpus_ingested FROM projects WHERE project_id=?",
                (project_id,),
            ).fetchone()
            if row is None:
                raise NotFoundError(f"project {project_id!r} does not exist")
            if not row["corpus_ingested"]:
                raise StateError(f"project {project_id!r} has no ingested corpus")
            cursor = conn.execute(
                "UPDATE projects SET run_active=1 WHERE project_id=? AND run_active=0",
                (project_id,),
            )
            if cursor.rowcount == 0:
                raise ConflictError(f"project {project_id!r} already has a run in progress")

    def abort_run(self, project_id: str) -> None:
        with self._tx() as conn:
            conn.execute(
                "UPDATE projects SET run_active=0 WHERE project_id=?", (project_id,)
            )
        self.clear_progress(project_id)

    def replace_run_results(
        self,
        project_id: str,
        segments: list[Segment],
        pairs: list[SentencePair],
        tasks: list[ReviewTask],
        report: dict,
    ) -> None:
        """Commit a completed run in one transaction and release the lease."""
        for pair in pairs:
            pair.validate()
        for task in tasks:
            task.validate()
        with self._tx() as conn:
            row = conn.execute(
                "SELECT run_active FROM projects WHERE project_id=?", (project_id,)
            ).fetchone()
            if row is None:
                raise NotFoundError(f"project {project_id!r} does not exist")
            if not row["run_active"]:
                raise StateError(f"project {project_id!r} has no active run to commit")
            conn.executemany(
                "UPDATE segments SET verdict=?, reject_reason=? "
                "WHERE project_id=? AND segment_id=?",
                [
                    (s.verdict, s.reject_reason, project_id, s.id)
                    for s in segments
                ],
            )
            conn.execute("DELETE FROM pairs WHERE project_id=?", (project_id,))
            conn.execute("DELETE FROM tasks WHERE project_id=?", (project_id,))
            conn.execute("DELETE FROM reports WHERE project_id=?", (project_id,))
            conn.executemany(
                "INSERT INTO pairs (project_id, pair_id, origin_line, source, target, "
                "raw_target, stage_trace, metrics, final_score, level, status, version) "
                "VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)",
                [self._pair_row(project_id, pair) for pair in pairs],
            )
            conn.executemany(
                "INSERT INTO tasks (task_id, project_id, pair_id, level, price, state, "
                "assignee, edited_target, version) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)",
                [
                    (
                        t.task_id,
                        t.project_id,
                        t.pair_id,
                        t.level.value,
                        t.price,
                        t.state,
                        t.assignee,
                        t.edited_target,
                        t.version,
                    )
                    for t in tasks
                ],
            )
            conn.execute(
                "INSERT INTO reports (project_id, report_json) VALUES (?, ?)",
                (project_id, json.dumps(report, ensure_ascii=False)),
            )
            conn.execute(
                "UPDATE projects SET has_run=1, run_active=0 WHERE project_id=?",
                (project_id,),
            )
        self.clear_progress(project_id)

    # -- pairs ---------------------------------------------------------------

    @staticmethod
    def _pair_row(project_id: str, pair: SentencePair) -> tuple:
        return (
            project_id,
            pair.segment_id,
            pair.origin_line,
            pair.source,
            pair.target,
            pair.raw_target,
            json.dumps([t.to_record() for t in pair.stage_trace]),
            json.dumps(pair.score.metric_scores) if pair.score else None,
            pair.score.final if pair.score else None,
            pair.level.value if pair.level else None,
            pair.status.value,
            pair.version,
        )

    @staticmethod
    def _row_to_pair(row: sqlite3.Row) -> SentencePair:
        metrics = json.loads(row["metrics"]) if row["metrics"] else None
        score = (
            QualityScore(metric_scores=metrics, final=row["final_score"])
            if metrics is not None
            else None
        )
        pair = SentencePair(
            segment_id=row["pair_id"],
            source=row["source"],
            target=row["target"],
            raw_target=row["raw_target"],
            stage_trace=[StageTrace.from_record(t) for t in json.loads(row["stage_trace"])],
            score=score,
            level=QualityLevel.parse(row["level"]) if row["level"] else None,
            status=PairStatus.parse(row["status"]),
            origin_line=row["origin_line"],
            version=row["version"],
        )
        pair.validate()
        return pair

    def get_pairs(self, project_id: str) -> list[SentencePair]:
        self.get_project(project_id)
        with self._lock:
            rows = self._conn.execute(
                "SELECT * FROM pairs WHERE project_id=? ORDER BY origin_line",
                (project_id,),
            ).fetchall()
        return [self._row_to_pair(row) for row in rows]

    def get_pair(self, project_id: str, pair_id: str) -> SentencePair:
        with self._lock:
            row = self._conn.execute(
                "SELECT * FROM pairs WHERE project_id=? AND pair_id=?",
                (project_id, pair_id),
            ).fetchone()
        if row is None:
            raise NotFoundError(f"pair {pair_id!r} does not exist")
        return self._row_to_pair(row)

    # -- tasks ---------------------------------------------------------------

    @staticmethod
    def _row_to_task(row: sqlite3.Row) -> ReviewTask:
        return ReviewTask(
            task_id=row["task_id"],
            project_id=row["project_id"],
            pair_id=row["pair_id"],
            level=QualityLevel.parse(row["level"]),
            price=row["price"],
            state=row["state"],
            assignee=row["assignee"],
            edited_target=row["edited_target"],
            version=row["version"],
        )

    def get_task(self, task_id: str) -> ReviewTask:
        with self._lock:
            row = self._conn.execute(
                "SELECT * FROM tasks WHERE task_id=?", (task_id,)
            ).fetchone()
        if row is None:
            raise NotFoundError(f"task {task_id!r} does not exist")
        return self._row_to_task(row)

    def get_tasks(
        self,
        project_id: str,
        level: QualityLevel | None = None,
        state: str | None = None,
    ) -> list[ReviewTask]:
        self.get_project(project_id)
        query = (
            "SELECT t.* FROM tasks t JOIN pairs p "
            "ON p.project_id = t.project_id AND p.pair_id = t.pair_id "
            "WHERE t.project_id=?"
        )
        params: list = [project_id]
        if level is not None:
            query += " AND t.level=?"
            params.append(level.value)
        if state is not None:
            if state not in TASK_STATES:
                raise ValidationError(f"unknown task state {state!r}")
            query += " AND t.state=?"
            params.append(state)
        query += " ORDER BY p.origin_line"
        with self._lock:
            rows = self._conn.execute(query, params).fetchall()
        return [self._row_to_task(row) for row in rows]

    def live_task_pair_ids(self, project_id: str) -> frozenset:
        with self._lock:
            rows = self._conn.execute(
                "SELECT pair_id FROM tasks WHERE project_id=? AND state IN "
                "('pending', 'in_review')",
                (project_id,),
            ).fetchall()
        return frozenset(row["pair_id"] for row in rows)

    def update_task_and_pair(
        self,
        task: ReviewTask,
        pair: SentencePair,
        expected_task_version: int,
        expected_pair_version: int,
    ) -> None:
        """Compare-and-set both entities in one transaction; all or nothing."""
        with self._tx() as conn:
            cursor = conn.execute(
                "UPDATE tasks SET state=?, assignee=?, edited_target=?, version=? "
                "WHERE task_id=? AND version=?",
                (
                    task.state,
                    task.assignee,
                    task.edited_target,
                    task.version,
                    task.task_id,
                    expected_task_version,
                ),
            )
            if cursor.rowcount == 0:
                exists = conn.execute(
                    "SELECT version FROM tasks WHERE task_id=?", (task.task_id,)
                ).fetchone()
                if exists is None:
                    raise NotFoundError(f"task {task.task_id!r} does not exist")
                raise ConflictError(
                    f"task {task.task_id} is at version {exists['version']}, "
                    f"not {expected_task_version}",
                    details={"current_version": exists["version"]},
                )
            row = self._pair_row(task.project_id, pair)
            cursor = conn.execute(
                "UPDATE pairs SET source=?, target=?, raw_target=?, stage_trace=?, "
                "metrics=?, final_score=?, level=?, status=?, version=? "
                "WHERE project_id=? AND pair_id=? AND version=?",
                row[3:] + (task.project_id, pair.segment_id, expected_pair_version),
            )
            if cursor.rowcount == 0:
                raise ConflictError(
                    f"pair {pair.segment_id} changed concurrently",
                    details={"pair_id": pair.segment_id},
                )

    # -- reports --------------------------------------------------------------

    def get_report(self, project_id: str) -> dict | None:
        self.get_project(project_id)
        with self._lock:
            row = self._conn.execute(
                "SELECT report_json FROM reports WHERE project_id=?", (project_id,)
            ).fetchone()
        return json.loads(row["report_json"]) if row else None

    # -- export ---------------------------------------------------------------

    def export_dataset(
        self,
        project_id: str,
        format: str = "jsonl",
        include: frozenset = DEFAULT_EXPORT_STATUSES,
    ) -> bytes:
        if format not in ("jsonl", "tsv"):
            raise ValidationError(f"unknown export format {format!r}")
        include = frozenset(
            PairStatus.parse(s) if isinstance(s, str) else s for s in include
        )
        project = self.get_project(project_id)
        if not project.has_run:
            raise StateError(f"project {project_id!r} has no completed run")
        pricing = project.config.pricing
        pairs = [p for p in self.get_pairs(project_id) if p.status in include]
        lines = []
        for pair in pairs:
            score = pair.score.final if pair.score else None
            level = pair.level.value if pair.level else None
            cost = pricing.per_segment[pair.level] if pair.level else 0
            if format == "jsonl":
                record = {
                    "id": pair.segment_id,
                    "source": pair.source,
                    "target": pair.target,
                    "score": score,
                    "level": level,
                    "status": pair.status.value,
                    "metrics": pair.score.metric_scores if pair.score else {},
                    "cost": cost,
                }
                lines.append(json.dumps(record, ensure_ascii=False, separators=(",", ":")))
            else:
                lines.append(
                    "\t".join(
                        [
                            pair.segment_id,
                            pair.source,
                            pair.target,
                            "" if score is None else str(score),
                            level or "",
                            pair.status.value,
                        ]
                    )
                )
        if not lines:
            return b""
        return ("\n".join(lines) + "\n").encode("utf-8")

    # -- snapshots -------------------------------------------------------------

    def dump(self) -> bytes:
        """Canonical logical snapshot of all durable state, for byte comparison.

        The run lease (run_active) and progress sidecars are deliberately
        not part of the snapshot: they are scratch state, not results.
        """
        with self._lock:
            snapshot = {}
            snapshot["projects"] = [
                dict(row)
                for row in self._conn.execute(
                    "SELECT project_id, name, config_json, created_at, corpus_ingested, "
                    "has_run FROM projects ORDER BY project_id"
                )
            ]
            snapshot["segments"] = [
                dict(row)
                for row in self._conn.execute(
                    "SELECT * FROM segments ORDER BY project_id, segment_id"
                )
            ]
            snapshot["pairs"] = [
                dict(row)
                for row in self._conn.execute(
                    "SELECT * FROM pairs ORDER BY project_id, pair_id"
                )
            ]
            snapshot["tasks"] = [
                dict(row)
                for row in self._conn.execute("SELECT * FROM tasks ORDER BY task_id")
            ]
            snapshot["reports"] = [
                dict(row)
                for row in self._conn.execute(
                    "SELECT * FROM reports ORDER BY project_id"
                )
            ]
        return json.dumps(snapshot, sort_keys=True, ensure_ascii=False).encode("utf-8")


class _Transaction:
    """BEGIN IMMEDIATE ... COMMIT/ROLLBACK under the store lock."""

    def __init__(self, store: Store):
        self._store = store

    def __enter__(self) -> sqlite3.Connection:
        self._store._lock.acquire()
        try:
            self._store._conn.execute("BEGIN IMMEDIATE")
        except BaseException:
            self._store._lock.release()
            raise
        return self._store._conn

    def __exit__(self, exc_type, exc, tb) -> bool:
        try:
            if exc_type is None:
                self._store._conn.execute("COMMIT")
            else:
                self._store._conn.execute("ROLLBACK")
        finally:
            self._store._lock.release()
        return False
