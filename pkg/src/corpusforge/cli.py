"""Command-line interface: the headless path through the same engine.

Exit codes: 0 success, 1 validation/format (and any other domain error),
2 stage failure.  `run` chains ingest, pipeline, and export in one
process against a throwaway data directory unless one is given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

from corpusforge.config import ProjectConfig
from corpusforge.domain import PairStatus
from corpusforge.errors import CorpusForgeError, StageFailure, ValidationError
from corpusforge.pipeline import preview_stage, run_pipeline
from corpusforge.store import DEFAULT_EXPORT_STATUSES, Store

DB_FILENAME = "corpusforge.db"


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the CLI contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _resolve_data_dir(value: str | None) -> str | None:
    return value or os.environ.get("CORPUSFORGE_DATA_DIR") or None


def _open_store(data_dir: str) -> Store:
    os.makedirs(data_dir, exist_ok=True)
    return Store(os.path.join(data_dir, DB_FILENAME))


def _load_config(path: str | None) -> ProjectConfig | None:
    if path is None:
        return None
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except FileNotFoundError:
        raise ValidationError(f"config file {path!r} does not exist") from None
    except ValueError as exc:
        raise ValidationError(f"config file {path!r} is not valid JSON: {exc}") from None
    return ProjectConfig.from_dict(data)


def _read_input(path: str) -> bytes:
    try:
        with open(path, "rb") as handle:
            return handle.read()
    except FileNotFoundError:
        raise ValidationError(f"input file {path!r} does not exist") from None


def _ensure_project(store: Store, project_id: str, config: ProjectConfig | None) -> None:
    from corpusforge.errors import NotFoundError

    try:
        store.get_project(project_id)
    except NotFoundError:
        store.create_project(name=project_id, config=config, project_id=project_id)


def _parse_include(value: str | None) -> frozenset:
    if not value:
        return DEFAULT_EXPORT_STATUSES
    return frozenset(PairStatus.parse(s) for s in value.split(",") if s)


def _write_atomic(path: str, payload: bytes) -> None:
    tmp = path + ".tmp"
    with open(tmp, "wb") as handle:
        handle.write(payload)
    os.replace(tmp, path)


def build_parser() -> _Parser:
    parser = _Parser(prog="corpusforge", description="parallel corpus construction tool")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ingest = sub.add_parser("ingest", help="load a corpus file into a project")
    ingest.add_argument("--input", required=True)
    ingest.add_argument("--project", default="default")
    ingest.add_argument("--config")
    ingest.add_argument("--data-dir")
    ingest.add_argument("--format", choices=["txt", "jsonl"], default="txt")

    run = sub.add_parser("run", help="ingest, run the pipeline, export, in one shot")
    run.add_argument("--input", required=True)
    run.add_argument("--config")
    run.add_argument("--out", required=True)
    run.add_argument("--project", default="default")
    run.add_argument("--data-dir")
    run.add_argument("--format", choices=["txt", "jsonl"], default="txt")
    run.add_argument("--export-format", choices=["jsonl", "tsv"], default="jsonl")
    run.add_argument("--include")

    export = sub.add_parser("export", help="write the dataset of an existing project")
    export.add_argument("--project", default="default")
    export.add_argument("--data-dir")
    export.add_argument("--out")
    export.add_argument("--export-format", choices=["jsonl", "tsv"], default="jsonl")
    export.add_argument("--include")

    report = sub.add_parser("report", help="print the stored run report")
    report.add_argument("--project", default="default")
    report.add_argument("--data-dir")

    preview = sub.add_parser("preview", help="run one stage on a sample, nothing persisted")
    preview.add_argument("--project", default="default")
    preview.add_argument("--data-dir")
    preview.add_argument("--stage", required=True)
    preview.add_argument("-n", type=int, default=5)

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--data-dir")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--ui-dir")

    return parser


def _cmd_ingest(args) -> int:
    data_dir = _resolve_data_dir(args.data_dir) or "."
    store = _open_store(data_dir)
    try:
        _ensure_project(store, args.project, _load_config(args.config))
        count = store.ingest_corpus(args.project, _read_input(args.input), args.format)
        print(json.dumps({"project_id": args.project, "ingested": count}))
    finally:
        store.close()
    return 0


def _cmd_run(args) -> int:
    data_dir = _resolve_data_dir(args.data_dir)
    scratch = None
    if data_dir is None:
        # No data dir means a throwaway one; repeated runs stay reproducible.
        scratch = tempfile.TemporaryDirectory(prefix="corpusforge-")
        data_dir = scratch.name
    store = _open_store(data_dir)
    try:
        _ensure_project(store, args.project, _load_config(args.config))
        store.ingest_corpus(args.project, _read_input(args.input), args.format)
        report = run_pipeline(store, args.project)
        payload = store.export_dataset(
            args.project, format=args.export_format, include=_parse_include(args.include)
        )
        _write_atomic(args.out, payload)
        print(json.dumps(report, ensure_ascii=False, indent=2))
    finally:
        store.close()
        if scratch is not None:
            scratch.cleanup()
    return 0


def _cmd_export(args) -> int:
    data_dir = _resolve_data_dir(args.data_dir) or "."
    store = _open_store(data_dir)
    try:
        payload = store.export_dataset(
            args.project, format=args.export_format, include=_parse_include(args.include)
        )
    finally:
        store.close()
    if args.out:
        _write_atomic(args.out, payload)
    else:
        sys.stdout.buffer.write(payload)
    return 0


def _cmd_report(args) -> int:
    data_dir = _resolve_data_dir(args.data_dir) or "."
    store = _open_store(data_dir)
    try:
        report = store.get_report(args.project)
    finally:
        store.close()
    if report is None:
        raise ValidationError(f"project {args.project!r} has no report yet")
    print(json.dumps(report, ensure_ascii=False, indent=2))
    return 0


def _cmd_preview(args) -> int:
    data_dir = _resolve_data_dir(args.data_dir) or "."
    store = _open_store(data_dir)
    try:
        rows = preview_stage(store, args.project, args.stage, args.n)
    finally:
        store.close()
    print(json.dumps(rows, ensure_ascii=False, indent=2))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from corpusforge.service import create_app

    data_dir = _resolve_data_dir(args.data_dir) or "."
    ui_dir = args.ui_dir
    if ui_dir is None and os.path.isdir(os.path.join("frontend", "dist")):
        ui_dir = os.path.join("frontend", "dist")
    store = _open_store(data_dir)
    app = create_app(store, ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "run": _cmd_run,
    "export": _cmd_export,
    "report": _cmd_report,
    "preview": _cmd_preview,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except StageFailure as exc:
        print(f"error ({exc.code}): {exc.message}", file=sys.stderr)
        return 2
    except CorpusForgeError as exc:
        print(f"error ({exc.code}): {exc.message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
