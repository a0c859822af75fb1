"""Exception hierarchy shared across the package.

Every error carries a short machine-readable ``code``.  The HTTP layer
maps codes onto status codes (validation/format 400, not_found 404,
conflict 409, state 422, stage_failure 502) and the CLI maps them onto
exit codes (validation/format 1, stage_failure 2).
"""

from __future__ import annotations


class CorpusForgeError(Exception):
    """Base class for all domain errors."""

    code = "validation"

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> dict:
        body: dict = {"code": self.code, "message": self.message}
        if self.details:
            body["details"] = self.details
        return body


class ValidationError(CorpusForgeError):
    """Caller-supplied value violates a documented precondition."""

    code = "validation"


class FormatError(CorpusForgeError):
    """Payload could not be parsed; details carry byte offset or line number."""

    code = "format"


class NotFoundError(CorpusForgeError):
    code = "not_found"


class ConflictError(CorpusForgeError):
    """Optimistic-concurrency or lease collision; caller should re-read."""

    code = "conflict"


class StateError(CorpusForgeError):
    """Operation is not legal in the entity's current state."""

    code = "state"


class StageFailure(CorpusForgeError):
    """A model-backed stage failed; no partial output was applied."""

    code = "stage_failure"

    def __init__(
        self,
        message: str,
        stage: str | None = None,
        failed_ids: list[str] | None = None,
        details: dict | None = None,
    ):
        details = dict(details or {})
        if stage is not None:
            details["stage"] = stage
        if failed_ids is not None:
            details["failed_ids"] = list(failed_ids)
        super().__init__(message, details)
        self.stage = stage
        self.failed_ids = list(failed_ids or [])
