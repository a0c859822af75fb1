"""corpusforge: build a quality-triaged parallel corpus from a mono corpus.

The pipeline filters and grammar-corrects source sentences, machine
translates them, post-edits the translations, scores each pair, quantizes
scores into high/middle/low, prices the human editing work, and drives
the middle/low pairs through a review task loop.  Everything runs offline
with deterministic builtin adapters; remote model services plug in over a
small JSON-over-HTTP protocol.
"""

__version__ = "0.1.0"

from corpusforge.errors import (
    ConflictError,
    CorpusForgeError,
    FormatError,
    NotFoundError,
    StageFailure,
    StateError,
    ValidationError,
)

__all__ = [
    "__version__",
    "CorpusForgeError",
    "ValidationError",
    "FormatError",
    "NotFoundError",
    "ConflictError",
    "StateError",
    "StageFailure",
]
