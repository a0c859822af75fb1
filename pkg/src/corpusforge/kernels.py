"""Backend selection for the per-sentence text kernels.

Prefers the compiled Cython extension and falls back to the pure-Python
twin when the extension is missing (plain source checkout, unsupported
platform) or when ``CORPUSFORGE_PURE_PYTHON=1`` is set.
"""

from __future__ import annotations

import os

from corpusforge import _kernels_py

if os.environ.get("CORPUSFORGE_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from corpusforge import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

TERMINAL_MARKS = _kernels_py.TERMINAL_MARKS

normalize_for_dedup = _impl.normalize_for_dedup
correct_grammar = _impl.correct_grammar
mock_translate = _impl.mock_translate
post_edit = _impl.post_edit
quality_score = _impl.quality_score
classify_text = _impl.classify_text


def backends() -> dict:
    """All importable kernel backends keyed by name (benchmarks, parity tests)."""
    found = {"python": _kernels_py}
    try:
        from corpusforge import _kernels

        found["cython"] = _kernels
    except ImportError:
        pass
    return found
