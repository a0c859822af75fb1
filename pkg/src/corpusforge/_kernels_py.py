"""Pure-Python implementations of the per-sentence text kernels.

These are the hot inner loops of the builtin pipeline: every corpus
sentence passes through each of them at least once, so they also exist
as a compiled Cython twin (``corpusforge._kernels``) with identical
semantics.  ``corpusforge.kernels`` picks the fastest available backend
at import time.  Parity between the two backends is enforced by tests;
any change here must be mirrored in ``_kernels.pyx``.
"""

from __future__ import annotations

import math
import unicodedata

TERMINAL_MARKS = ".!?"
CLING_MARKS = ".,!?;:"


def normalize_for_dedup(text: str) -> str:
    """Canonical key for duplicate detection.

    NFC-normalizes, lowercases, trims, and collapses whitespace runs to
    a single space, in that order.
    """
    return " ".join(unicodedata.normalize("NFC", text).lower().split())


def correct_grammar(text: str) -> str:
    """Reference grammar cleanup: whitespace and punctuation spacing.

    Trims and collapses whitespace runs, removes any space directly
    before one of ``. , ! ? ; :``, and inserts a single space after one
    of those marks when a letter follows it directly.  Idempotent.
    """
    collapsed = " ".join(text.split())
    n = len(collapsed)
    out = []
    for i in range(n):
        ch = collapsed[i]
        if ch == " " and i + 1 < n and collapsed[i + 1] in CLING_MARKS:
            continue
        out.append(ch)
    n = len(out)
    spaced = []
    for i in range(n):
        ch = out[i]
        spaced.append(ch)
        if ch in CLING_MARKS and i + 1 < n and out[i + 1].isalpha():
            spaced.append(" ")
    return "".join(spaced)


def mock_translate(text: str) -> str:
    """Deterministic stand-in translation: reverses token order.

    A trailing terminal mark (``.``, ``!``, ``?``) stays in final
    position, which makes the transform an involution on cleanly
    punctuated sentences.  Offline testing and demos only.
    """
    tokens = text.split()
    if not tokens:
        return ""
    mark = ""
    last = tokens[-1]
    if last[-1] in TERMINAL_MARKS:
        mark = last[-1]
        if len(last) > 1:
            tokens[-1] = last[:-1]
        else:
            tokens.pop()
    tokens.reverse()
    if not tokens:
        return mark
    if mark:
        tokens[-1] = tokens[-1] + mark
    return " ".join(tokens)


def post_edit(source: str, target: str) -> str:
    """Reference target-side cleanup.

    Collapses whitespace runs in the target and appends the source's
    terminal mark when the source ends with one of ``. ! ?`` and the
    target does not.  An empty (or whitespace-only) target is replaced
    by the source verbatim, so builtin output is never empty for a
    non-empty source.
    """
    if not target.strip():
        return source
    edited = " ".join(target.split())
    src = source.rstrip()
    if src and src[-1] in TERMINAL_MARKS and edited[-1] not in TERMINAL_MARKS:
        edited = edited + src[-1]
    return edited


def quality_score(source: str, target: str) -> float:
    """Heuristic translation quality in [0, 1]; higher is better.

    score = clamp01(1 - 0.5*len_penalty - 0.3*copy_rate - 0.2*punct_mismatch)

    len_penalty is the absolute log-ratio of whitespace token counts,
    capped at 1.  copy_rate is the number of case-folded token types the
    target shares with the source, divided by the target token count.
    punct_mismatch is 1 unless both sides agree on having (and on which)
    terminal mark in ``. ! ?``.  An empty target scores 0.  Total on
    arbitrary input; never raises.
    """
    target_tokens = target.split()
    if not target_tokens:
        return 0.0
    source_tokens = source.split()
    len_penalty = min(
        1.0,
        abs(math.log(max(1, len(target_tokens)) / max(1, len(source_tokens)))),
    )
    source_types = {tok.casefold() for tok in source_tokens}
    target_types = {tok.casefold() for tok in target_tokens}
    copy_rate = len(target_types & source_types) / max(1, len(target_tokens))
    punct_mismatch = 0.0 if _terminal_mark(source) == _terminal_mark(target) else 1.0
    score = 1.0 - 0.5 * len_penalty - 0.3 * copy_rate - 0.2 * punct_mismatch
    if score < 0.0:
        return 0.0
    if score > 1.0:
        return 1.0
    return score


def _terminal_mark(text: str) -> str:
    stripped = text.rstrip()
    if stripped and stripped[-1] in TERMINAL_MARKS:
        return stripped[-1]
    return ""


def classify_text(
    text: str,
    min_chars: int,
    max_chars: int,
    max_tokens: int,
    drop_no_letter: bool,
    script_ranges: tuple,
    min_script_ratio: float,
) -> str | None:
    """First failing per-sentence filter rule, or None if the text passes.

    Rules run in the fixed order: empty, too_short, too_long,
    too_many_tokens, no_letters, wrong_script.  Length rules apply to
    the trimmed text.  ``script_ranges`` is a flat (lo, hi, lo, hi, ...)
    tuple of inclusive codepoint ranges; empty disables the script rule.
    Duplicate detection is corpus-level and lives in the filtering
    module.
    """
    stripped = text.strip()
    if not stripped:
        return "empty"
    n = len(stripped)
    if n < min_chars:
        return "too_short"
    if n > max_chars:
        return "too_long"
    if len(text.split()) > max_tokens:
        return "too_many_tokens"
    letters = 0
    in_script = 0
    n_ranges = len(script_ranges)
    for ch in stripped:
        if ch.isalpha():
            letters += 1
            if n_ranges:
                cp = ord(ch)
                for j in range(0, n_ranges, 2):
                    if script_ranges[j] <= cp <= script_ranges[j + 1]:
                        in_script += 1
                        break
    if drop_no_letter and letters == 0:
        return "no_letters"
    if n_ranges and letters > 0 and in_script / letters < min_script_ratio:
        return "wrong_script"
    return None
