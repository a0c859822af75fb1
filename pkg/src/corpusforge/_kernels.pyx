# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twin of the pure-Python text kernels.

Semantics must stay bit-identical to ``corpusforge._kernels_py``; the
parity test suite fuzzes both backends against each other.  Character
classification goes through the same CPython predicates (Py_UCS4
``isalpha`` maps to the unicodedata tables ``str.isalpha`` uses) and
``log`` resolves to the same libm call ``math.log`` wraps, so results
match the fallback exactly.
"""

import unicodedata

from libc.math cimport fabs, log

TERMINAL_MARKS = ".!?"
CLING_MARKS = ".,!?;:"

cdef unicode _TERMINAL = TERMINAL_MARKS
cdef unicode _CLING = CLING_MARKS


cpdef unicode normalize_for_dedup(unicode text):
    """Canonical key for duplicate detection (NFC, lowercase, collapse)."""
    return " ".join(unicodedata.normalize("NFC", text).lower().split())


cpdef unicode correct_grammar(unicode text):
    """Reference grammar cleanup: whitespace and punctuation spacing."""
    cdef unicode collapsed = " ".join(text.split())
    cdef Py_ssize_t i, n = len(collapsed)
    cdef Py_UCS4 ch
    cdef list out = []
    for i in range(n):
        ch = collapsed[i]
        if ch == u" " and i + 1 < n and collapsed[i + 1] in _CLING:
            continue
        out.append(ch)
    cdef unicode joined = "".join(out)
    n = len(joined)
    cdef list spaced = []
    for i in range(n):
        ch = joined[i]
        spaced.append(ch)
        if ch in _CLING and i + 1 < n and (<Py_UCS4>joined[i + 1]).isalpha():
            spaced.append(u" ")
    return "".join(spaced)


cpdef unicode mock_translate(unicode text):
    """Token-reversing stand-in translation; keeps the terminal mark last."""
    cdef list tokens = text.split()
    if not tokens:
        return ""
    cdef unicode mark = ""
    cdef unicode last = tokens[len(tokens) - 1]
    if last[len(last) - 1] in _TERMINAL:
        mark = last[len(last) - 1]
        if len(last) > 1:
            tokens[len(tokens) - 1] = last[:len(last) - 1]
        else:
            tokens.pop()
    tokens.reverse()
    if not tokens:
        return mark
    if mark:
        tokens[len(tokens) - 1] = tokens[len(tokens) - 1] + mark
    return " ".join(tokens)


cpdef unicode post_edit(unicode source, unicode target):
    """Reference target-side cleanup (collapse, terminal mark, empty copy)."""
    if not target.strip():
        return source
    cdef unicode edited = " ".join(target.split())
    cdef unicode src = source.rstrip()
    if src and src[len(src) - 1] in _TERMINAL and edited[len(edited) - 1] not in _TERMINAL:
        edited = edited + src[len(src) - 1]
    return edited


cdef unicode _terminal_mark(unicode text):
    cdef unicode stripped = text.rstrip()
    if stripped and stripped[len(stripped) - 1] in _TERMINAL:
        return stripped[len(stripped) - 1]
    return ""


cpdef double quality_score(unicode source, unicode target):
    """Heuristic translation quality in [0, 1]; see the fallback docstring."""
    cdef list target_tokens = target.split()
    if not target_tokens:
        return 0.0
    cdef list source_tokens = source.split()
    cdef Py_ssize_t n_t = len(target_tokens)
    cdef Py_ssize_t n_s = len(source_tokens)
    cdef double len_penalty = fabs(log((<double>max(1, n_t)) / (<double>max(1, n_s))))
    if len_penalty > 1.0:
        len_penalty = 1.0
    cdef set source_types = {tok.casefold() for tok in source_tokens}
    cdef set target_types = {tok.casefold() for tok in target_tokens}
    cdef double copy_rate = len(target_types & source_types) / (<double>max(1, n_t))
    cdef double punct_mismatch = 0.0 if _terminal_mark(source) == _terminal_mark(target) else 1.0
    cdef double score = 1.0 - 0.5 * len_penalty - 0.3 * copy_rate - 0.2 * punct_mismatch
    if score < 0.0:
        return 0.0
    if score > 1.0:
        return 1.0
    return score


cpdef classify_text(
    unicode text,
    int min_chars,
    int max_chars,
    int max_tokens,
    bint drop_no_letter,
    tuple script_ranges,
    double min_script_ratio,
):
    """First failing per-sentence filter rule, or None if the text passes."""
    cdef unicode stripped = text.strip()
    if not stripped:
        return "empty"
    cdef Py_ssize_t n = len(stripped)
    if n < min_chars:
        return "too_short"
    if n > max_chars:
        return "too_long"
    if len(text.split()) > max_tokens:
        return "too_many_tokens"
    cdef Py_ssize_t letters = 0
    cdef Py_ssize_t in_script = 0
    cdef Py_ssize_t n_ranges = len(script_ranges)
    cdef Py_ssize_t i, j
    cdef Py_UCS4 ch
    cdef long cp
    for i in range(n):
        ch = stripped[i]
        if ch.isalpha():
            letters += 1
            if n_ranges:
                cp = <long>ch
                for j in range(0, n_ranges, 2):
                    if <long>script_ranges[j] <= cp <= <long>script_ranges[j + 1]:
                        in_script += 1
                        break
    if drop_no_letter and letters == 0:
        return "no_letters"
    if n_ranges and letters > 0 and (<double>in_script) / (<double>letters) < min_script_ratio:
        return "wrong_script"
    return None
