"""Rule-based mono-corpus filtering.

Seven deterministic rules evaluated in a fixed order so every rejection
carries exactly one reason code: empty, too_short, too_long,
too_many_tokens, no_letters, wrong_script, duplicate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from corpusforge import kernels
from corpusforge.domain import Segment
from corpusforge.errors import ValidationError

REASON_CODES = (
    "empty",
    "too_short",
    "too_long",
    "too_many_tokens",
    "no_letters",
    "wrong_script",
    "duplicate",
)

# Expected Unicode letter ranges per primary language subtag, as flat
# (lo, hi, lo, hi, ...) tuples consumed by the classify kernel.  Unknown
# tags disable the script rule entirely.
_LATIN = (0x0041, 0x005A, 0x0061, 0x007A, 0x00C0, 0x024F, 0x1E00, 0x1EFF)
_CYRILLIC = (0x0400, 0x04FF, 0x0500, 0x052F)
_HANGUL = (0x1100, 0x11FF, 0xAC00, 0xD7A3, 0x3130, 0x318F)
_HAN = (0x4E00, 0x9FFF, 0x3400, 0x4DBF)
_KANA_HAN = (0x3040, 0x309F, 0x30A0, 0x30FF) + _HAN
_GREEK = (0x0370, 0x03FF, 0x1F00, 0x1FFF)
_ARABIC = (0x0600, 0x06FF, 0x0750, 0x077F)

SCRIPT_RANGES: dict[str, tuple[int, ...]] = {
    "en": _LATIN,
    "de": _LATIN,
    "fr": _LATIN,
    "es": _LATIN,
    "it": _LATIN,
    "pt": _LATIN,
    "nl": _LATIN,
    "ru": _CYRILLIC,
    "uk": _CYRILLIC,
    "ko": _HANGUL,
    "ja": _KANA_HAN,
    "zh": _HAN,
    "el": _GREEK,
    "ar": _ARABIC,
}


def script_ranges_for(lang: str) -> tuple[int, ...]:
    """Letter ranges for a language tag's primary subtag; empty disables the rule."""
    primary = lang.split("-")[0].lower() if lang else ""
    return SCRIPT_RANGES.get(primary, ())


@dataclass
class FilterRuleSet:
    min_chars: int = 2
    max_chars: int = 1000
    max_token_count: int = 150
    dedup: bool = True
    drop_no_letter: bool = True
    allowed_script_ratio: float = 0.5

    def validate(self) -> None:
        if self.min_chars < 1:
            raise ValidationError("min_chars must be >= 1")
        if self.min_chars > self.max_chars:
            raise ValidationError(
                f"min_chars {self.min_chars} exceeds max_chars {self.max_chars}"
            )
        if self.max_token_count < 1:
            raise ValidationError("max_token_count must be >= 1")
        if not (0.0 <= self.allowed_script_ratio <= 1.0):
            raise ValidationError("allowed_script_ratio must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "min_chars": self.min_chars,
            "max_chars": self.max_chars,
            "max_token_count": self.max_token_count,
            "dedup": self.dedup,
            "drop_no_letter": self.drop_no_letter,
            "allowed_script_ratio": self.allowed_script_ratio,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FilterRuleSet":
        rules = cls(**{k: v for k, v in data.items() if k in cls.__dataclass_fields__})
        rules.validate()
        return rules


@dataclass
class FilterReport:
    input_count: int
    retained_count: int
    rejections: dict[str, int] = field(default_factory=dict)

    def validate(self) -> None:
        if self.input_count != self.retained_count + sum(self.rejections.values()):
            raise ValidationError(
                "filter report does not conserve segments: "
                f"{self.input_count} != {self.retained_count} + {self.rejections}"
            )
        for reason in self.rejections:
            if reason not in REASON_CODES:
                raise ValidationError(f"unknown rejection reason {reason!r}")

    def to_dict(self) -> dict:
        return {
            "input_count": self.input_count,
            "retained_count": self.retained_count,
            "rejections": dict(self.rejections),
        }


def normalize_for_dedup(text: str) -> str:
    return kernels.normalize_for_dedup(text)


def filter_corpus(
    segments: list[Segment], rules: FilterRuleSet
) -> tuple[list[Segment], FilterReport]:
    """Split segments into retained and rejected, one reason per rejection.

    Dedup keeps the first occurrence by origin_line; seen keys come only
    from segments that survived every other rule, so a short duplicate is
    counted as too_short, not duplicate.
    """
    rules.validate()
    seen_ids = set()
    for segment in segments:
        if segment.id in seen_ids:
            raise ValidationError(f"duplicate segment id {segment.id!r}")
        seen_ids.add(segment.id)

    retained: list[Segment] = []
    rejections: dict[str, int] = {}
    seen_keys: set[str] = set()
    for segment in sorted(segments, key=lambda s: s.origin_line):
        reason = kernels.classify_text(
            segment.text,
            rules.min_chars,
            rules.max_chars,
            rules.max_token_count,
            rules.drop_no_letter,
            script_ranges_for(segment.lang),
            rules.allowed_script_ratio,
        )
        if reason is None and rules.dedup:
            key = kernels.normalize_for_dedup(segment.text)
            if key in seen_keys:
                reason = "duplicate"
            else:
                seen_keys.add(key)
        if reason is None:
            segment.verdict = "retained"
            segment.reject_reason = None
            retained.append(segment)
        else:
            segment.verdict = "rejected"
            segment.reject_reason = reason
            rejections[reason] = rejections.get(reason, 0) + 1

    # Restore input order for the retained subsequence.
    positions = {id(segment): index for index, segment in enumerate(segments)}
    retained.sort(key=lambda s: positions[id(s)])
    report = FilterReport(
        input_count=len(segments),
        retained_count=len(retained),
        rejections=rejections,
    )
    report.validate()
    return retained, report
