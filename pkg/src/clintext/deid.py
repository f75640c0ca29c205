"""Rule-and-dictionary PHI detection and redaction.

Categories and their rules:
  DATE        numeric (03/04/2019, 2019-04-03) and month-name forms
  PHONE       UK landline/mobile formats, with or without +44
  EMAIL       RFC-lite local@domain pattern
  ID          NHS 3-3-4 numbers and any run of 7+ digits
  POSTCODE    UK alphanumeric postcodes
  NAME        dictionary hit or title-triggered capitalized sequence
  AGE_OVER_89 a number >= 90 adjacent to a year/yo token

Overlaps are resolved by longest span, then category priority, then
leftmost. Redaction splices a placeholder template over each span.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Set

from . import errors

CATEGORY_PRIORITY = ["EMAIL", "PHONE", "ID", "DATE", "POSTCODE", "NAME", "AGE_OVER_89"]
_PRIORITY_RANK = {cat: i for i, cat in enumerate(CATEGORY_PRIORITY)}

_MONTHS = ("january|february|march|april|may|june|july|august|september|"
           "october|november|december|jan|feb|mar|apr|jun|jul|aug|sep|sept|oct|nov|dec")

_PATTERNS = {
    "EMAIL": [
        re.compile(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}"),
    ],
    "PHONE": [
        # +44 or 0 prefix, grouped UK numbers like 020 7946 0000, 07911 123456
        re.compile(r"(?<!\d)(?:\+44\s?\d{2,4}|\(?0\d{2,4}\)?)[\s-]\d{3,4}[\s-]?\d{3,4}(?!\d)"),
        re.compile(r"(?<!\d)07\d{3}[\s-]?\d{6}(?!\d)"),
    ],
    "ID": [
        re.compile(r"(?<!\d)\d{3}[ -]\d{3}[ -]\d{4}(?!\d)"),  # NHS 3-3-4
        re.compile(r"(?<!\d)\d{7,}(?!\d)"),
    ],
    "DATE": [
        re.compile(r"(?<!\d)\d{1,2}[/.-]\d{1,2}[/.-]\d{2,4}(?!\d)"),
        re.compile(r"(?<!\d)\d{4}-\d{2}-\d{2}(?!\d)"),
        re.compile(r"(?<!\d)\d{1,2}(?:st|nd|rd|th)?\s+(?:%s)\.?,?\s+\d{4}(?!\d)" % _MONTHS, re.IGNORECASE),
        re.compile(r"\b(?:%s)\.?\s+\d{1,2}(?:st|nd|rd|th)?,?\s+\d{4}(?!\d)" % _MONTHS, re.IGNORECASE),
    ],
    "POSTCODE": [
        re.compile(r"\b[A-Z]{1,2}\d[A-Z0-9]?\s\d[A-Z]{2}\b"),
    ],
    "AGE_OVER_89": [
        # "92 years", "95 year old", "104 yo", "aged 97"
        re.compile(r"(?<!\d)(9\d|[1-9]\d{2})(?=[ -](?:years?|yrs?|yo)\b)", re.IGNORECASE),
        re.compile(r"(?<=\baged )(9\d|[1-9]\d{2})(?!\d)", re.IGNORECASE),
    ],
}

_TITLE_TOKENS = {"dr", "mr", "mrs", "ms", "miss", "prof", "sister", "nurse"}
_CAP_SEQ = re.compile(r"\b(?:Dr|Mr|Mrs|Ms|Miss|Prof)\.?\s+((?:[A-Z][a-z]+)(?:[\s-][A-Z][a-z]+)*)")
_WORD = re.compile(r"[A-Za-z]+(?:'[A-Za-z]+)?")


@dataclass(frozen=True)
class PhiSpan:
    start: int
    end: int
    category: str
    matched: str

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ValueError("bad span offsets")


@dataclass
class DeidConfig:
    name_dictionary: Set[str] = field(default_factory=set)
    safe_list: Set[str] = field(default_factory=set)
    enabled_categories: Set[str] = field(default_factory=lambda: set(CATEGORY_PRIORITY))
    placeholder_template: str = "[{CATEGORY}]"

    def __post_init__(self):
        if "{CATEGORY}" not in self.placeholder_template:
            raise ValueError("placeholder template must contain {CATEGORY}")
        self.name_dictionary = {n.lower() for n in self.name_dictionary}
        self.safe_list = {n.lower() for n in self.safe_list}

    @classmethod
    def from_files(cls, name_dict_path: Optional[Path] = None,
                   safe_list_path: Optional[Path] = None, **kwargs) -> "DeidConfig":
        names = _read_wordlist(name_dict_path) if name_dict_path else set()
        safe = _read_wordlist(safe_list_path) if safe_list_path else set()
        return cls(name_dictionary=names, safe_list=safe, **kwargs)


def _read_wordlist(path: Path) -> Set[str]:
    out = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            out.add(line.lower())
    return out


def _name_candidates(text: str, config: DeidConfig) -> Iterable[PhiSpan]:
    words = list(_WORD.finditer(text))
    # dictionary hits, with safe-list suppression unless title-preceded
    for i, m in enumerate(words):
        token = m.group(0).lower()
        if token in config.name_dictionary:
            titled = i > 0 and words[i - 1].group(0).lower().rstrip(".") in _TITLE_TOKENS
            if token in config.safe_list and not titled:
                continue
            # extend over following capitalized dictionary-or-surname words
            end_idx = i
            while (end_idx + 1 < len(words)
                   and words[end_idx + 1].group(0)[0].isupper()
                   and words[end_idx + 1].group(0).lower() in config.name_dictionary):
                end_idx += 1
            yield PhiSpan(m.start(), words[end_idx].end(), "NAME",
                          text[m.start():words[end_idx].end()])
    # title-triggered capitalized sequences (no dictionary needed)
    for m in _CAP_SEQ.finditer(text):
        yield PhiSpan(m.start(1), m.end(1), "NAME", m.group(1))


def detect_phi(text: str, config: Optional[DeidConfig] = None) -> List[PhiSpan]:
    """Scan text with every enabled rule and resolve overlaps.

    Resolution order: longer span wins, then category priority
    (EMAIL > PHONE > ID > DATE > POSTCODE > NAME > AGE_OVER_89), then
    leftmost. Returned spans are sorted by start and non-overlapping.
    """
    config = config or DeidConfig()
    candidates: List[PhiSpan] = []
    for category, patterns in _PATTERNS.items():
        if category not in config.enabled_categories:
            continue
        for pattern in patterns:
            for m in pattern.finditer(text):
                candidates.append(PhiSpan(m.start(), m.end(), category, m.group(0)))
    if "NAME" in config.enabled_categories:
        candidates.extend(_name_candidates(text, config))

    # greedy selection under the documented precedence
    candidates.sort(key=lambda s: (-(s.end - s.start), _PRIORITY_RANK[s.category], s.start))
    chosen: List[PhiSpan] = []
    for span in candidates:
        if all(span.end <= c.start or span.start >= c.end for c in chosen):
            chosen.append(span)
    chosen.sort(key=lambda s: s.start)
    return chosen


def redact(text: str, spans: List[PhiSpan], config: Optional[DeidConfig] = None) -> str:
    """Replace each span with the placeholder template; other text unchanged."""
    config = config or DeidConfig()
    ordered = sorted(spans, key=lambda s: s.start)
    prev_end = 0
    for span in ordered:
        if span.end > len(text) or span.start < 0:
            raise errors.SpanOutOfBounds(f"span {span.start}..{span.end} outside text")
        if span.start < prev_end:
            raise errors.OverlappingSpans(f"span at {span.start} overlaps previous")
        prev_end = span.end
    parts = []
    cursor = 0
    for span in ordered:
        parts.append(text[cursor:span.start])
        parts.append(config.placeholder_template.replace("{CATEGORY}", span.category))
        cursor = span.end
    parts.append(text[cursor:])
    return "".join(parts)


def deid_text(text: str, config: Optional[DeidConfig] = None) -> str:
    config = config or DeidConfig()
    return redact(text, detect_phi(text, config), config)
