"""Linked entity mentions and the per-document annotation store."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

META_TASKS = ("negation", "experiencer", "temporality")


@dataclass(frozen=True)
class EntityMention:
    start: int
    end: int
    text: str
    cui: str
    confidence: float
    meta_labels: Dict[str, str] = field(default_factory=dict)
    token_span: Optional[Tuple[int, int]] = None
    detected_name: str = ""

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ValueError("bad mention offsets")
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError("confidence outside [0,1]")

    def key(self) -> tuple:
        return (self.start, self.end, self.cui)


class AnnotationStore:
    """doc_id -> mentions, the export/import surface for stored annotations."""

    def __init__(self):
        self._mentions: Dict[str, List[EntityMention]] = {}
        self._lock = threading.Lock()

    def add(self, doc_id: str, mentions: List[EntityMention]) -> None:
        with self._lock:
            self._mentions.setdefault(doc_id, []).extend(mentions)

    def replace(self, doc_id: str, mentions: List[EntityMention]) -> None:
        with self._lock:
            self._mentions[doc_id] = list(mentions)

    def get(self, doc_id: str) -> List[EntityMention]:
        return list(self._mentions.get(doc_id, []))

    def items(self):
        for doc_id in sorted(self._mentions):
            yield doc_id, list(self._mentions[doc_id])

    def total(self) -> int:
        return sum(len(v) for v in self._mentions.values())

    def mention_set(self) -> set:
        out = set()
        for doc_id, mentions in self._mentions.items():
            for m in mentions:
                out.add((
                    doc_id, m.start, m.end, m.cui, round(m.confidence, 9),
                    m.meta_labels.get("negation", ""),
                    m.meta_labels.get("experiencer", ""),
                    m.meta_labels.get("temporality", ""),
                ))
        return out
