"""Document model and the on-disk document store.

A Document is one clinical text record; the store keeps them keyed by
doc_id with upsert semantics and persists as JSON-lines (one document
per line, UTF-8).
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterator, Optional

DOC_TYPES = ("clinical_note", "imaging_report", "letter", "other")


def parse_instant(value: str) -> datetime:
    """Parse an ISO-8601 instant; naive values are taken as UTC."""
    ts = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_instant(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class Document:
    doc_id: str
    patient_id: str
    doc_type: str
    timestamp: datetime
    source: str
    text: str
    metadata: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.doc_id:
            raise ValueError("doc_id must be non-empty")
        if self.doc_type not in DOC_TYPES:
            raise ValueError(f"unknown doc_type {self.doc_type!r}")

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "patient_id": self.patient_id,
            "doc_type": self.doc_type,
            "timestamp": format_instant(self.timestamp),
            "source": self.source,
            "text": self.text,
            "metadata": dict(self.metadata),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Document":
        return cls(
            doc_id=data["doc_id"],
            patient_id=data["patient_id"],
            doc_type=data["doc_type"],
            timestamp=parse_instant(data["timestamp"]),
            source=data.get("source", ""),
            text=data["text"],
            metadata=dict(data.get("metadata", {})),
        )


class DocumentStore:
    """In-memory doc_id -> Document map with JSONL persistence.

    One writer at a time (internal lock); reads take a snapshot and are
    safe from any thread.
    """

    def __init__(self, path: Optional[Path] = None):
        self._docs: Dict[str, Document] = {}
        self._lock = threading.Lock()
        self.path = Path(path) if path is not None else None
        if self.path is not None and self.path.exists():
            self._load(self.path)

    def _load(self, path: Path) -> None:
        with path.open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    doc = Document.from_dict(json.loads(line))
                    self._docs[doc.doc_id] = doc

    def upsert(self, doc: Document) -> None:
        with self._lock:
            self._docs[doc.doc_id] = doc

    def get(self, doc_id: str) -> Optional[Document]:
        return self._docs.get(doc_id)

    def __len__(self) -> int:
        return len(self._docs)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._docs

    def __iter__(self) -> Iterator[Document]:
        return iter(list(self._docs.values()))

    def doc_ids(self) -> list:
        return sorted(self._docs)

    def save(self, path: Optional[Path] = None) -> None:
        target = Path(path) if path is not None else self.path
        if target is None:
            raise ValueError("no path to save to")
        target.parent.mkdir(parents=True, exist_ok=True)
        with self._lock:
            with target.open("w", encoding="utf-8") as fh:
                for doc_id in sorted(self._docs):
                    fh.write(json.dumps(self._docs[doc_id].to_dict(), ensure_ascii=False))
                    fh.write("\n")
