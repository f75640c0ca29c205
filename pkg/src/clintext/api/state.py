"""Service configuration and the shared application state behind both the
HTTP service and the CLI (which is what makes their outputs byte-identical)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional

from ..annotate import AnnotationService
from ..deid import DeidConfig, detect_phi, redact
from ..documents import DocumentStore
from ..index.core import InvertedIndex
from ..index.queryparse import parse_query
from ..index import storage as index_storage
from ..ingest import FlowEngine
from ..nerl.bundle import ModelBundle, annotate_text, mentions_to_json
from ..nerl.serialization import load_bundle


@dataclass
class ServiceConfig:
    listen: str = "127.0.0.1:8000"
    documents: Optional[str] = None
    index_dir: Optional[str] = None
    bundles_dir: Optional[str] = None
    projects_dir: Optional[str] = None
    default_bundle: Optional[str] = None
    deid_name_dictionary: Optional[str] = None
    deid_safe_list: Optional[str] = None
    request_size_limit: int = 1_000_000

    @classmethod
    def from_file(cls, path: Path) -> "ServiceConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in data.items() if k in known})


def dump_json_bytes(obj) -> bytes:
    """Canonical JSON encoding shared by the CLI and HTTP responses."""
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


class AppState:
    """Stores and engines loaded from a ServiceConfig."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.docs = DocumentStore(Path(config.documents) if config.documents else None)
        if config.index_dir and (Path(config.index_dir) / "manifest.json").exists():
            self.index = index_storage.load_index(Path(config.index_dir))
        else:
            self.index = InvertedIndex()
            self.index.index_all(self.docs)
        self.bundles: Dict[str, ModelBundle] = {}
        if config.bundles_dir:
            root = Path(config.bundles_dir)
            if root.is_dir():
                for sub in sorted(root.iterdir()):
                    if (sub / "bundle.json").exists():
                        self.bundles[sub.name] = load_bundle(sub)
        self.deid_config = DeidConfig.from_files(
            config.deid_name_dictionary, config.deid_safe_list)
        self.flows = FlowEngine(self.docs)
        self.annotation = AnnotationService(
            self.docs, self.bundles,
            log_dir=Path(config.projects_dir) if config.projects_dir else None)

    def bundle(self, bundle_id: Optional[str]) -> ModelBundle:
        from .. import errors
        key = bundle_id or self.config.default_bundle
        if key is None or key not in self.bundles:
            raise errors.UnknownBundle(str(key))
        return self.bundles[key]

    # --- shared payload builders (CLI/HTTP parity) -------------------------

    def analyze_payload(self, text: str, bundle_id: Optional[str] = None) -> dict:
        bundle = self.bundle(bundle_id)
        return mentions_to_json(annotate_text(text, bundle), bundle.cdb)

    def deid_payload(self, text: str) -> dict:
        spans = detect_phi(text, self.deid_config)
        return {
            "text": redact(text, spans, self.deid_config),
            "spans": [{"start": s.start, "end": s.end, "category": s.category}
                      for s in spans],
        }

    def search_payload(self, query: str, size: int = 10, offset: int = 0,
                       agg_field: Optional[str] = None,
                       agg_date: Optional[str] = None) -> dict:
        ast = parse_query(query)
        total = len(self.index.match(ast))
        hits = self.index.search(ast, top_k=offset + size)[offset:]
        payload = {
            "total": total,
            "hits": [
                {"doc_id": h.doc_id, "score": h.score,
                 "highlights": [[s, e] for s, e in h.highlights]}
                for h in hits
            ],
        }
        aggregations = {}
        if agg_field:
            buckets = self.index.aggregate(ast, ("field_terms", agg_field))
            aggregations["field_terms"] = {
                "field": agg_field,
                "buckets": [{"key": k, "count": c} for k, c in buckets],
            }
        if agg_date:
            buckets = self.index.aggregate(ast, ("date_histogram", agg_date))
            aggregations["date_histogram"] = {
                "bucket": agg_date,
                "buckets": [{"key": k, "count": c} for k, c in buckets],
            }
        if aggregations:
            payload["aggregations"] = aggregations
        return payload

    def reindex(self) -> None:
        self.index = InvertedIndex()
        self.index.index_all(self.docs)
        if self.config.index_dir:
            index_storage.save_index(self.index, Path(self.config.index_dir))
