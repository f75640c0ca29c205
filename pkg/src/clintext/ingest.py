"""Batch dataflow engine.

Flows are directed acyclic graphs of source, transform and sink nodes.
Sources read raw records (JSON-lines, CSV rows, plain-text files) and
project them into Documents via a field mapping; transforms rewrite
documents (e.g. de-identification); sinks upsert into a DocumentStore.
Every record either reaches a sink or is recorded as failed with a
reason, and each node's counts satisfy read = written + failed.
"""

from __future__ import annotations

import csv
import io
import json
import threading
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from . import errors
from .documents import DOC_TYPES, Document, DocumentStore, format_instant, parse_instant
from .nerl.mentions import AnnotationStore, EntityMention

REQUIRED_MAPPING_KEYS = ("doc_id", "patient_id", "doc_type", "timestamp", "text")


@dataclass(frozen=True)
class RawRecord:
    payload: bytes
    format: str  # txt | csv_row | jsonl_row
    locator: str

    def __post_init__(self):
        if not self.locator:
            raise ValueError("locator must be non-empty")


@dataclass
class FlowNode:
    node_id: str
    kind: str  # source | transform | sink
    config: dict = field(default_factory=dict)


@dataclass
class FlowGraph:
    flow_id: str
    nodes: List[FlowNode]
    edges: List[Tuple[str, str]]


@dataclass
class NodeCounts:
    read: int = 0
    written: int = 0
    failed: int = 0


@dataclass
class FlowRunReport:
    flow_id: str
    started: datetime
    ended: datetime
    node_counts: Dict[str, NodeCounts]
    errors: List[dict]  # {"locator": ..., "reason": ...}

    def to_dict(self) -> dict:
        return {
            "flow_id": self.flow_id,
            "started": format_instant(self.started),
            "ended": format_instant(self.ended),
            "nodes": {
                nid: {"read": c.read, "written": c.written, "failed": c.failed}
                for nid, c in self.node_counts.items()
            },
            "errors": list(self.errors),
        }


def extract_text(raw: RawRecord, mapping: dict) -> Document:
    """Project a raw record into a Document using a field mapping.

    For jsonl_row the mapping values name JSON keys; for csv_row they are
    integer column positions; txt payloads use the mapping as literal
    values except for `text`, which is the payload itself.
    """
    for key in REQUIRED_MAPPING_KEYS:
        if key not in mapping:
            raise errors.MissingField(f"mapping missing {key!r}")

    if raw.format == "jsonl_row":
        try:
            row = json.loads(raw.payload.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise errors.MissingField(f"unparseable json at {raw.locator}: {exc}")
        getter = row.get
    elif raw.format == "csv_row":
        cells = next(csv.reader(io.StringIO(raw.payload.decode("utf-8"))))

        def getter(pos):
            idx = int(pos)
            return cells[idx] if 0 <= idx < len(cells) else None
    elif raw.format == "txt":
        # txt payload is the text; remaining fields come from mapping literals
        def getter(key):
            return None
    else:
        raise errors.NotSupported(f"unknown raw format {raw.format!r}")

    def fetch(field_name):
        if raw.format == "txt":
            if field_name == "text":
                return raw.payload.decode("utf-8")
            return mapping[field_name]
        value = getter(mapping[field_name])
        if value is None:
            raise errors.MissingField(f"field {mapping[field_name]!r} missing at {raw.locator}")
        return value

    text = str(fetch("text"))
    if not text.strip():
        raise errors.EmptyText(f"empty text at {raw.locator}")
    try:
        ts = parse_instant(str(fetch("timestamp")))
    except ValueError as exc:
        raise errors.BadTimestamp(f"bad timestamp at {raw.locator}: {exc}")

    doc_type = str(fetch("doc_type"))
    if doc_type not in DOC_TYPES:
        doc_type = "other"

    metadata = {}
    for meta_key, src in mapping.get("metadata", {}).items():
        value = getter(src) if raw.format != "txt" else src
        if value is not None:
            metadata[meta_key] = str(value)

    return Document(
        doc_id=str(fetch("doc_id")),
        patient_id=str(fetch("patient_id")),
        doc_type=doc_type,
        timestamp=ts,
        source=mapping.get("source", ""),
        text=text,
        metadata=metadata,
    )


def extract_scanned(raw: RawRecord, mapping: dict) -> Document:
    """Extension point for OCR/PDF extraction; intentionally unimplemented."""
    raise errors.NotSupported("OCR/PDF extraction is not supported; plug in an external extractor")


def _read_source(config: dict):
    """Yield RawRecords from a source node config ({"format", "path", ...})."""
    fmt = config.get("format", "jsonl")
    path = Path(config["path"])
    if fmt == "jsonl":
        if not path.is_file():
            raise errors.SourceUnavailable(f"missing source file {path}")
        with path.open("rb") as fh:
            for lineno, line in enumerate(fh, start=1):
                if line.strip():
                    yield RawRecord(line, "jsonl_row", f"{path}:{lineno}")
    elif fmt == "csv":
        if not path.is_file():
            raise errors.SourceUnavailable(f"missing source file {path}")
        with path.open("r", encoding="utf-8", newline="") as fh:
            start = 2 if config.get("header", False) else 1
            for lineno, line in enumerate(fh, start=1):
                if config.get("header", False) and lineno == 1:
                    continue
                if line.strip():
                    yield RawRecord(line.encode("utf-8"), "csv_row", f"{path}:{lineno}")
    elif fmt == "txt_dir":
        if not path.is_dir():
            raise errors.SourceUnavailable(f"missing source directory {path}")
        for file in sorted(path.glob("*.txt")):
            yield RawRecord(file.read_bytes(), "txt", str(file))
    else:
        raise errors.SourceUnavailable(f"unknown source format {fmt!r}")


def validate_graph(graph: FlowGraph) -> None:
    node_ids = [n.node_id for n in graph.nodes]
    if len(set(node_ids)) != len(node_ids):
        raise errors.DanglingEdge("duplicate node ids")
    known = set(node_ids)
    for frm, to in graph.edges:
        if frm not in known or to not in known:
            raise errors.DanglingEdge(f"edge {frm}->{to} references unknown node")
    kinds = {n.node_id: n.kind for n in graph.nodes}
    if not any(k == "source" for k in kinds.values()):
        raise errors.NoSource("graph has no source node")
    if not any(k == "sink" for k in kinds.values()):
        raise errors.NoSink("graph has no sink node")
    if topological_order(node_ids, graph.edges) is None:
        raise errors.CyclicGraph(f"flow {graph.flow_id} contains a cycle")


def topological_order(node_ids, edges) -> Optional[List[str]]:
    """Kahn's algorithm; returns None when the graph has a cycle."""
    indeg = {n: 0 for n in node_ids}
    adjacent = {n: [] for n in node_ids}
    for frm, to in edges:
        indeg[to] += 1
        adjacent[frm].append(to)
    queue = sorted(n for n, d in indeg.items() if d == 0)
    order = []
    while queue:
        node = queue.pop(0)
        order.append(node)
        for nxt in adjacent[node]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                queue.append(nxt)
        queue.sort()
    return order if len(order) == len(node_ids) else None


class FlowEngine:
    """Registers flow graphs and executes batch runs against a DocumentStore.

    Distinct flows may run concurrently; a second run of the same flow
    while one is in progress is rejected with FlowBusy.
    """

    def __init__(self, store: DocumentStore, clock: Callable[[], datetime] = None):
        self.store = store
        self.clock = clock or (lambda: datetime.now(timezone.utc))
        self._flows: Dict[str, FlowGraph] = {}
        self._reports: Dict[str, FlowRunReport] = {}
        self._run_locks: Dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self.transforms: Dict[str, Callable[[Document, dict], Document]] = {}

    def register_transform(self, name: str, fn: Callable[[Document, dict], Document]) -> None:
        self.transforms[name] = fn

    def register_flow(self, graph: FlowGraph) -> str:
        validate_graph(graph)
        with self._registry_lock:
            self._flows[graph.flow_id] = graph
            self._run_locks.setdefault(graph.flow_id, threading.Lock())
        return graph.flow_id

    def register_flow_dict(self, spec: dict) -> str:
        graph = FlowGraph(
            flow_id=spec["flow_id"],
            nodes=[FlowNode(n["node_id"], n["kind"], n.get("config", {})) for n in spec["nodes"]],
            edges=[(e[0], e[1]) if isinstance(e, list) else (e["from"], e["to"]) for e in spec["edges"]],
        )
        return self.register_flow(graph)

    def last_report(self, flow_id: str) -> Optional[FlowRunReport]:
        if flow_id not in self._flows:
            raise errors.UnknownFlow(flow_id)
        return self._reports.get(flow_id)

    def run_flow(self, flow_id: str) -> FlowRunReport:
        graph = self._flows.get(flow_id)
        if graph is None:
            raise errors.UnknownFlow(flow_id)
        lock = self._run_locks[flow_id]
        if not lock.acquire(blocking=False):
            raise errors.FlowBusy(f"flow {flow_id} is already running")
        try:
            report = self._execute(graph)
            self._reports[flow_id] = report
            return report
        finally:
            lock.release()

    def run_scheduled(self, flow_id: str, every: timedelta, until: datetime) -> List[FlowRunReport]:
        """Simulated periodic schedule driven by the injected clock."""
        reports = []
        next_fire = self.clock()
        while next_fire <= until:
            reports.append(self.run_flow(flow_id))
            next_fire = next_fire + every
        return reports

    def _execute(self, graph: FlowGraph) -> FlowRunReport:
        started = self.clock()
        order = topological_order([n.node_id for n in graph.nodes], graph.edges)
        nodes = {n.node_id: n for n in graph.nodes}
        downstream = {n.node_id: [] for n in graph.nodes}
        for frm, to in graph.edges:
            downstream[frm].append(to)

        counts = {n.node_id: NodeCounts() for n in graph.nodes}
        run_errors: List[dict] = []
        # Items pending per node, processed in topological order so each
        # document flows source -> transforms -> sink within one pass.
        pending: Dict[str, List[Tuple[Document, str]]] = {n.node_id: [] for n in graph.nodes}

        # Materialize all source records up front so that an unreadable
        # source fails the whole run with no partial report.
        source_batches: Dict[str, List[RawRecord]] = {}
        for node in graph.nodes:
            if node.kind == "source":
                source_batches[node.node_id] = list(_read_source(node.config))

        for node_id in order:
            node = nodes[node_id]
            c = counts[node_id]
            if node.kind == "source":
                mapping = node.config.get("mapping", {})
                for raw in source_batches[node_id]:
                    c.read += 1
                    try:
                        doc = extract_text(raw, mapping)
                    except errors.ClintextError as exc:
                        c.failed += 1
                        run_errors.append({"locator": raw.locator, "reason": str(exc)})
                        continue
                    c.written += 1
                    for nxt in downstream[node_id]:
                        pending[nxt].append((doc, raw.locator))
            elif node.kind == "transform":
                fn = self.transforms.get(node.config.get("transform", "noop"))
                for doc, locator in pending[node_id]:
                    c.read += 1
                    try:
                        out = fn(doc, node.config) if fn else doc
                    except errors.ClintextError as exc:
                        c.failed += 1
                        run_errors.append({"locator": locator, "reason": str(exc)})
                        continue
                    c.written += 1
                    for nxt in downstream[node_id]:
                        pending[nxt].append((out, locator))
            elif node.kind == "sink":
                for doc, locator in pending[node_id]:
                    c.read += 1
                    self.store.upsert(doc)
                    c.written += 1

        if self.store.path is not None:
            self.store.save()
        return FlowRunReport(graph.flow_id, started, self.clock(), counts, run_errors)


# --- annotation export / import --------------------------------------------

EXPORT_HEADER = ["doc_id", "start", "end", "cui", "confidence",
                 "negation", "experiencer", "temporality"]


def export_annotations(store: AnnotationStore, destination: Path, format: str = "csv") -> int:
    """Write one row/line per stored EntityMention; returns the count."""
    destination = Path(destination)
    destination.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    if format == "csv":
        with destination.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(EXPORT_HEADER)
            for doc_id, mentions in store.items():
                for m in mentions:
                    writer.writerow([
                        doc_id, m.start, m.end, m.cui, repr(m.confidence),
                        m.meta_labels.get("negation", ""),
                        m.meta_labels.get("experiencer", ""),
                        m.meta_labels.get("temporality", ""),
                    ])
                    count += 1
    elif format == "jsonl":
        with destination.open("w", encoding="utf-8") as fh:
            for doc_id, mentions in store.items():
                for m in mentions:
                    fh.write(json.dumps({
                        "doc_id": doc_id, "start": m.start, "end": m.end,
                        "cui": m.cui, "confidence": m.confidence,
                        "negation": m.meta_labels.get("negation", ""),
                        "experiencer": m.meta_labels.get("experiencer", ""),
                        "temporality": m.meta_labels.get("temporality", ""),
                    }))
                    fh.write("\n")
                    count += 1
    else:
        raise ValueError(f"unknown export format {format!r}")
    return count


def import_annotations(path: Path, format: str = "csv") -> AnnotationStore:
    path = Path(path)
    store = AnnotationStore()
    rows = []
    if format == "csv":
        with path.open("r", encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                rows.append(row)
    elif format == "jsonl":
        with path.open("r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rows.append(json.loads(line))
    else:
        raise ValueError(f"unknown import format {format!r}")
    for row in rows:
        meta = {}
        for task in ("negation", "experiencer", "temporality"):
            if row.get(task):
                meta[task] = row[task]
        mention = EntityMention(
            start=int(row["start"]), end=int(row["end"]), text="",
            cui=row["cui"], confidence=float(row["confidence"]), meta_labels=meta,
        )
        store.add(row["doc_id"], [mention])
    return store
