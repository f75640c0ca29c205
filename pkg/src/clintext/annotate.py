"""Annotation projects with model-in-the-loop active learning.

Documents are served uncertainty-first (lowest mean link confidence
under the current model). Every B-th annotated document triggers a
synchronous retrain that replays the full annotation log against a
clone of the project's initial bundle, evaluates on the held-out
validation documents, and atomically swaps the serving bundle.
"""

from __future__ import annotations

import json
import random
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, List, Optional, Set, Tuple

from . import errors
from .documents import Document, DocumentStore, format_instant, parse_instant
from .nerl.bundle import ModelBundle, annotate_text
from .nerl.evaluation import evaluate_ner
from .nerl.training import SupervisedExample, train_supervised

DEFAULT_BATCH = 10
DEFAULT_VALIDATION_FRACTION = 0.2


@dataclass(frozen=True)
class HumanAnnotation:
    project_id: str
    doc_id: str
    start: int
    end: int
    cui: str
    correct: bool
    meta_labels: Dict[str, str] = field(default_factory=dict)
    annotator: str = ""
    submitted_at: Optional[datetime] = None

    def to_dict(self) -> dict:
        return {
            "project_id": self.project_id, "doc_id": self.doc_id,
            "start": self.start, "end": self.end, "cui": self.cui,
            "correct": self.correct, "meta_labels": dict(self.meta_labels),
            "annotator": self.annotator,
            "submitted_at": format_instant(self.submitted_at) if self.submitted_at else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HumanAnnotation":
        return cls(d["project_id"], d["doc_id"], d["start"], d["end"], d["cui"],
                   d["correct"], dict(d.get("meta_labels", {})), d.get("annotator", ""),
                   parse_instant(d["submitted_at"]) if d.get("submitted_at") else None)


@dataclass
class MetricsSnapshot:
    after_n_docs: int
    per_cui_f1: Dict[str, float]
    macro_f1: float
    created_at: datetime

    def to_dict(self) -> dict:
        return {
            "after_n_docs": self.after_n_docs,
            "per_cui_f1": dict(self.per_cui_f1),
            "macro_f1": self.macro_f1,
            "created_at": format_instant(self.created_at),
        }


class Project:
    def __init__(self, project_id: str, name: str, doc_ids: List[str],
                 bundle: ModelBundle, tasks: List[str], batch_size: int,
                 seed: int, validation_fraction: float,
                 validation_gold: Dict[str, List[Tuple[int, int, str]]]):
        self.project_id = project_id
        self.name = name
        self.doc_ids = list(doc_ids)
        self.initial_bundle = bundle
        self.current_bundle = bundle
        self.tasks = list(tasks)
        self.batch_size = batch_size
        self.seed = seed
        shuffled = list(doc_ids)
        random.Random(seed).shuffle(shuffled)
        n_val = int(round(len(shuffled) * validation_fraction))
        self.validation_ids: Set[str] = set(shuffled[:n_val])
        self.training_ids: List[str] = [d for d in doc_ids if d not in self.validation_ids]
        self.validation_gold = validation_gold
        self.annotations: List[HumanAnnotation] = []
        self.annotated_docs: List[str] = []
        self.served: Set[str] = set()
        self.snapshots: List[MetricsSnapshot] = []
        self.log_lock = threading.Lock()
        self.train_lock = threading.Lock()


class AnnotationService:
    def __init__(self, docs: DocumentStore, bundles: Dict[str, ModelBundle],
                 clock: Callable[[], datetime] = None,
                 log_dir: Optional[Path] = None):
        self.docs = docs
        self.bundles = bundles
        self.clock = clock or (lambda: datetime.now(timezone.utc))
        self.log_dir = Path(log_dir) if log_dir else None
        self.projects: Dict[str, Project] = {}
        self._counter = 0

    def _project(self, project_id: str) -> Project:
        project = self.projects.get(project_id)
        if project is None:
            raise errors.UnknownProject(project_id)
        return project

    def create_project(self, name: str, doc_ids: List[str], bundle_id: str,
                       tasks: Optional[List[str]] = None, batch_size: int = DEFAULT_BATCH,
                       seed: int = 0, validation_fraction: float = DEFAULT_VALIDATION_FRACTION,
                       validation_gold: Optional[dict] = None) -> str:
        if not doc_ids:
            raise errors.EmptyDocumentSet("project needs at least one document")
        if bundle_id not in self.bundles:
            raise errors.UnknownBundle(bundle_id)
        if batch_size < 1:
            raise ValueError("batch size must be >= 1")
        for doc_id in doc_ids:
            if doc_id not in self.docs:
                raise errors.UnknownDocument(doc_id)
        self._counter += 1
        project_id = f"proj-{self._counter}"
        self.projects[project_id] = Project(
            project_id, name, doc_ids, self.bundles[bundle_id],
            tasks or [], batch_size, seed, validation_fraction,
            validation_gold or {},
        )
        return project_id

    def next_document(self, project_id: str, annotator: str = ""):
        """Serve the unannotated training document with the lowest mean link
        confidence under the current model; documents with no mentions
        count as confidence 1.0 and are served last."""
        project = self._project(project_id)
        annotated = set(project.annotated_docs)
        remaining = [d for d in project.training_ids if d not in annotated]
        if not remaining:
            raise errors.QueueExhausted(f"all training documents of {project_id} annotated")
        bundle = project.current_bundle
        scored = []
        for doc_id in remaining:
            doc = self.docs.get(doc_id)
            mentions = annotate_text(doc.text, bundle)
            mean_conf = (sum(m.confidence for m in mentions) / len(mentions)) if mentions else 1.0
            scored.append((mean_conf, doc_id, doc, mentions))
        scored.sort(key=lambda item: (item[0], item[1]))
        _, doc_id, doc, mentions = scored[0]
        project.served.add(doc_id)
        return doc, mentions

    def submit_annotations(self, project_id: str, doc_id: str,
                           annotations: List[HumanAnnotation]) -> int:
        project = self._project(project_id)
        if doc_id in project.validation_ids:
            raise errors.ValidationDocument(f"{doc_id} is a validation document")
        if doc_id not in project.training_ids:
            raise errors.UnknownDocument(f"{doc_id} not in project training set")
        now = self.clock()
        seen = set()
        accepted = []
        for ann in annotations:
            if ann.cui not in project.current_bundle.cdb:
                raise errors.UnknownCui(ann.cui)
            key = (ann.start, ann.end, ann.cui, ann.correct)
            if key in seen:
                continue
            seen.add(key)
            accepted.append(HumanAnnotation(
                project_id, doc_id, ann.start, ann.end, ann.cui, ann.correct,
                dict(ann.meta_labels), ann.annotator, now,
            ))
        with project.log_lock:
            project.annotations.extend(accepted)
            if doc_id not in project.annotated_docs:
                project.annotated_docs.append(doc_id)
            self._append_log(project, accepted)
            n_done = len(project.annotated_docs)
        if n_done % project.batch_size == 0:
            self.retrain(project_id)
        return len(accepted)

    def retrain(self, project_id: str) -> MetricsSnapshot:
        project = self._project(project_id)
        if not project.annotations:
            raise errors.NoAnnotations(f"{project_id} has no stored annotations")
        if not project.train_lock.acquire(blocking=False):
            raise errors.TrainingBusy(f"{project_id} is already retraining")
        try:
            bundle = project.initial_bundle.clone()
            examples = []
            for ann in project.annotations:
                doc = self.docs.get(ann.doc_id)
                examples.append(SupervisedExample(doc.text, ann.start, ann.end,
                                                  ann.cui, ann.correct))
            train_supervised(examples, bundle.cdb, bundle.vocab,
                             window=bundle.window)
            snapshot = self._evaluate(project, bundle)
            project.snapshots.append(snapshot)
            project.current_bundle = bundle  # atomic swap
            return snapshot
        finally:
            project.train_lock.release()

    def _evaluate(self, project: Project, bundle: ModelBundle) -> MetricsSnapshot:
        gold = []
        predicted = []
        for doc_id in sorted(project.validation_ids):
            for start, end, cui in project.validation_gold.get(doc_id, []):
                gold.append((doc_id, start, end, cui))
            doc = self.docs.get(doc_id)
            for m in annotate_text(doc.text, bundle):
                predicted.append((doc_id, m.start, m.end, m.cui))
        result = evaluate_ner(gold, predicted)
        return MetricsSnapshot(
            after_n_docs=len(project.annotated_docs),
            per_cui_f1={c: v["f1"] for c, v in result["per_cui"].items()},
            macro_f1=result["macro_f1"],
            created_at=self.clock(),
        )

    def metrics_timeline(self, project_id: str) -> List[MetricsSnapshot]:
        return list(self._project(project_id).snapshots)

    def replay(self, project_id: str) -> ModelBundle:
        """Rebuild the final bundle from the initial bundle and the full
        annotation log; used to audit replay determinism."""
        project = self._project(project_id)
        bundle = project.initial_bundle.clone()
        examples = [SupervisedExample(self.docs.get(a.doc_id).text, a.start,
                                      a.end, a.cui, a.correct)
                    for a in project.annotations]
        if examples:
            train_supervised(examples, bundle.cdb, bundle.vocab, window=bundle.window)
        return bundle

    def _append_log(self, project: Project, annotations: List[HumanAnnotation]) -> None:
        if self.log_dir is None:
            return
        self.log_dir.mkdir(parents=True, exist_ok=True)
        path = self.log_dir / f"{project.project_id}.jsonl"
        with path.open("a", encoding="utf-8") as fh:
            for ann in annotations:
                fh.write(json.dumps(ann.to_dict()))
                fh.write("\n")
