"""Model bundle: CDB + vocab + meta models, and the full annotation pass."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

from ..index.analysis import tokenize
from .cdb import ConceptDatabase
from .context import DEFAULT_WINDOW
from .linking import DEFAULT_THETA, detect_candidates, link_entities
from .mentions import EntityMention
from .meta import MetaModel, predict_meta
from .vocab import Vocab


@dataclass
class ModelBundle:
    cdb: ConceptDatabase
    vocab: Vocab
    meta_models: Dict[str, MetaModel] = field(default_factory=dict)
    theta: float = DEFAULT_THETA
    window: int = DEFAULT_WINDOW

    def clone(self) -> "ModelBundle":
        # vocab and meta models are read-only during fine-tuning; only the
        # CDB accumulates training state
        return ModelBundle(self.cdb.clone(), self.vocab, dict(self.meta_models),
                           self.theta, self.window)


def annotate_text(text: str, bundle: ModelBundle,
                  theta: Optional[float] = None) -> List[EntityMention]:
    """tokenize -> detect -> link -> meta-classify; offsets refer to `text`."""
    tokens = tokenize(text)
    if not tokens:
        return []
    candidates = detect_candidates(tokens, bundle.cdb)
    mentions = link_entities(candidates, tokens, bundle.cdb, bundle.vocab,
                             theta if theta is not None else bundle.theta,
                             bundle.window, text=text)
    if not bundle.meta_models:
        return mentions
    out = []
    for m in mentions:
        meta = dict(m.meta_labels)
        for task, model in bundle.meta_models.items():
            label, _prob = predict_meta(model, tokens, m.token_span, bundle.vocab)
            meta[task] = label
        out.append(EntityMention(
            start=m.start, end=m.end, text=m.text, cui=m.cui,
            confidence=m.confidence, meta_labels=meta,
            token_span=m.token_span, detected_name=m.detected_name,
        ))
    return out


def mentions_to_json(mentions: List[EntityMention], cdb: ConceptDatabase) -> dict:
    """The annotation wire format: {"entities": [...]}."""
    entities = []
    for m in mentions:
        entry = cdb.concepts.get(m.cui)
        entities.append({
            "start": m.start,
            "end": m.end,
            "text": m.text,
            "cui": m.cui,
            "pretty_name": entry.preferred_name if entry else "",
            "confidence": m.confidence,
            "meta": {
                "negation": m.meta_labels.get("negation"),
                "experiencer": m.meta_labels.get("experiencer"),
                "temporality": m.meta_labels.get("temporality"),
            },
        })
    return {"entities": entities}
