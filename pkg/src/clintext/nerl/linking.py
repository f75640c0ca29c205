"""Candidate detection (greedy longest string match) and embedding-
similarity linking, plus the full annotate_text composition."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Set, Tuple

import numpy as np

from ..errors import NoContext
from ..index.analysis import Token, tokenize
from .cdb import ConceptDatabase
from .context import DEFAULT_WINDOW, compute_context_vector
from .mentions import EntityMention
from .vocab import Vocab

DEFAULT_THETA = 0.3
UNTRAINED_CONFIDENCE = 0.5


@dataclass(frozen=True)
class Candidate:
    token_span: Tuple[int, int]  # (first, last+1) token indices
    name: str                    # normalized matched name
    cuis: frozenset


def detect_candidates(tokens: List[Token], cdb: ConceptDatabase) -> List[Candidate]:
    """Greedy longest-match left-to-right over normalized token n-grams up
    to the CDB's longest name; matched spans never overlap and scanning
    resumes after each match."""
    out: List[Candidate] = []
    texts = [t.text for t in tokens]
    i = 0
    n = len(texts)
    while i < n:
        matched = False
        max_len = min(cdb.max_name_len, n - i)
        for length in range(max_len, 0, -1):
            name = " ".join(texts[i:i + length])
            cuis = cdb.cuis_for(name)
            if cuis:
                out.append(Candidate((i, i + length), name, frozenset(cuis)))
                i += length
                matched = True
                break
        if not matched:
            i += 1
    return out


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    return float(a @ b)  # both unit vectors


def link_entities(candidates: List[Candidate], tokens: List[Token],
                  cdb: ConceptDatabase, vocab: Vocab, theta: float = DEFAULT_THETA,
                  window: int = DEFAULT_WINDOW, text: Optional[str] = None) -> List[EntityMention]:
    """Resolve candidates to EntityMentions.

    Unambiguous + untrained concept: linked at confidence 0.5.
    Unambiguous + trained: cosine(concept, context) must reach theta.
    Ambiguous: argmax cosine over trained candidate cuis, same threshold;
    ambiguous candidates whose cuis are all untrained are dropped.
    """
    mentions: List[EntityMention] = []
    for cand in candidates:
        first, last = cand.token_span
        start = tokens[first].start
        end = tokens[last - 1].end
        surface = text[start:end] if text is not None else " ".join(
            t.text for t in tokens[first:last])

        ctx = None
        try:
            ctx = compute_context_vector(tokens, cand.token_span, vocab, window)
        except NoContext:
            pass

        cui = None
        confidence = None
        if len(cand.cuis) == 1:
            only = next(iter(cand.cuis))
            entry = cdb.concepts[only]
            unit = entry.unit_vector()
            if unit is None:
                cui, confidence = only, UNTRAINED_CONFIDENCE
            elif ctx is not None:
                cos = _cosine(unit, ctx)
                if cos >= theta:
                    cui, confidence = only, min(1.0, max(0.0, cos))
        else:
            best_cui, best_cos = None, -2.0
            for cand_cui in sorted(cand.cuis):
                unit = cdb.concepts[cand_cui].unit_vector()
                if unit is None or ctx is None:
                    continue
                cos = _cosine(unit, ctx)
                if cos > best_cos:
                    best_cui, best_cos = cand_cui, cos
            if best_cui is not None and best_cos >= theta:
                cui, confidence = best_cui, min(1.0, max(0.0, best_cos))

        if cui is not None:
            mentions.append(EntityMention(
                start=start, end=end, text=surface, cui=cui,
                confidence=confidence, token_span=cand.token_span,
                detected_name=cand.name,
            ))
    return mentions
