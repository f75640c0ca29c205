"""Inverted index with boolean retrieval, BM25 ranking, highlighting and
count aggregations.

Ranking sums BM25 contributions of the positive Term/Phrase leaves of the
query (k1 = 1.2, b = 0.75, idf = ln(1 + (N - df + 0.5)/(df + 0.5))).
Prefix leaves and filters match but add no score. Ties break by
ascending doc_id.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from ..documents import Document, format_instant
from ..errors import UnknownField
from .analysis import Token, tokenize
from .queryparse import And, DateRange, FieldFilter, Not, Or, Phrase, Prefix, Term

K1 = 1.2
B = 0.75

STORED_FIELDS = ("doc_type", "timestamp", "patient_id")


@dataclass(frozen=True)
class SearchHit:
    doc_id: str
    score: float
    highlights: Tuple[Tuple[int, int], ...] = ()


def bm25_idf(n_docs: int, df: int) -> float:
    return math.log(1.0 + (n_docs - df + 0.5) / (df + 0.5))


def bm25_term(tf: int, df: int, n_docs: int, doc_len: int, avg_len: float) -> float:
    if tf == 0 or df == 0:
        return 0.0
    norm = K1 * (1.0 - B + B * (doc_len / avg_len if avg_len > 0 else 0.0))
    return bm25_idf(n_docs, df) * tf * (K1 + 1.0) / (tf + norm)


class InvertedIndex:
    """Postings keyed by term; one writer at a time, snapshot reads."""

    def __init__(self):
        # term -> doc_id -> (tf, positions)
        self.postings: Dict[str, Dict[str, Tuple[int, List[int]]]] = {}
        self.doc_lengths: Dict[str, int] = {}
        self.stored: Dict[str, Dict[str, str]] = {}
        # doc_id -> ordered token texts, for phrase checks and highlights
        self.doc_tokens: Dict[str, List[Token]] = {}
        self._write_lock = threading.Lock()

    # --- write side --------------------------------------------------------

    def index_document(self, doc: Document) -> None:
        with self._write_lock:
            if doc.doc_id in self.doc_lengths:
                self._remove(doc.doc_id)
            tokens = tokenize(doc.text)
            self.doc_tokens[doc.doc_id] = tokens
            self.doc_lengths[doc.doc_id] = len(tokens)
            self.stored[doc.doc_id] = {
                "doc_type": doc.doc_type,
                "timestamp": format_instant(doc.timestamp),
                "patient_id": doc.patient_id,
            }
            for tok in tokens:
                entry = self.postings.setdefault(tok.text, {})
                tf, positions = entry.get(doc.doc_id, (0, []))
                entry[doc.doc_id] = (tf + 1, positions + [tok.position])

    def _remove(self, doc_id: str) -> None:
        for term in list(self.postings):
            entry = self.postings[term]
            entry.pop(doc_id, None)
            if not entry:
                del self.postings[term]
        self.doc_lengths.pop(doc_id, None)
        self.stored.pop(doc_id, None)
        self.doc_tokens.pop(doc_id, None)

    def index_all(self, docs) -> None:
        for doc in docs:
            self.index_document(doc)

    # --- read side ---------------------------------------------------------

    @property
    def n_docs(self) -> int:
        return len(self.doc_lengths)

    def df(self, term: str) -> int:
        return len(self.postings.get(term, {}))

    def _avg_len(self) -> float:
        if not self.doc_lengths:
            return 0.0
        return sum(self.doc_lengths.values()) / len(self.doc_lengths)

    def _phrase_occurrences(self, doc_id: str, terms: Tuple[str, ...]) -> List[int]:
        """Start positions of consecutive-position occurrences of the phrase."""
        first = self.postings.get(terms[0], {}).get(doc_id)
        if first is None:
            return []
        starts = []
        for pos in first[1]:
            ok = True
            for offset, term in enumerate(terms[1:], start=1):
                entry = self.postings.get(term, {}).get(doc_id)
                if entry is None or (pos + offset) not in entry[1]:
                    ok = False
                    break
            if ok:
                starts.append(pos)
        return starts

    def _prefix_terms(self, prefix: str) -> List[str]:
        return [t for t in self.postings if t.startswith(prefix)]

    def _match(self, node) -> Set[str]:
        universe = set(self.doc_lengths)
        if isinstance(node, Term):
            return set(self.postings.get(node.text, {}))
        if isinstance(node, Prefix):
            out: Set[str] = set()
            for term in self._prefix_terms(node.text):
                out.update(self.postings[term])
            return out
        if isinstance(node, Phrase):
            candidates = set(self.postings.get(node.terms[0], {}))
            return {d for d in candidates if self._phrase_occurrences(d, node.terms)}
        if isinstance(node, FieldFilter):
            if node.field not in STORED_FIELDS:
                raise UnknownField(node.field)
            if node.field == "timestamp":
                return {d for d, f in self.stored.items()
                        if f["timestamp"][:10] == node.value[:10]}
            return {d for d, f in self.stored.items() if f[node.field] == node.value}
        if isinstance(node, DateRange):
            if node.field not in STORED_FIELDS:
                raise UnknownField(node.field)
            if node.field == "timestamp":
                return {d for d, f in self.stored.items()
                        if node.lo <= f["timestamp"][:10] <= node.hi}
            return {d for d, f in self.stored.items()
                    if node.lo <= f[node.field] <= node.hi}
        if isinstance(node, Not):
            return universe - self._match(node.child)
        if isinstance(node, And):
            result = universe
            for child in node.children:
                result = result & self._match(child)
                if not result:
                    break
            return result
        if isinstance(node, Or):
            result: Set[str] = set()
            for child in node.children:
                result = result | self._match(child)
            return result
        raise TypeError(f"unknown node {node!r}")

    def _positive_leaves(self, node, leaves: list) -> None:
        if isinstance(node, (Term, Phrase, Prefix)):
            leaves.append(node)
        elif isinstance(node, (And, Or)):
            for child in node.children:
                self._positive_leaves(child, leaves)
        # Not subtrees and filters contribute neither score nor highlights

    def _score(self, doc_id: str, leaves: list, avg_len: float) -> float:
        n = self.n_docs
        dl = self.doc_lengths[doc_id]
        score = 0.0
        for leaf in leaves:
            if isinstance(leaf, Term):
                entry = self.postings.get(leaf.text, {}).get(doc_id)
                if entry:
                    score += bm25_term(entry[0], self.df(leaf.text), n, dl, avg_len)
            elif isinstance(leaf, Phrase):
                occurrences = self._phrase_occurrences(doc_id, leaf.terms)
                if occurrences:
                    df = sum(1 for d in self.postings.get(leaf.terms[0], {})
                             if self._phrase_occurrences(d, leaf.terms))
                    score += bm25_term(len(occurrences), df, n, dl, avg_len)
        return score

    def _highlights(self, doc_id: str, leaves: list) -> Tuple[Tuple[int, int], ...]:
        tokens = self.doc_tokens[doc_id]
        spans: Set[Tuple[int, int]] = set()
        for leaf in leaves:
            if isinstance(leaf, Term):
                for tok in tokens:
                    if tok.text == leaf.text:
                        spans.add((tok.start, tok.end))
            elif isinstance(leaf, Prefix):
                for tok in tokens:
                    if tok.text.startswith(leaf.text):
                        spans.add((tok.start, tok.end))
            elif isinstance(leaf, Phrase):
                for pos in self._phrase_occurrences(doc_id, leaf.terms):
                    last = pos + len(leaf.terms) - 1
                    spans.add((tokens[pos].start, tokens[last].end))
        return tuple(sorted(spans))

    def match(self, ast) -> Set[str]:
        """Matching doc_id set without ranking."""
        return self._match(ast)

    def search(self, ast, top_k: int = 10) -> List[SearchHit]:
        if self.n_docs == 0:
            return []
        matches = self._match(ast)
        if not matches:
            return []
        leaves: list = []
        self._positive_leaves(ast, leaves)
        avg_len = self._avg_len()
        hits = []
        for doc_id in matches:
            score = self._score(doc_id, leaves, avg_len)
            hits.append(SearchHit(doc_id, score, self._highlights(doc_id, leaves)))
        hits.sort(key=lambda h: (-h.score, h.doc_id))
        return hits[:top_k]

    def aggregate(self, ast, by: Tuple[str, str]) -> List[Tuple[str, int]]:
        """by = ("field_terms", field) or ("date_histogram", "day|month|year")."""
        matches = self._match(ast)
        kind, arg = by
        counts: Dict[str, int] = {}
        if kind == "field_terms":
            if arg not in STORED_FIELDS:
                raise UnknownField(arg)
            for doc_id in matches:
                key = self.stored[doc_id][arg]
                counts[key] = counts.get(key, 0) + 1
        elif kind == "date_histogram":
            width = {"day": 10, "month": 7, "year": 4}.get(arg)
            if width is None:
                raise UnknownField(f"bad histogram bucket {arg!r}")
            for doc_id in matches:
                key = self.stored[doc_id]["timestamp"][:width]
                counts[key] = counts.get(key, 0) + 1
        else:
            raise UnknownField(f"bad aggregation kind {kind!r}")
        return sorted(counts.items())
