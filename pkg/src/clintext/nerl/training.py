"""Concept-vector training: self-supervised running means from unambiguous
matches, and supervised fine-tuning from human verdicts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np

from .. import errors
from ..index.analysis import tokenize
from .cdb import ConceptDatabase
from .context import DEFAULT_WINDOW, compute_context_vector
from .linking import detect_candidates
from .vocab import Vocab


def train_self_supervised(corpus: Iterable[str], cdb: ConceptDatabase, vocab: Vocab,
                          window: int = DEFAULT_WINDOW) -> ConceptDatabase:
    """Update concept means in place from every unambiguous candidate with a
    computable context vector; ambiguous names never update. The stored
    mean stays un-normalized; unit normalization happens at read time.
    """
    for text in corpus:
        tokens = tokenize(text)
        for cand in detect_candidates(tokens, cdb):
            if len(cand.cuis) != 1:
                continue
            try:
                ctx = compute_context_vector(tokens, cand.token_span, vocab, window)
            except errors.NoContext:
                continue
            entry = cdb.concepts[next(iter(cand.cuis))]
            n = entry.train_count
            if entry.mean_vector is None or n == 0:
                entry.mean_vector = ctx.copy()
            else:
                entry.mean_vector = (n * entry.mean_vector + ctx) / (n + 1)
            entry.train_count = n + 1
    return cdb


@dataclass(frozen=True)
class SupervisedExample:
    """One human verdict: character span of a mention in `text`."""
    text: str
    start: int
    end: int
    cui: str
    correct: bool


def _token_span_for_chars(tokens, start: int, end: int) -> Optional[Tuple[int, int]]:
    covered = [i for i, t in enumerate(tokens) if t.start < end and t.end > start]
    if not covered:
        return None
    return (covered[0], covered[-1] + 1)


def train_supervised(examples: List[SupervisedExample], cdb: ConceptDatabase,
                     vocab: Vocab, lr: float = 0.1,
                     window: int = DEFAULT_WINDOW) -> List[SupervisedExample]:
    """Apply verdicts in input order; returns the examples that had to be
    skipped (no computable context).

    correct=True on an untrained concept sets the mean to the context;
    on a trained one it pulls the mean toward the context by lr.
    correct=False pushes the mean away by subtracting lr * context.
    Only positives increment train_count.
    """
    skipped: List[SupervisedExample] = []
    for ex in examples:
        if ex.cui not in cdb.concepts:
            raise errors.UnknownCui(ex.cui)
        tokens = tokenize(ex.text)
        span = _token_span_for_chars(tokens, ex.start, ex.end)
        if span is None:
            skipped.append(ex)
            continue
        try:
            ctx = compute_context_vector(tokens, span, vocab, window)
        except errors.NoContext:
            skipped.append(ex)
            continue
        entry = cdb.concepts[ex.cui]
        if ex.correct:
            if entry.mean_vector is None:
                entry.mean_vector = ctx.copy()
            else:
                entry.mean_vector = entry.mean_vector + lr * (ctx - entry.mean_vector)
            entry.train_count += 1
        else:
            if entry.mean_vector is None:
                entry.mean_vector = -lr * ctx
            else:
                entry.mean_vector = entry.mean_vector - lr * ctx
    return skipped
