"""Context vectors: unit-normalized mean of word embeddings around a span."""

from __future__ import annotations

from typing import List, Optional, Tuple

import numpy as np

from ..errors import NoContext
from ..index.analysis import Token
from .vocab import Vocab

DEFAULT_WINDOW = 9


def compute_context_vector(tokens: List[Token], span: Tuple[int, int], vocab: Vocab,
                           window: int = DEFAULT_WINDOW) -> np.ndarray:
    """Mean vector of the known words within `window` token positions on
    each side of span (token index range, end exclusive), excluding the
    span itself. Raises NoContext when no surrounding word is known.
    """
    first, last = span
    if not (0 <= first < last <= len(tokens)):
        raise ValueError(f"span {span} outside token list")
    vectors = []
    for i in range(max(0, first - window), first):
        vec = vocab.vector(tokens[i].text)
        if vec is not None:
            vectors.append(vec)
    for i in range(last, min(len(tokens), last + window)):
        vec = vocab.vector(tokens[i].text)
        if vec is not None:
            vectors.append(vec)
    if not vectors:
        raise NoContext("no known words around span")
    mean = np.mean(vectors, axis=0)
    norm = float(np.linalg.norm(mean))
    if norm == 0.0:
        raise NoContext("context vector has zero norm")
    return mean / norm
