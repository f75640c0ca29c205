"""Word-level vocabulary and the skip-gram negative-sampling trainer.

Training maximizes sigma(u.v) for each (center, context) pair within the
window against `negatives` samples drawn from the unigram^0.75
distribution, with the learning rate decayed linearly from 0.025 to
0.0001 over all pairs. Fully deterministic for a fixed seed; final
vectors are unit-normalized.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Optional

import numpy as np

from .. import errors
from ..index.analysis import tokenize

LR_START = 0.025
LR_END = 0.0001


class Vocab:
    def __init__(self, dim: int):
        self.dim = dim
        self.counts: Dict[str, int] = {}
        self.vectors: Dict[str, np.ndarray] = {}

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    def vector(self, word: str) -> Optional[np.ndarray]:
        return self.vectors.get(word)

    def set_vector(self, word: str, vec: np.ndarray, count: int = 1) -> None:
        arr = np.asarray(vec, dtype=np.float64)
        norm = float(np.linalg.norm(arr))
        self.vectors[word] = arr / norm if norm > 0 else arr
        self.counts[word] = count

    @classmethod
    def from_random(cls, words: Iterable[str], dim: int, seed: int = 0) -> "Vocab":
        """Vocab with random unit vectors; handy when embedding quality is
        irrelevant and only determinism matters."""
        rng = np.random.RandomState(seed)
        vocab = cls(dim)
        for word in words:
            vocab.set_vector(word, rng.normal(size=dim))
        return vocab


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + np.exp(-x))
    e = np.exp(x)
    return e / (1.0 + e)


def train_word_embeddings(corpus: Iterable[str], dim: int = 50, window: int = 5,
                          negatives: int = 5, epochs: int = 5, seed: int = 0) -> Vocab:
    """Train skip-gram-with-negative-sampling embeddings over raw texts."""
    if dim < 2:
        raise ValueError("dimension must be >= 2")
    docs: List[List[str]] = []
    for text in corpus:
        words = [t.text for t in tokenize(text)]
        if words:
            docs.append(words)
    if not docs:
        raise errors.EmptyCorpus("no tokens in corpus")

    counts: Dict[str, int] = {}
    for words in docs:
        for w in words:
            counts[w] = counts.get(w, 0) + 1
    index = {w: i for i, w in enumerate(sorted(counts))}
    vocab_size = len(index)

    rng = np.random.RandomState(seed)
    in_vecs = (rng.rand(vocab_size, dim) - 0.5) / dim
    out_vecs = np.zeros((vocab_size, dim))

    freqs = np.array([counts[w] for w in sorted(counts)], dtype=np.float64) ** 0.75
    cumulative = np.cumsum(freqs / freqs.sum())

    total_pairs = 0
    for words in docs:
        for pos in range(len(words)):
            lo = max(0, pos - window)
            hi = min(len(words), pos + window + 1)
            total_pairs += (hi - lo - 1)
    total_pairs *= epochs

    processed = 0
    for _ in range(epochs):
        for words in docs:
            ids = [index[w] for w in words]
            for pos, center in enumerate(ids):
                lo = max(0, pos - window)
                hi = min(len(ids), pos + window + 1)
                for ctx_pos in range(lo, hi):
                    if ctx_pos == pos:
                        continue
                    lr = max(LR_END, LR_START * (1.0 - processed / total_pairs))
                    processed += 1
                    context = ids[ctx_pos]
                    u = in_vecs[center]
                    grad_u = np.zeros(dim)
                    # positive pair
                    v = out_vecs[context]
                    g = (_sigmoid(float(u @ v)) - 1.0) * lr
                    grad_u += g * v
                    out_vecs[context] = v - g * u
                    # negative samples
                    draws = np.searchsorted(cumulative, rng.rand(negatives))
                    for neg in draws:
                        if neg == context:
                            continue
                        v = out_vecs[neg]
                        g = _sigmoid(float(u @ v)) * lr
                        grad_u += g * v
                        out_vecs[neg] = v - g * u
                    in_vecs[center] = u - grad_u

    vocab = Vocab(dim)
    for word, i in index.items():
        vocab.set_vector(word, in_vecs[i], counts[word])
    return vocab
