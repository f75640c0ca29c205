"""Multi-label document classifier over sentence embeddings.

A document embeds as the tf-idf-weighted mean of its word vectors,
unit-normalized; one-vs-rest logistic models give per-label
probabilities and classification returns every label at or above the
threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Set, Tuple

import numpy as np

from .. import errors
from ..index.analysis import tokenize
from .vocab import Vocab

DEFAULT_THRESHOLD = 0.5


@dataclass
class DocClassifier:
    labels: Tuple[str, ...]
    dim: int
    idf: Dict[str, float]
    weights: np.ndarray  # (labels, dim)
    bias: np.ndarray     # (labels,)


def _sentence_embedding(text: str, vocab: Vocab, idf: Dict[str, float]) -> np.ndarray:
    counts: Dict[str, int] = {}
    for tok in tokenize(text):
        counts[tok.text] = counts.get(tok.text, 0) + 1
    acc = np.zeros(vocab.dim)
    for word, tf in counts.items():
        vec = vocab.vector(word)
        if vec is not None:
            acc += tf * idf.get(word, 1.0) * vec
    norm = float(np.linalg.norm(acc))
    return acc / norm if norm > 0 else acc


def _compute_idf(texts: Sequence[str]) -> Dict[str, float]:
    n = len(texts)
    df: Dict[str, int] = {}
    for text in texts:
        for word in {t.text for t in tokenize(text)}:
            df[word] = df.get(word, 0) + 1
    return {w: math.log((1 + n) / (1 + c)) + 1.0 for w, c in df.items()}


def train_doc_classifier(docs: List[Tuple[str, Set[str]]], vocab: Vocab,
                         epochs: int = 500, lr: float = 1.0,
                         seed: int = 0) -> DocClassifier:
    labels = tuple(sorted({lab for _, labs in docs for lab in labs}))
    if len(labels) < 2:
        raise errors.SingleLabelData("need >= 2 distinct labels")
    texts = [text for text, _ in docs]
    idf = _compute_idf(texts)
    features = np.stack([_sentence_embedding(t, vocab, idf) for t in texts])
    targets = np.zeros((len(docs), len(labels)))
    for i, (_, labs) in enumerate(docs):
        for lab in labs:
            targets[i, labels.index(lab)] = 1.0

    rng = np.random.RandomState(seed)
    weights = rng.normal(scale=0.01, size=(len(labels), vocab.dim))
    bias = np.zeros(len(labels))
    n = len(docs)
    for _ in range(epochs):
        probs = 1.0 / (1.0 + np.exp(-(features @ weights.T + bias)))
        delta = probs - targets
        weights -= lr * (delta.T @ features) / n
        bias -= lr * delta.mean(axis=0)
    return DocClassifier(labels, vocab.dim, idf, weights, bias)


def classify_doc(clf: DocClassifier, text: str, vocab: Vocab,
                 threshold: float = DEFAULT_THRESHOLD) -> Set[str]:
    emb = _sentence_embedding(text, vocab, clf.idf)
    if not np.any(emb):
        return set()
    probs = 1.0 / (1.0 + np.exp(-(clf.weights @ emb + clf.bias)))
    return {clf.labels[i] for i, p in enumerate(probs) if p >= threshold}


def doc_label_probs(clf: DocClassifier, text: str, vocab: Vocab) -> Dict[str, float]:
    emb = _sentence_embedding(text, vocab, clf.idf)
    probs = 1.0 / (1.0 + np.exp(-(clf.weights @ emb + clf.bias)))
    return {clf.labels[i]: float(p) for i, p in enumerate(probs)}
