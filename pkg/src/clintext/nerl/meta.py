"""Meta-annotation classifiers (negation, experiencer, temporality).

A multinomial logistic model over a bag-of-embeddings feature: the mean
embedding of up to k known tokens left of the mention concatenated with
the same for the right. Trained by full-batch gradient descent, so the
result is deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .. import errors
from ..index.analysis import Token
from .vocab import Vocab

DEFAULT_CONTEXT = 7


@dataclass
class MetaModel:
    task: str
    labels: Tuple[str, ...]
    k: int
    dim: int
    weights: np.ndarray  # (labels, 2*dim)
    bias: np.ndarray     # (labels,)


def meta_features(tokens: Sequence[Token], span: Tuple[int, int], vocab: Vocab,
                  k: int = DEFAULT_CONTEXT) -> np.ndarray:
    """Mean left-context embedding concatenated with mean right-context
    embedding; either half is zero when no known word is in range."""
    first, last = span
    left = [vocab.vector(t.text) for t in tokens[max(0, first - k):first]]
    left = [v for v in left if v is not None]
    right = [vocab.vector(t.text) for t in tokens[last:last + k]]
    right = [v for v in right if v is not None]
    dim = vocab.dim
    left_mean = np.mean(left, axis=0) if left else np.zeros(dim)
    right_mean = np.mean(right, axis=0) if right else np.zeros(dim)
    return np.concatenate([left_mean, right_mean])


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def logistic_loss_and_grad(weights: np.ndarray, bias: np.ndarray,
                           features: np.ndarray, label_idx: np.ndarray):
    """Mean cross-entropy of softmax(W f + b) and its analytic gradients."""
    n = features.shape[0]
    probs = softmax(features @ weights.T + bias)
    loss = -float(np.mean(np.log(probs[np.arange(n), label_idx] + 1e-300)))
    delta = probs.copy()
    delta[np.arange(n), label_idx] -= 1.0
    grad_w = delta.T @ features / n
    grad_b = delta.mean(axis=0)
    return loss, grad_w, grad_b


def train_meta(task: str, examples: List[Tuple[Sequence[Token], Tuple[int, int], str]],
               vocab: Vocab, k: int = DEFAULT_CONTEXT, epochs: int = 300,
               lr: float = 1.0, seed: int = 0) -> MetaModel:
    labels = tuple(sorted({label for _, _, label in examples}))
    if len(labels) < 2:
        raise errors.SingleLabelData(f"task {task} needs >= 2 labels")
    label_to_idx = {lab: i for i, lab in enumerate(labels)}

    features = np.stack([meta_features(toks, span, vocab, k)
                         for toks, span, _ in examples])
    label_idx = np.array([label_to_idx[label] for _, _, label in examples])

    rng = np.random.RandomState(seed)
    weights = rng.normal(scale=0.01, size=(len(labels), 2 * vocab.dim))
    bias = np.zeros(len(labels))
    for _ in range(epochs):
        _, grad_w, grad_b = logistic_loss_and_grad(weights, bias, features, label_idx)
        weights -= lr * grad_w
        bias -= lr * grad_b
    return MetaModel(task, labels, k, vocab.dim, weights, bias)


def predict_meta(model: MetaModel, tokens: Sequence[Token], span: Tuple[int, int],
                 vocab: Vocab) -> Tuple[str, float]:
    feats = meta_features(tokens, span, vocab, model.k)
    probs = softmax(model.weights @ feats + model.bias)
    idx = int(np.argmax(probs))
    return model.labels[idx], float(probs[idx])
