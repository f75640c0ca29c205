"""Exact-span NER evaluation: per-cui precision/recall/F1 and macro-F1."""

from __future__ import annotations

from typing import Dict, Iterable, Tuple

MentionKey = Tuple[str, int, int, str]  # (doc_id, start, end, cui)


def evaluate_ner(gold: Iterable[MentionKey], predicted: Iterable[MentionKey]) -> dict:
    """A prediction is a true positive iff (doc_id, start, end, cui) exactly
    matches a gold mention. Per-cui scores cover every cui with gold or
    predicted mentions; macro-F1 averages only cuis present in gold.
    Empty denominators score 0 by convention.
    """
    gold_set = set(gold)
    pred_set = set(predicted)
    cuis = {k[3] for k in gold_set} | {k[3] for k in pred_set}
    per_cui: Dict[str, Dict[str, float]] = {}
    gold_cuis = []
    for cui in sorted(cuis):
        g = {k for k in gold_set if k[3] == cui}
        p = {k for k in pred_set if k[3] == cui}
        tp = len(g & p)
        precision = tp / len(p) if p else 0.0
        recall = tp / len(g) if g else 0.0
        f1 = (2 * precision * recall / (precision + recall)) if (precision + recall) else 0.0
        per_cui[cui] = {"precision": precision, "recall": recall, "f1": f1}
        if g:
            gold_cuis.append(cui)
    macro_f1 = (sum(per_cui[c]["f1"] for c in gold_cuis) / len(gold_cuis)) if gold_cuis else 0.0
    return {"per_cui": per_cui, "macro_f1": macro_f1}
