"""Shared tokenizer: lowercase, split on any non-alphanumeric scalar.

Offsets always reference the original text so downstream highlighting
and entity offsets stay aligned.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List


@dataclass(frozen=True)
class Token:
    text: str
    start: int
    end: int
    position: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    start = None
    for i, ch in enumerate(text):
        if ch.isalnum():
            if start is None:
                start = i
        else:
            if start is not None:
                tokens.append(Token(text[start:i].lower(), start, i, len(tokens)))
                start = None
    if start is not None:
        tokens.append(Token(text[start:].lower(), start, len(text), len(tokens)))
    return tokens


def normalize(text: str) -> str:
    """Normalized form used for concept-name matching: tokenized, lowercased,
    single-space joined."""
    return " ".join(t.text for t in tokenize(text))
