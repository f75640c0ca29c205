from .analysis import Token, tokenize
from .queryparse import (And, DateRange, FieldFilter, Not, Or, Phrase, Prefix, Term,
                         parse_query, print_query)
from .core import InvertedIndex, SearchHit

__all__ = [
    "Token", "tokenize",
    "And", "DateRange", "FieldFilter", "Not", "Or", "Phrase", "Prefix", "Term",
    "parse_query", "print_query",
    "InvertedIndex", "SearchHit",
]
