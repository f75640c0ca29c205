"""Concept database: ontology names, learned concept vectors, train counts."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Set, Tuple

import numpy as np

from .. import errors
from ..index.analysis import normalize


@dataclass
class ConceptEntry:
    cui: str
    preferred_name: str
    names: Set[str] = field(default_factory=set)  # normalized forms
    type_id: str = ""
    mean_vector: Optional[np.ndarray] = None  # stored UN-normalized running mean
    train_count: int = 0

    @property
    def trained(self) -> bool:
        return self.mean_vector is not None

    def unit_vector(self) -> Optional[np.ndarray]:
        """Concept vector exposed for similarity; always unit norm."""
        if self.mean_vector is None:
            return None
        norm = float(np.linalg.norm(self.mean_vector))
        if norm == 0.0:
            return None
        return self.mean_vector / norm


class ConceptDatabase:
    def __init__(self):
        self.concepts: Dict[str, ConceptEntry] = {}
        self.name_index: Dict[str, Set[str]] = {}
        self.max_name_len: int = 0

    def add_name(self, cui: str, name: str, is_preferred: bool, type_id: str = "") -> None:
        normalized = normalize(name)
        if not normalized:
            raise errors.EmptyName(f"empty name for {cui}")
        entry = self.concepts.get(cui)
        if entry is None:
            entry = ConceptEntry(cui=cui, preferred_name="", type_id=type_id)
            self.concepts[cui] = entry
        if is_preferred:
            if entry.preferred_name:
                raise errors.DuplicatePreferred(f"{cui} already has a preferred name")
            entry.preferred_name = name
        entry.names.add(normalized)
        self.name_index.setdefault(normalized, set()).add(cui)
        self.max_name_len = max(self.max_name_len, len(normalized.split(" ")))

    def cuis_for(self, normalized_name: str) -> Set[str]:
        return self.name_index.get(normalized_name, set())

    def __contains__(self, cui: str) -> bool:
        return cui in self.concepts

    def clone(self) -> "ConceptDatabase":
        out = ConceptDatabase()
        out.max_name_len = self.max_name_len
        for cui, entry in self.concepts.items():
            out.concepts[cui] = ConceptEntry(
                cui=entry.cui,
                preferred_name=entry.preferred_name,
                names=set(entry.names),
                type_id=entry.type_id,
                mean_vector=None if entry.mean_vector is None else entry.mean_vector.copy(),
                train_count=entry.train_count,
            )
        for name, cuis in self.name_index.items():
            out.name_index[name] = set(cuis)
        return out


def build_cdb(rows: List[Tuple[str, str, bool]]) -> ConceptDatabase:
    """Build from ontology rows (cui, name, is_preferred)."""
    cdb = ConceptDatabase()
    for row in rows:
        cui, name, is_preferred = row[0], row[1], row[2]
        cdb.add_name(cui, name, bool(is_preferred))
    return cdb


def load_ontology_tsv(path: Path) -> List[Tuple[str, str, bool]]:
    """Read `cui<TAB>name<TAB>T|F` rows."""
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.rstrip("\n")
        if not line:
            continue
        cui, name, flag = line.split("\t")
        rows.append((cui, name, flag.strip().upper() == "T"))
    return rows
