"""Versioned binary serialization for model state.

Every file is framed as: 4-byte magic, u16 format version, u64 payload
length, payload, sha256(payload). Integers are little-endian; strings
are u32-length-prefixed UTF-8; vectors are float64 little-endian. The
byte output is deterministic for identical model state (keys are written
in sorted order), which is what makes retrain-replay auditable.
See docs/model_formats.md.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from .bundle import ModelBundle
from .cdb import ConceptDatabase, ConceptEntry
from .docclf import DocClassifier
from .meta import MetaModel
from .vocab import Vocab

VERSION = 1
MAGIC = {
    "cdb": b"CTDB",
    "vocab": b"CTVC",
    "meta": b"CTMM",
    "docclf": b"CTDC",
}


class _Writer:
    def __init__(self):
        self.chunks = []

    def u8(self, v): self.chunks.append(struct.pack("<B", v))
    def u32(self, v): self.chunks.append(struct.pack("<I", v))
    def u64(self, v): self.chunks.append(struct.pack("<Q", v))
    def f64(self, v): self.chunks.append(struct.pack("<d", v))

    def str(self, s: str):
        raw = s.encode("utf-8")
        self.u32(len(raw))
        self.chunks.append(raw)

    def vec(self, arr: np.ndarray):
        data = np.ascontiguousarray(arr, dtype="<f8")
        self.u32(data.size)
        self.chunks.append(data.tobytes())

    def payload(self) -> bytes:
        return b"".join(self.chunks)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.off = 0

    def take(self, n: int) -> bytes:
        out = self.data[self.off:self.off + n]
        self.off += n
        return out

    def u8(self): return struct.unpack("<B", self.take(1))[0]
    def u32(self): return struct.unpack("<I", self.take(4))[0]
    def u64(self): return struct.unpack("<Q", self.take(8))[0]
    def f64(self): return struct.unpack("<d", self.take(8))[0]

    def str(self) -> str:
        return self.take(self.u32()).decode("utf-8")

    def vec(self) -> np.ndarray:
        n = self.u32()
        return np.frombuffer(self.take(8 * n), dtype="<f8").copy()


def _frame(kind: str, payload: bytes) -> bytes:
    return (MAGIC[kind] + struct.pack("<HQ", VERSION, len(payload))
            + payload + hashlib.sha256(payload).digest())


def _unframe(kind: str, blob: bytes) -> bytes:
    if blob[:4] != MAGIC[kind]:
        raise ValueError(f"bad magic for {kind} file")
    version, length = struct.unpack("<HQ", blob[4:14])
    if version != VERSION:
        raise ValueError(f"unsupported {kind} format version {version}")
    payload = blob[14:14 + length]
    if hashlib.sha256(payload).digest() != blob[14 + length:14 + length + 32]:
        raise ValueError(f"checksum mismatch in {kind} file")
    return payload


# --- CDB -------------------------------------------------------------------

def cdb_to_bytes(cdb: ConceptDatabase) -> bytes:
    w = _Writer()
    w.u32(len(cdb.concepts))
    for cui in sorted(cdb.concepts):
        entry = cdb.concepts[cui]
        w.str(cui)
        w.str(entry.preferred_name)
        w.str(entry.type_id)
        w.u32(len(entry.names))
        for name in sorted(entry.names):
            w.str(name)
        if entry.mean_vector is None:
            w.u8(0)
        else:
            w.u8(1)
            w.vec(entry.mean_vector)
        w.u64(entry.train_count)
    return _frame("cdb", w.payload())


def cdb_from_bytes(blob: bytes) -> ConceptDatabase:
    r = _Reader(_unframe("cdb", blob))
    cdb = ConceptDatabase()
    for _ in range(r.u32()):
        cui = r.str()
        preferred = r.str()
        type_id = r.str()
        names = {r.str() for _ in range(r.u32())}
        vec = r.vec() if r.u8() else None
        count = r.u64()
        cdb.concepts[cui] = ConceptEntry(cui, preferred, names, type_id, vec, count)
        for name in names:
            cdb.name_index.setdefault(name, set()).add(cui)
            cdb.max_name_len = max(cdb.max_name_len, len(name.split(" ")))
    return cdb


# --- Vocab -----------------------------------------------------------------

def vocab_to_bytes(vocab: Vocab) -> bytes:
    w = _Writer()
    w.u32(vocab.dim)
    w.u32(len(vocab.vectors))
    for word in sorted(vocab.vectors):
        w.str(word)
        w.u64(vocab.counts.get(word, 1))
        w.vec(vocab.vectors[word])
    return _frame("vocab", w.payload())


def vocab_from_bytes(blob: bytes) -> Vocab:
    r = _Reader(_unframe("vocab", blob))
    vocab = Vocab(r.u32())
    for _ in range(r.u32()):
        word = r.str()
        count = r.u64()
        vec = r.vec()
        vocab.vectors[word] = vec
        vocab.counts[word] = count
    return vocab


# --- MetaModel -------------------------------------------------------------

def meta_to_bytes(model: MetaModel) -> bytes:
    w = _Writer()
    w.str(model.task)
    w.u32(len(model.labels))
    for label in model.labels:
        w.str(label)
    w.u32(model.k)
    w.u32(model.dim)
    w.vec(model.weights.reshape(-1))
    w.vec(model.bias)
    return _frame("meta", w.payload())


def meta_from_bytes(blob: bytes) -> MetaModel:
    r = _Reader(_unframe("meta", blob))
    task = r.str()
    labels = tuple(r.str() for _ in range(r.u32()))
    k = r.u32()
    dim = r.u32()
    weights = r.vec().reshape(len(labels), 2 * dim)
    bias = r.vec()
    return MetaModel(task, labels, k, dim, weights, bias)


# --- DocClassifier ---------------------------------------------------------

def docclf_to_bytes(clf: DocClassifier) -> bytes:
    w = _Writer()
    w.u32(len(clf.labels))
    for label in clf.labels:
        w.str(label)
    w.u32(clf.dim)
    w.u32(len(clf.idf))
    for word in sorted(clf.idf):
        w.str(word)
        w.f64(clf.idf[word])
    w.vec(clf.weights.reshape(-1))
    w.vec(clf.bias)
    return _frame("docclf", w.payload())


def docclf_from_bytes(blob: bytes) -> DocClassifier:
    r = _Reader(_unframe("docclf", blob))
    labels = tuple(r.str() for _ in range(r.u32()))
    dim = r.u32()
    idf = {}
    for _ in range(r.u32()):
        word = r.str()
        idf[word] = r.f64()
    weights = r.vec().reshape(len(labels), dim)
    bias = r.vec()
    return DocClassifier(labels, dim, idf, weights, bias)


# --- bundle directory ------------------------------------------------------

def save_bundle(bundle: ModelBundle, directory: Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "cdb.bin").write_bytes(cdb_to_bytes(bundle.cdb))
    (directory / "vocab.bin").write_bytes(vocab_to_bytes(bundle.vocab))
    for task in sorted(bundle.meta_models):
        (directory / f"meta_{task}.bin").write_bytes(meta_to_bytes(bundle.meta_models[task]))
    (directory / "bundle.json").write_text(json.dumps({
        "theta": bundle.theta,
        "window": bundle.window,
        "meta_tasks": sorted(bundle.meta_models),
    }, indent=2, sort_keys=True), encoding="utf-8")


def load_bundle(directory: Path) -> ModelBundle:
    directory = Path(directory)
    config = json.loads((directory / "bundle.json").read_text(encoding="utf-8"))
    cdb = cdb_from_bytes((directory / "cdb.bin").read_bytes())
    vocab = vocab_from_bytes((directory / "vocab.bin").read_bytes())
    meta = {}
    for task in config["meta_tasks"]:
        meta[task] = meta_from_bytes((directory / f"meta_{task}.bin").read_bytes())
    return ModelBundle(cdb, vocab, meta, config["theta"], config["window"])


def bundle_fingerprint(bundle: ModelBundle) -> str:
    """Stable digest of the full bundle state (replay-determinism checks)."""
    h = hashlib.sha256()
    h.update(cdb_to_bytes(bundle.cdb))
    h.update(vocab_to_bytes(bundle.vocab))
    for task in sorted(bundle.meta_models):
        h.update(meta_to_bytes(bundle.meta_models[task]))
    return h.hexdigest()
