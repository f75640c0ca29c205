"""Binary segment persistence for the inverted index.

Layout (all integers little-endian, strings UTF-8 length-prefixed with a
u16; see docs/index_format.md):

  postings.bin  magic "CTIX", u16 version, u32 term count, then per term:
                term string, u32 entry count, per entry: doc_id string,
                u32 tf, u32 position count, positions as u32s.
  stored.bin    magic "CTSF", u16 version, u32 doc count, then per doc:
                doc_id, doc_type, timestamp, patient_id strings, u32 doc
                length, u32 token count, per token: text string, u32
                start, u32 end.
  manifest.json {"format_version", "n_docs", "checksums": {file: sha256}}
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

from .analysis import Token
from .core import InvertedIndex

FORMAT_VERSION = 1
_POSTINGS_MAGIC = b"CTIX"
_STORED_MAGIC = b"CTSF"


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<H", len(raw)) + raw


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.off = 0

    def bytes(self, n: int) -> bytes:
        out = self.data[self.off:self.off + n]
        self.off += n
        return out

    def u16(self) -> int:
        return struct.unpack("<H", self.bytes(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.bytes(4))[0]

    def str(self) -> str:
        return self.bytes(self.u16()).decode("utf-8")


def save_index(index: InvertedIndex, directory: Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    chunks = [_POSTINGS_MAGIC, struct.pack("<HI", FORMAT_VERSION, len(index.postings))]
    for term in sorted(index.postings):
        entries = index.postings[term]
        chunks.append(_pack_str(term))
        chunks.append(struct.pack("<I", len(entries)))
        for doc_id in sorted(entries):
            tf, positions = entries[doc_id]
            chunks.append(_pack_str(doc_id))
            chunks.append(struct.pack("<II", tf, len(positions)))
            chunks.append(struct.pack(f"<{len(positions)}I", *positions))
    postings_blob = b"".join(chunks)

    chunks = [_STORED_MAGIC, struct.pack("<HI", FORMAT_VERSION, len(index.doc_lengths))]
    for doc_id in sorted(index.doc_lengths):
        fields = index.stored[doc_id]
        tokens = index.doc_tokens[doc_id]
        chunks.append(_pack_str(doc_id))
        chunks.append(_pack_str(fields["doc_type"]))
        chunks.append(_pack_str(fields["timestamp"]))
        chunks.append(_pack_str(fields["patient_id"]))
        chunks.append(struct.pack("<II", index.doc_lengths[doc_id], len(tokens)))
        for tok in tokens:
            chunks.append(_pack_str(tok.text))
            chunks.append(struct.pack("<II", tok.start, tok.end))
    stored_blob = b"".join(chunks)

    (directory / "postings.bin").write_bytes(postings_blob)
    (directory / "stored.bin").write_bytes(stored_blob)
    manifest = {
        "format_version": FORMAT_VERSION,
        "n_docs": index.n_docs,
        "checksums": {
            "postings.bin": hashlib.sha256(postings_blob).hexdigest(),
            "stored.bin": hashlib.sha256(stored_blob).hexdigest(),
        },
    }
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2), encoding="utf-8")


def load_index(directory: Path) -> InvertedIndex:
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text(encoding="utf-8"))
    if manifest["format_version"] != FORMAT_VERSION:
        raise ValueError(f"unsupported index format {manifest['format_version']}")
    postings_blob = (directory / "postings.bin").read_bytes()
    stored_blob = (directory / "stored.bin").read_bytes()
    for name, blob in (("postings.bin", postings_blob), ("stored.bin", stored_blob)):
        digest = hashlib.sha256(blob).hexdigest()
        if digest != manifest["checksums"][name]:
            raise ValueError(f"checksum mismatch for {name}")

    index = InvertedIndex()

    reader = _Reader(postings_blob)
    if reader.bytes(4) != _POSTINGS_MAGIC:
        raise ValueError("bad postings magic")
    reader.u16()
    for _ in range(reader.u32()):
        term = reader.str()
        entries = {}
        for _ in range(reader.u32()):
            doc_id = reader.str()
            tf = reader.u32()
            npos = reader.u32()
            positions = list(struct.unpack(f"<{npos}I", reader.bytes(4 * npos)))
            entries[doc_id] = (tf, positions)
        index.postings[term] = entries

    reader = _Reader(stored_blob)
    if reader.bytes(4) != _STORED_MAGIC:
        raise ValueError("bad stored-fields magic")
    reader.u16()
    for _ in range(reader.u32()):
        doc_id = reader.str()
        doc_type = reader.str()
        timestamp = reader.str()
        patient_id = reader.str()
        doc_len = reader.u32()
        ntok = reader.u32()
        tokens = []
        for position in range(ntok):
            text = reader.str()
            start = reader.u32()
            end = reader.u32()
            tokens.append(Token(text, start, end, position))
        index.doc_lengths[doc_id] = doc_len
        index.stored[doc_id] = {
            "doc_type": doc_type, "timestamp": timestamp, "patient_id": patient_id,
        }
        index.doc_tokens[doc_id] = tokens

    if index.n_docs != manifest["n_docs"]:
        raise ValueError("manifest doc count disagrees with stored fields")
    return index
