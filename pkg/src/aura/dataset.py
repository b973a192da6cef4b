"""Clip collections: manifest/embedding file IO, validation, DMOS.

A collection pairs a JSON-lines manifest (one clip per line) with a
binary embedding file. The embedding file layout is a 16-byte header --
magic ``AURAEMB1`` (8 bytes), u32 count, u32 dim, little-endian -- followed
by count*dim float32 values, row-major.

Collections are immutable after load and safe for concurrent reads.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

EMBEDDING_MAGIC = b"AURAEMB1"
_HEADER = struct.Struct("<8sII")

MOS_MIN = 1.0
MOS_MAX = 5.0
CHANNELS = ("sig", "bak", "ovrl")


class DatasetError(ValueError):
    """A manifest or embedding file failed validation."""


@dataclass(frozen=True)
class MosTriple:
    sig: float
    bak: float
    ovrl: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.sig, self.bak, self.ovrl)


@dataclass(frozen=True)
class MosPair:
    before: MosTriple
    after: MosTriple


@dataclass(frozen=True)
class DmosTriple:
    """Per-channel after-minus-before score difference."""

    sig: float
    bak: float
    ovrl: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.sig, self.bak, self.ovrl)


@dataclass
class ClipRecord:
    clip_id: str
    embedding: np.ndarray  # float32, length = collection dim
    noise_label: Optional[str]
    scores: dict[str, MosPair]


@dataclass
class ClipCollection:
    dim: int
    records: list[ClipRecord]
    model_ids: list[str]
    _index: dict[str, int] = field(init=False, repr=False)
    _embeddings: Optional[np.ndarray] = field(default=None, init=False, repr=False)
    _dmos_cache: dict[str, np.ndarray] = field(init=False, repr=False)

    def __post_init__(self):
        self._index = {r.clip_id: i for i, r in enumerate(self.records)}
        self._dmos_cache = {}

    def __len__(self) -> int:
        return len(self.records)

    def index_of(self, clip_id: str) -> int:
        try:
            return self._index[clip_id]
        except KeyError:
            raise DatasetError(f"unknown clip_id {clip_id!r}") from None

    @property
    def embeddings(self) -> np.ndarray:
        """All embeddings stacked as an (n, dim) float32 matrix."""
        if self._embeddings is None:
            self._embeddings = np.stack([r.embedding for r in self.records])
        return self._embeddings


def dmos(record: ClipRecord, model_id: str) -> DmosTriple:
    """After-minus-before MOS for one clip under one model."""
    try:
        pair = record.scores[model_id]
    except KeyError:
        raise DatasetError(
            f"clip {record.clip_id!r} has no scores for model {model_id!r}"
        ) from None
    return DmosTriple(
        sig=pair.after.sig - pair.before.sig,
        bak=pair.after.bak - pair.before.bak,
        ovrl=pair.after.ovrl - pair.before.ovrl,
    )


def dmos_matrix(collection: ClipCollection, channel: str) -> np.ndarray:
    """(n_clips, n_models) DMOS matrix on one channel, in collection order.

    Collections are immutable after load, so the matrix is memoized per
    channel on the collection."""
    if channel not in CHANNELS:
        raise ValueError(f"channel must be one of {CHANNELS}, got {channel!r}")
    cached = collection._dmos_cache.get(channel)
    if cached is not None:
        return cached
    n, m = len(collection.records), len(collection.model_ids)
    out = np.empty((n, m), dtype=np.float64)
    for i, record in enumerate(collection.records):
        for j, model_id in enumerate(collection.model_ids):
            pair = record.scores.get(model_id)
            if pair is None:
                raise DatasetError(
                    f"missing score: clip {record.clip_id!r}, model {model_id!r}"
                )
            out[i, j] = getattr(pair.after, channel) - getattr(pair.before, channel)
    collection._dmos_cache[channel] = out
    return out


def write_embeddings(path, matrix: np.ndarray) -> None:
    matrix = np.ascontiguousarray(matrix, dtype=np.float32)
    if matrix.ndim != 2:
        raise ValueError("embedding matrix must be 2-dimensional")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(EMBEDDING_MAGIC, matrix.shape[0], matrix.shape[1]))
        fh.write(matrix.tobytes())


def read_embeddings(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise DatasetError(f"{path}: truncated embedding header")
        magic, count, dim = _HEADER.unpack(header)
        if magic != EMBEDDING_MAGIC:
            raise DatasetError(f"{path}: bad magic {magic!r}")
        payload = fh.read()
    expected = count * dim * 4
    if len(payload) != expected:
        raise DatasetError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}"
        )
    return np.frombuffer(payload, dtype="<f4").reshape(count, dim).copy()


def _parse_triple(raw, what: str, clip_id: str, line_no: int) -> MosTriple:
    if not isinstance(raw, list) or len(raw) != 3:
        raise DatasetError(
            f"line {line_no}, clip {clip_id!r}: {what} must be a [sig, bak, ovrl] list"
        )
    vals = []
    for v in raw:
        if not isinstance(v, (int, float)):
            raise DatasetError(
                f"line {line_no}, clip {clip_id!r}: non-numeric MOS in {what}"
            )
        if not (MOS_MIN <= v <= MOS_MAX):
            raise DatasetError(
                f"line {line_no}, clip {clip_id!r}: MOS out of range "
                f"[{MOS_MIN}, {MOS_MAX}] in {what}: {v}"
            )
        vals.append(float(v))
    return MosTriple(*vals)


def _parse_line(text: str, line_no: int) -> ClipRecord:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"line {line_no}: invalid JSON ({exc})") from None
    clip_id = obj.get("clip_id")
    if not isinstance(clip_id, str) or not clip_id:
        raise DatasetError(f"line {line_no}: missing or empty clip_id")
    noise_label = obj.get("noise_label")
    if noise_label is not None and not isinstance(noise_label, str):
        raise DatasetError(f"line {line_no}, clip {clip_id!r}: noise_label must be a string or null")
    raw_scores = obj.get("scores")
    if not isinstance(raw_scores, dict):
        raise DatasetError(f"line {line_no}, clip {clip_id!r}: missing scores object")
    scores: dict[str, MosPair] = {}
    for model_id, pair in raw_scores.items():
        if not isinstance(pair, dict) or "before" not in pair or "after" not in pair:
            raise DatasetError(
                f"line {line_no}, clip {clip_id!r}: scores[{model_id!r}] needs before/after"
            )
        scores[model_id] = MosPair(
            before=_parse_triple(pair["before"], f"{model_id}.before", clip_id, line_no),
            after=_parse_triple(pair["after"], f"{model_id}.after", clip_id, line_no),
        )
    # embedding filled in by the caller
    return ClipRecord(clip_id=clip_id, embedding=None, noise_label=noise_label, scores=scores)


def load_collection(manifest_path, embeddings_path) -> ClipCollection:
    """Load and validate a manifest/embedding pair.

    Record order matches manifest order. Raises DatasetError naming the
    offending clip and line for any validation failure.
    """
    matrix = read_embeddings(embeddings_path)
    records: list[ClipRecord] = []
    with open(manifest_path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            records.append(_parse_line(line, line_no))

    if len(records) != matrix.shape[0]:
        raise DatasetError(
            f"row-count mismatch: manifest has {len(records)} rows, "
            f"embedding file declares {matrix.shape[0]}"
        )

    seen: set[str] = set()
    model_ids: list[str] = []
    known = set()
    for i, record in enumerate(records):
        if record.clip_id in seen:
            raise DatasetError(f"line {i + 1}: duplicate clip_id {record.clip_id!r}")
        seen.add(record.clip_id)
        row = matrix[i]
        if not np.all(np.isfinite(row)):
            raise DatasetError(
                f"line {i + 1}, clip {record.clip_id!r}: non-finite embedding value"
            )
        record.embedding = row
        for model_id in record.scores:
            if model_id not in known:
                known.add(model_id)
                model_ids.append(model_id)

    return ClipCollection(dim=int(matrix.shape[1]), records=records, model_ids=model_ids)


def write_collection(collection: ClipCollection, manifest_path, embeddings_path) -> None:
    """Write the canonical dataset pair; inverse of load_collection."""
    write_embeddings(embeddings_path, collection.embeddings)
    with open(manifest_path, "w", encoding="utf-8") as fh:
        for record in collection.records:
            obj = {
                "clip_id": record.clip_id,
                "noise_label": record.noise_label,
                "scores": {
                    model_id: {
                        "before": list(pair.before.as_tuple()),
                        "after": list(pair.after.as_tuple()),
                    }
                    for model_id, pair in record.scores.items()
                },
            }
            fh.write(json.dumps(obj) + "\n")


def label_coverage(collection: ClipCollection) -> float:
    """Fraction of records carrying a noise_label."""
    if not collection.records:
        return 0.0
    labeled = sum(1 for r in collection.records if r.noise_label is not None)
    return labeled / len(collection.records)
