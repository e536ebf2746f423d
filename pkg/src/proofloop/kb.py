"""Per-design vector index over RTL chunks.

The built-in embedder hashes character trigrams of each word into a fixed
number of buckets and L2-normalizes the counts. It needs no model download and
gives identical vectors on every platform. A remote embedder speaking a small
JSON protocol can be swapped in behind the same interface.
"""

from __future__ import annotations

import json
import os
import re
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .rtl.chunks import Chunk

DEFAULT_DIM = 512
DEFAULT_K = 5
SCORE_DECIMALS = 12  # scores equal at this resolution are ties

_WORD = re.compile(r"[a-z0-9]+")


class KBError(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)


class EmbedderError(KBError):
    pass


@dataclass(frozen=True)
class EmbeddingVector:
    values: np.ndarray
    embedder_id: str

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


class TrigramEmbedder:
    def __init__(self, dim: int = DEFAULT_DIM):
        self.dim = dim
        self.embedder_id = f"trigram-crc32-{dim}"

    def _features(self, text: str) -> list[str]:
        words = _WORD.findall(text.lower())
        if not words:
            words = [text.strip().lower()]
        grams = []
        for w in words:
            padded = f" {w} "
            grams.extend(padded[i:i + 3] for i in range(len(padded) - 2))
        return grams

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for row, text in enumerate(texts):
            if not text or not text.strip():
                raise ValueError("cannot embed empty text")
            for g in self._features(text):
                out[row, zlib.crc32(g.encode("utf-8")) % self.dim] += 1.0
            out[row] /= np.linalg.norm(out[row])
        return out


class RemoteEmbedder:
    """Embedder backed by an HTTP endpoint.

    POSTs ``{"input": [texts]}`` and accepts either ``{"data": [{"embedding": [...]}, ...]}``
    or ``{"embeddings": [[...], ...]}`` in response. Vectors are re-normalized locally.
    """

    def __init__(self, url: str, api_key: Optional[str] = None, model: Optional[str] = None,
                 timeout: float = 60.0):
        self.url = url
        self.api_key = api_key
        self.model = model
        self.timeout = timeout
        self.embedder_id = f"remote:{model or url}"
        self.dim: Optional[int] = None

    @classmethod
    def from_env(cls) -> Optional["RemoteEmbedder"]:
        url = os.environ.get("PROOFLOOP_EMBED_URL")
        if not url:
            return None
        return cls(url, os.environ.get("PROOFLOOP_EMBED_API_KEY"), os.environ.get("PROOFLOOP_EMBED_MODEL"))

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        import requests

        payload: dict = {"input": list(texts)}
        if self.model:
            payload["model"] = self.model
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        try:
            resp = requests.post(self.url, json=payload, headers=headers, timeout=self.timeout)
            resp.raise_for_status()
            body = resp.json()
        except Exception as exc:  # transport and decoding failures alike
            raise EmbedderError("embedder_transport", f"remote embedder failed: {exc}") from exc
        if "data" in body:
            vecs = [d["embedding"] for d in body["data"]]
        else:
            vecs = body["embeddings"]
        arr = np.asarray(vecs, dtype=np.float64)
        arr /= np.linalg.norm(arr, axis=1, keepdims=True)
        self.dim = arr.shape[1]
        return arr


_DEFAULT = TrigramEmbedder()


def embed_text(text: str, embedder=None) -> EmbeddingVector:
    embedder = embedder or _DEFAULT
    return EmbeddingVector(embedder.embed([text])[0], embedder.embedder_id)


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    return float(np.dot(a.values, b.values) / (a.norm * b.norm))


@dataclass
class KnowledgeBase:
    design_id: str
    chunks: list
    vectors: np.ndarray
    embedder_id: str
    embedder: object = field(default=None, repr=False)
    interface_index: dict = field(default_factory=dict)
    signal_index: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.embedder is None:
            self.embedder = _DEFAULT if self.embedder_id == _DEFAULT.embedder_id else None
        self.interface_index = {}
        self.signal_index = {}
        for c in self.chunks:
            if c.kind == "ModuleInterface":
                self.interface_index[c.owner_module] = c.chunk_id
            elif c.kind == "AlwaysBlock":
                for sig in c.signals:
                    self.signal_index.setdefault(sig, set()).add(c.chunk_id)
                    self.signal_index.setdefault(f"{c.owner_module}.{sig}", set()).add(c.chunk_id)
        self._by_id = {}
        for c in self.chunks:
            self._by_id.setdefault(c.chunk_id, c)

    def __len__(self) -> int:
        return len(self.chunks)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def chunk(self, chunk_id: str) -> Chunk:
        return self._by_id[chunk_id]

    # persistence: JSON lines, a header record then one record per entry

    def save(self, path) -> None:
        path = Path(path)
        with path.open("w", encoding="utf-8") as fh:
            fh.write(json.dumps({"design_id": self.design_id, "embedder_id": self.embedder_id,
                                 "dim": self.dim, "entries": len(self.chunks)}) + "\n")
            for c, v in zip(self.chunks, self.vectors):
                fh.write(json.dumps({"chunk": c.to_json(), "vector": [float(x) for x in v]}) + "\n")

    @classmethod
    def load(cls, path, embedder=None) -> "KnowledgeBase":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        head = json.loads(lines[0])
        chunks, vecs = [], []
        for line in lines[1:]:
            rec = json.loads(line)
            chunks.append(Chunk.from_json(rec["chunk"]))
            vecs.append(rec["vector"])
        arr = np.asarray(vecs, dtype=np.float64).reshape(len(vecs), head["dim"])
        return cls(head["design_id"], chunks, arr, head["embedder_id"], embedder)


def build_index(chunks: Sequence[Chunk], design_id: str = "design", embedder=None) -> KnowledgeBase:
    embedder = embedder or _DEFAULT
    chunks = list(chunks)
    if not chunks:
        raise KBError("empty_index", "no chunks to index")
    vecs = embedder.embed([c.canonical_text for c in chunks])
    dims = {len(v) for v in vecs}
    if len(dims) != 1 or (getattr(embedder, "dim", None) not in (None, vecs.shape[1])):
        raise KBError("dimension_mismatch", f"embedding dimensions differ: {sorted(dims)}")
    return KnowledgeBase(design_id, chunks, np.asarray(vecs), embedder.embedder_id, embedder)


def rank(scores: np.ndarray, chunk_ids: Sequence[str], k: int) -> list[tuple[str, float]]:
    rounded = np.round(scores, SCORE_DECIMALS)
    order = sorted(range(len(chunk_ids)), key=lambda i: (-rounded[i], chunk_ids[i], i))
    return [(chunk_ids[i], float(rounded[i])) for i in order[:k]]


def search_vector(kb: KnowledgeBase, query: EmbeddingVector, k: int = DEFAULT_K) -> list[tuple[str, float]]:
    if k < 1:
        raise ValueError("k must be at least 1")
    if not kb.chunks:
        raise KBError("empty_index", "knowledge base is empty")
    if query.embedder_id != kb.embedder_id:
        raise KBError("embedder_mismatch",
                      f"query embedded with {query.embedder_id}, index built with {kb.embedder_id}")
    if query.dim != kb.dim:
        raise KBError("dimension_mismatch", f"query dimension {query.dim} != index dimension {kb.dim}")
    scores = np.clip(kb.vectors @ query.values, -1.0, 1.0)
    return rank(scores, [c.chunk_id for c in kb.chunks], k)


def semantic_search(kb: KnowledgeBase, query: str, k: int = DEFAULT_K) -> list[tuple[str, float]]:
    if kb.embedder is None:
        raise KBError("embedder_mismatch", f"no embedder available for {kb.embedder_id}")
    if not kb.chunks:
        raise KBError("empty_index", "knowledge base is empty")
    return search_vector(kb, embed_text(query, kb.embedder), k)


def interface_query(kb: KnowledgeBase, module: str) -> Chunk:
    cid = kb.interface_index.get(module)
    if cid is None:
        raise KBError("unknown_module", f"no module named '{module}'; known: {sorted(kb.interface_index)}")
    return kb.chunk(cid)


def signal_blocks_query(kb: KnowledgeBase, signal: str) -> list[Chunk]:
    ids = kb.signal_index.get(signal)
    if not ids:
        raise KBError("unknown_signal", f"no always block reads or writes '{signal}'")
    return [c for c in kb.chunks if c.kind == "AlwaysBlock" and c.chunk_id in ids
            and ("." not in signal or c.owner_module == signal.split(".", 1)[0])]
