"""Near-duplicate detection across and within corpora.

Books are fingerprinted with normalized title/author strings plus a
128-value MinHash signature over 5-word shingles of the body text. Two
entries are duplicates when title and author both match or when the
estimated content similarity reaches the configured threshold; duplicate
groups are closed transitively (union-find) and one representative is kept
per group.
"""

import hashlib
import json
import random
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import TooShortError
from .ingest import strip_diacritics

BASE_SEED = 0x5EED
NUM_HASHES = 128
SHINGLE_SIZE = 5

_ARTICLES = ("a ", "an ", "the ")
_NON_ALNUM = re.compile(r"[^a-z0-9]+")


def normalize_name(value):
    """Deterministic title/author normalization for exact matching."""
    lowered = strip_diacritics(value or "").lower()
    collapsed = _NON_ALNUM.sub(" ", lowered).strip()
    for article in _ARTICLES:
        if collapsed.startswith(article):
            collapsed = collapsed[len(article):]
            break
    return re.sub(r"\s+", " ", collapsed)


def shingle_set(text, shingle_size=SHINGLE_SIZE):
    """Set of consecutive word windows over the normalized text."""
    words = _NON_ALNUM.sub(" ", strip_diacritics(text).lower()).split()
    if len(words) < shingle_size:
        raise TooShortError(
            f"text has {len(words)} words, need at least {shingle_size}")
    return {" ".join(words[i:i + shingle_size])
            for i in range(len(words) - shingle_size + 1)}


@dataclass
class BookFingerprint:
    normalized_title: str
    normalized_author: str
    signature: tuple

    def __post_init__(self):
        self.signature = tuple(int(v) for v in self.signature)


def _hash_params(num_hashes, seed):
    rnd = random.Random(seed)
    a = np.array([rnd.getrandbits(64) | 1 for _ in range(num_hashes)],
                 dtype=np.uint64)
    b = np.array([rnd.getrandbits(64) for _ in range(num_hashes)],
                 dtype=np.uint64)
    return a, b


def _base_hashes(shingles):
    values = np.empty(len(shingles), dtype=np.uint64)
    for i, shingle in enumerate(sorted(shingles)):
        digest = hashlib.blake2b(shingle.encode("utf-8"), digest_size=8).digest()
        values[i] = int.from_bytes(digest, "little")
    return values


def fingerprint(text, title="", author="", num_hashes=NUM_HASHES,
                shingle_size=SHINGLE_SIZE, seed=BASE_SEED):
    """MinHash fingerprint of a body text plus normalized metadata.

    Each signature position is the minimum of an independent 64-bit
    multiply-shift hash over the shingle set; all hash functions derive
    from the fixed base seed, so identical texts always produce identical
    signatures.
    """
    shingles = shingle_set(text, shingle_size=shingle_size)
    base = _base_hashes(shingles)
    a, b = _hash_params(num_hashes, seed)
    signature = np.full(num_hashes, np.iinfo(np.uint64).max, dtype=np.uint64)
    with np.errstate(over="ignore"):
        for lo in range(0, len(base), 4096):
            chunk = base[lo:lo + 4096]
            hashed = chunk[:, None] * a[None, :] + b[None, :]
            signature = np.minimum(signature, hashed.min(axis=0))
    return BookFingerprint(
        normalized_title=normalize_name(title),
        normalized_author=normalize_name(author),
        signature=tuple(int(v) for v in signature),
    )


def estimate_similarity(a, b):
    """Estimated Jaccard similarity: fraction of matching signature positions."""
    if len(a.signature) != len(b.signature):
        raise ValueError(
            f"signature length mismatch: {len(a.signature)} vs {len(b.signature)}")
    matches = sum(1 for x, y in zip(a.signature, b.signature) if x == y)
    return matches / len(a.signature)


# -- corpus index -----------------------------------------------------------------


@dataclass
class CorpusEntry:
    book_id: str
    title: str = ""
    author: str = ""
    year: int | None = None
    corpus: str = ""
    text_length: int = 0
    fingerprint: BookFingerprint | None = None
    representative_of: str | None = None

    @property
    def is_duplicate(self):
        return self.representative_of is not None


@dataclass
class CorpusIndex:
    entries: list = field(default_factory=list)

    def by_id(self, book_id):
        for entry in self.entries:
            if entry.book_id == book_id:
                return entry
        raise KeyError(book_id)

    def kept(self):
        return [e for e in self.entries if not e.is_duplicate]

    def save(self, path):
        path = Path(path)
        lines = []
        for entry in self.entries:
            record = {
                "id": entry.book_id,
                "title": entry.title,
                "author": entry.author,
                "year": entry.year,
                "corpus": entry.corpus,
                "text_length": entry.text_length,
                "representative_of": entry.representative_of,
            }
            if entry.fingerprint is not None:
                record["normalized_title"] = entry.fingerprint.normalized_title
                record["normalized_author"] = entry.fingerprint.normalized_author
                record["signature"] = list(entry.fingerprint.signature)
            lines.append(json.dumps(record, sort_keys=True))
        data = ("\n".join(lines) + "\n" if lines else "").encode("utf-8")
        if not (path.exists() and path.read_bytes() == data):
            path.write_bytes(data)
        return path

    @classmethod
    def load(cls, path):
        index = cls()
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            fp = None
            if "signature" in record:
                fp = BookFingerprint(
                    normalized_title=record["normalized_title"],
                    normalized_author=record["normalized_author"],
                    signature=tuple(record["signature"]),
                )
            index.entries.append(CorpusEntry(
                book_id=record["id"],
                title=record.get("title", ""),
                author=record.get("author", ""),
                year=record.get("year"),
                corpus=record.get("corpus", ""),
                text_length=record.get("text_length", 0),
                fingerprint=fp,
                representative_of=record.get("representative_of"),
            ))
        return index


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def dedup_corpus(index, title_author_match=True, content_threshold=0.8):
    """Mark duplicate entries, keeping one representative per group.

    Entries group together when their normalized title and author both
    match (and are non-empty) or their estimated content similarity
    reaches ``content_threshold``; grouping is transitive. The
    representative is the longest text, ties going to the smaller id.
    """
    entries = index.entries
    order = sorted(range(len(entries)), key=lambda i: entries[i].book_id)
    uf = _UnionFind(len(entries))
    for oi in range(len(order)):
        i = order[oi]
        fp_i = entries[i].fingerprint
        if fp_i is None:
            continue
        for oj in range(oi + 1, len(order)):
            j = order[oj]
            fp_j = entries[j].fingerprint
            if fp_j is None:
                continue
            same_meta = (title_author_match
                         and fp_i.normalized_title
                         and fp_i.normalized_author
                         and fp_i.normalized_title == fp_j.normalized_title
                         and fp_i.normalized_author == fp_j.normalized_author)
            if same_meta or estimate_similarity(fp_i, fp_j) >= content_threshold:
                uf.union(i, j)

    groups = {}
    for i in range(len(entries)):
        groups.setdefault(uf.find(i), []).append(i)
    for members in groups.values():
        if len(members) < 2:
            entries[members[0]].representative_of = None
            continue
        rep = min(members,
                  key=lambda i: (-entries[i].text_length, entries[i].book_id))
        for i in members:
            entries[i].representative_of = (
                None if i == rep else entries[rep].book_id)
    return index
