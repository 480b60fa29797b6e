"""Counts of every word up to a fixed length, with next-symbol lookups.

Words are tuples of symbol indices stored oldest symbol first. Counting is
windowed: a word of length ``d`` is counted once at every position of a
sequence where a full window of ``d`` symbols fits, and windows never cross
sequence boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .alphabet import Corpus
from .errors import DepthZero, SuffixTooLong

Word = tuple[int, ...]

# Words are packed as base-k integers while k**depth stays in int64 range.
_MAX_CODE = 2**62
_BINCOUNT_LIMIT = 1 << 22


@dataclass(frozen=True)
class CountVector:
    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def k(self) -> int:
        return len(self.counts)

    def __getitem__(self, i):
        return self.counts[i]

    def __add__(self, other: "CountVector") -> "CountVector":
        return CountVector(tuple(a + b for a, b in zip(self.counts, other.counts)))

    def probabilities(self) -> np.ndarray:
        total = self.total
        if total == 0:
            return np.zeros(self.k)
        return np.asarray(self.counts, dtype=float) / total

    @classmethod
    def zeros(cls, k: int) -> "CountVector":
        return cls((0,) * k)


class ParseTree:
    """Occurrence counts for all words of length ``0..depth``.

    Storage is one hash table per word length, so ``count`` and the child
    lookups in ``children`` / ``next_symbol_counts`` are O(1) expected.
    """

    def __init__(self, k: int, depth: int, levels: list[dict[Word, int]], n_sequences: int):
        self.k = k
        self.depth = depth
        self._levels = levels
        self.n_sequences = n_sequences

    @property
    def total(self) -> int:
        return self._levels[0][()]

    def count(self, word: Word) -> int:
        word = tuple(word)
        if len(word) > self.depth:
            raise SuffixTooLong(f"word of length {len(word)} exceeds tree depth {self.depth}")
        return self._levels[len(word)].get(word, 0)

    def children(self, word: Word) -> dict[int, int]:
        """Map symbol -> count(word + symbol) for observed extensions."""
        word = tuple(word)
        if len(word) >= self.depth:
            return {}
        level = self._levels[len(word) + 1]
        out = {}
        for a in range(self.k):
            c = level.get(word + (a,), 0)
            if c:
                out[a] = c
        return out

    def words(self, length: int) -> Iterator[tuple[Word, int]]:
        """Observed words of the given length with their counts, in lexicographic order."""
        return iter(sorted(self._levels[length].items()))

    def next_symbol_counts(self, suffix: Word) -> CountVector:
        suffix = tuple(suffix)
        if len(suffix) > self.depth - 1:
            raise SuffixTooLong(
                f"suffix of length {len(suffix)} needs a tree of depth > {len(suffix)}, have {self.depth}"
            )
        level = self._levels[len(suffix) + 1]
        return CountVector(tuple(level.get(suffix + (a,), 0) for a in range(self.k)))


def _count_codes(data: np.ndarray, k: int, d: int):
    n = data.shape[0]
    if n < d:
        return None
    codes = np.zeros(n - d + 1, dtype=np.int64)
    for j in range(d):
        codes *= k
        codes += data[j : n - d + 1 + j]
    if k**d <= _BINCOUNT_LIMIT:
        cnt = np.bincount(codes, minlength=k**d)
        uniq = np.flatnonzero(cnt)
        return uniq, cnt[uniq]
    # sort-based fallback for large word spaces
    return np.unique(codes, return_counts=True)


def _decode(code: int, k: int, d: int) -> Word:
    out = [0] * d
    for j in range(d - 1, -1, -1):
        code, out[j] = divmod(code, k)
    return tuple(out)


def build_tree(corpus: Corpus, depth: int, k: int | None = None) -> ParseTree:
    """Count every word of length <= ``depth`` in a single pass per length."""
    if depth < 1:
        raise DepthZero("parse tree depth must be at least 1")
    if k is None:
        k = 1 + max(int(s.data.max()) for s in corpus.sequences)
    levels: list[dict[Word, int]] = [{(): corpus.total_length}]
    packed = k**depth < _MAX_CODE
    for d in range(1, depth + 1):
        level: dict[Word, int] = {}
        for seq in corpus.sequences:
            data = seq.data
            if packed:
                res = _count_codes(data, k, d)
                if res is None:
                    continue
                for code, c in zip(res[0].tolist(), res[1].tolist()):
                    w = _decode(code, k, d)
                    level[w] = level.get(w, 0) + c
            else:
                vals = data.tolist()
                for i in range(len(vals) - d + 1):
                    w = tuple(vals[i : i + d])
                    level[w] = level.get(w, 0) + 1
        levels.append(level)
    return ParseTree(k, depth, levels, len(corpus.sequences))
