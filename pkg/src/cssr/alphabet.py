"""Alphabets, encoded symbol sequences and plain-text corpus ingestion."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DuplicateSymbol, EmptyAlphabet, EmptyInput, UnknownSymbol

WHOLE = "whole"
LINES = "lines"


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if not self.symbols:
            raise EmptyAlphabet("alphabet must contain at least one symbol")
        index = {}
        for i, s in enumerate(self.symbols):
            if not isinstance(s, str) or not s or any(c.isspace() for c in s):
                raise EmptyAlphabet(f"invalid symbol {s!r}")
            if s in index:
                raise DuplicateSymbol(f"duplicate symbol {s!r}")
            index[s] = i
        object.__setattr__(self, "_index", index)

    @property
    def k(self) -> int:
        return len(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def index(self, symbol: str) -> int:
        return self._index[symbol]

    def __contains__(self, symbol):
        return symbol in self._index

    @property
    def single_char(self) -> bool:
        return all(len(s) == 1 for s in self.symbols)

    def encode(self, symbols: Iterable[str]) -> tuple[int, ...]:
        """Encode a word given as symbols (or a string, for single-char alphabets)."""
        out = []
        for pos, s in enumerate(symbols):
            try:
                out.append(self._index[s])
            except KeyError:
                raise UnknownSymbol(s, pos) from None
        return tuple(out)

    def decode(self, word: Iterable[int]) -> tuple[str, ...]:
        return tuple(self.symbols[i] for i in word)

    def render(self, word: Iterable[int]) -> str:
        sep = "" if self.single_char else " "
        return sep.join(self.symbols[i] for i in word)


def parse_alphabet(spec: str | Sequence[str]) -> Alphabet:
    """Build an alphabet from a string of one-character symbols or a token list.

    >>> parse_alphabet("AB").symbols
    ('A', 'B')
    """
    if isinstance(spec, str):
        spec = spec.strip()
        symbols = tuple(spec.split()) if any(c.isspace() for c in spec) else tuple(spec)
    else:
        symbols = tuple(spec)
    if not symbols:
        raise EmptyAlphabet("alphabet must contain at least one symbol")
    return Alphabet(symbols)


@dataclass(frozen=True)
class SymbolSequence:
    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.int64)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    def __len__(self):
        return int(self.data.shape[0])

    @property
    def n(self) -> int:
        return len(self)

    def __eq__(self, other):
        if not isinstance(other, SymbolSequence):
            return NotImplemented
        return np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash(self.data.tobytes())


@dataclass(frozen=True)
class Corpus:
    sequences: tuple[SymbolSequence, ...]

    def __post_init__(self):
        seqs = tuple(s if isinstance(s, SymbolSequence) else SymbolSequence(s) for s in self.sequences)
        if not seqs or any(len(s) == 0 for s in seqs):
            raise EmptyInput("corpus must contain at least one non-empty sequence")
        object.__setattr__(self, "sequences", seqs)

    @property
    def total_length(self) -> int:
        return sum(len(s) for s in self.sequences)

    def __len__(self):
        return len(self.sequences)

    @classmethod
    def single(cls, data) -> "Corpus":
        return cls((SymbolSequence(data),))


def _tokenize(line: str, tokens: bool) -> list[str]:
    if tokens:
        return line.split()
    return [c for c in line if not c.isspace()]


def ingest(text: str, alphabet: Alphabet, mode: str = WHOLE, tokens: bool = False) -> Corpus:
    """Encode a text file into a corpus.

    In character mode every non-whitespace character is one symbol; in token
    mode symbols are whitespace-separated. ``mode="whole"`` concatenates the
    file into one sequence, ``mode="lines"`` yields one sequence per
    non-empty line. Positions in ``UnknownSymbol`` count symbols from 0
    (within the line for per-line mode).
    """
    if mode not in (WHOLE, LINES):
        raise ValueError(f"unknown ingest mode {mode!r}")
    index = alphabet._index
    sequences = []
    current: list[int] = []
    pos = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        syms = _tokenize(line, tokens)
        if mode == LINES:
            if not syms:
                continue
            current, pos = [], 0
        for s in syms:
            i = index.get(s)
            if i is None:
                raise UnknownSymbol(s, pos, lineno if mode == LINES else None)
            current.append(i)
            pos += 1
        if mode == LINES:
            sequences.append(SymbolSequence(current))
    if mode == WHOLE and current:
        sequences.append(SymbolSequence(current))
    if not sequences:
        raise EmptyInput("input contains no symbols")
    return Corpus(tuple(sequences))


def render(corpus: Corpus, alphabet: Alphabet) -> str:
    """Inverse of :func:`ingest` in per-line mode (one line per sequence)."""
    return "".join(alphabet.render(s.data.tolist()) + "\n" for s in corpus.sequences)


def infer_alphabet(text: str, tokens: bool = False) -> Alphabet:
    """Sorted set of distinct symbols in ``text``."""
    seen = set()
    for line in text.splitlines():
        seen.update(_tokenize(line, tokens))
    if not seen:
        raise EmptyInput("input contains no symbols")
    return Alphabet(tuple(sorted(seen)))
