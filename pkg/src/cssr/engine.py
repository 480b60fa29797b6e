"""Causal-state splitting reconstruction.

Histories are tuples of symbol indices, oldest symbol first. A state is a
set of suffixes; a history is assigned to the state holding its longest
stored suffix. Reconstruction runs in three phases:

1. start from a single state holding the empty suffix;
2. for L = 0 .. lmax-1, test every one-symbol extension ``ax`` (``a`` added
   at the far-past end) of each length-L suffix ``x`` against its parent's
   state, then against every other state, creating a new state only when all
   tests reject;
3. drop transient states, then split states until every (state, symbol)
   pair has a single successor.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .alphabet import Alphabet, Corpus
from .errors import (
    DegenerateAlphabet,
    InsufficientData,
    NoRecurrentStates,
    SuffixNotInState,
    ValidationError,
)
from .graph import recurrent_classes
from .machine import CausalStateMachine, MachineState
from .parse_tree import CountVector, ParseTree, Word, build_tree
from .stats import DEFAULT_ALPHA, KS, get_test, total_variation

log = logging.getLogger(__name__)

Trace = Callable[[str, "StatePartition"], None]


@dataclass(frozen=True)
class InferenceConfig:
    lmax: int
    alpha: float = DEFAULT_ALPHA
    test: str = KS
    min_count: int = 1

    def __post_init__(self):
        if self.lmax < 1:
            raise ValidationError("lmax must be at least 1")
        if not 0 < self.alpha < 1:
            raise ValidationError("alpha must lie in (0, 1)")
        if self.min_count < 1:
            raise ValidationError("min_count must be at least 1")
        get_test(self.test)


class CausalState:
    def __init__(self, id: int, k: int):
        self.id = id
        self.suffixes: set[Word] = set()
        self._counts = [0] * k

    @property
    def pooled_counts(self) -> CountVector:
        return CountVector(tuple(self._counts))

    def distribution(self) -> np.ndarray:
        return self.pooled_counts.probabilities()

    def ordered(self) -> list[Word]:
        """Members shortest first, then lexicographic."""
        return sorted(self.suffixes, key=lambda w: (len(w), w))

    def __repr__(self):
        return f"CausalState({self.id}, n={len(self.suffixes)}, counts={self._counts})"


class StatePartition:
    """The evolving set of states over suffixes of length <= lmax."""

    def __init__(self, tree: ParseTree, lmax: int, trace: Trace | None = None):
        self.tree = tree
        self.lmax = lmax
        self.k = tree.k
        self._states: dict[int, CausalState] = {}
        self._where: dict[Word, CausalState] = {}
        self._next_id = 0
        self._trace = trace

    def __iter__(self) -> Iterator[CausalState]:
        return iter(list(self._states.values()))

    def __len__(self):
        return len(self._states)

    def __getitem__(self, sid: int) -> CausalState:
        return self._states[sid]

    def _emit(self, event: str):
        if self._trace is not None:
            self._trace(event, self)

    def new_state(self) -> CausalState:
        st = CausalState(self._next_id, self.k)
        self._next_id += 1
        self._states[st.id] = st
        return st

    def state_of(self, suffix: Word) -> CausalState | None:
        return self._where.get(tuple(suffix))

    def _counts(self, suffix: Word) -> tuple[int, ...]:
        return self.tree.next_symbol_counts(suffix).counts

    def add(self, suffix: Word, state: CausalState):
        suffix = tuple(suffix)
        if suffix in self._where:
            raise ValidationError(f"suffix {suffix} already assigned")
        state.suffixes.add(suffix)
        self._where[suffix] = state
        for b, c in enumerate(self._counts(suffix)):
            state._counts[b] += c
        self._emit("add")

    def move(self, suffix: Word, source: CausalState, target: CausalState):
        """Move ``suffix`` between states; an emptied source state is deleted."""
        suffix = tuple(suffix)
        if suffix not in source.suffixes:
            raise SuffixNotInState(f"suffix {suffix} is not in state {source.id}")
        if source is target:
            raise ValidationError("source and target state must differ")
        counts = self._counts(suffix)
        source.suffixes.remove(suffix)
        for b, c in enumerate(counts):
            source._counts[b] -= c
        target.suffixes.add(suffix)
        for b, c in enumerate(counts):
            target._counts[b] += c
        self._where[suffix] = target
        if not source.suffixes:
            del self._states[source.id]
        self._emit("move")

    def remove_state(self, state: CausalState):
        for x in state.suffixes:
            del self._where[x]
        del self._states[state.id]

    def epsilon_map(self, history: Word) -> CausalState | None:
        """State holding the longest stored suffix of ``history``."""
        history = tuple(history)
        for L in range(min(len(history), self.lmax), -1, -1):
            st = self._where.get(history[len(history) - L :])
            if st is not None:
                return st
        return None

    def suffix_sets(self) -> frozenset[frozenset[Word]]:
        return frozenset(frozenset(s.suffixes) for s in self._states.values())

    def check(self):
        """Raise AssertionError unless the partition invariants hold."""
        seen: dict[Word, int] = {}
        for st in self._states.values():
            assert st.suffixes or st._counts == [0] * self.k, f"empty state {st.id} with counts"
            for x in st.suffixes:
                assert x not in seen, f"suffix {x} in states {seen[x]} and {st.id}"
                seen[x] = st.id
                assert self._where[x] is st
            pooled = [0] * self.k
            for x in st.suffixes:
                for b, c in enumerate(self._counts(x)):
                    pooled[b] += c
            assert pooled == st._counts, f"state {st.id} pooled counts out of date"
        assert set(seen) == set(self._where)
        sets = [frozenset(s.suffixes) for s in self._states.values() if s.suffixes]
        assert len(sets) == len(set(sets)), "two states with identical suffix sets"


def test_and_assign(
    partition: StatePartition,
    suffix: Word,
    counts: CountVector,
    parent: CausalState,
    config: InferenceConfig,
) -> CausalState:
    """Assign ``suffix`` to its parent's state, the closest accepting state, or a new one."""
    test = get_test(config.test)
    if parent.pooled_counts.total > 0 and not test(counts, parent.pooled_counts, config.alpha).reject:
        partition.add(suffix, parent)
        return parent
    p = counts.probabilities()
    best, best_d = None, None
    for st in partition:
        if st is parent or st.pooled_counts.total == 0:
            continue
        if test(counts, st.pooled_counts, config.alpha).reject:
            continue
        d = total_variation(p, st.distribution())
        if best is None or d < best_d:
            best, best_d = st, d
    if best is None:
        best = partition.new_state()
    partition.add(suffix, best)
    return best


test_and_assign.__test__ = False  # keep pytest from collecting it


def sufficiency_pass(tree: ParseTree, partition: StatePartition, L: int, config: InferenceConfig):
    """Test every observed extension of the length-L suffixes."""
    for state in partition:
        for x in sorted(w for w in state.suffixes if len(w) == L):
            for a in range(tree.k):
                ax = (a,) + x
                counts = tree.next_symbol_counts(ax)
                if counts.total < config.min_count:
                    continue
                test_and_assign(partition, ax, counts, partition.state_of(x), config)


def _witnesses(
    partition: StatePartition, state: CausalState, b: int, exact: bool = False
) -> list[tuple[Word, CausalState | None]]:
    """Members that saw ``b`` next, with the state their extension maps to.

    With ``exact``, only members shorter than lmax are used (their one-symbol
    extension is itself a stored suffix) unless the state has no such
    member. Otherwise every member counts, length-lmax members through
    longest-suffix matching.
    """
    tree = partition.tree
    live = [x for x in state.ordered() if tree.count(x + (b,)) > 0]
    if exact:
        live = [x for x in live if len(x) < partition.lmax] or live
    return [(x, partition.epsilon_map(x + (b,))) for x in live]


def successors(partition: StatePartition, state: CausalState, exact: bool = False) -> dict[int, set[int]]:
    """symbol -> ids of states reached from ``state`` on that symbol."""
    out = {}
    for b in range(partition.k):
        targets = {t.id for _, t in _witnesses(partition, state, b, exact) if t is not None}
        if targets:
            out[b] = targets
    return out


def remove_transients(partition: StatePartition) -> StatePartition:
    """Keep only the states in recurrent classes of the transition graph."""
    # Exact extensions only: a length-lmax member whose extension falls back
    # to an unsynchronized suffix would otherwise pull transients back in.
    graph = {}
    for st in partition:
        graph[st.id] = sorted(set().union(*successors(partition, st, exact=True).values()))
    classes = recurrent_classes([st.id for st in partition], graph)
    keep = {sid for c in classes for sid in c}
    if not keep:
        raise NoRecurrentStates("no recurrent states; lmax may be too large for the data")
    for st in partition:
        if st.id not in keep:
            partition.remove_state(st)
    partition._emit("remove_transients")
    return partition


def determinize(partition: StatePartition) -> StatePartition:
    """Split states until each (state, symbol) pair has a single successor.

    The first member (shortest, then lexicographic) keeps the original
    state; each other successor gets a new state holding the members that
    lead to it. The scan restarts after every split.
    """
    while True:
        split = False
        for state in partition:
            for b in range(partition.k):
                pairs = [(x, t) for x, t in _witnesses(partition, state, b) if t is not None]
                if len(pairs) < 2:
                    continue
                first = pairs[0][1]
                groups: dict[int, list[Word]] = {}
                for x, t in pairs[1:]:
                    if t is not first:
                        groups.setdefault(t.id, []).append(x)
                if not groups:
                    continue
                for members in groups.values():
                    new = partition.new_state()
                    for y in members:
                        partition.move(y, state, new)
                partition._emit("split")
                split = True
                break
            if split:
                break
        if not split:
            return partition


def _transition_table(partition: StatePartition) -> dict[int, dict[int, int]]:
    table = {}
    for st in partition:
        row = {}
        for b in range(partition.k):
            targets = [t for _, t in _witnesses(partition, st, b) if t is not None]
            if targets:
                row[b] = targets[0].id
        table[st.id] = row
    return table


def build_machine(partition: StatePartition, alphabet: Alphabet, metadata: dict | None = None) -> CausalStateMachine:
    """Freeze a deterministic partition into a machine over its recurrent states.

    Symbols with observed counts but no surviving successor are dead: their
    emission mass is dropped and the rest renormalized.
    """
    table = _transition_table(partition)
    graph = {sid: sorted(set(row.values())) for sid, row in table.items()}
    classes = recurrent_classes(list(table), graph)
    keep = sorted(sid for c in classes for sid in c)
    if not keep:
        raise NoRecurrentStates("reconstructed machine has no recurrent states")
    index = {sid: i for i, sid in enumerate(keep)}

    occupancy = dict.fromkeys(keep, 0)
    for w, c in partition.tree.words(partition.lmax):
        st = partition.epsilon_map(w)
        if st is not None and st.id in occupancy:
            occupancy[st.id] += c

    states = []
    for sid in keep:
        st = partition[sid]
        counts = st.pooled_counts.counts
        row = table[sid]
        live = [b for b in range(partition.k) if counts[b] > 0 and b in row]
        dropped = [b for b in range(partition.k) if counts[b] > 0 and b not in row]
        if dropped:
            log.warning(
                "state %d: no successor for symbols %s; renormalizing emission",
                index[sid],
                [alphabet.symbols[b] for b in dropped],
            )
        total = sum(counts[b] for b in live)
        emission = tuple(counts[b] / total if b in live else 0.0 for b in range(partition.k))
        transitions = tuple(index[row[b]] if b in live else None for b in range(partition.k))
        states.append(
            MachineState(index[sid], tuple(st.ordered()), counts, emission, transitions, occupancy[sid])
        )
    meta = dict(metadata or {})
    meta["n_components"] = len(classes)
    if len(classes) > 1:
        meta["mixing"] = "empirical-occupancy"
        log.warning("machine has %d recurrent components; weighting by training occupancy", len(classes))
    return CausalStateMachine(alphabet, tuple(states), meta)


def reconstruct(tree: ParseTree, config: InferenceConfig, trace: Trace | None = None) -> StatePartition:
    """Run all three phases on a parse tree of depth lmax+1."""
    if tree.depth < config.lmax + 1:
        raise ValidationError(f"parse tree depth {tree.depth} < lmax + 1 = {config.lmax + 1}")
    if not tree._levels[config.lmax + 1]:
        raise InsufficientData(f"no word of length {config.lmax + 1} occurs in the data")
    partition = StatePartition(tree, config.lmax, trace)
    partition.add((), partition.new_state())
    for L in range(config.lmax):
        sufficiency_pass(tree, partition, L, config)
    remove_transients(partition)
    determinize(partition)
    return partition


def infer(
    corpus: Corpus,
    alphabet: Alphabet,
    config: InferenceConfig,
    trace: Trace | None = None,
) -> CausalStateMachine:
    """Reconstruct a causal-state machine from a corpus."""
    if alphabet.k < 2:
        raise DegenerateAlphabet("inference needs an alphabet of at least two symbols")
    if corpus.total_length <= config.lmax:
        raise InsufficientData(f"{corpus.total_length} symbols is not more than lmax={config.lmax}")
    tree = build_tree(corpus, config.lmax + 1, alphabet.k)
    partition = reconstruct(tree, config, trace)
    metadata = {
        "n": corpus.total_length,
        "lmax": config.lmax,
        "alpha": float(config.alpha),
        "test": config.test,
        "min_count": config.min_count,
    }
    return build_machine(partition, alphabet, metadata)
