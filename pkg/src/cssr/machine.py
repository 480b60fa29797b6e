"""Inferred causal-state machines and generative process specifications.

Both model kinds reduce to per-symbol labelled transition matrices
``T[b][s, t] = P(emit b, move to t | in s)``; stationary distributions,
word distributions and sampling are defined on those.
"""

from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass, field
from itertools import accumulate
from typing import Sequence, Union

import numpy as np

from . import _json
from .alphabet import Alphabet, SymbolSequence
from .errors import (
    AlphabetMismatch,
    DanglingTarget,
    InvalidDistribution,
    NoRecurrentStates,
    ParseError,
    ValidationError,
    WordSpaceTooLarge,
)
from .graph import recurrent_classes

log = logging.getLogger(__name__)

PROB_TOL = 1e-9
MAX_WORDS = 2**24
DIRECT_SOLVE_LIMIT = 64
MACHINE_FORMAT = "cssr-machine"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class MachineState:
    id: int
    suffixes: tuple[tuple[int, ...], ...]
    counts: tuple[int, ...]
    emission: tuple[float, ...]
    # transitions[b] is the target state index, or None where emission[b] == 0
    transitions: tuple[int | None, ...]
    occupancy: int = 0


@dataclass(frozen=True)
class CausalStateMachine:
    alphabet: Alphabet
    states: tuple[MachineState, ...]
    metadata: dict = field(default_factory=dict, compare=True)

    def __post_init__(self):
        k = self.alphabet.k
        m = len(self.states)
        for i, st in enumerate(self.states):
            where = f"states[{i}]"
            if st.id != i:
                raise ValidationError(f"{where}: state ids must be 0..{m - 1} in order")
            if len(st.emission) != k or len(st.transitions) != k or len(st.counts) != k:
                raise ValidationError(f"{where}: expected {k} emission/transition/count entries")
            if any(p < 0 for p in st.emission) or abs(sum(st.emission) - 1.0) > PROB_TOL:
                raise InvalidDistribution(f"{where}: emission sums to {sum(st.emission)!r}")
            for b, (p, t) in enumerate(zip(st.emission, st.transitions)):
                if (p > 0) != (t is not None):
                    raise ValidationError(
                        f"{where}: symbol {self.alphabet.symbols[b]!r} needs a transition iff its emission is positive"
                    )
                if t is not None and not 0 <= t < m:
                    raise DanglingTarget(f"{where}: transition to undeclared state {t}")

    @property
    def n_states(self) -> int:
        return len(self.states)

    def emission_matrix(self) -> np.ndarray:
        return np.array([st.emission for st in self.states], dtype=float).reshape(len(self.states), self.alphabet.k)

    def transition_table(self) -> np.ndarray:
        """(m, k) integer targets, -1 for undefined."""
        return np.array(
            [[-1 if t is None else t for t in st.transitions] for st in self.states], dtype=np.int64
        ).reshape(len(self.states), self.alphabet.k)

    def labelled_matrices(self) -> np.ndarray:
        m, k = len(self.states), self.alphabet.k
        T = np.zeros((k, m, m))
        for s, st in enumerate(self.states):
            for b, t in enumerate(st.transitions):
                if t is not None:
                    T[b, s, t] += st.emission[b]
        return T

    def as_process_spec(self) -> "ProcessSpec":
        states = []
        for st in self.states:
            states.append(
                tuple(Edge(b, st.emission[b], t) for b, t in enumerate(st.transitions) if t is not None)
            )
        m = len(self.states)
        return ProcessSpec(self.alphabet, tuple(states), tuple([1.0 / m] * m))

    def component_weights_source(self) -> np.ndarray | None:
        occ = np.array([st.occupancy for st in self.states], dtype=float)
        return occ if occ.sum() > 0 else None


@dataclass(frozen=True)
class Edge:
    symbol: int
    prob: float
    target: int


@dataclass(frozen=True)
class ProcessSpec:
    """A (possibly non-unifilar) edge-emitting hidden Markov model."""

    alphabet: Alphabet
    states: tuple[tuple[Edge, ...], ...]
    initial: tuple[float, ...]
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        m = len(self.states)
        if m == 0:
            raise ValidationError("process spec needs at least one state")
        for i, edges in enumerate(self.states):
            total = 0.0
            for e in edges:
                if not 0 <= e.target < m:
                    raise DanglingTarget(f"state {i}: edge to undeclared state {e.target}")
                if not 0 <= e.symbol < self.alphabet.k:
                    raise ValidationError(f"state {i}: symbol index {e.symbol} outside alphabet")
                if e.prob < 0 or not math.isfinite(e.prob):
                    raise InvalidDistribution(f"state {i}: negative edge probability {e.prob}")
                total += e.prob
            if abs(total - 1.0) > PROB_TOL:
                raise InvalidDistribution(f"state {i}: edge probabilities sum to {total!r}")
        if len(self.initial) != m or any(p < 0 for p in self.initial) or abs(sum(self.initial) - 1.0) > PROB_TOL:
            raise InvalidDistribution("initial distribution must have one entry per state and sum to 1")
        if self.names is not None and len(self.names) != m:
            raise ValidationError("names must have one entry per state")

    @property
    def n_states(self) -> int:
        return len(self.states)

    def labelled_matrices(self) -> np.ndarray:
        m, k = len(self.states), self.alphabet.k
        T = np.zeros((k, m, m))
        for s, edges in enumerate(self.states):
            for e in edges:
                T[e.symbol, s, e.target] += e.prob
        return T

    def is_unifilar(self) -> bool:
        return all(len({e.symbol for e in edges}) == len(edges) for edges in self.states)


Model = Union[CausalStateMachine, ProcessSpec]


@dataclass(frozen=True)
class Stationary:
    """Stationary measure, split by recurrent class.

    ``components`` holds (state indices, distribution over those states);
    ``weights`` mixes the components and ``pi`` is the mixed distribution
    over all states (zero on transient ones).
    """

    components: tuple[tuple[tuple[int, ...], np.ndarray], ...]
    weights: np.ndarray
    pi: np.ndarray

    @property
    def mixed(self) -> bool:
        return len(self.components) > 1


def _solve_stationary(P: np.ndarray) -> np.ndarray:
    n = P.shape[0]
    if n == 1:
        return np.ones(1)
    if n <= DIRECT_SOLVE_LIMIT:
        A = P.T - np.eye(n)
        A[-1, :] = 1.0
        rhs = np.zeros(n)
        rhs[-1] = 1.0
        pi = np.linalg.solve(A, rhs)
    else:
        pi = np.full(n, 1.0 / n)
        # lazy chain: same stationary vector, immune to periodicity
        L = 0.5 * (P + np.eye(n))
        for _ in range(10**6):
            nxt = pi @ L
            if np.abs(nxt - pi).sum() < 1e-13:
                pi = nxt
                break
            pi = nxt
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def _graph(P: np.ndarray) -> dict[int, list[int]]:
    return {s: np.flatnonzero(P[s] > 0).tolist() for s in range(P.shape[0])}


def _absorption_weights(P: np.ndarray, classes: list[list[int]], initial: np.ndarray) -> np.ndarray:
    n = P.shape[0]
    recurrent = sorted(s for c in classes for s in c)
    transient = [s for s in range(n) if s not in set(recurrent)]
    weights = np.array([initial[c].sum() for c in classes], dtype=float)
    if transient:
        Q = P[np.ix_(transient, transient)]
        N = np.linalg.inv(np.eye(len(transient)) - Q)
        start = initial[transient] @ N
        for i, c in enumerate(classes):
            weights[i] += start @ P[np.ix_(transient, c)].sum(axis=1)
    return weights / weights.sum()


def stationary_distribution(model: Model) -> Stationary:
    """Stationary distribution of the hidden-state chain.

    With several recurrent classes, machines weight them by training-data
    occupancy (uniformly if none was recorded) and specs by the probability
    of absorption from the initial distribution.
    """
    T = model.labelled_matrices()
    P = T.sum(axis=0)
    n = P.shape[0]
    classes = recurrent_classes(range(n), _graph(P))
    if not classes:
        raise NoRecurrentStates("model has no recurrent states")
    classes = [sorted(c) for c in sorted(classes, key=min)]
    comps = []
    for c in classes:
        sub = P[np.ix_(c, c)]
        comps.append((tuple(c), _solve_stationary(sub)))
    if len(classes) == 1:
        weights = np.ones(1)
    elif isinstance(model, CausalStateMachine):
        occ = model.component_weights_source()
        if occ is None:
            weights = np.full(len(classes), 1.0 / len(classes))
        else:
            weights = np.array([occ[c].sum() for c in classes])
            weights = weights / weights.sum() if weights.sum() > 0 else np.full(len(classes), 1.0 / len(classes))
    else:
        weights = _absorption_weights(P, classes, np.asarray(model.initial, dtype=float))
    pi = np.zeros(n)
    for (c, dist), w in zip(comps, weights):
        pi[list(c)] += w * dist
    resid = np.abs(pi @ P - pi).sum()
    if resid > 1e-10:
        log.warning("stationary residual %.3g", resid)
    return Stationary(tuple(comps), weights, pi)


@dataclass(frozen=True)
class WordDistribution:
    """Probabilities of all words of a fixed length.

    ``probs`` is indexed lexicographically in alphabet order, first symbol
    most significant.
    """

    length: int
    k: int
    probs: np.ndarray

    def prob(self, word: Sequence[int]) -> float:
        if len(word) != self.length:
            raise ValueError(f"word length {len(word)} != {self.length}")
        idx = 0
        for a in word:
            idx = idx * self.k + a
        return float(self.probs[idx])

    def as_dict(self, alphabet: Alphabet) -> dict[str, float]:
        from itertools import product

        return {
            alphabet.render(w): float(p)
            for w, p in zip(product(range(self.k), repeat=self.length), self.probs)
        }


def _check_word_space(k: int, W: int):
    if W < 1:
        raise ValueError("word length must be at least 1")
    if k**W > MAX_WORDS:
        raise WordSpaceTooLarge(f"{k}^{W} words exceeds the limit of {MAX_WORDS}")


def _unifilar_words(machine: CausalStateMachine, pi: np.ndarray, W: int) -> np.ndarray:
    m, k = machine.n_states, machine.alphabet.k
    dead = m
    trans = machine.transition_table()
    trans = np.vstack([np.where(trans < 0, dead, trans), np.full((1, k), dead)])
    emis = np.vstack([machine.emission_matrix(), np.zeros((1, k))])
    # rows: word prefixes; columns: start states
    cur = np.arange(m)[None, :]
    prob = pi[None, :].copy()
    for _ in range(W):
        nxt = trans[cur]  # (words, m, k)
        p = prob[..., None] * emis[cur]
        cur = nxt.transpose(0, 2, 1).reshape(-1, m)
        prob = p.transpose(0, 2, 1).reshape(-1, m)
    return prob.sum(axis=1)


def _forward_words(T: np.ndarray, pi: np.ndarray, W: int) -> np.ndarray:
    alpha = pi[None, :]
    for _ in range(W):
        nxt = np.einsum("ws,bst->wbt", alpha, T)
        alpha = nxt.reshape(-1, T.shape[1])
    return alpha.sum(axis=1)


def word_distribution(model: Model, W: int, stationary: Stationary | None = None) -> WordDistribution:
    """Stationary probability of every length-``W`` word.

    Machines take the unifilar path (one state path per start state); specs
    run the forward recursion over all state paths.
    """
    k = model.alphabet.k
    _check_word_space(k, W)
    if stationary is None:
        stationary = stationary_distribution(model)
    if isinstance(model, CausalStateMachine):
        probs = _unifilar_words(model, stationary.pi, W)
    else:
        probs = _forward_words(model.labelled_matrices(), stationary.pi, W)
    return WordDistribution(W, k, probs)


def entropy_rate(model: Model) -> float:
    """Entropy rate in bits per symbol of a unifilar model."""
    if isinstance(model, ProcessSpec):
        if not model.is_unifilar():
            raise ValidationError("entropy rate from state emissions requires a unifilar model")
        emis = model.labelled_matrices().sum(axis=2).T
    else:
        emis = model.emission_matrix()
    pi = stationary_distribution(model).pi
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(emis > 0, -emis * np.log2(emis), 0.0)
    return float(pi @ terms.sum(axis=1))


def generate(model: Model, n: int, seed: int) -> SymbolSequence:
    """Sample ``n`` symbols. Same (model, n, seed) gives the same output."""
    if n < 1:
        raise ValueError("n must be at least 1")
    spec = model.as_process_spec() if isinstance(model, CausalStateMachine) else model
    rng = np.random.default_rng(seed)
    cums = []
    syms = []
    tgts = []
    for edges in spec.states:
        c = list(accumulate(e.prob for e in edges))
        c[-1] = max(c[-1], 1.0)
        cums.append(c)
        syms.append([e.symbol for e in edges])
        tgts.append([e.target for e in edges])
    init = list(accumulate(spec.initial))
    init[-1] = max(init[-1], 1.0)
    u = rng.random(n + 1).tolist()
    state = bisect.bisect_right(init, u[0])
    out = [0] * n
    br = bisect.bisect_right
    for i in range(n):
        j = br(cums[state], u[i + 1])
        out[i] = syms[state][j]
        state = tgts[state][j]
    return SymbolSequence(out)


def _f(x: float):
    return _json.Float17(x)


def serialize(machine: CausalStateMachine) -> str:
    """JSON document; fields in a fixed order, probabilities to 17 significant digits."""
    a = machine.alphabet
    states = []
    for st in machine.states:
        states.append(
            {
                "id": st.id,
                "suffixes": [list(a.decode(x)) for x in st.suffixes],
                "counts": list(st.counts),
                "emission": [_f(p) for p in st.emission],
                "transitions": {a.symbols[b]: t for b, t in enumerate(st.transitions) if t is not None},
                "occupancy": st.occupancy,
            }
        )
    meta = {key: (_f(v) if isinstance(v, float) else v) for key, v in sorted(machine.metadata.items())}
    doc = {
        "format": MACHINE_FORMAT,
        "version": FORMAT_VERSION,
        "alphabet": list(a.symbols),
        "metadata": meta,
        "states": states,
    }
    return _json.dumps(doc)


def deserialize(text: str) -> CausalStateMachine:
    req = _json.require
    doc = _json.loads(text)
    if not isinstance(doc, dict) or doc.get("format") != MACHINE_FORMAT:
        raise ParseError(f"not a {MACHINE_FORMAT} document", field="format")
    if doc.get("version") != FORMAT_VERSION:
        raise ParseError(f"unsupported version {doc.get('version')!r}", field="version")
    symbols = req(doc, "alphabet", list, "")
    try:
        alphabet = Alphabet(tuple(symbols))
    except ValidationError as exc:
        raise ParseError(str(exc), field="alphabet") from None
    k = alphabet.k
    metadata = req(doc, "metadata", dict, "")
    raw_states = req(doc, "states", list, "")
    m = len(raw_states)
    states = []
    for i, raw in enumerate(raw_states):
        where = f"states[{i}]"
        sid = req(raw, "id", int, where)
        if sid != i:
            raise ParseError(f"expected id {i}, found {sid}", field=f"{where}.id")
        suffixes = []
        for j, suf in enumerate(req(raw, "suffixes", list, where)):
            if not isinstance(suf, list) or any(s not in alphabet for s in suf):
                raise ParseError("suffix must be a list of alphabet symbols", field=f"{where}.suffixes[{j}]")
            suffixes.append(alphabet.encode(suf))
        counts = req(raw, "counts", list, where)
        emission = req(raw, "emission", list, where)
        if len(counts) != k or not all(isinstance(c, int) and not isinstance(c, bool) and c >= 0 for c in counts):
            raise ParseError(f"expected {k} non-negative integers", field=f"{where}.counts")
        if len(emission) != k or not all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in emission):
            raise ParseError(f"expected {k} numbers", field=f"{where}.emission")
        emission = [float(p) for p in emission]
        if any(p < 0 for p in emission) or abs(sum(emission) - 1.0) > PROB_TOL:
            raise ParseError(f"emission sums to {sum(emission)!r}, not 1", field=f"{where}.emission")
        trans_raw = req(raw, "transitions", dict, where)
        transitions: list[int | None] = [None] * k
        for sym, tgt in trans_raw.items():
            if sym not in alphabet:
                raise ParseError(f"unknown symbol {sym!r}", field=f"{where}.transitions")
            if not isinstance(tgt, int) or isinstance(tgt, bool) or not 0 <= tgt < m:
                raise ParseError(f"dangling target {tgt!r}", field=f"{where}.transitions.{sym}")
            transitions[alphabet.index(sym)] = tgt
        for b in range(k):
            if (emission[b] > 0) != (transitions[b] is not None):
                raise ParseError(
                    f"symbol {alphabet.symbols[b]!r} needs a transition iff its emission is positive",
                    field=f"{where}.transitions",
                )
        occupancy = raw.get("occupancy", 0)
        if not isinstance(occupancy, int) or isinstance(occupancy, bool) or occupancy < 0:
            raise ParseError("expected a non-negative integer", field=f"{where}.occupancy")
        states.append(
            MachineState(i, tuple(suffixes), tuple(counts), tuple(emission), tuple(transitions), occupancy)
        )
    return CausalStateMachine(alphabet, tuple(states), dict(metadata))


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(model: Model, precision: int = 4) -> str:
    """Graphviz digraph with one node per state and edges labelled ``b | p``."""
    lines = ["digraph cssr {", "  rankdir=LR;", "  node [shape=circle];"]
    a = model.alphabet
    if isinstance(model, CausalStateMachine):
        for st in model.states:
            lines.append(f"  s{st.id} [label={_dot_quote(str(st.id))}];")
        for st in model.states:
            for b, t in enumerate(st.transitions):
                if t is None:
                    continue
                label = f"{a.symbols[b]} | {st.emission[b]:.{precision}g}"
                lines.append(f"  s{st.id} -> s{t} [label={_dot_quote(label)}];")
    else:
        names = model.names or tuple(str(i) for i in range(model.n_states))
        for i, name in enumerate(names):
            lines.append(f"  s{i} [label={_dot_quote(name)}];")
        for i, edges in enumerate(model.states):
            for e in edges:
                label = f"{a.symbols[e.symbol]} | {e.prob:.{precision}g}"
                lines.append(f"  s{i} -> s{e.target} [label={_dot_quote(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def check_same_alphabet(a: Model, b: Model):
    if a.alphabet.symbols != b.alphabet.symbols:
        raise AlphabetMismatch(f"alphabets differ: {a.alphabet.symbols} vs {b.alphabet.symbols}")
