"""Ground-truth processes and the process-spec document format."""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import _json
from .alphabet import Alphabet
from .errors import (
    DanglingTarget,
    InvalidDistribution,
    InvalidProbability,
    NotStronglyConnected,
    ParseError,
    ValidationError,
)
from .graph import tarjan
from .machine import Edge, ProcessSpec, stationary_distribution

PROCESS_FORMAT = "cssr-process"
FORMAT_VERSION = 1


def even_process() -> ProcessSpec:
    """Two states over {A, B}: state 1 emits A or B evenly, state 2 always B.

    Maximal runs of B between A's have even length. Starts in either state
    with equal probability.
    """
    a = Alphabet(("A", "B"))
    return ProcessSpec(
        a,
        (
            (Edge(0, 0.5, 0), Edge(1, 0.5, 1)),
            (Edge(1, 1.0, 0),),
        ),
        (0.5, 0.5),
        names=("1", "2"),
    )


def period_two_process() -> ProcessSpec:
    """ABABAB... with a uniformly random phase."""
    a = Alphabet(("A", "B"))
    return ProcessSpec(a, ((Edge(1, 1.0, 1),), (Edge(0, 1.0, 0),)), (0.5, 0.5), names=("A", "B"))


def iid_process(probs: Sequence[float] = (0.5, 0.5), symbols: Sequence[str] = ("A", "B")) -> ProcessSpec:
    a = Alphabet(tuple(symbols))
    return ProcessSpec(a, (tuple(Edge(b, float(p), 0) for b, p in enumerate(probs)),), (1.0,))


# Context tree with seven leaves (oldest symbol first), read backwards:
# the last symbol splits 0/1, then ...00 and ...01 split again on the
# third-to-last symbol. Every leaf has length 2 or 3, so a leaf plus one
# symbol always determines the next leaf and the machine is unifilar.
SEVEN_STATE_SUFFIXES = ("000", "100", "10", "001", "101", "011", "111")
# P(next symbol = "0" | suffix), in sixteenths. Sibling leaves (000/100,
# 001/101, 011/111) share successors, so they differ only in emission and
# are kept at least 9/16 apart; every leaf also differs from the internal
# mixtures it is first tested against.
SEVEN_STATE_PROBABILITIES = tuple(Fraction(n, 16) for n in (2, 11, 6, 1, 12, 4, 15))


def _as_sixteenths(p) -> Fraction:
    try:
        f = Fraction(p).limit_denominator(1 << 20)
    except (TypeError, ValueError):
        raise InvalidProbability(f"not a number: {p!r}") from None
    if abs(float(f) - float(p)) > 1e-12 or (f * 16).denominator != 1 or not 1 <= f * 16 <= 15:
        raise InvalidProbability(f"{p!r} is not one of 1/16, ..., 15/16")
    return f


def seven_state_template(
    probabilities: Sequence = SEVEN_STATE_PROBABILITIES,
    suffixes: Sequence[str] = SEVEN_STATE_SUFFIXES,
) -> ProcessSpec:
    """Binary unifilar process whose states are each defined by one suffix.

    ``probabilities[i]`` is the chance of emitting "0" from the state of
    ``suffixes[i]``; the successor after emitting ``b`` is the state whose
    suffix ends ``suffixes[i] + b``. Initial distribution is stationary.
    """
    if len(probabilities) != len(suffixes):
        raise ValidationError("need one probability per suffix")
    probs = [_as_sixteenths(p) for p in probabilities]
    alphabet = Alphabet(("0", "1"))
    sufs = [str(s) for s in suffixes]
    if any(set(s) - {"0", "1"} or not s for s in sufs) or len(set(sufs)) != len(sufs):
        raise ValidationError("suffixes must be distinct non-empty binary strings")
    for s in sufs:
        for t in sufs:
            if s != t and t.endswith(s):
                raise ValidationError(f"suffix {s!r} is a suffix of {t!r}; states would be ambiguous")

    def successor(word: str) -> int:
        hits = [i for i, s in enumerate(sufs) if word.endswith(s)]
        if len(hits) != 1:
            raise ValidationError(f"{word!r} does not determine a unique state")
        return hits[0]

    states = []
    for s, p in zip(sufs, probs):
        q = float(p)
        states.append((Edge(0, q, successor(s + "0")), Edge(1, 1.0 - q, successor(s + "1"))))
    graph = {i: [e.target for e in edges] for i, edges in enumerate(states)}
    if len(tarjan(range(len(states)), graph)) != 1:
        raise NotStronglyConnected("suffix machine is not strongly connected")
    m = len(states)
    spec = ProcessSpec(alphabet, tuple(states), tuple([1.0 / m] * m), names=tuple(sufs))
    pi = stationary_distribution(spec).pi
    return ProcessSpec(alphabet, spec.states, tuple(float(x) for x in pi), names=tuple(sufs))


NAMED = {
    "even": even_process,
    "seven-default": seven_state_template,
}


def named_process(name: str) -> ProcessSpec:
    try:
        return NAMED[name]()
    except KeyError:
        raise ValidationError(f"unknown process {name!r}; choose from {sorted(NAMED)}") from None


def dump_process_spec(spec: ProcessSpec) -> str:
    a = spec.alphabet
    names = spec.names or tuple(str(i) for i in range(spec.n_states))
    doc = {
        "format": PROCESS_FORMAT,
        "version": FORMAT_VERSION,
        "alphabet": list(a.symbols),
        "states": [
            {
                "id": names[i],
                "edges": [
                    {"symbol": a.symbols[e.symbol], "prob": _json.Float17(e.prob), "target": names[e.target]}
                    for e in edges
                ],
            }
            for i, edges in enumerate(spec.states)
        ],
        "initial": [_json.Float17(p) for p in spec.initial],
    }
    return _json.dumps(doc)


def load_process_spec(text: str) -> ProcessSpec:
    """Parse and validate a process-spec document.

    ``initial`` is either a list aligned with ``states`` or the string
    ``"stationary"``.
    """
    req = _json.require
    doc = _json.loads(text)
    if not isinstance(doc, dict) or doc.get("format") != PROCESS_FORMAT:
        raise ParseError(f"not a {PROCESS_FORMAT} document", field="format")
    try:
        alphabet = Alphabet(tuple(req(doc, "alphabet", list, "")))
    except ValidationError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(str(exc), field="alphabet") from None
    raw_states = req(doc, "states", list, "")
    if not raw_states:
        raise ParseError("no states", field="states")
    names = []
    for i, raw in enumerate(raw_states):
        sid = req(raw, "id", (str, int), f"states[{i}]")
        names.append(str(sid))
    if len(set(names)) != len(names):
        raise ParseError("duplicate state id", field="states")
    index = {n: i for i, n in enumerate(names)}
    states = []
    for i, raw in enumerate(raw_states):
        where = f"states[{i}]"
        edges = []
        for j, e in enumerate(req(raw, "edges", list, where)):
            ew = f"{where}.edges[{j}]"
            sym = req(e, "symbol", str, ew)
            prob = req(e, "prob", float, ew)
            tgt = str(req(e, "target", (str, int), ew))
            if sym not in alphabet:
                raise ParseError(f"unknown symbol {sym!r}", field=f"{ew}.symbol")
            if tgt not in index:
                raise DanglingTarget(f"{ew}: edge to undeclared state {tgt!r}")
            edges.append(Edge(alphabet.index(sym), float(prob), index[tgt]))
        total = sum(e.prob for e in edges)
        if abs(total - 1.0) > 1e-9 or any(e.prob < 0 for e in edges):
            raise InvalidDistribution(f"{where}: edge probabilities sum to {total!r}")
        states.append(tuple(edges))
    initial = doc.get("initial", "stationary")
    m = len(states)
    if initial == "stationary":
        probe = ProcessSpec(alphabet, tuple(states), tuple([1.0 / m] * m), tuple(names))
        initial = stationary_distribution(probe).pi.tolist()
    elif not isinstance(initial, list) or len(initial) != m:
        raise ParseError(f"expected {m} numbers or 'stationary'", field="initial")
    elif not all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in initial):
        raise ParseError("expected numbers", field="initial")
    return ProcessSpec(alphabet, tuple(states), tuple(float(p) for p in initial), tuple(names))


def resolve_process(name_or_path: str) -> ProcessSpec:
    """A built-in process name, or a path to a process-spec document."""
    if name_or_path in NAMED:
        return named_process(name_or_path)
    path = Path(name_or_path)
    if not path.exists():
        raise ValidationError(f"no built-in process or file named {name_or_path!r}")
    return load_process_spec(path.read_text())
