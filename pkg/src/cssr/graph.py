"""Strongly connected components and recurrent classes of small digraphs."""

from __future__ import annotations

from typing import Hashable, Iterable, Mapping


def tarjan(vertices: Iterable[Hashable], successors: Mapping) -> list[list]:
    """Strongly connected components, iteratively (no recursion limit).

    ``successors[v]`` is an iterable of neighbours of ``v``. Components are
    returned in reverse topological order of the condensation.
    """
    index: dict = {}
    lowlink: dict = {}
    on_stack: set = set()
    stack: list = []
    components: list[list] = []
    counter = 0

    for root in vertices:
        if root in index:
            continue
        work = [(root, iter(successors.get(root, ())))]
        index[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = lowlink[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(successors.get(w, ()))))
                    advanced = True
                    break
                if w in on_stack:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
            if lowlink[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                components.append(comp)
    return components


def recurrent_classes(vertices: Iterable[Hashable], successors: Mapping) -> list[list]:
    """Components with no edge leaving them and at least one edge inside.

    These are the sinks of the condensation; a lone vertex without a
    self-loop is a dead end, not a recurrent class.
    """
    vertices = list(vertices)
    out = []
    for comp in tarjan(vertices, successors):
        members = set(comp)
        closed = True
        internal = False
        for v in comp:
            for w in successors.get(v, ()):
                if w in members:
                    internal = True
                else:
                    closed = False
        if closed and internal:
            out.append(comp)
    return out
