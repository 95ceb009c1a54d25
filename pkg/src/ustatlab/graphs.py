"""Exact combinatorics on small labeled simple graphs.

Everything here works by exhaustive permutation scans, which is fine for the
motif sizes that appear as kernel patterns (at most ten vertices).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CapabilityError, ParseError, ValidationError

MAX_BRUTE_FORCE_VERTICES = 10

Edge = tuple[int, int]


def _norm_edge(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Motif:
    """Simple undirected graph on vertices ``0 .. vertex_count - 1``.

    Edges are stored as a sorted tuple of ``(i, j)`` pairs with ``i < j``;
    isolated vertices are allowed.
    """

    vertex_count: int
    edges: tuple[Edge, ...]

    def __init__(self, vertex_count: int, edges: Iterable[Sequence[int]] = ()):
        vertex_count = int(vertex_count)
        if vertex_count < 1:
            raise ValidationError(f"vertex_count must be >= 1, got {vertex_count}")
        normed = []
        for e in edges:
            i, j = (int(e[0]), int(e[1]))
            if i == j:
                raise ValidationError(f"self-loop at vertex {i}")
            if not (0 <= i < vertex_count and 0 <= j < vertex_count):
                raise ValidationError(f"edge ({i}, {j}) out of range for {vertex_count} vertices")
            normed.append(_norm_edge(i, j))
        if len(set(normed)) != len(normed):
            raise ValidationError("duplicate edge")
        object.__setattr__(self, "vertex_count", vertex_count)
        object.__setattr__(self, "edges", tuple(sorted(normed)))

    @property
    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.vertex_count
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.vertex_count, self.vertex_count), dtype=np.uint8)
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1
        return a

    def non_isolated(self) -> list[int]:
        return [v for v, d in enumerate(self.degrees()) if d > 0]

    def relabel(self, perm: Sequence[int]) -> "Motif":
        """Image of the graph under the vertex map ``v -> perm[v]``."""
        return Motif(self.vertex_count, [_norm_edge(perm[i], perm[j]) for i, j in self.edges])

    def induced(self, vertices: Sequence[int]) -> "Motif":
        """Induced subgraph on ``vertices``, relabeled to ``0..len-1`` in the given order."""
        index = {v: t for t, v in enumerate(vertices)}
        kept = [(index[i], index[j]) for i, j in self.edges if i in index and j in index]
        return Motif(len(vertices), kept)

    def __str__(self) -> str:
        body = ", ".join(f"{i}{j}" for i, j in self.edges)
        return f"Motif(v={self.vertex_count}, E={{{body}}})"


@dataclass(frozen=True)
class MotifStats:
    edge_count: int
    two_star_count: int
    triangle_count: int
    degree_sequence: tuple[int, ...]


# -- named motifs -------------------------------------------------------------

def single_edge() -> Motif:
    return Motif(2, [(0, 1)])


def two_star() -> Motif:
    return Motif(3, [(0, 1), (0, 2)])


def triangle() -> Motif:
    return Motif(3, [(0, 1), (0, 2), (1, 2)])


def path_graph(v: int) -> Motif:
    return Motif(v, [(i, i + 1) for i in range(v - 1)])


def cycle_graph(v: int) -> Motif:
    if v < 3:
        raise ValidationError("a cycle needs at least 3 vertices")
    return Motif(v, [(i, (i + 1) % v) for i in range(v)])


def complete_graph(v: int) -> Motif:
    return Motif(v, itertools.combinations(range(v), 2))


def empty_graph(v: int) -> Motif:
    return Motif(v, [])


BUILTIN_MOTIFS = {
    "edge": single_edge,
    "two-star": two_star,
    "triangle": triangle,
    "path4": lambda: path_graph(4),
    "cycle4": lambda: cycle_graph(4),
}


# -- statistics ----------------------------------------------------------------

def motif_stats(m: Motif) -> MotifStats:
    deg = m.degrees()
    s = sum(math.comb(d, 2) for d in deg)
    es = m.edge_set
    t = sum(
        1
        for a, b, c in itertools.combinations(range(m.vertex_count), 3)
        if (a, b) in es and (a, c) in es and (b, c) in es
    )
    return MotifStats(len(m.edges), s, t, tuple(deg))


def _check_size(m: Motif) -> None:
    if m.vertex_count > MAX_BRUTE_FORCE_VERTICES:
        raise CapabilityError(
            f"brute-force permutation scan limited to {MAX_BRUTE_FORCE_VERTICES} vertices, "
            f"got {m.vertex_count}"
        )


def automorphism_count(m: Motif, marked: Iterable[int] = ()) -> int:
    """Number of vertex permutations mapping the edge set onto itself.

    If ``marked`` is given, only permutations that also map the marked vertex
    set onto itself are counted (automorphisms of a vertex-colored graph).
    """
    _check_size(m)
    es = m.edge_set
    mk = frozenset(marked)
    count = 0
    for perm in itertools.permutations(range(m.vertex_count)):
        if mk and frozenset(perm[v] for v in mk) != mk:
            continue
        if all(_norm_edge(perm[i], perm[j]) in es for i, j in m.edges):
            count += 1
    return count


def _connected_on(vertices: Sequence[int], edges: Iterable[Edge]) -> bool:
    vs = set(vertices)
    if len(vs) <= 1:
        return True
    nbrs: dict[int, list[int]] = {v: [] for v in vs}
    for i, j in edges:
        if i in vs and j in vs:
            nbrs[i].append(j)
            nbrs[j].append(i)
    start = next(iter(vs))
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for w in nbrs[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(vs)


def is_connected(m: Motif, ignore_isolated: bool = True) -> bool:
    """Connectivity test.

    With ``ignore_isolated`` (the default) isolated vertices are dropped first,
    so a motif stored with spare vertices is judged by its edges alone. Pass
    ``False`` when every stored vertex is a genuine vertex, as for Hoeffding
    support graphs, where an isolated vertex makes the graph disconnected.
    """
    vertices = m.non_isolated() if ignore_isolated else list(range(m.vertex_count))
    return _connected_on(vertices, m.edges)


def is_strongly_connected(m: Motif, ignore_isolated: bool = True) -> bool:
    """True iff deleting any single vertex leaves a connected or empty graph.

    Vertices left behind by a deletion still count: removing the center of a
    2-star leaves two isolated vertices, which is disconnected.
    """
    vertices = m.non_isolated() if ignore_isolated else list(range(m.vertex_count))
    if not _connected_on(vertices, m.edges):
        return False
    for r in vertices:
        rest = [v for v in vertices if v != r]
        if not _connected_on(rest, (e for e in m.edges if r not in e)):
            return False
    return True


def isomorphic_embeddings(m: Motif, k: int) -> list[frozenset[Edge]]:
    """All distinct edge sets on vertex set ``[k]`` isomorphic to ``m``.

    The result has ``k! / |Aut(m)|`` entries, sorted for determinism.
    """
    if m.vertex_count != k:
        raise ValidationError(f"motif has {m.vertex_count} vertices, expected k={k}")
    _check_size(m)
    seen = set()
    for perm in itertools.permutations(range(k)):
        seen.add(frozenset(_norm_edge(perm[i], perm[j]) for i, j in m.edges))
    return sorted(seen, key=lambda s: sorted(s))


def canonical_form(m: Motif) -> tuple[int, tuple[Edge, ...]]:
    """Lexicographically least relabeled edge list; equal iff isomorphic."""
    _check_size(m)
    best = None
    for perm in itertools.permutations(range(m.vertex_count)):
        cand = tuple(sorted(_norm_edge(perm[i], perm[j]) for i, j in m.edges))
        if best is None or cand < best:
            best = cand
    return (m.vertex_count, best)


def is_isomorphic(a: Motif, b: Motif) -> bool:
    if a.vertex_count != b.vertex_count or len(a.edges) != len(b.edges):
        return False
    return canonical_form(a) == canonical_form(b)


def all_motifs(v: int) -> list[Motif]:
    """One representative per isomorphism class of simple graphs on ``v`` vertices."""
    pairs = list(itertools.combinations(range(v), 2))
    reps: dict[tuple, Motif] = {}
    for mask in range(1 << len(pairs)):
        g = Motif(v, [pairs[t] for t in range(len(pairs)) if mask >> t & 1])
        reps.setdefault(canonical_form(g), g)
    return sorted(reps.values(), key=lambda g: (len(g.edges), g.edges))


# -- text format -----------------------------------------------------------------

def parse_motif(text: str, source: str = "") -> Motif:
    """Parse ``v <count>`` followed by ``e <i> <j>`` lines. ``#`` starts a comment."""
    vertex_count = None
    edges: list[Edge] = []
    seen: set[Edge] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        col = len(line) - len(line.lstrip()) + 1
        tokens = line.split()
        try:
            if tokens[0] == "v":
                if vertex_count is not None:
                    raise ParseError("repeated 'v' line", lineno, col, source)
                if len(tokens) != 2:
                    raise ParseError("expected 'v <vertex_count>'", lineno, col, source)
                vertex_count = int(tokens[1])
                if vertex_count < 1:
                    raise ParseError("vertex_count must be >= 1", lineno, col, source)
            elif tokens[0] == "e":
                if vertex_count is None:
                    raise ParseError("'e' line before 'v' line", lineno, col, source)
                if len(tokens) != 3:
                    raise ParseError("expected 'e <i> <j>'", lineno, col, source)
                i, j = int(tokens[1]), int(tokens[2])
                if i == j:
                    raise ParseError(f"self-loop at vertex {i}", lineno, col, source)
                if not (0 <= i < vertex_count and 0 <= j < vertex_count):
                    raise ParseError(f"vertex out of range in edge ({i}, {j})", lineno, col, source)
                e = _norm_edge(i, j)
                if e in seen:
                    raise ParseError(f"duplicate edge ({e[0]}, {e[1]})", lineno, col, source)
                seen.add(e)
                edges.append(e)
            else:
                raise ParseError(f"unknown record '{tokens[0]}'", lineno, col, source)
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"not an integer: {exc}", lineno, col, source) from None
    if vertex_count is None:
        raise ParseError("missing 'v <vertex_count>' line", 1, 1, source)
    return Motif(vertex_count, edges)


def format_motif(m: Motif) -> str:
    lines = [f"v {m.vertex_count}"] + [f"e {i} {j}" for i, j in m.edges]
    return "\n".join(lines) + "\n"


def load_motif(path) -> Motif:
    from pathlib import Path

    p = Path(path)
    return parse_motif(p.read_text(), source=str(p))
