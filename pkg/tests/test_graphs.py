from __future__ import annotations

import itertools
import math

import pytest

from oracles import networkx_automorphisms, networkx_graph_classes
from ustatlab.errors import CapabilityError, ParseError, ValidationError
from ustatlab.graphs import (
    Motif,
    all_motifs,
    automorphism_count,
    complete_graph,
    cycle_graph,
    empty_graph,
    format_motif,
    is_connected,
    is_isomorphic,
    is_strongly_connected,
    isomorphic_embeddings,
    motif_stats,
    parse_motif,
    path_graph,
    single_edge,
    triangle,
    two_star,
)


def test_motif_stats_examples():
    st = motif_stats(triangle())
    assert (st.edge_count, st.two_star_count, st.triangle_count) == (3, 3, 1)
    st = motif_stats(two_star())
    assert (st.edge_count, st.two_star_count, st.triangle_count) == (2, 1, 0)
    st = motif_stats(empty_graph(4))
    assert (st.edge_count, st.two_star_count, st.triangle_count) == (0, 0, 0)
    assert st.degree_sequence == (0, 0, 0, 0)


def test_automorphism_examples():
    assert automorphism_count(two_star()) == 2
    assert automorphism_count(triangle()) == 6
    assert automorphism_count(path_graph(4)) == 2
    assert automorphism_count(cycle_graph(4)) == 8


def test_marked_automorphisms():
    # edge {0,1} plus isolated marked vertex 2: swapping 0 and 1 is the only symmetry
    g = Motif(3, [(0, 1)])
    assert automorphism_count(g) == 2
    assert automorphism_count(g, marked=[2]) == 2
    assert automorphism_count(g, marked=[0]) == 1
    assert automorphism_count(empty_graph(3), marked=[0, 1]) == 2


def test_connectivity_examples():
    assert is_connected(triangle())
    assert not is_connected(Motif(4, [(0, 1), (2, 3)]))
    assert is_connected(single_edge())
    assert is_strongly_connected(triangle())
    assert not is_strongly_connected(two_star())
    assert is_strongly_connected(single_edge())
    assert is_strongly_connected(cycle_graph(4))
    assert not is_strongly_connected(path_graph(4))


def test_isolated_vertices_policy():
    g = Motif(3, [(0, 1)])
    assert is_connected(g)
    assert not is_connected(g, ignore_isolated=False)
    assert not is_connected(empty_graph(2), ignore_isolated=False)
    assert is_connected(empty_graph(1), ignore_isolated=False)


def test_embeddings_examples():
    emb = isomorphic_embeddings(two_star(), 3)
    assert emb == sorted(
        [frozenset({(0, 1), (0, 2)}), frozenset({(0, 1), (1, 2)}), frozenset({(0, 2), (1, 2)})],
        key=lambda s: sorted(s),
    )
    assert len(isomorphic_embeddings(triangle(), 3)) == 1
    assert len(isomorphic_embeddings(single_edge(), 2)) == 1
    with pytest.raises(ValidationError):
        isomorphic_embeddings(triangle(), 4)


@pytest.mark.parametrize("v", [1, 2, 3, 4, 5])
def test_invariants_all_small_motifs(v):
    for m in all_motifs(v):
        aut = automorphism_count(m)
        assert math.factorial(v) % aut == 0
        assert len(isomorphic_embeddings(m, v)) * aut == math.factorial(v)
        if len(m.non_isolated()) >= 2 and is_strongly_connected(m):
            assert is_connected(m)
        # 2-stars by unordered (center, pair of neighbours) enumeration
        es = m.edge_set
        s = sum(
            1
            for c in range(v)
            for a, b in itertools.combinations([u for u in range(v) if u != c], 2)
            if tuple(sorted((c, a))) in es and tuple(sorted((c, b))) in es
        )
        assert s == motif_stats(m).two_star_count


@pytest.mark.parametrize("v", [1, 2, 3, 4])
def test_class_counts_match_networkx(v):
    assert len(all_motifs(v)) == networkx_graph_classes(v)


def test_automorphisms_match_networkx():
    for v in range(1, 6):
        for m in all_motifs(v):
            assert automorphism_count(m) == networkx_automorphisms(v, m.edges)


def test_capability_limit():
    with pytest.raises(CapabilityError):
        automorphism_count(empty_graph(11))


def test_invalid_motifs():
    with pytest.raises(ValidationError):
        Motif(3, [(0, 0)])
    with pytest.raises(ValidationError):
        Motif(3, [(0, 1), (1, 0)])
    with pytest.raises(ValidationError):
        Motif(2, [(0, 2)])
    with pytest.raises(ValidationError):
        Motif(0)


def test_isomorphism():
    assert is_isomorphic(two_star(), Motif(3, [(0, 2), (1, 2)]))
    assert not is_isomorphic(two_star(), triangle())
    assert is_isomorphic(complete_graph(4).relabel([3, 1, 0, 2]), complete_graph(4))


def test_parse_round_trip():
    for m in all_motifs(4):
        assert parse_motif(format_motif(m)) == m
    text = "# a triangle\nv 3\ne 0 1   # first\n\ne 1 2\ne 2 0\n"
    assert parse_motif(text) == triangle()


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("v 3\ne 0 1\ne 1 0\n", 3, "duplicate"),
        ("v 3\n  e 1 1\n", 2, "self-loop"),
        ("e 0 1\n", 1, "before"),
        ("v 2\ne 0 5\n", 2, "out of range"),
        ("v x\n", 1, "integer"),
        ("v 2\nq 0 1\n", 2, "unknown"),
        ("", 1, "missing"),
    ],
)
def test_parse_errors(text, line, fragment):
    with pytest.raises(ParseError) as info:
        parse_motif(text, source="m.motif")
    assert info.value.line == line
    assert fragment in str(info.value)
    assert str(info.value).startswith(f"m.motif:{line}:")


def test_parse_error_column():
    with pytest.raises(ParseError) as info:
        parse_motif("v 3\n   e 1 1\n")
    assert info.value.column == 4
