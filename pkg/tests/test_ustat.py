from __future__ import annotations

import math

import numpy as np
import pytest

from oracles import ustat_loop
from ustatlab.errors import CapabilityError, ValidationError
from ustatlab.graphon import GraphSample, StepGraphon, expected_count, sample, sample_condensed
from ustatlab.graphs import Motif, complete_graph, cycle_graph, path_graph, single_edge, triangle, two_star
from ustatlab.kernels import DiscreteSpace, Kernel, constant_kernel, hoeffding_decompose, subgraph_kernel
from ustatlab.ustat import (
    Configuration,
    count_subgraphs,
    count_subgraphs_batch,
    evaluate_ustat,
    evaluate_ustat_batch,
    exact_mean,
    variance_by_class,
    variance_closed_form,
    variance_oracle,
)

MOTIFS = {"edge": single_edge(), "two-star": two_star(), "triangle": triangle()}


def rademacher() -> Kernel:
    return Kernel(1, DiscreteSpace([-1.0, 1.0], [0.5, 0.5]), DiscreteSpace.point(), [-1.0, 1.0])


def test_configuration_validation():
    with pytest.raises(ValidationError):
        Configuration(np.zeros(3), np.zeros((3, 2)))
    y = np.zeros((3, 3))
    y[0, 1] = 1
    with pytest.raises(ValidationError):
        Configuration(np.zeros(3), y)
    c = Configuration.from_pairs([0, 0, 0], {(0, 1): 1, (0, 2): 0, (2, 1): 1})
    assert c.y[1, 2] == 1 and c.y[2, 1] == 1
    with pytest.raises(ValidationError):
        Configuration.from_pairs([0, 0, 0], {(0, 1): 1})


def test_evaluate_examples():
    f = subgraph_kernel(single_edge(), 0.5)
    g = sample(StepGraphon.constant(0.5), 8, 3)
    assert evaluate_ustat(f, Configuration.from_adjacency(g.adjacency)) == g.adjacency.sum() / 2
    K4 = complete_graph(4).adjacency()
    assert evaluate_ustat(subgraph_kernel(triangle(), 0.5), Configuration.from_adjacency(K4)) == 4
    c = Configuration(np.zeros(6), np.zeros((6, 6)))
    assert evaluate_ustat(constant_kernel(3, 1.5), c) == pytest.approx(math.comb(6, 3) * 1.5)
    with pytest.raises(ValidationError):
        evaluate_ustat(subgraph_kernel(triangle(), 0.5), Configuration(np.zeros(2), np.zeros((2, 2))))


def test_evaluate_matches_loop_and_batch():
    rng = np.random.default_rng(7)
    f = subgraph_kernel(two_star(), StepGraphon(np.array([[0.8, 0.3], [0.3, 0.1]])), "ind")
    xs, ys = [], []
    for _ in range(5):
        c = Configuration.random(f, 7, rng)
        assert evaluate_ustat(f, c) == pytest.approx(ustat_loop(f.table, 3, c.x, c.y), abs=1e-12)
        xs.append(c.x)
        ys.append(c.y)
    batch = evaluate_ustat_batch(f, np.array(xs), np.array(ys))
    for b, x, y in zip(batch, xs, ys):
        assert b == pytest.approx(evaluate_ustat(f, Configuration(x, y)), abs=1e-12)


def test_capability_guard(monkeypatch):
    import ustatlab.ustat as U

    monkeypatch.setattr(U, "MAX_TUPLES", 10)
    with pytest.raises(CapabilityError):
        evaluate_ustat(subgraph_kernel(triangle(), 0.5), Configuration(np.zeros(6), np.zeros((6, 6))))


def test_count_examples():
    assert count_subgraphs(cycle_graph(4).adjacency(), triangle()) == 0
    assert count_subgraphs(complete_graph(4).adjacency(), triangle()) == 4
    assert count_subgraphs(path_graph(3).adjacency(), two_star()) == 1
    assert count_subgraphs(complete_graph(4).adjacency(), two_star(), "ind") == 0
    assert count_subgraphs(cycle_graph(4).adjacency(), path_graph(3), "inj") == 4
    assert count_subgraphs(complete_graph(5).adjacency(), cycle_graph(4), "inj") == 15
    assert count_subgraphs(complete_graph(5).adjacency(), cycle_graph(4), "ind") == 0
    with pytest.raises(ValidationError):
        count_subgraphs(path_graph(3).adjacency(), cycle_graph(4))
    with pytest.raises(ValidationError):
        count_subgraphs(path_graph(3).adjacency(), single_edge(), "both")


@pytest.mark.parametrize("name", list(MOTIFS))
@pytest.mark.parametrize("mode", ["inj", "ind"])
def test_fast_paths_match_bruteforce(name, mode):
    F = MOTIFS[name]
    rng = np.random.default_rng(11)
    for r in range(200):
        n = int(rng.integers(3, 13))
        g = sample(StepGraphon.constant(float(rng.uniform(0.1, 0.9))), n, 500 + r)
        f = subgraph_kernel(F, 0.5, mode)
        want = evaluate_ustat(f, Configuration.from_adjacency(g.adjacency))
        assert count_subgraphs(g, F, mode) == want


def test_batch_counts_match_single():
    n = 11
    _, edges = sample_condensed(StepGraphon.constant(0.4), n, 3, range(30))
    from ustatlab.graphon import condensed_to_adjacency

    adj = condensed_to_adjacency(edges, n)
    for F in list(MOTIFS.values()) + [path_graph(4), cycle_graph(4)]:
        for mode in ("inj", "ind"):
            batch = count_subgraphs_batch(edges, n, F, mode)
            assert batch.tolist() == [count_subgraphs(a, F, mode) for a in adj]


def test_graphsample_counts():
    g = GraphSample.from_edge_list("n 4 seed 0\n0 1\n1 2\n2 0\n2 3\n")
    assert count_subgraphs(g, triangle()) == 1
    assert count_subgraphs(g, two_star()) == 5
    assert count_subgraphs(g, two_star(), "ind") == 2


def test_variance_examples():
    f = subgraph_kernel(single_edge(), 0.5)
    dec = hoeffding_decompose(f)
    assert variance_closed_form(dec, 4).sigma_n_sq == pytest.approx(1.5)
    assert variance_oracle(f, 4) == pytest.approx(1.5)
    const = constant_kernel(2, 3.0, y_space=DiscreteSpace.bernoulli(0.5))
    assert variance_closed_form(hoeffding_decompose(const), 4).sigma_n_sq == 0.0
    assert variance_oracle(const, 4) == pytest.approx(0.0, abs=1e-12)
    assert variance_oracle(rademacher(), 3) == pytest.approx(3.0)
    with pytest.raises(ValidationError):
        variance_closed_form(dec, 1)


@pytest.mark.parametrize("name", list(MOTIFS))
@pytest.mark.parametrize("mode", ["inj", "ind"])
@pytest.mark.parametrize("p", [0.3, 0.5])
@pytest.mark.parametrize("n", [4, 5])
def test_closed_form_matches_oracle(name, mode, p, n):
    f = subgraph_kernel(MOTIFS[name], p, mode)
    dec = hoeffding_decompose(f)
    want = variance_oracle(f, n)
    rep = variance_closed_form(dec, n)
    assert rep.sigma_n_sq == pytest.approx(want, rel=1e-9)
    assert sum(variance_by_class(dec, n).values()) == pytest.approx(want, rel=1e-9)
    assert rep.sigma_n_sq == pytest.approx(sum(rep.per_level.values()), rel=1e-12)
    assert all(v >= 0 for v in rep.per_level.values())


def test_subset_reading_overcounts_triangle():
    # the triangle kernel at n = 3 is f itself: Var = p^3 (1 - p^3)
    p = 0.5
    dec = hoeffding_decompose(subgraph_kernel(triangle(), p))
    truth = p**3 * (1 - p**3)
    assert variance_closed_form(dec, 3).sigma_n_sq == pytest.approx(truth)
    subset = variance_closed_form(dec, 3, convention="subset")
    assert subset.sigma_n_sq > truth * 1.5
    # at level 2 the class of the single edge has three labeled members
    assert subset.per_level[2] == pytest.approx(3 * variance_closed_form(dec, 3).per_level[2])


def test_closed_form_graphon_kernels():
    kappa = StepGraphon(np.array([[0.8, 0.2], [0.2, 0.5]]))
    for F in (single_edge(), two_star(), triangle()):
        f = subgraph_kernel(F, kappa, "ind")
        dec = hoeffding_decompose(f)
        for n in (3, 4):
            assert variance_closed_form(dec, n).sigma_n_sq == pytest.approx(variance_oracle(f, n), rel=1e-9)


def test_edge_binomial_variance_large_n():
    p = 0.3
    dec = hoeffding_decompose(subgraph_kernel(single_edge(), p))
    for n in (2, 10, 100, 1000):
        assert variance_closed_form(dec, n).sigma_n_sq == pytest.approx(math.comb(n, 2) * p * (1 - p), rel=1e-12)


def test_oracle_capability():
    with pytest.raises(CapabilityError):
        variance_oracle(subgraph_kernel(triangle(), 0.5), 8)


def test_exact_mean_examples():
    assert exact_mean(subgraph_kernel(single_edge(), 0.5), 4) == pytest.approx(3.0)
    assert exact_mean(subgraph_kernel(triangle(), 0.5), 4) == pytest.approx(expected_count(triangle(), StepGraphon.constant(0.5), 4))
    assert exact_mean(constant_kernel(2, 2.0), 5) == pytest.approx(20.0)


def test_monte_carlo_moments():
    F, p, n, m = triangle(), 0.5, 15, 100_000
    dec = hoeffding_decompose(subgraph_kernel(F, p))
    _, edges = sample_condensed(StepGraphon.constant(p), n, 77, range(m))
    s = count_subgraphs_batch(edges, n, F)
    var = variance_closed_form(dec, n).sigma_n_sq
    centered = s - s.mean()
    se_var = math.sqrt((np.mean(centered**4) - np.var(s) ** 2) / m)
    assert abs(np.var(s, ddof=1) - var) < 5 * se_var
    mean_se = math.sqrt(var / m)
    assert abs(s.mean() - exact_mean(dec, n)) < 4 * mean_se


def test_exact_mean_monte_carlo_n20():
    kappa = StepGraphon(np.array([[0.7, 0.2], [0.2, 0.4]]))
    f = subgraph_kernel(two_star(), kappa, "ind")
    _, edges = sample_condensed(kappa, 20, 8, range(10_000))
    s = count_subgraphs_batch(edges, 20, two_star(), "ind")
    assert abs(s.mean() - exact_mean(f, 20)) < 4 * s.std(ddof=1) / 100


def test_report_text():
    dec = hoeffding_decompose(subgraph_kernel(two_star(), 0.5))
    text = variance_closed_form(dec, 5).to_text()
    lines = text.splitlines()
    assert lines[0].startswith("# variance n=5 k=3")
    assert "A\tB\tv\tsigma\taut\tcontribution" in lines
    assert any(line.startswith("{}\t{01}\t2\t") for line in lines)


def test_motif_other_than_fast_path():
    F = Motif(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)])
    rng_adj = sample(StepGraphon.constant(0.6), 9, 1).adjacency
    f = subgraph_kernel(F, 0.5, "ind")
    assert count_subgraphs(rng_adj, F, "ind") == evaluate_ustat(f, Configuration.from_adjacency(rng_adj))
