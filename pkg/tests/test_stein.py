from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest

from ustatlab.errors import InapplicableConstructionError, NonNormalRegimeError, ValidationError
from ustatlab.graphon import StepGraphon
from ustatlab.graphs import single_edge, triangle, two_star
from ustatlab.kernels import DiscreteSpace, Kernel, constant_kernel, hoeffding_decompose, subgraph_kernel, summarize
from ustatlab.stein import (
    PairPerturbation,
    berry_esseen_bound,
    check_linearity_edge_swap,
    check_linearity_x_swap,
    coefficients,
    stein_solution,
    stein_solution_derivative,
)
from ustatlab.ustat import Configuration, variance_closed_form

ASYM = StepGraphon(np.array([[0.8, 0.2], [0.2, 0.5]]))


def rademacher() -> Kernel:
    return Kernel(1, DiscreteSpace([-1.0, 1.0], [0.5, 0.5]), DiscreteSpace.point(), [-1.0, 1.0])


def test_coefficient_examples():
    mu, nu = coefficients((), [(0, 1), (0, 2), (1, 2)], 5, 3)
    assert (mu, nu) == (pytest.approx(1 / 18), pytest.approx(1 / 6))
    assert coefficients((), [(0, 1)], 2, 2) == (pytest.approx(0.5), pytest.approx(0.5))
    mu, nu = coefficients((), [(0, 1), (0, 2)], 7, 3)
    assert nu / mu == pytest.approx(2)
    with pytest.raises(ValidationError):
        coefficients((0,), (), 5, 3)
    with pytest.raises(ValidationError):
        coefficients((), [(0, 1)], 2, 3)


def test_perturbation():
    c = Configuration(np.zeros(3), np.ones((3, 3)))
    d = PairPerturbation(c, 2, 0, 0).apply()
    assert d.y[0, 2] == 0 and d.y[2, 0] == 0 and d.y[0, 1] == 1
    with pytest.raises(ValidationError):
        PairPerturbation(c, 1, 1, 0)


def test_x_swap_rademacher():
    rep = check_linearity_x_swap(rademacher(), 5)
    assert rep.exhaustive and rep.configurations == 32
    # the identity is exact; only the final rounding of E{D|X} - W/n remains
    assert rep.linearity_residual <= 1e-15
    assert rep.lam == pytest.approx(0.2)
    assert rep.r_term == 0.0


def test_x_swap_graphon_kernels():
    for F in (single_edge(), two_star(), triangle()):
        f = subgraph_kernel(F, ASYM)
        rep = check_linearity_x_swap(f, 6)
        assert rep.exhaustive
        assert rep.linearity_residual <= 1e-10
        assert rep.antisymmetry_error == 0.0
        assert rep.d_delta_mean == pytest.approx(rep.variance_ratio, abs=1e-8)


def test_x_swap_refuses_without_first_projection():
    with pytest.raises(InapplicableConstructionError):
        check_linearity_x_swap(subgraph_kernel(triangle(), 0.5), 5)
    with pytest.raises(Exception):
        check_linearity_x_swap(constant_kernel(2, 1.0, DiscreteSpace([0, 1], [0.5, 0.5])), 4)


def test_edge_swap_edge_kernel_exhaustive():
    rep = check_linearity_edge_swap(subgraph_kernel(single_edge(), 0.5), 4)
    assert rep.exhaustive and rep.configurations == 64
    assert rep.linearity_residual <= 1e-10
    assert rep.lam == pytest.approx(2 / 12)
    assert rep.d_delta_mean == pytest.approx(1.0)


def test_edge_swap_triangle_random_configurations():
    rep = check_linearity_edge_swap(subgraph_kernel(triangle(), 0.5), 5, samples=100, seed=3)
    assert not rep.exhaustive and rep.configurations == 100
    assert rep.linearity_residual <= 1e-10
    assert rep.antisymmetry_error == 0.0


@pytest.mark.parametrize("F,p,mode", [(triangle(), 0.5, "inj"), (two_star(), 0.3, "inj"),
                                      (two_star(), 2 / 3, "ind"), (triangle(), 0.3, "ind")])
def test_edge_swap_exhaustive_and_variance_share(F, p, mode):
    f = subgraph_kernel(F, p, mode)
    dec = hoeffding_decompose(f)
    rep = check_linearity_edge_swap(f, 5, decomp=dec)
    assert rep.exhaustive
    assert rep.linearity_residual <= 1e-10
    d = summarize(dec).d
    var = variance_closed_form(dec, 5)
    assert rep.d_delta_mean == pytest.approx(var.per_level[d] / var.sigma_n_sq, abs=1e-8)


def test_edge_swap_refusals():
    with pytest.raises(InapplicableConstructionError):
        check_linearity_edge_swap(subgraph_kernel(single_edge(), ASYM), 4)
    sym = StepGraphon(np.array([[0.8, 0.2], [0.2, 0.8]]))
    with pytest.raises(NonNormalRegimeError):
        check_linearity_edge_swap(subgraph_kernel(single_edge(), sym), 4)


def test_d_antisymmetry_directly():
    # swapping an edge variable and its replacement negates D exactly
    f = subgraph_kernel(triangle(), 0.3)
    dec = hoeffding_decompose(f)
    n = 5
    sigma = math.sqrt(variance_closed_form(dec, n).sigma_n_sq)
    f2 = dec[((), ((0, 1),))]
    mu = coefficients((), [(0, 1)], n, 3)[0]

    def T(c):
        # sum over ordered pairs alpha of mu * f_{∅,{01}}(Y_{alpha})
        return sum(mu * f2.table[c.y[i, j]] for i in range(n) for j in range(n) if i != j)

    rng = np.random.default_rng(0)
    base = Configuration.random(f, n, rng)
    for i, j in [(0, 1), (2, 4)]:
        for b in range(2):
            other = PairPerturbation(base, i, j, b).apply()
            forward = (T(base) - T(other)) / sigma
            backward = (T(other) - T(base)) / sigma
            assert forward == -backward


def test_bound_examples():
    s = summarize(hoeffding_decompose(rademacher()))
    assert berry_esseen_bound(s, 1, 144) == pytest.approx(1.0)
    assert berry_esseen_bound(s, 1, 14400) == pytest.approx(0.1)
    vals = [berry_esseen_bound(s, 1, n) for n in (10, 40, 160)]
    assert vals[0] / vals[1] == pytest.approx(2.0) and vals[1] / vals[2] == pytest.approx(2.0)
    with pytest.raises(InapplicableConstructionError):
        berry_esseen_bound(summarize(hoeffding_decompose(subgraph_kernel(triangle(), 0.5))), 3, 100)
    with pytest.raises(ValidationError):
        berry_esseen_bound(s, 1, 0)


def mp_solution(z: float, w: float) -> mpmath.mpf:
    mpmath.mp.dps = 40
    Phi = lambda t: mpmath.ncdf(t)
    pre = mpmath.sqrt(2 * mpmath.pi) * mpmath.e ** (mpmath.mpf(w) ** 2 / 2)
    return pre * (Phi(w) * (1 - Phi(z)) if w <= z else Phi(z) * (1 - Phi(w)))


def test_solution_examples():
    assert stein_solution(0.0, 0.0) == pytest.approx(math.sqrt(2 * math.pi) / 4, rel=1e-15)
    assert stein_solution(0.0, 0.0) == pytest.approx(0.626657, abs=1e-6)
    rng = np.random.default_rng(5)
    for z, w in rng.uniform(-6, 6, size=(50, 2)):
        assert stein_solution(z, w) == pytest.approx(float(mp_solution(z, w)), rel=1e-12)
        assert stein_solution(z, w) == pytest.approx(stein_solution(-z, -w), rel=1e-13)


def test_solution_continuous_at_kink():
    for z in (-3.0, 0.0, 1.7):
        eps = 1e-9
        assert stein_solution(z, z - eps) == pytest.approx(stein_solution(z, z + eps), abs=1e-8)


def test_solution_bounds_on_grid():
    g = np.linspace(-8, 8, 321)
    Z, W = np.meshgrid(g, g)
    f = stein_solution(Z, W)
    assert np.all(np.isfinite(f))
    assert np.max(np.abs(f)) <= 1.0
    assert np.max(np.abs(W * f)) <= 1.0


def test_stein_equation_residual():
    rng = np.random.default_rng(9)
    z, w = rng.uniform(-6, 6, size=(2, 1000))
    mask = np.abs(w - z) > 1e-6
    lhs = stein_solution_derivative(z, w) - w * stein_solution(z, w)
    rhs = (w <= z).astype(float) - np.array([mpmath_ncdf(t) for t in z])
    assert np.max(np.abs(lhs - rhs)[mask]) <= 1e-9


def mpmath_ncdf(t: float) -> float:
    return float(mpmath.ncdf(t))


def test_derivative_matches_finite_differences():
    rng = np.random.default_rng(4)
    for z, w in rng.uniform(-5, 5, size=(200, 2)):
        if abs(w - z) < 1e-3:
            continue
        h = 1e-6
        fd = (stein_solution(z, w + h) - stein_solution(z, w - h)) / (2 * h)
        assert stein_solution_derivative(z, w) == pytest.approx(fd, abs=1e-7)


def test_solution_extreme_arguments_finite():
    assert np.isfinite(stein_solution(40.0, 39.0))
    assert np.isfinite(stein_solution(-40.0, -41.0))
    assert 0 < stein_solution(-30.0, 20.0) < 1e-150


def test_bound_dominates_ks_for_first_order_kernel():
    from ustatlab.montecarlo import ExperimentSpec, ks_statistic, simulate

    f = subgraph_kernel(single_edge(), ASYM)
    s = summarize(hoeffding_decompose(f))
    spec = ExperimentSpec((25, 50), 2000, seed=1, kernel=f)
    sim = simulate(spec)
    for n, w in sim.samples.items():
        assert ks_statistic(w) <= berry_esseen_bound(s, 2, n)


def test_report_text():
    text = check_linearity_edge_swap(subgraph_kernel(single_edge(), 0.5), 4).to_text()
    assert "lambda\t" in text and "residual\t" in text and "worst_config\t" in text
