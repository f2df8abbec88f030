import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hhlab.bounds import (BoundKind, alpha_constant, beta_constant, covariance_gap,
                          delta_refinement, golden_section_max, grid_refine_max,
                          simplex_gap_max, xi_refinement)
from hhlab.errors import HypothesisError
from hhlab.matcore import apply_function, quadratic_form
from hhlab.quad import gauss_legendre, segment_points
from hhlab.scalarfn import chord_coefficients, get_function

from conftest import gen, sym_pairs


def sphere_samples(n, count, seed):
    x = gen(seed).standard_normal((count, n))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def gap_oracle(f, mats, weights, x):
    """Weighted covariance gap at each row of x, from dense matrix products."""
    f = get_function(f)
    total = np.zeros(len(x))
    for wk, t in zip(weights, mats):
        fd = apply_function(t, f, derivative=True)
        q = lambda m: np.einsum("ki,ij,kj->k", x, m, x)
        total += wk * (q(t @ fd) - q(t) * q(fd))
    return total


# -- 1-d maximizers -------------------------------------------------------------------

def test_golden_section_finds_interior_and_boundary_max():
    x, v = golden_section_max(lambda t: -(t - 0.3) ** 2, 0.0, 1.0)
    assert x == pytest.approx(0.3, abs=1e-6) and v == pytest.approx(0.0, abs=1e-12)
    x, v = golden_section_max(lambda t: t, 0.0, 1.0)
    assert x == 1.0 and v == 1.0


def test_grid_refine_on_bimodal():
    f = lambda t: np.sin(3 * t) + 0.5 * np.sin(7 * t)
    x, v = grid_refine_max(f, 0.0, 3.0)
    dense = np.linspace(0.0, 3.0, 2_000_001)
    assert v >= f(dense).max() - 1e-12


# -- beta and alpha -------------------------------------------------------------------

def test_beta_examples():
    b = beta_constant("square", "square", 1.0, 0.0, 2.0)
    assert b.value == pytest.approx(1.0, abs=1e-12) and b.witness == pytest.approx(1.0, abs=1e-6)
    assert b.kind is BoundKind.BETA
    b0 = beta_constant("cube", "exp", 0.0, 1.0, 2.0)
    assert b0.value == pytest.approx(8.0, abs=1e-12)
    assert beta_constant("identity", "identity", 1.0, -1.0, 3.0).value == pytest.approx(0.0, abs=1e-12)


def test_beta_rejects_negative_alpha():
    with pytest.raises(HypothesisError):
        beta_constant("square", "square", -0.5, 0.0, 1.0)


@pytest.mark.parametrize("f, g", [("cube", "cube"), ("cube", "square"), ("exp", "square"),
                                  ("exp", "sin"), ("square", "sqrt")])
@given(m=st.floats(0.0, 2.0), width=st.floats(0.01, 2.0), alpha=st.floats(0.0, 3.0))
def test_beta_against_dense_grid(f, g, m, width, alpha):
    M = m + width
    res = beta_constant(f, g, alpha, m, M)
    fn, gn = get_function(f), get_function(g)
    c = chord_coefficients(fn, m, M)
    x = np.linspace(m, M, 100_001)
    grid = c(x) - alpha * gn.values(x)
    scale = max(1.0, np.abs(grid).max())
    # feasibility on a coarser grid, closeness to the dense grid max
    assert np.all(grid[::100] <= res.value + 1e-9 * scale)
    assert res.value >= grid.max() - 1e-9 * scale
    assert res.value == pytest.approx(float(c(res.witness) - alpha * gn(res.witness)), abs=1e-12 * scale)


def test_alpha_examples():
    a = alpha_constant("square", "square", 1.0, 2.0)
    assert a.value == pytest.approx(9 / 8, abs=1e-12) and a.witness == pytest.approx(4 / 3, abs=1e-6)
    assert alpha_constant("identity", "identity", 0.5, 4.0).value == pytest.approx(1.0, abs=1e-12)
    assert alpha_constant("square", "one", 0.0, 1.0).value == pytest.approx(1.0, abs=1e-12)


def test_alpha_requires_positive_g():
    with pytest.raises(HypothesisError):
        alpha_constant("square", "identity", -1.0, 1.0)


@given(m=st.floats(0.5, 2.0), width=st.floats(0.05, 2.0))
def test_alpha_makes_beta_nonpositive(m, width):
    for f, g in [("square", "square"), ("cube", "cube"), ("exp", "square")]:
        a = alpha_constant(f, g, m, m + width)
        assert beta_constant(f, g, a.value, m, m + width).value <= 1e-9 * max(1.0, a.value)


# -- covariance gap -------------------------------------------------------------------

def test_covariance_gap_examples():
    a = np.diag([0.0, 1.0])
    s = 1 / math.sqrt(2)
    assert covariance_gap("square", a, [s, s]) == pytest.approx(0.5, abs=1e-15)
    assert covariance_gap("square", a, [1.0, 0.0]) == pytest.approx(0.0, abs=1e-15)
    assert covariance_gap("identity", a, [s, s]) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        covariance_gap("square", a, [1.0, 1.0])
    with pytest.raises(ValueError):
        covariance_gap("abs", a, [1.0, 0.0])


@given(sym_pairs(window=(0.2, 2.5)), st.integers(0, 2**32 - 1))
def test_covariance_gap_dominates_jensen_gap(pair, seed):
    a = pair[0]
    x = sphere_samples(a.shape[0], 1, seed)[0]
    for name in ("square", "cube", "exp", "inv"):
        f = get_function(name)
        jensen = quadratic_form(apply_function(a, f), x) - float(f(quadratic_form(a, x)))
        gap = covariance_gap(f, a, x)
        assert gap >= jensen - 1e-9 * max(1.0, abs(gap)) and jensen >= -1e-9


# -- delta ----------------------------------------------------------------------------

def test_delta_examples():
    a, b = np.diag([0.0, 0.0]), np.diag([0.0, 2.0])
    d = delta_refinement("square", a, b)
    assert d.value == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(np.abs(d.witness), [1 / math.sqrt(2)] * 2, atol=1e-8)
    c = 1.7 * np.eye(3)
    assert delta_refinement("exp", c, c).value == pytest.approx(0.0, abs=1e-12)
    g = gen(1)
    a, b = g.standard_normal((2, 4, 4))
    a, b = a + a.T, b + b.T
    assert delta_refinement("identity", a, b).value == pytest.approx(0.0, abs=1e-12)


def test_simplex_gap_on_triangle_grid():
    lam = np.array([0.0, 1.0, 2.0])
    d = np.array([0.0, 3.0, -1.0])
    val, p = simplex_gap_max(lam, d)
    w = np.linspace(0, 1, 801)
    P = np.array([(u, v, 1 - u - v) for u in w for v in w if u + v <= 1])
    ref = (P @ (lam * d) - (P @ d) * (P @ lam)).max()
    assert val >= ref - 1e-12


@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_simplex_gap_against_sampling(n, seed):
    g = gen(seed)
    lam = np.sort(g.uniform(-2, 2, n))
    d = g.uniform(-2, 2, n)
    val, p = simplex_gap_max(lam, d)
    assert p.sum() == pytest.approx(1.0) and np.all(p >= 0)
    assert np.count_nonzero(p) <= 2
    P = g.dirichlet(np.full(n, 0.3), 20000)
    ref = (P @ (lam * d) - (P @ d) * (P @ lam)).max()
    assert val >= ref - 1e-12


@given(sym_pairs(dims=(2, 3, 4)), st.integers(0, 2**16))
def test_delta_nonnegative_and_beats_sampling(pair, seed):
    a, b = pair
    for name in ("square", "cube", "exp"):
        d = delta_refinement(name, a, b, seed=seed)
        assert d.value >= -1e-9
        assert d.value >= d.certified_lower - 1e-15
        c = 0.5 * (a + b)
        at_witness = gap_oracle(name, [c], [1.0], d.witness[None])[0]
        assert at_witness >= d.value - 1e-10
        x = sphere_samples(a.shape[0], 4000, seed)
        assert d.value >= gap_oracle(name, [c], [1.0], x).max() - 1e-10


# -- xi -------------------------------------------------------------------------------

def test_xi_swap_example():
    x = xi_refinement("square", np.diag([0.0, 1.0]), np.diag([1.0, 0.0]))
    assert x.value == pytest.approx(1 / 6, abs=1e-9)
    assert x.kind is BoundKind.XI and x.method == "sphere-ascent"


def test_xi_trivial_cases():
    c = 1.3 * np.eye(3)
    assert xi_refinement("exp", c, c).value == pytest.approx(0.0, abs=1e-12)
    g = gen(2)
    a, b = g.standard_normal((2, 3, 3))
    assert xi_refinement("identity", a + a.T, b + b.T).value == pytest.approx(0.0, abs=1e-12)


def test_xi_equal_endpoints_matches_delta():
    a = np.array([[1.0, 0.4, 0.0], [0.4, 2.0, 0.3], [0.0, 0.3, 1.5]])
    xi = xi_refinement("cube", a, a).value
    assert xi == pytest.approx(delta_refinement("cube", a, a).value, abs=1e-9)


def test_xi_requires_restarts():
    with pytest.raises(ValueError):
        xi_refinement("square", np.eye(2), np.eye(2), restarts=0)


@given(sym_pairs(dims=(2, 3, 4)), st.integers(0, 2**16))
def test_xi_bracketed_by_sampling_and_node_sups(pair, seed):
    a, b = pair
    rule = gauss_legendre(16)
    mats = segment_points(a, b, rule.nodes)
    for name in ("square", "exp"):
        res = xi_refinement(name, a, b, rule, seed=seed)
        assert res.value >= -1e-9
        assert res.value <= res.details["node_sup_bound"] + 1e-9
        at_witness = gap_oracle(name, mats, rule.weights, res.witness[None])[0]
        assert at_witness == pytest.approx(res.value, abs=1e-10)
        x = sphere_samples(a.shape[0], 2000, seed)
        assert res.value >= gap_oracle(name, mats, rule.weights, x).max() - 1e-10


def test_more_restarts_never_lower_the_value():
    g = gen(9)
    for _ in range(5):
        from hhlab.harness import random_symmetric
        a = random_symmetric(4, (0.5, 2.5), g)
        b = random_symmetric(4, (0.5, 2.5), g)
        values = [xi_refinement("exp", a, b, restarts=r, seed=3).value for r in (1, 4, 16, 32)]
        assert values == sorted(values)
        dvals = [delta_refinement("cube", a, b, restarts=r, seed=3).value for r in (0, 4, 16)]
        assert dvals == sorted(dvals)
