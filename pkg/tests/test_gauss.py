import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artifact.gauss import (KernelTable, QuantizerError, build_grid, build_kernel, f_gamma,
                            g_operator, lognormal_moment)
from artifact.model import ModelParams, hjb_constants


def test_two_point_rule():
    g = build_grid(2)
    assert np.allclose(np.sort(g.nodes), [-1, 1])
    assert np.allclose(g.weights, [0.5, 0.5])


@pytest.mark.parametrize("method,n", [("gauss-hermite", 7), ("gauss-hermite", 64),
                                      ("quantizer", 50)])
def test_weights_and_symmetry(method, n):
    g = build_grid(n, method)
    assert g.weights.sum() == pytest.approx(1.0, abs=1e-14)
    assert abs(np.dot(g.weights, g.nodes)) < 1e-12


def test_fourth_moment():
    assert build_grid(101).expect(lambda x: x ** 4) == pytest.approx(3.0, abs=1e-6)


def test_quantizer_is_stationary():
    g = build_grid(20, "quantizer", tol=1e-12)
    b = np.concatenate([[-np.inf], 0.5 * (g.nodes[1:] + g.nodes[:-1]), [np.inf]])
    from scipy.stats import norm
    cond_mean = (norm.pdf(b[:-1]) - norm.pdf(b[1:])) / np.diff(norm.cdf(b))
    assert np.allclose(cond_mean, g.nodes, atol=1e-10)


def test_quantizer_reports_failure():
    with pytest.raises(QuantizerError, match="not converged"):
        build_grid(200, "quantizer", tol=1e-14, max_iter=3)


def test_lognormal_moment_examples():
    assert lognormal_moment(0.2, 1.0, 0.0, 0.5) == 1.0
    assert lognormal_moment(0.3, 0.0, 2.0, 0.5) == pytest.approx(math.exp(0.3))
    exact = lognormal_moment(0.2, 1.0, 1.0, 0.5)
    assert exact == pytest.approx(math.exp(-0.025))
    rng = np.random.default_rng(1)
    J = np.exp((0.2 - 0.5) + rng.standard_normal(10_000_000))
    assert np.mean(np.sqrt(J)) == pytest.approx(exact, abs=1e-3)


@pytest.fixture(scope="module")
def consts():
    return hjb_constants(ModelParams(gamma=0.0))


def test_kernel_at_zero_matches_moment_quantizer(consts):
    g = build_grid(5000, "quantizer")
    for t in (0.25, 1.0, 3.0):
        exact = lognormal_moment(consts.b_J, consts.sigma_J, t, consts.p)
        assert abs(f_gamma(t, 0.0, consts, g) - exact) < 1e-6


def test_kernel_at_zero_matches_moment_hermite(consts):
    g = build_grid(64)
    for t in (0.25, 1.0, 3.0):
        exact = lognormal_moment(consts.b_J, consts.sigma_J, t, consts.p)
        assert abs(f_gamma(t, 0.0, consts, g) - exact) < 1e-6


def test_kernel_trivial_cases(consts):
    g = build_grid(32)
    z = np.array([0.0, 0.5, 3.0])
    assert np.allclose(f_gamma(0.0, z, consts, g), (1 + z) ** 0.5)
    full = hjb_constants(ModelParams(gamma=1.0))
    assert np.allclose(f_gamma(2.0, z, full, g), (1 + z) ** 0.5)


def test_operator_identity_and_homogeneity(consts):
    g = build_grid(64)
    t, x, y = 1.5, 0.7, 1.3
    assert g_operator(lambda r: r, t, x, y, consts, g) == pytest.approx(
        x + y * math.exp(consts.b_J * t), rel=1e-10)
    psi = lambda r: np.sqrt(r)
    for xi in (0.3, 2.0, 17.0):
        assert g_operator(psi, t, xi * x, xi * y, consts, g) == pytest.approx(
            xi ** 0.5 * g_operator(psi, t, x, y, consts, g), rel=1e-12)


BENCH = hjb_constants(ModelParams())
GRID32 = build_grid(32)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 3), st.floats(0.0, 5), st.floats(0.01, 5), st.floats(0.0, 5),
       st.floats(0.01, 5))
def test_operator_monotone_concave(t, x1, y1, x2, y2):
    consts, g = BENCH, GRID32
    G = lambda x, y: g_operator(np.sqrt, t, x, y, consts, g)
    base = G(x1, y1)
    assert G(x1 + 0.1, y1) >= base and G(x1, y1 + 0.1) >= base
    mid = G(0.5 * (x1 + x2), 0.5 * (y1 + y2))
    assert mid >= 0.5 * (base + G(x2, y2)) - 1e-12


def test_kernel_table_matches_pointwise(consts):
    g = build_grid(48)
    t = np.array([0.0, 0.5, 2.0])
    u = np.linspace(0, 1, 11)
    tab = build_kernel(consts, g, t, u)
    assert isinstance(tab, KernelTable)
    z = u[:-1] / (1 - u[:-1])
    for i, ti in enumerate(t):
        assert np.allclose(tab.f()[i], f_gamma(ti, z, consts, g), rtol=1e-12)
    assert np.allclose(tab.values[:, -1], 1.0)
