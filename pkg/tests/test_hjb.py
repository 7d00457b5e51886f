import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from artifact.hjb import (CFLError, FixedPointError, InnerSolver, SchemeConfig, ValueSurface,
                          argmax_index, base_coefficients, boundary_z0, boundary_z1,
                          default_horizon, fixed_point, from_compact, h0, hamiltonian_max,
                          scheme_for, to_compact)
from artifact.model import hjb_constants, merton_single_asset, solve_K0
from artifact.policy import optimal_allocation

from conftest import BASE, solved


@settings(max_examples=200)
@given(st.floats(0, 1))
def test_compact_round_trip(z):
    assert abs(from_compact(to_compact(z)) - z) <= 1e-14
    assert abs(to_compact(from_compact(z if z < 1 else 0.5)) - (z if z < 1 else 0.5)) <= 1e-14


@settings(max_examples=200)
@given(st.floats(0, 1e6))
def test_compact_round_trip_conditioning(z):
    # dz/dzhat = (1+z)^2, so a rounding of zhat is amplified by that factor
    assert abs(from_compact(to_compact(z)) - z) <= 4e-16 * (1 + z) ** 2


def test_compact_examples():
    assert to_compact(1.0) == 0.5 and to_compact(0.0) == 0.0
    assert from_compact(1.0) == math.inf


# --- Hamiltonian -----------------------------------------------------------

def test_hamiltonian_unit_gradient():
    c = hjb_constants(BASE.replace(b_L=0.0))  # K1 = 0
    val, cs, th = hamiltonian_max(1.0, -1.0, c)
    assert cs == pytest.approx(1.0) and th == 0.0 and val == pytest.approx(1.0)


def grid_oracle(g, h, K1, K2, p):
    """Brute-force sup over (c, theta) with two rounds of local refinement."""
    def f(C, T):
        return C ** p / p - C * g + T * K1 * g + 0.5 * T * T * K2 * K2 * h

    c_lo, c_hi, t_lo, t_hi = 0.0, 1.0, -1.0, 1.0
    while True:  # widen until the coarse argmax is interior
        cc = np.linspace(c_lo, c_hi, 401)
        tt = np.linspace(t_lo, t_hi, 401)
        C, T = np.meshgrid(cc, tt, indexing="ij")
        i, j = np.unravel_index(np.argmax(f(C, T)), C.shape)
        if i < 400 and 0 < j < 400:
            break
        c_hi *= 2 if i == 400 else 1
        t_lo, t_hi = (2 * t_lo, 2 * t_hi) if j in (0, 400) else (t_lo, t_hi)
    steps: list[float] = []
    for _ in range(4):
        cc = np.linspace(c_lo, c_hi, 801)
        tt = np.linspace(t_lo, t_hi, 801)
        C, T = np.meshgrid(cc, tt, indexing="ij")
        v = f(C, T)
        i, j = np.unravel_index(np.argmax(v), v.shape)
        dc, dtt = cc[1] - cc[0], tt[1] - tt[0]
        if not steps:
            steps = [dc, dtt]
        c_lo, c_hi = max(cc[i] - 2 * dc, 0.0), cc[i] + 2 * dc
        t_lo, t_hi = tt[j] - 2 * dtt, tt[j] + 2 * dtt
    # maximizers are compared at the first fine grid step; later rounds only sharpen the value
    return float(v[i, j]), cc[i], tt[j], steps[0], steps[1]


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(-3.0, -0.2), st.sampled_from([0.0, 0.5, -0.5]),
       st.sampled_from([0.0, 1.0]))
def test_hamiltonian_matches_grid(g, h, rho, gamma):
    c = hjb_constants(BASE.replace(rho=rho, gamma=gamma))
    val, cs, th = hamiltonian_max(g, h, c)
    oval, oc, oth, dc, dth = grid_oracle(g, h, c.K1, c.K2, c.p)
    assert val == pytest.approx(oval, abs=1e-6)
    assert abs(cs - oc) <= dc and abs(th - oth) <= dth


def test_hamiltonian_box_and_clamp():
    c = hjb_constants(BASE)
    val, cs, th = hamiltonian_max(0.1, -0.01, c, bounds=(2.0, 0.5))
    assert cs == 2.0 and th == 0.5
    val, cs, th = hamiltonian_max(-1.0, 1.0, c, clamp=(1e-2, 1e-2), bounds=(1e9, 1e9))
    assert cs == pytest.approx(1e-2 ** -2) and th > 0


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 20.0), st.floats(0.05, 3.0), st.floats(-3.0, -0.05))
def test_hamiltonian_homogeneity(z, g, h):
    """H(Phi_z, Phi_zz) in ratio units equals (1+z)^p H(g, h) in unit-wealth units."""
    c = hjb_constants(BASE.replace(rho=0.3))
    p = c.p
    phi_z, phi_zz = g * (1 + z) ** (p - 1), h * (1 + z) ** (p - 2)
    # ratio-unit controls scale with total wealth 1+z
    zval, _, _, _, _ = grid_oracle(phi_z, phi_zz, c.K1, c.K2, p)
    val, _, _ = hamiltonian_max(g, h, c)
    assert zval == pytest.approx((1 + z) ** p * val, rel=1e-5, abs=1e-6)


# --- boundaries ------------------------------------------------------------

def test_boundary_z0_example():
    # K_lam = 1.2 with m = 0: no observation and a deterministic hidden factor
    c = hjb_constants(BASE.replace(gamma=0.0, b_I=0.0, lam=1.0))
    c = type(c)(**{**c.__dict__, "b_J": 0.0, "sigma_J": 0.0})
    assert c.m_J == 0.0 and c.K_lambda == pytest.approx(1.2)
    v = boundary_z0(0.0, 1.0, 5.0, c)
    assert v == pytest.approx((1 - math.exp(-6)) / 1.2, abs=1e-12)
    assert v == pytest.approx(0.83127, abs=1e-5)
    q, _ = quad(lambda s: math.exp(-1.2 * s), 0, 5)
    assert v == pytest.approx(q, rel=1e-10)


def test_boundary_z0_general_quadrature():
    c = hjb_constants(BASE.replace(lam=3.0))
    t, T = 0.7, 4.0
    q, _ = quad(lambda s: math.exp(-c.K_lambda * (s - t)) * math.exp(c.m_J * s), t, T)
    assert boundary_z0(t, 1.3, T, c) == pytest.approx(1.3 * 3.0 * q, rel=1e-10)
    assert boundary_z0(T, 1.3, T, c) == 0.0
    assert np.all(boundary_z0(np.linspace(0, T, 5), 0.0, T, c) == 0.0)


def test_boundary_z1_terminal_and_stationary():
    c = hjb_constants(BASE.replace(lam=5.0))
    t = np.linspace(0, 40, 9)
    g = boundary_z1(1.70, 40.0, c, t)
    assert g[-1] == 0.0
    assert g[0] == pytest.approx(solve_K0(c.params, 1.70), abs=1e-3)
    g0 = boundary_z1(0.0, 40.0, c, t)
    assert g0[0] == pytest.approx(solve_K0(c.params, 0.0), abs=1e-4)


def test_boundary_z1_liquid_only_merton():
    prm = BASE.replace(lam=0.0)
    c = hjb_constants(prm)
    g = boundary_z1(0.0, 200.0, c, np.array([0.0, 200.0]))
    merton_liquid = merton_single_asset(prm.b_L, prm.sigma_L, prm.beta, prm.p)
    assert c.p * g[0] == pytest.approx(merton_liquid, abs=1e-3)


# --- transformed coefficients -----------------------------------------------

def _z_operator(Phi, z, c, h=1e-4):
    d1 = (Phi(z + h) - Phi(z - h)) / (2 * h)
    d2 = (Phi(z + h) - 2 * Phi(z) + Phi(z - h)) / h ** 2
    lin = -c.K_lambda * Phi(z) + c.K3 * z * d1 + 0.5 * c.K4 ** 2 * z * z * d2
    return lin, d1, d2


@pytest.mark.parametrize("rho,gamma", [(0.0, 1.0), (0.5, 0.7), (-0.5, 0.3)])
def test_u_form_matches_z_form(rho, gamma):
    """Manufactured solution: both forms of the linear part and of (g, h) agree."""
    c = hjb_constants(BASE.replace(rho=rho, gamma=gamma, lam=2.0))
    p = c.p
    a, b = 0.7, -0.4
    pt = lambda u: 1 + a * u * u + b * u ** 3
    pt_u = lambda u: 2 * a * u + 3 * b * u * u
    pt_uu = lambda u: 2 * a + 6 * b * u
    Phi = lambda z: (1 + z) ** p * pt(z / (1 + z))
    for z in (0.1, 0.8, 2.5):
        u = z / (1 + z)
        lin, d1, d2 = _z_operator(Phi, z, c)
        c0, c1, c2 = base_coefficients(np.array([u]), c)
        rhs = c0[0] * pt(u) + c1[0] * pt_u(u) + c2[0] * pt_uu(u)
        assert lin / (1 + z) ** p == pytest.approx(rhs, rel=1e-6, abs=1e-7)
        g = p * pt(u) + (1 - u) * pt_u(u)
        hh = -p * (1 - p) * pt(u) - 2 * (1 - p) * (1 - u) * pt_u(u) + (1 - u) ** 2 * pt_uu(u)
        assert d1 * (1 + z) ** (1 - p) == pytest.approx(g, rel=1e-6)
        assert d2 * (1 + z) ** (2 - p) == pytest.approx(hh, rel=1e-5, abs=1e-7)


def test_no_observation_is_first_order():
    c0, c1, c2 = base_coefficients(np.linspace(0, 1, 11), hjb_constants(BASE))
    assert np.all(c1 == 0) and np.all(c2 == 0)
    assert np.allclose(c0, -hjb_constants(BASE).K_lambda)


# --- scheme ----------------------------------------------------------------

def test_default_horizon():
    assert [default_horizon(BASE.replace(lam=l)) for l in (1, 5, 10, 50)] == [10, 3, 2, 1]


def test_cfl_rejected():
    with pytest.raises(CFLError):
        InnerSolver(hjb_constants(BASE.replace(gamma=1.0)), SchemeConfig(dt=0.05, dz=0.04))


def test_scheme_config_validation():
    with pytest.raises(ValueError):
        SchemeConfig(dz=0.03)
    with pytest.raises(ValueError):
        SchemeConfig(mode="implicit")


@pytest.mark.parametrize("gamma,rho", [(0.0, 0.0), (1.0, 0.5), (0.5, -0.5)])
def test_comparison_principle(gamma, rho):
    c = hjb_constants(BASE.replace(gamma=gamma, rho=rho, lam=3.0))
    solver = InnerSolver(c, scheme_for(c.params, "fast"))
    lo, hi = solver.surface(1.0), solver.surface(1.3)
    assert np.all(hi.phi_tilde >= lo.phi_tilde)


def test_history_nondecreasing_and_normalization():
    res = solved(BASE.replace(lam=5.0, gamma=1.0), "fast")
    hist = np.array(res.outer_history)
    assert res.converged and np.all(np.diff(hist) >= 0)
    assert res.value == pytest.approx(0.5 * res.Phi0)
    assert h0(res.surface) == pytest.approx(res.Phi0, abs=1e-5)


def test_plain_iteration_agrees_with_secant():
    prm = BASE.replace(lam=1.0)
    a = fixed_point(scheme_for(prm, "fast"), hjb_constants(prm))
    b = fixed_point(scheme_for(prm, "fast", acceleration="none"), hjb_constants(prm))
    assert np.all(np.diff(b.outer_history) >= 0)
    assert len(b.outer_history) > len(a.outer_history)
    assert a.Phi0 == pytest.approx(b.Phi0, abs=1e-4)


def test_no_trading_converges_immediately():
    res = fixed_point(scheme_for(BASE.replace(lam=0.0), "fast", T=10.0),
                      hjb_constants(BASE.replace(lam=0.0)))
    assert len(res.outer_history) <= 2


def test_fixed_point_failure_carries_history():
    with pytest.raises(FixedPointError) as err:
        fixed_point(scheme_for(BASE, "fast", max_outer_iters=2, acceleration="none"),
                    hjb_constants(BASE))
    assert len(err.value.history) == 2


def test_pointwise_mode_close_to_linearized():
    prm = BASE.replace(lam=5.0)
    a = solved(prm, "fast")
    b = solved(prm, "fast", mode="pointwise")
    assert abs(a.value - b.value) < 0.01


def test_h0_and_argmax():
    cfg = SchemeConfig(T=1.0, dt=0.01, dz=0.25)
    u = cfg.z_grid()
    c = hjb_constants(BASE)
    s = ValueSurface(np.array([0.0]), u, np.full((1, u.size), 2.5), 2.5, c, cfg)
    assert h0(s) == 2.5
    assert argmax_index(s) == u.size - 1
    res = solved(BASE.replace(lam=5.0), "fast")
    assert optimal_allocation(res.surface)[1] == res.z_hat_star


@pytest.mark.parametrize("gamma,rho,lam", [(0.0, 0.0, 5.0), (1.0, 0.0, 1.0), (1.0, -0.5, 10.0),
                                           (0.0, 0.5, 50.0)])
def test_solution_monotone_concave(gamma, rho, lam):
    res = solved(BASE.replace(gamma=gamma, rho=rho, lam=lam), "fast")
    s = res.surface
    finite = s.u < 1.0
    z = from_compact(s.u[finite])
    for i in range(0, s.t.size, max(1, s.t.size // 10)):
        Phi = s.Phi(i)
        assert np.all(np.diff(Phi) >= -1e-6)
        slope = np.diff(Phi) / np.diff(z)
        assert np.all(np.diff(slope) <= 1e-6)


def test_refinement_first_order():
    prm = BASE.replace(lam=5.0)
    vals = [solved(prm, "fast", dz=dz, dt=dt).Phi0
            for dz, dt in ((0.1, 1e-2), (0.05, 2.5e-3), (0.025, 6.25e-4))]
    d1, d2 = vals[1] - vals[0], vals[2] - vals[1]
    assert 1.4 < d1 / d2 < 3.0
