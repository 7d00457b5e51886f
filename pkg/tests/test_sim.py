import dataclasses
import math

import numpy as np
import pytest

from artifact.hjb import from_compact
from artifact.model import hjb_constants
from artifact.policy import policy_field
from artifact.sim import SimConfig, simulate, simulate_ratio

from conftest import BASE, solved


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(dt_euler=0.02)
    with pytest.raises(ValueError):
        SimConfig(n_paths=0)
    with pytest.raises(ValueError):
        SimConfig(seed=-1)
    assert SimConfig(horizon=1.0, dt_euler=1e-2).n_steps == 100


def test_seed_reproducible(fast_lam5):
    prm = BASE.replace(lam=5.0)
    cfg = SimConfig(horizon=2.0, n_paths=200, seed=11)
    a = simulate(prm, None, fast_lam5.surface, cfg)
    b = simulate(prm, None, fast_lam5.surface, cfg)
    for f in ("utility", "tail", "n_trades", "absorbed", "samples"):
        assert np.array_equal(getattr(a, f), getattr(b, f))
    assert a.summary() == b.summary()
    c = simulate(prm, None, fast_lam5.surface, dataclasses.replace(cfg, seed=12))
    assert not np.array_equal(a.utility, c.utility)


def test_paths_independent_of_batch(fast_lam5):
    prm = BASE.replace(lam=5.0)
    a = simulate(prm, None, fast_lam5.surface, SimConfig(horizon=1.0, n_paths=30, chunk=7))
    b = simulate(prm, None, fast_lam5.surface, SimConfig(horizon=1.0, n_paths=10))
    assert np.array_equal(a.utility[:10], b.utility)


def test_mean_utility_close_to_value(fast_lam5):
    prm = BASE.replace(lam=5.0)
    res = simulate(prm, None, fast_lam5.surface, SimConfig(horizon=16.0, n_paths=3000, seed=3))
    assert res.ratio_checks > 0 and res.ratio_violations == 0
    assert not res.absorbed.any()
    assert res.mean_total <= fast_lam5.Phi0 + 3 * res.stderr_total
    assert abs(res.mean_total - fast_lam5.Phi0) <= 3 * res.stderr_total


def test_trades_restore_the_optimal_ratio(fast_lam5):
    prm = BASE.replace(lam=5.0)
    res = simulate(prm, None, fast_lam5.surface, SimConfig(horizon=3.0, n_paths=20, n_record=20))
    assert len(res.trades) > 0
    z_star = from_compact(1.0 - fast_lam5.z_hat_star)
    for tr in res.trades:
        assert tr["X_post"] / tr["Y_post"] == pytest.approx(z_star, rel=1e-9)


@pytest.fixture(scope="module")
def observed():
    prm = BASE.replace(lam=5.0, gamma=1.0)
    return prm, solved(prm, "fast")


def test_ratio_tracks_wealth_pair(observed):
    """Z from its own SDE and X/Y from the wealth SDEs converge together as dt shrinks."""
    prm, res = observed
    gaps = []
    for dt in (1e-2, 2.5e-3):
        Z, X, Y = simulate_ratio(prm, res.surface, SimConfig(horizon=1.0, dt_euler=dt,
                                                             n_paths=200, seed=5),
                                 return_xy=True)
        alive = (X > 0).all(axis=1) & (Z > 0).all(axis=1)
        gaps.append(np.max(np.abs(Z[alive] - X[alive] / Y[alive])))
    assert gaps[1] < gaps[0] / 2


def test_zero_ratio_stays_zero(observed):
    prm, res = observed
    Z = simulate_ratio(prm, res.surface, SimConfig(horizon=1.0, n_paths=20), z0=0.0)
    assert np.all(Z == 0.0)


def test_geometric_ratio_without_controls(observed):
    prm, res = observed
    pf = policy_field(res.surface)
    hedge = prm.rho * prm.sigma_I / prm.sigma_L
    zero = dataclasses.replace(pf, C_hat=np.zeros_like(pf.C_hat),
                               Pi_hat=np.broadcast_to(hedge * (1 - pf.w), pf.Pi_hat.shape).copy())
    Z = simulate_ratio(prm, zero, SimConfig(horizon=1.0, n_paths=20000, seed=9), z0=1.0)
    c = hjb_constants(prm)
    end = Z[:, -1]
    se = end.std(ddof=1) / math.sqrt(end.size)
    assert abs(end.mean() - math.exp(c.Khat3 * 1.0)) < 4 * se


def test_liquid_only_closed_loop_matches_scalar_value():
    from artifact.model import solve_K0
    prm = BASE.replace(lam=0.0, b_I=0.0)
    res = solved(prm, "fast")
    assert res.z_hat_star == 0.0
    assert res.Phi0 == pytest.approx(solve_K0(prm, 0.0), abs=1e-4)
    sim = simulate(prm, None, res.surface, SimConfig(horizon=20.0, n_paths=4000, seed=1))
    assert sim.n_trades.sum() == 0
    assert abs(sim.mean_total - res.Phi0) <= 2 * sim.stderr_total
