"""Feedback maps, optimal allocation and cost of illiquidity from a solved surface.

Two shares are used below. ``u = x/(x+y)`` is the liquid share, the solver's
space variable. ``w = 1 - u = y/(x+y)`` is the illiquid share, the variable of
the published consumption and investment curves.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .hjb import (ValueSurface, _ham_array, argmax_index, control_bounds, from_compact)
from .model import ModelParams, merton_value


class TieWarning(UserWarning):
    """The maximizer of phi_tilde(0, .) is not unique on the grid."""


def _du(surface: ValueSurface) -> float:
    return float(surface.u[1] - surface.u[0])


def normalized_derivatives(surface: ValueSurface) -> tuple[np.ndarray, np.ndarray]:
    """z-derivatives of Phi rescaled to unit total wealth, on the full grid.

    ``g = Phi_z (1+z)^(1-p)`` and ``h = Phi_zz (1+z)^(2-p)``, computed from
    phi_tilde with centred differences inside and one-sided ones at the ends.
    """
    p = surface.consts.p
    phi = surface.phi_tilde
    om = 1.0 - surface.u
    du = _du(surface)
    d1 = np.gradient(phi, du, axis=1, edge_order=2)
    d2 = np.empty_like(phi)
    d2[:, 1:-1] = (phi[:, 2:] - 2 * phi[:, 1:-1] + phi[:, :-2]) / du ** 2
    d2[:, 0] = d2[:, 1]
    d2[:, -1] = d2[:, -2]
    g = p * phi + om * d1
    h = -p * (1 - p) * phi - 2 * (1 - p) * om * d1 + om ** 2 * d2
    return g, h


def derivatives(surface: ValueSurface) -> tuple[np.ndarray, np.ndarray]:
    """Phi_z and Phi_zz on the finite nodes (u < 1) of every time slice."""
    p = surface.consts.p
    g, h = normalized_derivatives(surface)
    finite = surface.u < 1.0
    one_plus_z = 1.0 / (1.0 - surface.u[finite])
    return g[:, finite] * one_plus_z ** (p - 1), h[:, finite] * one_plus_z ** (p - 2)


@dataclass(frozen=True)
class PolicyField:
    """Feedback maps per unit of total wealth on the solver grid.

    Attributes
    ----------
    t : (nt,) array
        Time since the last trade.
    w : (nu,) array
        Illiquid share y/(x+y) of each column (decreasing, since ``w = 1 - u``).
    C_hat, Pi_hat : (nt, nu) arrays
        Consumption rate and liquid risky investment per unit total wealth.
    z_star : float
        Optimal post-trade ratio x/y (``inf`` means no illiquid holding).
    z_hat_star : float
        Optimal post-trade illiquid share.
    """

    t: np.ndarray
    w: np.ndarray
    C_hat: np.ndarray
    Pi_hat: np.ndarray
    z_star: float
    z_hat_star: float

    def _interp(self, grid: np.ndarray, t: float, w: float) -> float:
        t = min(max(float(t), self.t[0]), self.t[-1])
        wa = self.w[::-1]
        if t == self.t[-1] or self.t.size == 1:
            return float(np.interp(w, wa, grid[-1, ::-1]))
        i = min(int(np.searchsorted(self.t, t, side="right")) - 1, self.t.size - 2)
        a = (t - self.t[i]) / (self.t[i + 1] - self.t[i])
        lo = np.interp(w, wa, grid[i, ::-1])
        hi = np.interp(w, wa, grid[i + 1, ::-1])
        return float((1 - a) * lo + a * hi)

    def consumption(self, t: float, w: float) -> float:
        """Interpolated consumption rate per unit wealth; time capped at T."""
        return self._interp(self.C_hat, t, w)

    def liquid(self, t: float, w: float) -> float:
        """Interpolated liquid risky investment per unit wealth."""
        return self._interp(self.Pi_hat, t, w)

    def to_csv(self, path, header: str = "") -> None:
        tt, ww = np.meshgrid(self.t, self.w, indexing="ij")
        data = np.column_stack([tt.ravel(), ww.ravel(), self.C_hat.ravel(),
                                self.Pi_hat.ravel()])
        np.savetxt(path, data, delimiter=",", comments="# ", fmt="%.10g",
                   header=(header + "\n" if header else "") + "t,zhat,C_hat,Pi_hat")


def _controls(surface: ValueSurface):
    """Per-wealth consumption and liquid investment with the solver's clamps and box."""
    c = surface.consts
    cfg = surface.cfg
    g, h = normalized_derivatives(surface)
    c_max, th_max = control_bounds(surface.u, c, cfg.dt, cfg.dz, cfg.control_budget)
    # the end nodes are Dirichlet rows in the solver; they get the neighbour's box
    c_max[0], th_max[0] = c_max[1], th_max[1]
    c_max[-1], th_max[-1] = np.inf, np.inf
    m, d = cfg.derivative_clamp
    nt, nu = g.shape
    _, cs, th = _ham_array(g.ravel(), h.ravel(), c.K1, c.K2 ** 2, c.p, m, d,
                           np.tile(c_max, nt), np.tile(th_max, nt), c.params.no_liquid)
    return cs.reshape(nt, nu), th.reshape(nt, nu)


def optimal_allocation(surface: ValueSurface) -> tuple[float, float]:
    """(z*, zhat*): optimal post-trade ratio x/y and illiquid share.

    Read off the maximizer of phi_tilde(0, .). Flat tops are resolved toward
    the smaller illiquid share and reported with a :class:`TieWarning`.
    """
    row = surface.phi_tilde[0]
    if np.count_nonzero(row == row.max()) > 1:
        warnings.warn("flat maximum of the normalized value; taking the smallest "
                      "illiquid share", TieWarning, stacklevel=2)
    u_star = float(surface.u[argmax_index(surface)])
    return float(from_compact(u_star)), 1.0 - u_star


def policy_field(surface: ValueSurface) -> PolicyField:
    """Feedback maps on the whole grid of a solved surface."""
    c = surface.consts
    params = c.params
    cs, th = _controls(surface)
    u = surface.u
    if params.no_liquid:
        pi = np.zeros_like(th)
    else:
        pi = th + params.rho * params.sigma_I / params.sigma_L * (1.0 - u)
    # no liquid wealth: nothing to consume or invest
    cs[:, 0] = 0.0
    pi[:, 0] = 0.0
    z_star, z_hat_star = optimal_allocation(surface)
    return PolicyField(surface.t, 1.0 - u, cs, pi, z_star, z_hat_star)


def consumption_feedback(t: float, illiquid_share: float, surface: ValueSurface | PolicyField) -> float:
    """Optimal consumption per unit total wealth, C_hat*(t, zhat)."""
    pf = surface if isinstance(surface, PolicyField) else policy_field(surface)
    if illiquid_share >= 1.0:
        return 0.0
    return pf.consumption(t, illiquid_share)


def liquid_feedback(t: float, illiquid_share: float, surface: ValueSurface | PolicyField) -> float:
    """Optimal liquid risky investment per unit total wealth, Pi_hat*(t, zhat)."""
    pf = surface if isinstance(surface, PolicyField) else policy_field(surface)
    if illiquid_share >= 1.0:
        return 0.0
    return pf.liquid(t, illiquid_share)


def cost_of_illiquidity(value: float, params: ModelParams) -> float:
    """Extra initial wealth e(1) that makes the illiquid market as good as Merton.

    ``value`` is V(1) in the U(c) = c^p scale (``SolveResult.value``). From
    V(r) = value r^p, solving V(1 + e) = V_M(1) gives (V_M/value)^(1/p) - 1
    with V_M the unconstrained Merton value.
    """
    if value <= 0:
        raise ValueError("value must be positive")
    return (merton_value(params, constrained=False) / value) ** (1.0 / params.p) - 1.0


def observed_illiquid(B1: float, t: float, params: ModelParams, Y0: float,
                      W1: float = 0.0) -> float:
    """Observed illiquid proxy after time t given the observed noise B1.

    Y_t = Y0 exp((b_Y - s_I^2 (rho^2 + (1-rho^2) gamma^2)/2) t
    + s_I sqrt(1-rho^2) gamma B1 + s_I rho W1). ``W1`` is the liquid driver,
    zero by default.
    """
    from .model import split_constants
    b_Y = split_constants(params)[0]
    r2, g = params.rho ** 2, params.gamma
    s = params.sigma_I
    expo = ((b_Y - 0.5 * s * s * (r2 + (1 - r2) * g * g)) * t
            + s * math.sqrt(1 - r2) * g * B1 + s * params.rho * W1)
    return Y0 * math.exp(expo)


def observation_response(B1: float, t: float, params: ModelParams,
                         surface: ValueSurface | PolicyField, Y0: float, X_t: float,
                         W1: float = 0.0) -> tuple[float, float]:
    """Consumption and liquid investment at time t after a trade, as functions of B1.

    Returns absolute amounts C*(t, X_t, Y_t) and Pi*(t, X_t, Y_t), obtained by
    homogeneity from the per-wealth maps.
    """
    pf = surface if isinstance(surface, PolicyField) else policy_field(surface)
    Y = observed_illiquid(B1, t, params, Y0, W1)
    R = X_t + Y
    if R <= 0 or X_t <= 0:
        return 0.0, 0.0
    w = Y / R
    return R * pf.consumption(t, w), R * pf.liquid(t, w)
