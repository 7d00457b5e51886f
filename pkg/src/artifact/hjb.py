"""Explicit monotone finite-difference solver for the reduced HJB equation.

Unknown
    ``phi_tilde(t, u) = Phi(t, z) / (1 + z)^p`` with ``u = z / (1 + z)`` the
    liquid share x/(x+y). Both the domain and the unknown are bounded.

Equation (u-form, solver normalization U(c) = c^p / p)
    With ``g = p*phi + (1-u)*phi_u`` and
    ``h = -p(1-p)*phi - 2(1-p)(1-u)*phi_u + (1-u)^2*phi_uu`` (the first and
    second z-derivatives of Phi rescaled to unit total wealth),

    -phi_t = c0(u) phi + c1(u) phi_u + c2(u) phi_uu + lam Phi0 f(t, u) + H(g, h)

    where c0 = -K_lam + K3 p u - K4^2 p(1-p) u^2 / 2,
    c1 = K3 u (1-u) - K4^2 (1-p) u^2 (1-u), c2 = K4^2 u^2 (1-u)^2 / 2 and
    H(g, h) = sup_{c >= 0, theta} c^p/p - c g + theta K1 g + theta^2 K2^2 h / 2.
    In H the controls are consumption and liquid investment per unit of total
    wealth.

Scheme
    Forward Euler backward in time. Each step the Hamiltonian's controls are
    evaluated from centred differences, clipped to a box that keeps the
    step monotone, and either folded into the stencil (``"linearized"``,
    default, upwinded) or added pointwise as a source (``"pointwise"``).

Boundaries
    u = 0 (no liquid wealth) has a closed form; u = 1 (no illiquid wealth)
    follows a scalar backward ODE whose stationary point solves the K0
    equation.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Literal

import numba
import numpy as np
from scipy.integrate import solve_ivp

from .gauss import GaussGrid, KernelTable, build_grid, build_kernel
from .model import DerivedConstants, ModelParams, hjb_constants

_MODES = {"linearized": 0, "pointwise": 1}


class CFLError(ValueError):
    """The time step is too large for a monotone explicit step."""


class NumericalError(RuntimeError):
    """Non-finite values appeared during a sweep."""


def to_compact(z):
    """z = x/y in [0, inf) to zhat = z/(1+z) in [0, 1)."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("z must be nonnegative")
    out = np.where(np.isinf(z), 1.0, z / (1.0 + np.where(np.isinf(z), 0.0, z)))
    return float(out) if out.ndim == 0 else out


def from_compact(zhat):
    """Inverse of :func:`to_compact`; ``zhat = 1`` maps to ``inf``."""
    zhat = np.asarray(zhat, dtype=float)
    if np.any((zhat < 0) | (zhat > 1)):
        raise ValueError("zhat must lie in [0, 1]")
    with np.errstate(divide="ignore"):
        out = np.where(zhat < 1.0, zhat / (1.0 - zhat), np.inf)
    return float(out) if out.ndim == 0 else out


@numba.njit(cache=True)
def _ham_point(g, h, K1, K2sq, p, m, d, c_max, th_max, no_liquid):
    gg = g if g > m else m
    hh = h if h < -d else -d
    c = gg ** (-1.0 / (1.0 - p))
    if c > c_max:
        c = c_max
    th = 0.0
    if not no_liquid:
        th = -K1 * gg / (K2sq * hh)
        if th > th_max:
            th = th_max
        elif th < -th_max:
            th = -th_max
    val = c ** p / p - c * gg + th * K1 * gg + 0.5 * th * th * K2sq * hh
    return val, c, th


@numba.njit(cache=True)
def _ham_array(g, h, K1, K2sq, p, m, d, c_max, th_max, no_liquid):
    n = g.size
    val = np.empty(n)
    c = np.empty(n)
    th = np.empty(n)
    for i in range(n):
        val[i], c[i], th[i] = _ham_point(g[i], h[i], K1, K2sq, p, m, d,
                                         c_max[i], th_max[i], no_liquid)
    return val, c, th


def hamiltonian_max(phi_z, phi_zz, consts: DerivedConstants,
                    clamp: tuple[float, float] = (1e-8, 1e-8),
                    bounds: tuple[float, float] | None = None):
    """Maximize the reduced Hamiltonian in closed form.

    Parameters
    ----------
    phi_z, phi_zz : float or array
        First and second derivative of the value in the wealth ratio.
    consts : DerivedConstants
    clamp : (m, d)
        ``phi_z`` is raised to at least ``m`` and ``phi_zz`` lowered to at
        most ``-d`` before use.
    bounds : (c_max, theta_max), optional
        Compact control box. Unbounded by default.

    Returns
    -------
    value, c_star, theta_star
        ``U~(g) + theta* K1 g + theta*^2 K2^2 h / 2`` with
        ``c* = g^(-1/(1-p))`` and ``theta* = -K1 g / (K2^2 h)``, after
        clipping to the box. ``theta* = 0`` without a liquid risky asset.
    """
    g = np.atleast_1d(np.asarray(phi_z, dtype=float)).ravel()
    h = np.broadcast_to(np.asarray(phi_zz, dtype=float), np.shape(phi_z)).ravel().copy()
    c_max, th_max = (np.inf, np.inf) if bounds is None else bounds
    c_max = np.broadcast_to(np.asarray(c_max, dtype=float), g.shape).copy()
    th_max = np.broadcast_to(np.asarray(th_max, dtype=float), g.shape).copy()
    val, c, th = _ham_array(g, h, consts.K1, consts.K2 ** 2, consts.p, clamp[0], clamp[1],
                            c_max, th_max, consts.params.no_liquid)
    if np.ndim(phi_z) == 0:
        return float(val[0]), float(c[0]), float(th[0])
    shape = np.shape(phi_z)
    return val.reshape(shape), c.reshape(shape), th.reshape(shape)


def boundary_z0(t, Phi0: float, T: float, consts: DerivedConstants):
    """Value with zero liquid wealth (u = 0).

    Without liquid wealth nothing can be consumed until the next trade, so
    Phi(t, 0) = Phi0 lam int_t^T exp(-K_lam (s - t)) E[J_s^p] ds, in closed
    form with E[J_s^p] = exp(m s).
    """
    t = np.asarray(t, dtype=float)
    m, K = consts.m_J, consts.K_lambda
    tau = T - t
    if abs(m - K) > 1e-14:
        val = np.exp(m * t) * np.expm1((m - K) * tau) / (m - K)
    else:
        val = np.exp(m * t) * tau
    val = Phi0 * consts.lam * val
    return float(val) if val.ndim == 0 else val


def boundary_z1(Phi0: float, T: float, consts: DerivedConstants, t: np.ndarray) -> np.ndarray:
    """Value with zero illiquid wealth (u = 1) on the time grid ``t``.

    Solves g' = a g - (1-p) p^(-1/(1-p)) g^(-p/(1-p)) - lam Phi0 backward from
    g(T) = 0, with a = beta + lam - p b_L^2/(2(1-p) s_L^2). The substitution
    q = g^(1/(1-p)) removes the singularity at g = 0:
    dq/dtau = p^(-1/(1-p)) + (lam Phi0 - a q^(1-p)) q^p / (1-p).
    """
    p = consts.p
    a = consts.a0
    src = consts.lam * Phi0
    lead = p ** (-1.0 / (1.0 - p))

    def rhs(_s, q):
        qq = max(q[0], 0.0)
        return [lead + (src - a * qq ** (1 - p)) * qq ** p / (1 - p)]

    tau = T - np.asarray(t, dtype=float)
    order = np.argsort(tau)
    sol = solve_ivp(rhs, (0.0, float(tau.max())), [0.0], t_eval=tau[order],
                    method="LSODA", rtol=1e-10, atol=1e-13)
    if not sol.success:
        raise NumericalError(f"boundary ODE failed: {sol.message}")
    out = np.empty_like(tau)
    out[order] = np.maximum(sol.y[0], 0.0) ** (1 - p)
    return out


@dataclass(frozen=True)
class SchemeConfig:
    """Grid and iteration settings.

    ``T`` is the truncation horizon of the infinite-horizon problem. The
    Hamiltonian ``mode`` and the outer ``acceleration`` are documented in the
    module docstring and in :func:`fixed_point`.
    """

    T: float = 5.0
    dt: float = 5e-4
    dz: float = 0.02
    fixed_point_tol: float = 1e-5
    max_outer_iters: int = 500
    derivative_clamp: tuple[float, float] = (1e-8, 1e-8)
    mode: Literal["linearized", "pointwise"] = "linearized"
    acceleration: Literal["secant", "none"] = "secant"
    grid_method: Literal["gauss-hermite", "quantizer"] = "gauss-hermite"
    grid_size: int = 64
    control_budget: float = 0.5

    def __post_init__(self) -> None:
        if self.T <= 0 or self.dt <= 0 or self.dz <= 0:
            raise ValueError("T, dt and dz must be positive")
        n = 1.0 / self.dz
        if abs(n - round(n)) > 1e-9:
            raise ValueError("dz must divide 1")
        k = self.T / self.dt
        if abs(k - round(k)) > 1e-6 * max(1.0, k):
            raise ValueError("dt must divide T")
        if self.mode not in _MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 0 < self.control_budget < 1:
            raise ValueError("control_budget must lie in (0, 1)")

    @property
    def N_time(self) -> int:
        return int(round(self.T / self.dt))

    @property
    def N_space(self) -> int:
        return int(round(1.0 / self.dz))

    def t_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.N_time + 1)

    def z_grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.N_space + 1)


PROFILES = {
    "paper": dict(dt=5e-4, dz=0.02),
    "fast": dict(dt=2e-3, dz=0.04),
}


def default_horizon(params: ModelParams, tol: float = 1e-4) -> float:
    """Truncation horizon for the infinite-horizon problem.

    The tail beyond T weighs about exp(-(beta + lam - k_p) T) and the outer
    fixed point amplifies it by (beta + lam - k_p)/(beta - k_p). The horizon
    makes this product at most ``tol``, rounded up to a whole number, and is
    at least 1.
    """
    from .model import compute_kp
    kp = compute_kp(params)
    rate = params.beta + params.lam - kp
    amp = rate / (params.beta - kp)
    T = math.log(amp / tol) / rate
    return float(max(1, math.ceil(T)))


def scheme_for(params: ModelParams, profile: str = "paper", **overrides) -> SchemeConfig:
    """SchemeConfig for a named profile with the horizon set by :func:`default_horizon`."""
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}; expected one of {sorted(PROFILES)}")
    kw = dict(PROFILES[profile])
    kw["T"] = default_horizon(params)
    kw.update(overrides)
    return SchemeConfig(**kw)


@dataclass(frozen=True)
class ValueSurface:
    """Normalized value phi_tilde(t_i, u_j) on the scheme grid.

    ``u`` is the liquid share x/(x+y); the illiquid share is ``1 - u``.
    Values are in the solver normalization U(c) = c^p/p.
    """

    t: np.ndarray
    u: np.ndarray
    phi_tilde: np.ndarray
    Phi0: float
    consts: DerivedConstants = field(repr=False)
    cfg: SchemeConfig = field(repr=False)

    def Phi(self, i: int = 0) -> np.ndarray:
        """Unnormalized Phi(t_i, z_j) on the finite nodes (u < 1)."""
        finite = self.u < 1.0
        return self.phi_tilde[i, finite] / (1.0 - self.u[finite]) ** self.consts.p

    def to_csv(self, path, header: str = "") -> None:
        tt, uu = np.meshgrid(self.t, self.u, indexing="ij")
        data = np.column_stack([tt.ravel(), uu.ravel(), self.phi_tilde.ravel()])
        np.savetxt(path, data, delimiter=",", header=(header + "\n" if header else "")
                   + "t,u,phi_tilde", comments="# ", fmt="%.10g")


def base_coefficients(u: np.ndarray, consts: DerivedConstants):
    """Control-free coefficients (c0, c1, c2) of the u-form equation."""
    p, K3, K4sq = consts.p, consts.K3, consts.K4 ** 2
    om = 1.0 - u
    c0 = -consts.K_lambda + K3 * p * u - 0.5 * K4sq * p * (1 - p) * u * u
    c1 = K3 * u * om - K4sq * (1 - p) * u * u * om
    c2 = 0.5 * K4sq * u * u * om * om
    return c0, c1, c2


def control_bounds(u: np.ndarray, consts: DerivedConstants, dt: float, du: float,
                   budget: float = 0.5):
    """Per-node control box keeping the explicit step monotone.

    The diagonal weight of a node is 1 + dt (c0 - |c1|/du - 2 c2/du^2). The
    control-free part leaves a slack; each control may use ``budget`` of it.
    Raises :class:`CFLError` if the control-free part alone is not monotone.
    """
    p, K1, K2sq = consts.p, consts.K1, consts.K2 ** 2
    c0, c1, c2 = base_coefficients(u, consts)
    base = dt * (np.abs(c1) / du + 2 * c2 / du ** 2 + np.maximum(-c0, 0.0))
    if np.any(base >= 1.0):
        j = int(np.argmax(base))
        raise CFLError(f"explicit step not monotone at u={u[j]:.4g}: "
                       f"dt*(|drift|/dz + 2 diffusion/dz^2 + decay) = {base[j]:.4g} >= 1")
    slack = budget * (1.0 - base)
    om = 1.0 - u
    c_max = slack / (dt * (om / du + p))
    A = K2sq * ((1 - p) * om / du + om * om / du ** 2 + 0.5 * p * (1 - p))
    B = abs(K1) * (om / du + p)
    th_max = (-B + np.sqrt(B * B + 4 * A * slack / dt)) / (2 * A)
    return c_max, th_max


@numba.njit(cache=True)
def _sweep(u, dt, nt, consts_vec, mode, no_liquid, m, d, c_max, th_max,
           src, b0, b1, store):
    K_lam, K1, K2sq, K3, K4sq, p = consts_vec
    nu = u.size
    du = u[1] - u[0]
    V = np.zeros(nu)
    W = np.zeros(nu)
    surf = np.zeros((nt + 1 if store else 1, nu))
    if store:
        surf[nt, :] = V
    for n in range(nt, 0, -1):
        # data at t_n, result at t_{n-1}
        V[0] = b0[n]
        V[nu - 1] = b1[n]
        for j in range(1, nu - 1):
            uj = u[j]
            om = 1.0 - uj
            v = V[j]
            dp_ = (V[j + 1] - v) / du
            dm_ = (v - V[j - 1]) / du
            d0 = 0.5 * (V[j + 1] - V[j - 1]) / du
            d2 = (V[j + 1] - 2.0 * v + V[j - 1]) / (du * du)
            c0 = -K_lam + K3 * p * uj - 0.5 * K4sq * p * (1 - p) * uj * uj
            c1 = K3 * uj * om - K4sq * (1 - p) * uj * uj * om
            c2 = 0.5 * K4sq * uj * uj * om * om
            g = p * v + om * d0
            h = -p * (1 - p) * v - 2 * (1 - p) * om * d0 + om * om * d2
            hv, c, th = _ham_point(g, h, K1, K2sq, p, m, d, c_max[j], th_max[j], no_liquid)
            extra = 0.0
            if mode == 0:
                c0 += -c * p + th * K1 * p - 0.5 * th * th * K2sq * p * (1 - p)
                c1 += -c * om + th * K1 * om - th * th * K2sq * (1 - p) * om
                c2 += 0.5 * th * th * K2sq * om * om
                extra = c ** p / p
            else:
                extra = hv
            up = c1 * dp_ if c1 > 0 else c1 * dm_
            W[j] = v + dt * (c0 * v + up + c2 * d2 + extra + src[n, j])
        for j in range(1, nu - 1):
            V[j] = W[j]
        V[0] = b0[n - 1]
        V[nu - 1] = b1[n - 1]
        if store:
            surf[n - 1, :] = V
    if not store:
        surf[0, :] = V
    return surf


@dataclass
class InnerSolver:
    """Precomputed pieces of the inner PDE solve for one parameter set.

    Everything that does not depend on the source Phi0 (kernel table,
    control box, constants) is built once and reused by every outer
    iteration.
    """

    consts: DerivedConstants
    cfg: SchemeConfig
    kernel: KernelTable | None = None
    grid: GaussGrid | None = None

    def __post_init__(self) -> None:
        cfg = self.cfg
        self.t = cfg.t_grid()
        self.u = cfg.z_grid()
        if self.kernel is None:
            grid = self.grid or build_grid(cfg.grid_size, cfg.grid_method)
            self.kernel = build_kernel(self.consts, grid, self.t, self.u)
        if self.kernel.values.shape != (self.t.size, self.u.size):
            raise ValueError("kernel table does not match the scheme grid")
        self.c_max, self.th_max = control_bounds(self.u, self.consts, cfg.dt, cfg.dz,
                                                 cfg.control_budget)
        c = self.consts
        self._cvec = (c.K_lambda, c.K1, c.K2 ** 2, c.K3, c.K4 ** 2, c.p)
        self.n_solves = 0

    def surface(self, Phi0: float, store: bool = True) -> ValueSurface:
        """Backward sweep from phi_tilde(T, .) = 0 with source Phi0."""
        cfg, c = self.cfg, self.consts
        b0 = boundary_z0(self.t, Phi0, cfg.T, c)
        b1 = boundary_z1(Phi0, cfg.T, c, self.t)
        src = (c.lam * Phi0) * self.kernel.values
        m, d = cfg.derivative_clamp
        surf = _sweep(self.u, cfg.dt, cfg.N_time, self._cvec, _MODES[cfg.mode],
                      c.params.no_liquid, m, d, self.c_max, self.th_max, src, b0, b1, store)
        self.n_solves += 1
        if not np.all(np.isfinite(surf)):
            bad = np.argwhere(~np.isfinite(surf))[0]
            i = bad[0] if store else 0
            raise NumericalError(f"non-finite value at t={self.t[i]:.4g}, "
                                 f"u={self.u[bad[1]]:.4g}")
        t = self.t if store else self.t[:1]
        return ValueSurface(t, self.u, surf, Phi0, c, cfg)


def solve_inner(Phi0: float, cfg: SchemeConfig, consts: DerivedConstants,
                kernel: KernelTable | None = None) -> ValueSurface:
    """One backward sweep for a given source Phi0."""
    return InnerSolver(consts, cfg, kernel).surface(Phi0)


def h0(surface: ValueSurface) -> float:
    """sup_z Phi(0, z)/(1+z)^p, i.e. the maximum of phi_tilde at t = 0."""
    return float(np.max(surface.phi_tilde[0]))


def argmax_index(surface: ValueSurface) -> int:
    """Index of the maximizing node of phi_tilde(0, .).

    Ties go to the largest liquid share, i.e. the smallest illiquid share.
    """
    row = surface.phi_tilde[0]
    top = np.flatnonzero(row == row.max())
    return int(top[-1])


@dataclass
class SolveResult:
    """Outcome of the outer fixed point.

    ``Phi0`` is in the solver normalization; ``value = p * Phi0`` is V(1)
    for U(c) = c^p, the scale of the Merton baselines.
    """

    Phi0: float
    surface: ValueSurface
    outer_history: list[float]
    converged: bool
    n_solves: int = 0
    wall_time: float = 0.0

    @property
    def value(self) -> float:
        return self.surface.consts.p * self.Phi0

    @property
    def z_hat_star(self) -> float:
        """Optimal illiquid share y/(x+y) right after a trade."""
        return float(1.0 - self.surface.u[argmax_index(self.surface)])

    def summary(self) -> str:
        return (f"Phi0={self.Phi0:.8g} value={self.value:.8g} zhat_star={self.z_hat_star:.4g} "
                f"iterations={len(self.outer_history)} solves={self.n_solves} "
                f"converged={int(self.converged)} T={self.surface.cfg.T:g} "
                f"wall_time={self.wall_time:.2f}")


class FixedPointError(RuntimeError):
    def __init__(self, msg: str, history: list[float]):
        super().__init__(msg)
        self.history = history


def fixed_point(cfg: SchemeConfig, consts: DerivedConstants,
                kernel: KernelTable | None = None, raise_on_failure: bool = True) -> SolveResult:
    """Outer iteration Phi0 <- H0[Phi(Phi0)] starting from 0.

    The map M(x) = H0[Phi(x)] is increasing and convex in the source x, so
    the secant method on F(x) = M(x) - x started from (0, M(0)) produces a
    nondecreasing sequence that stays below the fixed point. A secant step
    that would move backwards or is undefined falls back to plain iteration,
    which is the only step used with ``acceleration="none"``. Stops when
    |M(x) - x| < tol.
    """
    t0 = time.perf_counter()
    solver = InnerSolver(consts, cfg, kernel)
    history: list[float] = []
    xs: list[float] = []
    Ms: list[float] = []

    def M(x: float) -> float:
        return h0(solver.surface(x, store=False))

    x = 0.0
    converged = False
    for _ in range(cfg.max_outer_iters):
        history.append(x)
        xs.append(x)
        Ms.append(M(x))
        F = Ms[-1] - x
        if abs(F) < cfg.fixed_point_tol:
            converged = True
            break
        nxt = Ms[-1]
        if cfg.acceleration == "secant" and len(xs) > 1:
            Fp = Ms[-2] - xs[-2]
            if F != Fp:
                cand = x - F * (x - xs[-2]) / (F - Fp)
                if math.isfinite(cand) and cand > x:
                    nxt = cand
        x = nxt
    if not converged and raise_on_failure:
        raise FixedPointError(
            f"fixed point not converged in {cfg.max_outer_iters} iterations "
            f"(last |M(x)-x| = {abs(Ms[-1] - xs[-1]):.3e})", history)
    Phi0 = xs[-1]
    surface = solver.surface(Phi0, store=True)
    return SolveResult(Phi0, surface, history, converged, solver.n_solves,
                       time.perf_counter() - t0)


def solve(params: ModelParams, profile: str = "paper", **overrides) -> SolveResult:
    """Convenience wrapper: constants, scheme profile, fixed point."""
    cfg = scheme_for(params, profile, **overrides)
    return fixed_point(cfg, hjb_constants(params))


__all__ = [
    "CFLError", "FixedPointError", "InnerSolver", "NumericalError", "PROFILES",
    "SchemeConfig", "SolveResult", "ValueSurface", "argmax_index", "base_coefficients",
    "boundary_z0", "boundary_z1", "control_bounds", "default_horizon", "fixed_point",
    "from_compact", "h0", "hamiltonian_max", "scheme_for", "solve", "solve_inner",
    "to_compact",
]
