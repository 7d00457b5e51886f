"""Monte Carlo simulation of the closed-loop optimal strategy.

Between trading dates the investor sees the liquid wealth X and the observed
illiquid proxy Y; the true illiquid value is A = Y J with J hidden. At each
Poisson trading date the total wealth X + A is split back to the optimal
ratio x/y = z*. Utility is U(c) = c^p/p, the solver normalization, so the
mean discounted utility of unit initial wealth estimates ``Phi0``.

Noise is drawn per path from a Philox generator keyed by (seed, path), with
columns (W, B1, B2) and one row per Euler step. Inter-trade times are drawn
from the same generator before the normals. The mapping
(seed, path, step, stream) -> draw is therefore fixed and independent of
chunking or of the order in which paths are processed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .hjb import ValueSurface
from .model import ModelParams, split_constants
from .policy import PolicyField, policy_field


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    Parameters
    ----------
    horizon : float
        Simulated time span.
    dt_euler : float
        Euler step, at most 1e-2.
    n_paths : int
    seed : int
        64-bit seed.
    initial_wealth : float
        Total initial wealth, split optimally at time 0 (a trading date).
    n_record : int
        Number of leading paths whose states are kept for export.
    record_every : int
        Stride, in Euler steps, of the recorded states.
    chunk : int
        Paths per batch; affects memory only, never results.
    """

    horizon: float = 10.0
    dt_euler: float = 1e-2
    n_paths: int = 10_000
    seed: int = 20240101
    initial_wealth: float = 1.0
    n_record: int = 10
    record_every: int = 10
    chunk: int = 2000

    def __post_init__(self) -> None:
        if not 0 < self.dt_euler <= 1e-2:
            raise ValueError("dt_euler must lie in (0, 1e-2]")
        if self.horizon <= 0 or self.n_paths < 1 or self.initial_wealth <= 0:
            raise ValueError("horizon, n_paths and initial_wealth must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.horizon / self.dt_euler - 1e-9))


@dataclass
class SimulationResult:
    """Per-path outcomes and aggregates.

    Attributes
    ----------
    utility : (n_paths,) array
        Discounted utility accumulated over [0, horizon].
    tail : (n_paths,) array
        Discounted value-function estimate of the remaining utility at the
        horizon, read from the solved surface.
    n_trades, absorbed : (n_paths,) arrays
        Trading dates per path, and whether X hit 0 at some point.
    ratio_checks, ratio_violations : int
        Post-trade ratio checks performed and failed (tolerance 1e-9 relative).
    min_state : float
        Smallest X, Y or A seen on any path.
    trades : list of dict
        Trading events of the recorded paths (time, pre/post X and Y).
    samples : (k, 8) array
        Recorded states: path_id, s, X, Y, A, c, pi, is_trade.
    """

    utility: np.ndarray
    tail: np.ndarray
    n_trades: np.ndarray
    absorbed: np.ndarray
    ratio_checks: int
    ratio_violations: int
    min_state: float
    trades: list = field(default_factory=list)
    samples: np.ndarray = field(default_factory=lambda: np.empty((0, 8)))
    cfg: SimConfig | None = None

    @property
    def total(self) -> np.ndarray:
        return self.utility + self.tail

    @property
    def mean_utility(self) -> float:
        return float(self.utility.mean())

    @property
    def mean_total(self) -> float:
        return float(self.total.mean())

    @property
    def stderr_total(self) -> float:
        n = self.total.size
        return float(self.total.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan

    @property
    def stderr(self) -> float:
        n = self.utility.size
        return float(self.utility.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan

    def summary(self) -> str:
        return (f"paths={self.utility.size} mean_utility={self.mean_utility:.8g} "
                f"stderr={self.stderr:.3g} mean_with_tail={self.mean_total:.8g} "
                f"stderr_with_tail={self.stderr_total:.3g} "
                f"trades={int(self.n_trades.sum())} absorbed_paths={int(self.absorbed.sum())} "
                f"ratio_violations={self.ratio_violations}")

    def samples_to_csv(self, path, header: str = "") -> None:
        np.savetxt(path, self.samples, delimiter=",", comments="# ", fmt="%.10g",
                   header=(header + "\n" if header else "") + "path_id,s,X,Y,A,c,pi,is_trade")


def _path_rng(seed: int, path: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, path]))


def _trade_flags(rng: np.random.Generator, lam: float, n_steps: int, dt: float) -> np.ndarray:
    """Mark the Euler steps that end at or after a Poisson trade time."""
    flags = np.zeros(n_steps + 1, dtype=np.bool_)
    if lam <= 0:
        return flags
    horizon = n_steps * dt
    t = 0.0
    block = max(16, int(lam * horizon + 10 * math.sqrt(lam * horizon + 1) + 10))
    while t <= horizon:
        times = t + np.cumsum(rng.exponential(1.0 / lam, size=block))
        t = float(times[-1])
        times = times[times <= horizon]
        # snap each trade to the end of the Euler step containing it
        flags[np.minimum(np.ceil(times / dt - 1e-12).astype(np.int64), n_steps)] = True
    flags[0] = False
    return flags


@numba.njit(cache=True)
def _bilinear(grid, t0, dt_s, nt, w_inc, s, w):
    """Bilinear lookup; ``w_inc`` is the increasing share axis (grid is reversed)."""
    ts = (s - t0) / dt_s
    if ts < 0.0:
        ts = 0.0
    if ts > nt - 1:
        ts = nt - 1.0
    i = int(ts)
    if i >= nt - 1:
        i = nt - 2 if nt > 1 else 0
    a = ts - i if nt > 1 else 0.0
    nw = w_inc.size
    dw = w_inc[1] - w_inc[0]
    x = (w - w_inc[0]) / dw
    if x < 0.0:
        x = 0.0
    if x > nw - 1:
        x = nw - 1.0
    k = int(x)
    if k >= nw - 1:
        k = nw - 2
    b = x - k
    # grid columns run with u = 1 - w, i.e. column nw-1-k holds w_inc[k]
    c0 = nw - 1 - k
    c1 = c0 - 1
    v0 = (1 - b) * grid[i, c0] + b * grid[i, c1]
    if nt == 1:
        return v0
    v1 = (1 - b) * grid[i + 1, c0] + b * grid[i + 1, c1]
    return (1 - a) * v0 + a * v1


@numba.njit(cache=True)
def _run_path(noise, flags, C, Pi, Phi, t0, dt_s, w_inc, z_star, r0, dt, beta, p,
              bL, sL, bY, sI, rho, gam, bJ, sJ, record, rec_every, rec_out, trade_out):
    n_steps = noise.shape[0] - 1
    nt = C.shape[0]
    sq = math.sqrt(dt)
    sY_w = sI * rho
    sY_b = sI * math.sqrt(1 - rho * rho) * gam
    mY = (bY - 0.5 * (sY_w * sY_w + sY_b * sY_b)) * dt
    mJ = (bJ - 0.5 * sJ * sJ) * dt
    # time 0 is a trading date
    if math.isinf(z_star):
        X, Y = r0, 0.0
    else:
        X, Y = r0 * z_star / (1 + z_star), r0 / (1 + z_star)
    J = 1.0
    elapsed = 0.0
    util = 0.0
    absorbed = False
    n_tr = 0
    checks = 0
    bad = 0
    min_state = min(X, Y)
    nrec = 0
    ntr_rec = 0
    for n in range(n_steps):
        s = n * dt
        R = X + Y
        if X > 0.0 and R > 0.0:
            w = Y / R
            c = R * _bilinear(C, t0, dt_s, nt, w_inc, elapsed, w)
            pi = R * _bilinear(Pi, t0, dt_s, nt, w_inc, elapsed, w)
        else:
            c = 0.0
            pi = 0.0
        if c > 0.0:
            util += math.exp(-beta * s) * c ** p / p * dt
        if record and n % rec_every == 0 and nrec < rec_out.shape[0]:
            rec_out[nrec, 0] = s
            rec_out[nrec, 1] = X
            rec_out[nrec, 2] = Y
            rec_out[nrec, 3] = Y * J
            rec_out[nrec, 4] = c
            rec_out[nrec, 5] = pi
            rec_out[nrec, 6] = 1.0 if (n > 0 and flags[n]) else 0.0
            nrec += 1
        xw = noise[n + 1, 0]
        xb1 = noise[n + 1, 1]
        xb2 = noise[n + 1, 2]
        Xn = X + (-c + pi * bL) * dt + pi * sL * sq * xw
        if Xn <= 0.0:
            if X > 0.0 or Xn < 0.0:
                absorbed = True
            Xn = 0.0
        Y = Y * math.exp(mY + sq * (sY_w * xw + sY_b * xb1))
        J = J * math.exp(mJ + sJ * sq * xb2)
        X = Xn
        elapsed += dt
        if flags[n + 1]:
            R = X + Y * J
            preX, preY = X, Y
            if math.isinf(z_star):
                X, Y = R, 0.0
            else:
                X, Y = R * z_star / (1 + z_star), R / (1 + z_star)
                if R > 0.0:
                    checks += 1
                    if abs(X - z_star * Y) > 1e-9 * max(1.0, abs(X)):
                        bad += 1
            J = 1.0
            elapsed = 0.0
            n_tr += 1
            if record and ntr_rec < trade_out.shape[0]:
                trade_out[ntr_rec, 0] = (n + 1) * dt
                trade_out[ntr_rec, 1] = preX
                trade_out[ntr_rec, 2] = preY
                trade_out[ntr_rec, 3] = X
                trade_out[ntr_rec, 4] = Y
                ntr_rec += 1
        m = min(X, Y)
        if m < min_state:
            min_state = m
    R = X + Y
    tail = 0.0
    if R > 0.0:
        w = Y / R
        tail = math.exp(-beta * n_steps * dt) * R ** p * _bilinear(Phi, t0, dt_s, nt, w_inc, elapsed, w)
    return util, tail, absorbed, n_tr, checks, bad, min_state, nrec, ntr_rec


def simulate(params: ModelParams, policy: PolicyField | None, surface: ValueSurface,
             cfg: SimConfig) -> SimulationResult:
    """Simulate the optimal closed loop across Poisson trading dates.

    Feedback maps are queried at the time elapsed since the last trade, capped
    at the surface horizon. ``policy`` defaults to the maps of ``surface``.
    """
    pf = policy if policy is not None else policy_field(surface)
    b_Y, b_J, sigma_J, _, _ = split_constants(params)
    n = cfg.n_steps
    dt = cfg.dt_euler
    t0 = float(pf.t[0])
    dt_s = float(pf.t[1] - pf.t[0]) if pf.t.size > 1 else 1.0
    C = np.ascontiguousarray(pf.C_hat)
    Pi = np.ascontiguousarray(pf.Pi_hat)
    Phi = np.ascontiguousarray(surface.phi_tilde)
    if Phi.shape != C.shape:
        raise ValueError("policy and surface grids differ")
    w_inc = np.ascontiguousarray(pf.w[::-1])
    bL = 0.0 if params.no_liquid else params.b_L
    sL = params.sigma_L

    utility = np.empty(cfg.n_paths)
    tail = np.empty(cfg.n_paths)
    n_trades = np.empty(cfg.n_paths, dtype=np.int64)
    absorbed = np.zeros(cfg.n_paths, dtype=bool)
    checks = bad = 0
    min_state = math.inf
    n_rec_rows = n // cfg.record_every + 1
    samples: list[np.ndarray] = []
    trades: list[dict] = []
    for path in range(cfg.n_paths):
        rng = _path_rng(cfg.seed, path)
        flags = _trade_flags(rng, params.lam, n, dt)
        noise = rng.standard_normal((n + 1, 3))
        record = path < cfg.n_record
        rec = np.zeros((n_rec_rows if record else 1, 7))
        tr = np.zeros((int(flags.sum()) if record else 1, 5))
        u_, t_, ab, ntr, ck, bd, ms, nrec, ntr_rec = _run_path(
            noise, flags, C, Pi, Phi, t0, dt_s, w_inc, pf.z_star, cfg.initial_wealth, dt,
            params.beta, params.p, bL, sL, b_Y, params.sigma_I, params.rho, params.gamma,
            b_J, sigma_J, record, cfg.record_every, rec, tr)
        utility[path], tail[path], absorbed[path], n_trades[path] = u_, t_, ab, ntr
        checks += ck
        bad += bd
        min_state = min(min_state, ms)
        if record:
            samples.append(np.column_stack([np.full(nrec, path), rec[:nrec]]))
            trades.extend(dict(path=path, time=r[0], X_pre=r[1], Y_pre=r[2], X_post=r[3],
                               Y_post=r[4]) for r in tr[:ntr_rec])
    samp = np.vstack(samples) if samples else np.empty((0, 8))
    return SimulationResult(utility, tail, n_trades, absorbed, checks, bad, min_state,
                            trades, samp, cfg)


@numba.njit(cache=True)
def _ratio_paths(noise, Ct, Tt, t0, dt_s, w_inc, z0, dt, Kh1, K2, Kh3, K4, x0, y0, bL, sL,
                 bY, sI, rho, gam, hedge):
    n_paths, n1, _ = noise.shape
    nt = Ct.shape[0]
    Z = np.empty((n_paths, n1))
    X = np.empty((n_paths, n1))
    Y = np.empty((n_paths, n1))
    sq = math.sqrt(dt)
    sY_w = sI * rho
    sY_b = sI * math.sqrt(1 - rho * rho) * gam
    for k in range(n_paths):
        z, x, y = z0, x0, y0
        Z[k, 0], X[k, 0], Y[k, 0] = z, x, y
        for n in range(n1 - 1):
            s = n * dt
            xw = noise[k, n + 1, 0]
            xb = noise[k, n + 1, 1]
            # closed-loop equation in the ratio z = x/y
            if z > 0.0:
                w = 1.0 / (1.0 + z)
                ct = (1 + z) * _bilinear(Ct, t0, dt_s, nt, w_inc, s, w)
                th = (1 + z) * _bilinear(Tt, t0, dt_s, nt, w_inc, s, w)
                zn = z - ct * dt + th * (Kh1 * dt + K2 * sq * xw) + z * (Kh3 * dt + K4 * sq * xb)
                z = zn if zn > 0.0 else 0.0
            # the same feedback applied to (x, y) directly
            if x > 0.0:
                R = x + y
                w = y / R
                c = R * _bilinear(Ct, t0, dt_s, nt, w_inc, s, w)
                pi = R * (_bilinear(Tt, t0, dt_s, nt, w_inc, s, w) + hedge * (1 - w))
                xn = x + (-c + pi * bL) * dt + pi * sL * sq * xw
                yn = y * (1 + bY * dt + sq * (sY_w * xw + sY_b * xb))
                x = xn if xn > 0.0 else 0.0
                y = yn
            else:
                y = y * (1 + bY * dt + sq * (sY_w * xw + sY_b * xb))
            Z[k, n + 1], X[k, n + 1], Y[k, n + 1] = z, x, y
    return Z, X, Y


def simulate_ratio(params: ModelParams, surface: ValueSurface | PolicyField, cfg: SimConfig,
                   z0: float | None = None, return_xy: bool = False):
    """Euler scheme for the closed-loop ratio Z = X/Y between two trades.

    dZ = -C~ dt + Theta~ (Khat1 dt + K2 dW) + Z (Khat3 dt + K4 dB1), absorbed at
    0, with C~ and Theta~ the feedback maps per unit of Y. With
    ``return_xy`` the pair (X, Y) driven by the same noise is returned too,
    which checks that Z tracks X/Y.
    """
    from .model import hjb_constants
    pf = surface if isinstance(surface, PolicyField) else policy_field(surface)
    c = hjb_constants(params)
    hedge = 0.0 if params.no_liquid else params.rho * params.sigma_I / params.sigma_L
    u = 1.0 - pf.w
    theta_hat = pf.Pi_hat - hedge * u[None, :]
    theta_hat[:, 0] = 0.0
    if z0 is None:
        z0 = pf.z_star
    if not math.isfinite(z0):
        raise ValueError("z0 must be finite")
    n = cfg.n_steps
    noise = np.empty((cfg.n_paths, n + 1, 2))
    for k in range(cfg.n_paths):
        noise[k] = _path_rng(cfg.seed, k).standard_normal((n + 1, 2))
    dt_s = float(pf.t[1] - pf.t[0]) if pf.t.size > 1 else 1.0
    b_Y = split_constants(params)[0]
    y0 = cfg.initial_wealth / (1 + z0)
    Z, X, Y = _ratio_paths(noise, np.ascontiguousarray(pf.C_hat), np.ascontiguousarray(theta_hat),
                           float(pf.t[0]), dt_s, np.ascontiguousarray(pf.w[::-1]), z0,
                           cfg.dt_euler, c.Khat1, c.K2, c.Khat3, c.K4, z0 * y0, y0,
                           0.0 if params.no_liquid else params.b_L, params.sigma_L, b_Y,
                           params.sigma_I, params.rho, params.gamma, hedge)
    return (Z, X, Y) if return_xy else Z
