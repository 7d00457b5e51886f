"""Gaussian quadrature grids and the nonlocal kernel f^gamma.

The hidden factor J is geometric, J_t = exp((b_J - s_J^2/2) t + s_J sqrt(t) X)
with X standard normal, and the kernel is f^gamma(t, z) = E[(z + J_t)^p].
Expectations over X are replaced by a finite grid of nodes and weights.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Callable, Literal

import numba
import numpy as np
from scipy.special import ndtr, ndtri, roots_hermitenorm

from .model import DerivedConstants

_SQRT2PI = math.sqrt(2.0 * math.pi)


class QuantizerError(RuntimeError):
    """Lloyd iteration did not reach its tolerance within the iteration cap."""


@dataclass(frozen=True)
class GaussGrid:
    """Nodes and probability weights approximating N(0, 1)."""

    nodes: np.ndarray
    weights: np.ndarray
    method: str = "gauss-hermite"
    iterations: int = 0

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    def expect(self, fn: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, fn(self.nodes)))

    def key(self) -> str:
        h = hashlib.sha256()
        h.update(self.method.encode())
        h.update(np.ascontiguousarray(self.nodes).tobytes())
        h.update(np.ascontiguousarray(self.weights).tobytes())
        return h.hexdigest()[:16]


def _gauss_hermite(n: int) -> GaussGrid:
    x, w = roots_hermitenorm(n)
    keep = w > 0
    x, w = x[keep], w[keep]
    w = w / w.sum()
    return GaussGrid(np.ascontiguousarray(x), np.ascontiguousarray(w), "gauss-hermite")


def _lloyd(n: int, tol: float, max_iter: int) -> GaussGrid:
    """L2-optimal quantizer of N(0, 1) by Lloyd's fixed point.

    Seeded at the quantiles of N(0, 3), the asymptotically optimal point
    density (proportional to phi^(1/3)). Cells are Voronoi intervals on the
    whole line, nodes are the cell centroids.
    """
    x = math.sqrt(3.0) * ndtri((np.arange(n) + 0.5) / n)
    bounds = np.empty(n + 1)
    bounds[0], bounds[-1] = -np.inf, np.inf
    for it in range(1, max_iter + 1):
        bounds[1:-1] = 0.5 * (x[1:] + x[:-1])
        w = np.diff(ndtr(bounds))
        dens = np.exp(-0.5 * np.square(bounds)) / _SQRT2PI
        x_new = (dens[:-1] - dens[1:]) / w
        move = float(np.max(np.abs(x_new - x)))
        x = x_new
        if move < tol:
            break
    else:
        raise QuantizerError(
            f"Lloyd quantizer (N={n}) not converged after {max_iter} iterations; "
            f"last node move {move:.3e}")
    bounds[1:-1] = 0.5 * (x[1:] + x[:-1])
    w = np.diff(ndtr(bounds))
    return GaussGrid(x, w / w.sum(), "quantizer", it)


def build_grid(n: int, method: Literal["gauss-hermite", "quantizer"] = "gauss-hermite",
               tol: float = 1e-6, max_iter: int = 50_000) -> GaussGrid:
    """Build a node/weight grid for the standard normal law.

    Parameters
    ----------
    n : int
        Number of points, at least 2. Gauss-Hermite nodes whose weights
        underflow to zero are dropped, so ``size`` may be smaller for large n.
    method : {"gauss-hermite", "quantizer"}
        Hermite rule (default) or Lloyd quantizer.
    tol, max_iter
        Quantizer stopping rule on the largest node displacement.
    """
    if n < 2:
        raise ValueError("grid needs at least two points")
    if method == "gauss-hermite":
        return _gauss_hermite(n)
    if method == "quantizer":
        return _lloyd(n, tol, max_iter)
    raise ValueError(f"unknown grid method {method!r}")


def lognormal_moment(b_J: float, sigma_J: float, t: float, p: float) -> float:
    """Exact E[J_t^p] = exp(t (p b_J - p(1-p) sigma_J^2 / 2))."""
    return math.exp(t * (p * b_J - 0.5 * p * (1 - p) * sigma_J ** 2))


def _j_values(t: float, consts: DerivedConstants, grid: GaussGrid) -> np.ndarray:
    s = consts.sigma_J
    return np.exp((consts.b_J - 0.5 * s * s) * t + s * math.sqrt(t) * grid.nodes)


def _pow(base: np.ndarray, p: float) -> np.ndarray:
    """base**p for base >= 0 via exp(p log base), with 0 mapped to 0."""
    base = np.asarray(base, dtype=float)
    out = np.zeros_like(base)
    pos = base > 0
    out[pos] = np.exp(p * np.log(base[pos]))
    return out


def f_gamma(t: float, z: float | np.ndarray, consts: DerivedConstants,
            grid: GaussGrid) -> float | np.ndarray:
    """Kernel f^gamma(t, z) = E[(z + J_t)^p] by quadrature."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    J = _j_values(t, consts, grid)
    z_arr = np.asarray(z, dtype=float)
    vals = _pow(z_arr[..., None] + J, consts.p) @ grid.weights
    return float(vals) if np.ndim(z) == 0 else vals


def g_operator(psi: Callable[[np.ndarray], np.ndarray], t: float, x: float, y: float,
               consts: DerivedConstants, grid: GaussGrid) -> float:
    """Generic operator G[psi](t, x, y) = E[psi(x + y J_t)]."""
    J = _j_values(t, consts, grid)
    return float(np.dot(grid.weights, psi(x + y * J)))


@numba.njit(cache=True, parallel=True)
def _kernel_rows(t, u, nodes, weights, drift, sig, p):
    nt, nu, nn = t.size, u.size, nodes.size
    out = np.empty((nt, nu))
    for i in numba.prange(nt):
        st = sig * math.sqrt(t[i])
        dt_ = drift * t[i]
        for j in range(nu):
            uj = u[j]
            acc = 0.0
            for k in range(nn):
                v = uj + (1.0 - uj) * math.exp(dt_ + st * nodes[k])
                acc += weights[k] * math.exp(p * math.log(v))
            out[i, j] = acc
    return out


@dataclass(frozen=True)
class KernelTable:
    """Normalized kernel on a (t, zhat) grid.

    ``values[i, j] = (1 - zhat_j)^p f^gamma(t_i, zhat_j / (1 - zhat_j))
    = E[(zhat_j + (1 - zhat_j) J_{t_i})^p]``, which is bounded and equals 1
    at zhat = 1. ``zhat`` is the liquid proportion x/(x+y).
    """

    t: np.ndarray
    zhat: np.ndarray
    values: np.ndarray
    p: float

    def f(self) -> np.ndarray:
        """Unnormalized f^gamma(t_i, z_j) on the nodes with zhat < 1."""
        finite = self.zhat < 1.0
        return self.values[:, finite] / (1.0 - self.zhat[finite]) ** self.p


def build_kernel(consts: DerivedConstants, grid: GaussGrid, t: np.ndarray,
                 zhat: np.ndarray) -> KernelTable:
    """Precompute the normalized kernel on exactly the PDE grid."""
    t = np.ascontiguousarray(t, dtype=float)
    zhat = np.ascontiguousarray(zhat, dtype=float)
    if consts.sigma_J == 0.0 and consts.b_J == 0.0:
        vals = np.ones((t.size, zhat.size))
    else:
        drift = consts.b_J - 0.5 * consts.sigma_J ** 2
        vals = _kernel_rows(t, zhat, grid.nodes, grid.weights, drift, consts.sigma_J, consts.p)
    return KernelTable(t, zhat, vals, consts.p)
