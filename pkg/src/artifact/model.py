"""Market parameters, derived constants and closed-form Merton baselines.

The market has a liquid asset L (continuously traded) and an illiquid asset I
that can only be traded at the jump times of a Poisson process of intensity
``lambda``. Between trades only a fraction ``gamma`` of the idiosyncratic noise
of I is observed. Preferences are CRRA, U(c) = c^p / p with 0 < p < 1.

Two value normalizations coexist in this package:

* the solver works with U(c) = c^p / p, which keeps the Hamiltonian and the
  feedback maps in their textbook form;
* reported values ``V(1)`` and the Merton baselines use U(c) = c^p. Since the
  value is linear in a constant rescaling of U, ``V(1) = p * Phi0``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, fields
from typing import Any, Mapping


class ParameterError(ValueError):
    """Raised for parameter sets outside the admissible domain."""


def _concave_max(a: float, b: float, lo: float | None = 0.0,
                 hi: float | None = 1.0) -> tuple[float, float]:
    """Maximize ``a*v - b*v**2/2`` over ``[lo, hi]``.

    ``None`` bounds mean the interval is open on that side. Returns the
    maximum and the maximizer. ``b = 0`` is allowed only with finite bounds
    (or ``a = 0``).
    """
    if b > 0.0:
        v = a / b
    elif a == 0.0:
        v = 0.0
    else:
        v = math.inf if a > 0 else -math.inf
    if lo is not None:
        v = max(v, lo)
    if hi is not None:
        v = min(v, hi)
    if math.isinf(v):
        return math.inf, v
    return a * v - 0.5 * b * v * v, v


@dataclass(frozen=True)
class ModelParams:
    """Market and preference parameters.

    Parameters
    ----------
    b_L, sigma_L : float
        Drift and volatility of the liquid asset.
    b_I, sigma_I : float
        Drift and volatility of the illiquid asset.
    rho : float
        Correlation between the two Brownian drivers, in (-1, 1).
    beta : float
        Discount rate; must exceed ``k_p``.
    p : float
        Utility exponent in (0, 1).
    lam : float
        Poisson trading intensity of the illiquid asset.
    gamma : float
        Observation parameter in [0, 1].
    no_liquid : bool
        Comparison model without a liquid risky asset: liquid wealth is cash
        with zero return. Requires ``rho = 0``.
    """

    b_L: float = 0.15
    sigma_L: float = 1.0
    b_I: float = 0.2
    sigma_I: float = 1.0
    rho: float = 0.0
    beta: float = 0.2
    p: float = 0.5
    lam: float = 1.0
    gamma: float = 0.0
    no_liquid: bool = False

    def __post_init__(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name != "no_liquid" and not math.isfinite(float(v)):
                raise ParameterError(f"{f.name} must be finite, got {v!r}")
        if self.sigma_L <= 0 or self.sigma_I <= 0:
            raise ParameterError("volatilities must be positive")
        if not -1.0 < self.rho < 1.0:
            raise ParameterError(f"rho must lie in (-1, 1), got {self.rho}")
        if not 0.0 < self.p < 1.0:
            raise ParameterError(f"p must lie in (0, 1), got {self.p}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ParameterError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.lam < 0:
            raise ParameterError(f"lambda must be nonnegative, got {self.lam}")
        if self.no_liquid and self.rho != 0.0:
            raise ParameterError("the no-liquid-asset model requires rho = 0")
        kp = compute_kp(self)
        if not self.beta > kp:
            raise ParameterError(
                f"beta = {self.beta} must exceed k_p = {kp:.6g} (value is infinite)")

    def replace(self, **changes: Any) -> "ModelParams":
        """Return a validated copy with some fields changed."""
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ModelParams":
        """Build from a JSON-style mapping; ``lambda`` is accepted for ``lam``.

        Unknown keys are rejected.
        """
        data = dict(data)
        if "lambda" in data:
            if "lam" in data:
                raise ParameterError("give either 'lambda' or 'lam', not both")
            data["lam"] = data.pop("lambda")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ParameterError(f"unknown parameter field(s): {', '.join(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class DerivedConstants:
    """Every constant of the reduced problem, computed once from the params."""

    params: ModelParams = field(repr=False)
    k_p: float
    b_Y: float
    b_J: float
    sigma_J: float
    k_LYp: float
    k_Jp: float
    K_lambda: float
    K1: float
    K2: float
    K3: float
    K4: float
    Khat1: float
    Khat3: float

    @property
    def p(self) -> float:
        return self.params.p

    @property
    def lam(self) -> float:
        return self.params.lam

    @property
    def m_J(self) -> float:
        """Growth rate of E[J_t^p]: p b_J - p(1-p) sigma_J^2 / 2."""
        p = self.params.p
        return p * self.b_J - 0.5 * p * (1 - p) * self.sigma_J ** 2

    @property
    def a0(self) -> float:
        """Linear coefficient of the all-liquid (y = 0) scalar problem."""
        return self.params.beta + self.params.lam - _liquid_merton_rate(self.params)


def _liquid_merton_rate(params: ModelParams) -> float:
    """p b_L^2 / (2(1-p) sigma_L^2), or 0 without a liquid risky asset."""
    if params.no_liquid:
        return 0.0
    p = params.p
    return p * params.b_L ** 2 / (2.0 * (1.0 - p) * params.sigma_L ** 2)


def _illiquid_quadratic(params: ModelParams) -> tuple[float, float]:
    """Coefficients (a, b) of the growth objective in u_I after eliminating u_L."""
    p, s_I = params.p, params.sigma_I
    if params.no_liquid:
        return p * params.b_I, p * (1 - p) * s_I ** 2
    hedge = params.rho * params.b_L * s_I / params.sigma_L
    return p * (params.b_I - hedge), p * (1 - p) * s_I ** 2 * (1 - params.rho ** 2)


def compute_kp(params: ModelParams) -> float:
    """Growth exponent of the constrained two-asset Merton problem.

    sup over u_L real and u_I in [0, 1] of
    p(u_L b_L + u_I b_I) - p(1-p)/2 (u_L^2 s_L^2 + u_I^2 s_I^2 + 2 rho u_L u_I s_L s_I).
    The optimal u_L is b_L/((1-p) s_L^2) - rho u_I s_I / s_L for any u_I, so the
    problem reduces to a projected one-dimensional concave quadratic.
    """
    a, b = _illiquid_quadratic(params)
    val, _ = _concave_max(a, b, 0.0, 1.0)
    return _liquid_merton_rate(params) + val


def _kp_unconstrained(params: ModelParams) -> float:
    a, b = _illiquid_quadratic(params)
    val, _ = _concave_max(a, b, None, None)
    return _liquid_merton_rate(params) + val


def merton_weights(params: ModelParams, constrained: bool = True) -> tuple[float, float]:
    """Optimal Merton proportions (u_L, u_I) of total wealth."""
    a, b = _illiquid_quadratic(params)
    _, u_I = _concave_max(a, b, 0.0, 1.0) if constrained else _concave_max(a, b, None, None)
    if params.no_liquid:
        return 0.0, u_I
    u_L = (params.b_L / ((1 - params.p) * params.sigma_L ** 2)
           - params.rho * u_I * params.sigma_I / params.sigma_L)
    return u_L, u_I


def split_constants(params: ModelParams) -> tuple[float, float, float, float, float]:
    """Split of the illiquid drift into an observed part Y and a hidden part J.

    Returns
    -------
    b_Y, b_J, sigma_J, k_LYp, k_Jp : float
        ``k_LYp + k_Jp == k_p`` because both split problems share the maximizer
        of the unsplit one.
    """
    p, g2, rho = params.p, params.gamma ** 2, params.rho
    s_I = params.sigma_I
    hedge = 0.0 if params.no_liquid else rho * params.b_L * s_I / params.sigma_L
    b_Y = g2 * params.b_I + (1 - g2) * hedge
    b_J = params.b_I - b_Y
    sigma_J = s_I * math.sqrt(1 - rho ** 2) * math.sqrt(1 - g2)
    # observed block: after eliminating u_L only the gamma-visible variance remains
    a_Y = p * (b_Y - hedge)
    b_Yq = p * (1 - p) * s_I ** 2 * g2 * (1 - rho ** 2)
    k_LYp = _liquid_merton_rate(params) + _concave_max(a_Y, b_Yq, 0.0, 1.0)[0]
    k_Jp = _concave_max(p * b_J, p * (1 - p) * sigma_J ** 2, 0.0, 1.0)[0]
    return b_Y, b_J, sigma_J, k_LYp, k_Jp


def hjb_constants(params: ModelParams) -> DerivedConstants:
    """Compute all constants of the reduced equation.

    ``K_lambda`` carries the observed-variance term
    ``gamma^2 (1-rho^2) sigma_I^2 p(1-p)/2``, which is required for the
    z -> infinity limit of the reduced equation to match the all-liquid
    scalar problem.
    """
    p, lam, beta = params.p, params.lam, params.beta
    rho, g = params.rho, params.gamma
    s_I, s_L, b_L, b_I = params.sigma_I, params.sigma_L, params.b_L, params.b_I
    hedge = rho * b_L * s_I / s_L
    b_Y, b_J, sigma_J, k_LYp, k_Jp = split_constants(params)
    var_Y = (rho ** 2 + g ** 2 * (1 - rho ** 2)) * s_I ** 2
    K_lambda = beta + lam + 0.5 * var_Y * p * (1 - p) - p * b_Y
    return DerivedConstants(
        params=params,
        k_p=compute_kp(params),
        b_Y=b_Y,
        b_J=b_J,
        sigma_J=sigma_J,
        k_LYp=k_LYp,
        k_Jp=k_Jp,
        K_lambda=K_lambda,
        K1=b_L - rho * s_I * s_L * (1 - p),
        K2=s_L,
        K3=g ** 2 * (-b_I + hedge + (1 - rho ** 2) * (1 - p) * s_I ** 2),
        K4=-s_I * g * math.sqrt(1 - rho ** 2),
        Khat1=b_L - rho * s_I * s_L,
        Khat3=g ** 2 * (-b_I + hedge + (1 - rho ** 2) * s_I ** 2),
    )


def merton_from_rate(k: float, beta: float, p: float) -> float:
    """((1-p)/(beta-k))^(1-p): Merton value of unit wealth for U(c) = c^p."""
    if not beta > k:
        return math.inf
    return ((1 - p) / (beta - k)) ** (1 - p)


def merton_value(params: ModelParams, constrained: bool = True) -> float:
    """Merton value V_M(1) in the U(c) = c^p normalization.

    ``constrained`` restricts the illiquid proportion to [0, 1]; otherwise it
    is free. With ``no_liquid`` the only risky asset is the illiquid one,
    traded continuously. Returns ``inf`` when the relevant rate exceeds beta.
    """
    k = compute_kp(params) if constrained else _kp_unconstrained(params)
    return merton_from_rate(k, params.beta, params.p)


def merton_single_asset(b: float, sigma: float, beta: float, p: float) -> float:
    """Merton value of unit wealth with a single risky asset (U(c) = c^p)."""
    k = p * b * b / (2 * (1 - p) * sigma * sigma)
    return merton_from_rate(k, beta, p)


def k0_residual(K0: float, params: ModelParams, Phi0: float) -> float:
    p = params.p
    a = params.beta + params.lam - _liquid_merton_rate(params)
    return a * K0 - (1 - p) * p ** (-1 / (1 - p)) * K0 ** (-p / (1 - p)) - params.lam * Phi0


def solve_K0(params: ModelParams, Phi0: float, rtol: float = 1e-12) -> float:
    """Positive root of the all-liquid scalar equation.

    a K0 - (1-p) p^(-1/(1-p)) K0^(-p/(1-p)) = lambda Phi0 with
    a = beta + lambda - p b_L^2/(2(1-p) s_L^2). The left side is strictly
    increasing in K0, so bracketing plus bisection finds the unique root.
    Values are in the solver normalization U(c) = c^p / p.
    """
    if Phi0 < 0:
        raise ValueError("Phi0 must be nonnegative")
    p = params.p
    a = params.beta + params.lam - _liquid_merton_rate(params)
    if not a > 0:
        raise ParameterError("linear coefficient is non-positive: the value is infinite")
    lo = ((1 - p) / a) ** (1 - p) / p  # root with zero source
    if params.lam * Phi0 == 0:
        return lo
    hi = 2.0 * lo
    while k0_residual(hi, params, Phi0) < 0:
        hi *= 2.0
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if k0_residual(mid, params, Phi0) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * hi:
            break
    return 0.5 * (lo + hi)


def participates(params: ModelParams) -> bool:
    """True iff some illiquid investment is optimal: b_I/s_I > rho b_L/s_L."""
    if params.no_liquid:
        return params.b_I > 0
    return params.b_I / params.sigma_I > params.rho * params.b_L / params.sigma_L
