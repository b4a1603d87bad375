"""Riemann-Liouville integration, a Volterra oracle and Laplace quadrature.

Everything here is brute force by design: the product-trapezoidal Volterra
solver and the quadrature Laplace transform never touch Mittag-Leffler
functions, so they can check the closed-form kinetic solutions
independently.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .kspecial import gamma
from .series import DomainError, Status

__all__ = [
    "TimeGrid",
    "SolutionCurve",
    "LaplaceQuadrature",
    "rl_integral_power",
    "product_trapezoid_weights",
    "rl_integral_grid",
    "volterra_solve",
    "ode_oracle_nu1",
    "numeric_laplace",
    "standard_decay",
]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_i = i*h, i = 1..m, with h = t_max/m.

    Node 0 is implied: it is the lower limit of every integral but is not
    part of the reported output.
    """

    t_max: float
    m: int

    def __post_init__(self) -> None:
        if not (self.t_max > 0 and math.isfinite(self.t_max)):
            raise DomainError("t_max must be a positive finite number")
        if int(self.m) != self.m or self.m < 1 or (int(self.m) & (int(self.m) - 1)):
            raise DomainError("m must be a positive power of two")

    @property
    def h(self) -> float:
        return self.t_max / self.m

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(1, self.m + 1) * self.h

    @property
    def nodes_with_origin(self) -> np.ndarray:
        return np.arange(0, self.m + 1) * self.h


@dataclass(frozen=True, eq=False)
class SolutionCurve:
    grid: np.ndarray
    values: np.ndarray
    meta: dict[str, Any] = field(default_factory=dict)
    statuses: tuple[Status, ...] = ()

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise DomainError("grid and values must be 1-D arrays of equal length")
        if grid.size and (grid[0] <= 0 or np.any(np.diff(grid) <= 0)):
            raise DomainError("grid must be strictly increasing and start after 0")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if not self.statuses:
            object.__setattr__(self, "statuses", (Status.CONVERGED,) * grid.size)

    def __len__(self) -> int:
        return self.grid.size


@dataclass(frozen=True)
class LaplaceQuadrature:
    value: float
    tail: float
    tail_fraction: float


def rl_integral_power(mu: float, nu: float, t: float) -> float:
    """Fractional integral of t**mu: Gamma(mu+1)/Gamma(mu+nu+1) t**(mu+nu)."""
    if not mu > -1:
        raise DomainError("mu must exceed -1")
    if not nu > 0:
        raise DomainError("nu must be > 0")
    if not t > 0:
        raise DomainError("t must be > 0")
    return math.exp(math.lgamma(mu + 1) - math.lgamma(mu + nu + 1)) * t ** (mu + nu)


def _binomials(s: float, count: int) -> np.ndarray:
    out = np.empty(count)
    acc = 1.0
    for k in range(count):
        out[k] = acc
        acc *= (s - k) / (k + 1)
    return out


_SERIES_FROM = 8
_SERIES_TERMS = 24


def product_trapezoid_weights(nu: float, m: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Product-trapezoidal weights for the fractional integral of order nu.

    Returns ``(a0, b, scale)`` such that on a uniform grid

        I^nu f(t_n) ~ scale * (a0[n] f_0 + sum_{j=1}^{n-1} b[n-j] f_j + f_n)

    with scale = h**nu / Gamma(nu+2) taken out (the caller multiplies by
    h**nu). The second differences in ``b`` and ``a0`` cancel badly for
    large indices, so beyond a few steps they come from their binomial
    expansions instead.
    """
    s = nu + 1.0
    a0 = np.zeros(m + 1)
    b = np.zeros(m + 1)
    idx = np.arange(1, m + 1, dtype=float)
    direct = idx < _SERIES_FROM
    nd = idx[direct]
    b[1:][direct] = (nd + 1) ** s - 2 * nd**s + (nd - 1) ** s
    a0[1:][direct] = (nd - 1) ** s - (nd - s) * nd**nu
    if m >= _SERIES_FROM:
        nl = idx[~direct]
        binom = _binomials(s, 2 * _SERIES_TERMS + 2)
        x = 1.0 / nl
        even = np.zeros_like(nl)
        alt = np.zeros_like(nl)
        # smallest terms first
        for k in range(2 * _SERIES_TERMS + 1, 1, -1):
            power = x**k
            if k % 2 == 0:
                even += binom[k] * power
            alt += binom[k] * (power if k % 2 == 0 else -power)
        # (1+x)^s - 2 + (1-x)^s = 2 sum_j binom(s, 2j) x^(2j)
        b[1:][~direct] = 2.0 * nl**s * even
        # (1-x)^s - 1 + s x = sum_{k>=2} binom(s, k) (-x)^k
        a0[1:][~direct] = nl**s * alt
    return a0, b, 1.0 / gamma(nu + 2.0)


def _uniform_step(grid: np.ndarray) -> float:
    h = grid[0]
    expected = h * np.arange(1, grid.size + 1)
    if not np.allclose(grid, expected, rtol=1e-12, atol=0):
        raise DomainError("curve must live on a uniform grid t_i = i*h")
    return float(h)


def rl_integral_grid(f: SolutionCurve, nu: float, f0: float | None = None) -> SolutionCurve:
    """Fractional integral of a sampled function at every grid node.

    The weights integrate the kernel (t_i - u)**(nu-1)/Gamma(nu) exactly
    against the piecewise-linear interpolant of ``f``. ``f0`` is the value
    at t = 0; by default it is extrapolated linearly from the first two
    nodes.
    """
    if not nu > 0:
        raise DomainError("nu must be > 0")
    m = len(f)
    h = _uniform_step(f.grid)
    F = f.values
    if f0 is None:
        f0 = 2 * F[0] - F[1] if m > 1 else F[0]
    a0, b, scale = product_trapezoid_weights(nu, m)
    hist = np.zeros(m)
    if m > 1:
        hist[1:] = np.convolve(b[1:m], F[: m - 1])[: m - 1]
    out = h**nu * scale * (a0[1:] * f0 + hist + F)
    meta = dict(f.meta, operation="rl_integral", nu=nu)
    return SolutionCurve(f.grid, out, meta)


def _evaluate(g: Callable, t: np.ndarray) -> np.ndarray:
    try:
        values = np.asarray(g(t), dtype=float)
    except (TypeError, ValueError):
        values = None
    if values is None or values.shape != t.shape:
        values = np.array([float(g(x)) for x in t])
    return values


def volterra_solve(g: Callable, d: float, nu: float, grid: TimeGrid) -> SolutionCurve:
    """Solve N(t) = g(t) - d**nu * I^nu N(t) on the grid by forward substitution.

    ``g`` is called with the array of nodes (including t = 0); scalar-only
    callables are evaluated pointwise. The discrete system is lower
    triangular, so each step solves exactly for the newest node.
    """
    if not d > 0:
        raise DomainError("d must be > 0")
    if not nu > 0:
        raise DomainError("nu must be > 0")
    m, h = grid.m, grid.h
    gv = _evaluate(g, grid.nodes_with_origin)
    a0, b, scale = product_trapezoid_weights(nu, m)
    lam = d**nu * h**nu * scale
    denom = 1.0 + lam
    if denom == 0.0 or not math.isfinite(denom):
        raise ArithmeticError("degenerate diagonal in the Volterra system")
    brev = b[::-1].copy()  # brev[m - i] == b[i]
    N = np.empty(m + 1)
    N[0] = gv[0]
    for n in range(1, m + 1):
        hist = a0[n] * N[0]
        if n > 1:
            hist += np.dot(brev[m - n + 1: m], N[1:n])
        N[n] = (gv[n] - lam * hist) / denom
    meta = {"oracle": "volterra", "d": d, "nu": nu, "h": h, "f0": float(gv[0])}
    return SolutionCurve(grid.nodes, N[1:], meta)


def _derivative(g: Callable, t: np.ndarray) -> np.ndarray:
    delta = 1e-5 * np.maximum(1.0, np.abs(t))
    central = t - delta >= 0
    out = np.empty_like(t)
    tc, dc = t[central], delta[central]
    out[central] = (_evaluate(g, tc + dc) - _evaluate(g, tc - dc)) / (2 * dc)
    tf, df = t[~central], delta[~central]
    if tf.size:
        out[~central] = (-3 * _evaluate(g, tf) + 4 * _evaluate(g, tf + df)
                         - _evaluate(g, tf + 2 * df)) / (2 * df)
    return out


def ode_oracle_nu1(g: Callable, d: float, grid: TimeGrid,
                   dg: Callable | None = None) -> SolutionCurve:
    """Classical RK4 for N' = g' - d N, N(0) = g(0): the nu = 1 equation differentiated."""
    if not d >= 0:
        raise DomainError("d must be >= 0")
    m, h = grid.m, grid.h
    half = np.arange(0, 2 * m + 1) * (h / 2)
    slope = _evaluate(dg, half) if dg is not None else _derivative(g, half)
    n_val = float(_evaluate(g, np.array([0.0]))[0])
    out = np.empty(m)
    for i in range(m):
        s0, s1, s2 = slope[2 * i], slope[2 * i + 1], slope[2 * i + 2]
        k1 = s0 - d * n_val
        k2 = s1 - d * (n_val + 0.5 * h * k1)
        k3 = s1 - d * (n_val + 0.5 * h * k2)
        k4 = s2 - d * (n_val + h * k3)
        n_val += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i] = n_val
    return SolutionCurve(grid.nodes, out, {"oracle": "rk4", "d": d, "h": h})


def _panel_weights(p: float, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact integrals of e^{-ps} (1 - s/h) and e^{-ps} s/h over [0, h]."""
    q = p * h
    whole = -np.expm1(-q) / p
    # 1 - e^{-q}(1+q), by its Taylor series where it cancels
    rising = -np.expm1(-q) - q * np.exp(-q)
    small = q < 0.1
    if np.any(small):
        qs = q[small]
        acc = np.zeros_like(qs)
        term = np.ones_like(qs)
        for k in range(2, 20):
            term = term * qs / k if k > 2 else qs**2 / 2
            acc += (-1) ** k * (k - 1) * term
        rising = rising.copy()
        rising[small] = acc
    right = rising / (p * q)
    return whole - right, right


def numeric_laplace(f: SolutionCurve, tail_exponent: float, p: float,
                    f0: float | None = None) -> LaplaceQuadrature:
    """Laplace transform of a sampled curve plus a modelled tail.

    Each panel integrates e^{-pt} exactly against the linear interpolant of
    ``f``; ``f0`` (the value at t = 0) defaults to linear extrapolation.
    Past the last node the curve is continued as f(T) exp(-tail_exponent
    (t - T)). The tail contribution is returned separately.
    """
    if not p > 0:
        raise DomainError("p must be > 0")
    if not tail_exponent >= 0:
        raise DomainError("tail_exponent must be >= 0")
    t = f.grid
    F = f.values
    if f0 is None:
        # straight line through the first two samples, evaluated at 0
        f0 = F[0] - t[0] * (F[1] - F[0]) / (t[1] - t[0]) if len(f) > 1 else F[0]
    nodes = np.concatenate(([0.0], t))
    vals = np.concatenate(([f0], F))
    h = np.diff(nodes)
    left_w, right_w = _panel_weights(p, h)
    damp = np.exp(-p * nodes[:-1])
    body = math.fsum(damp * (left_w * vals[:-1] + right_w * vals[1:]))
    tail = F[-1] * math.exp(-p * t[-1]) / (p + tail_exponent)
    total = body + tail
    fraction = abs(tail) / abs(total) if total != 0 else (0.0 if tail == 0 else math.inf)
    if fraction > 0.01:
        warnings.warn(f"Laplace tail contributes {fraction:.2%} of the total", RuntimeWarning,
                      stacklevel=2)
    return LaplaceQuadrature(total, tail, fraction)


def standard_decay(n0: float, c: float, t: float) -> float:
    """Exponential solution N0 exp(-c t) of the standard kinetic equation."""
    return n0 * math.exp(-c * t)

