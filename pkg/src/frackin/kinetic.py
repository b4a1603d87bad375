"""Closed-form solutions of fractional kinetic equations with Bessel-type input.

Every solver evaluates an outer series

    N(t) = N0 * sum_n C_n (x/2)^(mu+2n) Gamma(beta_n) E_{nu,beta_n}(-y)

where ``C_n`` are the generalized modified k-Bessel coefficients and the
choice of ``x``, ``y`` and ``beta_n`` identifies the variant. The factor
Gamma(beta) E_{nu,beta}(-y) lies in [0, 1] for nu <= 1, which gives the
outer stopping test a cheap majorant. When the outer terms cancel heavily
(large t) the sum is redone in multiprecision.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .bessel_family import (
    SQRT_PI_HALF,
    KBesselParams,
    coefficient_table,
    even_power_series,
    kbessel_log_coefficients,
)
from .fracops import SolutionCurve, TimeGrid
from .mittag_leffler import MLParams, _precision, ml, scaled_ml_mp
from .series import (
    DEFAULT_CONTROL,
    EPS,
    ConvergenceError,
    DomainError,
    EvalResult,
    SeriesControl,
    Status,
)

__all__ = [
    "Variant",
    "KineticProblem",
    "coeff",
    "solve",
    "solve_thm1",
    "solve_thm2_published",
    "solve_thm2_derived",
    "solve_thm3_published",
    "solve_thm3_derived",
    "solve_cor1",
    "solve_cor2",
    "laplace_solution_thm1",
    "curve",
    "forcing",
    "rate",
]


class Variant(enum.Enum):
    THM1 = "thm1"
    THM2_PUBLISHED = "thm2-published"
    THM2_DERIVED = "thm2-derived"
    THM3_PUBLISHED = "thm3-published"
    THM3_DERIVED = "thm3-derived"
    COR1 = "cor1"
    COR2 = "cor2"

    def __str__(self) -> str:
        return self.value

    @property
    def scaled_argument(self) -> bool:
        """Whether the input Bessel function is evaluated at e^nu t^nu."""
        return self not in (Variant.THM1, Variant.COR1)

    @property
    def derived(self) -> bool:
        return self in (Variant.THM2_DERIVED, Variant.THM3_DERIVED)

    @property
    def uses_a(self) -> bool:
        return self in (Variant.THM3_PUBLISHED, Variant.THM3_DERIVED, Variant.COR2)


@dataclass(frozen=True)
class KineticProblem:
    """A kinetic equation N(t) - N0 f(t) = -d^nu I^nu N(t) and its solution variant.

    ``a`` is the destruction rate of the ``thm3-*`` and ``cor2`` equations
    and defaults to ``e``. The ``cor*`` variants overwrite the parameters they fix:
    ``cor1`` sets k = g = lam = 1, ``cor2`` sets b = 2, c = -1 and
    k = g = lam = 1. ``cor2_sqrt_pi`` multiplies the ``cor2`` series by
    sqrt(pi)/2; ``cor2_squared_factorial`` uses (n!)^2 in its denominator
    instead of the single n! that the specialization produces.
    """

    n0: float
    e: float
    nu: float
    params: KBesselParams
    variant: Variant = Variant.THM1
    a: float | None = None
    cor2_sqrt_pi: bool = False
    cor2_squared_factorial: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.variant, Variant):
            object.__setattr__(self, "variant", Variant(self.variant))
        if self.a is None:
            object.__setattr__(self, "a", self.e)
        for name in ("n0", "e", "nu", "a"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not self.n0 >= 0:
            raise DomainError("n0 must be >= 0")
        if not self.e > 0:
            raise DomainError("e must be > 0")
        if not self.a > 0:
            raise DomainError("a must be > 0")
        if not self.nu > 0:
            raise DomainError("nu must be > 0")
        p = self.params
        if self.variant is Variant.COR1:
            object.__setattr__(self, "params", dataclasses.replace(p, k=1.0, g=1.0, lam=1.0))
        elif self.variant is Variant.COR2:
            object.__setattr__(self, "params", dataclasses.replace(
                p, b=2.0, c=-1.0, k=1.0, g=1.0, lam=1.0))
        if self.variant.derived and not self.nu * self.params.mu + 1 > 0:
            raise DomainError("nu*mu + 1 must be > 0")

    @property
    def rate(self) -> float:
        """Destruction rate d in the term -d^nu I^nu N."""
        return self.a if self.variant.uses_a else self.e


def coeff(n: int, params: KBesselParams) -> float:
    """C_n = c^n (g)_{n,k} / ((n!)^2 Gamma_k(lam n + mu + (b+1)/2))."""
    if int(n) != n or n < 0:
        raise DomainError("n must be a non-negative integer")
    for i, (log_c, sign) in enumerate(kbessel_log_coefficients(params)):
        if i == n:
            return sign * math.exp(log_c) if sign else 0.0
    raise AssertionError("unreachable")


# -- outer series ---------------------------------------------------------------


@dataclass(frozen=True)
class _Plan:
    """Everything that distinguishes one variant's series from another."""

    params: KBesselParams
    x: float
    y: float
    derived: bool
    nu: float
    t: float
    e: float
    d: float
    scaled_argument: bool
    scale: float = 1.0
    extra_factorial: bool = False
    flags: tuple[str, ...] = field(default_factory=tuple)

    def mp_x(self):
        """x in the current multiprecision context."""
        if not self.scaled_argument:
            return mpfr(self.t)
        return (mpfr(self.e) * self.t) ** mpfr(self.nu)

    def mp_y(self):
        return (mpfr(self.d) * self.t) ** mpfr(self.nu)

    def beta(self, n: int) -> float:
        order = self.params.mu + 2 * n
        return self.nu * order + 1.0 if self.derived else order + 1.0


def _plan(prob: KineticProblem, t: float) -> _Plan:
    if not (t > 0 and math.isfinite(t)):
        raise DomainError("t must be a positive finite number")
    v = prob.variant
    params = prob.params
    if v is Variant.COR1:
        params = dataclasses.replace(params, c=-params.c)
    x = (prob.e * t) ** prob.nu if v.scaled_argument else t
    y = (prob.rate * t) ** prob.nu
    flags = ("singular_at_origin",) if params.mu < 0 else ()
    scale = prob.n0
    extra = False
    if v is Variant.COR2:
        if prob.cor2_sqrt_pi:
            scale *= SQRT_PI_HALF
        extra = prob.cor2_squared_factorial
    return _Plan(params, x, y, v.derived, prob.nu, t, prob.e, prob.rate,
                 v.scaled_argument, scale, extra, flags)


def _log_coefficients(plan: _Plan) -> Iterator[tuple[float, int]]:
    for n, (log_c, sign) in enumerate(kbessel_log_coefficients(plan.params)):
        if plan.extra_factorial:
            log_c -= math.lgamma(n + 1)
        yield log_c, sign


def _outer_series(plan: _Plan, ctrl: SeriesControl) -> EvalResult:
    if plan.scale == 0.0:
        return EvalResult(0.0, 1, 0.0, Status.CONVERGED, 0.0, plan.flags)
    mu = plan.params.mu
    log_half = math.log(plan.x / 2.0)
    nu = plan.nu
    kept: list[float] = []
    abs_total = 0.0
    err = 0.0
    inner_ok = True
    inner_flags: set[str] = set()
    prev_env = math.inf
    small_run = 0
    ratio = 1.0
    last_env = 0.0
    status = Status.MAX_TERMS_REACHED
    for n, (log_c, sign) in enumerate(_log_coefficients(plan)):
        if n >= ctrl.max_terms:
            break
        beta = plan.beta(n)
        log_scale = log_c + (mu + 2 * n) * log_half + math.lgamma(beta)
        if sign == 0:
            term, env = 0.0, 0.0
        else:
            # tolerance of E expressed in units of Gamma(beta) E
            inner_tol = max(ctrl.abs_tol * math.exp(-math.lgamma(beta)), 1e-300)
            inner_ctrl = dataclasses.replace(ctrl, abs_tol=inner_tol)
            res = ml(MLParams(nu, beta), -plan.y, inner_ctrl)
            inner_ok &= res.converged
            inner_flags.update(res.flags)
            ge_abs = abs(res.value)
            if log_scale - math.lgamma(beta) > 709.0 or (
                    ge_abs > 0 and log_scale + math.log(ge_abs) > 709.0):
                return _overflowed(n, plan)
            mag = math.exp(log_scale + math.log(ge_abs)) if ge_abs > 0 else 0.0
            term = sign * math.copysign(mag, res.value) if mag else 0.0
            # |C_n| (x/2)^(mu+2n) max(1, |Gamma(beta) E|)
            env = max(math.exp(log_scale - math.lgamma(beta)), mag)
            inner_err = res.tail_estimate + res.rounding_estimate
            err += mag * EPS * (8.0 + abs(log_scale))
            if inner_err > 0:
                err += math.exp(min(log_scale + math.log(inner_err), 709.0))
        kept.append(term)
        abs_total += abs(term)
        if prev_env > 0 and math.isfinite(prev_env):
            ratio = env / prev_env
        last_env = env
        thr = ctrl.threshold(math.fsum(kept))
        if env <= thr and env <= prev_env:
            small_run += 1
            if small_run >= 2 and ratio < 1 and env / (1 - ratio) <= thr:
                status = Status.CONVERGED
                break
        else:
            small_run = 0
        prev_env = env
    value = math.fsum(kept) if ctrl.compensated else sum(kept)
    tail = last_env / (1 - ratio) if ratio < 1 else (0.0 if last_env == 0 else math.inf)
    if status is Status.CONVERGED and not inner_ok:
        status = Status.MAX_TERMS_REACHED
    flags = plan.flags + tuple(sorted(inner_flags))
    if status is Status.CONVERGED and err > ctrl.threshold(value) and ctrl.extended_precision:
        mp_res = _outer_series_mp(plan, ctrl, abs_total, len(kept))
        if mp_res is not None:
            return mp_res.scaled(plan.scale)
    return EvalResult(value, len(kept), tail, status, err, flags).scaled(plan.scale)


def _overflowed(n: int, plan: _Plan) -> EvalResult:
    return EvalResult(math.nan, n, math.inf, Status.MAX_TERMS_REACHED, math.inf,
                      plan.flags + ("overflow",))


def _outer_series_mp(plan: _Plan, ctrl: SeriesControl, abs_total: float,
                     n_terms: int) -> EvalResult | None:
    """Redo the outer sum with enough digits to absorb its cancellation.

    The term count comes from the double pass, whose magnitudes are right
    even when the sum is not.
    """
    p = plan.params
    digits = math.log10(abs_total) - math.log10(ctrl.abs_tol)
    bits = math.ceil((max(20, math.ceil(digits) + 12)) * 3.3220)
    with _precision(bits):
        half = plan.mp_x() / 2
        my = -plan.mp_y()
        mnu = mpfr(plan.nu)
        k = mpfr(p.k)
        shift = mpfr(p.mu) + (mpfr(p.b) + 1) / 2
        poch = mpfr(1)
        fact = mpfr(1)
        total = mpfr(0)
        for n in range(n_terms + 2):
            if n:
                poch *= p.g + (n - 1) * k
                fact *= n
            arg = (p.lam * n + shift) / k
            # 1 / Gamma_k(k arg) = 1 / (k^(arg-1) Gamma(arg))
            rgk = 1 / (gmpy2.gamma(arg) * k ** (arg - 1))
            denom = fact * fact * (fact if plan.extra_factorial else 1)
            c_n = mpfr(p.c) ** n * poch * rgk / denom
            if c_n == 0:
                continue
            order = p.mu + 2 * n
            beta = mnu * order + 1 if plan.derived else mpfr(order) + 1
            ge, _ = scaled_ml_mp(plan.nu, beta, my, bits)
            total += c_n * half ** (p.mu + 2 * n) * ge
    value = float(total)
    if not math.isfinite(value):
        return None
    tail = abs_total * 2.0 ** (-bits)
    return EvalResult(value, n_terms + 2, tail, Status.CONVERGED, tail,
                      plan.flags + ("extended_precision",))


# -- public solvers -----------------------------------------------------------------


def _require(prob: KineticProblem, *variants: Variant) -> None:
    if prob.variant not in variants:
        names = ", ".join(str(v) for v in variants)
        raise DomainError(f"problem variant {prob.variant} is not {names}")


def solve_thm1(prob: KineticProblem, t: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> EvalResult:
    """N0 sum C_n Gamma(mu+2n+1) (t/2)^(mu+2n) E_{nu,mu+2n+1}(-e^nu t^nu)."""
    _require(prob, Variant.THM1)
    return _outer_series(_plan(prob, t), ctrl)


def solve_thm2_published(prob: KineticProblem, t: float,
                         ctrl: SeriesControl = DEFAULT_CONTROL) -> EvalResult:
    """Closed form with input J(e^nu t^nu), keeping the Gamma(mu+2n+1), E_{nu,mu+2n+1} factors."""
    _require(prob, Variant.THM2_PUBLISHED)
    return _outer_series(_plan(prob, t), ctrl)


def solve_thm2_derived(prob: KineticProblem, t: float,
                       ctrl: SeriesControl = DEFAULT_CONTROL) -> EvalResult:
    """Closed form with input J(e^nu t^nu), using Gamma(nu(mu+2n)+1), E_{nu,nu(mu+2n)+1}.

    The input's n-th term is a multiple of t^(nu(mu+2n)), so the transform
    of each term carries Gamma(nu(mu+2n)+1).
    """
    _require(prob, Variant.THM2_DERIVED)
    return _outer_series(_plan(prob, t), ctrl)


def solve_thm3_published(prob: KineticProblem, t: float,
                         ctrl: SeriesControl = DEFAULT_CONTROL) -> EvalResult:
    """As :func:`solve_thm2_published` but decaying at rate a: E(-a^nu t^nu)."""
    _require(prob, Variant.THM3_PUBLISHED)
    return _outer_series(_plan(prob, t), ctrl)


def solve_thm3_derived(prob: KineticProblem, t: float,
                       ctrl: SeriesControl = DEFAULT_CONTROL) -> EvalResult:
    """As :func:`solve_thm2_derived` but decaying at rate a: E(-a^nu t^nu)."""
    _require(prob, Variant.THM3_DERIVED)
    return _outer_series(_plan(prob, t), ctrl)


def solve_cor1(prob: KineticProblem, t: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> EvalResult:
    """N0 sum (-c)^n Gamma(mu+2n+1)/(n! Gamma(n+mu+(b+1)/2)) (t/2)^(mu+2n) E_{nu,mu+2n+1}(-e^nu t^nu)."""
    _require(prob, Variant.COR1)
    return _outer_series(_plan(prob, t), ctrl)


def solve_cor2(prob: KineticProblem, t: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> EvalResult:
    """Spherical-Bessel input: sum (-1)^n Gamma(mu+2n+1)/(n! Gamma(n+mu+3/2)) (e^nu t^nu/2)^(mu+2n) E(-a^nu t^nu)."""
    _require(prob, Variant.COR2)
    return _outer_series(_plan(prob, t), ctrl)


_SOLVERS: dict[Variant, Callable[..., EvalResult]] = {
    Variant.THM1: solve_thm1,
    Variant.THM2_PUBLISHED: solve_thm2_published,
    Variant.THM2_DERIVED: solve_thm2_derived,
    Variant.THM3_PUBLISHED: solve_thm3_published,
    Variant.THM3_DERIVED: solve_thm3_derived,
    Variant.COR1: solve_cor1,
    Variant.COR2: solve_cor2,
}


def solve(prob: KineticProblem, t: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> EvalResult:
    """Dispatch on ``prob.variant``."""
    return _SOLVERS[prob.variant](prob, t, ctrl)


def laplace_solution_thm1(prob: KineticProblem, p: float,
                          ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Laplace transform of the first solution at p > e.

    N0 sum C_n 2^-(mu+2n) Gamma(mu+2n+1) p^-(mu+2n+1) / (1 + (e/p)^nu).
    """
    _require(prob, Variant.THM1)
    if not (p > prob.e and math.isfinite(p)):
        raise DomainError("p must exceed e")
    if prob.n0 == 0:
        return 0.0
    mu = prob.params.mu
    log_2p = math.log(2.0 * p)
    kept: list[float] = []
    status = Status.MAX_TERMS_REACHED
    small_run = 0
    prev = math.inf
    for n, (log_c, sign) in enumerate(kbessel_log_coefficients(prob.params)):
        if n >= ctrl.max_terms:
            break
        mag = math.exp(log_c + math.lgamma(mu + 2 * n + 1) - (mu + 2 * n) * log_2p) if sign else 0.0
        kept.append(sign * mag)
        thr = ctrl.threshold(math.fsum(kept))
        if mag <= thr and mag <= prev:
            small_run += 1
            if small_run >= 2:
                status = Status.CONVERGED
                break
        else:
            small_run = 0
        prev = mag
    if status is not Status.CONVERGED:
        raise ConvergenceError("Laplace-domain series did not converge")
    return prob.n0 * math.fsum(kept) / p / (1.0 + (prob.e / p) ** prob.nu)


def curve(prob: KineticProblem, grid: TimeGrid | np.ndarray,
          ctrl: SeriesControl = DEFAULT_CONTROL) -> SolutionCurve:
    """Evaluate the variant's solver at every grid point.

    Failures at single points become NaN values with a DomainError status;
    the curve is always complete.
    """
    nodes = grid.nodes if isinstance(grid, TimeGrid) else np.asarray(grid, dtype=float)
    values = np.empty(nodes.size)
    statuses = []
    errors: dict[str, int] = {}
    flags: set[str] = set()
    for i, t in enumerate(nodes):
        try:
            res = solve(prob, float(t), ctrl)
        except (DomainError, ArithmeticError, ConvergenceError) as exc:
            values[i] = math.nan
            statuses.append(Status.DOMAIN_ERROR)
            errors[str(exc)] = errors.get(str(exc), 0) + 1
            continue
        values[i] = res.value
        statuses.append(res.status)
        flags.update(res.flags)
    counts = {str(s): statuses.count(s) for s in Status if s in statuses}
    meta = {
        "variant": str(prob.variant),
        "n0": prob.n0, "e": prob.e, "a": prob.a, "nu": prob.nu,
        **{f"params.{k}": v for k, v in dataclasses.asdict(prob.params).items()},
        "statuses": counts,
        "flags": sorted(flags),
        "errors": errors,
        "ctrl": dataclasses.asdict(ctrl),
    }
    return SolutionCurve(nodes, values, meta, tuple(statuses))


# -- equation data for the brute-force oracles ------------------------------------------


def rate(prob: KineticProblem) -> float:
    """Destruction rate d of the equation the variant claims to solve."""
    return prob.rate


def forcing(prob: KineticProblem, t_max: float,
            ctrl: SeriesControl = DEFAULT_CONTROL) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized input N0 f(t) of the variant's kinetic equation on [0, t_max].

    thm1: J(t); thm2/thm3: J(e^nu t^nu); cor1: w_{mu,b,c}(t); cor2:
    j_mu(e^nu t^nu), which includes its sqrt(pi)/2 prefactor whatever the
    ``cor2_sqrt_pi`` setting of the closed form.
    """
    v = prob.variant
    params = prob.params
    if v is Variant.COR1:
        params = dataclasses.replace(params, c=-params.c)
    scale = prob.n0 * (SQRT_PI_HALF if v is Variant.COR2 else 1.0)
    e, nu = prob.e, prob.nu

    def argument(t: np.ndarray) -> np.ndarray:
        return e**nu * t**nu if v.scaled_argument else t

    z_max = float(argument(np.asarray(t_max, dtype=float)))
    logs, signs = coefficient_table(params, z_max, ctrl)

    def f(t):
        t = np.asarray(t, dtype=float)
        return scale * even_power_series(logs, signs, params.mu, argument(t))

    return f
