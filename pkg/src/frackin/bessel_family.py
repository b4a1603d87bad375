"""Series for the generalized Bessel function and its k-deformations.

All series are summed term by term in log-magnitude form with sign
tracking, which keeps large orders and arguments free of overflow. Only
positive real arguments are supported; ``z = 0`` returns the limiting value
where it is finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .kspecial import ln_gamma_k, rgamma
from .mittag_leffler import _precision
from .series import (
    DEFAULT_CONTROL,
    EPS,
    DomainError,
    EvalResult,
    SeriesControl,
    Status,
    sum_series,
)

__all__ = [
    "KBesselParams",
    "gen_bessel_w",
    "bessel_j",
    "bessel_i",
    "spherical_j",
    "phi_transform",
    "k_bessel",
    "gen_mod_k_bessel",
    "kbessel_log_coefficients",
    "even_power_series",
    "coefficient_table",
]

SQRT_PI_HALF = math.sqrt(math.pi) / 2.0


@dataclass(frozen=True)
class KBesselParams:
    """Parameters (b, c, gamma, lambda, mu, k) of the modified k-Bessel series.

    ``g`` is the Pochhammer seed and ``lam`` the step multiplying ``n`` in
    the k-Gamma argument ``lam*n + mu + (b+1)/2``.
    """

    b: float
    c: float
    g: float
    lam: float
    mu: float
    k: float

    def __post_init__(self) -> None:
        for name in ("b", "c", "g", "lam", "mu", "k"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not self.k > 0:
            raise DomainError("k must be > 0")
        if not self.lam > 0:
            raise DomainError("lam must be > 0")
        if not self.mu > -1:
            raise DomainError("mu must exceed -1")
        if not self.shift > 0:
            raise DomainError("mu + (b+1)/2 must be > 0")

    @property
    def shift(self) -> float:
        """Offset mu + (b+1)/2 of the k-Gamma argument."""
        return self.mu + (self.b + 1.0) / 2.0


def _check_z(z: float) -> None:
    if not (z >= 0 and math.isfinite(z)):
        raise DomainError(f"z must be a positive real number, got {z!r}")


def _signed_exp(log_mag: float, sign: int) -> float:
    if sign == 0 or log_mag == -math.inf:
        return 0.0
    return sign * math.exp(log_mag)


def _zero_limit(order: float, lead: float) -> EvalResult:
    """Value at z = 0 of a series whose n = 0 term is lead * (z/2)**order."""
    if order > 0:
        value = 0.0
    elif order == 0:
        value = lead
    else:
        raise DomainError("series is unbounded at z = 0 for negative order")
    return EvalResult(value, 1, 0.0, Status.CONVERGED)


def _flags_for(mu: float) -> tuple[str, ...]:
    return ("mu_nonpositive",) if mu <= 0 else ()


def gen_bessel_w(p: float, b: float, c: float, z: float,
                 ctrl: SeriesControl = DEFAULT_CONTROL) -> EvalResult:
    """w_{p,b,c}(z) = sum (-1)^n c^n (z/2)^(2n+p) / (n! Gamma(p + (b+1)/2 + n))."""
    shift = p + (b + 1.0) / 2.0
    if not p > -1:
        raise DomainError("p must exceed -1")
    if not shift > 0:
        raise DomainError("p + (b+1)/2 must be > 0")
    _check_z(z)
    if z == 0:
        return _zero_limit(p, rgamma(shift))
    log_half = math.log(z / 2.0)
    log_c = math.log(abs(c)) if c else -math.inf
    sign_step = -1 if c > 0 else 1

    def terms() -> Iterator[float]:
        n = 0
        while True:
            if n and c == 0:
                yield 0.0
            else:
                log_mag = (n * log_c if n else 0.0) + (2 * n + p) * log_half \
                    - math.lgamma(n + 1) - math.lgamma(shift + n)
                yield _signed_exp(log_mag, sign_step**n)
            n += 1

    res = sum_series(terms(), ctrl)
    if c > 0 and ctrl.extended_precision and res.converged \
            and res.rounding_estimate > ctrl.threshold(res.value):
        return _alternating_mp(p, b, c, z, res, ctrl)
    return res


def _alternating_mp(p: float, b: float, c: float, z: float, res: EvalResult,
                    ctrl: SeriesControl) -> EvalResult:
    """Resum an alternating w-series with enough digits for its cancellation."""
    # the double pass reports 8 EPS sum|term| as its rounding estimate
    abs_total = res.rounding_estimate / (8.0 * EPS)
    digits = math.log10(abs_total / ctrl.threshold(res.value)) + 12
    with _precision(math.ceil(max(digits, 20) * 3.3220)):
        # the shift is formed in multiprecision too: a rounded shift would be
        # amplified by the same cancellation this pass is meant to remove
        shift = mpfr(p) + (mpfr(b) + 1) / 2
        q = (mpfr(z) / 2) ** 2 * c
        term = (mpfr(z) / 2) ** p / gmpy2.gamma(shift)
        total = mpfr(0)
        for n in range(res.terms_used + 2):
            total += term
            term *= -q / ((n + 1) * (shift + n))
        value = float(total)
    return EvalResult(value, res.terms_used + 2, res.tail_estimate, res.status,
                      EPS * abs(value), ("extended_precision",))


def bessel_j(p: float, z: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> EvalResult:
    """Bessel function of the first kind J_p (b = c = 1)."""
    return gen_bessel_w(p, 1.0, 1.0, z, ctrl)


def bessel_i(p: float, z: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> EvalResult:
    """Modified Bessel function I_p (b = 1, c = -1)."""
    return gen_bessel_w(p, 1.0, -1.0, z, ctrl)


def spherical_j(p: float, z: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> EvalResult:
    """Spherical Bessel function j_p = (sqrt(pi)/2) w_{p,2,1}.

    Orders in (-3/2, -1] lie outside the generalized-w domain and are summed
    directly.
    """
    if not p > -1.5:
        raise DomainError("p must exceed -3/2")
    if p > -1:
        return gen_bessel_w(p, 2.0, 1.0, z, ctrl).scaled(SQRT_PI_HALF)
    _check_z(z)
    if z == 0:
        raise DomainError("series is unbounded at z = 0 for negative order")
    log_half = math.log(z / 2.0)

    def terms() -> Iterator[float]:
        n = 0
        while True:
            log_mag = (2 * n + p) * log_half - math.lgamma(n + 1) - math.lgamma(p + n + 1.5)
            yield _signed_exp(log_mag, (-1) ** n)
            n += 1

    return sum_series(terms(), ctrl).scaled(SQRT_PI_HALF)


def phi_transform(p: float, b: float, c: float, z: float,
                  ctrl: SeriesControl = DEFAULT_CONTROL) -> EvalResult:
    """phi_{p,b,c}(z) = z + sum_{n>=1} (-c)^n z^(n+1) / (n! 4^n (gamma')_n)."""
    shift = p + (b + 1.0) / 2.0
    if shift <= 0 and shift == math.floor(shift):
        raise DomainError("p + (b+1)/2 must not be a non-positive integer")
    _check_z(z)

    def terms() -> Iterator[float]:
        term = z
        n = 0
        while True:
            yield term
            term *= -c * z / ((n + 1) * 4.0 * (shift + n))
            n += 1

    return sum_series(terms(), ctrl)


def k_bessel(k: float, mu: float, g: float, lam: float, z: float,
             ctrl: SeriesControl = DEFAULT_CONTROL) -> EvalResult:
    """k-Bessel function of the first kind.

    sum (g)_{n,k} (-1)^n (z/2)^n / (Gamma_k(lam n + mu + 1) (n!)^2), with the
    single power (z/2)^n exactly as in its defining series.
    """
    if not k > 0:
        raise DomainError("k must be > 0")
    if not lam > 0:
        raise DomainError("lam must be > 0")
    if not mu > 0:
        raise DomainError("mu must be > 0")
    _check_z(z)
    if z == 0:
        return EvalResult(math.exp(-ln_gamma_k(mu + 1.0, k)), 1, 0.0, Status.CONVERGED)
    log_half = math.log(z / 2.0)

    def terms() -> Iterator[float]:
        log_poch, sign = 0.0, 1
        n = 0
        while True:
            log_mag = log_poch + n * log_half - 2 * math.lgamma(n + 1) \
                - ln_gamma_k(lam * n + mu + 1.0, k)
            yield _signed_exp(log_mag, sign * (-1) ** n)
            factor = g + n * k
            if factor == 0:
                sign = 0
            else:
                log_poch += math.log(abs(factor))
                sign *= 1 if factor > 0 else -1
            n += 1

    return sum_series(terms(), ctrl)


def kbessel_log_coefficients(params: KBesselParams) -> Iterator[tuple[float, int]]:
    """Yield ``(log|C_n|, sign C_n)`` for n = 0, 1, 2, ...

    C_n = c^n (g)_{n,k} / ((n!)^2 Gamma_k(lam n + mu + (b+1)/2)). The
    Pochhammer factor is accumulated as a log-sum, so n may run to
    thousands without overflow.
    """
    b, c, g, lam, mu, k = (params.b, params.c, params.g, params.lam,
                           params.mu, params.k)
    shift = params.shift
    log_c = math.log(abs(c)) if c else -math.inf
    log_poch, sign = 0.0, 1
    n = 0
    while True:
        if sign == 0 or (n and c == 0):
            yield -math.inf, 0
        else:
            log_mag = (n * log_c if n else 0.0) + log_poch \
                - 2 * math.lgamma(n + 1) - ln_gamma_k(lam * n + shift, k)
            yield log_mag, sign * (1 if c >= 0 or n % 2 == 0 else -1)
        factor = g + n * k
        if factor == 0:
            sign = 0
        elif sign:
            log_poch += math.log(abs(factor))
            sign *= 1 if factor > 0 else -1
        n += 1


def gen_mod_k_bessel(params: KBesselParams, z: float,
                     ctrl: SeriesControl = DEFAULT_CONTROL) -> EvalResult:
    """Generalized modified k-Bessel function: sum C_n (z/2)^(mu+2n)."""
    _check_z(z)
    flags = _flags_for(params.mu)
    if z == 0:
        return _zero_limit(params.mu, math.exp(-ln_gamma_k(params.shift, params.k))).with_flags(*flags)
    log_half = math.log(z / 2.0)
    mu = params.mu

    def terms() -> Iterator[float]:
        for n, (log_c, sign) in enumerate(kbessel_log_coefficients(params)):
            yield _signed_exp(log_c + (mu + 2 * n) * log_half, sign)

    return sum_series(terms(), ctrl).with_flags(*flags)


def even_power_series(log_coeffs: np.ndarray, signs: np.ndarray, order: float,
                      z: np.ndarray) -> np.ndarray:
    """Vectorized sum_n s_n exp(L_n) (z/2)^(order+2n) over an array of z >= 0.

    The caller supplies enough coefficients for the largest ``z``; the
    terms are summed from the smallest upward.
    """
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    pos = z > 0
    if not np.all(pos):
        if order < 0:
            raise DomainError("series is unbounded at z = 0 for negative order")
        if order == 0 and signs[0] != 0:
            out[~pos] = signs[0] * math.exp(log_coeffs[0])
    zp = z[pos]
    if zp.size:
        log_half = np.log(zp / 2.0)
        n = np.arange(len(log_coeffs))
        live = signs != 0
        log_terms = log_coeffs[live][None, :] + (order + 2 * n[live])[None, :] * log_half[:, None]
        terms = signs[live][None, :] * np.exp(log_terms)
        out[pos] = np.sum(terms[:, ::-1], axis=1)
    return out


def coefficient_table(params: KBesselParams, z_max: float,
                      ctrl: SeriesControl = DEFAULT_CONTROL) -> tuple[np.ndarray, np.ndarray]:
    """Enough k-Bessel coefficients to sum the series on (0, z_max]."""
    log_half = math.log(max(z_max, 1e-300) / 2.0)
    logs, signs = [], []
    small = 0
    peak = -math.inf
    for n, (lc, s) in enumerate(kbessel_log_coefficients(params)):
        logs.append(lc)
        signs.append(s)
        mag = lc + (params.mu + 2 * n) * log_half
        peak = max(peak, mag)
        if s == 0 or mag < peak + math.log(ctrl.rel_tol) - 6:
            small += 1
            if small >= 2:
                break
        else:
            small = 0
        if n >= ctrl.max_terms:
            break
    return np.array(logs), np.array(signs)
