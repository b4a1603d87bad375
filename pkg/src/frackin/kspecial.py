"""Gamma, k-Gamma and (k-)Pochhammer primitives.

The k-Gamma function is evaluated through its scaling relation with the
ordinary Gamma function,

    Gamma_k(x) = k**(x/k - 1) * Gamma(x/k),

which keeps every call on a well-conditioned code path; its integral
definition is only used by the test oracles.
"""

from __future__ import annotations

import math

from .series import DomainError

__all__ = [
    "gamma",
    "ln_gamma",
    "rgamma",
    "gamma_k",
    "ln_gamma_k",
    "pochhammer",
    "pochhammer_k",
    "log_pochhammer_k",
]

# Products longer than this are accumulated as sums of logarithms.
LOG_PRODUCT_THRESHOLD = 170


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def _sinpi(x: float) -> float:
    # sin(pi*x) with the argument reduced first, exact zeros at integers
    r = math.fmod(x, 2.0)
    if r == math.floor(r):
        return 0.0
    return math.sin(math.pi * r)


def gamma(x: float) -> float:
    """Euler Gamma function; negative non-integers go through reflection."""
    if _is_nonpositive_integer(x):
        raise DomainError(f"gamma has a pole at x={x!r}")
    if x > 0:
        try:
            return math.gamma(x)
        except OverflowError:
            return math.inf
    try:
        return math.pi / (_sinpi(x) * math.gamma(1.0 - x))
    except OverflowError:
        return 0.0


def ln_gamma(x: float) -> float:
    if not x > 0:
        raise DomainError(f"ln_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def rgamma(x: float) -> float:
    """Reciprocal Gamma function, entire: zero at the poles of Gamma."""
    if _is_nonpositive_integer(x):
        return 0.0
    if x > 0:
        if x > 171.0:
            return math.exp(-math.lgamma(x))
        return 1.0 / math.gamma(x)
    # 1/Gamma(x) = sin(pi x) Gamma(1 - x) / pi
    return _sinpi(x) * math.exp(math.lgamma(1.0 - x)) / math.pi


def _check_k(k: float) -> None:
    if not k > 0:
        raise DomainError(f"k must be > 0, got {k!r}")


def gamma_k(x: float, k: float = 1.0) -> float:
    """k-Gamma function for x > 0, k > 0.

    Returns ``inf`` when the value exceeds the double range; use
    :func:`ln_gamma_k` there.
    """
    _check_k(k)
    if not x > 0:
        raise DomainError(f"gamma_k requires x > 0, got {x!r}")
    if k == 1.0:
        return gamma(x)
    y = x / k
    try:
        value = k ** (y - 1.0) * math.gamma(y)
    except OverflowError:
        value = math.inf
    if math.isfinite(value) and value != 0.0:
        return value
    log_value = ln_gamma_k(x, k)
    return math.exp(log_value) if log_value < 709.78 else math.inf


def ln_gamma_k(x: float, k: float = 1.0) -> float:
    _check_k(k)
    if not x > 0:
        raise DomainError(f"ln_gamma_k requires x > 0, got {x!r}")
    y = x / k
    return (y - 1.0) * math.log(k) + math.lgamma(y)


def pochhammer(lam: float, n: int) -> float:
    """Rising factorial lam (lam+1) ... (lam+n-1); 1 for n = 0."""
    return pochhammer_k(lam, n, 1.0)


def pochhammer_k(g: float, n: int, k: float = 1.0) -> float:
    """k-Pochhammer symbol g (g+k) ... (g+(n-1)k).

    ``g = 0`` with ``n >= 1`` returns 0. Beyond 170 factors the product is
    accumulated in log space with sign tracking.
    """
    _check_k(k)
    if n < 0 or int(n) != n:
        raise DomainError(f"n must be a non-negative integer, got {n!r}")
    n = int(n)
    if n > LOG_PRODUCT_THRESHOLD:
        logabs, sign = log_pochhammer_k(g, n, k)
        if sign == 0:
            return 0.0
        return sign * math.exp(logabs) if logabs < 709.78 else sign * math.inf
    out = 1.0
    for j in range(n):
        out *= g + j * k
    return out


def log_pochhammer_k(g: float, n: int, k: float = 1.0) -> tuple[float, int]:
    """Return ``(log|(g)_{n,k}|, sign)``; sign is 0 when a factor vanishes."""
    _check_k(k)
    logabs = 0.0
    sign = 1
    for j in range(int(n)):
        f = g + j * k
        if f == 0.0:
            return -math.inf, 0
        if f < 0:
            sign = -sign
        logabs += math.log(abs(f))
    return logabs, sign
