"""One- and two-parameter Mittag-Leffler functions on the real line.

    E_{alpha,beta}(z) = sum_{n>=0} z**n / Gamma(alpha*n + beta)

The power series is entire. For negative ``z`` it alternates and loses
roughly ``log10(sum |term| / |E|)`` digits; when that loss would exceed the
requested tolerance the partial sums are redone in multiprecision with just
enough digits. Below ``-z_switch`` (and for ``alpha < 2``) the asymptotic
expansion is used instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

from .kspecial import rgamma
from .series import (
    DEFAULT_CONTROL,
    EPS,
    DomainError,
    EvalResult,
    NeumaierSum,
    SeriesControl,
    Status,
)

__all__ = ["MLParams", "ml", "ml_one", "mittag_leffler", "scaled_ml_mp"]

# exp() overflows past this
_LOG_MAX = 700.0


@dataclass(frozen=True)
class MLParams:
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be a positive finite number, got {v!r}")


def ml(
    params: MLParams,
    z: float,
    ctrl: SeriesControl = DEFAULT_CONTROL,
    branch: str = "auto",
) -> EvalResult:
    """Evaluate E_{alpha,beta}(z).

    ``branch`` is ``"auto"``, ``"series"`` or ``"asymptotic"``. The
    asymptotic branch only covers ``z < 0`` with ``alpha < 2``.
    """
    if not math.isfinite(z):
        raise DomainError(f"z must be finite, got {z!r}")
    alpha, beta = params.alpha, params.beta
    if branch == "series":
        return _series(alpha, beta, z, ctrl)
    if branch == "asymptotic":
        if alpha >= 2:
            raise DomainError("asymptotic branch requires alpha < 2")
        if z >= 0:
            raise DomainError("asymptotic branch covers z < 0 only")
        return _asymptotic(alpha, beta, z, ctrl)
    if branch != "auto":
        raise ValueError(f"unknown branch {branch!r}")

    asymptotic_ok = z < 0 and alpha < 2
    if asymptotic_ok and z < -ctrl.z_switch:
        first = _asymptotic(alpha, beta, z, ctrl)
        if first.converged:
            return first
        second = _series(alpha, beta, z, ctrl)
    else:
        first = _series(alpha, beta, z, ctrl)
        if first.converged or not asymptotic_ok:
            return first
        second = _asymptotic(alpha, beta, z, ctrl)
    if second.converged:
        return second
    err = lambda r: r.tail_estimate + r.rounding_estimate  # noqa: E731
    return first if err(first) <= err(second) else second


def ml_one(alpha: float, z: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> EvalResult:
    """Classical Mittag-Leffler function E_alpha(z) = E_{alpha,1}(z)."""
    return ml(MLParams(alpha, 1.0), z, ctrl)


def mittag_leffler(alpha: float, beta: float, z: float,
                   ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Convenience wrapper returning only the value."""
    return ml(MLParams(alpha, beta), z, ctrl).value


# -- power series ------------------------------------------------------------


def _series(alpha: float, beta: float, z: float, ctrl: SeriesControl) -> EvalResult:
    if z == 0.0:
        return EvalResult(rgamma(beta), 1, 0.0, Status.CONVERGED)
    logz = math.log(abs(z))
    negative = z < 0

    kept: list[float] = []
    running = NeumaierSum()
    err_units = 0.0
    prev = math.inf
    ratio = 1.0
    small_run = 0
    status = Status.MAX_TERMS_REACHED
    overflow = False
    last = 0.0
    for n in range(ctrl.max_terms):
        lg = math.lgamma(alpha * n + beta)
        log_mag = n * logz - lg
        if log_mag > _LOG_MAX:
            overflow = True
            break
        mag = math.exp(log_mag)
        kept.append(-mag if negative and n % 2 else mag)
        running.add(kept[-1])
        # absolute error of log_mag in units of EPS, plus rounding of exp
        err_units += mag * (4.0 + n * abs(logz) + abs(lg))
        if prev > 0 and math.isfinite(prev):
            ratio = mag / prev
        last = mag
        thr = ctrl.threshold(running.value)
        if mag <= thr and mag <= prev:
            small_run += 1
            if small_run >= 2 and ratio < 1 and mag / (1 - ratio) <= thr:
                status = Status.CONVERGED
                break
        else:
            small_run = 0
        prev = mag

    if not overflow:
        value = math.fsum(kept) if ctrl.compensated else sum(kept)
        tail = last / (1 - ratio) if ratio < 1 else math.inf
        rounding = EPS * err_units
        result = EvalResult(value, len(kept), tail, status, rounding)
        if (not negative or status is not Status.CONVERGED or not ctrl.extended_precision
                or rounding <= ctrl.threshold(value)):
            return result
    elif not (negative and ctrl.extended_precision and _fits(alpha, beta, logz, ctrl)):
        return EvalResult(math.inf if not negative else math.nan, len(kept),
                          math.inf, Status.MAX_TERMS_REACHED, math.inf, ("overflow",))
    return _series_mp(alpha, beta, z, ctrl)


def _fits(alpha: float, beta: float, logz: float, ctrl: SeriesControl) -> bool:
    """Whether the terms have decayed below abs_tol by n = max_terms - 1.

    Extra digits cannot rescue a series that is cut off while its terms
    are still large.
    """
    n = ctrl.max_terms - 1
    return n * logz - math.lgamma(alpha * n + beta) < math.log(ctrl.abs_tol)


def _log_abs_sum(alpha: float, beta: float, z: float, max_terms: int) -> float:
    """log of sum_n |z|^n / Gamma(alpha n + beta), by a log-domain scan."""
    logz = math.log(abs(z))
    peak = -math.inf
    acc = 0.0  # sum of exp(L - peak)
    for n in range(max_terms):
        L = n * logz - math.lgamma(alpha * n + beta)
        if L > peak:
            acc = acc * math.exp(peak - L) + 1.0 if peak > -math.inf else 1.0
            peak = L
        else:
            acc += math.exp(L - peak)
            if L < peak - 60.0:
                break
    return peak + math.log(acc)


def _rational(alpha: float, max_den: int = 12) -> tuple[int, int] | None:
    frac = Fraction(alpha).limit_denominator(max_den)
    if float(frac) == alpha:
        return frac.numerator, frac.denominator
    return None


def _series_mp(alpha: float, beta: float, z: float, ctrl: SeriesControl) -> EvalResult:
    log10_sum = _log_abs_sum(alpha, beta, z, ctrl.max_terms) / math.log(10)
    target = ctrl.abs_tol
    dps = max(20, math.ceil(log10_sum - math.log10(target)) + 10)
    for _ in range(4):
        value, nterms, tail, status = _mp_partial_sums(alpha, beta, z, ctrl, dps)
        if status is not Status.CONVERGED or not math.isfinite(value):
            break
        target = ctrl.threshold(value)
        needed = math.ceil(log10_sum - math.log10(target)) + 10
        if needed <= dps:
            break
        dps = needed
    rounding = 10.0 ** (log10_sum - dps + 2)
    return EvalResult(value, nterms, tail, status, rounding, ("extended_precision",))


def _precision(bits: int):
    """Context manager running MPFR arithmetic at ``bits`` of precision."""
    return gmpy2.context(gmpy2.get_context(), precision=bits)


def _bits(dps: int) -> int:
    return math.ceil(dps * 3.3220) + 8


def _gamma_ratio_terms(alpha: float, beta: float, scale):
    """Yield scale / Gamma(alpha n + beta) for n = 0, 1, ... in the current context.

    For rational alpha = p/q the Gamma function is only called q times;
    later values follow from Gamma(x + p) = Gamma(x) x (x+1) ... (x+p-1).
    """
    rat = _rational(alpha)
    mb = mpfr(beta)
    if rat is None:
        ma = mpfr(alpha)
        n = 0
        while True:
            yield scale / gmpy2.gamma(ma * n + mb)
            n += 1
    p, q = rat
    ma = mpfr(p) / q
    history: list = []
    n = 0
    while True:
        if n < q:
            r = scale / gmpy2.gamma(ma * n + mb)
        else:
            base = ma * (n - q) + mb
            rising = base
            for j in range(1, p):
                rising *= base + j
            r = history[n - q] / rising
        history.append(r)
        yield r
        n += 1


def _mp_partial_sums(alpha, beta, z, ctrl, dps):
    with _precision(_bits(dps)):
        mz = mpfr(z)
        abs_tol = mpfr(ctrl.abs_tol)
        total = mpfr(0)
        zpow = mpfr(1)
        prev = None
        ratio = mpfr(1)
        small_run = 0
        status = Status.MAX_TERMS_REACHED
        last = mpfr(0)
        n = 0
        recips = _gamma_ratio_terms(alpha, beta, mpfr(1))
        for n in range(ctrl.max_terms):
            term = zpow * next(recips)
            zpow *= mz
            total += term
            mag = abs(term)
            if prev is not None and prev > 0:
                ratio = mag / prev
            last = mag
            thr = max(abs_tol, ctrl.rel_tol * abs(total))
            if mag <= thr and (prev is None or mag <= prev):
                small_run += 1
                if small_run >= 2 and ratio < 1 and mag / (1 - ratio) <= thr:
                    status = Status.CONVERGED
                    break
            else:
                small_run = 0
            prev = mag
        tail = float(last / (1 - ratio)) if ratio < 1 else math.inf
        return float(total), n + 1, tail, status


def scaled_ml_mp(alpha: float, beta: float, z, bits: int):
    """Gamma(beta) * E_{alpha,beta}(z) at ``bits`` of precision.

    ``z`` may be an mpfr. Summation stops once a term is below the working
    precision relative to the running sum of magnitudes. Returns
    ``(value, sum_of_magnitudes)`` as mpfr numbers.
    """
    with _precision(bits):
        mz = mpfr(z)
        tiny = mpfr(2) ** (-bits + 6)
        total = mpfr(0)
        abs_sum = mpfr(0)
        zpow = mpfr(1)
        prev = None
        ratios = _gamma_ratio_terms(alpha, beta, gmpy2.gamma(mpfr(beta)))
        while True:
            term = zpow * next(ratios)
            zpow *= mz
            total += term
            mag = abs(term)
            abs_sum += mag
            if prev is not None and mag <= tiny * abs_sum and mag <= prev:
                break
            prev = mag
        return total, abs_sum


# -- asymptotic expansion ------------------------------------------------------


def _asymptotic(alpha: float, beta: float, z: float, ctrl: SeriesControl) -> EvalResult:
    """E(z) ~ exponential pair - sum_k z^-k / Gamma(beta - alpha k), z -> -inf.

    For 1 <= alpha < 2 the two conjugate exponential contributions are kept
    (half weight on the Stokes line alpha == 1); for alpha < 1 they vanish on
    the negative axis. The algebraic sum is cut at its smallest term.
    """
    x = -z
    logx = math.log(x)
    exp_part = 0.0
    if alpha >= 1.0:
        r = x ** (1.0 / alpha)
        weight = (1.0 if alpha == 1.0 else 2.0) / alpha
        exp_part = (
            weight
            * x ** ((1.0 - beta) / alpha)
            * math.exp(r * math.cos(math.pi / alpha))
            * math.cos(r * math.sin(math.pi / alpha) + math.pi * (1.0 - beta) / alpha)
        )

    kept: list[float] = []
    running = NeumaierSum()
    running.add(exp_part)
    # past this index every Gamma argument is below -1 and the envelope is convex
    monotone_from = math.ceil((beta + 1.0) / alpha) + 1
    last_env = math.inf
    small_run = 0
    status = Status.MAX_TERMS_REACHED
    tail = math.inf
    k = 0
    for k in range(1, ctrl.max_terms + 1):
        y = beta - alpha * k
        rg = rgamma(y)
        if rg == 0.0:
            env = 0.0
        elif y > 0:
            env = abs(rg) * math.exp(-k * logx)
        else:
            env = math.exp(math.lgamma(1.0 - y) - k * logx) / math.pi
        if env != 0.0 and k >= monotone_from and env > last_env:
            tail = last_env
            status = Status.CONVERGED if tail <= ctrl.threshold(running.value) else status
            break
        term = -(-1.0) ** k * rg * math.exp(-k * logx)
        kept.append(term)
        running.add(term)
        if env <= ctrl.threshold(running.value):
            small_run += 1
            if small_run >= 2:
                tail = env if env else (last_env if last_env < math.inf else 0.0)
                tail = min(tail, ctrl.threshold(running.value))
                status = Status.CONVERGED
                break
        else:
            small_run = 0
        if env != 0.0:
            last_env = env
    value = exp_part + (math.fsum(kept) if ctrl.compensated else sum(kept))
    if status is Status.CONVERGED and tail > ctrl.threshold(value):
        status = Status.MAX_TERMS_REACHED
    rounding = EPS * (abs(exp_part) * (4 + x ** (1.0 / alpha)) + math.fsum(abs(t) for t in kept) * 8)
    return EvalResult(value, len(kept), tail, status, rounding, ("asymptotic",))

