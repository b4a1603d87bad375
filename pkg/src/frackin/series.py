"""Truncation policy, evaluation results and summation shared by every series."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable

EPS = 2.0**-52


class DomainError(ValueError):
    """An argument lies outside the domain where the function is defined."""


class ConvergenceError(RuntimeError):
    """A series that must return a bare number did not converge."""


class Status(enum.Enum):
    CONVERGED = "Converged"
    MAX_TERMS_REACHED = "MaxTermsReached"
    DOMAIN_ERROR = "DomainError"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy for the infinite series.

    ``z_switch`` is the Mittag-Leffler crossover to the asymptotic branch
    (used for ``z < -z_switch``). ``extended_precision`` lets power series
    with heavy cancellation fall back to multiprecision partial sums.
    """

    max_terms: int = 2000
    abs_tol: float = 1e-15
    rel_tol: float = 1e-12
    compensated: bool = True
    z_switch: float = 30.0
    extended_precision: bool = True

    def __post_init__(self) -> None:
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise DomainError("max_terms must be a positive integer")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("abs_tol and rel_tol must be positive")
        if not (self.z_switch > 0 and math.isfinite(self.z_switch)):
            raise DomainError("z_switch must be a positive finite number")

    def threshold(self, value: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))


DEFAULT_CONTROL = SeriesControl()


@dataclass(frozen=True)
class EvalResult:
    """Value of a series together with its convergence diagnostics.

    ``tail_estimate`` bounds the truncated remainder; ``rounding_estimate``
    is a separate estimate of accumulated floating-point error.
    """

    value: float
    terms_used: int
    tail_estimate: float
    status: Status
    rounding_estimate: float = 0.0
    flags: tuple[str, ...] = field(default_factory=tuple)

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    def scaled(self, factor: float) -> "EvalResult":
        return EvalResult(
            self.value * factor,
            self.terms_used,
            self.tail_estimate * abs(factor),
            self.status,
            self.rounding_estimate * abs(factor),
            self.flags,
        )

    def with_flags(self, *flags: str) -> "EvalResult":
        merged = tuple(dict.fromkeys(self.flags + flags))
        return EvalResult(
            self.value, self.terms_used, self.tail_estimate, self.status,
            self.rounding_estimate, merged,
        )


class NeumaierSum:
    """Running compensated sum (Kahan-Babuska / Neumaier)."""

    __slots__ = ("s", "c")

    def __init__(self) -> None:
        self.s = 0.0
        self.c = 0.0

    def add(self, x: float) -> None:
        t = self.s + x
        if abs(self.s) >= abs(x):
            self.c += (self.s - t) + x
        else:
            self.c += (x - t) + self.s
        self.s = t

    @property
    def value(self) -> float:
        return self.s + self.c


def sum_series(
    terms: Iterable,
    ctrl: SeriesControl = DEFAULT_CONTROL,
    *,
    with_envelope: bool = False,
    error_units: float = 8.0,
) -> EvalResult:
    """Sum a unimodal series under the two-consecutive-small-terms rule.

    With ``with_envelope`` the iterable yields ``(term, envelope)`` pairs and
    the envelope (a majorant of the term) drives the stopping test;
    otherwise ``abs(term)`` is used. Stopping also requires the envelope to
    be non-increasing, so a series whose first terms are tiny but still
    growing is not cut short.
    """
    kept: list[float] = []
    running = NeumaierSum()
    abs_total = 0.0
    prev_env = math.inf
    small_run = 0
    status = Status.MAX_TERMS_REACHED
    ratio = 1.0
    last_env = 0.0
    for n, item in enumerate(terms):
        if n >= ctrl.max_terms:
            break
        term, env = item if with_envelope else (item, abs(item))
        kept.append(term)
        running.add(term)
        abs_total += abs(term)
        if prev_env > 0 and math.isfinite(prev_env):
            ratio = env / prev_env
        last_env = env
        thr = ctrl.threshold(running.value)
        if env <= thr and env <= prev_env:
            small_run += 1
            if small_run >= 2 and _tail(env, ratio) <= thr:
                status = Status.CONVERGED
                break
        else:
            small_run = 0
        prev_env = env
    value = math.fsum(kept) if ctrl.compensated else sum(kept)
    tail = _tail(last_env, ratio)
    return EvalResult(
        value=value,
        terms_used=len(kept),
        tail_estimate=tail,
        status=status,
        rounding_estimate=error_units * EPS * abs_total,
    )


def _tail(last: float, ratio: float) -> float:
    """Geometric majorant of the remainder, counting the last kept term."""
    if last == 0.0:
        return 0.0
    if ratio < 1.0:
        return last / (1.0 - ratio)
    return math.inf
