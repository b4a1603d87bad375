import math

import pytest
from hypothesis import given, strategies as st

from frackin.series import (
    DomainError,
    EvalResult,
    NeumaierSum,
    SeriesControl,
    Status,
    sum_series,
)


def geometric(r):
    term = 1.0
    while True:
        yield term
        term *= r


@pytest.mark.parametrize("kwargs", [
    {"max_terms": 0},
    {"max_terms": 2.5},
    {"abs_tol": 0.0},
    {"rel_tol": -1.0},
    {"z_switch": math.inf},
])
def test_control_rejects_bad_values(kwargs):
    with pytest.raises(DomainError):
        SeriesControl(**kwargs)


def test_threshold_is_max_of_abs_and_rel():
    ctrl = SeriesControl(abs_tol=1e-10, rel_tol=1e-3)
    assert ctrl.threshold(1.0) == 1e-3
    assert ctrl.threshold(1e-9) == 1e-10


@pytest.mark.parametrize("r", [0.1, 0.5, -0.5, 0.9])
def test_geometric_series(r):
    res = sum_series(geometric(r))
    assert res.converged
    assert res.value == pytest.approx(1.0 / (1.0 - r), rel=1e-11)
    assert res.tail_estimate <= SeriesControl().threshold(res.value)


def test_max_terms_reported():
    res = sum_series(geometric(1.0), SeriesControl(max_terms=50))
    assert res.status is Status.MAX_TERMS_REACHED
    assert res.terms_used == 50
    assert res.tail_estimate == math.inf


def test_growing_small_terms_are_not_cut_short():
    # 1e-20 * 10^n / n! is tiny at first but peaks near n = 10
    def terms():
        t, n = 1e-20, 0
        while True:
            yield t
            n += 1
            t *= 10.0 / n
    res = sum_series(terms(), SeriesControl(abs_tol=1e-15))
    assert res.value == pytest.approx(1e-20 * math.exp(10.0), rel=1e-12)


def test_exp_series_with_envelope():
    def terms(x):
        t, n = 1.0, 0
        while True:
            yield t, abs(t)
            n += 1
            t *= x / n
    res = sum_series(terms(3.0), with_envelope=True)
    assert res.value == pytest.approx(math.exp(3.0), rel=1e-13)


@given(st.lists(st.floats(-1e10, 1e10, allow_nan=False), max_size=50))
def test_neumaier_matches_fsum(xs):
    acc = NeumaierSum()
    for x in xs:
        acc.add(x)
    assert abs(acc.value - math.fsum(xs)) <= 4 * 2.0**-52 * (abs(math.fsum(xs)) + 1e-300) \
        + 1e-30 * math.fsum(abs(x) for x in xs)


def test_neumaier_recovers_cancelled_bits():
    acc = NeumaierSum()
    for x in (1.0, 1e100, 1.0, -1e100):
        acc.add(x)
    assert acc.value == 2.0


def test_eval_result_scaling_and_flags():
    res = EvalResult(2.0, 3, 0.1, Status.CONVERGED, 0.01, ("a",))
    scaled = res.scaled(-3.0)
    assert scaled.value == -6.0
    assert scaled.tail_estimate == pytest.approx(0.3)
    assert scaled.rounding_estimate == pytest.approx(0.03)
    assert res.with_flags("b", "a").flags == ("a", "b")
    assert str(Status.MAX_TERMS_REACHED) == "MaxTermsReached"
