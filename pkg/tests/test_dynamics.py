import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from loglab.dynamics import (
    ConstantEffort,
    ConstantQuota,
    ModelParams,
    Scheduled,
    State,
    Unexploited,
    closed_form,
    mode_from_dict,
    mode_to_dict,
    per_capita_growth,
    vector_field,
)
from loglab.errors import DomainError, UsageError

# closed form at r=0.1, k=150, x0=30, t=10 evaluated with 34-digit mpmath
# using x0 k e^{rt} / (k + x0 (e^{rt} - 1))
CLOSED_FORM_T10 = 60.69145127875344972316191
# same oracle at t=200: the gap to k is 150 * 4e^{-20} / (1 + 4e^{-20}) ~ 1.24e-6
CLOSED_FORM_T200 = 149.9999987633078367329154


@pytest.mark.parametrize("r,k", [(0, 1), (-1, 1), (1, 0), (1, -2), (math.nan, 1), (1, math.inf)])
def test_params_rejected(r, k):
    with pytest.raises(DomainError):
        ModelParams(r, k)


def test_mode_validation():
    with pytest.raises(DomainError):
        ConstantEffort(-0.1)
    with pytest.raises(DomainError):
        ConstantQuota(-1e-9)
    with pytest.raises(DomainError):
        State(x=-1.0)


def test_vector_field_examples(quota_params):
    p = quota_params
    assert vector_field(p, Unexploited(), 0.8) == 0.0
    assert vector_field(p, ConstantQuota(0.1), 0.4) == pytest.approx(0.0, abs=1e-15)
    assert vector_field(p, ConstantEffort(0.25), 0.4) == pytest.approx(0.0, abs=1e-15)


def test_vector_field_zero_state(quota_params):
    assert vector_field(quota_params, ConstantQuota(0.1), 0.0) == -0.1
    assert vector_field(quota_params, ConstantEffort(0.3), 0.0) == 0.0
    assert vector_field(quota_params, Unexploited(), 0.0) == 0.0


def test_vector_field_errors(quota_params):
    with pytest.raises(DomainError):
        vector_field(quota_params, Unexploited(), -0.1)
    with pytest.raises(UsageError):
        vector_field(quota_params, Unexploited(), 0.1, u=0.01)
    with pytest.raises(UsageError):
        vector_field(quota_params, Scheduled(), 0.1)
    assert vector_field(quota_params, Scheduled(), 0.4, u=0.1) == pytest.approx(0.0, abs=1e-15)


def test_per_capita_examples(quota_params):
    p = quota_params
    assert per_capita_growth(p, Unexploited(), p.k) == 0.0
    assert per_capita_growth(p, ConstantQuota(0.05), 0.117157) == pytest.approx(0.0, abs=1e-5)
    assert per_capita_growth(p, ConstantEffort(0.25), 0.2) == pytest.approx(0.125, rel=1e-14)
    with pytest.raises(DomainError):
        per_capita_growth(p, ConstantQuota(0.05), 0.0)


@settings(max_examples=300)
@given(
    r=st.floats(0.01, 5),
    k=st.floats(0.01, 100),
    frac=st.floats(1e-3, 5),
    e=st.floats(0, 5),
    h=st.floats(0, 5),
)
def test_field_factorises(r, k, frac, e, h):
    p = ModelParams(r, k)
    x = frac * k
    for mode in (Unexploited(), ConstantEffort(e), ConstantQuota(h)):
        lhs = vector_field(p, mode, x)
        rhs = x * per_capita_growth(p, mode, x)
        scale = max(abs(lhs), p.r * x, getattr(mode, "h", 0.0), 1e-300)
        assert abs(lhs - rhs) <= 1e-12 * scale


def test_closed_form_examples(logistic_params):
    assert closed_form(logistic_params, 150.0, 37.0) == 150.0
    assert closed_form(logistic_params, 30.0, 200.0) == pytest.approx(CLOSED_FORM_T200, rel=1e-13)
    assert abs(closed_form(logistic_params, 30.0, 250.0) - 150.0) < 1e-6
    assert closed_form(logistic_params, 30.0, 10.0) == pytest.approx(CLOSED_FORM_T10, rel=1e-12)


def test_closed_form_large_t_no_overflow(logistic_params):
    with np.errstate(over="raise"):
        assert closed_form(logistic_params, 30.0, 1e6) == 150.0
        assert closed_form(logistic_params, 300.0, 1e6) == 150.0


def test_closed_form_errors(logistic_params):
    with pytest.raises(DomainError):
        closed_form(logistic_params, 0.0, 1.0)
    with pytest.raises(DomainError):
        closed_form(logistic_params, 10.0, -1.0)


# starts near k make |f| comparable to the finite-difference rounding noise
@pytest.mark.parametrize("x0", [1.0, 30.0, 75.0, 300.0, 400.0])
def test_closed_form_satisfies_ode(logistic_params, x0):
    h = 1e-6
    ts = np.linspace(h, 100.0, 2001)
    deriv = (closed_form(logistic_params, x0, ts + h) - closed_form(logistic_params, x0, ts - h)) / (2 * h)
    field = vector_field(logistic_params, Unexploited(), closed_form(logistic_params, x0, ts))
    scale = np.maximum(np.abs(field), 1e-6 * logistic_params.r * logistic_params.k)
    assert np.max(np.abs(deriv - field) / scale) <= 1e-4


@pytest.mark.parametrize("x0", [1.0, 30.0, 149.0, 151.0, 400.0])
def test_closed_form_monotone_and_bounded(logistic_params, x0):
    # stop before the solution saturates to k in floating point
    ts = np.linspace(0.0, 150.0, 3001)
    xs = closed_form(logistic_params, x0, ts)
    steps = np.diff(xs)
    if x0 < logistic_params.k:
        assert np.all(steps > 0)
    else:
        assert np.all(steps < 0)
    assert np.all(xs > 0) and np.all(xs <= max(x0, logistic_params.k))
    assert np.all(xs[1:] < max(x0, logistic_params.k))


def test_mode_dict_roundtrip():
    for mode in (Unexploited(), ConstantEffort(0.25), ConstantQuota(0.1)):
        assert mode_from_dict(mode_to_dict(mode)) == mode
