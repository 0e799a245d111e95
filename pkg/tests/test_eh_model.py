import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tdbeam.eh_model import EhParams, dc_power, dc_power_derivative, inflection_point

EH = EhParams()


def _dc_mp(q, p=EH):
    """Curve evaluated in 50-digit arithmetic straight from the formula."""
    q_max, a, b = mpmath.mpf(p.q_max), mpmath.mpf(p.a), mpmath.mpf(p.b)
    sig = q_max / (1 + mpmath.exp(-a * (q - b)))
    omega = 1 / (1 + mpmath.exp(a * b))
    return (sig - q_max * omega) / (1 - omega)


def test_published_points():
    assert dc_power(EH, 1.5) == pytest.approx(0.9127, abs=1e-3)
    assert dc_power(EH, 3.0) == pytest.approx(1.9666, abs=1e-3)


def test_against_high_precision_formula():
    with mpmath.workdps(50):
        for q in [0.0, 0.01, 0.7, 1.5, 3.0, 5.365, 9.0, 20.0, 60.0]:
            assert dc_power(EH, q) == pytest.approx(float(_dc_mp(mpmath.mpf(q))), rel=1e-12, abs=1e-15)


def test_zero_input_gives_exact_zero():
    assert dc_power(EH, 0.0) == 0.0
    assert dc_power(EhParams(3.0, 1.7, 0.4), 0.0) == 0.0


def test_saturation():
    assert dc_power(EH, 1e6) == pytest.approx(EH.q_max, rel=1e-15)
    assert dc_power(EH, 60.0) < EH.q_max


def test_array_input_shape():
    q = np.linspace(0, 10, 12).reshape(3, 4)
    out = dc_power(EH, q)
    assert out.shape == (3, 4)
    assert out[0, 0] == 0.0
    assert dc_power_derivative(EH, q).shape == (3, 4)


@pytest.mark.parametrize("bad", [-1e-9, -3.0, float("nan")])
def test_negative_or_nan_rejected(bad):
    with pytest.raises(ValueError):
        dc_power(EH, bad)
    with pytest.raises(ValueError):
        dc_power_derivative(EH, bad)


@pytest.mark.parametrize("kw", [dict(q_max=0), dict(a=-1), dict(b=float("inf"))])
def test_bad_params(kw):
    with pytest.raises(ValueError):
        EhParams(**kw)


def test_from_config_defaults_and_keys():
    assert EhParams.from_config({}) == EH
    p = EhParams.from_config({"q_max_mw": 5, "a_per_mw": 0.5, "b_mw": 2})
    assert (p.q_max, p.a, p.b) == (5.0, 0.5, 2.0)


def test_derivative_at_center():
    expected = EH.q_max * EH.a / (4 * (1 - EH.omega))
    assert dc_power_derivative(EH, EH.b) == pytest.approx(expected, rel=1e-14)
    assert inflection_point(EH) == EH.b


@pytest.mark.parametrize("q", [0.5, 3.0, 8.0, 20.0])
def test_derivative_matches_float_central_difference(q):
    h = 1e-5
    fd = (dc_power(EH, q + h) - dc_power(EH, q - h)) / (2 * h)
    assert dc_power_derivative(EH, q) == pytest.approx(fd, rel=1e-6)


def test_derivative_matches_high_precision_difference_on_grid():
    # in 50 digits the O(h^2) truncation and the cancellation are both negligible
    with mpmath.workdps(50):
        h = mpmath.mpf("1e-12")
        for q in np.linspace(0.01, 50.0, 200):
            qm = mpmath.mpf(float(q))
            fd = (_dc_mp(qm + h) - _dc_mp(qm - h)) / (2 * h)
            assert dc_power_derivative(EH, q) == pytest.approx(float(fd), rel=1e-9)


def test_derivative_tail():
    assert dc_power_derivative(EH, 1e4) == 0.0 or dc_power_derivative(EH, 1e4) < 1e-300
    assert dc_power_derivative(EH, 200.0) > 0


def test_convex_then_concave():
    q = np.linspace(0.0, 40.0, 4001)
    d2 = np.diff(dc_power(EH, q), 2)
    mid = q[1:-1]
    assert np.all(d2[mid < EH.b - 0.02] > 0)
    assert np.all(d2[mid > EH.b + 0.02] < 0)


params = st.builds(EhParams,
                   q_max=st.floats(0.1, 100.0),
                   a=st.floats(0.01, 5.0),
                   b=st.floats(0.05, 50.0))


@settings(max_examples=200, deadline=None)
@given(params, st.floats(0.0, 1e3), st.floats(0.0, 1e3))
def test_monotone_and_bounded(p, x, y):
    lo, hi = sorted((x, y))
    dlo, dhi = dc_power(p, lo), dc_power(p, hi)
    assert 0.0 <= dlo <= dhi <= p.q_max
    # strictly below saturation wherever the logistic tail is representable
    if p.a * (hi - p.b) < 30:
        assert dhi < p.q_max
    assert dc_power_derivative(p, lo) >= 0


@settings(max_examples=100, deadline=None)
@given(params, st.floats(1e-3, 100.0))
def test_strictly_increasing_where_resolvable(p, q):
    if p.a * abs(q - p.b) < 20:
        assert dc_power_derivative(p, q) > 0
        assert dc_power(p, q * 1.01) > dc_power(p, q)


def test_logistic_is_overflow_free():
    p = EhParams(10.0, 5.0, 200.0)      # a*b = 1000 would overflow a naive exp
    assert math.isfinite(p.omega)
    assert dc_power(p, 0.0) == 0.0
    assert dc_power(p, 400.0) == pytest.approx(10.0)


def test_derivative_matches_float_difference_on_grid():
    # with h = 1e-5 in double precision the difference quotient itself loses
    # about 1e-6 relative above ~47 mW, where the slope is below 1e-4
    h = 1e-5
    q = np.linspace(0.01, 45.0, 4500)
    fd = (dc_power(EH, q + h) - dc_power(EH, q - h)) / (2 * h)
    d = dc_power_derivative(EH, q)
    assert np.max(np.abs(d - fd) / d) <= 1e-6
