import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ffmisinfo.errors import DomainError
from ffmisinfo.special import MLEvalPolicy, _integral, gamma_fn, ml_branch, mittag_leffler


def test_gamma_known_values():
    assert gamma_fn(1) == 1.0
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), abs=1e-10)
    assert gamma_fn(0.5) == pytest.approx(1.7724538509, abs=1e-10)
    assert gamma_fn(5) == pytest.approx(24.0, rel=1e-14)


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5, math.inf, math.nan])
def test_gamma_rejects_nonpositive(x):
    with pytest.raises(DomainError):
        gamma_fn(x)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.8, 1.0, 1.5, 2.0])
def test_ml_at_zero_is_one(alpha):
    assert mittag_leffler(alpha, 0.0) == 1.0


def test_ml_order_one_is_exp():
    assert mittag_leffler(1.0, -1.0) == pytest.approx(0.3678794412, abs=1e-10)
    z = np.linspace(-30, 5, 301)
    assert np.max(np.abs(mittag_leffler(1.0, z) - np.exp(z))) <= 1e-10


def test_ml_order_two_is_cos():
    x = np.linspace(0, 6, 121)
    assert np.max(np.abs(mittag_leffler(2.0, -(x**2)) - np.cos(x))) <= 1e-9


def test_ml_against_frozen_points(ml_oracle):
    for pt in ml_oracle["points"]:
        got = mittag_leffler(pt["alpha"], pt["z"])
        assert got == pytest.approx(pt["E"], abs=1e-8), pt


def test_ml_half_at_minus_one(ml_oracle):
    # erfc-based closed form: E_1/2(-1) = e * erfc(1)
    assert mittag_leffler(0.5, -1.0) == pytest.approx(math.e * math.erfc(1.0), abs=1e-12)


def test_ml_point_eight_at_minus_ten_uses_large_argument_route(ml_oracle):
    ref = next(p["E"] for p in ml_oracle["points"] if p["alpha"] == 0.8 and p["z"] == -10.0)
    assert mittag_leffler(0.8, -10.0) == pytest.approx(ref, abs=1e-8)
    assert ml_branch(0.8, -10.0) in ("asymptotic", "integral")


@pytest.mark.parametrize("alpha", ["0.5", "0.8"])
def test_ml_grid_against_oracle(ml_oracle, alpha):
    g = ml_oracle["grid"][alpha]
    got = mittag_leffler(float(alpha), np.array(g["z"]))
    assert np.max(np.abs(got - np.array(g["E"]))) <= 1e-8


def test_ml_array_shape_preserved():
    z = -np.arange(6.0).reshape(2, 3)
    out = mittag_leffler(0.7, z)
    assert out.shape == (2, 3)
    assert out[0, 0] == 1.0


@pytest.mark.parametrize("alpha", [0.0, -0.5, 2.5, math.nan])
def test_ml_rejects_bad_alpha(alpha):
    with pytest.raises(DomainError):
        mittag_leffler(alpha, -1.0)


@pytest.mark.parametrize("z", [math.nan, math.inf, -math.inf])
def test_ml_rejects_nonfinite_argument(z):
    with pytest.raises(DomainError):
        mittag_leffler(0.5, z)


def test_ml_large_positive_argument_is_refused():
    with pytest.raises(DomainError):
        mittag_leffler(0.5, 60.0)


def test_policy_validation():
    with pytest.raises(DomainError):
        MLEvalPolicy(series_term_cap=0)
    with pytest.raises(DomainError):
        MLEvalPolicy(target_abs_tol=0.0)
    with pytest.raises(DomainError):
        MLEvalPolicy(series_radius=-1.0)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8, 0.95])
def test_ml_routes_agree_where_they_switch(alpha):
    z = np.linspace(-40, 0, 4001)
    names = [ml_branch(alpha, v) for v in z]
    switches = [k for k in range(len(z) - 1) if names[k] != names[k + 1]]
    assert switches, "expected at least one change of evaluation route"
    for k in switches:
        for v in (z[k], z[k + 1]):
            # the quadrature route is valid for every negative argument
            assert abs(mittag_leffler(alpha, v) - _integral(alpha, -v)) <= 1e-7


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(0.1, 1.0), x=st.floats(0.0, 50.0), dx=st.floats(1e-3, 5.0))
def test_ml_nonincreasing_and_in_unit_interval(alpha, x, dx):
    e1 = mittag_leffler(alpha, -x)
    e2 = mittag_leffler(alpha, -(x + dx))
    assert 0.0 < e2 <= e1 + 1e-12
    assert e1 <= 1.0
