import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from intricacy import profile
from intricacy.profile import integrate_front, tail_exponent


def test_tail_exponent_value():
    q = tail_exponent()
    assert q == pytest.approx(3 - math.sqrt(3), abs=1e-15)
    assert q == pytest.approx(1.26795, abs=5e-6)
    assert abs(q * q + 2 * math.sqrt(3) * q - 6) < 1e-12
    assert abs(profile.characteristic(q)) < 1e-12


def test_negative_root_is_not_returned():
    other = -3 - math.sqrt(3)
    assert abs(profile.characteristic(other)) < 1e-12
    assert tail_exponent() > 0


@pytest.fixture(scope="module")
def fig():
    return integrate_front(0.05)


def test_profile_shape(fig):
    assert fig.x[-1] == 0.0 and fig.g[-1] == 0.0
    assert np.all(np.diff(fig.g) <= 0)
    assert fig.distance_to(0.99) <= 8.0
    assert fig.g[0] == pytest.approx(1 - 0.05 * math.exp(-fig.q * fig.x0), abs=1e-6)
    np.testing.assert_allclose(np.diff(fig.x)[1:], 0.01, atol=1e-9)


def test_front_slope(fig):
    assert fig.g_prime_at_front < 0
    assert fig.g_prime_at_front == pytest.approx(-0.06, abs=0.03)
    # frozen from this solver; the shooting result does not depend on C
    assert fig.g_prime_at_front == pytest.approx(-0.0548129, abs=1e-6)


def test_ode_residual_small(fig):
    assert np.max(np.abs(fig.residual())) < 1e-6


def test_tail_slope_matches_exponent(fig):
    assert profile.tail_slope(fig) == pytest.approx(fig.q, rel=0.01)


def test_amplitude_only_moves_the_start():
    x0 = 6.0
    a = integrate_front(0.05, x0=x0)
    b = integrate_front(0.01, x0=x0)
    assert profile.overlay_error(a, b) < 1e-3
    # smaller C starts closer to g = 1, i.e. further behind the front
    assert b.start - a.start == pytest.approx(-math.log(5) / a.q, abs=0.02)


@settings(max_examples=10, deadline=None)
@given(st.floats(1e-3, 0.2), st.floats(0.0, 4.0))
def test_front_slope_is_independent_of_start(c, extra):
    x0 = max(math.log(c / 0.1) / tail_exponent(), 0.0) + extra
    p = integrate_front(c, x0=x0)
    assert p.g_prime_at_front == pytest.approx(-0.0548129, abs=2e-5 + 0.05 * math.exp(-p.q * x0))


@pytest.mark.parametrize("c", [0.0, -0.1, 0.25])
def test_amplitude_out_of_range(c):
    with pytest.raises(ValueError):
        integrate_front(c)


def test_start_too_close_to_front_rejected():
    with pytest.raises(ValueError, match="deficit"):
        integrate_front(0.2, x0=0.0)


def test_missing_crossing_aborts(monkeypatch):
    monkeypatch.setattr(profile, "SEARCH_SPAN", 1.0)
    with pytest.raises(profile.NoCrossing, match="stayed positive"):
        integrate_front(0.05)
