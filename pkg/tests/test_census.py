import math

import pytest
from hypothesis import given, strategies as st

from intricacy.census import CensusInputs, wave_census

ARGON = dict(n_e=2.7e25, v_e=380.0, v_prime=220.0, L=0.1, lambda_mfp=7e-8)


def test_argon_active_waves():
    c = wave_census(CensusInputs(**ARGON))
    assert c.active_waves == pytest.approx(1.89e16, rel=1e-12)
    assert 1e16 / 5 <= c.active_waves <= 5e16


def test_formulas():
    c = wave_census(CensusInputs(n_e=2.0, v_e=3.0, v_prime=5.0, L=7.0, lambda_mfp=11.0))
    assert c.rate_tau_d_inv == 2 * 3 * 49
    assert c.waves_in_box == pytest.approx(2 * 3 / 5 * 343)
    assert c.active_waves == 2 * 49 * 11


@pytest.mark.parametrize("key", list(ARGON))
@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
def test_non_positive_rejected(key, bad):
    with pytest.raises(ValueError, match=key):
        CensusInputs(**{**ARGON, key: bad})


def test_doubling_box():
    a = wave_census(CensusInputs(**ARGON))
    b = wave_census(CensusInputs(**{**ARGON, "L": 0.2}))
    assert b.rate_tau_d_inv / a.rate_tau_d_inv == pytest.approx(4)
    assert b.waves_in_box / a.waves_in_box == pytest.approx(8)
    assert b.active_waves / a.active_waves == pytest.approx(4)


pos = st.floats(1e-3, 1e3)


@given(pos, pos, pos, pos, pos, st.floats(0.1, 10.0))
def test_power_laws(n, ve, vp, L, lam, s):
    base = wave_census(CensusInputs(n, ve, vp, L, lam))
    assert wave_census(CensusInputs(n * s, ve, vp, L, lam)).active_waves == pytest.approx(
        base.active_waves * s)
    assert wave_census(CensusInputs(n, ve * s, vp, L, lam)).rate_tau_d_inv == pytest.approx(
        base.rate_tau_d_inv * s)
    assert wave_census(CensusInputs(n, ve, vp * s, L, lam)).waves_in_box == pytest.approx(
        base.waves_in_box / s)
    assert wave_census(CensusInputs(n, ve, vp, L * s, lam)).waves_in_box == pytest.approx(
        base.waves_in_box * s ** 3)
    assert wave_census(CensusInputs(n, ve, vp, L, lam * s)).active_waves == pytest.approx(
        base.active_waves * s)
    assert base.waves_in_box / base.active_waves == pytest.approx((ve / vp) * L / lam)
