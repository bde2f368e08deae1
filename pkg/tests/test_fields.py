import math

import numpy as np
import pytest

from intricacy import fields
from intricacy.fields import FieldGrid, FrontConstraint, StabilityError
from intricacy.profile import integrate_front


def test_step_above_stability_bound_rejected():
    g = FieldGrid.uniform(5.0, 0.1, f1=0.1)
    with pytest.raises(StabilityError, match=r"3 dx\^2"):
        fields.step_fkpp(g, 0.031)
    assert fields.stability_bound(0.1, "radial") == pytest.approx(0.01)


def test_laplacian_of_quadratic_and_constant():
    z = 0.1 * np.arange(-20, 21)
    lap = fields.laplacian(z ** 2, 0.1)
    np.testing.assert_allclose(lap[1:-1], 2.0, rtol=1e-10)
    assert np.all(fields.laplacian(np.full(41, 0.3), 0.1) == 0.0)


@pytest.mark.parametrize("f_start", [0.01, 0.3])
def test_uniform_field_follows_logistic_with_first_order_error(f_start):
    errs = []
    for dt in (0.01, 0.005):
        hist = fields.solve(FieldGrid.uniform(2.0, 0.1, f1=f_start), dt, 8.0, sample_times=[8.0])
        errs.append(abs(hist.f1[-1, 0] - fields.logistic(8.0, f_start)))
    assert errs[0] < 1e-2
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.1)


def test_snapshots_land_on_requested_times():
    hist = fields.solve(FieldGrid.uniform(2.0, 0.1, f1=0.1), 0.015, 1.0,
                        sample_times=[0.0, 0.1, 0.35, 1.0])
    np.testing.assert_array_equal(hist.times, [0.0, 0.1, 0.35, 1.0])


def test_planar_source_validation():
    g = FieldGrid.uniform(5.0, 0.1)
    with pytest.raises(ValueError, match="amplitude"):
        fields.solve_planar_source(g, 1.5, 0.015, 1.0)
    with pytest.raises(ValueError, match="grid node"):
        fields.solve_planar_source(g, 1.0, 0.015, 1.0, z0=0.05)


def test_threshold_crossing_interpolates_and_reports_nan():
    z = np.linspace(0, 1, 11)
    f = 1.0 - z
    assert fields.threshold_crossing(z, f, 0.25) == pytest.approx(0.75)
    assert fields.threshold_crossing(z, f[::-1], 0.25, side="left") == pytest.approx(0.25)
    assert math.isnan(fields.threshold_crossing(z, 0.1 * f, 0.5))


def test_unconstrained_front_near_pulled_speed():
    g = FieldGrid.uniform(60.0, 0.1)
    hist = fields.solve_planar_source(g, 1.0, 0.015, 60.0, sample_times=np.arange(0, 61, 1.0))
    speed = fields.front_speed(hist, 0.5, t_min=30.0)
    assert speed == pytest.approx(fields.pulled_front_speed(), rel=0.05)
    # the free equation outruns the imposed sound-speed front
    assert speed > fields.SOUND_SPEED


@pytest.fixture(scope="module")
def constrained():
    con = FrontConstraint(enabled=True)
    out = {}
    for dx in (0.1, 0.05):
        hist = fields.solve_planar_source(FieldGrid.uniform(40.0, dx), 1.0, 1.5 * dx * dx, 50.0,
                                          constraint=con, sample_times=np.arange(0, 50.5, 0.5))
        out[dx] = hist
    return con, out


def test_constrained_front_moves_at_sound_speed(constrained):
    con, hists = constrained
    hist = hists[0.1]
    lag = fields.front_lag(hist, con)
    sel = hist.times >= 5.0
    assert np.max(np.abs(lag[sel])) <= 0.1
    z = hist.z
    for k, t in enumerate(hist.times):
        lo, hi = con.interval(t)
        assert np.all(hist.f1[k, (z < lo) | (z > hi)] == 0.0)


def test_constrained_front_grid_convergence(constrained):
    con, hists = constrained
    a = fields.front_track(hists[0.1], fields.SUPPORT_THRESHOLD)
    b = fields.front_track(hists[0.05], fields.SUPPORT_THRESHOLD)
    sel = hists[0.1].times >= 5.0
    assert np.max(np.abs(a[sel] - b[sel])) < 2 * 0.1


def test_complete_contagion_behind_constrained_front(constrained):
    con, hists = constrained
    hist = hists[0.1]
    lo, hi = con.interval(50.0)
    inner = (hist.z >= lo + 8) & (hist.z <= hi - 8)
    assert hist.f1[-1, inner].min() >= 0.99


def test_constrained_profile_matches_traveling_wave(constrained):
    con, hists = constrained
    hist = hists[0.1]
    prof = integrate_front(0.05)
    x = hist.z - con.interval(50.0)[1]
    sel = (x >= prof.start) & (x <= 0)
    assert np.max(np.abs(hist.f1[-1, sel] - prof(x[sel]))) < 0.02


def test_multichannel_keeps_ratio_and_simplex():
    g = FieldGrid.uniform(5.0, 0.1, f1=0.03, f2=0.07)
    hist = fields.solve_multichannel(g, 0.015, 30.0, sample_times=np.arange(0, 30.5, 1.0))
    np.testing.assert_allclose(hist.f1[-1], 0.3, atol=1e-6)
    np.testing.assert_allclose(hist.f2[-1], 0.7, atol=1e-6)
    assert np.max(np.abs(hist.f0 + hist.f1 + hist.f2 - 1.0)) <= 1e-10
    np.testing.assert_allclose(hist.f1 / hist.f2, 3 / 7, rtol=1e-12)
    assert hist.meta["f0_laplacian"] == "f0"


def test_two_seeded_channels_stay_inside_their_fronts():
    dx = 0.1
    g = FieldGrid.uniform(30.0, dx, f1=0.0, f2=0.0)
    g.f1[np.argmin(np.abs(g.z + 10))] = 1.0
    g.f2[np.argmin(np.abs(g.z - 10))] = 1.0
    cons = (FrontConstraint(enabled=True, z0=-10.0), FrontConstraint(enabled=True, z0=10.0))
    t_meet = 10.0 / fields.SOUND_SPEED
    hist = fields.solve_multichannel(g, 1.5 * dx * dx, 16.0, cons,
                                     sample_times=np.arange(0, 16.5, 2.0))
    assert hist.times[-1] < t_meet
    for k, t in enumerate(hist.times):
        for f, c in ((hist.f1[k], cons[0]), (hist.f2[k], cons[1])):
            lo, hi = c.interval(t)
            assert np.all(f[(g.z < lo) | (g.z > hi)] == 0.0)
    mid = len(hist.times) // 2
    assert hist.f1[-1].sum() > 10 * hist.f1[mid].sum()
    assert hist.f2[-1].sum() > 10 * hist.f2[mid].sum()


def test_radial_geometry_stable_and_bounded():
    g = FieldGrid.uniform(10.0, 0.1, geometry="radial")
    g.f1[g.z <= 2.0] = 1.0
    hist = fields.solve(g, fields.stability_bound(0.1, "radial"), 5.0, sample_times=[5.0])
    assert hist.f1.min() >= -1e-15 and hist.f1.max() <= 1.0 + 1e-12
    # a ball wider than the critical radius keeps growing outward
    assert fields.threshold_crossing(hist.z, hist.f1[-1], 0.5) > 3.0
