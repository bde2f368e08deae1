import math
import warnings

import numpy as np
import pytest

from intricacy import contagion as kc
from intricacy.contagion import GasEnsemble, GasParams, SourceSpec


def pair(v1, v2, tags=(1, 0), r1=(2.0, 2.0, 3.0), r2=(2.0, 2.0, 5.0), **kw):
    return GasEnsemble.from_arrays([r1, r2], [v1, v2], box=(5.0, 5.0, 10.0), sigma=0.5,
                                   tag=list(tags), **kw)


def test_head_on_collision_swaps_velocities_and_spreads_tag():
    ens = pair((0, 0, 1), (0, 0, -1))
    kc.run_contagion(ens, 0.7, sample_times=[0.7])
    assert ens.stats["collisions"] == 0
    kc.run_contagion(ens, 1.0, sample_times=[1.0])
    assert ens.stats["collisions"] == 1
    np.testing.assert_allclose(ens.v, [[0, 0, -1], [0, 0, 1]], atol=1e-14)
    # contact at t = 0.75, then 0.25 of separation
    np.testing.assert_allclose(ens.r[:, 2], [3.5, 4.5], atol=1e-12)
    assert ens.tag.tolist() == [1, 1]


def test_contagion_disabled_keeps_tags():
    ens = pair((0, 0, 1), (0, 0, -1), contagion=False)
    kc.run_contagion(ens, 1.0, sample_times=[1.0])
    assert ens.tag.tolist() == [1, 0]
    assert ens.stats["collisions"] == 1


def test_mixed_channels_scatter_without_retagging():
    ens = pair((0, 0, 1), (0, 0, -1), tags=(1, 2))
    kc.run_contagion(ens, 1.0, sample_times=[1.0])
    assert ens.tag.tolist() == [1, 2]
    np.testing.assert_allclose(ens.v[:, 2], [-1, 1])


def test_mixed_channels_pass_through_in_pass_mode():
    ens = pair((0, 0, 1), (0, 0, -1), tags=(1, 2), mixed_mode="pass")
    kc.run_contagion(ens, 1.0, sample_times=[1.0])
    np.testing.assert_allclose(ens.v[:, 2], [1, -1])
    np.testing.assert_allclose(ens.r[:, 2], [4.0, 4.0], atol=1e-12)


def test_wall_reflection():
    ens = GasEnsemble.from_arrays([(2, 2, 8.0), (2, 2, 2.0)], [(0, 0, 1), (0, 0, 0)],
                                  box=(5, 5, 10), sigma=0.5)
    kc.run_contagion(ens, 3.0, sample_times=[3.0])
    # contact with the wall at z = 9.75 after 1.75, then 1.25 back
    assert ens.r[0, 2] == pytest.approx(8.5, abs=1e-12)
    assert ens.v[0, 2] == -1.0
    assert ens.stats["walls"] == 1


def test_periodic_wrap_in_x():
    ens = GasEnsemble.from_arrays([(4.5, 2, 5.0), (1.0, 4, 2.0)], [(1, 0, 0), (0, 0, 0)],
                                  box=(5, 5, 10), sigma=0.5)
    kc.run_contagion(ens, 1.0, sample_times=[1.0])
    assert ens.r[0, 0] == pytest.approx(0.5, abs=1e-12)


def test_sigma_realises_target_mean_free_path():
    p = GasParams(n_particles=20_000, box=(8, 8, 40))
    phi = math.pi * p.density * p.sigma ** 3 / 6
    lam = 1 / (math.sqrt(2) * math.pi * p.density * p.sigma ** 2 * kc.enskog_chi(phi))
    assert lam == pytest.approx(1.0, rel=1e-12)


def test_packing_cap_enforced():
    with pytest.raises(ValueError, match="packing"):
        GasParams(n_particles=100, box=(5, 5, 5))


@pytest.fixture(scope="module")
def gas():
    return kc.init_gas(GasParams(n_particles=20_000, box=(8, 8, 40), seed=7))


def test_initial_gas_has_no_overlaps_and_unit_mean_speed(gas):
    assert len(kc._overlapping_pairs(gas.r, gas.box, gas.sigma)) == 0
    assert np.all(gas.r[:, 2] >= 0.5 * gas.sigma)
    assert np.linalg.norm(gas.v, axis=1).mean() == pytest.approx(1.0, rel=0.02)
    np.testing.assert_allclose(gas.momentum(), 0.0, atol=1e-9)


def test_plane_source_tags_slab(gas):
    ens = GasEnsemble(**{**gas.__dict__, "tag": gas.tag.copy()})
    kc.inject_source(ens, SourceSpec(z0=20.0, thickness=1.0))
    inside = np.abs(ens.r[:, 2] - 20.0) <= 0.5
    assert np.array_equal(ens.tag == 1, inside)


def test_two_sources_are_disjoint(gas):
    ens = GasEnsemble(**{**gas.__dict__, "tag": gas.tag.copy()})
    kc.inject_source(ens, SourceSpec(z0=10.0), channel=1)
    kc.inject_source(ens, SourceSpec(z0=30.0), channel=2)
    c = ens.tag_counts()
    assert c[1] > 0 and c[2] > 0
    assert np.all(np.abs(ens.r[ens.tag == 1, 2] - 10.0) <= 0.5)
    assert np.all(np.abs(ens.r[ens.tag == 2, 2] - 30.0) <= 0.5)


def test_empty_source_warns_and_does_nothing(gas):
    ens = GasEnsemble(**{**gas.__dict__, "tag": gas.tag.copy()})
    with pytest.warns(UserWarning, match="empty"):
        kc.inject_source(ens, SourceSpec(z0=20.0, thickness=0.0))
    assert ens.tag.sum() == 0
    with pytest.raises(ValueError):
        kc.inject_source(ens, SourceSpec(z0=20.0), channel=3)


@pytest.fixture(scope="module")
def small_run():
    p = GasParams(n_particles=20_000, box=(8, 8, 40), seed=11)
    ens = kc.init_gas(p)
    kc.inject_source(ens, SourceSpec(z0=20.0))
    hist = kc.run_contagion(ens, 10.0, sample_times=np.arange(0, 10.5, 1.0))
    return ens, hist


def test_small_run_conserves_energy_and_grows_tags(small_run):
    ens, hist = small_run
    assert np.all(np.diff(hist.tag_counts[:, 1]) >= 0)
    assert hist.tag_counts[-1, 1] > 3 * hist.tag_counts[0, 1]
    assert np.max(np.abs(hist.energy / hist.energy[0] - 1)) < 1e-10
    assert hist.stats["max_energy_err"] < 1e-10
    np.testing.assert_allclose(hist.f.sum(axis=1)[hist.counts > 0], 1.0)


def test_measured_mean_free_path_near_target(small_run):
    ens, hist = small_run
    lam, tau = kc.measured_mean_free_path(ens, hist)
    assert lam == pytest.approx(1.0, rel=0.05)


def test_same_seed_same_trajectory():
    def go():
        ens = kc.init_gas(GasParams(n_particles=3000, box=(6, 6, 20), seed=5))
        kc.inject_source(ens, SourceSpec(z0=10.0))
        return kc.run_contagion(ens, 3.0, sample_times=[1.0, 2.0, 3.0]), ens
    (h1, e1), (h2, e2) = go(), go()
    assert np.array_equal(h1.f, h2.f)
    assert np.array_equal(e1.r, e2.r) and np.array_equal(e1.tag, e2.tag)


def synthetic(speed=0.6, z0=30.0):
    edges = np.arange(-0.15, 60.0, 0.3)
    centers = 0.5 * (edges[1:] + edges[:-1])
    times = 0.5 * np.arange(0, 30)
    f = np.zeros((len(times), 3, len(centers)))
    for k, t in enumerate(times):
        f[k, 1] = np.abs(centers - z0) <= speed * t + 1e-9
    f[:, 0] = 1 - f[:, 1]
    return kc.ContagionHistory(times=times, bin_edges=edges, f=f,
                               counts=np.ones((len(times), len(centers))),
                               tag_counts=np.zeros((len(times), 3)), energy=np.ones(len(times)),
                               box=np.array([1, 1, 60.0]), n_particles=1, stats={})


def test_fit_front_recovers_synthetic_line():
    fit = kc.fit_front(synthetic(), t_min=5.0)
    assert fit.speed == pytest.approx(0.6, abs=1e-9)
    assert fit.linear_ssr < 1e-15
    assert fit.r2 == pytest.approx(1.0)
    assert not fit.truncated


def test_fit_front_truncates_at_wall():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fit = kc.fit_front(synthetic(speed=2.5), t_min=1.0)
    assert fit.truncated
    assert fit.window[1] < 12.0
