"""One function per CLI subcommand: config section in, files out."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from intricacy import census as census_mod
from intricacy import contagion, evolution, fields, plot, profile
from intricacy.config import ExperimentConfig
from intricacy.io import RunManifest, write_csv

log = logging.getLogger(__name__)


# indexed evolution -----------------------------------------------------------

def indexed_setup(sec: dict):
    q = sec["initial_string"].strip()
    cfg = evolution.LatticeConfig(
        n_atoms=sec["n_atoms"], grid_points=sec["grid_points"], box_length=sec["box_length"],
        dt=sec["dt"], t_end=sec["t_end"], channels=sec["channels"], mass=sec["mass"],
        packet_width=sec["packet_width"], packet_momentum=sec["packet_momentum"],
        initial_string=tuple(int(c) for c in q) if q else None)
    pot = evolution.PairPotential(sec["potential_strength"], sec["potential_range"])
    m = evolution.NO_M
    if sec["m_present"]:
        w = tuple(complex(s) for s in sec["m_weights"].split())
        m = evolution.MCoupling(present=True, strength=sec["m_strength"], range=sec["m_range"],
                                center=sec["m_center"], width=sec["m_width"],
                                momentum=sec["m_momentum"], weights=w)
    return cfg, pot, m


def run_indexed(cfg: ExperimentConfig, out: Path, make_plot: bool, man: RunManifest):
    sec = cfg["indexed"]
    lat, pot, m = indexed_setup(sec)
    state = evolution.init_state(lat, m)
    times = np.linspace(0.0, lat.t_end, max(sec["samples"], 2))
    traj = evolution.evolve(state, pot, sample_times=times)
    rows = evolution.measures_table(traj)
    header = ["t", "atom", "channel", "p1", "p0", "interference", "phys_norm"]
    man.add(write_csv(out / "indexed_measures.csv", header, rows))
    # three or more atoms exercise the full operator-sum assembly of the pair coupling
    man.flags["pair_operator_assembly"] = lat.n_atoms >= 3
    if make_plot:
        a0 = [r for r in rows if r["atom"] == 0 and r["channel"] == 1]
        man.add(plot.line_plot([([r["t"] for r in a0], [r["p1"] for r in a0], "atom 0, p1")],
                               out / "indexed_p1.svg", "t", "p1"))
    return 0


# gas contagion -----------------------------------------------------------------

def kmc_setup(sec: dict, seed: int | None = None):
    box = sec["box"]
    params = contagion.GasParams(
        n_particles=sec["n_particles"], box=box, mean_free_path=sec["mean_free_path"],
        seed=sec["seed"] if seed is None else seed, contagion=sec["contagion"],
        mixed_mode=sec["mixed_mode"])
    z0 = sec["source.z0"] if sec["source.z0"] is not None else 0.5 * box[2]
    sources = [(contagion.SourceSpec(geometry=sec["source.geometry"], z0=z0,
                                     thickness=sec["source.thickness"]), 1)]
    if sec["source2.z0"] is not None:
        sources.append((contagion.SourceSpec(geometry="plane", z0=sec["source2.z0"],
                                             thickness=sec["source.thickness"]), 2))
    return params, sources, z0


def run_kmc(cfg: ExperimentConfig, out: Path, make_plot: bool, man: RunManifest,
            seed: int | None = None):
    sec = cfg["kmc"]
    params, sources, z0 = kmc_setup(sec, seed)
    man.seed = params.seed
    ens = contagion.init_gas(params)
    rng = np.random.default_rng(params.seed + 1)
    for src, ch in sources:
        contagion.inject_source(ens, src, channel=ch, rng=rng)
    times = np.arange(0.0, sec["t_end"] + 1e-9, sec["sample_interval"])
    hist = contagion.run_contagion(ens, sec["t_end"], sample_times=times,
                                   bin_width=sec["bin_width"])
    centers = hist.bin_centers
    rows = []
    for k, t in enumerate(hist.times):
        for b, zc in enumerate(centers):
            f = hist.f[k, :, b]
            rows.append([t, zc, f[0], f[1], f[2], hist.counts[k, b]])
    man.add(write_csv(out / "kmc_profiles.csv", ["t", "z_bin_center", "f0", "f1", "f2", "count"],
                      rows))
    try:
        fit = contagion.fit_front(hist, threshold=sec["threshold"], t_min=sec["fit_t_min"], z0=z0)
        speed, r2 = fit.speed, fit.r2
        front = fit.right
        if fit.truncated:
            man.notes.append(f"front reached a wall; fit window {fit.window}")
    except ValueError as exc:
        log.warning("front fit skipped: %s", exc)
        man.notes.append(f"front fit skipped: {exc}")
        speed, r2 = float("nan"), float("nan")
        front = contagion.front_positions(hist, sec["threshold"])[1]
    man.add(write_csv(out / "kmc_summary.csv", ["t", "front_z", "fitted_speed", "r2"],
                      [[t, z, speed, r2] for t, z in zip(hist.times, front)]))
    lam, tau = contagion.measured_mean_free_path(ens, hist)
    man.notes.append(f"measured mean free path {lam:.4f}, mean free time {tau:.4f}")
    man.notes.append(f"max relative energy error per collision {hist.stats['max_energy_err']:.3g}")
    if make_plot:
        man.add(plot.plot_front_track(hist.times, front - z0, out / "kmc_front.svg"))
    return 0


# transport PDE -----------------------------------------------------------------

def run_pde(cfg: ExperimentConfig, out: Path, make_plot: bool, man: RunManifest):
    sec = cfg["pde"]
    dx = sec["dx"]
    dt = sec["dt"] if sec["dt"] is not None else 1.5 * dx * dx
    times = np.arange(0.0, sec["t_end"] + 1e-9, sec["sample_interval"])
    mode = sec["mode"]
    if mode == "source":
        grid = fields.FieldGrid.uniform(sec["half_width"], dx)
        con = fields.FrontConstraint(enabled=sec["constraint.enabled"],
                                     speed=sec["constraint.speed"], z0=sec["source.z0"])
        hist = fields.solve_planar_source(grid, sec["source.amplitude"], dt, sec["t_end"],
                                          constraint=con, z0=sec["source.z0"],
                                          sample_times=times)
        f2 = np.zeros_like(hist.f1)
    elif mode == "multichannel":
        grid = fields.FieldGrid.uniform(sec["half_width"], dx, f1=sec["seed.f1"],
                                        f2=sec["seed.f2"])
        hist = fields.solve_multichannel(grid, dt, sec["t_end"], sample_times=times)
        f2 = hist.f2
        man.flags["simplex_laplacian"] = True
    else:
        raise ValueError(f"unknown pde mode {mode!r}; use source or multichannel")
    f0 = 1.0 - hist.f1 - f2
    rows = [[t, z, f0[k, i], hist.f1[k, i], f2[k, i]]
            for k, t in enumerate(hist.times) for i, z in enumerate(hist.z)]
    man.add(write_csv(out / "pde_fields.csv", ["t", "z", "f0", "f1", "f2"], rows))
    track = fields.front_track(hist, sec["threshold"])
    man.add(write_csv(out / "pde_front.csv", ["t", "front_left", "front_right", "threshold"],
                      [[t, lr[0], lr[1], sec["threshold"]] for t, lr in zip(hist.times, track)]))
    if make_plot:
        speed = sec["constraint.speed"] if mode == "source" and sec["constraint.enabled"] else None
        man.add(plot.plot_front_track(hist.times, track[:, 1] - sec["source.z0"],
                                      out / "pde_front.svg", speed))
    return 0


# front profile -----------------------------------------------------------------

def run_front(cfg: ExperimentConfig, out: Path, make_plot: bool, man: RunManifest):
    sec = cfg["front"]
    prof = profile.integrate_front(sec["C"], sec["x0"], sec["dx"])
    man.add(write_csv(out / "front_profile.csv", ["x", "g"], zip(prof.x, prof.g)))
    man.add(write_csv(out / "front_summary.csv", ["C", "q", "g_prime_at_front"],
                      [[prof.C, prof.q, prof.g_prime_at_front]]))
    print(f"C = {prof.C:g}  q = {prof.q:.5f}  g'(0) = {prof.g_prime_at_front:.4f}")
    if make_plot:
        man.add(plot.plot_profile(prof, out / "front_profile.svg"))
    return 0


# wave census -------------------------------------------------------------------

CENSUS_HEADER = ["n_e", "v_e", "v_prime", "L", "lambda_mfp",
                 "rate_tau_d_inv", "waves_in_box", "active_waves"]


def run_census(cfg: ExperimentConfig, out: Path, make_plot: bool, man: RunManifest):
    sec = cfg["census"]
    inp = census_mod.CensusInputs(**sec)
    res = census_mod.wave_census(inp)
    for line in census_mod.report(inp, res):
        print(line)
    row = [inp.n_e, inp.v_e, inp.v_prime, inp.L, inp.lambda_mfp,
           res.rate_tau_d_inv, res.waves_in_box, res.active_waves]
    print(",".join(CENSUS_HEADER))
    print(",".join(repr(float(v)) for v in row))
    man.add(write_csv(out / "census.csv", CENSUS_HEADER, [row]))
    return 0
