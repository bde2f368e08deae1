"""Numbered acceptance checks, each returning a pass flag and a detail line.

``run_all`` executes the desk-scale set (everything except the large gas
run) and prints a table; the CLI ``verify`` subcommand wraps it.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from intricacy import algebra, census, contagion, evolution, fields, oracles, profile


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.2f} s)"


# shared small instances
POTENTIAL = evolution.PairPotential(strength=3.0, range=1.0)


def _lattice(grid_points, **kw):
    return evolution.LatticeConfig(n_atoms=2, grid_points=grid_points, initial_string=(1, 0),
                                   **kw)


def check_algebra(tol: float = 1e-12):
    worst = 0.0
    for k in (1, 2, 3):
        worst = max(worst, max(algebra.relation_residuals(algebra.build_atom_operators(k)).values()))
    ops = algebra.build_atom_operators(1)
    pr = algebra.pauli_realization()
    pauli = max(float(np.max(np.abs(pr["P0"] - ops.P[0]))),
                float(np.max(np.abs(pr["P1"] - ops.P[1]))),
                float(np.max(np.abs(pr["S"] - ops.S[1]))))
    mono, ortho = True, True
    for k in (1, 2, 3):
        for (a, b), out in algebra.build_pair_operator(k).transitions().items():
            mixed = a != 0 and b != 0 and a != b
            if mixed:
                ortho &= out is None
            elif out is None or not algebra.dominates(out, (a, b)):
                mono = False
    ok = worst <= tol and pauli <= tol and mono and ortho
    return ok, (f"relation residual {worst:.1e}, Pauli residual {pauli:.1e}, "
                f"monotone {mono}, mixed channels annihilated {ortho}")


def check_consistency(tol_op: float = 1e-12, tol_traj: float = 1e-6):
    res = oracles.intertwining_residual(_lattice(8), POTENTIAL)
    m = evolution.MCoupling(present=True, weights=(0.6, 0.8))
    cfg_m = evolution.LatticeConfig(n_atoms=2, grid_points=8, channels=2)
    res_m = oracles.intertwining_residual(cfg_m, POTENTIAL, m)
    op = max(res["reduced"], res["extended"], res_m["reduced"], res_m["extended"])
    cfg = _lattice(16, t_end=1.0)
    st = evolution.init_state(cfg)
    traj = evolution.evolve(st, POTENTIAL, sample_times=[1.0])
    _, a_red = oracles.projection_matrices(cfg)
    projected = a_red @ traj.states[-1].data.ravel()
    ref = oracles.standard_trajectory(st, POTENTIAL, [1.0])[-1].ravel()
    l2 = float(np.sqrt(np.sum(np.abs(projected - ref) ** 2) * st.cell_volume))
    ok = op <= tol_op and l2 < tol_traj
    return ok, f"max |A H' - H A| = {op:.1e}, L2(A psi'(1) - psi_std(1)) = {l2:.1e}"


def check_dense_oracle(tol: float = 1e-8):
    cfg = _lattice(16, t_end=1.0)
    st = evolution.init_state(cfg)
    times = [0.25, 0.5, 1.0]
    traj = evolution.evolve(st, POTENTIAL, sample_times=times)
    ref = oracles.dense_expm_trajectory(st, POTENTIAL, times)
    err = max(float(np.max(np.abs(s.data - r))) for s, r in zip(traj.states, ref))
    return err < tol, f"max amplitude error {err:.2e} on {st.data.size} amplitudes"


def _measure_runs():
    """A contagion run without M and a two-channel run with M."""
    cfg = _lattice(12, t_end=2.0)
    yield evolution.evolve(evolution.init_state(cfg), POTENTIAL,
                           sample_times=np.linspace(0, 2, 5))
    m = evolution.MCoupling(present=True, weights=(0.6, 0.8))
    cfg_m = evolution.LatticeConfig(n_atoms=2, grid_points=8, channels=2, t_end=2.0)
    yield evolution.evolve(evolution.init_state(cfg_m, m), POTENTIAL,
                           sample_times=np.linspace(0, 2, 5))


def check_measures(tol: float = 1e-12):
    worst_sum, worst_norm, max_int = 0.0, 0.0, 0.0
    for traj in _measure_runs():
        for st in traj.states:
            nrm = evolution.physical_norm(st)
            for atom in range(st.n_atoms):
                for ch in range(1, st.k + 1):
                    m = evolution.intricacy_measures(st, atom, ch)
                    worst_sum = max(worst_sum, abs(m.p1 + m.p0 + m.interference - 1.0))
                    worst_norm = max(worst_norm, abs(m.phys_norm - nrm) / nrm)
                    max_int = max(max_int, abs(m.interference))
    ok = worst_sum <= tol and worst_norm <= tol
    return ok, (f"|p1 + p0 + I - 1| <= {worst_sum:.1e}, norm mismatch {worst_norm:.1e}, "
                f"max |interference| = {max_int:.3e}")


def check_tail_exponent(tol: float = 1e-12):
    q = profile.tail_exponent()
    r3 = 3.0 - math.sqrt(3.0)
    poly = q * q + 2.0 * math.sqrt(3.0) * q - 6.0
    ok = abs(q - r3) <= tol and abs(poly) < tol and abs(profile.characteristic(q)) < tol
    return ok, f"q = {q:.12f}, |q - (3 - sqrt 3)| = {abs(q - r3):.1e}, residual {abs(poly):.1e}"


def check_front_profile():
    p = profile.integrate_front(0.05)
    mono = bool(np.all(np.diff(p.g) <= 0.0))
    d99 = p.distance_to(0.99)
    g0 = p.g_prime_at_front
    ok = mono and d99 <= 8.0 and abs(g0 + 0.06) <= 0.03
    return ok, f"monotone {mono}, g > 0.99 beyond {d99:.3f} behind front, g'(0) = {g0:.4f}"


def constrained_run(dx: float = 0.1, t_end: float = 50.0, half_width: float = 40.0):
    grid = fields.FieldGrid.uniform(half_width, dx)
    con = fields.FrontConstraint(enabled=True)
    times = np.arange(0.0, t_end + 1e-9, 0.5)
    hist = fields.solve_planar_source(grid, 1.0, 1.5 * dx * dx, t_end, constraint=con,
                                      sample_times=times)
    return hist, con


def check_constrained_front(dx: float = 0.1):
    hist, con = constrained_run(dx)
    track = fields.front_track(hist, fields.SUPPORT_THRESHOLD)
    t = hist.times
    sel = (t >= 5.0) & (t <= 50.0)
    target = fields.SOUND_SPEED * t[sel]
    err = max(float(np.max(np.abs(track[sel, 1] - target))),
              float(np.max(np.abs(-track[sel, 0] - target))))
    ok = bool(np.all(np.isfinite(track[sel]))) and err <= dx
    lag = fields.front_lag(hist, con, threshold=1e-3)[-1]
    return ok, (f"max |front - t/sqrt 3| = {err:.4f} (dx = {dx}) for t in [5, 50]; "
                f"f1 = 1e-3 level offset {lag:+.3f} at t = 50")


def unconstrained_speed(dx: float, half_width: float = 80.0, t_end: float = 80.0) -> float:
    grid = fields.FieldGrid.uniform(half_width, dx)
    hist = fields.solve_planar_source(grid, 1.0, 1.5 * dx * dx, t_end,
                                      sample_times=np.arange(0.0, t_end + 1e-9, 1.0))
    return fields.front_speed(hist, threshold=0.5, t_min=0.5 * t_end)


def check_pulled_front(rel: float = 0.05):
    target = fields.pulled_front_speed()
    speeds = [unconstrained_speed(dx) for dx in (0.2, 0.1, 0.05)]
    errs = [abs(s - target) for s in speeds]
    converging = errs[0] > errs[1] > errs[2]
    ok = converging and errs[-1] <= rel * target
    return ok, ("speeds " + ", ".join(f"{s:.4f}" for s in speeds)
                + f" at dx = 0.2, 0.1, 0.05 vs 2 sqrt(1/6) = {target:.4f}")


def check_multichannel(p1: float = 0.3, p2: float = 0.7, seed: float = 0.1):
    grid = fields.FieldGrid.uniform(10.0, 0.1, f1=p1 * seed, f2=p2 * seed)
    hist = fields.solve_multichannel(grid, 0.015, 30.0,
                                     sample_times=np.arange(0.0, 30.0 + 1e-9, 0.5))
    simplex = float(np.max(np.abs(hist.f0 + hist.f1 + hist.f2 - 1.0)))
    end1 = float(np.max(np.abs(hist.f1[-1] - p1)))
    end2 = float(np.max(np.abs(hist.f2[-1] - p2)))
    # total intricacy follows the logistic curve up to the forward-Euler error
    total = hist.f1[:, 0] + hist.f2[:, 0]
    logi = float(np.max(np.abs(total - fields.logistic(hist.times, seed))))
    ok = end1 <= 1e-6 and end2 <= 1e-6 and simplex <= 1e-10 and logi <= 5e-3
    return ok, (f"|f1 - p1| = {end1:.1e}, |f2 - p2| = {end2:.1e}, simplex error {simplex:.1e}, "
                f"logistic deviation {logi:.1e}")


def check_census():
    inp = census.CensusInputs(n_e=2.7e25, v_e=380.0, v_prime=220.0, L=0.1, lambda_mfp=7e-8)
    n = census.wave_census(inp).active_waves
    ok = 1e16 / 5 <= n <= 1e16 * 5
    return ok, f"active waves {n:.2e} (target 1e16 within a factor 5)"


def check_kmc(params: contagion.GasParams | None = None, t_end: float = 30.0):
    """Large gas run with contagion plus a contagion-free control."""
    params = params or contagion.GasParams()
    z0 = 0.5 * params.box[2]
    src = contagion.SourceSpec(geometry="plane", z0=z0, thickness=1.0)
    times = np.arange(0.0, t_end + 1e-9, 1.0)
    out = {}
    for label, flag in (("contagion", True), ("control", False)):
        p = contagion.GasParams(**{**params.__dict__, "contagion": flag})
        ens = contagion.init_gas(p)
        contagion.inject_source(ens, src, channel=1, rng=np.random.default_rng(p.seed + 1))
        hist = contagion.run_contagion(ens, t_end, sample_times=times)
        out[label] = (ens, hist, contagion.fit_front(hist, z0=z0))
    ens, hist, fit = out["contagion"]
    tagged = hist.tag_counts[:, 1]
    monotone = bool(np.all(np.diff(tagged) >= 0))
    e_drift = float(np.max(np.abs(hist.energy / hist.energy[0] - 1.0)))
    e_coll = float(hist.stats["max_energy_err"])
    energy_ok = max(e_drift, e_coll) <= 1e-10
    ballistic = fit.r2 > 0.99
    speed_ok = 0.4 <= fit.speed <= 1.0
    _, chist, cfit = out["control"]
    conserved = bool(np.all(chist.tag_counts[:, 1] == chist.tag_counts[0, 1]))
    sublinear = cfit.exponent < 1.0 and cfit.sqrt_ssr < cfit.linear_ssr
    lam, _ = contagion.measured_mean_free_path(ens, hist)
    ok = monotone and energy_ok and ballistic and speed_ok and sublinear and conserved
    detail = (f"N = {params.n_particles}, lambda = {lam:.3f}; tagged non-decreasing {monotone}; "
              f"energy error {max(e_drift, e_coll):.1e}; front R^2 = {fit.r2:.4f}; "
              f"speed = {fit.speed:.3f} (window {fit.window[0]:g}-{fit.window[1]:g}, "
              f"required 0.4-1.0) {'ok' if speed_ok else 'OUT OF RANGE'}; "
              f"control exponent {cfit.exponent:.2f}, tags conserved {conserved}")
    return ok, detail


CHECKS = {
    1: ("algebra identities", check_algebra),
    2: ("consistency theorem", check_consistency),
    3: ("dense exponential oracle", check_dense_oracle),
    4: ("measure identity", check_measures),
    5: ("tail exponent", check_tail_exponent),
    6: ("front profile", check_front_profile),
    7: ("constrained front speed", check_constrained_front),
    8: ("unconstrained pulled front", check_pulled_front),
    9: ("multichannel limit", check_multichannel),
    10: ("gas contagion kinetics", check_kmc),
    11: ("wave census", check_census),
}

DESK_SET = (1, 2, 3, 4, 5, 6, 7, 8, 9, 11)


def run_check(number: int) -> CheckResult:
    name, fn = CHECKS[number]
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failed check, not a crashed table
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return CheckResult(number, name, bool(ok), detail, time.perf_counter() - t0)


def run_all(numbers=DESK_SET, echo=print) -> list[CheckResult]:
    results = []
    for n in numbers:
        r = run_check(n)
        echo(r.line())
        results.append(r)
    passed = sum(r.passed for r in results)
    echo(f"{passed}/{len(results)} checks passed")
    return results
