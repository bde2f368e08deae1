"""Explicit finite-difference solver for the intricacy transport equations.

    df1/dt = f1 f0 + D lap f1,   f0 = 1 - f1 (- f2),   D = 1/6

in units of the mean free path and mean free time. Forward Euler with a
central-difference Laplacian and zero-flux ends. An optional moving front
clamps f1 to 0 outside [z0 - v t, z0 + v t] after every step.

The multi-channel system evolves f1 and f2 and sets f0 = 1 - f1 - f2, which
is the same as evolving f0 with -f0 (f1 + f2) + D lap f0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

DIFFUSION = 1.0 / 6.0
SOUND_SPEED = 3.0 ** -0.5
SIMPLEX_TOL = 1e-10
# level used to locate where a clamped field vanishes
SUPPORT_THRESHOLD = 1e-12


class StabilityError(ValueError):
    pass


class SimplexViolation(RuntimeError):
    pass


def stability_bound(dx: float, geometry: str = "planar") -> float:
    """Largest stable forward-Euler step: dx^2 / (2 D) = 3 dx^2 in 1D."""
    b = dx * dx / (2.0 * DIFFUSION)
    # the radial Laplacian's centre node carries a factor 3
    return b / 3.0 if geometry == "radial" else b


@dataclass(frozen=True)
class FrontConstraint:
    enabled: bool = False
    speed: float = SOUND_SPEED
    z0: float = 0.0
    t0: float = 0.0

    def interval(self, t: float) -> tuple[float, float]:
        w = self.speed * max(t - self.t0, 0.0)
        return self.z0 - w, self.z0 + w


@dataclass
class FieldGrid:
    z: np.ndarray
    f1: np.ndarray
    f2: np.ndarray | None = None
    t: float = 0.0
    geometry: str = "planar"  # or "radial" (z is r >= 0, node 0 at r = 0)

    @property
    def dx(self) -> float:
        return float(self.z[1] - self.z[0])

    @property
    def f0(self) -> np.ndarray:
        f0 = 1.0 - self.f1
        if self.f2 is not None:
            f0 = f0 - self.f2
        return f0

    @classmethod
    def uniform(cls, half_width: float, dx: float, f1=0.0, f2=None,
                geometry: str = "planar") -> "FieldGrid":
        if geometry == "radial":
            z = np.arange(0.0, half_width + 0.5 * dx, dx)
        else:
            n = int(round(half_width / dx))
            z = dx * np.arange(-n, n + 1)
        g = cls(z=z, f1=np.full(z.shape, float(f1)),
                f2=None if f2 is None else np.full(z.shape, float(f2)), geometry=geometry)
        return g

    def copy(self) -> "FieldGrid":
        return replace(self, z=self.z, f1=self.f1.copy(),
                       f2=None if self.f2 is None else self.f2.copy())


def laplacian(f: np.ndarray, dx: float, geometry: str = "planar") -> np.ndarray:
    """Central differences with zero-flux ends (ghost node mirrored)."""
    lap = np.empty_like(f)
    lap[1:-1] = f[2:] - 2.0 * f[1:-1] + f[:-2]
    lap[-1] = 2.0 * (f[-2] - f[-1])
    if geometry == "radial":
        r = np.arange(len(f)) * dx
        lap[1:-1] += (f[2:] - f[:-2]) * dx / r[1:-1]
        # regularity at r = 0: lap f -> 3 f''(0)
        lap[0] = 6.0 * (f[1] - f[0])
    else:
        lap[0] = 2.0 * (f[1] - f[0])
    return lap / (dx * dx)


def _clamp(grid: FieldGrid, f: np.ndarray, c: FrontConstraint, t: float):
    if c.enabled:
        lo, hi = c.interval(t)
        z = grid.z
        outside = (z < lo) | (z > hi)
        f[outside] = 0.0


def check_dt(dt: float, dx: float, geometry: str = "planar"):
    bound = stability_bound(dx, geometry)
    if not 0 < dt <= bound * (1 + 1e-12):
        raise StabilityError(f"dt={dt:g} violates the explicit stability bound "
                             f"dt <= 3 dx^2 = {bound:g} (dx={dx:g})")


def step_fkpp(grid: FieldGrid, dt: float, constraint: FrontConstraint = FrontConstraint()
              ) -> FieldGrid:
    """One forward-Euler step of the single-channel equation."""
    check_dt(dt, grid.dx, grid.geometry)
    f = grid.f1
    new = f + dt * (f * (1.0 - f) + DIFFUSION * laplacian(f, grid.dx, grid.geometry))
    out = FieldGrid(z=grid.z, f1=new, f2=None, t=grid.t + dt, geometry=grid.geometry)
    _clamp(out, out.f1, constraint, out.t)
    return out


def step_multichannel(grid: FieldGrid, dt: float,
                      constraints: tuple[FrontConstraint, FrontConstraint] = (
                          FrontConstraint(), FrontConstraint())) -> FieldGrid:
    check_dt(dt, grid.dx, grid.geometry)
    f1, f2 = grid.f1, grid.f2
    f0 = 1.0 - f1 - f2
    n1 = f1 + dt * (f1 * f0 + DIFFUSION * laplacian(f1, grid.dx, grid.geometry))
    n2 = f2 + dt * (f2 * f0 + DIFFUSION * laplacian(f2, grid.dx, grid.geometry))
    out = FieldGrid(z=grid.z, f1=n1, f2=n2, t=grid.t + dt, geometry=grid.geometry)
    _clamp(out, out.f1, constraints[0], out.t)
    _clamp(out, out.f2, constraints[1], out.t)
    return out


@dataclass
class FieldHistory:
    times: np.ndarray
    z: np.ndarray
    f1: np.ndarray           # (T, nz)
    f2: np.ndarray | None    # (T, nz) or None
    dx: float
    dt: float
    meta: dict = field(default_factory=dict)

    @property
    def f0(self) -> np.ndarray:
        f0 = 1.0 - self.f1
        return f0 if self.f2 is None else f0 - self.f2


def _segments(t0, t_end, dt, sample_times):
    """Yield (n_sub, h, t_mark) per interval between sorted sample times.

    Each interval is split into equal steps no longer than ``dt`` so that
    snapshots land exactly on the requested times.
    """
    if sample_times is None:
        sample_times = np.linspace(t0, t_end, 11)
    marks = sorted({float(t) for t in sample_times if t0 <= t <= t_end + 1e-12})
    if not marks or marks[-1] < t_end:
        marks.append(float(t_end))
    t = t0
    for m in marks:
        span = m - t
        n_sub = int(math.ceil(span / dt - 1e-9)) if span > 0 else 0
        yield n_sub, (span / n_sub if n_sub else 0.0), m
        t = m


def _drive(grid, dt, t_end, sample_times, step, clamp):
    g = grid.copy()
    clamp(g)
    t0 = g.t
    wanted = None if sample_times is None else {float(t) for t in sample_times}
    times, snaps = [], []
    if wanted is None or t0 in wanted:
        times.append(t0)
        snaps.append(g)
    for n_sub, h, mark in _segments(t0, t_end, dt, sample_times):
        for s in range(1, n_sub + 1):
            g = step(g, h)
            g.t = mark - (n_sub - s) * h
        g.t = mark
        if wanted is None or mark in wanted:
            if not times or times[-1] != mark:
                times.append(mark)
                snaps.append(g)
    return np.array(times), snaps


def solve(grid: FieldGrid, dt: float, t_end: float, sample_times=None,
          constraint: FrontConstraint = FrontConstraint()) -> FieldHistory:
    """Step the single-channel equation to ``t_end``, snapshotting at ``sample_times``."""
    check_dt(dt, grid.dx, grid.geometry)
    times, snaps = _drive(grid, dt, t_end, sample_times,
                          lambda g, h: step_fkpp(g, h, constraint),
                          lambda g: _clamp(g, g.f1, constraint, g.t))
    return FieldHistory(times=times, z=grid.z, f1=np.array([g.f1 for g in snaps]), f2=None,
                        dx=grid.dx, dt=dt, meta={"constraint": constraint})


def solve_planar_source(grid: FieldGrid, amplitude: float, dt: float, t_end: float,
                        constraint: FrontConstraint = FrontConstraint(), z0: float = 0.0,
                        sample_times=None) -> FieldHistory:
    """Instantaneous plane source: f1(z0, 0+) = amplitude on one node, then evolve."""
    if not 0.0 < amplitude <= 1.0:
        raise ValueError(f"amplitude must lie in (0, 1], got {amplitude}")
    i0 = int(np.argmin(np.abs(grid.z - z0)))
    if abs(grid.z[i0] - z0) > 1e-9 * max(1.0, abs(z0)):
        raise ValueError(f"source position {z0} is not a grid node")
    g = grid.copy()
    g.f1[:] = 0.0
    g.f1[i0] = amplitude
    if constraint.enabled:
        constraint = replace(constraint, z0=z0)
    hist = solve(g, dt, t_end, sample_times, constraint)
    hist.meta.update(source=z0, amplitude=amplitude)
    return hist


def solve_multichannel(grid: FieldGrid, dt: float, t_end: float,
                       constraints: tuple[FrontConstraint, FrontConstraint] = (
                           FrontConstraint(), FrontConstraint()),
                       sample_times=None) -> FieldHistory:
    """Two channels sharing the free population f0 = 1 - f1 - f2."""
    if grid.f2 is None:
        raise ValueError("multichannel solve needs f2")
    check_dt(dt, grid.dx, grid.geometry)
    _check_simplex(grid.f1, grid.f2, grid.t)

    def step(g, h):
        out = step_multichannel(g, h, constraints)
        _check_simplex(out.f1, out.f2, out.t)
        return out

    def clamp(g):
        _clamp(g, g.f1, constraints[0], g.t)
        _clamp(g, g.f2, constraints[1], g.t)

    times, snaps = _drive(grid, dt, t_end, sample_times, step, clamp)
    return FieldHistory(times=times, z=grid.z, f1=np.array([g.f1 for g in snaps]),
                        f2=np.array([g.f2 for g in snaps]), dx=grid.dx, dt=dt,
                        meta={"constraints": constraints, "f0_laplacian": "f0"})


def _check_simplex(f1, f2, t):
    lo = min(f1.min(), f2.min(), (1.0 - f1 - f2).min())
    hi = max(f1.max(), f2.max())
    if lo < -SIMPLEX_TOL or hi > 1.0 + SIMPLEX_TOL:
        raise SimplexViolation(f"fields left the simplex at t={t:g} (min {lo:g}, max {hi:g})")


def threshold_crossing(z: np.ndarray, f: np.ndarray, threshold: float, side: str = "right"
                       ) -> float:
    """Outermost position where ``f`` crosses ``threshold``, linearly interpolated.

    Returns nan when no node reaches the threshold.
    """
    above = np.nonzero(f >= threshold)[0]
    if len(above) == 0:
        return math.nan
    if side == "right":
        i = above[-1]
        if i == len(f) - 1:
            return float(z[i])
        f_in, f_out = f[i], f[i + 1]
        return float(z[i] + (z[i + 1] - z[i]) * (f_in - threshold) / (f_in - f_out))
    i = above[0]
    if i == 0:
        return float(z[0])
    f_in, f_out = f[i], f[i - 1]
    return float(z[i] - (z[i] - z[i - 1]) * (f_in - threshold) / (f_in - f_out))


def front_track(hist: FieldHistory, threshold: float, channel: int = 1) -> np.ndarray:
    """(T, 2) array of left/right threshold crossings for each snapshot."""
    f = hist.f1 if channel == 1 else hist.f2
    return np.array([[threshold_crossing(hist.z, fk, threshold, "left"),
                      threshold_crossing(hist.z, fk, threshold, "right")] for fk in f])


def front_lag(hist: FieldHistory, constraint: FrontConstraint,
              threshold: float = SUPPORT_THRESHOLD, channel: int = 1) -> np.ndarray:
    """Right-front position minus the imposed position z0 + v (t - t0), per snapshot."""
    right = front_track(hist, threshold, channel)[:, 1]
    return right - np.array([constraint.interval(t)[1] for t in hist.times])


def front_speed(hist: FieldHistory, threshold: float = 0.5, t_min: float | None = None,
                source: float = 0.0) -> float:
    """Least-squares slope of the right front over t >= ``t_min`` (default: second half)."""
    right = front_track(hist, threshold)[:, 1] - source
    t = hist.times
    t_min = 0.5 * t[-1] if t_min is None else t_min
    sel = (t >= t_min) & np.isfinite(right)
    return float(np.polyfit(t[sel], right[sel], 1)[0])


def pulled_front_speed(diffusion: float = DIFFUSION, rate: float = 1.0) -> float:
    return 2.0 * math.sqrt(diffusion * rate)


def logistic(t, f_start: float):
    """Closed-form solution of df/dt = f (1 - f)."""
    t = np.asarray(t, dtype=float)
    return f_start / (f_start + (1.0 - f_start) * np.exp(-t))
