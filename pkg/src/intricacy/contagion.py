"""Hard-sphere gas in which intricacy spreads by collision contagion.

Units: lengths in mean free paths, times in mean free times, mean speed 1.
The box is periodic in x and y with reflecting walls in z, so a tagged slab
at z0 launches two planar fronts travelling toward the walls.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from intricacy import _events as ev

log = logging.getLogger(__name__)

MAX_PACKING = 0.05
# Maxwell-Boltzmann per-component std giving mean speed 1
COMPONENT_STD = math.sqrt(math.pi / 8.0)
SOUND_SPEED = 3.0 ** -0.5
MAX_CHANNELS = 2


class EventQueueError(RuntimeError):
    pass


def enskog_chi(phi: float) -> float:
    """Carnahan-Starling contact value of the pair distribution."""
    return (1.0 - 0.5 * phi) / (1.0 - phi) ** 3


@dataclass(frozen=True)
class GasParams:
    n_particles: int = 100_000
    box: tuple[float, float, float] = (8.0, 8.0, 80.0)
    mean_free_path: float = 1.0
    seed: int = 12345
    contagion: bool = True
    mixed_mode: str = "scatter"  # or "pass": mixed-channel pairs do not interact
    cell_target: float = 0.4

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError("n_particles must be positive")
        if len(self.box) != 3 or min(self.box) <= 0:
            raise ValueError("box needs three positive lengths")
        if self.mixed_mode not in ("scatter", "pass"):
            raise ValueError(f"unknown mixed_mode {self.mixed_mode!r}")
        if self.packing_fraction > MAX_PACKING:
            raise ValueError(
                f"packing fraction {self.packing_fraction:.4f} exceeds cap {MAX_PACKING}")

    @property
    def density(self) -> float:
        return self.n_particles / float(np.prod(self.box))

    @property
    def sigma(self) -> float:
        """Sphere diameter realising the target mean free path.

        Solves lambda = 1 / (sqrt(2) pi n sigma^2 chi(phi)) by fixed point.
        """
        n = self.density
        sig = (1.0 / (math.sqrt(2.0) * math.pi * n * self.mean_free_path)) ** 0.5
        for _ in range(50):
            phi = math.pi * n * sig ** 3 / 6.0
            sig = (1.0 / (math.sqrt(2.0) * math.pi * n * self.mean_free_path
                          * enskog_chi(phi))) ** 0.5
        return sig

    @property
    def packing_fraction(self) -> float:
        """Dilute-limit estimate (no contact-value correction)."""
        n = self.density
        sig = (1.0 / (math.sqrt(2.0) * math.pi * n * self.mean_free_path)) ** 0.5
        return math.pi * n * sig ** 3 / 6.0

    @property
    def sound_speed(self) -> float:
        return SOUND_SPEED


@dataclass
class GasEnsemble:
    """Positions, velocities and tags; positions refer to time ``t``."""

    r: np.ndarray
    v: np.ndarray
    tag: np.ndarray
    box: np.ndarray
    sigma: float
    t: float = 0.0
    contagion: bool = True
    mixed_mode: str = "scatter"
    cell_target: float = 0.4
    stats: dict = field(default_factory=lambda: {
        "collisions": 0, "infections": 0, "walls": 0, "crossings": 0, "events": 0,
        "max_energy_err": 0.0, "max_momentum_err": 0.0})

    @property
    def n(self) -> int:
        return self.r.shape[0]

    def kinetic_energy(self) -> float:
        return 0.5 * float(np.sum(self.v * self.v))

    def momentum(self) -> np.ndarray:
        return self.v.sum(axis=0)

    def tag_counts(self, channels: int = MAX_CHANNELS) -> np.ndarray:
        return np.bincount(self.tag, minlength=channels + 1)[: channels + 1]

    @classmethod
    def from_arrays(cls, r, v, box, sigma, tag=None, **kw) -> "GasEnsemble":
        r = np.array(r, dtype=float).reshape(-1, 3)
        v = np.array(v, dtype=float).reshape(-1, 3)
        tag = np.zeros(len(r), dtype=np.int64) if tag is None else np.array(tag, dtype=np.int64)
        return cls(r=r, v=v, tag=tag, box=np.array(box, dtype=float), sigma=float(sigma), **kw)


def init_gas(params: GasParams, max_attempts: int = 200) -> GasEnsemble:
    rng = np.random.default_rng(params.seed)
    box = np.asarray(params.box, dtype=float)
    sigma = params.sigma
    n = params.n_particles
    lo = np.array([0.0, 0.0, 0.5 * sigma])
    hi = np.array([box[0], box[1], box[2] - 0.5 * sigma])
    r = lo + rng.random((n, 3)) * (hi - lo)
    for _ in range(max_attempts):
        pairs = _overlapping_pairs(r, box, sigma)
        if len(pairs) == 0:
            break
        bad = np.unique(pairs[:, 1])
        r[bad] = lo + rng.random((len(bad), 3)) * (hi - lo)
    else:
        raise RuntimeError(f"could not place {n} non-overlapping spheres "
                           f"in {max_attempts} attempts")
    v = rng.normal(0.0, COMPONENT_STD, size=(n, 3))
    if n > 1:
        v -= v.mean(axis=0)
    return GasEnsemble(r=r, v=v, tag=np.zeros(n, dtype=np.int64), box=box, sigma=sigma,
                       contagion=params.contagion, mixed_mode=params.mixed_mode,
                       cell_target=params.cell_target)


def _overlapping_pairs(r, box, sigma):
    # cKDTree periodic boxsize needs every axis periodic; give z a huge period
    boxsize = np.array([box[0], box[1], 4.0 * box[2]])
    rr = r.copy()
    rr[:, 0] %= box[0]
    rr[:, 1] %= box[1]
    tree = cKDTree(rr, boxsize=boxsize)
    return tree.query_pairs(sigma * (1.0 - 1e-12), output_type="ndarray")


@dataclass(frozen=True)
class SourceSpec:
    geometry: str = "plane"  # plane | line | point
    z0: float | None = None
    thickness: float = 1.0
    start: tuple[float, float, float] | None = None
    end: tuple[float, float, float] | None = None
    center: tuple[float, float, float] | None = None
    radius: float = 1.0
    fraction: float = 1.0


def source_mask(ens: GasEnsemble, source: SourceSpec) -> np.ndarray:
    r = ens.r
    if source.geometry == "plane":
        z0 = 0.5 * ens.box[2] if source.z0 is None else source.z0
        if not 0.0 <= z0 <= ens.box[2]:
            raise ValueError("source plane outside the box")
        return np.abs(r[:, 2] - z0) <= 0.5 * source.thickness
    if source.geometry == "point":
        c = np.asarray(source.center if source.center is not None else 0.5 * ens.box)
        d = _min_image(r - c, ens.box)
        return np.einsum("ij,ij->i", d, d) <= source.radius ** 2
    if source.geometry == "line":
        if source.start is None or source.end is None:
            raise ValueError("line source needs start and end")
        a = np.asarray(source.start, dtype=float)
        b = np.asarray(source.end, dtype=float)
        ab = b - a
        s = np.clip(((r - a) @ ab) / max(ab @ ab, 1e-300), 0.0, 1.0)
        d = r - (a + s[:, None] * ab)
        return np.einsum("ij,ij->i", d, d) <= source.radius ** 2
    raise ValueError(f"unknown source geometry {source.geometry!r}")


def _min_image(d, box):
    d = d.copy()
    d[:, :2] -= box[:2] * np.rint(d[:, :2] / box[:2])
    return d


def inject_source(ens: GasEnsemble, source: SourceSpec, channel: int = 1,
                  rng: np.random.Generator | None = None) -> GasEnsemble:
    """Tag the untagged particles inside ``source`` with ``channel`` (in place)."""
    if not 1 <= channel <= MAX_CHANNELS:
        raise ValueError(f"channel must be in 1..{MAX_CHANNELS}")
    if source.geometry == "plane" and source.thickness <= 0.0 or \
            source.geometry != "plane" and source.radius <= 0.0:
        warnings.warn("empty source region; nothing tagged", stacklevel=2)
        return ens
    mask = source_mask(ens, source) & (ens.tag == 0)
    if source.fraction < 1.0:
        rng = rng or np.random.default_rng(0)
        mask &= rng.random(ens.n) < source.fraction
    if not mask.any():
        warnings.warn("source region contains no particles; nothing tagged", stacklevel=2)
        return ens
    ens.tag[mask] = channel
    return ens


@dataclass
class ContagionHistory:
    times: np.ndarray            # (T,)
    bin_edges: np.ndarray        # (B+1,)
    f: np.ndarray                # (T, channels+1, B)
    counts: np.ndarray           # (T, B)
    tag_counts: np.ndarray       # (T, channels+1)
    energy: np.ndarray           # (T,)
    box: np.ndarray
    n_particles: int
    stats: dict

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    def mean_free_time(self, mean_speed: float = 1.0) -> float:
        """tau = N T / (2 collisions); each collision ends two free flights."""
        c = self.stats["collisions"]
        if c == 0:
            return math.inf
        span = self.stats["t_end"] - self.stats["t_start"]
        return self.n_particles * span / (2.0 * c)


class _Kernel:
    """Owns the numba arrays for one ensemble while it runs."""

    def __init__(self, ens: GasEnsemble):
        self.ens = ens
        box = ens.box
        width_target = max(ens.sigma * 1.0001, ens.cell_target)
        ncell = np.maximum(np.floor(box / width_target).astype(np.int64), 1)
        if np.any(ncell < 3):
            ncell = np.maximum(ncell, 3)
            if np.any(box / ncell < ens.sigma):
                raise ValueError("box too small for the cell grid (need >= 3 sigma per side)")
        self.ncell = ncell
        self.width = box / ncell
        n = ens.n
        ens.r[:, 0] %= box[0]
        ens.r[:, 1] %= box[1]
        self.tl = np.full(n, ens.t)
        self.cell = np.zeros((n, 3), dtype=np.int64)
        self.head = np.full(int(np.prod(ncell)), -1, dtype=np.int64)
        self.nxt = np.full(n, -1, dtype=np.int64)
        self.prv = np.full(n, -1, dtype=np.int64)
        self.count = np.zeros(n, dtype=np.int64)
        self.ev_t = np.zeros(n)
        self.ev_p = np.zeros(n, dtype=np.int64)
        self.ev_c = np.zeros(n, dtype=np.int64)
        self.heap = np.zeros(n, dtype=np.int64)
        self.hpos = np.zeros(n, dtype=np.int64)
        self.istats = np.zeros(5, dtype=np.int64)
        self.fstats = np.zeros(2)
        self.mixed = ev.MIXED_PASS if ens.mixed_mode == "pass" else ev.MIXED_SCATTER
        ev.build_cells(ens.r, self.cell, ncell, self.width, self.head, self.nxt, self.prv)
        ev.predict_all(ens.t, ens.r, ens.v, self.tl, ens.tag, self.cell, ncell, self.width,
                       box, ens.sigma, self.mixed, self.head, self.nxt, self.count,
                       self.ev_t, self.ev_p, self.ev_c)
        ev.heap_build(self.heap, self.hpos, self.ev_t)

    def advance_to(self, t_stop: float):
        e = self.ens
        status = ev.run_until(t_stop, e.r, e.v, self.tl, e.tag, self.cell, self.ncell,
                              self.width, e.box, e.sigma, e.contagion, self.mixed,
                              self.head, self.nxt, self.prv, self.count, self.ev_t,
                              self.ev_p, self.ev_c, self.heap, self.hpos, self.istats,
                              self.fstats)
        if status != 0:
            raise EventQueueError(
                f"event queue inconsistent near t={t_stop}: an event was scheduled in the past")
        e.t = t_stop

    def positions(self, t: float) -> np.ndarray:
        e = self.ens
        r = e.r + e.v * (t - self.tl)[:, None]
        r[:, 0] %= e.box[0]
        r[:, 1] %= e.box[1]
        return r

    def sync(self):
        """Bring every stored position to the ensemble time."""
        e = self.ens
        e.r[:] = self.positions(e.t)
        self.tl[:] = e.t
        s = e.stats
        s["collisions"] += int(self.istats[ev.S_COLLISIONS])
        s["infections"] += int(self.istats[ev.S_INFECTIONS])
        s["walls"] += int(self.istats[ev.S_WALLS])
        s["crossings"] += int(self.istats[ev.S_CROSSINGS])
        s["events"] += int(self.istats[ev.S_EVENTS])
        s["max_energy_err"] = max(s["max_energy_err"], float(self.fstats[ev.F_ENERGY_ERR]))
        s["max_momentum_err"] = max(s["max_momentum_err"], float(self.fstats[ev.F_MOMENTUM_ERR]))
        self.istats[:] = 0
        self.fstats[:] = 0.0


def _bin(z, tag, edges, channels):
    nb = len(edges) - 1
    idx = np.clip(np.searchsorted(edges, z, side="right") - 1, 0, nb - 1)
    counts = np.bincount(idx, minlength=nb)
    f = np.zeros((channels + 1, nb))
    with np.errstate(invalid="ignore", divide="ignore"):
        for mu in range(channels + 1):
            c = np.bincount(idx[tag == mu], minlength=nb)
            f[mu] = np.where(counts > 0, c / np.maximum(counts, 1), 0.0)
    return f, counts


def run_contagion(ens: GasEnsemble, t_end: float, sample_times=None, bin_width: float = 0.5,
                  channels: int = MAX_CHANNELS) -> ContagionHistory:
    """Run the gas from ``ens.t`` to ``t_end`` and sample binned tag fractions.

    The ensemble is advanced in place. ``f[t, mu, b]`` is the fraction of the
    particles in z-bin ``b`` carrying tag ``mu``; empty bins report 0.
    """
    if sample_times is None:
        sample_times = np.arange(ens.t, t_end + 1e-12, 1.0)
    sample_times = np.asarray(sorted(float(s) for s in sample_times))
    if len(sample_times) and (sample_times[0] < ens.t or sample_times[-1] > t_end + 1e-12):
        raise ValueError("sample times must lie within [t, t_end]")
    nb = max(int(round(ens.box[2] / bin_width)), 1)
    edges = np.linspace(0.0, ens.box[2], nb + 1)
    kern = _Kernel(ens)
    fs, cs, tcs, es = [], [], [], []
    t0 = ens.t
    before = dict(ens.stats)
    for ts in sample_times:
        kern.advance_to(ts)
        r = kern.positions(ts)
        f, c = _bin(r[:, 2], ens.tag, edges, channels)
        fs.append(f)
        cs.append(c)
        tcs.append(ens.tag_counts(channels))
        es.append(ens.kinetic_energy())
        log.debug("t=%.2f tagged=%s", ts, tcs[-1])
    if ens.t < t_end:
        kern.advance_to(t_end)
    kern.sync()
    times = sample_times
    hist = ContagionHistory(
        times=times, bin_edges=edges,
        f=np.array(fs).reshape(len(times), channels + 1, nb),
        counts=np.array(cs).reshape(len(times), nb),
        tag_counts=np.array(tcs).reshape(len(times), channels + 1),
        energy=np.array(es), box=ens.box.copy(), n_particles=ens.n,
        stats=_run_stats(before, ens.stats, t0, t_end))
    return hist


def _run_stats(before, after, t0, t1):
    out = {k: after[k] - before[k] for k in ("collisions", "infections", "walls",
                                             "crossings", "events")}
    out["max_energy_err"] = after["max_energy_err"]
    out["max_momentum_err"] = after["max_momentum_err"]
    out["t_start"] = float(t0)
    out["t_end"] = float(t1)
    return out


def measured_mean_free_path(ens: GasEnsemble, hist: ContagionHistory) -> tuple[float, float]:
    """(lambda, tau) from collision counts: tau = N T / (2 C), lambda = <|v|> tau."""
    tau = hist.mean_free_time()
    speed = float(np.linalg.norm(ens.v, axis=1).mean())
    return speed * tau, tau


@dataclass
class FrontFit:
    times: np.ndarray
    left: np.ndarray
    right: np.ndarray
    distance: np.ndarray         # half the left-right separation
    speed: float
    intercept: float
    r2: float
    sqrt_ssr: float              # residual of the best a + b sqrt(t) fit
    linear_ssr: float
    window: tuple[float, float]
    truncated: bool
    exponent: float              # log-log slope of distance vs t over the window


def front_positions(hist: ContagionHistory, threshold: float = 0.05, channel: int = 1):
    centers = hist.bin_centers
    left = np.full(len(hist.times), np.nan)
    right = np.full(len(hist.times), np.nan)
    for k in range(len(hist.times)):
        above = np.nonzero(hist.f[k, channel] >= threshold)[0]
        if len(above):
            left[k] = centers[above[0]]
            right[k] = centers[above[-1]]
    return left, right


def fit_front(hist: ContagionHistory, threshold: float = 0.05, t_min: float = 5.0,
              channel: int = 1, z0: float | None = None) -> FrontFit:
    """Least-squares front speed over t >= ``t_min``.

    The window stops at the first sample where either front sits in the last
    bin next to a wall; ``truncated`` is then set.
    """
    left, right = front_positions(hist, threshold, channel)
    t = hist.times
    dist = 0.5 * (right - left)
    centers = hist.bin_centers
    at_wall = (left <= centers[0]) | (right >= centers[-1])
    sel = (t >= t_min) & np.isfinite(dist)
    truncated = False
    if at_wall[sel].any():
        truncated = True
        first = t[sel & at_wall].min()
        sel &= t < first
        log.warning("front reached the wall at t=%.2f; fit window truncated", first)
    if sel.sum() < 3:
        raise ValueError("fewer than three front samples in the fit window")
    ts, ds = t[sel], dist[sel]
    a_mat = np.vstack([ts, np.ones_like(ts)]).T
    (slope, icpt), *_ = np.linalg.lstsq(a_mat, ds, rcond=None)
    resid = ds - (slope * ts + icpt)
    ssr = float(resid @ resid)
    sst = float(((ds - ds.mean()) ** 2).sum())
    r2 = 1.0 - ssr / sst if sst > 0 else 1.0
    b_mat = np.vstack([np.sqrt(ts), np.ones_like(ts)]).T
    coef, *_ = np.linalg.lstsq(b_mat, ds, rcond=None)
    rs = ds - b_mat @ coef
    pos = ds > 0
    expo = float(np.polyfit(np.log(ts[pos]), np.log(ds[pos]), 1)[0]) if pos.sum() >= 2 else np.nan
    return FrontFit(times=t, left=left, right=right, distance=dist, speed=float(slope),
                    intercept=float(icpt), r2=r2, sqrt_ssr=float(rs @ rs), linear_ssr=ssr,
                    window=(float(ts[0]), float(ts[-1])), truncated=truncated, exponent=expo)
