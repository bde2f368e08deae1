"""Indexed wave functions and their evolution under the extended Hamiltonian.

A state carries one complex grid function per intricacy string q (and per
label of the probe particle M when it is present). The physical wave
function is the plain sum over strings. The extended Hamiltonian

    H' = sum_n K_n  +  sum_{n<n'} V(x_n, x_n') O_nn'  [+ K_M + sum_n U(y, x_n) G_n]

is never materialised: kinetic terms act on every string alike, the pair
coupling O and the generation coupling G = S_j P0 + P_j act as index maps
between strings (see ``intricacy.algebra``). Units: hbar = 1, masses 1
unless configured.

Array layout of ``IndexedWaveFunction.data``::

    (labels, strings, [y,] x_1, ..., x_N)

``labels`` has length 1 without M; with M it has one entry per channel and
label l selects channel l + 1 for the generation coupling.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from intricacy import algebra

log = logging.getLogger(__name__)

RK4_IMAG_LIMIT = 2.0 * math.sqrt(2.0)  # RK4 stability interval on the imaginary axis
MAX_ENTRIES = 1 << 24  # complex entries per state (256 MiB)
CUTOFF_RANGES = 4.0


class NumericalInstability(RuntimeError):
    pass


@dataclass(frozen=True)
class LatticeConfig:
    n_atoms: int = 2
    grid_points: int = 16
    box_length: float = 10.0
    dt: float = 0.002
    t_end: float = 1.0
    channels: int = 1
    mass: float = 1.0
    packet_width: float = 0.7
    packet_momentum: float = 1.5
    initial_string: tuple[int, ...] | None = None
    norm_tol: float = 1e-6
    overlap_tol: float = 0.1

    def __post_init__(self):
        if not 2 <= self.n_atoms <= 4:
            raise ValueError("n_atoms must be between 2 and 4")
        if self.grid_points < 8:
            raise ValueError("grid_points must be >= 8")
        if self.dt <= 0 or self.t_end < 0 or self.box_length <= 0:
            raise ValueError("dt and box_length must be positive, t_end non-negative")
        algebra._check_channels(self.channels)
        if self.initial_string is not None:
            q = tuple(int(a) for a in self.initial_string)
            if len(q) != self.n_atoms or any(not 0 <= a <= self.channels for a in q):
                raise ValueError(f"initial_string {q} does not fit {self.n_atoms} atoms, "
                                 f"{self.channels} channel(s)")
            if len({a for a in q if a}) > 1:
                raise ValueError("initial_string may use only one channel")
            object.__setattr__(self, "initial_string", q)

    @property
    def spacing(self) -> float:
        return self.box_length / (self.grid_points + 1)

    @property
    def grid(self) -> np.ndarray:
        return self.spacing * np.arange(1, self.grid_points + 1)


@dataclass(frozen=True)
class PairPotential:
    """Truncated Gaussian V0 exp(-(x-x')^2/b^2), zero beyond 4b."""

    strength: float = 1.0
    range: float = 1.0

    def __call__(self, d):
        d = np.asarray(d, dtype=float)
        out = self.strength * np.exp(-(d / self.range) ** 2)
        return np.where(np.abs(d) <= CUTOFF_RANGES * self.range, out, 0.0)


@dataclass(frozen=True)
class MCoupling:
    """Probe particle M: coordinate y on its own grid, internal label per channel."""

    present: bool = False
    strength: float = 2.0
    range: float = 0.7
    center: float | None = None
    width: float = 0.7
    momentum: float = 3.0
    weights: tuple[complex, ...] = (1.0,)
    mass: float = 1.0
    grid_points: int | None = None

    def __post_init__(self):
        if self.present:
            w = np.asarray(self.weights, dtype=complex)
            if abs(np.vdot(w, w).real - 1.0) > 1e-12:
                raise ValueError("channel weights must be normalised")

    def potential(self, d):
        d = np.asarray(d, dtype=float)
        out = self.strength * np.exp(-(d / self.range) ** 2)
        return np.where(np.abs(d) <= CUTOFF_RANGES * self.range, out, 0.0)


NO_M = MCoupling()


@dataclass
class IndexedWaveFunction:
    data: np.ndarray
    config: LatticeConfig
    coupling: MCoupling = field(default_factory=MCoupling)

    @property
    def k(self) -> int:
        return self.config.channels

    @property
    def n_atoms(self) -> int:
        return self.config.n_atoms

    @property
    def has_m(self) -> bool:
        return self.coupling.present

    @property
    def strings(self) -> list[tuple[int, ...]]:
        return algebra.strings(self.k, self.n_atoms)

    @property
    def labels(self) -> tuple[int, ...]:
        """Channel selected by each label (1 when M is absent)."""
        if not self.has_m:
            return (1,)
        return tuple(range(1, self.data.shape[0] + 1))

    @property
    def cell_volume(self) -> float:
        vol = self.config.spacing ** self.n_atoms
        if self.has_m:
            vol *= _m_spacing(self.config, self.coupling)
        return vol

    def copy(self) -> "IndexedWaveFunction":
        return replace(self, data=self.data.copy())

    def amplitude(self, q) -> np.ndarray:
        return self.data[:, algebra.string_index(q, self.k)]

    def string_norms(self) -> np.ndarray:
        """Squared norm of every string, summed over labels (and y)."""
        ax = tuple(i for i in range(self.data.ndim) if i != 1)
        return np.sum(np.abs(self.data) ** 2, axis=ax) * self.cell_volume


def _m_grid_points(cfg: LatticeConfig, m: MCoupling) -> int:
    return m.grid_points or cfg.grid_points


def _m_spacing(cfg: LatticeConfig, m: MCoupling) -> float:
    return cfg.box_length / (_m_grid_points(cfg, m) + 1)


def state_shape(cfg: LatticeConfig, m: MCoupling = NO_M) -> tuple[int, ...]:
    n_str = (cfg.channels + 1) ** cfg.n_atoms
    spatial = (cfg.grid_points,) * cfg.n_atoms
    if m.present:
        return (len(m.weights), n_str, _m_grid_points(cfg, m)) + spatial
    return (1, n_str) + spatial


def _packet(x, center, width, momentum):
    return np.exp(-((x - center) / width) ** 2 / 2.0 + 1j * momentum * x)


def atom_packets(cfg: LatticeConfig) -> list[np.ndarray]:
    """Evenly spaced Gaussian packets with alternating momenta (normalised on grid)."""
    x = cfg.grid
    out = []
    for n in range(cfg.n_atoms):
        c = cfg.box_length * (n + 1) / (cfg.n_atoms + 1)
        p = cfg.packet_momentum * (1 if n % 2 == 0 else -1)
        phi = _packet(x, c, cfg.packet_width, p)
        phi /= math.sqrt(np.sum(np.abs(phi) ** 2) * cfg.spacing)
        out.append(phi)
    return out


def symmetrized_product(cfg: LatticeConfig) -> np.ndarray:
    packets = atom_packets(cfg)
    h = cfg.spacing
    for a, b in itertools.combinations(range(len(packets)), 2):
        ov = abs(np.vdot(packets[a], packets[b]) * h)
        if ov > cfg.overlap_tol:
            raise ValueError(f"packets {a} and {b} overlap ({ov:.3g} > {cfg.overlap_tol}); "
                             "widen the box or narrow the packets")
    psi = np.zeros((cfg.grid_points,) * cfg.n_atoms, dtype=complex)
    for perm in itertools.permutations(range(cfg.n_atoms)):
        term = packets[perm[0]]
        for n in range(1, cfg.n_atoms):
            term = np.multiply.outer(term, packets[perm[n]])
        psi += term
    norm = math.sqrt(np.sum(np.abs(psi) ** 2) * h ** cfg.n_atoms)
    if norm < 1e-8:
        raise ValueError("symmetrised product vanishes on this grid")
    return psi / norm


def init_state(cfg: LatticeConfig, coupling: MCoupling = NO_M) -> IndexedWaveFunction:
    """Product state placed on one string (all-zero unless ``initial_string``)."""
    shape = state_shape(cfg, coupling)
    n_entries = int(np.prod(shape))
    if n_entries > MAX_ENTRIES:
        raise ValueError(f"state needs {n_entries} entries, cap is {MAX_ENTRIES}")
    if coupling.present and len(coupling.weights) > cfg.channels:
        raise ValueError("more M labels than channels")
    data = np.zeros(shape, dtype=complex)
    psi = symmetrized_product(cfg)
    q = cfg.initial_string or (0,) * cfg.n_atoms
    s = algebra.string_index(q, cfg.channels)
    if coupling.present:
        y = cfg.box_length / (_m_grid_points(cfg, coupling) + 1) * \
            np.arange(1, _m_grid_points(cfg, coupling) + 1)
        hy = _m_spacing(cfg, coupling)
        yc = 0.15 * cfg.box_length if coupling.center is None else coupling.center
        chi = _packet(y, yc, coupling.width, coupling.momentum)
        chi /= math.sqrt(np.sum(np.abs(chi) ** 2) * hy)
        for lab, c in enumerate(coupling.weights):
            data[lab, s] = c * np.multiply.outer(chi, psi)
    else:
        data[0, s] = psi
    return IndexedWaveFunction(data=data, config=cfg, coupling=coupling)


def project_physical(state: IndexedWaveFunction) -> np.ndarray:
    """Sum over strings. Shape (G,)*N without M, (labels, Gy) + (G,)*N with M."""
    phys = state.data.sum(axis=1)
    return phys if state.has_m else phys[0]


def physical_norm(state: IndexedWaveFunction) -> float:
    phys = state.data.sum(axis=1)
    return math.sqrt(float(np.sum(np.abs(phys) ** 2)) * state.cell_volume)


def apply_projection_A(state: IndexedWaveFunction, target_channel: int | None = None
                       ) -> IndexedWaveFunction:
    """Move every string built from {0, j} onto the all-j string; drop the rest.

    ``j`` is the label's channel with M present, otherwise ``target_channel``
    (default 1).
    """
    k, n = state.k, state.n_atoms
    out = np.zeros_like(state.data)
    for lab in range(state.data.shape[0]):
        j = state.labels[lab] if state.has_m else (target_channel or 1)
        if not 1 <= j <= k:
            raise ValueError(f"target channel {j} outside 1..{k}")
        full = algebra.string_index((j,) * n, k)
        for s, q in enumerate(state.strings):
            if all(a in (0, j) for a in q):
                out[lab, full] += state.data[lab, s]
    return replace(state, data=out)


@dataclass(frozen=True)
class IntricacyMeasures:
    p1: float
    p0: float
    interference: float
    phys_norm: float


def intricacy_measures(state: IndexedWaveFunction, atom: int, channel: int = 1
                       ) -> IntricacyMeasures:
    """Atomic intricacy weights, normalised by the physical norm.

    p1 (p0) is the squared norm of the summed strings whose ``atom`` index is
    ``channel`` (0). The remainder is computed from the cross terms between
    the groups (plus the other-channel group when k > 1), so that
    p1 + p0 + interference = 1 up to round-off.
    """
    if not 0 <= atom < state.n_atoms:
        raise IndexError(f"atom {atom} out of range 0..{state.n_atoms - 1}")
    if not 1 <= channel <= state.k:
        raise ValueError(f"channel {channel} out of range 1..{state.k}")
    idx = np.array([q[atom] for q in state.strings])
    d = state.data
    g1 = d[:, idx == channel].sum(axis=1)
    g0 = d[:, idx == 0].sum(axis=1)
    go = d[:, (idx != channel) & (idx != 0)].sum(axis=1)
    dv = state.cell_volume

    def ip(a, b):
        return complex(np.vdot(a, b)) * dv

    n1 = ip(g1, g1).real
    n0 = ip(g0, g0).real
    cross = 2.0 * ip(g0, g1).real + ip(go, go).real + 2.0 * ip(go, g1 + g0).real
    total = n1 + n0 + cross
    return IntricacyMeasures(p1=n1 / total, p0=n0 / total, interference=cross / total,
                             phys_norm=math.sqrt(total))


class ExtendedHamiltonian:
    """Matrix-free H' for one lattice/potential/coupling combination."""

    def __init__(self, cfg: LatticeConfig, potential: PairPotential,
                 coupling: MCoupling = NO_M):
        self.cfg = cfg
        self.potential = potential
        self.coupling = coupling
        k, n = cfg.channels, cfg.n_atoms
        self.shape = state_shape(cfg, coupling)
        self.off = 1 if coupling.present else 0  # spatial axis offset past (label, string)
        x = cfg.grid
        h = cfg.spacing
        # kinetic prefactors per spatial axis: -1/(2 m h^2)
        self.kin = [-1.0 / (2.0 * cfg.mass * h * h)] * n
        if coupling.present:
            hy = _m_spacing(cfg, coupling)
            self.kin = [-1.0 / (2.0 * coupling.mass * hy * hy)] + self.kin
        ndim_sp = n + self.off

        pair = algebra.build_pair_operator(k).transitions()
        strs = algebra.strings(k, n)
        self.pair_terms = []
        for a, b in itertools.combinations(range(n), 2):
            vgrid = potential(np.subtract.outer(x, x))
            vfull = _embed(vgrid, (a + self.off, b + self.off), ndim_sp)
            trans = []
            for s, q in enumerate(strs):
                dst = pair[(q[a], q[b])]
                if dst is None:
                    continue
                q2 = list(q)
                q2[a], q2[b] = dst
                trans.append((s, algebra.string_index(q2, k)))
            self.pair_terms.append(((a, b), vfull, _group(trans)))

        self.gen_terms = []
        if coupling.present:
            y = hy * np.arange(1, _m_grid_points(cfg, coupling) + 1)
            ugrid = coupling.potential(np.subtract.outer(y, x))
            for lab in range(self.shape[0]):
                j = lab + 1
                gen = algebra.atom_generation_operator(k, j)
                for a in range(n):
                    ufull = _embed(ugrid, (0, a + 1), ndim_sp)
                    trans = []
                    for s, q in enumerate(strs):
                        col = gen[:, q[a]]
                        nz = np.nonzero(col)[0]
                        if len(nz) == 0:
                            continue
                        q2 = list(q)
                        q2[a] = int(nz[0])
                        trans.append((s, algebra.string_index(q2, k)))
                    self.gen_terms.append((lab, a, ufull, _group(trans)))

    def spectral_bound(self) -> float:
        """Upper bound on |eigenvalue| of H' (block-triangular in strings)."""
        b = sum(4.0 * abs(c) for c in self.kin)
        n = self.cfg.n_atoms
        b += math.comb(n, 2) * abs(self.potential.strength)
        if self.coupling.present:
            b += n * abs(self.coupling.strength)
        return b

    def stable_dt(self) -> float:
        return RK4_IMAG_LIMIT / self.spectral_bound()

    def apply(self, psi: np.ndarray) -> np.ndarray:
        if psi.shape != self.shape:
            raise ValueError(f"state shape {psi.shape} does not match {self.shape}")
        out = np.zeros_like(psi)
        for ax, c in enumerate(self.kin):
            axis = ax + 2
            lap = -2.0 * psi
            sl_hi = [slice(None)] * psi.ndim
            sl_lo = [slice(None)] * psi.ndim
            sl_hi[axis] = slice(1, None)
            sl_lo[axis] = slice(None, -1)
            lap[tuple(sl_hi)] += psi[tuple(sl_lo)]
            lap[tuple(sl_lo)] += psi[tuple(sl_hi)]
            out += c * lap
        for _, vfull, groups in self.pair_terms:
            for dst, srcs in groups:
                acc = psi[:, srcs[0]]
                for s in srcs[1:]:
                    acc = acc + psi[:, s]
                out[:, dst] += vfull * acc
        for lab, _, ufull, groups in self.gen_terms:
            for dst, srcs in groups:
                acc = psi[lab, srcs[0]]
                for s in srcs[1:]:
                    acc = acc + psi[lab, s]
                out[lab, dst] += ufull * acc
        return out


def _embed(grid2, axes, ndim):
    """Broadcast a 2-axis grid function onto ``ndim`` spatial axes."""
    shape = [1] * ndim
    shape[axes[0]] = grid2.shape[0]
    shape[axes[1]] = grid2.shape[1]
    return grid2.reshape(shape)


def _group(trans):
    by_dst: dict[int, list[int]] = {}
    for s, d in trans:
        by_dst.setdefault(d, []).append(s)
    return sorted(by_dst.items())


def apply_extended_hamiltonian(state: IndexedWaveFunction, potential: PairPotential,
                               hamiltonian: ExtendedHamiltonian | None = None
                               ) -> IndexedWaveFunction:
    ham = hamiltonian or ExtendedHamiltonian(state.config, potential, state.coupling)
    return replace(state, data=ham.apply(state.data))


@dataclass
class Trajectory:
    times: list[float]
    states: list[IndexedWaveFunction]
    phys_norms: list[float]


def _rk4_step(ham: ExtendedHamiltonian, psi: np.ndarray, dt: float) -> np.ndarray:
    f = ham.apply
    k1 = -1j * f(psi)
    k2 = -1j * f(psi + 0.5 * dt * k1)
    k3 = -1j * f(psi + 0.5 * dt * k2)
    k4 = -1j * f(psi + dt * k3)
    return psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def evolve(state: IndexedWaveFunction, potential: PairPotential, t_end: float | None = None,
           sample_times=None, dt: float | None = None) -> Trajectory:
    """Classical RK4 on d psi/dt = -i H' psi with snapshots at ``sample_times``.

    Each interval between snapshots is split into equal substeps no longer
    than ``dt``. Aborts with NumericalInstability when the physical norm
    drifts by more than ``config.norm_tol`` (relative).
    """
    cfg = state.config
    t_end = cfg.t_end if t_end is None else t_end
    dt = cfg.dt if dt is None else dt
    ham = ExtendedHamiltonian(cfg, potential, state.coupling)
    if dt > ham.stable_dt():
        raise ValueError(f"dt={dt} exceeds the RK4 stability bound {ham.stable_dt():.4g} "
                         f"(2*sqrt(2) / spectral bound {ham.spectral_bound():.4g})")
    if sample_times is None:
        sample_times = np.linspace(0.0, t_end, 11)
    sample_times = sorted(float(t) for t in sample_times)
    psi = state.data.copy()
    norm0 = physical_norm(state)
    t = 0.0
    traj = Trajectory(times=[], states=[], phys_norms=[])
    for ts in sample_times:
        span = ts - t
        if span < -1e-12:
            raise ValueError("sample times must be non-negative and sorted")
        nsub = int(math.ceil(span / dt - 1e-9)) if span > 0 else 0
        h = span / nsub if nsub else 0.0
        for _ in range(nsub):
            psi = _rk4_step(ham, psi, h)
        t = ts
        snap = replace(state, data=psi.copy())
        nrm = physical_norm(snap)
        if not np.isfinite(nrm) or abs(nrm - norm0) > cfg.norm_tol * norm0:
            raise NumericalInstability(
                f"physical norm drifted from {norm0:.12g} to {nrm:.12g} at t={t:.4g} "
                f"(tolerance {cfg.norm_tol}); reduce dt below {ham.stable_dt():.4g}")
        traj.times.append(t)
        traj.states.append(snap)
        traj.phys_norms.append(nrm)
    return traj


def measures_table(traj: Trajectory) -> list[dict]:
    """Rows t, atom, channel, p1, p0, interference, phys_norm for every snapshot."""
    rows = []
    for t, st in zip(traj.times, traj.states):
        for atom in range(st.n_atoms):
            for ch in range(1, st.k + 1):
                m = intricacy_measures(st, atom, ch)
                rows.append({"t": t, "atom": atom, "channel": ch, "p1": m.p1, "p0": m.p0,
                             "interference": m.interference, "phys_norm": m.phys_norm})
    return rows
