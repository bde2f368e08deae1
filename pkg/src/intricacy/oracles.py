"""Reference operators assembled as explicit (sparse) matrices.

These are built from Kronecker products of the per-atom operators and the
1D finite-difference Laplacian, a different route from the index maps used
by ``ExtendedHamiltonian.apply``. Vector ordering matches the C-order
flattening of ``IndexedWaveFunction.data``: label, string, [y,] x_1..x_N.
"""

from __future__ import annotations

import itertools

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from intricacy import algebra
from intricacy.evolution import (
    IndexedWaveFunction,
    LatticeConfig,
    MCoupling,
    NO_M,
    PairPotential,
    _m_grid_points,
    _m_spacing,
    state_shape,
)


def _kron_all(mats):
    out = mats[0]
    for m in mats[1:]:
        out = sp.kron(out, m, format="csr")
    return sp.csr_matrix(out)


def _spatial_axes(cfg: LatticeConfig, m: MCoupling):
    """(grid points, spacing, mass) per spatial axis, y first when present."""
    axes = [(cfg.grid_points, cfg.spacing, cfg.mass)] * cfg.n_atoms
    if m.present:
        axes = [(_m_grid_points(cfg, m), _m_spacing(cfg, m), m.mass)] + axes
    return axes


def _grids(cfg: LatticeConfig, m: MCoupling):
    out = [cfg.grid] * cfg.n_atoms
    if m.present:
        g = _m_grid_points(cfg, m)
        out = [_m_spacing(cfg, m) * np.arange(1, g + 1)] + out
    return out


def kinetic_matrix(cfg: LatticeConfig, m: MCoupling = NO_M) -> sp.csr_matrix:
    axes = _spatial_axes(cfg, m)
    eyes = [sp.identity(g, format="csr") for g, _, _ in axes]
    total = None
    for ax, (g, h, mass) in enumerate(axes):
        lap = sp.diags([np.ones(g - 1), -2.0 * np.ones(g), np.ones(g - 1)], [-1, 0, 1])
        mats = list(eyes)
        mats[ax] = (-1.0 / (2.0 * mass * h * h)) * lap
        term = _kron_all(mats)
        total = term if total is None else total + term
    return total


def _pair_diag(cfg, m, pot_fn, ax_a, ax_b):
    grids = _grids(cfg, m)
    mesh = np.meshgrid(*grids, indexing="ij")
    return sp.diags(pot_fn(mesh[ax_a] - mesh[ax_b]).ravel())


def standard_hamiltonian(cfg: LatticeConfig, potential: PairPotential,
                         m: MCoupling = NO_M) -> sp.csr_matrix:
    """K + V (+ K_M + U) on the ordinary configuration grid (one label)."""
    off = 1 if m.present else 0
    h = kinetic_matrix(cfg, m)
    for a, b in itertools.combinations(range(cfg.n_atoms), 2):
        h = h + _pair_diag(cfg, m, potential, a + off, b + off)
    if m.present:
        for a in range(cfg.n_atoms):
            h = h + _pair_diag(cfg, m, m.potential, 0, a + 1)
    return sp.csr_matrix(h)


def _atom_embed(k, n, ops_by_atom):
    """Kronecker product over atoms, identity where no operator is given."""
    eye = np.eye(k + 1, dtype=complex)
    return algebra.kron(*[ops_by_atom.get(i, eye) for i in range(n)])


def pair_string_operator(k: int, n: int, a: int, b: int) -> np.ndarray:
    """O for atoms (a, b) on the full string space, written term by term."""
    ops = algebra.build_atom_operators(k)
    P, S = ops.P, ops.S
    terms = [(P[0], P[0])]
    for j in range(1, k + 1):
        terms += [(P[j], P[j]), (S[j] @ P[0], P[j]), (P[j], S[j] @ P[0])]
    return sum(_atom_embed(k, n, {a: ta, b: tb}) for ta, tb in terms)


def extended_hamiltonian(cfg: LatticeConfig, potential: PairPotential,
                         m: MCoupling = NO_M) -> sp.csr_matrix:
    k, n = cfg.channels, cfg.n_atoms
    n_str = (k + 1) ** n
    off = 1 if m.present else 0
    grid_dim = int(np.prod([g for g, _, _ in _spatial_axes(cfg, m)]))
    block = sp.kron(sp.identity(n_str), kinetic_matrix(cfg, m), format="csr")
    for a, b in itertools.combinations(range(n), 2):
        o = sp.csr_matrix(pair_string_operator(k, n, a, b))
        block = block + sp.kron(o, _pair_diag(cfg, m, potential, a + off, b + off))
    if not m.present:
        return sp.csr_matrix(block)
    labels = []
    for lab in range(len(m.weights)):
        lb = block
        gen = algebra.atom_generation_operator(k, lab + 1)
        for a in range(n):
            g_op = sp.csr_matrix(_atom_embed(k, n, {a: gen}))
            lb = lb + sp.kron(g_op, _pair_diag(cfg, m, m.potential, 0, a + 1))
        labels.append(lb)
    assert labels[0].shape[0] == n_str * grid_dim
    return sp.csr_matrix(sp.block_diag(labels))


def projection_matrices(cfg: LatticeConfig, m: MCoupling = NO_M, target_channel: int = 1):
    """(A_ext, A_red): A on the extended space, and E' -> E (sum onto physical).

    With M, label l uses channel l + 1 and E is label (x) grid.
    """
    k, n = cfg.channels, cfg.n_atoms
    grid_dim = int(np.prod([g for g, _, _ in _spatial_axes(cfg, m)]))
    n_lab = len(m.weights) if m.present else 1
    ext, red = [], []
    for lab in range(n_lab):
        j = lab + 1 if m.present else target_channel
        a_str = algebra.build_projection_A(k, n, j)
        row = a_str[algebra.string_index((j,) * n, k)][None, :]
        ext.append(sp.kron(sp.csr_matrix(a_str), sp.identity(grid_dim), format="csr"))
        red.append(sp.kron(sp.csr_matrix(row), sp.identity(grid_dim), format="csr"))
    return sp.csr_matrix(sp.block_diag(ext)), sp.csr_matrix(sp.block_diag(red))


def standard_block(cfg: LatticeConfig, potential: PairPotential, m: MCoupling = NO_M):
    n_lab = len(m.weights) if m.present else 1
    h = standard_hamiltonian(cfg, potential, m)
    return sp.csr_matrix(sp.block_diag([h] * n_lab))


def intertwining_residual(cfg: LatticeConfig, potential: PairPotential,
                          m: MCoupling = NO_M) -> dict[str, float]:
    """Max entrywise |A H' - H_std A| (reduced) and |A H' - H' A| (extended)."""
    hx = extended_hamiltonian(cfg, potential, m)
    hs = standard_block(cfg, potential, m)
    a_ext, a_red = projection_matrices(cfg, m)
    r1 = (a_red @ hx - hs @ a_red).toarray()
    r2 = (a_ext @ hx - hx @ a_ext).toarray()
    return {"reduced": float(np.max(np.abs(r1), initial=0.0)),
            "extended": float(np.max(np.abs(r2), initial=0.0))}


def dense_expm_trajectory(state: IndexedWaveFunction, potential: PairPotential, times
                          ) -> list[np.ndarray]:
    """exp(-i H' t) psi0 with H' dense; returns arrays shaped like ``state.data``."""
    hx = extended_hamiltonian(state.config, potential, state.coupling).toarray()
    psi0 = state.data.ravel()
    out = []
    for t in times:
        u = scipy.linalg.expm(-1j * t * hx)
        out.append((u @ psi0).reshape(state.data.shape))
    return out


def standard_trajectory(state: IndexedWaveFunction, potential: PairPotential, times
                        ) -> list[np.ndarray]:
    """Ordinary Schrodinger evolution of the physical projection (Krylov expm)."""
    cfg, m = state.config, state.coupling
    hs = standard_block(cfg, potential, m)
    phys0 = state.data.sum(axis=1).ravel()
    shape = state.data.sum(axis=1).shape
    return [expm_multiply(-1j * t * hs, phys0).reshape(shape) for t in times]


def extended_state_size(cfg: LatticeConfig, m: MCoupling = NO_M) -> int:
    return int(np.prod(state_shape(cfg, m)))
