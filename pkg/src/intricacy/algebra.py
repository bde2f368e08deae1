"""Per-atom intricacy operators as explicit small matrices.

Basis ordering for one atom is (index 0, index 1, ..., index k); index 0 is
"not intricate", index j >= 1 is "intricate with channel j". In this
ordering the single-channel operators read

    P0 = diag(1, 0) = (I - sz)/2      P1 = diag(0, 1) = (I + sz)/2
    S  = [[0, 0], [1, 0]] = (sx + i sy)/2

with the Pauli matrices written in the same (0, 1) ordering, i.e.
sz = diag(-1, 1), sx = [[0, 1], [1, 0]], sy = [[0, i], [-i, 0]].
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce

import numpy as np


def _check_channels(k: int) -> int:
    if int(k) != k or k < 1:
        raise ValueError(f"channel count must be an integer >= 1, got {k!r}")
    return int(k)


# Pauli matrices in the (index 0, index 1) ordering
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, 1j], [-1j, 0]], dtype=complex)
SIGMA_Z = np.array([[-1, 0], [0, 1]], dtype=complex)


@dataclass(frozen=True)
class AtomOperators:
    """Projectors P[mu] (mu = 0..k) and raising maps S[j] (j = 1..k; S[0] unused)."""

    k: int
    P: tuple[np.ndarray, ...]
    S: tuple[np.ndarray | None, ...]

    @property
    def dim(self) -> int:
        return self.k + 1

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.k + 1, dtype=complex)


def build_atom_operators(k: int) -> AtomOperators:
    k = _check_channels(k)
    d = k + 1
    P = []
    for mu in range(d):
        m = np.zeros((d, d), dtype=complex)
        m[mu, mu] = 1.0
        P.append(m)
    S: list[np.ndarray | None] = [None]
    for j in range(1, d):
        m = np.zeros((d, d), dtype=complex)
        m[j, 0] = 1.0
        S.append(m)
    return AtomOperators(k=k, P=tuple(P), S=tuple(S))


def pauli_realization() -> dict[str, np.ndarray]:
    """Single-channel operators written through Pauli matrices."""
    eye = np.eye(2, dtype=complex)
    return {
        "P0": (eye - SIGMA_Z) / 2,
        "P1": (eye + SIGMA_Z) / 2,
        "S": (SIGMA_X + 1j * SIGMA_Y) / 2,
    }


def relation_residuals(ops: AtomOperators) -> dict[str, float]:
    """Max-abs residual of every defining relation; all should be ~0."""
    P, S, eye = ops.P, ops.S, ops.identity
    d = ops.dim
    res: dict[str, float] = {}

    def put(name, m):
        res[name] = float(np.max(np.abs(m)))

    put("sum P = I", sum(P) - eye)
    for mu in range(d):
        put(f"P{mu}^2 = P{mu}", P[mu] @ P[mu] - P[mu])
        for nu in range(d):
            if nu != mu:
                put(f"P{mu} P{nu} = 0", P[mu] @ P[nu])
    for j in range(1, d):
        s = S[j]
        put(f"S{j}^2 = 0", s @ s)
        put(f"S{j} P0 = S{j}", s @ P[0] - s)
        put(f"P0 S{j} = 0", P[0] @ s)
        for nu in range(1, d):
            put(f"S{j} P{nu} = 0", s @ P[nu])
            put(f"P{nu} S{j} = d S{j}", P[nu] @ s - (s if nu == j else 0 * s))
    return res


def kron(*mats: np.ndarray) -> np.ndarray:
    return reduce(np.kron, mats)


@dataclass(frozen=True)
class PairOperator:
    """Index-transition map on an ordered atom pair, plus its dense matrix."""

    k: int
    matrix: np.ndarray  # (k+1)^2 x (k+1)^2, row = output pair, col = input pair

    def transitions(self) -> dict[tuple[int, int], tuple[int, int] | None]:
        """Input pair -> output pair (None when annihilated)."""
        d = self.k + 1
        out: dict[tuple[int, int], tuple[int, int] | None] = {}
        for a, b in itertools.product(range(d), repeat=2):
            col = self.matrix[:, a * d + b]
            nz = np.nonzero(np.abs(col) > 0)[0]
            if len(nz) == 0:
                out[(a, b)] = None
            else:
                (row,) = nz
                out[(a, b)] = (row // d, row % d)
        return out


def build_pair_operator(k: int, ops: AtomOperators | None = None) -> PairOperator:
    """P0(x)P0 + sum_j [Pj(x)Pj + Sj P0 (x) Pj + Pj (x) Sj P0].

    No Pi(x)Pj term for i != j: pairs intricate with different channels are
    annihilated by the coupling.
    """
    k = _check_channels(k)
    ops = ops or build_atom_operators(k)
    P, S = ops.P, ops.S
    O = kron(P[0], P[0])
    for j in range(1, k + 1):
        O = O + kron(P[j], P[j]) + kron(S[j] @ P[0], P[j]) + kron(P[j], S[j] @ P[0])
    return PairOperator(k=k, matrix=O)


def atom_generation_operator(k: int, channel: int, ops: AtomOperators | None = None) -> np.ndarray:
    """S_j P0 + P_j: flips index 0 to ``channel`` and keeps ``channel`` fixed."""
    k = _check_channels(k)
    if not 1 <= channel <= k:
        raise ValueError(f"channel must be in 1..{k}, got {channel}")
    ops = ops or build_atom_operators(k)
    return ops.S[channel] @ ops.P[0] + ops.P[channel]


def build_projection_A(k: int, n_atoms: int, target_channel: int = 1) -> np.ndarray:
    """Product over atoms of (P_j + S_j P0) on the full string space.

    Dense (k+1)^N square matrix; string index is mixed-radix with atom 0 the
    most significant digit (itertools.product order).
    """
    a = atom_generation_operator(k, target_channel)
    if n_atoms < 1:
        raise ValueError("n_atoms must be >= 1")
    return kron(*([a] * n_atoms))


def strings(k: int, n_atoms: int) -> list[tuple[int, ...]]:
    return list(itertools.product(range(k + 1), repeat=n_atoms))


def string_index(q, k: int) -> int:
    idx = 0
    for a in q:
        idx = idx * (k + 1) + int(a)
    return idx


def dominates(q_out, q_in) -> bool:
    """Componentwise q_out >= q_in under 0 < every channel (channels incomparable)."""
    for b, a in zip(q_out, q_in):
        if a == b:
            continue
        if a != 0:
            return False
    return True
