"""Suzuki-Trotter schemes: bond-by-bond (four site-disjoint groups) and
triangle-by-triangle (two parity groups of exact 3-qubit exponentials),
the single-step Floquet operator, and analytic CNOT accounting.

Gate lists are in application order.  A triangle step therefore returns the
odd-parity group first so that the step operator, as a matrix product, is
exp(-i dt H_even) exp(-i dt H_odd): the even group is the left factor, the
convention used by the single-step solver variant.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .statevec import GateOp, StateVector, apply_circuit, inner, rz_gate, unitary_gate

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)


@dataclass(frozen=True)
class TrotterScheme:
    kind: str  # "bond_by_bond" | "triangle_by_triangle"
    groups: tuple[tuple[tuple[int, ...], ...], ...]  # site tuples per commuting group

    def terms(self):
        for g in self.groups:
            yield from g


def triangle_scheme(lattice) -> TrotterScheme:
    even, odd = lattice.triangle_groups()
    return TrotterScheme(kind="triangle_by_triangle", groups=(even, odd))


def bond_scheme(star) -> TrotterScheme:
    return TrotterScheme(kind="bond_by_bond", groups=star.bond_groups())


@lru_cache(maxsize=None)
def _coupling_matrix(k: int) -> np.ndarray:
    """sum of sigma.sigma over all bonds of a k-site term (k = 2 or 3)."""
    bonds = [(0, 1)] if k == 2 else [(0, 1), (0, 2), (1, 2)]
    dim = 1 << k
    out = np.zeros((dim, dim), dtype=complex)
    for (a, b) in bonds:
        for P in (_X, _Y, _Z):
            mats = [np.eye(2, dtype=complex)] * k
            mats[a] = P
            mats[b] = P
            m = mats[0]
            for extra in mats[1:]:
                m = np.kron(m, extra)
            out += m
    return out


@lru_cache(maxsize=None)
def _term_eig(k: int):
    return np.linalg.eigh(_coupling_matrix(k))


def term_unitary(n_term_sites: int, dt: float) -> np.ndarray:
    """exp(-i dt sum sigma.sigma) on a 2- or 3-site term."""
    w, v = _term_eig(n_term_sites)
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


def step_unitaries(scheme: TrotterScheme, ham, dt: float,
                   reverse_groups: bool = False) -> list[GateOp]:
    """Gates of one Trotter step of size dt, in application order.

    Groups are applied last-to-first so the first listed group is the left
    factor of the step operator; ``reverse_groups`` flips that choice.  A
    nonzero field adds a final layer of single-site z rotations.
    """
    groups = scheme.groups if reverse_groups else tuple(reversed(scheme.groups))
    gates: list[GateOp] = []
    for group in groups:
        for sites in group:
            gates.append(unitary_gate(tuple(sites), term_unitary(len(sites), dt),
                                      f"{scheme.kind}[{len(sites)}]"))
    if ham.h_field != 0.0:
        # evolution under -h * S^z over dt: diag(e^{+i h dt/2}, e^{-i h dt/2})
        gates += [rz_gate(q, ham.h_field * dt / 2.0) for q in range(ham.n_sites)]
    return gates


def evolve_trotter(state: StateVector, scheme: TrotterScheme, ham, T: float,
                   m: int, reverse_groups: bool = False) -> StateVector:
    """m first-order steps of size T/m."""
    if m < 1:
        raise ValueError("m must be >= 1")
    gates = step_unitaries(scheme, ham, T / m, reverse_groups)
    for _ in range(m):
        state = apply_circuit(state, gates)
    return state


def floquet_step_gates(ham, t: float, reverse_groups: bool = False) -> list[GateOp]:
    """One triangle-by-triangle step of size t (t may be negative)."""
    return step_unitaries(triangle_scheme(ham.lattice), ham, t, reverse_groups)


def floquet_expectation(psi0: StateVector, ham, t: float, direction: int = 1,
                        reverse_groups: bool = False) -> complex:
    """<psi0| F_{direction * t} |psi0> for the single Trotter step F."""
    gates = floquet_step_gates(ham, direction * t, reverse_groups)
    return inner(psi0, apply_circuit(psi0, gates))


CNOTS_PER_TERM = {
    ("triangle_by_triangle", "full"): 8,
    ("triangle_by_triangle", "linear"): 12,
    ("bond_by_bond", "full"): 9,
    ("bond_by_bond", "linear"): 15,
}


def cnot_count(scheme: TrotterScheme, connectivity: str = "full",
               n_triangles: int | None = None) -> int:
    """Analytic CNOTs per Trotter step (counts per triangle x N_triangles)."""
    if connectivity not in ("full", "linear"):
        raise ValueError("connectivity must be 'full' or 'linear'")
    if n_triangles is None:
        if scheme.kind == "triangle_by_triangle":
            n_triangles = sum(len(g) for g in scheme.groups)
        else:
            n_triangles = sum(len(g) for g in scheme.groups) // 3
    return CNOTS_PER_TERM[(scheme.kind, connectivity)] * n_triangles
