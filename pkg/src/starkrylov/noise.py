"""Stochastic Pauli noise trajectories and symmetry-based mitigation.

Noise model: after every applied multi-qubit gate, each touched qubit
independently suffers a uniform X/Y/Z error with probability p.  This is a
trajectory (pure-state) channel; ensemble quantities are averages over
trajectories with independent streams.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .statevec import GateOp, StateVector, apply_gate, pauli_gate, rz_gate

_PAULI_NAMES = ("X", "Y", "Z")


@dataclass(frozen=True)
class NoiseSpec:
    p_pauli: float = 0.0
    enable_postselect: bool = False
    enable_twirl: bool = False
    twirl_angle: float = np.pi / 2
    seed: int = 0
    paulis: tuple[str, ...] = _PAULI_NAMES  # restrictable for diagnostics

    def __post_init__(self):
        if not 0.0 <= self.p_pauli <= 1.0:
            raise ValueError("p_pauli must lie in [0, 1]")
        if not set(self.paulis) <= {"X", "Y", "Z"} or not self.paulis:
            raise ValueError("paulis must be a nonempty subset of X, Y, Z")

    @property
    def active(self) -> bool:
        return self.p_pauli > 0


def noisy_apply(state: StateVector, gates, spec: NoiseSpec,
                rng: np.random.Generator) -> StateVector:
    """Apply gates, inserting per-qubit Pauli errors after multi-qubit ones."""
    for g in gates:
        state = apply_gate(state, g)
        if spec.p_pauli > 0 and len(g.sites) >= 2:
            for q in g.sites:
                if rng.random() < spec.p_pauli:
                    name = spec.paulis[rng.integers(len(spec.paulis))]
                    state = apply_gate(state, pauli_gate(name, q))
    return state


def pair_parity_valid(bitstring: int, pairing) -> bool:
    """Keep rule for measured strings: the number of dimer pairs observed in
    the states 01 or 11 (second qubit of the pair set) must be even."""
    count = 0
    for (_a, b) in pairing:
        count += (bitstring >> b) & 1
    return count % 2 == 0


def postselect_f1(samples: np.ndarray, pairing, n_sites: int):
    """Filter sampled basis indices by the pair-parity rule.

    Returns (kept samples, discard count).  The pairing must cover every
    site, as produced by the full dimer preparations.
    """
    covered = {q for pair in pairing for q in pair}
    if covered != set(range(n_sites)):
        raise ValueError("pairing must cover all sites")
    mask = 0
    for (_a, b) in pairing:
        mask |= 1 << b
    samples = np.asarray(samples)
    masked = samples & mask
    parity = np.zeros(len(samples), dtype=np.int64)
    for q in range(n_sites):
        parity += (masked >> q) & 1
    keep = parity % 2 == 0
    return samples[keep], int(np.sum(~keep))


def _fmt_err(x: float) -> str:
    return "" if np.isnan(x) else f"{x:.9e}"


def write_mitigation_csv(path, rows) -> None:
    """Ablation rows of (t, mode, f1_err, f2_err, f3_err, overlap_err)."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["t", "mode", "f1_err", "f2_err", "f3_err", "overlap_err"])
        for t, mode, e1, e2, e3, eo in rows:
            writer.writerow([f"{t:.9f}", mode, _fmt_err(e1), _fmt_err(e2),
                             _fmt_err(e3), _fmt_err(eo)])


def twirl_layer(n_qubits: int, theta: float = np.pi / 2,
                superposition_role: bool = False) -> list[GateOp]:
    """R_z(theta) = diag(e^{i theta}, e^{-i theta}) on every qubit.

    Circuits that carry a superposition with the all-up reference need theta
    to be an integer multiple of 2*pi/n so both branches stay unaffected.
    """
    if superposition_role:
        ratio = theta / (2 * np.pi / n_qubits)
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError(
                f"twirl angle {theta:g} is not a multiple of 2*pi/{n_qubits} "
                "and would dephase the reference branch"
            )
    return [rz_gate(q, theta) for q in range(n_qubits)]
