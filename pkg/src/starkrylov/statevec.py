"""Dense statevector engine.

Bit convention: site i is bit i of the basis index, bit 0 least significant;
bit value 1 is spin down (S^z = -1/2), so the all-zero state is all-up.
Gate matrices are indexed with sites[0] as the most significant local bit,
i.e. a CNOT on sites (c, t) is the textbook matrix in the |c t> basis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UNITARY_TOL = 1e-10
NORM_TOL = 1e-10
MAX_QUBITS = 14  # dense amplitudes only; geometry alone has no cap

_SQ2 = 1.0 / np.sqrt(2.0)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
_CZ = np.diag([1, 1, 1, -1]).astype(complex)

PAULIS = {"X": _X, "Y": _Y, "Z": _Z}


class StateVector:
    """Normalized 2^n complex amplitude vector."""

    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, n_qubits: int, amplitudes: np.ndarray, check: bool = True):
        if n_qubits > MAX_QUBITS:
            raise ValueError(f"{n_qubits} qubits exceeds the dense cap of {MAX_QUBITS}")
        amplitudes = np.asarray(amplitudes, dtype=complex)
        if amplitudes.shape != (1 << n_qubits,):
            raise ValueError(f"expected {1 << n_qubits} amplitudes, got {amplitudes.shape}")
        if check and abs(np.linalg.norm(amplitudes) - 1.0) > NORM_TOL:
            raise ValueError("state vector is not normalized")
        self.n_qubits = n_qubits
        self.amplitudes = amplitudes

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy(), check=False)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def zero_state(n_qubits: int) -> StateVector:
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(n_qubits, amps, check=False)


@dataclass(frozen=True)
class GateOp:
    sites: tuple[int, ...]
    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        k = len(self.sites)
        if not 1 <= k <= 3:
            raise ValueError("GateOp supports 1 to 3 sites")
        if len(set(self.sites)) != k:
            raise ValueError(f"gate sites must be distinct: {self.sites}")
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (1 << k, 1 << k):
            raise ValueError(f"matrix shape {m.shape} does not match {k} sites")
        if np.linalg.norm(m.conj().T @ m - np.eye(1 << k)) > UNITARY_TOL:
            raise ValueError(f"gate {self.label!r} is not unitary")
        object.__setattr__(self, "matrix", m)

    def dagger(self) -> "GateOp":
        return GateOp(self.sites, self.matrix.conj().T, self.label + "+")


def x_gate(q: int) -> GateOp:
    return GateOp((q,), _X, "X")


def h_gate(q: int) -> GateOp:
    return GateOp((q,), _H, "H")


def pauli_gate(name: str, q: int) -> GateOp:
    return GateOp((q,), PAULIS[name], name)


def rz_gate(q: int, theta: float) -> GateOp:
    """diag(e^{i theta}, e^{-i theta}), the twirl-layer convention."""
    return GateOp((q,), np.diag([np.exp(1j * theta), np.exp(-1j * theta)]), f"RZ({theta:g})")


def phase_gate(q: int, phi: float) -> GateOp:
    return GateOp((q,), np.diag([1.0, np.exp(1j * phi)]), f"P({phi:g})")


def cnot_gate(control: int, target: int) -> GateOp:
    return GateOp((control, target), _CNOT, "CNOT")


def cz_gate(a: int, b: int) -> GateOp:
    return GateOp((a, b), _CZ, "CZ")


def unitary_gate(sites: tuple[int, ...], matrix: np.ndarray, label: str = "U") -> GateOp:
    return GateOp(tuple(sites), matrix, label)


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    n = state.n_qubits
    for q in gate.sites:
        if not 0 <= q < n:
            raise ValueError(f"site {q} out of range for {n} qubits")
    k = len(gate.sites)
    tensor = state.amplitudes.reshape([2] * n)
    axes = [n - 1 - q for q in gate.sites]  # axis of site q
    tensor = np.moveaxis(tensor, axes, range(k))
    shape = tensor.shape
    tensor = gate.matrix @ tensor.reshape(1 << k, -1)
    tensor = np.moveaxis(tensor.reshape(shape), range(k), axes)
    return StateVector(n, np.ascontiguousarray(tensor).reshape(-1), check=False)


def apply_circuit(state: StateVector, gates) -> StateVector:
    for g in gates:
        state = apply_gate(state, g)
    return state


def inner(a: StateVector, b: StateVector) -> complex:
    if a.n_qubits != b.n_qubits:
        raise ValueError("dimension mismatch")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def evolve_exact(state: StateVector, ham, t: float) -> StateVector:
    """Apply exp(-i H t) using the Hamiltonian's eigendecomposition."""
    if (1 << state.n_qubits) != ham.dim:
        raise ValueError("state dimension does not match Hamiltonian")
    return StateVector(state.n_qubits, ham.evolve(state.amplitudes, t), check=False)


def rng_stream(seed: int, *stream_id: int) -> np.random.Generator:
    """Counter-based Philox generator keyed by (seed, stream id).

    Draw j from a stream is a pure function of the key and j, so parallel
    consumers that own distinct stream ids never interact.
    """
    mask = (1 << 64) - 1
    sid = 0
    for part in stream_id:
        sid = (sid * 0x9E3779B97F4A7C15 + int(part) + 1) & mask
    key = np.array([int(seed) & mask, sid], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_bitstrings(state: StateVector, shots: int, seed: int, stream=0) -> np.ndarray:
    """Sample basis-state indices i.i.d. from |amplitude|^2 by inverse CDF."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = np.abs(state.amplitudes) ** 2
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    parts = stream if isinstance(stream, tuple) else (stream,)
    rng = rng_stream(seed, *parts)
    u = rng.random(shots)
    return np.searchsorted(cdf, u, side="right").astype(np.int64)


def format_bitstring(index: int, n_qubits: int) -> str:
    """Site 0 first (left) in the printed string."""
    return "".join(str((index >> q) & 1) for q in range(n_qubits))


def all_zero_fraction(samples: np.ndarray) -> float:
    return float(np.mean(samples == 0)) if len(samples) else float("nan")


def total_variation(samples: np.ndarray, probs: np.ndarray) -> float:
    counts = np.bincount(samples, minlength=len(probs)) / len(samples)
    return 0.5 * float(np.abs(counts - probs).sum())
