from dataclasses import dataclass
from math import comb

import numpy as np
import pytest

from starkrylov.hamiltonian import (
    QUBIT_CAP,
    SpinHamiltonian,
    subspace_overlap,
    sz_sector_dimension,
    write_spectrum_csv,
)
from starkrylov.lattice import build_patch, build_star
from starkrylov.prep import dressed_initial, pinwheel


@dataclass(frozen=True)
class ToyLattice:
    """Minimal graph for single-bond / single-triangle spectra."""

    n_sites: int
    bonds: tuple
    n_triangles: int = 1


def kron_chain(mats):
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(m, out)  # site i is bit i: later factors are higher bits
    return out


def dense_oracle(n, bonds, h=0.0):
    """Independent construction from explicit Pauli kron products."""
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
    Z = np.diag([1.0, -1.0]).astype(complex)
    I = np.eye(2, dtype=complex)
    H = np.zeros((1 << n, 1 << n), dtype=complex)
    for (i, j) in bonds:
        for P in (X, Y, Z):
            mats = [I] * n
            mats[i] = P
            mats[j] = P
            H += kron_chain(mats)
    for i in range(n):
        mats = [I] * n
        mats[i] = Z / 2
        H -= h * kron_chain(mats)
    return H


def test_dense_matches_kron_oracle():
    star = build_star(4)
    ham = SpinHamiltonian(star, h_field=0.7)
    oracle = dense_oracle(8, star.bonds, h=0.7)
    assert np.max(np.abs(ham.dense_matrix() - oracle)) < 1e-12


def test_single_bond_spectrum():
    ham = SpinHamiltonian(ToyLattice(2, ((0, 1),)))
    w = np.sort(np.linalg.eigvalsh(ham.dense_matrix()))
    assert np.allclose(w, [-3.0, 1.0, 1.0, 1.0], atol=1e-12)


def test_single_triangle_spectrum():
    ham = SpinHamiltonian(ToyLattice(3, ((0, 1), (0, 2), (1, 2))))
    w = np.sort(np.linalg.eigvalsh(ham.dense_matrix()))
    assert np.allclose(w, [-3.0] * 4 + [3.0] * 4, atol=1e-12)


@pytest.mark.parametrize("n_tri,e0", [(4, -12.0), (6, -18.0)])
def test_star_ground_energies(n_tri, e0):
    ham = SpinHamiltonian(build_star(n_tri))
    assert abs(ham.ground_state_energy() - e0) < 1e-9


def test_qubit_cap():
    with pytest.raises(ValueError, match="cap"):
        SpinHamiltonian(build_star(8))  # 16 sites
    assert QUBIT_CAP == 14
    build_patch(4, 4)  # 48 sites, geometry alone is fine


def test_sector_dimensions():
    ham = SpinHamiltonian(build_star(4))
    assert len(ham.sector_basis(0.0)) == 70  # C(8,4)
    assert len(ham.sector_basis(4.0)) == 1
    assert sum(len(ham.sector_basis(ham._sz_of_ndown(k))) for k in range(9)) == 256
    assert sz_sector_dimension(8, 1.0) == comb(8, 3)
    with pytest.raises(ValueError, match="empty"):
        ham.diagonalize(sector=5.0)


def test_polarized_sector_eigenvalue_with_field():
    h = 0.9
    ham = SpinHamiltonian(build_star(4), h_field=h)
    res = ham.diagonalize(sector=4.0)
    assert len(res.energies) == 1
    assert abs(res.energies[0] - (12.0 - 4.0 * h)) < 1e-12


def test_commutes_with_total_sz():
    star = build_star(4)
    ham = SpinHamiltonian(star, h_field=0.3)
    H = ham.dense_matrix()
    idx = np.arange(256)
    sz = sum(0.5 * (1 - 2 * ((idx >> q) & 1)) for q in range(8))
    comm = H * sz[None, :] - sz[:, None] * H
    assert np.max(np.abs(comm)) < 1e-12


def test_eigen_residuals_and_bounds():
    ham = SpinHamiltonian(build_star(4), h_field=0.5)
    res = ham.diagonalize()
    bounds = ham.spectral_bounds()
    assert np.all(res.energies >= bounds.e_min - 1e-9)
    assert np.all(res.energies <= bounds.e_max + 1e-9)
    assert np.all(np.diff(res.energies) >= -1e-12)
    H = ham.dense_matrix()
    for i in (0, 1, 17, 100, 255):
        v = res.vector(i)
        assert np.linalg.norm(H @ v - res.energies[i] * v) < 1e-9


@pytest.mark.parametrize(
    "n_tri,h,bound", [(4, 0.0, 12.0), (6, 0.0, 18.0), (4, 1.0, 16.0)]
)
def test_spectral_bounds_values(n_tri, h, bound):
    ham = SpinHamiltonian(build_star(n_tri), h_field=h)
    b = ham.spectral_bounds()
    assert b.e_max == bound and b.e_min == -bound
    assert abs(b.dt_max - np.pi / bound) < 1e-12


def test_dt_max_8_spin_value():
    b = SpinHamiltonian(build_star(4)).spectral_bounds()
    assert abs(b.dt_max - 2 * np.pi / 24) < 1e-12


@pytest.mark.parametrize(
    "n_tri,h,expected", [(4, 0.0, 12.0), (6, 0.0, 18.0), (4, 2.0, 4.0)]
)
def test_reference_energy(n_tri, h, expected):
    ham = SpinHamiltonian(build_star(n_tri), h_field=h)
    assert abs(ham.reference_energy() - expected) < 1e-12
    # oracle: expectation of the dense matrix in the all-up state
    all_up = np.zeros(1 << ham.n_sites)
    all_up[0] = 1.0
    direct = float(all_up @ ham.dense_matrix() @ all_up)
    assert abs(ham.reference_energy() - direct) < 1e-12


def test_frustration_free_saturation():
    for n_tri in (4, 6):
        ham = SpinHamiltonian(build_star(n_tri))
        assert abs(ham.ground_state_energy() - (-3.0 * n_tri)) < 1e-9


def test_subspace_overlap_examples():
    star = build_star(4)
    ham = SpinHamiltonian(star)
    spec = ham.diagonalize(sector=0.0)
    assert abs(subspace_overlap(pinwheel(star).state().amplitudes, spec) - 1.0) < 1e-10
    ov = subspace_overlap(dressed_initial(star).state().amplitudes, spec)
    assert abs(ov - 0.286) < 1e-3
    # basis state from the Sz=4 sector is orthogonal to the Sz=0 ground space
    polarized = np.zeros(256, dtype=complex)
    polarized[0] = 1.0
    assert subspace_overlap(polarized, spec) < 1e-15
    with pytest.raises(ValueError, match="normalized"):
        subspace_overlap(2 * polarized, spec)


def test_evolve_blocks_match_dense_expm(tmp_path):
    star = build_star(4)
    ham = SpinHamiltonian(star, h_field=0.2)
    rng = np.random.default_rng(0)
    v = rng.normal(size=256) + 1j * rng.normal(size=256)
    v /= np.linalg.norm(v)
    w, vecs = np.linalg.eigh(ham.dense_matrix())
    expected = vecs @ (np.exp(-1j * w * 0.6) * (vecs.conj().T @ v))
    assert np.linalg.norm(ham.evolve(v, 0.6) - expected) < 1e-9
    write_spectrum_csv(tmp_path / "s.csv", ham)
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "sector,index,energy"
    assert len(lines) == 1 + 256
