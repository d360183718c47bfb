"""Magnetization curves from per-sector ground energies at h = 0.

Each S^z sector's ground energy varies linearly with the field,
E_S(h) = E_S - h S, so the curve is the lower envelope of those lines over
h >= 0: plateaus of constant magnetization separated by crossing fields
h = (E_S' - E_S)/(S' - S).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import krylov
from .hamiltonian import SpinHamiltonian
from .prep import initial_state_for_sector


@dataclass(frozen=True)
class Plateau:
    h_start: float
    h_end: float  # math.inf for the saturated plateau
    sz: int
    energy_at_h_start: float


@dataclass
class MagnetizationCurve:
    n_sites: int
    sector_energies: dict[int, float]
    plateaus: tuple[Plateau, ...]
    source: str = "exact"

    @property
    def crossing_fields(self) -> tuple[float, ...]:
        return tuple(p.h_start for p in self.plateaus[1:])

    def magnetization(self, h: float, per_site: bool = False) -> float:
        """Step function M(h); plateau intervals are half-open [h_k, h_{k+1})."""
        if h < 0:
            raise ValueError("h must be >= 0")
        for p in self.plateaus:
            if p.h_start <= h < p.h_end:
                return 2 * p.sz / self.n_sites if per_site else float(p.sz)
        raise AssertionError("plateaus do not cover h >= 0")


def build_curve(sector_energies: dict[int, float], n_sites: int,
                source: str = "exact") -> MagnetizationCurve:
    """Lower envelope of the sector lines E_S - h S over h >= 0."""
    needed = set(range(n_sites // 2 + 1))
    present = {int(s) for s in sector_energies}
    if not needed <= present:
        raise ValueError(f"missing sectors: {sorted(needed - present)}")
    energies = {int(s): float(e) for s, e in sector_energies.items() if int(s) in needed}
    if min(energies, key=energies.get) != 0:
        raise ValueError("S^z = 0 is not the minimal sector at h = 0")

    plateaus = []
    sz, h = 0, 0.0
    smax = n_sites // 2
    while sz < smax:
        candidates = [
            ((energies[s2] - energies[sz]) / (s2 - sz), s2)
            for s2 in range(sz + 1, smax + 1)
        ]
        h_next = min(c[0] for c in candidates)
        # at a tie the larger jump wins immediately beyond the crossing
        s_next = max(s2 for c, s2 in candidates if abs(c - h_next) < 1e-12)
        plateaus.append(Plateau(h, h_next, sz, energies[sz] - h * sz))
        sz, h = s_next, h_next
    plateaus.append(Plateau(h, math.inf, smax, energies[smax] - h * smax))
    return MagnetizationCurve(n_sites, energies, tuple(plateaus), source)


def _default_sz0_cz_bonds(star):
    """S^z=0 dressing: every free outer bond for the 8-spin star, every
    other one for the 12-spin star (the higher-overlap variant)."""
    free = star.free_outer_bonds("cw")
    if star.n_triangles == 6:
        return free[::2]
    return free


def sector_solver_settings(star) -> dict:
    """Per-lattice solver defaults that converge every sector.

    Both stars use a time step near their admissibility bound: the 8-spin
    star then reaches machine precision in every sector within 20 steps,
    while the 12-spin star still needs a long horizon for its slow
    S^z = 1, 2 sectors (near-degenerate low-lying levels).
    """
    if star.n_triangles == 6:
        # delta below 1e-6 keeps the near-degenerate S^z=1 estimate from
        # jittering between the ground level and its 0.016-gap neighbors
        return {"dt": 0.17, "n_steps": 150, "delta": 1e-8}
    return {"dt": 0.2, "n_steps": 40, "delta": 1e-6}


def estimate_sector_energies(star, method: str = "uvqpe", delta: float = 1e-6,
                             n_steps: int = 40, dt: float = 0.1,
                             sz0_cz_bonds=None, oracle: bool = True):
    """Run the chosen solver on exact series in every S^z sector.

    Returns (energies, meta); ``meta[sz]`` records the estimate trace, a
    plateau indicator (change < 1e-8 over the last 10 steps), and a
    ``converged`` flag.  Convergence is judged against the exact sector
    ground energy when the oracle is available (desk scale): a final error
    above 1e-3 marks the sector unconverged, whether it plateaued on an
    excited level or is still drifting.
    """
    if method not in ("uvqpe", "odmd"):
        raise ValueError("method must be 'uvqpe' or 'odmd'")
    ham = SpinHamiltonian(star)
    if dt >= ham.spectral_bounds().dt_max:
        raise ValueError(f"dt={dt:g} violates the admissibility bound")
    energies: dict[int, float] = {}
    meta: dict[int, dict] = {}
    for sz in range(star.n_triangles + 1):
        prep = initial_state_for_sector(
            star, sz, _default_sz0_cz_bonds(star) if sz == 0 else None)
        psi = prep.state().amplitudes
        values = [1.0 + 0.0j]
        for k in range(1, n_steps + 1):
            values.append(complex(np.vdot(psi, ham.evolve(psi, k * dt))))
        series = krylov.OverlapSeries(dt, np.array(values), provenance="exact")
        first = 1 if method == "uvqpe" else 2
        trace = []
        for ns in range(first, n_steps + 1):
            est = krylov.solve(method, series, ns, delta)
            trace.append(est.energy)
        final = trace[-1]
        e_exact = ham.ground_state_energy(sector=float(sz)) if oracle else None
        tail = [e for e in trace[-10:] if e is not None]
        plateaued = len(tail) == 10 and max(tail) - min(tail) < 1e-8
        error = None if e_exact is None else abs(final - e_exact)
        converged = error is None or error <= 1e-3
        energies[sz] = final
        meta[sz] = {
            "trace": trace,
            "plateaued": plateaued,
            "converged": converged,
            "exact": e_exact,
            "final_error": error,
        }
    return energies, meta


def write_curve_csv(path, curve: MagnetizationCurve) -> None:
    """``h_start,h_end,Sz,energy_at_h_start`` rows."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["h_start", "h_end", "Sz", "energy_at_h_start"])
        for p in curve.plateaus:
            h_end = "inf" if math.isinf(p.h_end) else f"{p.h_end:.12f}"
            writer.writerow([f"{p.h_start:.12f}", h_end, p.sz,
                             f"{p.energy_at_h_start:.12f}"])


def write_sector_csv(path, sector_energies) -> None:
    """``sector,E0`` rows."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["sector", "E0"])
        for sz in sorted(sector_energies):
            writer.writerow([sz, f"{sector_energies[sz]:.12f}"])
