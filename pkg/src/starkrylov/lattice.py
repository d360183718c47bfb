"""Star-plaquette and kagome-patch geometries.

A star plaquette is a closed loop of N corner-sharing triangles (N even).
Sites are numbered canonically: the inner ring is 0..N-1, the apex of
triangle k is N+k, and triangle k is the triple (k, (k+1) mod N, N+k) with
parity k mod 2.  Every other module relies on this numbering.
"""
from __future__ import annotations

import json
from dataclasses import dataclass


@dataclass(frozen=True)
class StarPlaquette:
    n_triangles: int
    n_sites: int
    bonds: tuple[tuple[int, int], ...]
    triangles: tuple[tuple[int, int, int], ...]
    parity: tuple[int, ...]  # parity[k] = k % 2
    inner_sites: tuple[int, ...]
    apex_sites: tuple[int, ...]

    @property
    def outer_bonds(self) -> tuple[tuple[int, int], ...]:
        """Bonds between the inner ring and the apexes, in triangle order."""
        n = self.n_triangles
        out = []
        for k in range(n):
            out.append((k, n + k))
            out.append(((k + 1) % n, n + k))
        return tuple(out)

    @property
    def inner_bonds(self) -> tuple[tuple[int, int], ...]:
        n = self.n_triangles
        return tuple((k, (k + 1) % n) for k in range(n))

    def dimer_bonds(self, orientation: str = "cw") -> tuple[tuple[int, int], ...]:
        """One outer bond per triangle forming a pinwheel covering."""
        n = self.n_triangles
        if orientation == "cw":
            return tuple((k, n + k) for k in range(n))
        if orientation == "ccw":
            return tuple(((k + 1) % n, n + k) for k in range(n))
        raise ValueError(f"orientation must be 'cw' or 'ccw', got {orientation!r}")

    def free_outer_bonds(self, orientation: str = "cw") -> tuple[tuple[int, int], ...]:
        """Outer bonds not covered by the pinwheel dimers of the given orientation."""
        dimers = set(map(frozenset, self.dimer_bonds(orientation)))
        return tuple(b for b in self.outer_bonds if frozenset(b) not in dimers)

    def bond_groups(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Four site-disjoint bond groups: outer-even, outer-odd, inner-even, inner-odd."""
        n = self.n_triangles
        outer_even = tuple((k, n + k) for k in range(n))
        outer_odd = tuple((n + k, (k + 1) % n) for k in range(n))
        inner_even = tuple((k, k + 1) for k in range(0, n, 2))
        inner_odd = tuple(((k, (k + 1) % n)) for k in range(1, n, 2))
        return (outer_even, outer_odd, inner_even, inner_odd)

    def triangle_groups(self) -> tuple[tuple[tuple[int, int, int], ...], ...]:
        """(even, odd) parity classes; triangles within a class share no site."""
        even = tuple(t for k, t in enumerate(self.triangles) if k % 2 == 0)
        odd = tuple(t for k, t in enumerate(self.triangles) if k % 2 == 1)
        return even, odd

    def to_json(self) -> str:
        return json.dumps(
            {
                "sites": list(range(self.n_sites)),
                "bonds": [list(b) for b in self.bonds],
                "triangles": [list(t) for t in self.triangles],
                "parity": list(self.parity),
            }
        )


def build_star(n_triangles: int) -> StarPlaquette:
    """Build the canonical star plaquette with ``n_triangles`` triangles.

    Requires an even count >= 4: an odd loop of corner-sharing triangles
    admits no two-coloring, so the triangle-by-triangle evolution scheme
    would not decompose into two commuting groups.
    """
    if n_triangles < 4 or n_triangles % 2 != 0:
        raise ValueError(
            f"n_triangles must be an even integer >= 4 (got {n_triangles}): "
            "an odd triangle loop has no two-coloring"
        )
    n = n_triangles
    triangles = tuple((k, (k + 1) % n, n + k) for k in range(n))
    bonds = []
    for (a, b, c) in triangles:
        bonds += [(a, b), (a, c), (b, c)]
    return StarPlaquette(
        n_triangles=n,
        n_sites=2 * n,
        bonds=tuple(bonds),
        triangles=triangles,
        parity=tuple(k % 2 for k in range(n)),
        inner_sites=tuple(range(n)),
        apex_sites=tuple(range(n, 2 * n)),
    )


@dataclass(frozen=True)
class KagomePatch:
    """Open-boundary kagome patch of rows x cols unit cells, 3 sites per cell.

    Up triangles live inside cells; down triangles connect neighboring cells.
    Every bond belongs to exactly one triangle, so the patch supports the
    same triangle-wise decomposition and resource accounting as the stars.
    """

    rows: int
    cols: int
    n_sites: int
    bonds: tuple[tuple[int, int], ...]
    triangles: tuple[tuple[int, int, int], ...]
    parity: tuple[int, ...]  # 0 = up, 1 = down

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def triangle_groups(self):
        up = tuple(t for t, p in zip(self.triangles, self.parity) if p == 0)
        down = tuple(t for t, p in zip(self.triangles, self.parity) if p == 1)
        return up, down

    def to_json(self) -> str:
        return json.dumps(
            {
                "sites": list(range(self.n_sites)),
                "bonds": [list(b) for b in self.bonds],
                "triangles": [list(t) for t in self.triangles],
                "parity": list(self.parity),
            }
        )


def build_patch(rows: int, cols: int) -> KagomePatch:
    """Open-boundary kagome patch; geometry only, no size cap."""
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")

    def site(r, c, s):  # s in {0: A, 1: B, 2: C}
        return 3 * (r * cols + c) + s

    triangles = []
    parity = []
    for r in range(rows):
        for c in range(cols):
            triangles.append((site(r, c, 0), site(r, c, 1), site(r, c, 2)))
            parity.append(0)
    # down triangles: B(r,c) - A(r,c+1) - C(r-1,c+1)
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols and r - 1 >= 0:
                triangles.append((site(r, c, 1), site(r, c + 1, 0), site(r - 1, c + 1, 2)))
                parity.append(1)
    bonds = []
    for (a, b, c) in triangles:
        bonds += [(a, b), (a, c), (b, c)]
    return KagomePatch(
        rows=rows,
        cols=cols,
        n_sites=3 * rows * cols,
        bonds=tuple(bonds),
        triangles=tuple(triangles),
        parity=tuple(parity),
    )
