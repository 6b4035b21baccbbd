"""Cubic close-packed arrangements, their outer shells and removal patterns.

Lattice points are integer triples ``(i, j, k)`` with an even coordinate sum;
the sphere centre they describe is ``sqrt(2) * (i, j, k)`` so nearest
neighbours sit at distance exactly 2 (unit-radius spheres).

Packings built here keep their coordinates in *lattice units* (one unit is
``sqrt(2)``), which makes every coordinate an exact integer and every contact
exact.  ``Packing.unit_sq`` records the squared length of a coordinate unit.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np
from gmpy2 import mpfr

from .numerics import MIN_DIGITS, context, to_fraction


class LatticePoint(NamedTuple):
    i: int
    j: int
    k: int

    def norm_sq(self) -> int:
        return self.i * self.i + self.j * self.j + self.k * self.k

    def __sub__(self, other):
        return LatticePoint(self.i - other.i, self.j - other.j, self.k - other.k)


class Provenance(str, Enum):
    CCP = "ccp"
    PATTERN = "pattern"
    CONSTRUCTIVE = "constructive"
    OPTIMIZED = "optimized"


# Removal patterns in lattice units, anchored at the origin corner.
PATTERNS: dict[int, tuple[LatticePoint, ...]] = {
    2: (LatticePoint(0, 1, 1), LatticePoint(1, 1, 0)),
    3: (LatticePoint(0, 0, 0), LatticePoint(1, 0, 1), LatticePoint(2, 0, 0)),
    4: (
        LatticePoint(0, 1, 1),
        LatticePoint(1, 1, 0),
        LatticePoint(1, 1, 2),
        LatticePoint(2, 1, 1),
    ),
    5: (
        LatticePoint(0, 1, 1),
        LatticePoint(1, 0, 1),
        LatticePoint(1, 1, 0),
        LatticePoint(2, 0, 0),
        LatticePoint(2, 1, 1),
    ),
    6: (
        LatticePoint(0, 0, 0),
        LatticePoint(0, 1, 1),
        LatticePoint(1, 0, 1),
        LatticePoint(1, 1, 0),
        LatticePoint(2, 0, 0),
        LatticePoint(2, 1, 1),
    ),
}


@dataclass(frozen=True)
class Packing:
    """A finite set of sphere centres with bookkeeping.

    ``points`` holds mpfr triples in coordinate units whose squared Euclidean
    length is ``unit_sq`` (1 for plain coordinates, 2 for lattice units).
    Spheres have radius 1 in Euclidean units, i.e. centres must be at least
    ``2 / sqrt(unit_sq)`` apart in coordinate units.
    """

    points: tuple[tuple, ...]
    p: int
    provenance: Provenance
    digits: int = MIN_DIGITS
    unit_sq: Fraction = Fraction(1)
    r: int | None = None
    seed: int | None = None
    lattice: tuple[LatticePoint, ...] | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def contact_sq(self) -> Fraction:
        """Squared minimum centre distance in coordinate units."""
        return Fraction(4) / self.unit_sq

    def exact_points(self) -> list[tuple[Fraction, Fraction, Fraction]]:
        return [tuple(to_fraction(c) for c in pt) for pt in self.points]

    def edge(self) -> Fraction:
        """Exact ``D(S)``: the largest per-axis coordinate range, in coordinate units."""
        best = Fraction(0)
        for a in range(3):
            col = [pt[a] for pt in self.points]
            rng = to_fraction(max(col)) - to_fraction(min(col))
            best = max(best, rng)
        return best

    def edge_sq_euclidean(self) -> Fraction:
        return self.edge() ** 2 * self.unit_sq

    def as_array(self) -> np.ndarray:
        return np.array([[float(c) for c in pt] for pt in self.points])

    def with_points(self, points, **changes) -> "Packing":
        return replace(self, points=tuple(tuple(pt) for pt in points), lattice=None, **changes)


def g(p: int) -> int:
    """Number of spheres in the ccp packing of order ``p``: ceil(p^3 / 2)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return (p**3 + 1) // 2


def lattice_points(p: int) -> list[LatticePoint]:
    """Even-parity points of ``{0..p-1}^3`` in lexicographic order."""
    return [
        LatticePoint(i, j, k)
        for i, j, k in itertools.product(range(p), repeat=3)
        if (i + j + k) % 2 == 0
    ]


def _lattice_packing(pts: Sequence[LatticePoint], p: int, digits: int, **meta) -> Packing:
    with context(digits):
        coords = tuple((mpfr(q.i), mpfr(q.j), mpfr(q.k)) for q in pts)
    return Packing(
        points=coords,
        p=p,
        digits=max(digits, MIN_DIGITS),
        unit_sq=Fraction(2),
        lattice=tuple(pts),
        **meta,
    )


def gen_ccp(p: int, digits: int = MIN_DIGITS) -> Packing:
    """The ccp arrangement ``G_p`` of ``g(p)`` spheres with a centre at the origin."""
    if p < 2:
        raise ValueError(f"gen_ccp needs p >= 2, got {p}")
    return _lattice_packing(lattice_points(p), p, digits, provenance=Provenance.CCP)


def layer(p: int) -> list[LatticePoint]:
    """The outer shell ``G_p minus G_{p-1}``: points with max coordinate ``p - 1``."""
    if p < 3:
        raise ValueError("layer needs p >= 3")
    return [q for q in lattice_points(p) if max(q) == p - 1]


def split_layer(p: int) -> tuple[list[LatticePoint], list[LatticePoint], list[LatticePoint]]:
    """Split the shell into face-interior, all-positive and remaining points."""
    first, second, third = [], [], []
    for q in layer(p):
        if sum(1 for c in q if c <= p - 3) >= 2:
            first.append(q)
        elif min(q) > 0:
            second.append(q)
        else:
            third.append(q)
    return first, second, third


def apply_pattern(p: int, r: int, digits: int = MIN_DIGITS) -> Packing:
    """``G_p`` with the ``r``-sphere removal pattern taken out at the origin corner."""
    if r not in PATTERNS:
        raise ValueError(f"no removal pattern for r={r}; known: {sorted(PATTERNS)}")
    if r >= p:
        raise ValueError(f"pattern search needs r < p (got p={p}, r={r})")
    removed = PATTERNS[r]
    for q in removed:
        if max(q) > p - 1:
            raise ValueError(f"pattern point {tuple(q)} lies outside G_{p}")
    keep = [q for q in lattice_points(p) if q not in removed]
    return _lattice_packing(keep, p, digits, provenance=Provenance.PATTERN, r=r)


def _directions(span: int = 1):
    rng = range(-span, span + 1)
    return [d for d in itertools.product(rng, repeat=3) if any(d)]


def mobile_spheres(pts: Sequence[LatticePoint], p: int, span: int = 2) -> list[int]:
    """Indices of spheres that can start moving inside ``C_p`` without overlap.

    Works in exact integer arithmetic on a lattice subset.  A sphere is mobile
    along a direction ``u`` when every touching neighbour ``d`` satisfies
    ``u . d <= 0`` (moving away, or sideways where the gap opens at second
    order) and ``u`` does not leave ``C_p`` through a face the sphere lies on.
    Candidate directions have integer entries in ``-span..span``.
    """
    pts = list(pts)
    index = {q: n for n, q in enumerate(pts)}
    offsets = [d for d in _directions(1) if sum(c * c for c in d) == 2]
    dirs = _directions(span)
    mobile = []
    for n, q in enumerate(pts):
        touching = [LatticePoint(*d) for d in offsets if (q[0] + d[0], q[1] + d[1], q[2] + d[2]) in index]
        for u in dirs:
            if any(u[a] < 0 and q[a] == 0 for a in range(3)):
                continue
            if any(u[a] > 0 and q[a] == p - 1 for a in range(3)):
                continue
            if all(u[0] * d.i + u[1] * d.j + u[2] * d.k <= 0 for d in touching):
                mobile.append(n)
                break
    return mobile


def contains_origin(packing: Packing) -> bool:
    return any(all(c == 0 for c in pt) for pt in packing.points)


def lattice_min_sq_distance(pts: Sequence[LatticePoint]) -> int:
    """Smallest squared pairwise distance in lattice units (exact integers)."""
    arr = np.array(pts, dtype=np.int64)
    best = None
    for n in range(len(arr) - 1):
        d = arr[n + 1 :] - arr[n]
        m = int((d * d).sum(axis=1).min())
        best = m if best is None else min(best, m)
    return best


def lattice_span(pts: Sequence[LatticePoint]) -> int:
    arr = np.array(pts, dtype=np.int64)
    return int((arr.max(axis=0) - arr.min(axis=0)).max())
