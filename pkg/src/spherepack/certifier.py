"""Exact validation of packings and of improvement claims.

The verdict path uses integers only.  Coordinates are read as exact rationals,
brought to a common denominator and compared through squared quantities:

* a packing is *invalid* when its smallest squared centre distance is below 4;
* it *improves* on the ccp separation ``sqrt2 / (p-1)`` when
  ``m^2 (p-1)^2 > 2 E^2`` with ``m`` the smallest centre distance and ``E`` the
  container edge, a comparison that never touches ``sqrt2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

import gmpy2
from gmpy2 import mpfr, mpq, mpz

from .numerics import MPFR, bits_for, format_sci, round_fraction, to_fraction


class Verdict(str, Enum):
    IMPROVED = "improved"
    NOT_IMPROVED = "not_improved"
    INVALID = "invalid"


@dataclass(frozen=True)
class Certificate:
    n: int
    p: int
    min_sq_distance: Fraction
    edge_sq: Fraction
    verdict: Verdict
    margin_exponent: int | None = None
    improvement: str | None = None

    def lines(self) -> list[str]:
        out = [
            f"n: {self.n}",
            f"p: {self.p}",
            f"verdict: {self.verdict.value}",
            f"margin_exponent: {self.margin_exponent if self.margin_exponent is not None else '-'}",
        ]
        if self.improvement is not None:
            out.append(f"improvement: {self.improvement}")
        return out


def _as_rows(points) -> list[tuple[Fraction, Fraction, Fraction]]:
    return [tuple(to_fraction(c) for c in pt) for pt in points]


def _common_integers(rows):
    den = reduce(lambda a, b: a * b // math.gcd(a, b), (mpz(c.denominator) for pt in rows for c in pt), mpz(1))
    ints = [tuple(mpz(c.numerator) * (den // mpz(c.denominator)) for c in pt) for pt in rows]
    return ints, den


def _integer_min_sq(ints) -> mpz:
    best = None
    n = len(ints)
    for a in range(n - 1):
        x0, y0, z0 = ints[a]
        for b in range(a + 1, n):
            x1, y1, z1 = ints[b]
            d = (x0 - x1) ** 2 + (y0 - y1) ** 2 + (z0 - z1) ** 2
            if best is None or d < best:
                best = d
    return best


def min_sq_and_edge(points, unit_sq: Fraction = Fraction(1)) -> tuple[Fraction, Fraction]:
    """Exact smallest squared distance and squared container edge (Euclidean units)."""
    rows = _as_rows(points)
    if len(rows) < 2:
        raise ValueError("need at least two points")
    ints, den = _common_integers(rows)
    m2 = _integer_min_sq(ints)
    span = max(max(pt[a] for pt in ints) - min(pt[a] for pt in ints) for a in range(3))
    den2 = den * den
    unit_sq = Fraction(unit_sq)
    return Fraction(m2, den2) * unit_sq, Fraction(span * span, den2) * unit_sq


def improvement_value(min_sq: Fraction, edge_sq: Fraction, p: int, bits: int = 64):
    """``m/E - sqrt2/(p-1)`` as an mpfr, computed from the exact numerator.

    ``m/E - sqrt2/(p-1) = (m^2 (p-1)^2 - 2 E^2) / ((m (p-1) + sqrt2 E) E (p-1))``,
    so the sign is exact and no cancellation occurs however small the gap.
    """
    num = min_sq * (p - 1) ** 2 - 2 * edge_sq
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        m = gmpy2.sqrt(mpq(min_sq.numerator, min_sq.denominator))
        e = gmpy2.sqrt(mpq(edge_sq.numerator, edge_sq.denominator))
        den = (m * (p - 1) + gmpy2.sqrt(mpfr(2)) * e) * e * (p - 1)
        return mpfr(mpq(num.numerator, num.denominator)) / den


def certify(points: Iterable, p: int, unit_sq: Fraction | int = 1) -> Certificate:
    """Exact certificate for a list of coordinate triples.

    ``points`` may hold decimal strings, Fractions, ints or mpfr values.  When
    coordinates are given in scaled units (lattice units have ``unit_sq=2``),
    distances are converted with ``unit_sq`` exactly.
    """
    rows = _as_rows(points)
    if len(rows) < 2:
        raise ValueError("certify needs at least two points")
    m2, e2 = min_sq_and_edge(rows, Fraction(unit_sq))
    if m2 < 4:
        verdict = Verdict.INVALID
    elif m2 * (p - 1) ** 2 > 2 * e2:
        verdict = Verdict.IMPROVED
    else:
        verdict = Verdict.NOT_IMPROVED
    margin = improvement = None
    if verdict is not Verdict.INVALID and e2 > 0:
        value = improvement_value(m2, e2, p)
        improvement = format_sci(value, 3, "down")
        if verdict is Verdict.IMPROVED:
            margin = math.floor(float(gmpy2.log10(value)))
    return Certificate(len(rows), p, m2, e2, verdict, margin, improvement)


def brute_min_distance(points) -> Fraction:
    """Exhaustive exact minimum squared distance over all pairs (reference oracle)."""
    rows = _as_rows(points)
    if len(rows) < 2:
        raise ValueError("need at least two points")
    best = None
    for a in range(len(rows)):
        for b in range(a + 1, len(rows)):
            d = sum((u - v) ** 2 for u, v in zip(rows[a], rows[b]))
            if best is None or d < best:
                best = d
    return best


def _to_interval(c, bits):
    """``(lo, hi)`` mpfr bounds of an exact coordinate."""
    if isinstance(c, MPFR) and c.precision <= bits:
        return c, c
    q = to_fraction(c)
    v = mpq(q.numerator, q.denominator)
    with gmpy2.context(gmpy2.get_context(), precision=bits, round=gmpy2.RoundDown):
        lo = mpfr(v)
    with gmpy2.context(gmpy2.get_context(), precision=bits, round=gmpy2.RoundUp):
        hi = mpfr(v)
    return lo, hi


def min_distance_enclosure(points: Sequence, digits: int) -> tuple:
    """Lower and upper bounds on the smallest squared distance from mpfr arithmetic.

    Coordinates become intervals, differences are evaluated with outward
    rounding and squares and sums are rounded down (resp. up), so the exact
    value lies in ``[low, high]``.
    """
    bits = bits_for(digits)
    pts = [tuple(_to_interval(c, bits) for c in pt) for pt in points]
    down = gmpy2.context(gmpy2.get_context(), precision=bits, round=gmpy2.RoundDown)
    up = gmpy2.context(gmpy2.get_context(), precision=bits, round=gmpy2.RoundUp)
    best_lo = best_hi = None
    for a in range(len(pts)):
        for b in range(a + 1, len(pts)):
            lo_sq = hi_sq = mpfr(0)
            for (alo, ahi), (blo, bhi) in zip(pts[a], pts[b]):
                # |d| lies in [near, far]; negation is exact at this precision
                with down:
                    dlo = alo - bhi
                with up:
                    dhi = ahi - blo
                with down:
                    near = max(dlo, -dhi, mpfr(0))
                    lo_sq = lo_sq + near * near
                with up:
                    far = max(abs(dlo), abs(dhi))
                    hi_sq = hi_sq + far * far
            if best_lo is None or lo_sq < best_lo:
                best_lo = lo_sq
            if best_hi is None or hi_sq < best_hi:
                best_hi = hi_sq
    return best_lo, best_hi


def inflate_to_valid(points: Sequence, places: int, max_tries: int = 8) -> list[tuple[Fraction, ...]]:
    """Round coordinates to ``places`` decimals, scaling up slightly if needed.

    Rounding a packing with touching spheres can push a contact below 2.  The
    rows are scaled about the origin by ``1 + c 10^(2-places)`` before rounding
    (``c`` grows tenfold per retry) until the exact check passes.  Scaling
    leaves the separation ratio ``m/E`` unchanged up to the rounding itself.
    """
    rows = _as_rows(points)
    factor = Fraction(1)
    for attempt in range(max_tries + 1):
        out = [tuple(round_fraction(c * factor, places) for c in pt) for pt in rows]
        m2, _ = min_sq_and_edge(out)
        if m2 >= 4:
            return out
        factor = 1 + Fraction(10 ** attempt, 10 ** max(places - 2, 1))
    raise ValueError("could not restore minimum distance 2 by inflation")
