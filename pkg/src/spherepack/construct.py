"""Explicit improved packings of ``g(p) - 2`` spheres.

Starting from the two-sphere packing ``P_2 = {(0,0,a), (b,b,0)}``, each shell
``L_q`` of the ccp lattice is split in three parts that are pushed inward by
``tau1(q) > tau2(q) > tau3(q)``.  The shifts come from a closed-form
recurrence in which each ``tau`` is roughly a constant times the square of the
previous one, so ``tau3(p)`` loses about eight times as many decimal places
per step.  Working precision therefore grows quickly with ``p``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import gmpy2
from gmpy2 import mpfr

from .lattice import LatticePoint, Packing, Provenance, g, layer, split_layer
from .numerics import (
    MIN_DIGITS,
    BigReal,
    PrecisionError,
    context,
    quartic_root_a,
)

DEFAULT_MAX_P = 8


class ConstructionError(PrecisionError):
    """A built packing failed its overlap check at the working precision."""


@dataclass(frozen=True)
class TauTriple:
    p: int
    tau1: BigReal
    tau2: BigReal
    tau3: BigReal

    def __post_init__(self):
        if not (self.tau1 > self.tau2 > self.tau3 > 0):
            raise PrecisionError(
                f"tau ordering tau1 > tau2 > tau3 > 0 fails at p={self.p}",
                precision_schedule(self.p),
            )


@dataclass(frozen=True)
class ConstructivePacking:
    packing: Packing
    p: int
    tau: TauTriple | None
    certified_edge: BigReal
    residuals: dict = field(default_factory=dict, compare=False)

    @property
    def points(self):
        return self.packing.points


def expected_tau3_exponent(p: int) -> float:
    """Estimated ``log10(tau3(p))`` from the leading-order recurrence.

    To leading order ``tau1(q) ~ (sqrt2/2) tau3(q-1)^2``,
    ``tau2 ~ (sqrt2/8) tau1^2`` and ``tau3 ~ (3 sqrt2/4) tau2^2``.
    """
    if p < 3:
        raise ValueError("tau values start at p = 3")
    r2 = math.sqrt(2.0)
    a = 0.8184249135986913
    log_t1 = math.log10(2 * r2 - 2 - a)
    log_t3 = math.log10(3 * r2 / 4) + 2 * (math.log10(r2 / 8) + 2 * log_t1)
    for _ in range(4, p + 1):
        log_t1 = math.log10(r2 / 2) + 2 * log_t3
        log_t3 = math.log10(3 * r2 / 4) + 2 * (math.log10(r2 / 8) + 2 * log_t1)
    return log_t3


def precision_schedule(p: int) -> int:
    """Working digits for order ``p``: three times the decimal exponent of ``tau3(p)``."""
    if p < 3:
        return 40
    return max(40, math.ceil(3 * -expected_tau3_exponent(p)))


def _tau_chain(p_max: int, digits: int) -> list[TauTriple]:
    digits = max(digits, MIN_DIGITS)
    with context(digits):
        r2 = gmpy2.sqrt(mpfr(2))
        a = quartic_root_a(digits).value
        t1 = 2 * r2 - 2 - a
        out = []
        floor = mpfr(10) ** (-(digits - 10))
        for q in range(3, p_max + 1):
            if q > 3:
                t3p = out[-1].tau3.value
                t1 = r2 + t3p - gmpy2.sqrt(-t3p * t3p + 2 * r2 * t3p + 2)
            t2 = r2 / 3 * (t1 / r2 + 2 - gmpy2.sqrt(-t1 * t1 + 2 * r2 * t1 + 4))
            t3 = r2 / 2 * (r2 * t2 + 1 - gmpy2.sqrt(-t2 * t2 + 2 * r2 * t2 + 1))
            if t3 <= floor:
                raise PrecisionError(
                    f"tau3({q}) is not resolved at {digits} digits; "
                    f"need about {precision_schedule(q)} digits",
                    precision_schedule(q),
                )
            out.append(
                TauTriple(q, BigReal._wrap(t1, digits), BigReal._wrap(t2, digits), BigReal._wrap(t3, digits))
            )
    return out


def tau_recurrence(
    p_max: int,
    precision_schedule: Mapping[int, int] | Callable[[int], int] | None = None,
) -> list[TauTriple]:
    """``tau1, tau2, tau3`` for ``p = 3..p_max``.

    Rounding errors in early steps feed every later one, so the whole chain is
    evaluated at the precision scheduled for ``p_max``; each triple is then
    reported at its own scheduled precision.
    """
    if p_max < 3:
        raise ValueError("p_max must be >= 3")
    sched = _resolve_schedule(precision_schedule)
    top = max(sched(q) for q in range(3, p_max + 1))
    chain = _tau_chain(p_max, top)
    return [
        TauTriple(t.p, t.tau1.with_digits(sched(t.p)), t.tau2.with_digits(sched(t.p)), t.tau3.with_digits(sched(t.p)))
        for t in chain
    ]


def _resolve_schedule(schedule):
    if schedule is None:
        return globals()["precision_schedule"]
    if callable(schedule):
        return schedule
    return lambda q: schedule[q]


def build_P2(digits: int = MIN_DIGITS) -> ConstructivePacking:
    """The two-sphere seed packing ``{(0,0,a), (b,b,0)}`` with ``b = sqrt(2 - a^2/2)``."""
    digits = max(digits, MIN_DIGITS)
    with context(digits):
        a = quartic_root_a(digits).value
        b = gmpy2.sqrt(2 - a * a / 2)
        zero = mpfr(0)
        pts = ((zero, zero, a), (b, b, zero))
        edge = max(a, b)
    packing = Packing(points=pts, p=2, provenance=Provenance.CONSTRUCTIVE, digits=digits)
    return ConstructivePacking(packing, 2, None, BigReal._wrap(edge, digits))


def _shift(q: LatticePoint, p: int, part: int, tau, r2):
    """Coordinates of the translated shell point ``q`` (lattice units in, Euclidean out)."""
    out = []
    for c in q:
        if part == 1:
            move = c == p - 1
        elif part == 2:
            move = True
        else:
            move = c != 0
        x = c * r2
        out.append(x - tau if move else x)
    return tuple(out)


def _min_sq(A, B, same=False):
    best = None
    for m, u in enumerate(A):
        for v in B[m + 1 :] if same else B:
            d = (u[0] - v[0]) ** 2 + (u[1] - v[1]) ** 2 + (u[2] - v[2]) ** 2
            if best is None or d < best:
                best = d
    return best


def separation(A, B, digits: int) -> BigReal:
    """``h(A, B)``: smallest cross distance minus 2, at ``digits`` digits."""
    with context(digits):
        return BigReal._wrap(gmpy2.sqrt(_min_sq(A, B)) - 2, digits)


def build_Pp(
    p: int,
    digits: int | None = None,
    *,
    allow_large: bool = False,
    check: bool = True,
) -> ConstructivePacking:
    """The improved packing ``P_p`` of ``g(p) - 2`` spheres inside ``[0, D_p - tau3(p)]^3``.

    ``digits`` defaults to :func:`precision_schedule`.  With ``check`` the
    three tangency residuals of every step are recorded in ``residuals`` and
    all pairs are tested for overlap beyond ``10^(-digits/2)``; a failure
    raises :class:`ConstructionError`.
    """
    if p == 2:
        return build_P2(digits or 40)
    if p < 2:
        raise ValueError("build_Pp needs p >= 2")
    if p > DEFAULT_MAX_P and not allow_large:
        raise ValueError(
            f"p={p} needs about {precision_schedule(p)} digits; pass allow_large=True"
        )
    digits = digits or precision_schedule(p)
    taus = _tau_chain(p, digits)
    seed = build_P2(digits)
    pts = list(seed.points)
    residuals = {}
    with context(digits):
        r2 = gmpy2.sqrt(mpfr(2))
        tol = mpfr(10) ** (-(digits // 2))
        for t in taus:
            q = t.p
            parts = split_layer(q)
            moved = []
            for part, group in enumerate(parts, start=1):
                tau = (t.tau1, t.tau2, t.tau3)[part - 1].value
                shifted = [_shift(x, q, part, tau, r2) for x in group]
                if check and shifted:
                    h = gmpy2.sqrt(_min_sq(pts + moved, shifted)) - 2
                    residuals[(q, part)] = BigReal._wrap(h, digits)
                moved.extend(shifted)
            pts.extend(moved)
        if check:
            inner = _min_sq(pts, pts, same=True)
            if inner < 4 - tol:
                raise ConstructionError(
                    f"P_{p} has overlapping spheres at {digits} digits (min squared distance {float(inner)})",
                    precision_schedule(p),
                )
        top = max(max(pt) for pt in pts)
        bottom = min(min(pt) for pt in pts)
        edge = top - bottom
    if len(pts) != g(p) - 2:
        raise AssertionError(f"expected {g(p) - 2} points, built {len(pts)}")
    packing = Packing(
        points=tuple(pts), p=p, provenance=Provenance.CONSTRUCTIVE, digits=digits
    )
    return ConstructivePacking(packing, p, taus[-1], BigReal._wrap(edge, digits), residuals)


def next_shell_separation(cp: ConstructivePacking, digits: int | None = None) -> BigReal:
    """``h(P_p, L_{p+1})`` with the next shell at its unmoved ccp position."""
    digits = digits or cp.packing.digits
    with context(digits):
        r2 = gmpy2.sqrt(mpfr(2))
        shell = [tuple(c * r2 for c in q) for q in layer(cp.p + 1)]
    return separation(list(cp.points), shell, digits)


def lower_bound_I(p: int, digits: int | None = None) -> BigReal:
    """Lower bound ``2 / ((p-1) sqrt2 - tau3(p)) - sqrt2 / (p-1)``, rounded down.

    ``tau3`` is first lowered by a bound on its own rounding error, then the
    expression is evaluated with directed rounding so the result stays a
    valid lower bound.
    """
    digits = digits or precision_schedule(p)
    t3 = _tau_chain(p, digits)[-1].tau3.value
    with context(digits, "down"):
        t3_low = t3 - mpfr(10) ** (-(digits - 5))
    if t3_low <= 0:
        raise PrecisionError(f"tau3({p}) not resolved at {digits} digits", precision_schedule(p))
    with context(digits, "up"):
        edge = (p - 1) * gmpy2.sqrt(mpfr(2)) - t3_low
        ccp = gmpy2.sqrt(mpfr(2)) / (p - 1)
    with context(digits, "down"):
        value = 2 / edge - ccp
    return BigReal._wrap(value, digits)
