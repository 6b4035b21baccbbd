"""Stochastic local search that shrinks the container of a ccp-like packing.

Each iteration visits every sphere once.  The sphere picks a random direction
``t`` from a small integer set, the parameter range ``k`` in ``[-1, 1]`` for
which ``s + k t`` keeps every contact and does not widen the container is
computed from one quadratic per neighbour, and the sphere jumps to the
midpoint of the feasible segment that contains its current position.

All positions are mpfr values at the configured precision.  The segment
computation uses round-to-nearest, but every accepted move is re-verified with
one-sided bounds: squared distances are bounded from below with directed
rounding and the container edge is compared exactly.  A move that fails
verification is dropped, so the packing stays valid whatever the rounding.
"""
from __future__ import annotations

import itertools
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import gmpy2
import numpy as np
from gmpy2 import mpfr, mpq

from .certifier import Verdict, certify, min_sq_and_edge
from .lattice import Packing, Provenance, apply_pattern
from .numerics import MIN_DIGITS, bits_for, format_decimal, format_sci, to_fraction

log = logging.getLogger(__name__)

RNG_NAME = "PCG64"

DEFAULT_DIRECTIONS: tuple[tuple[int, int, int], ...] = tuple(
    t for t in itertools.product((0, 1), repeat=3) if any(t)
)
FULL_DIRECTIONS: tuple[tuple[int, int, int], ...] = tuple(
    t for t in itertools.product((-1, 0, 1), repeat=3) if any(t)
)

# Decimal exponents of the best improvements tabulated for patterns R_r,
# keyed by (p, r).  Used only to pick a starting precision.
KNOWN_EXPONENTS: dict[tuple[int, int], int] = {
    (4, 2): 68, (5, 2): 80, (6, 2): 314, (7, 2): 622, (8, 2): 629, (9, 2): 629,
    (10, 2): 2584, (11, 2): 2563, (12, 2): 4988,
    (4, 3): 12, (5, 4): 11, (5, 3): 20, (6, 5): 14, (6, 4): 47, (6, 3): 76,
    (7, 6): 21, (7, 5): 31, (7, 4): 87, (7, 3): 148,
    (8, 6): 28, (8, 5): 43, (8, 4): 102, (8, 3): 153,
    (9, 6): 28, (9, 5): 44, (9, 4): 101, (9, 3): 152,
    (10, 6): 57, (10, 5): 199, (10, 4): 310, (10, 3): 605,
    (11, 6): 119, (11, 5): 173, (11, 4): 407, (11, 3): 615,
    (12, 6): 248, (12, 5): 404, (12, 4): 745, (12, 3): 1212,
}

DIGIT_FACTOR = 1.5


def default_digits(p: int, r: int, factor: float = DIGIT_FACTOR) -> int:
    """Working precision for pattern ``(p, r)``: ``factor`` times the expected exponent."""
    exp = KNOWN_EXPONENTS.get((p, r))
    if exp is None:
        return MIN_DIGITS
    return max(MIN_DIGITS, math.ceil(factor * exp))


@dataclass(frozen=True)
class SegmentSet:
    """Sorted, pairwise disjoint closed intervals of the line parameter ``k``."""

    intervals: tuple[tuple, ...] = ()

    def __post_init__(self):
        prev = None
        for lo, hi in self.intervals:
            if lo > hi:
                raise ValueError("empty interval in SegmentSet")
            if prev is not None and lo <= prev:
                raise ValueError("intervals must be sorted and disjoint")
            prev = hi

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    def contains(self, k) -> bool:
        return any(lo <= k <= hi for lo, hi in self.intervals)

    def containing(self, k=0):
        """The interval holding ``k``, or ``None``."""
        for lo, hi in self.intervals:
            if lo <= k <= hi:
                return lo, hi
        return None


@dataclass(frozen=True)
class SearchConfig:
    seed: int = 0
    digits: int = MIN_DIGITS
    max_iterations: int = 1000
    stop_on_first_improvement: bool = True
    directions: tuple[tuple[int, int, int], ...] = DEFAULT_DIRECTIONS
    shuffle_order: bool = False
    margin_digits: int | None = None
    jitter: float = 0.2
    progress_every: int = 0

    def __post_init__(self):
        if self.digits < MIN_DIGITS:
            raise ValueError(f"digits must be >= {MIN_DIGITS}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.directions or any(not any(t) for t in self.directions):
            raise ValueError("directions must be non-empty and exclude the zero vector")
        object.__setattr__(self, "directions", tuple(tuple(int(c) for c in t) for t in self.directions))

    @property
    def precision(self) -> int:
        return self.digits


@dataclass
class SearchReport:
    config: SearchConfig
    n: int
    p: int
    r: int | None
    iterations: int
    moves: int
    initial_edge: str
    final_edge: str
    improvement: str
    improved: bool
    verdict: str
    diagnostic: str | None = None
    wall_time: float = 0.0
    rng: str = RNG_NAME
    packing: Packing | None = field(default=None, repr=False, compare=False)

    def to_dict(self, include_wall_time: bool = True) -> dict:
        cfg = asdict(self.config)
        cfg["directions"] = [list(t) for t in self.config.directions]
        out = {
            "config": cfg,
            "rng": self.rng,
            "n": self.n,
            "p": self.p,
            "r": self.r,
            "iterations": self.iterations,
            "moves": self.moves,
            "initial_edge": self.initial_edge,
            "final_edge": self.final_edge,
            "improvement": self.improvement,
            "improved": self.improved,
            "verdict": self.verdict,
            "diagnostic": self.diagnostic,
        }
        if include_wall_time:
            out["wall_time"] = round(self.wall_time, 6)
        return out

    def to_json(self, include_wall_time: bool = True) -> str:
        return json.dumps(self.to_dict(include_wall_time), indent=2, sort_keys=True) + "\n"


# ------------------------------------------------------------------ geometry


class _State:
    """Mutable working copy of a packing used inside the search loop."""

    def __init__(self, packing: Packing, digits: int):
        self.packing = packing
        self.bits = bits_for(digits)
        self.unit_sq = Fraction(packing.unit_sq)
        with gmpy2.context(gmpy2.get_context(), precision=self.bits):
            self.pts = [list(_mp(c) for c in pt) for pt in packing.points]
        self.contact = mpfr(mpq(4 * self.unit_sq.denominator, self.unit_sq.numerator), self.bits)
        self.reach = 2.0 / math.sqrt(float(self.unit_sq))
        self.arr = np.array([[float(c) for c in pt] for pt in self.pts])

    def ctx(self, rnd=gmpy2.RoundToNearest):
        return gmpy2.context(gmpy2.get_context(), precision=self.bits, round=rnd)

    def near(self, i: int, radius: float) -> np.ndarray:
        d = self.arr - self.arr[i]
        close = np.einsum("ij,ij->i", d, d) < radius * radius
        close[i] = False
        return np.flatnonzero(close)

    def extremes(self, axis: int, skip: int | None = None):
        col = [pt[axis] for n, pt in enumerate(self.pts) if n != skip]
        return min(col), max(col)

    def edge(self) -> Fraction:
        return max(_span(*self.extremes(a)) for a in range(3))

    def to_packing(self, **changes) -> Packing:
        return self.packing.with_points([tuple(pt) for pt in self.pts], **changes)


def _mp(c):
    if isinstance(c, (Fraction, str)):
        q = to_fraction(c)
        return mpfr(mpq(q.numerator, q.denominator))
    return mpfr(c) if not isinstance(c, type(mpfr(0))) else c


def _span(lo, hi) -> Fraction:
    return to_fraction(hi) - to_fraction(lo)


def _violation(st: _State, si, sj, t, A):
    """Open interval of ``k`` where ``s_i + k t`` overlaps ``s_j``, or ``None``."""
    d = [si[0] - sj[0], si[1] - sj[1], si[2] - sj[2]]
    B = d[0] * t[0] + d[1] * t[1] + d[2] * t[2]
    C = d[0] * d[0] + d[1] * d[1] + d[2] * d[2] - st.contact
    disc = B * B - A * C
    if disc <= 0:
        return None
    root = gmpy2.sqrt(disc)
    qq = -(B + root) if B >= 0 else -(B - root)
    if qq == 0:
        return None
    x1, x2 = sorted((qq / A, C / qq))
    if x1 < 0 < x2:
        # the pair is tangent up to rounding: keep the open side
        if -x1 < x2:
            x1 = mpfr(0)
        else:
            x2 = mpfr(0)
    return x1, x2


def _box(st: _State, i: int, t, edge: Fraction):
    """Closed ``k`` range keeping every axis span at most ``edge``."""
    lo_k, hi_k = mpfr(-1), mpfr(1)
    si = st.pts[i]
    E = mpfr(mpq(edge.numerator, edge.denominator))
    for a in range(3):
        if t[a] == 0:
            continue
        lo, hi = st.extremes(a, skip=i)
        # q_a must lie in [hi - E, lo + E]
        k1 = (hi - E - si[a]) / t[a]
        k2 = (lo + E - si[a]) / t[a]
        if k1 > k2:
            k1, k2 = k2, k1
        lo_k = max(lo_k, k1)
        hi_k = min(hi_k, k2)
    # the current position is admissible; keep rounding noise from excluding it
    return min(lo_k, mpfr(0)), max(hi_k, mpfr(0))


def _segments(st: _State, i: int, t, edge: Fraction, neighbours) -> SegmentSet:
    with st.ctx():
        lo_k, hi_k = _box(st, i, t, edge)
        if lo_k > hi_k:
            return SegmentSet(())
        A = t[0] * t[0] + t[1] * t[1] + t[2] * t[2]
        bad = []
        for j in neighbours:
            v = _violation(st, st.pts[i], st.pts[j], t, A)
            if v is not None and v[1] > lo_k and v[0] < hi_k:
                bad.append(v)
    bad.sort(key=lambda v: v[0])
    out = []
    cur = lo_k
    for x1, x2 in bad:
        if x1 >= cur:
            out.append((cur, x1))
        cur = max(cur, x2)
        if cur > hi_k:
            break
    if cur <= hi_k:
        out.append((cur, hi_k))
    merged = []
    for lo, hi in out:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return SegmentSet(tuple(merged))


def _blocked_segment(st: _State, i: int, t, edge: Fraction, neighbours):
    """The feasible segment around ``k = 0`` without building the full SegmentSet."""
    with st.ctx():
        a, b = _box(st, i, t, edge)
        if a > 0 or b < 0:
            return mpfr(0), mpfr(0)
        A = t[0] * t[0] + t[1] * t[1] + t[2] * t[2]
        si = st.pts[i]
        for j in neighbours:
            v = _violation(st, si, st.pts[j], t, A)
            if v is None:
                continue
            x1, x2 = v
            if x2 <= 0:
                if x2 > a:
                    a = x2
            elif x1 >= 0:
                if x1 < b:
                    b = x1
            else:
                return mpfr(0), mpfr(0)
            if a >= b:
                return mpfr(0), mpfr(0)
    return a, b


def _verify(st: _State, i: int, q, neighbours, edge: Fraction) -> bool:
    """Certify that moving sphere ``i`` to ``q`` keeps contacts and the edge."""
    for j in neighbours:
        sj = st.pts[j]
        with st.ctx(gmpy2.RoundToZero):
            d = [q[0] - sj[0], q[1] - sj[1], q[2] - sj[2]]
        with st.ctx(gmpy2.RoundDown):
            low = d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
        if low < st.contact:
            return False
    for a in range(3):
        lo, hi = st.extremes(a, skip=i)
        lo, hi = min(lo, q[a]), max(hi, q[a])
        if _span(lo, hi) > edge:
            return False
    return True


def _try_move(st: _State, i: int, t, edge: Fraction) -> bool:
    radius = st.reach + math.sqrt(sum(c * c for c in t)) + 1e-6
    nb = st.near(i, radius)
    a, b = _blocked_segment(st, i, t, edge, nb)
    if not a < b:
        return False
    with st.ctx():
        k = (a + b) / 2
        si = st.pts[i]
        q = [si[0] + k * t[0], si[1] + k * t[1], si[2] + k * t[2]]
    if q == si:
        return False
    if not _verify(st, i, q, st.near(i, radius + 1e-6), edge):
        return False
    st.pts[i] = q
    st.arr[i] = [float(c) for c in q]
    return True


def _check_index(packing: Packing, index: int, t):
    if packing.n < 2:
        raise ValueError("packing needs at least two spheres")
    if not 0 <= index < packing.n:
        raise IndexError(f"sphere index {index} out of range")
    if not any(t):
        raise ValueError("direction must be non-zero")


def feasible_segments(packing: Packing, index: int, t: Sequence[int], digits: int | None = None) -> SegmentSet:
    """All ``k`` in ``[-1, 1]`` for which ``s_index + k t`` is an admissible position.

    A position is admissible when it keeps the contact distance to every
    other sphere and does not increase the container edge ``D(S)``.  ``k`` is
    measured in the packing's coordinate units.
    """
    _check_index(packing, index, t)
    st = _State(packing, digits or packing.digits)
    return _segments(st, index, tuple(t), st.edge(), [j for j in range(packing.n) if j != index])


def move_sphere(packing: Packing, index: int, t: Sequence[int], digits: int | None = None) -> Packing:
    """Move one sphere to the midpoint of its feasible segment along ``t``."""
    _check_index(packing, index, t)
    st = _State(packing, digits or packing.digits)
    if not _try_move(st, index, tuple(t), st.edge()):
        return packing
    return st.to_packing()


# -------------------------------------------------------------------- search


def _target_edge_sq(p: int, unit_sq: Fraction) -> Fraction:
    """``D_p^2`` in coordinate units."""
    return Fraction(2 * (p - 1) ** 2) / unit_sq


def _euclid_edge(edge: Fraction, unit_sq: Fraction, digits: int) -> str:
    bits = bits_for(digits)
    with gmpy2.context(gmpy2.get_context(), precision=bits, round=gmpy2.RoundUp):
        sq = edge * edge * unit_sq
        e = gmpy2.sqrt(mpq(sq.numerator, sq.denominator))
    return format_decimal(to_fraction(e), digits, "up")


def run_search(initial: Packing, config: SearchConfig) -> SearchReport:
    """Iterate sphere moves until the edge drops below ``D_p`` or the budget runs out.

    One iteration visits every sphere (index order, or a fresh random order
    when ``config.shuffle_order``) with a direction drawn uniformly from
    ``config.directions``.  The result carries an exact certificate of the
    final packing.
    """
    start = time.perf_counter()
    rng = np.random.Generator(np.random.PCG64(config.seed))
    st = _State(initial, config.digits)
    n, p = initial.n, initial.p
    target = _target_edge_sq(p, st.unit_sq)
    dirs = config.directions
    edge = edge0 = st.edge()
    iterations = moves = 0
    for it in range(1, config.max_iterations + 1):
        order = rng.permutation(n) if config.shuffle_order else range(n)
        picks = rng.integers(len(dirs), size=n)
        for pos, i in enumerate(order):
            if _try_move(st, int(i), dirs[picks[pos]], edge):
                moves += 1
                edge = st.edge()
        iterations = it
        if config.progress_every and it % config.progress_every == 0:
            log.info("iteration %d: D(S)^2 - D_p^2 = %s", it, format_sci(mpfr(mpq(*_ratio(edge * edge - target)), 64)))
        if config.stop_on_first_improvement and edge * edge < target:
            break

    final = st.to_packing(
        provenance=Provenance.OPTIMIZED if moves else initial.provenance,
        seed=config.seed,
        digits=config.digits,
    )
    cert = certify(final.points, p, st.unit_sq)
    improved = cert.verdict is Verdict.IMPROVED
    diagnostic = None
    if not improved:
        diagnostic = (
            f"no improvement registered after {iterations} iterations at {config.digits} digits; "
            f"if D_p - D(S) is below 1e-{config.digits} it cannot be seen, try digits="
            f"{math.ceil(config.digits * DIGIT_FACTOR)}"
        )
    return SearchReport(
        config=config,
        n=n,
        p=p,
        r=initial.r,
        iterations=iterations,
        moves=moves,
        initial_edge=_euclid_edge(edge0, st.unit_sq, config.digits),
        final_edge=_euclid_edge(edge, st.unit_sq, config.digits),
        improvement=cert.improvement or format_sci(mpfr(0)),
        improved=improved,
        verdict=cert.verdict.value,
        diagnostic=diagnostic,
        wall_time=time.perf_counter() - start,
        packing=final,
    )


def _ratio(q: Fraction):
    return q.numerator, q.denominator


def prepare_start(
    packing: Packing,
    digits: int,
    margin_digits: int | None = None,
    seed: int = 0,
    jitter: float = 0.2,
) -> Packing:
    """Euclidean starting copy of a lattice packing with a little slack.

    In an exact ccp fragment every segment is symmetric about its sphere, so
    midpoint moves are all zero.  The copy is scaled by ``1 + eps`` with
    ``eps = 10^-margin_digits`` and each coordinate receives a seeded
    non-negative offset below ``jitter * eps`` lattice spacings.  That breaks
    the ties while keeping every distance above 2.
    """
    digits = max(digits, MIN_DIGITS)
    if margin_digits is None:
        margin_digits = digits - max(6, digits // 5)
    bits = bits_for(digits)
    seq = np.random.SeedSequence(seed)
    jit_rng = np.random.Generator(np.random.PCG64(seq.spawn(1)[0]))
    noise = jit_rng.random((packing.n, 3))
    unit_sq = Fraction(packing.unit_sq)
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        scale = gmpy2.sqrt(mpq(unit_sq.numerator, unit_sq.denominator))
        eps = mpfr(10) ** (-margin_digits)
        grow = scale * (1 + eps)
        amp = scale * eps * mpfr(jitter)
        pts = []
        for pt, row in zip(packing.points, noise):
            pts.append(tuple(_mp(c) * grow + amp * mpfr(float(u)) for c, u in zip(pt, row)))
    out = packing.with_points(pts, unit_sq=Fraction(1), digits=digits, seed=seed)
    m2, _ = min_sq_and_edge(out.points)
    if m2 < 4:
        raise ValueError("prepared start overlaps; lower jitter or margin_digits")
    return out


def improve(p: int, r: int, config: SearchConfig) -> SearchReport:
    """Search for an improvement starting from the ccp packing with pattern ``r`` removed."""
    start = apply_pattern(p, r, config.digits)
    prepared = prepare_start(start, config.digits, config.margin_digits, config.seed, config.jitter)
    # the search stream is seeded independently of the jitter stream
    return run_search(prepared, config)


def escalate(p: int, r: int, config: SearchConfig, max_digits: int = 2000, factor: float = DIGIT_FACTOR) -> SearchReport:
    """Run :func:`improve`, raising the precision by ``factor`` until an improvement registers."""
    cfg = config
    while True:
        report = improve(p, r, cfg)
        if report.improved or cfg.digits >= max_digits:
            return report
        digits = min(max_digits, math.ceil(cfg.digits * factor))
        log.info("escalating precision from %d to %d digits", cfg.digits, digits)
        cfg = SearchConfig(**{**asdict(cfg), "digits": digits})
