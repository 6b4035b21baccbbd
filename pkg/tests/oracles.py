"""Independent reference implementations used by the test-suite."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from spherepack.lattice import Packing, Provenance
from spherepack.numerics import format_decimal, to_fraction


def scan_feasible(points, index, t, step=1e-4):
    """Dense scan of ``k`` in [-1, 1]: True where ``s + k t`` is admissible.

    Admissible means every distance to the other centres is at least 2 and
    the container edge does not grow.  Pure float64, no shared code.
    """
    pts = np.asarray(points, dtype=float)
    t = np.asarray(t, dtype=float)
    others = np.delete(pts, index, axis=0)
    edge = np.max(pts.max(axis=0) - pts.min(axis=0))
    lo, hi = others.min(axis=0), others.max(axis=0)
    ks = np.round(np.arange(-1.0, 1.0 + step / 2, step), 10)
    q = pts[index][None, :] + ks[:, None] * t[None, :]
    d2 = ((q[:, None, :] - others[None, :, :]) ** 2).sum(axis=2).min(axis=1)
    span = (np.maximum(q, hi) - np.minimum(q, lo)).max(axis=1)
    ok = (d2 >= 4 - 1e-12) & (span <= edge + 1e-12)
    return ks, ok


def random_packing(rng, n, spacing=2.3, places=12, jitter=0.1):
    """A valid packing on a jittered cubic grid with exact decimal coordinates."""
    side = int(np.ceil(n ** (1 / 3))) + 1
    cells = rng.choice(side**3, size=n, replace=False)
    rows = []
    for c in cells:
        i, j, k = np.unravel_index(c, (side, side, side))
        base = np.array([i, j, k], dtype=float) * spacing
        x = base + rng.uniform(-jitter, jitter, 3)
        rows.append(tuple(format_decimal(Fraction(float(v)), places) for v in x))
    return rows


def packing_from_rows(rows, p=3, digits=40) -> Packing:
    import gmpy2
    from gmpy2 import mpfr

    from spherepack.numerics import bits_for

    with gmpy2.context(gmpy2.get_context(), precision=bits_for(digits)):
        pts = tuple(tuple(mpfr(c) for c in row) for row in rows)
    return Packing(points=pts, p=p, provenance=Provenance.PATTERN, digits=digits)


def exact_pair_sq(a, b) -> Fraction:
    return sum((to_fraction(x) - to_fraction(y)) ** 2 for x, y in zip(a, b))
