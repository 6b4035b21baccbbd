import itertools
from fractions import Fraction

import numpy as np
import pytest

from spherepack.certifier import brute_min_distance
from spherepack.lattice import (
    PATTERNS,
    LatticePoint,
    Provenance,
    apply_pattern,
    contains_origin,
    g,
    gen_ccp,
    lattice_min_sq_distance,
    lattice_points,
    lattice_span,
    layer,
    mobile_spheres,
    split_layer,
)


@pytest.mark.parametrize("p,expected", [(1, 1), (2, 4), (3, 14), (4, 32), (5, 63), (6, 108), (12, 864)])
def test_g_values(p, expected):
    assert g(p) == expected


def test_g_rejects_zero():
    with pytest.raises(ValueError):
        g(0)


def test_gen_ccp_p2_corners():
    pk = gen_ccp(2)
    assert set(pk.lattice) == {(0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)}
    assert pk.unit_sq == 2


def test_gen_ccp_count_matches_enumeration():
    brute = sum(1 for c in itertools.product(range(5), repeat=3) if sum(c) % 2 == 0)
    assert gen_ccp(5).n == brute == 63


@pytest.mark.parametrize("p", range(2, 9))
def test_gen_ccp_geometry(p):
    pk = gen_ccp(p)
    assert pk.n == g(p)
    assert contains_origin(pk)
    assert lattice_min_sq_distance(pk.lattice) == 2
    assert lattice_span(pk.lattice) == p - 1
    assert pk.edge() == p - 1
    assert pk.edge_sq_euclidean() == 2 * (p - 1) ** 2


def test_gen_ccp_rejects_small_p():
    with pytest.raises(ValueError):
        gen_ccp(1)


def test_exact_min_distance_of_ccp_is_two():
    pk = gen_ccp(3)
    assert brute_min_distance(pk.exact_points()) == 2
    assert brute_min_distance(pk.exact_points()) * pk.unit_sq == 4


@pytest.mark.parametrize("p,size", [(3, 10), (5, 31)])
def test_layer_sizes(p, size):
    pts = layer(p)
    assert len(pts) == size == g(p) - g(p - 1)
    assert all(max(q) == p - 1 for q in pts)


@pytest.mark.parametrize("p", range(3, 10))
def test_layers_telescope(p):
    assert sum(len(layer(q)) for q in range(3, p + 1)) + 4 == g(p)


def _classify(q, p):
    if sum(1 for c in q if c <= p - 3) >= 2:
        return 0
    return 1 if min(q) > 0 else 2


@pytest.mark.parametrize("p", range(3, 9))
def test_split_layer_is_partition(p):
    parts = split_layer(p)
    pts = layer(p)
    assert sorted(itertools.chain(*parts)) == sorted(pts)
    brute = [[], [], []]
    for q in lattice_points(p):
        if max(q) == p - 1:
            brute[_classify(q, p)].append(q)
    assert [len(x) for x in parts] == [len(x) for x in brute]


def test_split_layer_p5_sizes():
    assert [len(x) for x in split_layer(5)] == [15, 13, 3]


def test_patterns_table():
    assert PATTERNS[2] == ((0, 1, 1), (1, 1, 0))
    assert PATTERNS[3] == ((0, 0, 0), (1, 0, 1), (2, 0, 0))
    for r, pts in PATTERNS.items():
        assert len(pts) == r
        assert all(sum(q) % 2 == 0 for q in pts)
        assert all(max(q) <= 2 for q in pts)


@pytest.mark.parametrize("p,r", [(4, 2), (4, 3), (5, 4), (7, 6), (6, 5)])
def test_apply_pattern_subset(p, r):
    pk = apply_pattern(p, r)
    assert pk.n == g(p) - r
    assert pk.provenance is Provenance.PATTERN
    assert set(pk.lattice) <= set(lattice_points(p))
    assert not set(pk.lattice) & set(PATTERNS[r])
    assert lattice_min_sq_distance(pk.lattice) == 2
    assert mobile_spheres(pk.lattice, p)


def test_apply_pattern_errors():
    with pytest.raises(ValueError):
        apply_pattern(4, 7)
    with pytest.raises(ValueError):
        apply_pattern(4, 4)
    with pytest.raises(ValueError):
        apply_pattern(2, 3)


def test_ccp_is_jammed():
    for p in (3, 4, 5):
        assert mobile_spheres(lattice_points(p), p) == []


def _sample_free(pk, idx, box, rng, tries=4000):
    pts = np.array(pk.lattice, dtype=float) * np.sqrt(2)
    others = np.delete(pts, idx, axis=0)
    hits = 0
    for _ in range(tries):
        q = pts[idx] + rng.uniform(*box)
        if np.any(q < 0) or np.any(q > (pk.p - 1) * np.sqrt(2)):
            continue
        if np.min(np.sum((others - q) ** 2, axis=1)) >= 4 + 1e-9 and np.any(q != pts[idx]):
            hits += 1
    return hits


def test_mobility_by_rejection_sampling():
    """The corner sphere touching both holes of R_2 has room to move into them."""
    pk = apply_pattern(4, 2)
    idx = pk.lattice.index(LatticePoint(0, 0, 0))
    rng = np.random.default_rng(7)
    assert _sample_free(pk, idx, ([0, 0, 0], [0.02, 0.5, 0.02]), rng) > 0
    assert idx in mobile_spheres(pk.lattice, 4)


def test_face_sphere_between_holes_is_jammed():
    """(1,0,1) also touches both holes but is pinned by its four in-plane neighbours."""
    pk = apply_pattern(4, 2)
    idx = pk.lattice.index(LatticePoint(1, 0, 1))
    rng = np.random.default_rng(7)
    assert _sample_free(pk, idx, ([-0.05, 0, -0.05], [0.05, 0.3, 0.05]), rng) == 0
    assert idx not in mobile_spheres(pk.lattice, 4)


def test_packing_helpers():
    pk = gen_ccp(2)
    assert len(pk) == 4
    assert pk.contact_sq == Fraction(2)
    assert pk.as_array().shape == (4, 3)
    moved = pk.with_points(pk.points[:2])
    assert moved.n == 2 and moved.lattice is None
