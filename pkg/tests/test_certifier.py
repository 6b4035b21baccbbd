from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spherepack.certifier import (
    Verdict,
    brute_min_distance,
    certify,
    inflate_to_valid,
    min_distance_enclosure,
    min_sq_and_edge,
)
from spherepack.construct import build_Pp, lower_bound_I
from spherepack.io import render_packing
from spherepack.lattice import gen_ccp
from spherepack.numerics import format_decimal, parse_decimal, to_fraction

from .oracles import random_packing


def test_brute_two_points():
    assert brute_min_distance([("0", "0", "0"), ("2", "0", "0")]) == 4


def test_brute_ccp_lattice():
    assert brute_min_distance(gen_ccp(3).exact_points()) == 2


def test_brute_needs_two_points():
    with pytest.raises(ValueError):
        brute_min_distance([("0", "0", "0")])
    with pytest.raises(ValueError):
        certify([("0", "0", "0")], 2)


@pytest.mark.parametrize("p", [2, 3, 4, 6])
def test_ccp_lattice_units_not_improved(p):
    pk = gen_ccp(p)
    cert = certify(pk.points, p, unit_sq=pk.unit_sq)
    assert cert.verdict is Verdict.NOT_IMPROVED
    assert cert.min_sq_distance == 4
    assert cert.edge_sq == 2 * (p - 1) ** 2
    assert cert.margin_exponent is None


@pytest.mark.parametrize("p", [3, 4])
def test_ccp_rendered_file_not_improved(p):
    pf = render_packing(gen_ccp(p), 30)
    assert certify(pf.rows, p).verdict is Verdict.NOT_IMPROVED


def test_constructive_p4_improved_margin():
    cp = build_Pp(4, 200)
    cert = certify(inflate_to_valid(cp.points, 200), 4)
    assert cert.verdict is Verdict.IMPROVED
    assert cert.margin_exponent == -79
    bound = lower_bound_I(4)
    assert parse_decimal(cert.improvement) >= Fraction("1.27e-79")
    assert abs(float(parse_decimal(cert.improvement) / bound.to_fraction()) - 1) < 0.01


def test_perturbed_pair_invalid():
    rows = [list(r) for r in render_packing(gen_ccp(3), 30).rows]
    x = parse_decimal(rows[0][0]) + Fraction(1, 10**5)
    rows[0][0] = format_decimal(x, 30)
    # (0,0,0) touches (1,1,0)*s; pushing x inward by 1e-5 breaks the contact
    assert certify(rows, 3).verdict is Verdict.INVALID


def test_duplicate_points_invalid():
    assert certify([("0", "0", "0"), ("0", "0", "0"), ("5", "5", "5")], 3).verdict is Verdict.INVALID


def test_trailing_zeros_do_not_matter():
    rows = render_packing(gen_ccp(3), 25).rows
    padded = [tuple(c + "000" if "." in c else c + ".000" for c in r) for r in rows]
    assert certify(rows, 3) == certify(padded, 3)


@settings(max_examples=25, deadline=None)
@given(st.fractions(min_value=Fraction(1, 10), max_value=10, max_denominator=1000))
def test_scale_covariance(scale):
    rows = [tuple(parse_decimal(c) * scale for c in r) for r in render_packing(gen_ccp(3), 20).rows]
    base = certify(render_packing(gen_ccp(3), 20).rows, 3)
    m2, e2 = min_sq_and_edge(rows)
    # the verdict depends only on m^2 / E^2 once validity is factored out
    assert m2 / e2 == base.min_sq_distance / base.edge_sq


def test_enclosure_contains_exact_minimum():
    rng = np.random.default_rng(3)
    for _ in range(20):
        rows = random_packing(rng, 10, places=20)
        exact = brute_min_distance(rows)
        low, high = min_distance_enclosure(rows, 25)
        assert to_fraction(low) <= exact <= to_fraction(high)
        arr = np.array([[float(c) for c in r] for r in rows])
        d = arr[:, None, :] - arr[None, :, :]
        d2 = (d**2).sum(axis=2)
        np.fill_diagonal(d2, np.inf)
        assert abs(float(d2.min()) - float(exact)) <= 1e-12 * float(exact)


def test_min_sq_and_edge_agrees_with_brute():
    rng = np.random.default_rng(8)
    for _ in range(10):
        rows = random_packing(rng, 8)
        m2, e2 = min_sq_and_edge(rows)
        assert m2 == brute_min_distance(rows)
        ex = [[parse_decimal(c) for c in r] for r in rows]
        span = max(max(r[a] for r in ex) - min(r[a] for r in ex) for a in range(3))
        assert e2 == span * span


def test_inflate_to_valid():
    cp = build_Pp(3)
    rows = inflate_to_valid(cp.points, 30)
    assert min_sq_and_edge(rows)[0] >= 4
    assert all(r * 10**30 == int(r * 10**30) for row in rows for r in row)


def test_certificate_lines():
    cert = certify(gen_ccp(2).points, 2, unit_sq=2)
    text = "\n".join(cert.lines())
    assert "verdict: not_improved" in text and "n: 4" in text
