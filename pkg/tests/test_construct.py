from fractions import Fraction

import mpmath
import pytest

from spherepack.certifier import Verdict, certify, inflate_to_valid
from spherepack.construct import (
    DEFAULT_MAX_P,
    build_P2,
    build_Pp,
    expected_tau3_exponent,
    lower_bound_I,
    next_shell_separation,
    precision_schedule,
    tau_recurrence,
)
from spherepack.lattice import g
from spherepack.numerics import PrecisionError


def _mp_taus(p_max, dps):
    """Independent evaluation of the recurrence with mpmath."""
    mpmath.mp.dps = dps
    r2 = mpmath.sqrt(2)
    a = mpmath.findroot(lambda x: x**4 + 4 * x**3 + 8 * x**2 - 8, 0.8)
    t1 = 2 * r2 - 2 - a
    out = []
    for q in range(3, p_max + 1):
        if q > 3:
            t3p = out[-1][2]
            t1 = r2 + t3p - mpmath.sqrt(-t3p**2 + 2 * r2 * t3p + 2)
        t2 = r2 / 3 * (t1 / r2 + 2 - mpmath.sqrt(-t1**2 + 2 * r2 * t1 + 4))
        t3 = r2 / 2 * (r2 * t2 + 1 - mpmath.sqrt(-t2**2 + 2 * r2 * t2 + 1))
        out.append((t1, t2, t3))
    return out


def test_p2_tangent_and_inside():
    cp = build_P2(30)
    (x0, y0, z0), (x1, y1, z1) = cp.points
    a, b = z0, x1
    d2 = (x1 - x0) ** 2 + (y1 - y0) ** 2 + (z1 - z0) ** 2
    assert abs(float(d2 - 4)) < 1e-28
    assert a < 2**0.5 and b < 2**0.5
    mpmath.mp.dps = 40
    a_ref = mpmath.findroot(lambda x: x**4 + 4 * x**3 + 8 * x**2 - 8, 0.8)
    b_ref = mpmath.sqrt(2 - a_ref**2 / 2)
    assert abs(Fraction(float(b)) - Fraction(float(b_ref))) < 1e-15


def test_tau_chain_ordering_and_oracle():
    taus = tau_recurrence(4)
    ref = _mp_taus(4, 400)
    for t, (r1, r2_, r3) in zip(taus, ref):
        assert t.tau1 > t.tau2 > t.tau3 > 0
        for ours, theirs in ((t.tau1, r1), (t.tau2, r2_), (t.tau3, r3)):
            rel = abs(ours.to_fraction() - Fraction(mpmath.nstr(theirs, 60))) / Fraction(mpmath.nstr(theirs, 60))
            assert rel < Fraction(1, 10**30)
    assert abs(float(taus[0].tau1) - 0.0100) < 5e-4


def test_tau_schedule_mapping_and_callable():
    by_map = tau_recurrence(3, {3: 60})
    by_fn = tau_recurrence(3, lambda q: 60)
    assert by_map[0].tau3.digits == by_fn[0].tau3.digits == 60


def test_tau_precision_error():
    with pytest.raises(PrecisionError) as info:
        tau_recurrence(4, {3: 25, 4: 25})
    assert info.value.required_digits == precision_schedule(4)


def test_tau3_exponent_grows_eightfold():
    e = [expected_tau3_exponent(p) for p in (3, 4, 5)]
    assert -10 < e[0] < -9
    assert 7.5 < e[1] / e[0] < 8.5
    assert 7.5 < e[2] / e[1] < 8.5


@pytest.mark.parametrize("p", [3, 4])
def test_tau3_exponent_matches_computed(p):
    t3 = tau_recurrence(p)[-1].tau3
    assert abs(t3.log10_abs() - expected_tau3_exponent(p)) < 1.0


@pytest.mark.parametrize("p", [3, 4, 5])
def test_build_Pp_cardinality_and_edge(p):
    cp = build_Pp(p)
    digits = cp.packing.digits
    assert cp.packing.n == g(p) - 2
    tau3 = cp.tau.tau3
    edge = cp.certified_edge.to_fraction()
    mpmath.mp.dps = digits + 10
    target = Fraction(mpmath.nstr((p - 1) * mpmath.sqrt(2), digits + 5)) - tau3.to_fraction()
    assert abs(edge - target) < Fraction(1, 10 ** (digits // 2))


@pytest.mark.parametrize("p", [3, 4, 5])
def test_tangency_residuals(p):
    cp = build_Pp(p)
    assert cp.residuals
    for key, h in cp.residuals.items():
        assert h.log10_abs() < -(cp.packing.digits // 2), key


@pytest.mark.parametrize("p", [3, 4, 5])
def test_separated_from_next_shell(p):
    assert next_shell_separation(build_Pp(p)) > 0


def test_build_Pp_certifies_improved():
    cp = build_Pp(4)
    cert = certify(inflate_to_valid(cp.points, cp.packing.digits), 4)
    assert cert.verdict is Verdict.IMPROVED
    assert cert.margin_exponent == -79


def test_build_Pp_limits():
    with pytest.raises(ValueError):
        build_Pp(DEFAULT_MAX_P + 1)
    with pytest.raises(ValueError):
        build_Pp(1)
    assert build_Pp(2).packing.n == 2


def test_lower_bounds_match_known_values():
    i3 = lower_bound_I(3)
    i4 = lower_bound_I(4)
    assert Fraction("8.235e-11") < i3.to_fraction() < Fraction("8.236e-11")
    assert Fraction("1.276e-79") < i4.to_fraction() < Fraction("1.277e-79")


def test_lower_bound_is_below_oracle():
    ref = _mp_taus(3, 80)[-1][2]
    mpmath.mp.dps = 80
    exact = 2 / (2 * mpmath.sqrt(2) - ref) - mpmath.sqrt(2) / 2
    assert lower_bound_I(3, 60).to_fraction() <= Fraction(mpmath.nstr(exact, 70))


@pytest.mark.parametrize("p", [3, 4, 5])
def test_lower_bound_positive(p):
    assert lower_bound_I(p) > 0
