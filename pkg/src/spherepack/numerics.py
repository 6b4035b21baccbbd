"""Arbitrary-precision reals with explicit decimal precision and directed rounding.

Everything is backed by MPFR through :mod:`gmpy2`.  Precision is a per-value
property given in significant decimal digits; binary operations between two
:class:`BigReal` values run at the larger of the two precisions.  Exact
rationals are plain :class:`fractions.Fraction` objects whose components are
``gmpy2.mpz`` integers, which keeps parsing of very long decimal strings fast
and free of the interpreter's int/str conversion limit.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Union

import gmpy2
from gmpy2 import mpfr, mpq, mpz

MIN_DIGITS = 20

ROUNDING = {
    "nearest": gmpy2.RoundToNearest,
    "down": gmpy2.RoundDown,
    "up": gmpy2.RoundUp,
    "zero": gmpy2.RoundToZero,
}

_LOG2_10 = math.log2(10)
MPFR = type(mpfr(0))
_DECIMAL_RE = re.compile(r"^\s*([+-]?)(\d*)(?:\.(\d*))?(?:[eE]([+-]?\d+))?\s*$")

ExactRational = Fraction


class PrecisionError(ArithmeticError):
    """Raised when a computation cannot be resolved at the requested precision.

    ``required_digits`` carries a suggested precision, when one can be given.
    """

    def __init__(self, message: str, required_digits: int | None = None):
        super().__init__(message)
        self.required_digits = required_digits


def bits_for(digits: int) -> int:
    """Binary precision that holds ``digits`` significant decimal digits."""
    return int(math.ceil(max(digits, MIN_DIGITS) * _LOG2_10)) + 8


def context(digits: int, mode: str = "nearest"):
    """Local MPFR context at ``digits`` decimal digits and the named rounding mode."""
    return gmpy2.context(
        gmpy2.get_context(), precision=bits_for(digits), round=ROUNDING[mode]
    )


def _as_mpfr_operand(x):
    if isinstance(x, BigReal):
        return x.value
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return x


Number = Union["BigReal", int, Fraction, str, float]


class BigReal:
    """Immutable arbitrary-precision real tagged with a decimal precision.

    >>> x = BigReal(2, digits=30)
    >>> (x * x).digits
    30
    """

    __slots__ = ("value", "digits")

    def __init__(self, value=0, digits: int = MIN_DIGITS, mode: str = "nearest"):
        digits = max(int(digits), MIN_DIGITS)
        with context(digits, mode):
            if isinstance(value, BigReal):
                v = +value.value
            elif isinstance(value, Fraction):
                v = mpfr(mpq(value.numerator, value.denominator))
            else:
                v = mpfr(value)
        object.__setattr__(self, "value", v)
        object.__setattr__(self, "digits", digits)

    def __setattr__(self, name, value):
        raise AttributeError("BigReal is immutable")

    @classmethod
    def _wrap(cls, value, digits):
        obj = object.__new__(cls)
        object.__setattr__(obj, "value", value)
        object.__setattr__(obj, "digits", digits)
        return obj

    def _binop(self, other, fn, mode="nearest"):
        digits = self.digits
        if isinstance(other, BigReal):
            digits = max(digits, other.digits)
        with context(digits, mode):
            return BigReal._wrap(fn(self.value, _as_mpfr_operand(other)), digits)

    def __add__(self, other):
        return self._binop(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binop(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._binop(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binop(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binop(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return self._binop(other, lambda a, b: b / a)

    def __pow__(self, k: int):
        return self._binop(k, lambda a, b: a**b)

    def __neg__(self):
        # unary ops round to the ambient precision, so run them in our own
        with context(self.digits):
            return BigReal._wrap(-self.value, self.digits)

    def __abs__(self):
        with context(self.digits):
            return BigReal._wrap(abs(self.value), self.digits)

    def _cmp_value(self, other):
        if isinstance(other, BigReal):
            return other.value
        if isinstance(other, Fraction):
            return mpq(other.numerator, other.denominator)
        return other

    def __eq__(self, other):
        return self.value == self._cmp_value(other)

    def __lt__(self, other):
        return self.value < self._cmp_value(other)

    def __le__(self, other):
        return self.value <= self._cmp_value(other)

    def __gt__(self, other):
        return self.value > self._cmp_value(other)

    def __ge__(self, other):
        return self.value >= self._cmp_value(other)

    def __hash__(self):
        return hash(self.value)

    def __float__(self):
        return float(self.value)

    def __repr__(self):
        return f"BigReal({self.to_string(min(self.digits, 25))!r}, digits={self.digits})"

    def with_digits(self, digits: int, mode: str = "nearest") -> "BigReal":
        return BigReal(self, digits, mode)

    def to_fraction(self) -> Fraction:
        return to_fraction(self.value)

    def to_string(self, significant: int | None = None, mode: str = "nearest") -> str:
        """Scientific rendering with ``significant`` digits (default: own precision)."""
        return format_sci(self.value, significant or self.digits, mode)

    def log10_abs(self) -> float:
        """Decimal logarithm of ``|self|``, safe for exponents far below 1e-308."""
        if self.value == 0:
            return -math.inf
        return log10_abs(self.value)


def sqrt(x: Number, mode: str = "nearest", digits: int | None = None) -> BigReal:
    """Square root with directed rounding.

    ``mode='down'`` returns ``v`` with ``v*v <= x``; ``mode='up'`` returns
    ``v*v >= x``.  Raises ``ValueError`` for negative input.
    """
    if not isinstance(x, BigReal):
        x = BigReal(x, digits or MIN_DIGITS)
    digits = digits or x.digits
    if x.value < 0:
        raise ValueError(f"sqrt of negative number {x!r}")
    with context(digits, mode):
        return BigReal._wrap(gmpy2.sqrt(x.value), max(digits, MIN_DIGITS))


def sqrt2(digits: int, mode: str = "nearest") -> BigReal:
    return sqrt(BigReal(2, digits), mode, digits)


def _quartic(x: Fraction) -> Fraction:
    return x**4 + 4 * x**3 + 8 * x**2 - 8


def quartic_root_a(digits: int = MIN_DIGITS) -> BigReal:
    """Positive root of ``a^4 + 4a^3 + 8a^2 - 8``.

    The polynomial is increasing on ``a > 0``, negative at 0 and positive at 1,
    so the root is unique.  A short exact bisection gives a bracket, Newton's
    method at doubling precision refines it, and the final value is accepted
    only after an exact sign check on both sides of a tight enclosure.
    """
    digits = max(int(digits), MIN_DIGITS)
    lo, hi = Fraction(0), Fraction(1)
    for _ in range(30):
        mid = (lo + hi) / 2
        if _quartic(mid) < 0:
            lo = mid
        else:
            hi = mid
    target = bits_for(digits) + 16
    prec = 64
    with gmpy2.context(gmpy2.get_context(), precision=prec):
        a = mpfr(mpq((lo + hi).numerator, (lo + hi).denominator * 2))
    while True:
        with gmpy2.context(gmpy2.get_context(), precision=prec):
            a = mpfr(a)
            for _ in range(2):
                f = ((a + 4) * a + 8) * a * a - 8
                df = ((4 * a + 12) * a + 16) * a
                a = a - f / df
        if prec >= target:
            break
        prec = min(2 * prec, target)

    # certified enclosure: exact sign change across [a - w, a + w]
    q = to_fraction(a)
    w = Fraction(1, 2 ** (target - 8))
    while not (_quartic(q - w) < 0 < _quartic(q + w)):
        w *= 2
        if w > Fraction(1, 10**digits):
            raise PrecisionError("quartic root enclosure failed", digits * 2)
    return BigReal(a, digits)


# ---------------------------------------------------------------- rationals


def to_fraction(x) -> Fraction:
    """Exact rational value of an mpfr / BigReal / int / decimal string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, BigReal):
        x = x.value
    if isinstance(x, str):
        return parse_decimal(x)
    if isinstance(x, int) or type(x).__name__ == "mpz":
        return Fraction(mpz(x))
    n, d = x.as_integer_ratio()
    return Fraction(mpz(n), mpz(d))


def parse_decimal(s: str) -> Fraction:
    """Parse a finite decimal string such as ``'-1.25e-3'`` with no rounding."""
    m = _DECIMAL_RE.match(s)
    if not m or not (m.group(2) or m.group(3)):
        raise ValueError(f"not a finite decimal: {s!r}")
    sign, whole, frac, exp = m.groups()
    frac = frac or ""
    num = mpz((whole or "0") + frac)
    scale = len(frac) - int(exp or 0)
    if sign == "-":
        num = -num
    if scale >= 0:
        return Fraction(num, mpz(10) ** scale)
    return Fraction(num * mpz(10) ** (-scale))


def _round_int(num, den, mode: str):
    q, r = divmod(num, den)  # floor division
    if r == 0 or mode in ("down",):
        return q
    if mode == "up":
        return q + 1
    if mode == "zero":
        return q if num >= 0 else q + 1
    twice = 2 * r
    if twice > den or (twice == den and q % 2 == 1):
        return q + 1
    return q


def round_fraction(q: Fraction, places: int, mode: str = "nearest") -> Fraction:
    """Round ``q`` to ``places`` digits after the decimal point."""
    scale = mpz(10) ** places
    n = _round_int(mpz(q.numerator) * scale, mpz(q.denominator), mode)
    return Fraction(n, scale)


def format_decimal(q: Fraction, places: int, mode: str = "nearest") -> str:
    """Fixed-point rendering of an exact rational with ``places`` fractional digits."""
    scale = mpz(10) ** places
    n = _round_int(mpz(q.numerator) * scale, mpz(q.denominator), mode)
    sign = "-" if n < 0 else ""
    digits = str(abs(n))
    if places == 0:
        return sign + digits
    digits = digits.rjust(places + 1, "0")
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def exact_decimal(q: Fraction) -> str:
    """Exact decimal rendering; the denominator must be of the form 2^a 5^b."""
    den = mpz(q.denominator)
    a = b = 0
    while den % 2 == 0:
        den //= 2
        a += 1
    while den % 5 == 0:
        den //= 5
        b += 1
    if den != 1:
        raise ValueError("rational has no finite decimal expansion")
    return format_decimal(q, max(a, b))


def log10_abs(x) -> float:
    """``log10(|x|)`` for an mpfr whose exponent may be far outside double range."""
    with gmpy2.context(gmpy2.get_context(), precision=64):
        return float(gmpy2.log10(abs(x)))


def format_sci(x, significant: int = 3, mode: str = "nearest") -> str:
    """Scientific notation with ``significant`` digits, e.g. ``'7.34e-68'``."""
    if isinstance(x, BigReal):
        x = x.value
    if not isinstance(x, MPFR):
        x = mpfr(x)
    if x == 0:
        return "0." + "0" * (significant - 1) + "e+00" if significant > 1 else "0e+00"
    with gmpy2.context(gmpy2.get_context(), round=ROUNDING[mode]):
        mant, exp, _ = x.digits(10, significant)
    sign = ""
    if mant.startswith("-"):
        sign, mant = "-", mant[1:]
    e = exp - 1
    body = mant[0] + ("." + mant[1:] if len(mant) > 1 else "")
    return f"{sign}{body}e{'+' if e >= 0 else '-'}{abs(e):02d}"
