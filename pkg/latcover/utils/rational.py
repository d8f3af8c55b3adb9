"""Exact rational helpers: parsing, [num, den] pairs, roots, primitive vectors."""
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from sympy import integer_nthroot

from ..errors import MalformedInput

Rational = Fraction | int


def as_fraction(value) -> Fraction:
    """
    Convert a user-facing number to an exact Fraction.

    Accepts ints, Fractions, floats (converted exactly), strings such as
    "3", "-2/3" or "0.25", and [numerator, denominator] pairs.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise MalformedInput(f"not a rational number: {value!r}")
    if isinstance(value, (int, float)):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return from_pair(value)
    raise MalformedInput(f"not a rational number: {value!r}")


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise MalformedInput(f"cannot parse rational {text!r}") from exc


def from_pair(pair: Sequence[int]) -> Fraction:
    num, den = pair
    if not isinstance(num, int) or not isinstance(den, int) or isinstance(num, bool):
        raise MalformedInput(f"rational pair must hold two integers, got {list(pair)!r}")
    if den == 0:
        raise MalformedInput("zero denominator")
    return Fraction(num, den)


def to_pair(value: Rational) -> list[int]:
    value = Fraction(value)
    return [value.numerator, value.denominator]


def rationalize(x: float, cap: int) -> Fraction:
    """Continued-fraction truncation of a float with denominator at most `cap`."""
    return Fraction(x).limit_denominator(cap)


def _int_root(k: int, n: int) -> int | None:
    if k < 0:
        return None
    root, exact = integer_nthroot(k, n)
    return int(root) if exact else None


def exact_root(q: Rational, n: int) -> Fraction | None:
    """The nonnegative rational n-th root of q, or None if it is irrational."""
    q = Fraction(q)
    if q < 0:
        return None
    num = _int_root(q.numerator, n)
    den = _int_root(q.denominator, n)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def floor_root(q: Rational, n: int, denominator: int = 10**6) -> Fraction:
    """A rational lower bound for q**(1/n) with the given denominator."""
    q = Fraction(q)
    if q <= 0:
        return Fraction(0)
    # largest k with k^n <= q·d^n, and k is an integer so flooring the target is exact
    target = q * denominator**n
    k, _ = integer_nthroot(target.numerator // target.denominator, n)
    return Fraction(int(k), denominator)


def primitive(vector: Iterable[Rational]) -> tuple[int, ...]:
    """Scale a rational vector by a positive factor to coprime integers."""
    vec = [Fraction(v) for v in vector]
    den = 1
    for v in vec:
        den = den * v.denominator // gcd(den, v.denominator)
    ints = [int(v * den) for v in vec]
    g = 0
    for k in ints:
        g = gcd(g, k)
    if g > 1:
        ints = [k // g for k in ints]
    return tuple(ints)


def decimal(value: Rational, digits: int = 20) -> str:
    """Fixed-point rendering that is exact for dyadic values like 1 + 2**-16."""
    value = Fraction(value)
    sign = "-" if value < 0 else ""
    value = abs(value)
    whole = value.numerator // value.denominator
    rest = value - whole
    scaled = rest * 10**digits
    frac = scaled.numerator // scaled.denominator
    text = f"{frac:0{digits}d}".rstrip("0")
    return f"{sign}{whole}.{text}" if text else f"{sign}{whole}"
