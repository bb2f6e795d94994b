"""Exact rationals: wire format and a frozen bijection between Q and N.

All exact scalars are :class:`fractions.Fraction`, which is always kept in
lowest terms with a positive denominator.  On the wire they travel as the
string ``"p/q"``.

The bijection Q -> N used by the wellorder keys is the signed Calkin-Wilf
enumeration::

    enc(0) = 0,   enc(q) = 2*cw(q) - 1 for q > 0,   enc(q) = 2*cw(-q) for q < 0

where ``cw`` is the 1-based breadth-first index of a positive rational in the
Calkin-Wilf tree (root 1/1, children a/(a+b) and (a+b)/b).  The first few
values are 0 -> 0, 1 -> 1, -1 -> 2, 1/2 -> 3, -1/2 -> 4, 2 -> 5.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational

__all__ = [
    "Fraction",
    "as_fraction",
    "parse_rational",
    "format_rational",
    "calkin_wilf_index",
    "calkin_wilf_rational",
    "encode_rational",
    "decode_rational",
]


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are rejected: exact paths never guess a rational from binary64.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def parse_rational(text: str) -> Fraction:
    s = text.strip()
    if not s:
        raise ValueError("empty rational")
    if "/" in s:
        num, den = s.split("/", 1)
        if not den.strip():
            raise ValueError(f"malformed rational {text!r}")
        value = Fraction(int(num), int(den))
    else:
        # integers and finite decimals are exact; exponents are not accepted
        if any(c in s for c in "eEnN"):
            raise ValueError(f"malformed rational {text!r}")
        value = Fraction(s)
    return value


def format_rational(q) -> str:
    q = as_fraction(q)
    return f"{q.numerator}/{q.denominator}"


def calkin_wilf_index(q: Fraction) -> int:
    """1-based position of a positive rational in the Calkin-Wilf sequence."""
    q = as_fraction(q)
    if q <= 0:
        raise ValueError("Calkin-Wilf index is defined for positive rationals")
    a, b = q.numerator, q.denominator
    # Walk up to the root; record the path as (bit, run length) pairs.
    runs = []
    while not (a == 1 and b == 1):
        if a < b:
            m, r = divmod(b, a)
            if r == 0:
                m -= 1
                r = a
            runs.append((0, m))
            b = r
        else:
            m, r = divmod(a, b)
            if r == 0:
                m -= 1
                r = b
            runs.append((1, m))
            a = r
    n = 1
    for bit, m in reversed(runs):
        n <<= m
        if bit:
            n |= (1 << m) - 1
    return n


def calkin_wilf_rational(n: int) -> Fraction:
    """Inverse of :func:`calkin_wilf_index`."""
    if n < 1:
        raise ValueError("Calkin-Wilf positions start at 1")
    a, b = 1, 1
    for bit in bin(n)[3:]:
        if bit == "0":
            b = a + b
        else:
            a = a + b
    return Fraction(a, b)


def encode_rational(q) -> int:
    q = as_fraction(q)
    if q == 0:
        return 0
    if q > 0:
        return 2 * calkin_wilf_index(q) - 1
    return 2 * calkin_wilf_index(-q)


def decode_rational(n: int) -> Fraction:
    if n < 0:
        raise ValueError("codes are natural numbers")
    if n == 0:
        return Fraction(0)
    if n % 2:
        return calkin_wilf_rational((n + 1) // 2)
    return -calkin_wilf_rational(n // 2)
