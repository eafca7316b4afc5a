"""Exact rational arithmetic backend.

Every number in this package is an exact rational.  Two interchangeable
backends are supported:

* ``gmpy2.mpq`` -- C-speed rationals, used automatically when gmpy2 is
  importable (roughly an order of magnitude faster on simplex pivots),
* ``fractions.Fraction`` -- pure-Python fallback.

Set ``IVAUCTION_RATIONAL=fractions`` (or ``gmpy2``) to force a backend.
``benchmarks/bench_backends.py`` compares the two on representative solves.

Both types interoperate: they hash and compare equal for equal values, so
callers never need to know which backend is active.
"""

from __future__ import annotations

import os
from fractions import Fraction

__all__ = [
    "BACKEND",
    "Rat",
    "ONE",
    "ZERO",
    "rat",
    "parse_rat",
    "fmt_rat",
    "is_integral",
]

_forced = os.environ.get("IVAUCTION_RATIONAL", "").strip().lower()

if _forced in ("", "gmpy2"):
    try:
        from gmpy2 import mpq as _mpq

        Rat = _mpq
        BACKEND = "gmpy2"
    except ImportError:
        if _forced == "gmpy2":
            raise
        Rat = Fraction
        BACKEND = "fractions"
elif _forced == "fractions":
    Rat = Fraction
    BACKEND = "fractions"
else:
    raise RuntimeError(f"unknown IVAUCTION_RATIONAL backend {_forced!r}")

ZERO = Rat(0)
ONE = Rat(1)


def rat(p, q=1):
    """Build a rational from ints, a rational of either backend, or a string."""
    if isinstance(p, str):
        return parse_rat(p) / Rat(q)
    return Rat(p) / Rat(q) if q != 1 else Rat(p)


def parse_rat(text):
    """Parse "p/q" or "p" (integers only; no floats by design)."""
    s = text.strip()
    if "/" in s:
        num, den = s.split("/", 1)
        d = int(den)
        if d == 0:
            raise ValueError(f"zero denominator in rational {text!r}")
        return Rat(int(num)) / Rat(d)
    return Rat(int(s))


def fmt_rat(x) -> str:
    """Serialize as "p/q", or "p" when the denominator is 1."""
    return str(x)


def is_integral(x) -> bool:
    return x.denominator == 1
