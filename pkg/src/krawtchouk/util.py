"""Shared helpers: dual exact/float arithmetic, combinatorics, exact linear algebra.

Scalars throughout the package are either exact (int / fractions.Fraction) or
64-bit floats.  All routines are written generically so that exact inputs give
exact outputs; mixing an exact value with a float silently degrades to float,
which is the intended behaviour of the dual numeric backend.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import product


class DomainError(ValueError):
    """Parameter or argument outside the documented domain."""


class BasisValidationError(ValueError):
    """Candidate basis failed an orthogonality or probability check."""


class TruncationError(RuntimeError):
    """A truncated computation could not reach the requested accuracy."""


class UnsupportedFamilyError(ValueError):
    """Operation not available for this process family."""


class ScaleError(ValueError):
    """Instance exceeds the desk-scale bound of a brute-force oracle."""


def is_exact(*values) -> bool:
    """True when every value is an int or Fraction (exact arithmetic viable)."""
    return all(isinstance(v, (int, Fraction)) for v in values)


def exact_div(a, b):
    """a / b staying exact for exact operands (int / int would give float)."""
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return Fraction(a) / Fraction(b)
    return a / b


def sqrt_or_float(x):
    """Square root; stays a Fraction when x is an exact perfect square."""
    if isinstance(x, (int, Fraction)):
        f = Fraction(x)
        if f < 0:
            raise DomainError("square root of negative value")
        sn, sd = math.isqrt(f.numerator), math.isqrt(f.denominator)
        if sn * sn == f.numerator and sd * sd == f.denominator:
            return Fraction(sn, sd)
    return math.sqrt(x)


def power(x, k):
    """x**k for integer k (exact path), float fallback for non-integer k."""
    if isinstance(k, int) or (isinstance(k, Fraction) and k.denominator == 1):
        return x ** int(k)
    return float(x) ** float(k)


def rising(a, k: int):
    """Rising factorial a_(k) = a (a+1) ... (a+k-1)."""
    out = 1
    for i in range(k):
        out = out * (a + i)
    return out


def falling(a, k: int):
    """Falling factorial a_[k] = a (a-1) ... (a-k+1)."""
    out = 1
    for i in range(k):
        out = out * (a - i)
    return out


def multinomial(parts) -> int:
    """Multinomial coefficient (sum(parts) choose parts)."""
    parts = list(parts)
    if any(p < 0 for p in parts):
        raise DomainError(f"negative part in multinomial index {parts}")
    total = sum(parts)
    out = 1
    for p in parts:
        out *= math.comb(total, p)
        total -= p
    return out


def compositions(total: int, parts: int):
    """All nonnegative integer vectors of length `parts` summing to `total`.

    Lexicographic order; this is the documented state enumeration order for
    matrix dumps and simulation reports.
    """
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def multi_indices(N: int, length: int):
    """All multi-indices n of given length with |n| <= N, lexicographic."""
    if length == 0:
        yield ()
        return
    for n in product(range(N + 1), repeat=length):
        if sum(n) <= N:
            yield n


def elementary_symmetric(values, nmax: int):
    """e_0 .. e_nmax of the given values, by the standard one-pass recurrence."""
    e = [1] + [0] * nmax
    for v in values:
        for k in range(min(nmax, len(e) - 1), 0, -1):
            e[k] = e[k] + v * e[k - 1]
    return e


def solve_exact(rows, rhs):
    """Solve an (possibly overdetermined) exact linear system A x = b.

    rows: list of coefficient lists, rhs: list of right-hand sides.  Entries
    are coerced to Fraction.  Returns the unique solution as a list of
    Fractions.  Raises ScaleError when the system is rank-deficient (no unique
    solution) and BasisValidationError when it is inconsistent.
    """
    m = [[Fraction(v) for v in row] + [Fraction(b)] for row, b in zip(rows, rhs)]
    nrows, ncols = len(m), len(m[0]) - 1
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    if len(pivots) < ncols:
        raise ScaleError("interpolation system is rank deficient")
    for i in range(r, nrows):
        if m[i][ncols] != 0:
            raise BasisValidationError("inconsistent linear system")
    x = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        x[c] = m[i][ncols]
    return x
