"""Truncated power-series arithmetic, dense and exact-friendly.

Univariate series are coefficient lists [c0, c1, ...] cut at a requested
order.  Multivariate polynomials are dicts mapping exponent tuples to
coefficients, truncated componentwise against a cap vector.  Everything works
with ints, Fractions or floats.
"""

from __future__ import annotations

from fractions import Fraction

from .util import DomainError, exact_div, rising


def mul(a, b, order: int):
    """Product of two coefficient lists, truncated at z^order."""
    out = [0] * (order + 1)
    for i, ca in enumerate(a[: order + 1]):
        if ca == 0:
            continue
        for j, cb in enumerate(b[: order + 1 - i]):
            if cb != 0:
                out[i + j] += ca * cb
    return out


def pow_int(a, k: int, order: int):
    """a(z)**k for integer k >= 0, truncated."""
    out = [1] + [0] * order
    base = list(a[: order + 1]) + [0] * max(0, order + 1 - len(a))
    for _ in range(k):
        out = mul(out, base, order)
    return out


def binom_series(c, exponent, order: int):
    """(1 + c z)**exponent as a series; exponent may be any rational/float.

    Uses the generalized binomial expansion, exact for exact inputs.
    """
    coeffs = [1]
    term = 1
    for k in range(1, order + 1):
        term = exact_div(term * (exponent - (k - 1)) * c, k)
        coeffs.append(term)
        if exponent == k - 1 and isinstance(exponent, int):
            # polynomial case: remaining coefficients vanish
            coeffs.extend([0] * (order - k))
            break
    return coeffs[: order + 1] + [0] * (order + 1 - len(coeffs))


def exp_series(a, order: int):
    """exp of a series with zero constant term."""
    if a[0] != 0:
        raise DomainError("exp_series requires zero constant term")
    e = [1] + [0] * order
    for m in range(1, order + 1):
        s = 0
        for k in range(1, m + 1):
            ak = a[k] if k < len(a) else 0
            if ak != 0:
                s += k * ak * e[m - k]
        e[m] = s * Fraction(1, m) if not isinstance(s, float) else s / m
    return e


def log1p_coeffs(c, order: int):
    """log(1 + c z) coefficient list."""
    out = [0]
    for k in range(1, order + 1):
        out.append(-((-c) ** k) * Fraction(1, k) if not isinstance(c, float) else -((-c) ** k) / k)
    return out


def scale(a, s):
    return [s * v for v in a]


def add(a, b):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return [x + y for x, y in zip(a, b)]


def coefficient(a, n: int):
    return a[n] if n < len(a) else 0


def rising_weights(a, order: int):
    """[a_(0), a_(1), ..., a_(order)] rising-factorial weights."""
    return [rising(a, k) for k in range(order + 1)]


# -- multivariate: dict[exponent tuple] -> coefficient -----------------------

def mv_const(c, nvars: int):
    return {(0,) * nvars: c} if c != 0 else {}


def mv_linear(const, coeffs):
    """const + sum_i coeffs[i] * w_i as a dict polynomial."""
    nvars = len(coeffs)
    out = {}
    if const != 0:
        out[(0,) * nvars] = const
    for i, c in enumerate(coeffs):
        if c != 0:
            e = [0] * nvars
            e[i] = 1
            out[tuple(e)] = c
    return out


def mv_mul(A, B, cap):
    """Dict-polynomial product, dropping exponents above the componentwise cap."""
    out = {}
    for ea, ca in A.items():
        for eb, cb in B.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            if any(x > m for x, m in zip(e, cap)):
                continue
            out[e] = out.get(e, 0) + ca * cb
    return {e: c for e, c in out.items() if c != 0}


def mv_pow(A, k: int, cap):
    nvars = len(cap)
    out = mv_const(1, nvars)
    for _ in range(k):
        out = mv_mul(out, A, cap)
    return out


def mv_coefficient(A, exponent):
    return A.get(tuple(exponent), 0)
