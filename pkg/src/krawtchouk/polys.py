"""One-dimensional orthogonal polynomial families used as spectral kernels.

Conventions (all fixed by generating functions):

  Krawtchouk      sum_n K_n(x;N,p) z^n/n!            = (1+qz)^x (1-pz)^(N-x)
  Meixner         sum_n M_n(x;a,q) a_(n)/n! z^n      = (1-z/q)^x (1-z)^(-x-a)
  Poisson-Charlier sum_n C_n(z;nu) w^n/n!            = e^w (1-w/nu)^z
  Laguerre        sum_n L_n(x;beta) z^n              = (1-z)^(-beta) e^(xz/(1-z))
  dual Hahn       R_n(lam(z);a,b,N) = 3F2(-n,-z,z-a-b-1; -a,-N; 1)

The Laguerre convention above (positive exponent) differs from the common one
by x -> -x; it is kept as the public evaluator and callers that need the
classical polynomials negate the argument.

Direct evaluators use explicit terminating sums and are exact for exact
(int/Fraction) inputs; the *_gf_series functions expand the generating
functions with truncated series arithmetic and serve as an independent route.
"""

from __future__ import annotations

import math
from fractions import Fraction

from . import series
from .util import (
    DomainError,
    TruncationError,
    elementary_symmetric,
    exact_div,
    falling,
    rising,
)


def _check_prob(p, name="p"):
    if not 0 < p < 1:
        raise DomainError(f"{name} must lie in (0,1), got {p}")


# -- Krawtchouk ---------------------------------------------------------------

def krawtchouk_eval(n: int, x: int, N: int, p):
    """K_n(x; N, p); K_n/n! is monic of degree n in x."""
    _check_prob(p)
    if not 0 <= n <= N:
        raise DomainError(f"degree n={n} outside 0..{N}")
    if not 0 <= x <= N:
        raise DomainError(f"argument x={x} outside 0..{N}")
    q = 1 - p
    total = 0
    for k in range(max(0, n - (N - x)), min(n, x) + 1):
        total += math.comb(x, k) * q**k * math.comb(N - x, n - k) * (-p) ** (n - k)
    return math.factorial(n) * total


def krawtchouk_norm(n: int, N: int, p):
    """E[K_n(X;N,p)^2] = n!^2 C(N,n) (pq)^n under Binomial(N,p)."""
    _check_prob(p)
    if not 0 <= n <= N:
        raise DomainError(f"degree n={n} outside 0..{N}")
    q = 1 - p
    return math.factorial(n) ** 2 * math.comb(N, n) * (p * q) ** n


def krawtchouk_gf_series(x: int, N: int, p, order: int):
    """Coefficients of (1+qz)^x (1-pz)^(N-x): entry n is K_n(x)/n!."""
    q = 1 - p
    a = series.binom_series(q, x, order) if x else [1] + [0] * order
    b = series.binom_series(-p, N - x, order) if N - x else [1] + [0] * order
    return series.mul(a, b, order)


def krawtchouk_symmetric(n: int, trials, p):
    """n! * e_n(xi_1 - p, ..., xi_N - p) for a 0/1 trial vector.

    Equals krawtchouk_eval(n, sum(trials), len(trials), p): the permutation
    sum collapses to the elementary symmetric polynomial, which is what the
    generating function (product of 1 + z(xi_i - p)) expands to.
    """
    trials = list(trials)
    if any(t not in (0, 1) for t in trials):
        raise DomainError("trials must be 0/1 valued")
    if not 0 <= n <= len(trials):
        raise DomainError(f"degree n={n} outside 0..{len(trials)}")
    e = elementary_symmetric([t - p for t in trials], n)
    return math.factorial(n) * e[n]


# -- Meixner ------------------------------------------------------------------

def meixner_eval(n: int, x: int, a, q):
    """M_n(x; a, q) on the negative-binomial weight; M_n(0) = 1."""
    if a <= 0:
        raise DomainError(f"shape a must be positive, got {a}")
    _check_prob(q, "q")
    if n < 0 or x < 0:
        raise DomainError("n and x must be nonnegative")
    total = 0
    qinv = Fraction(1, 1) / q if not isinstance(q, float) else 1.0 / q
    for k in range(0, min(n, x) + 1):
        total += (
            math.comb(x, k)
            * (-qinv) ** k
            * rising(x + a, n - k)
            * Fraction(1, math.factorial(n - k))
        )
    return exact_div(total * math.factorial(n), rising(a, n))


def meixner_gf_series(x: int, a, q, order: int):
    """Coefficients of (1-z/q)^x (1-z)^(-x-a): entry n is M_n(x) a_(n)/n!."""
    qinv = Fraction(1, 1) / q if not isinstance(q, float) else 1.0 / q
    s1 = series.binom_series(-qinv, x, order)
    s2 = series.binom_series(-1, -(x + a), order)
    return series.mul(s1, s2, order)


def meixner_weight(x: int, a, q):
    """Orthogonality weight a_(x)/x! q^x (1-q)^a (geometric when a=1)."""
    from .util import power

    return rising(a, x) * Fraction(1, math.factorial(x)) * q**x * power(1 - q, a)


# -- Poisson-Charlier ---------------------------------------------------------

def charlier_eval(n: int, z: int, nu):
    """C_n(z; nu) with C_n(0) = 1."""
    if nu <= 0:
        raise DomainError(f"rate nu must be positive, got {nu}")
    if n < 0 or z < 0:
        raise DomainError("n and z must be nonnegative")
    nuinv = Fraction(1, 1) / nu if not isinstance(nu, float) else 1.0 / nu
    total = 0
    for k in range(0, min(n, z) + 1):
        total += falling(n, k) * math.comb(z, k) * (-nuinv) ** k
    return total


def charlier_gf_series(z: int, nu, order: int):
    """Coefficients of e^w (1-w/nu)^z: entry n is C_n(z)/n!."""
    nuinv = Fraction(1, 1) / nu if not isinstance(nu, float) else 1.0 / nu
    ew = [Fraction(1, math.factorial(k)) for k in range(order + 1)]
    return series.mul(ew, series.binom_series(-nuinv, z, order), order)


# -- Laguerre (generating-function convention of this package) ----------------

def laguerre_eval(n: int, x, beta):
    """L_n(x; beta) = [z^n] (1-z)^(-beta) exp(x z/(1-z)).

    Equals the classical L_n^(beta-1)(-x); note the sign of the argument.
    """
    if beta <= 0:
        raise DomainError(f"shape beta must be positive, got {beta}")
    if n < 0:
        raise DomainError("n must be nonnegative")
    total = 0
    for k in range(n + 1):
        total += (
            rising(beta + k, n - k)
            * Fraction(1, math.factorial(n - k) * math.factorial(k))
            * x**k
        )
    return total


def laguerre_gf_series(x, beta, order: int):
    """Coefficients of (1-z)^(-beta) exp(x z/(1-z)): entry n is L_n(x;beta)."""
    pref = series.binom_series(-1, -beta, order)
    inner = [0] + [x] * order  # x z/(1-z) = x(z + z^2 + ...)
    return series.mul(pref, series.exp_series(inner, order), order)


# -- dual Hahn ----------------------------------------------------------------

def dual_hahn_eval(n: int, z: int, a, b, N: int):
    """R_n(lam(z); a, b, N) = 3F2(-n, -z, z-a-b-1; -a, -N; 1), lam(z)=z(z-a-b-1)."""
    if not 0 <= n <= N:
        raise DomainError(f"degree n={n} outside 0..{N}")
    if z < 0:
        raise DomainError("z must be nonnegative")
    if a < N or b < N:
        raise DomainError(f"need a,b >= N, got a={a}, b={b}, N={N}")
    total = 0
    for k in range(0, min(n, z) + 1):
        num = rising(-n, k) * rising(-z, k) * rising(z - a - b - 1, k)
        den = rising(-a, k) * rising(-N, k) * math.factorial(k)
        total += exact_div(num, den)
    return total


# -- birth-death recurrence route ---------------------------------------------

def recurrence_eval(n: int, z, lam, mu):
    """Q_n(z) from -z Q_n = -(lam_n+mu_n) Q_n + lam_n Q_{n+1} + mu_n Q_{n-1}.

    lam and mu are rate callables; Q_0 = 1, Q_{-1} = 0.  Requires lam(k) > 0
    for k < n and mu(0) = 0.
    """
    if n < 0:
        raise DomainError("n must be nonnegative")
    q_prev, q = 0, 1
    for k in range(n):
        lk, mk = lam(k), mu(k)
        if lk <= 0:
            raise DomainError(f"lambda_{k} = {lk} vanishes before degree {n}")
        q_prev, q = q, exact_div((lk + mk - z) * q - mk * q_prev, lk)
    return q


# -- Meixner via centered Bernoulli trials (geometric construction) -----------

def meixner_geometric(n: int, trials, p, L: int):
    """M_n(X; 1, q) reconstructed from centered Bernoulli trials, X = failures
    before the first success.

    Double sum over l <= L and r <= l of

        K_{r-1}(X_{l-1}; l-1, p)/(r-1)! * (xi_l - p) * (-1)^(r-1)
            * q^(l-1-r) * M_{n-1}(l-1; 1, q)

    with X_m = xi_1 + ... + xi_m.  The inner alternating sum telescopes to
    zero for every l past the first success, so the truncation is exact once
    L covers X + 1.
    """
    if n < 1:
        raise DomainError("representation defined for n >= 1")
    _check_prob(p)
    q = 1 - p
    trials = list(trials)[:L]
    if len(trials) < L:
        trials = trials + [0] * (L - len(trials))
    if 1 not in trials:
        raise TruncationError(f"no success within the first {L} trials")
    total = 0
    prefix = 0  # X_{l-1}
    for l in range(1, L + 1):
        xi = trials[l - 1]
        inner = 0
        for r in range(1, l + 1):
            k = krawtchouk_eval(r - 1, prefix, l - 1, p) if l - 1 >= r - 1 else 0
            inner += (
                k
                * Fraction(1, math.factorial(r - 1))
                * (-1) ** (r - 1)
                * q ** (l - 1 - r)
            )
        total += inner * (xi - p) * meixner_eval(n - 1, l - 1, 1, q)
        prefix += xi
    return total
