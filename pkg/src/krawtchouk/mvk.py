"""Multivariate Krawtchouk polynomials on the multinomial distribution.

A Basis holds d categories with probabilities p and functions u^(0)..u^(d-1)
where u^(0) is identically 1 and sum_j u^(l)_j u^(m)_j p_j = a_l delta_lm.
The polynomial Q_n(x; u), for a multi-index n = (n_1,..,n_{d-1}) with
|n| <= N and a composition x with |x| = N, is the coefficient of
prod_l w_l^{n_l} in prod_j (1 + sum_l w_l u^(l)_j)^{x_j}.

Indexing is 0-based in code: u[l][j] is the value of function l at category j.
Multi-indices are plain tuples of length d-1 (n_0 = N - |n| is always
derived), compositions are tuples of length d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from . import series
from .util import (
    BasisValidationError,
    DomainError,
    compositions,
    exact_div,
    multi_indices,
    multinomial,
    solve_exact,
    sqrt_or_float,
)

_ATOL = 1e-12


@dataclass(frozen=True)
class Basis:
    """Orthogonal function set on a finite category distribution."""

    p: tuple
    u: tuple  # rows u[l], l = 0..d-1; u[0] all ones
    a: tuple  # norms, a[0] == 1

    @property
    def d(self) -> int:
        return len(self.p)

    def is_orthonormal(self, atol: float = 1e-9) -> bool:
        return all(abs(al - 1) <= atol for al in self.a)

    def column(self, j: int):
        return tuple(self.u[l][j] for l in range(self.d))


def multinomial_pmf(x, p):
    """m(x; p), the multinomial probability of composition x."""
    out = multinomial(x)
    for xj, pj in zip(x, p):
        out = out * pj**xj
    return out


def basis_validate(p, u, atol: float = _ATOL) -> Basis:
    """Check probabilities and orthogonality, recording the norms a_l."""
    p = tuple(p)
    u = tuple(tuple(row) for row in u)
    d = len(p)
    if len(u) != d or any(len(row) != d for row in u):
        raise BasisValidationError(f"need a {d}x{d} function table")
    if any(pj <= 0 for pj in p):
        raise BasisValidationError("category probabilities must be positive")
    total = sum(p)
    if total != 1 and abs(float(total) - 1.0) > atol:
        raise BasisValidationError(f"probabilities sum to {total}, not 1")
    if any(v != 1 for v in u[0]) and any(abs(v - 1) > atol for v in u[0]):
        raise BasisValidationError("u^(0) must be identically 1")
    a = []
    for l in range(d):
        for m in range(l, d):
            s = sum(u[l][j] * u[m][j] * p[j] for j in range(d))
            if l == m:
                a.append(s)
            elif s != 0 and abs(float(s)) > atol:
                raise BasisValidationError(
                    f"functions ({l},{m}) are not orthogonal: inner product {s}"
                )
    if any(al == 0 or abs(float(al)) <= atol for al in a):
        raise BasisValidationError("degenerate basis: zero norm")
    return Basis(p=p, u=u, a=tuple(a))


def _gram_schmidt_rows(p):
    """Orthogonalize 1, t, t^2, ... (t = category index) against weight p."""
    d = len(p)
    rows = [tuple(1 for _ in range(d))]
    norms = [1]
    for deg in range(1, d):
        v = [t**deg for t in range(d)]
        for row, norm in zip(rows, norms):
            proj = exact_div(sum(v[j] * row[j] * p[j] for j in range(d)), norm)
            v = [v[j] - proj * row[j] for j in range(d)]
        norm = sum(v[j] * v[j] * p[j] for j in range(d))
        if norm == 0 or abs(float(norm)) < 1e-14:
            raise DomainError("degenerate probability vector")
        rows.append(tuple(v))
        norms.append(norm)
    return rows, norms


def basis_orthonormal_from(p) -> Basis:
    """Canonical orthonormal basis (a_l = 1) by Gram-Schmidt on monomials.

    Norms stay exact Fractions whenever the normalizing square roots are
    rational; otherwise rows degrade to floats.
    """
    p = tuple(p)
    rows, norms = _gram_schmidt_rows(p)
    out = [rows[0]]
    for row, norm in zip(rows[1:], norms[1:]):
        s = sqrt_or_float(norm)
        out.append(tuple(exact_div(v, s) for v in row))
    return basis_validate(p, out)


def basis_orthogonal_from(p) -> Basis:
    """Like basis_orthonormal_from but unnormalized: exact for rational p."""
    p = tuple(p)
    rows, _ = _gram_schmidt_rows(p)
    return basis_validate(p, rows)


def scaled_krawtchouk_basis(d: int, p) -> Basis:
    """Self-dual basis u^(l)_j = K_l(j; d-1, p)/K_l(0; d-1, p) on Binomial(d-1, p)."""
    from .polys import krawtchouk_eval

    q = 1 - p
    weights = tuple(math.comb(d - 1, j) * p**j * q ** (d - 1 - j) for j in range(d))
    rows = []
    for l in range(d):
        k0 = krawtchouk_eval(l, 0, d - 1, p)
        rows.append(tuple(exact_div(krawtchouk_eval(l, j, d - 1, p), k0) for j in range(d)))
    return basis_validate(weights, rows)


# -- evaluation ----------------------------------------------------------------

def gf_coefficient(n, x, rows):
    """Coefficient of prod w_l^{n_l} in prod_j (rows[0][j] + sum_l w_l rows[l][j])^{x_j}.

    rows[0] need not be constant, and the table need not be square: rows are
    functions (one per formal variable plus the leading one), columns are
    categories.  The standard polynomials pass all-ones as rows[0].
    """
    nvars = len(rows) - 1
    cap = tuple(n)
    poly = series.mv_const(1, nvars)
    for j, xj in enumerate(x):
        if xj == 0:
            continue
        base = series.mv_linear(rows[0][j], [rows[l + 1][j] for l in range(nvars)])
        poly = series.mv_mul(poly, series.mv_pow(base, xj, cap), cap)
    return series.mv_coefficient(poly, n)


def mvk_eval(n, x, basis: Basis):
    """Q_n(x; u) by generating-function coefficient extraction."""
    n, x = tuple(n), tuple(x)
    if len(n) != basis.d - 1 or len(x) != basis.d:
        raise DomainError("dimension mismatch between index, composition and basis")
    if any(v < 0 for v in n) or any(v < 0 for v in x):
        raise DomainError("negative entries")
    if sum(n) > sum(x):
        raise DomainError(f"total degree |n|={sum(n)} exceeds N={sum(x)}")
    return gf_coefficient(n, x, basis.u)


def mvk_eval_explicit(n, x, basis: Basis):
    """Q_n(x; u) by the explicit sum over nonnegative tables r with column sums n.

    Independent of the series route; the table term is
    prod_j (x_j)_[r_j.] / prod_{j,k} r_{jk}! * prod u^(k)_j^{r_{jk}}.
    """
    from .util import falling

    n, x = tuple(n), tuple(x)
    d = basis.d
    total = 0
    per_column = [list(compositions(nk, d)) for nk in n]
    for cols in product(*per_column):
        # cols[k][j] = r_{jk}
        rowsums = [sum(cols[k][j] for k in range(len(n))) for j in range(d)]
        if any(rowsums[j] > x[j] for j in range(d)):
            continue
        term = 1
        for j in range(d):
            term *= falling(x[j], rowsums[j])
        for k in range(len(n)):
            for j in range(d):
                r = cols[k][j]
                if r:
                    term = term * basis.u[k + 1][j] ** r * Fraction(1, math.factorial(r))
        total += term
    return total


def mvk_gram(basis: Basis, N: int, m, n):
    """sum_x Q_m(x) Q_n(x) m(x;p) by brute-force enumeration of |x| = N."""
    total = 0
    for x in compositions(N, basis.d):
        total += mvk_eval(m, x, basis) * mvk_eval(n, x, basis) * multinomial_pmf(x, basis.p)
    return total


def gram_contract(basis: Basis, N: int, n):
    """The orthogonality constant C(N; n+) prod_j a_j^{n_j}."""
    n = tuple(n)
    nplus = (N - sum(n),) + n
    out = multinomial(nplus)
    for nj, aj in zip(n, basis.a[1:]):
        out = out * aj**nj
    return out


def mvk_dual_gram(basis: Basis, N: int, x, y):
    """sum_{|n|<=N} C(N;n+)^-1 prod a_j^{-n_j} Q_n(x) Q_n(y); equals delta_xy / m(x;p)."""
    total = 0
    for n in multi_indices(N, basis.d - 1):
        c = gram_contract(basis, N, n)
        total += exact_div(mvk_eval(n, x, basis) * mvk_eval(n, y, basis), c)
    return total


def mvk_transform(n, phi, basis: Basis, N: int):
    """E[prod_j phi_j^{X_j} Q_n(X;u)] in closed form.

    Equals C(N,|n|) multinomial(|n|;n) T_0^{N-|n|} prod_i T_i^{n_i} with
    T_i = sum_j p_j phi_j u^(i)_j.
    """
    n = tuple(n)
    if sum(n) > N:
        raise DomainError("|n| exceeds N")
    t = [sum(basis.p[j] * phi[j] * basis.u[i][j] for j in range(basis.d))
         for i in range(basis.d)]
    out = math.comb(N, sum(n)) * multinomial(n) * t[0] ** (N - sum(n))
    for i, ni in enumerate(n):
        out = out * t[i + 1] ** ni
    return out


def mvk_transform_bruteforce(n, phi, basis: Basis, N: int):
    """The same expectation by enumeration over compositions (oracle)."""
    total = 0
    for x in compositions(N, basis.d):
        term = multinomial_pmf(x, basis.p) * mvk_eval(n, x, basis)
        for j, xj in enumerate(x):
            term = term * phi[j] ** xj
        total += term
    return total


# -- duality -------------------------------------------------------------------

@dataclass(frozen=True)
class DualBasis:
    """Theorem-3 dual system: omega transpose table, hat scaling and weights b."""

    omega: tuple      # omega[i][j] = u^(i-1)_{j+1} for i = 1..d (0-based storage)
    omega_hat: tuple  # omega[i][j] / omega[i][0]
    b: tuple          # probability weights on the d dual categories
    scale: object     # sum_l a_{l-1}^{-1} omega_l^{(0)}^2 (= 1/p_1)
    basis: Basis      # omega_hat rows as a Basis over weights b


def dual_basis(basis: Basis) -> DualBasis:
    """Dual system from transposing the function table (requires u^(l)_1 != 0).

    omega^(j)_i = u^(i-1)_{j+1}; the hat-scaled table is a multivariate
    Krawtchouk basis on weights b_l proportional to a_{l-1}^{-1} u^(l-1)_1^2.
    """
    d = basis.d
    first_col = [basis.u[l][0] for l in range(d)]
    if any(v == 0 for v in first_col):
        raise DomainError("duality unavailable: u^(l) vanishes at the first category")
    # omega[i][j]: dual category i = 0..d-1 (old function i), dual function j
    omega = tuple(tuple(basis.u[i][j] for j in range(d)) for i in range(d))
    omega_hat = tuple(tuple(exact_div(omega[i][j], omega[i][0]) for j in range(d))
                      for i in range(d))
    raw = [exact_div(first_col[l] ** 2, basis.a[l]) for l in range(d)]
    scale = sum(raw)
    b = tuple(exact_div(r, scale) for r in raw)
    rows = tuple(tuple(omega_hat[i][j] for i in range(d)) for j in range(d))
    dual = basis_validate(b, rows, atol=1e-9)
    return DualBasis(omega=omega, omega_hat=omega_hat, b=b, scale=scale, basis=dual)


def duality_residual(n, x, basis: Basis, dual: DualBasis | None = None):
    """LHS - RHS of the duality identity

    C(N;n+)^-1 C(N;x) Q_n(x;u) = prod_i (u^(i-1)_1)^{n_{i-1}} Q*_{x-}(n+; omega_hat)

    with x- = (x_2..x_d) and n+ = (n_0,..,n_{d-1})."""
    if dual is None:
        dual = dual_basis(basis)
    n, x = tuple(n), tuple(x)
    N = sum(x)
    nplus = (N - sum(n),) + n
    lhs = exact_div(multinomial(x) * mvk_eval(n, x, basis), multinomial(nplus))
    rhs = mvk_eval(x[1:], nplus, dual.basis)
    for i in range(basis.d):
        rhs = rhs * basis.u[i][0] ** nplus[i]
    return lhs - rhs


def self_duality_residual(n, x, basis: Basis):
    """Self-dual identity for tables with u^(l)_j = u^(j)_l:

    C(N;n+)^-1 Q_n(x;u) - C(N;x)^-1 Q_{x-}(n+;u), x indexed from category 0."""
    n, x = tuple(n), tuple(x)
    N = sum(x)
    nplus = (N - sum(n),) + n
    lhs = exact_div(mvk_eval(n, x, basis), multinomial(nplus))
    rhs = exact_div(mvk_eval(x[1:], nplus, basis), multinomial(x))
    return lhs - rhs


# -- structure -----------------------------------------------------------------

def c_tensor(basis: Basis, i: int, l: int, k: int):
    """c(i,l,k) = sum_j u^(i)_j u^(l)_j u^(k)_j p_j."""
    return sum(basis.u[i][j] * basis.u[l][j] * basis.u[k][j] * basis.p[j]
               for j in range(basis.d))


def linear_statistics(x, basis: Basis):
    """U_l = sum_j u^(l)_j x_j for l = 1..d-1."""
    return tuple(sum(basis.u[l][j] * x[j] for j in range(basis.d))
                 for l in range(1, basis.d))


def kappa_statistics(nplus, basis: Basis):
    """Dual statistics kappa_l = sum_j u^(j)_l n_j for categories l = 2..d.

    Assumes the first-category values u^(j)_1 are all 1 (Theorem-5 setting)."""
    d = basis.d
    return tuple(sum(basis.u[j][l] * nplus[j] for j in range(d))
                 for l in range(1, d))


def _require_orthonormal(basis: Basis):
    if not basis.is_orthonormal():
        raise DomainError("operation requires an orthonormal basis (a_l = 1)")


def mvk_recurrence_residual(kind: str, n, x, basis: Basis, index: int = 0):
    """LHS - RHS of the recurrence systems; out-of-range Q terms count as 0.

    kind = "x-side": x_j Q_n = sum_k (n_k+1) p_j u^(k)_j Q_{n+e_k}
                    + (N-|n|+1) sum_l p_j u^(l)_j Q_{n-e_l}
                    + sum_{l,k} (n_k+1-d_lk) p_j u^(l)_j u^(k)_j Q_{n-e_l+e_k}
                    + p_j (N-|n|) Q_n                       (index = j in 0..d-1)
    kind = "u-side": U_i Q_n = (n_i+1) Q_{n+e_i} + (N-|n|+1) Q_{n-e_i}
                    + sum_{l,k} c(i,l,k) (n_k+1-d_kl) Q_{n-e_l+e_k}
                                                            (index = i in 1..d-1)
    kind = "dual":   n_i Q_n(x) = sum_{j,l} x_j u^(i)_j u^(i)_l p_l Q_n(x-e_j+e_l)
                                                            (index = i in 0..d-1)
    Requires an orthonormal basis.
    """
    _require_orthonormal(basis)
    n, x = tuple(n), tuple(x)
    d = basis.d
    N = sum(x)
    nv = len(n)

    def q_at(idx):
        if any(v < 0 for v in idx) or sum(idx) > N:
            return 0
        return mvk_eval(idx, x, basis)

    def shift(v, pos, delta):
        w = list(v)
        w[pos] += delta
        return tuple(w)

    qn = mvk_eval(n, x, basis)
    if kind == "x-side":
        j = index
        pj = basis.p[j]
        rhs = pj * (N - sum(n)) * qn
        for k in range(nv):
            rhs += (n[k] + 1) * pj * basis.u[k + 1][j] * q_at(shift(n, k, +1))
        for l in range(nv):
            rhs += (N - sum(n) + 1) * pj * basis.u[l + 1][j] * q_at(shift(n, l, -1))
        for l in range(nv):
            for k in range(nv):
                coeff = n[k] + 1 - (1 if l == k else 0)
                rhs += coeff * pj * basis.u[l + 1][j] * basis.u[k + 1][j] * q_at(
                    shift(shift(n, l, -1), k, +1))
        return x[j] * qn - rhs
    if kind == "u-side":
        i = index
        if not 1 <= i <= d - 1:
            raise DomainError("u-side recurrence needs index in 1..d-1")
        ui = sum(basis.u[i][j] * x[j] for j in range(d))
        rhs = (n[i - 1] + 1) * q_at(shift(n, i - 1, +1))
        rhs += (N - sum(n) + 1) * q_at(shift(n, i - 1, -1))
        for l in range(1, d):
            for k in range(1, d):
                coeff = n[k - 1] + 1 - (1 if l == k else 0)
                c = c_tensor(basis, i, l, k)
                if c != 0:
                    rhs += c * coeff * q_at(shift(shift(n, l - 1, -1), k - 1, +1))
        return ui * qn - rhs
    if kind == "dual":
        i = index
        ni = (N - sum(n)) if i == 0 else n[i - 1]
        rhs = 0
        for j in range(d):
            if x[j] == 0:
                continue
            for l in range(d):
                y = list(x)
                y[j] -= 1
                y[l] += 1
                rhs += x[j] * basis.u[i][j] * basis.u[i][l] * basis.p[l] * mvk_eval(
                    n, tuple(y), basis)
        return ni * qn - rhs
    raise DomainError(f"unknown recurrence kind {kind!r}")


def reproducing_kernel(deg: int, x, y, basis: Basis):
    """sum_{|n| = deg} C(N;n+)^-1 Q_n(x) Q_n(y); basis-invariant for orthonormal u."""
    _require_orthonormal(basis)
    x, y = tuple(x), tuple(y)
    N = sum(x)
    if sum(y) != N:
        raise DomainError("compositions must share the same total")
    total = 0
    for n in multi_indices(deg, basis.d - 1):
        if sum(n) != deg:
            continue
        nplus = (N - deg,) + n
        total += exact_div(mvk_eval(n, x, basis) * mvk_eval(n, y, basis),
                           multinomial(nplus))
    return total


def dual_gf_coefficients(n, basis: Basis, N: int):
    """Expansion of (sum_j v_j)^{n_0} prod_i (sum_j v_j u^(i)_j)^{n_i}.

    Returns {x: coefficient of prod v_j^{x_j}}; the coefficient equals
    C(N;n+)^-1 C(N;x) Q_n(x;u).
    """
    n = tuple(n)
    d = basis.d
    if sum(n) > N:
        raise DomainError("|n| exceeds N")
    cap = (N,) * d
    poly = series.mv_pow(series.mv_linear(0, [1] * d), N - sum(n), cap)
    for i, ni in enumerate(n):
        factor = series.mv_linear(0, [basis.u[i + 1][j] for j in range(d)])
        poly = series.mv_mul(poly, series.mv_pow(factor, ni, cap), cap)
    return {e: c for e, c in poly.items() if sum(e) == N}


# -- degree / leading-term reports ----------------------------------------------

@dataclass(frozen=True)
class LeadingTermReport:
    degree: int
    leading_coefficient: object
    top_degree_clean: bool   # no other monomial of maximal degree
    coefficients: dict       # monomial exponent tuple -> coefficient

    @property
    def ok(self) -> bool:
        return self.leading_coefficient == 1 and self.top_degree_clean


def _monomials_upto(nvars: int, degree: int):
    out = [m for m in multi_indices(degree, nvars)]
    out.sort(key=lambda m: (sum(m), m))
    return out


def _interpolate(points, values, nvars: int, degree: int):
    monos = _monomials_upto(nvars, degree)
    rows = []
    for pt in points:
        row = []
        for m in monos:
            term = Fraction(1)
            for v, e in zip(pt, m):
                term *= Fraction(v) ** e
            row.append(term)
        rows.append(row)
    coeffs = solve_exact(rows, values)
    return {m: c for m, c in zip(monos, coeffs) if c != 0}, monos


def leading_term_check(n, basis: Basis, N: int) -> LeadingTermReport:
    """Express (prod n_k!) Q_n(x;u) in monomials of U_1..U_{d-1} by exact
    interpolation.

    The coefficient-extraction normalization carries 1/prod n_k!, so the
    rescaled polynomial has total degree |n| with unique monic top monomial
    prod U_k^{n_k}.  Exact arithmetic: the basis must have rational entries.
    """
    n = tuple(n)
    d = basis.d
    deg = sum(n)
    fact = 1
    for nk in n:
        fact *= math.factorial(nk)
    pts, vals = [], []
    for x in compositions(N, d):
        pts.append(linear_statistics(x, basis))
        vals.append(fact * mvk_eval(n, x, basis))
    coeffs, monos = _interpolate(pts, vals, d - 1, deg)
    lead = coeffs.get(n, 0)
    clean = all(c == 0 or m == n for m, c in coeffs.items() if sum(m) == deg)
    return LeadingTermReport(degree=deg, leading_coefficient=lead,
                             top_degree_clean=clean, coefficients=coeffs)


def dual_leading_term_check(x, basis: Basis, N: int) -> LeadingTermReport:
    """Dual polynomial structure: the kappa-expansion of
    (prod_{l>=2} x_l!) C(N;x) C(N;n+)^-1 Q_n(x;u).

    Requires u^(j) to equal 1 at the first category for every j (scaled basis);
    interpolates over all n+ with |n+| = N and checks degree sum(x[1:]) with
    monic leading monomial prod kappa_l^{x_l}.  The constant factors are what
    the duality transform produces and make the top term monic.
    """
    x = tuple(x)
    d = basis.d
    if any(basis.u[j][0] != 1 for j in range(d)):
        raise DomainError("dual structure requires u^(j) = 1 at the first category")
    deg = sum(x[1:])
    fact = 1
    for xj in x[1:]:
        fact *= math.factorial(xj)
    pts, vals = [], []
    for nplus in compositions(N, d):
        pts.append(kappa_statistics(nplus, basis))
        vals.append(exact_div(fact * multinomial(x) * mvk_eval(nplus[1:], x, basis),
                              multinomial(nplus)))
    coeffs, monos = _interpolate(pts, vals, d - 1, deg)
    target = x[1:]
    lead = coeffs.get(target, 0)
    clean = all(c == 0 or m == target for m, c in coeffs.items() if sum(m) == deg)
    return LeadingTermReport(degree=deg, leading_coefficient=lead,
                             top_degree_clean=clean, coefficients=coeffs)
