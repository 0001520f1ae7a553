"""N-particle composition processes, urn models and their spectral expansions.

A composition process tracks the occupancy vector of N independent copies of
a birth-death chain; levels are indexed from 0.  Its transition function has
a diagonal expansion in multivariate Krawtchouk polynomials built on the
single-chain spectral data, evaluated here in three independent ways
(eigenfunction sum, dual spectral sum, product-form generating function) plus
the matrix-exponential oracle in sim.py.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import mvk, series, spectral
from .util import (
    DomainError,
    ScaleError,
    UnsupportedFamilyError,
    compositions,
    exact_div,
    multi_indices,
    multinomial,
    rising,
)

_ORACLE_N = 4
_ORACLE_LEVELS = 8


@dataclass(frozen=True)
class CompositionProcess:
    """N iid birth-death particles, occupancy truncated to `levels` levels."""

    base: object
    N: int
    levels: int | None = None

    def __post_init__(self):
        if self.N < 1:
            raise DomainError("need at least one particle")
        if self.levels is None:
            if self.base.bound is None:
                raise DomainError("unbounded base needs an explicit level truncation")
            object.__setattr__(self, "levels", self.base.bound + 1)
        if self.levels < 2:
            raise DomainError("need at least two levels")

    @property
    def truncated(self) -> bool:
        return self.base.bound is None or self.levels < self.base.bound + 1


def composition_rates(x, proc: CompositionProcess):
    """Nonzero transitions from occupancy x: (target, rate) pairs.

    A particle at level j moves up at rate lambda_j and down at rate mu_j,
    each scaled by the count x_j.  Up-moves that would leave the truncated
    level range get target None (overflow).
    """
    x = tuple(x)
    if len(x) != proc.levels or sum(x) != proc.N:
        raise DomainError("state does not match the process dimensions")
    out = []
    for j, xj in enumerate(x):
        if xj == 0:
            continue
        lam = proc.base.lam_at(j)
        if lam > 0:
            rate = xj * lam
            if j + 1 < proc.levels:
                y = list(x)
                y[j] -= 1
                y[j + 1] += 1
                out.append((tuple(y), rate))
            else:
                out.append((None, rate))
        mu = proc.base.mu_at(j)
        if mu > 0:
            y = list(x)
            y[j] -= 1
            y[j - 1] += 1
            out.append((tuple(y), xj * mu))
    return out


def occupancy_weight(x, weights):
    """C(N;x) prod_j w_j^{x_j} (multinomial form, weights need not normalize)."""
    out = multinomial(x)
    for xj, wj in zip(x, weights):
        out = out * wj**xj
    return out


# -- spectral transition expansions ----------------------------------------------

def _eigen_rows(data: spectral.SpectralData, levels: int, form: str):
    return spectral.spectral_eigenfunctions(data, imax=levels - 1,
                                            lmax=levels - 1, form=form)


def composition_transition(x, y, t, proc: CompositionProcess,
                           form: str = "auto"):
    """p(x, y; t) by the eigenfunction expansion over multi-indices |n| <= N.

    form="stationary" uses the expansion around the stationary distribution
    (requires one); form="general" uses pi-weights and eigenfunctions scaled
    by sqrt(psi) alone, valid whenever the spectrum is discrete; form="auto"
    picks stationary when available.  Up to level truncation the two agree
    whenever both apply.
    """
    x, y = tuple(x), tuple(y)
    if t < 0:
        raise DomainError("time must be nonnegative")
    if len(x) != proc.levels or len(y) != proc.levels:
        raise DomainError("states do not match the level truncation")
    if sum(x) != proc.N or sum(y) != proc.N:
        raise DomainError("occupancies must total N")
    data = spectral.spectral_data(proc.base)
    if data.kind != "discrete":
        raise UnsupportedFamilyError(
            "continuous-spectrum base: composition transition not supported")
    L = proc.levels
    if form == "auto":
        form = "stationary" if data.stationary else "general"
    if form == "stationary":
        if not data.stationary:
            raise DomainError("no stationary distribution: use the general form")
        rows = _eigen_rows(data, L, "stationary")
        psi0 = data.psi(0)
        p_cat = [data.pi(j) * psi0 for j in range(L)]
        total = 1
        for n in multi_indices(proc.N, L - 1):
            if sum(n) == 0:
                continue
            decay = math.exp(-float(t) * sum(ni * float(data.zeta(i + 1))
                                             for i, ni in enumerate(n))) if t else 1
            nplus = (proc.N - sum(n),) + tuple(n)
            total += decay * exact_div(
                mvk.gf_coefficient(n, x, rows) * mvk.gf_coefficient(n, y, rows),
                multinomial(nplus))
        return mvk.multinomial_pmf(y, p_cat) * total
    if form != "general":
        raise DomainError(f"unknown form {form!r}")
    rows = _eigen_rows(data, L, "pi")
    pi_cat = [data.pi(j) for j in range(L)]
    total = 0
    for n in multi_indices(proc.N, L - 1):
        n0 = proc.N - sum(n)
        ev = n0 * float(data.zeta(0)) + sum(ni * float(data.zeta(i + 1))
                                            for i, ni in enumerate(n))
        decay = math.exp(-float(t) * ev) if t else 1
        nplus = (n0,) + tuple(n)
        total += decay * exact_div(
            mvk.gf_coefficient(n, x, rows) * mvk.gf_coefficient(n, y, rows),
            multinomial(nplus))
    return occupancy_weight(y, pi_cat) * total


def dual_spectral_form(x, y, t, proc: CompositionProcess):
    """p(x, y; t) as a sum over spectral-level compositions nu with |nu| = N.

    Uses the unscaled dual table u~_i^(l) = Q_i(zeta_l) and the multinomial
    spectral measure C(N;nu) prod psi_l^{nu_l}; exact (rational) at t = 0 for
    rational families.
    """
    x, y = tuple(x), tuple(y)
    data = spectral.spectral_data(proc.base)
    if data.kind != "discrete":
        raise UnsupportedFamilyError("continuous-spectrum base not supported")
    L = proc.levels
    rows = tuple(tuple(data.poly(i, l) for i in range(L)) for l in range(L))
    pi_cat = [data.pi(j) for j in range(L)]
    zetas = [data.zeta(l) for l in range(L)]
    psis = [data.psi(l) for l in range(L)]
    total = 0
    for nu in compositions(proc.N, L):
        decay = math.exp(-float(t) * sum(nl * float(z) for nl, z in zip(nu, zetas))) \
            if t else 1
        qx = mvk.gf_coefficient(nu[1:], x, rows)
        qy = mvk.gf_coefficient(nu[1:], y, rows)
        mass = 1
        for nl, ps in zip(nu, psis):
            mass = mass * ps**nl
        total += decay * exact_div(qx * qy * mass, multinomial(nu))
    return occupancy_weight(y, pi_cat) * total


def product_form_oracle(x, y, t, proc: CompositionProcess,
                        tol: float = spectral.DEFAULT_TOL):
    """p(x, y; t) from the probability generating function

        prod_i (sum_j p_ij(t) s_j)^{x_i}

    with single-particle transitions from the spectral sum; coefficient of
    prod s_j^{y_j} extracted by truncated polynomial arithmetic.  Desk-scale
    only.
    """
    x, y = tuple(x), tuple(y)
    if proc.N > _ORACLE_N or proc.levels > _ORACLE_LEVELS:
        raise ScaleError("product-form oracle is desk-scale only")
    L = proc.levels
    cap = tuple(y)
    poly = series.mv_const(1, L)
    for i, xi in enumerate(x):
        if xi == 0:
            continue
        row = [spectral.km_transition(proc.base, i, j, t, tol=tol).p for j in range(L)]
        poly = series.mv_mul(poly, series.mv_pow(series.mv_linear(0, row), xi, cap), cap)
    return series.mv_coefficient(poly, y)


# -- urn models -------------------------------------------------------------------

@dataclass(frozen=True)
class UrnSpec:
    """d-color urn: a random ball repaints j -> l with probability p_jl.

    p_jl = p_l (1 + sum_i rho_i u^(i)_j u^(i)_l) for an orthonormal basis u on
    the stationary color distribution p; reversibility is automatic, and the
    entries must be nonnegative for the spec to be valid.
    """

    N: int
    rho: tuple
    basis: mvk.Basis

    def __post_init__(self):
        if self.N < 1:
            raise DomainError("need at least one ball")
        object.__setattr__(self, "rho", tuple(self.rho))
        if len(self.rho) != self.basis.d - 1:
            raise DomainError("need one eigenvalue per non-constant basis function")
        if not self.basis.is_orthonormal():
            raise DomainError("urn construction requires an orthonormal basis")
        P = self.transition_matrix()
        for j, row in enumerate(P):
            if any(float(v) < -1e-12 for v in row):
                raise DomainError(f"negative repaint probability in row {j}")
            if abs(sum(float(v) for v in row) - 1.0) > 1e-9:
                raise DomainError(f"row {j} of the repaint matrix does not sum to 1")

    @property
    def d(self) -> int:
        return self.basis.d

    @property
    def p(self) -> tuple:
        return self.basis.p

    def transition_matrix(self):
        u = self.basis.u
        d = self.basis.d
        return [[self.p[l] * (1 + sum(self.rho[i - 1] * u[i][j] * u[i][l]
                                      for i in range(1, d)))
                 for l in range(d)] for j in range(d)]


def urn_rates(x, urn: UrnSpec):
    """Transitions x -> x - e_j + e_l at rate (x_j/N) p_jl, self-loops dropped."""
    x = tuple(x)
    if len(x) != urn.d or sum(x) != urn.N:
        raise DomainError("state does not match the urn dimensions")
    P = urn.transition_matrix()
    out = []
    for j, xj in enumerate(x):
        if xj == 0:
            continue
        for l in range(urn.d):
            if l == j or P[j][l] == 0:
                continue
            y = list(x)
            y[j] -= 1
            y[l] += 1
            out.append((tuple(y), exact_div(xj, urn.N) * P[j][l]))
    return out


def urn_eigenvalue(n, urn: UrnSpec):
    """Decay rate sum_i n_i (1 - rho_i) / N of the multi-index n."""
    return sum(ni * (1 - r) for ni, r in zip(n, urn.rho)) / urn.N


def urn_eigen_residual(n, x, urn: UrnSpec):
    """Generator residual (L Q_n)(x) + eigenvalue * Q_n(x); contract 0."""
    qn = mvk.mvk_eval(n, x, urn.basis)
    val = 0
    for y, r in urn_rates(x, urn):
        val += r * (mvk.mvk_eval(n, y, urn.basis) - qn)
    return val + urn_eigenvalue(n, urn) * qn


def ehrenfest_dtype(x, y, t, urn: UrnSpec):
    """Urn transition probability by the multivariate eigenfunction expansion."""
    x, y = tuple(x), tuple(y)
    if t < 0:
        raise DomainError("time must be nonnegative")
    N = urn.N
    total = 1
    for n in multi_indices(N, urn.d - 1):
        if sum(n) == 0:
            continue
        decay = math.exp(-float(t) * float(urn_eigenvalue(n, urn))) if t else 1
        nplus = (N - sum(n),) + tuple(n)
        total += decay * exact_div(
            mvk.mvk_eval(n, x, urn.basis) * mvk.mvk_eval(n, y, urn.basis),
            multinomial(nplus))
    return mvk.multinomial_pmf(y, urn.p) * total


def ehrenfest_two_color(x: int, y: int, t, N: int, p):
    """Two-color urn transition probability in closed Krawtchouk form.

    C(N,y) p^y q^(N-y) {1 + sum_n e^(-nt/(Np)) (pq)^-n (n!)^-2 C(N,n)^-1
    K_n(x) K_n(y)}; the per-event rate is 1 (one ball repainted per unit time).
    """
    from .polys import krawtchouk_eval

    if not (0 <= x <= N and 0 <= y <= N):
        raise DomainError("states must lie in 0..N")
    if t < 0:
        raise DomainError("time must be nonnegative")
    q = 1 - p
    lam = exact_div(1, N * p)
    total = 1
    for n in range(1, N + 1):
        decay = math.exp(-float(lam) * n * float(t)) if t else 1
        total += decay * exact_div(
            krawtchouk_eval(n, x, N, p) * krawtchouk_eval(n, y, N, p),
            (p * q) ** n * math.factorial(n) ** 2 * math.comb(N, n))
    return math.comb(N, y) * p**y * q ** (N - y) * total


def two_color_urn(N: int, p) -> UrnSpec:
    """The classical two-color urn as an UrnSpec (rho_1 = 1 - 1/p)."""
    q = 1 - p
    basis = mvk.basis_orthonormal_from((q, p))
    return UrnSpec(N=N, rho=(1 - exact_div(1, p),), basis=basis)


# -- dual spectral polynomials (assignments of particles to spectral points) ------

@dataclass(frozen=True)
class SpectralAssignment:
    """Spectral points for N particles, stored as support indices."""

    indices: tuple

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(self.indices))
        if any(i < 0 for i in self.indices):
            raise DomainError("support indices must be nonnegative")

    @property
    def N(self) -> int:
        return len(self.indices)

    def counts(self, levels: int | None = None) -> tuple:
        """n_l = |{k : Z_k = zeta_l}| up to the highest occupied level."""
        top = max(self.indices) + 1 if levels is None else levels
        n = [0] * top
        for i in self.indices:
            n[i] += 1
        return tuple(n)


def dual_poly_gf(v, assignment: SpectralAssignment, data: spectral.SpectralData):
    """prod_k (1 + sum_{j>=1} Q_j(Z_k) v_j) evaluated at a coefficient vector v.

    v[0] must be 1; the inner sum is truncated at j = len(v) - 1.
    """
    if v[0] != 1:
        raise DomainError("the leading coefficient v_0 is fixed at 1")
    out = 1
    for l in assignment.indices:
        out = out * (1 + sum(v[j] * data.poly(j, l) for j in range(1, len(v))))
    return out


def dual_poly_coefficient(xidx, assignment: SpectralAssignment,
                          data: spectral.SpectralData):
    """Coefficient of prod_j v_j^{x_j} in the dual generating function.

    xidx = (x_1, x_2, ...) indexes the dual polynomial; the result is 1 at
    xidx = 0 and polynomial in the spectral points.
    """
    xidx = tuple(xidx)
    J = len(xidx)
    cap = xidx
    poly = series.mv_const(1, J)
    for l in assignment.indices:
        factor = series.mv_linear(1, [data.poly(j + 1, l) for j in range(J)])
        poly = series.mv_mul(poly, factor, cap)
    return series.mv_coefficient(poly, xidx)


def dual_poly_via_mvk(xidx, assignment: SpectralAssignment,
                      data: spectral.SpectralData):
    """The same coefficient through the multivariate-polynomial route:

    C(N;n(Z))^-1 C(N;x+) Q_{n-}(x+; u~) with u~_i^(l) = Q_i(zeta_l)."""
    xidx = tuple(xidx)
    N = assignment.N
    n = assignment.counts()
    x0 = N - sum(xidx)
    if x0 < 0:
        return 0
    xplus = (x0,) + xidx
    rows = tuple(tuple(data.poly(i, l) for i in range(len(xplus)))
                 for l in range(len(n)))
    q = mvk.gf_coefficient(n[1:], xplus, rows)
    return exact_div(multinomial(xplus) * q, multinomial(n))


def calN_statistic(j: int, assignment: SpectralAssignment,
                   data: spectral.SpectralData):
    """N_j = sum_k Q_j(Z_k) = sum_l n_l Q_j(zeta_l)."""
    if j < 1:
        raise DomainError("degree must be at least 1")
    return sum(data.poly(j, l) for l in assignment.indices)


def theorem10_degree_check(xidx, data: spectral.SpectralData, N: int,
                           seed: int = 7, samples: int | None = None,
                           level_cap: int | None = None) -> mvk.LeadingTermReport:
    """Structure of the dual polynomial indexed by xidx as a polynomial in the
    statistics N_j.

    Interpolates (prod_j x_j!) * dual_poly_coefficient over random assignments
    with exact arithmetic; checks total degree sum x_j, monic leading monomial
    prod N_j^{x_j}, and that monomials of spectral degree above sum j x_j are
    never needed (that cap defines the monomial basis, so consistency of the
    overdetermined solve is the verification).
    """
    xidx = tuple(xidx)
    deg = sum(xidx)
    zdeg = sum((j + 1) * xj for j, xj in enumerate(xidx))
    nvars = max(zdeg, 1)
    monos = [m for m in multi_indices(deg, nvars)
             if sum((j + 1) * mj for j, mj in enumerate(m)) <= zdeg]
    monos.sort(key=lambda m: (sum(m), m))
    if level_cap is None:
        level_cap = zdeg + N + 2
    if data.support_size is not None:
        level_cap = min(level_cap, data.support_size)
    if samples is None:
        samples = 2 * len(monos) + 5
    rng = np.random.default_rng(seed)
    fact = 1
    for xj in xidx:
        fact *= math.factorial(xj)
    rows, vals = [], []
    for _ in range(samples):
        assignment = SpectralAssignment(tuple(int(v) for v in
                                              rng.integers(0, level_cap, size=N)))
        stats = [calN_statistic(j, assignment, data) for j in range(1, nvars + 1)]
        row = []
        for m in monos:
            term = Fraction(1)
            for s, e in zip(stats, m):
                term *= Fraction(s) ** e
            row.append(term)
        rows.append(row)
        vals.append(Fraction(fact * dual_poly_coefficient(xidx, assignment, data)))
    from .util import solve_exact

    coeffs = solve_exact(rows, vals)
    bym = {m: c for m, c in zip(monos, coeffs) if c != 0}
    target = xidx + (0,) * (nvars - len(xidx))
    lead = bym.get(target, 0)
    clean = all(c == 0 or m == target for m, c in bym.items() if sum(m) == deg)
    return mvk.LeadingTermReport(degree=deg, leading_coefficient=lead,
                                 top_degree_clean=clean, coefficients=bym)


# -- Meixner-class additivity -------------------------------------------------------

@dataclass(frozen=True)
class MeixnerClass:
    """Family record h(v) e^{y u(v)} = sum_m Qc_m(y) v^m / m!.

    h_coeffs/u_coeffs produce truncated series; `scaling(i)` maps the spectral
    evaluator Q_i to the class-normalized polynomial Qc_i = scaling(i) * Q_i;
    `y_of_index(l)` is the class argument at the l-th spectral atom (the index
    itself for every discrete family here).
    """

    name: str
    h_coeffs: object
    u_coeffs: object
    scaling: object
    y_of_index: object = staticmethod(lambda l: l)


def meixner_class_record(spec) -> MeixnerClass:
    """Class data for the families with h(v) e^{zu(v)} generating functions."""
    fam = spec.family
    if fam == "mm_infinity":
        nu = exact_div(spec.lam, spec.mu_rate)

        def u_coeffs(order):
            return [0] + [-Fraction(1, k) * exact_div(1, nu) ** k
                          for k in range(1, order + 1)]

        return MeixnerClass(
            name="poisson-charlier",
            h_coeffs=lambda order: [Fraction(1, math.factorial(k))
                                    for k in range(order + 1)],
            u_coeffs=u_coeffs,
            scaling=lambda i: 1,
        )
    if fam == "linear":
        beta = spec.beta
        if spec.lam < spec.mu_rate:
            q = exact_div(spec.lam, spec.mu_rate)
            return MeixnerClass(
                name="meixner",
                h_coeffs=lambda order: [exact_div(rising(beta, k), math.factorial(k))
                                        for k in range(order + 1)],
                u_coeffs=lambda order: [0] + [Fraction(1, k) * (1 - exact_div(1, q) ** k)
                                              for k in range(1, order + 1)],
                scaling=lambda i: rising(beta, i),
            )
        if spec.lam > spec.mu_rate:
            q = exact_div(spec.mu_rate, spec.lam)
            return MeixnerClass(
                name="meixner-transient",
                h_coeffs=lambda order: [exact_div(rising(beta, k), math.factorial(k))
                                        * q**k for k in range(order + 1)],
                u_coeffs=lambda order: [0] + [Fraction(1, k) * (q**k - 1)
                                              for k in range(1, order + 1)],
                scaling=lambda i: rising(beta, i),
            )
        return MeixnerClass(
            name="laguerre",
            h_coeffs=lambda order: [exact_div(rising(beta, k), math.factorial(k))
                                    for k in range(order + 1)],
            u_coeffs=lambda order: [0] + [-1] * order,
            scaling=lambda i: rising(beta, i),
        )
    if fam == "ehrenfest":
        NE, p = spec.N, spec.p
        q = 1 - p

        def u_coeffs(order):
            return [0] + [Fraction(1, k) * (p**k - (-q) ** k)
                          for k in range(1, order + 1)]

        return MeixnerClass(
            name="krawtchouk",
            h_coeffs=lambda order: [math.comb(NE, k) * (-p) ** k if k <= NE else 0
                                    for k in range(order + 1)],
            u_coeffs=u_coeffs,
            scaling=lambda i: math.factorial(i) * math.comb(NE, i) * (-p) ** i,
        )
    raise UnsupportedFamilyError(f"family {fam!r} is not in the Meixner class")


def meixner_additive_poly(m: int, total, mclass: MeixnerClass, N: int):
    """Qc_m^N(total) = m! [v^m] h(v)^N e^{total * u(v)}: the degree-m orthogonal
    polynomial of the summed argument of N particles."""
    h = mclass.h_coeffs(m)
    u = mclass.u_coeffs(m)
    hn = series.pow_int(h, N, m)
    ez = series.exp_series([total * c for c in u], m)
    return math.factorial(m) * series.coefficient(series.mul(hn, ez, m), m)


def meixner_additive_convolution(m: int, args, mclass: MeixnerClass):
    """Convolution oracle: sum over |m_vec| = m of C(m;m_vec) prod Qc_{m_k}(y_k)."""
    args = list(args)
    total = 0
    for mvec in compositions(m, len(args)):
        term = multinomial(mvec)
        for mk, yk in zip(mvec, args):
            h = mclass.h_coeffs(mk)
            ez = series.exp_series([yk * c for c in mclass.u_coeffs(mk)], mk)
            term *= math.factorial(mk) * series.coefficient(series.mul(h, ez, mk), mk)
        total += term
    return total


def theorem11_residual(m: int, assignment: SpectralAssignment,
                       data: spectral.SpectralData,
                       mclass: MeixnerClass | None = None):
    """LHS - RHS of the Meixner-class dual-polynomial identity; contract 0.

    LHS sums the class-rescaled dual polynomials over all occupancy indices
    with spectral weight m:

        C(N;n(Z))^-1 sum_{x: sum j x_j = m} C(N;x+) (m!/prod j!^{x_j})
            (prod_j s_j^{x_j}) Q_{n-}(x+; u~)

    RHS is the additive class polynomial Qc_m^N at the summed class argument.
    The scaling factors s_j = scaling(j) rescale the spectral evaluator rows
    to their class normalization; families with s != 1 (Meixner, Laguerre,
    Krawtchouk) need them for the generating-function proof to apply.
    """
    if mclass is None:
        mclass = meixner_class_record(data.spec)
    if data.kind != "discrete":
        raise UnsupportedFamilyError("identity check needs a discrete spectrum")
    N = assignment.N
    n = assignment.counts()
    rows = tuple(tuple(data.poly(i, l) for i in range(m + 1)) for l in range(len(n)))
    lhs = 0
    for xtail in _weighted_indices(m, N):
        x0 = N - sum(xtail)
        xplus = (x0,) + xtail
        coeff = exact_div(multinomial(xplus) * math.factorial(m), 1)
        for j, xj in enumerate(xtail):
            if xj:
                coeff = coeff * exact_div(mclass.scaling(j + 1), math.factorial(j + 1)) ** xj
        lhs += coeff * mvk.gf_coefficient(n[1:], xplus, rows)
    lhs = exact_div(lhs, multinomial(n))
    total_y = sum(mclass.y_of_index(l) for l in assignment.indices)
    rhs = meixner_additive_poly(m, total_y, mclass, N)
    return lhs - rhs


def _weighted_indices(m: int, N: int):
    """All (x_1..x_m) with sum j x_j = m and sum x_j <= N."""
    out = []

    def rec(j, remaining, used, prefix):
        if j > m:
            if remaining == 0:
                out.append(tuple(prefix))
            return
        top = min(remaining // j, N - used)
        for xj in range(top + 1):
            rec(j + 1, remaining - j * xj, used + xj, prefix + [xj])

    rec(1, m, 0, [])
    return [x for x in out]
