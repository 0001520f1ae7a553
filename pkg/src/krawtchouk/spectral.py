"""Spectral expansions of birth-death transition probabilities.

For a birth-death chain with rates lambda_n (up), mu_n (down), mu_0 = 0, the
transition probabilities have the representation

    p_ij(t) = pi_j integral e^{-zt} Q_i(z) Q_j(z) psi(dz)

with spectral probability measure psi and polynomials Q_n defined by the
three-term recurrence -z Q_n = -(lambda_n+mu_n) Q_n + lambda_n Q_{n+1}
+ mu_n Q_{n-1}, Q_0 = 1.  Four classical families carry closed-form spectral
data; everything else is reachable through the recurrence only.

Family closed forms (Q_n(0) = 1 scaling throughout, since mu_0 = 0):

  M/M/inf        lambda, n mu      zeta_z = mu z,          psi = Poisson(lambda/mu)
  linear l<m     (n+b)l, n m       zeta_z = (m-l) z,       psi = NegBin(b, l/m)
  linear l>m     (n+b)l, n m       zeta_z = (z+b)(l-m),    psi = NegBin(b, m/l)
  linear l=m     (n+b)l, n l       continuous Gamma(b, scale l)
  two-urn        (N-n)(a-n), n(b-N+n)   zeta_z = z(a+b+1-z), z = 0..N
  Ehrenfest      (N-n)p, n q       zeta_z = z, z = 0..N,   psi = Binomial(N,p)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import polys
from .util import (
    DomainError,
    UnsupportedFamilyError,
    exact_div,
    falling,
    power,
    rising,
)

DEFAULT_TOL = 1e-12
DEFAULT_MAX_TERMS = 600
_BLOCK = 10


# -- process specifications -----------------------------------------------------

@dataclass(frozen=True)
class MMInfinity:
    """M/M/inf queue: lambda_n = lam, mu_n = n * mu."""

    lam: object
    mu_rate: object
    family = "mm_infinity"
    bound = None

    def __post_init__(self):
        if self.lam <= 0 or self.mu_rate <= 0:
            raise DomainError("rates must be positive")

    def lam_at(self, n):
        return self.lam

    def mu_at(self, n):
        return n * self.mu_rate


@dataclass(frozen=True)
class LinearBDP:
    """Linear birth-death: lambda_n = (n+beta) lam, mu_n = n mu."""

    lam: object
    mu_rate: object
    beta: object
    family = "linear"
    bound = None

    def __post_init__(self):
        if self.lam <= 0 or self.mu_rate <= 0 or self.beta <= 0:
            raise DomainError("lam, mu and beta must be positive")

    def lam_at(self, n):
        return (n + self.beta) * self.lam

    def mu_at(self, n):
        return n * self.mu_rate


@dataclass(frozen=True)
class TwoUrn:
    """Two-urn exchange model: lambda_n = (N-n)(a-n), mu_n = n(b-N+n)."""

    a: object
    b: object
    N: int
    family = "two_urn"

    def __post_init__(self):
        if self.N < 1 or self.a < self.N or self.b < self.N:
            raise DomainError("need a, b >= N >= 1")

    @property
    def bound(self):
        return self.N

    def lam_at(self, n):
        return (self.N - n) * (self.a - n)

    def mu_at(self, n):
        return n * (self.b - self.N + n)


@dataclass(frozen=True)
class Ehrenfest:
    """Ehrenfest chain: lambda_n = (N-n) p, mu_n = n q."""

    N: int
    p: object
    family = "ehrenfest"

    def __post_init__(self):
        if self.N < 1:
            raise DomainError("N must be a positive integer")
        if not 0 < self.p < 1:
            raise DomainError("p must lie in (0,1)")

    @property
    def bound(self):
        return self.N

    def lam_at(self, n):
        return (self.N - n) * self.p

    def mu_at(self, n):
        return n * (1 - self.p)


@dataclass(frozen=True)
class Custom:
    """Arbitrary rate functions; recurrence evaluation only, no closed spectrum."""

    lam_fn: object
    mu_fn: object
    state_bound: int | None = None
    family = "custom"

    def __post_init__(self):
        if self.mu_fn(0) != 0:
            raise DomainError("mu_0 must vanish (no absorption)")

    @property
    def bound(self):
        return self.state_bound

    def lam_at(self, n):
        return self.lam_fn(n)

    def mu_at(self, n):
        return self.mu_fn(n)


def pi_weight(spec, j: int):
    """pi_j = lambda_0 ... lambda_{j-1} / (mu_1 ... mu_j), pi_0 = 1."""
    if j < 0 or (spec.bound is not None and j > spec.bound):
        raise DomainError(f"state {j} outside the state space")
    out = 1
    for k in range(j):
        mu = spec.mu_at(k + 1)
        if mu == 0:
            raise DomainError(f"mu_{k+1} = 0 in the pi-weight denominator")
        out = exact_div(out * spec.lam_at(k), mu)
    return out


@dataclass(frozen=True)
class Stationary:
    """Normalized pi-weights p_j = pi_j / sum_k pi_k."""

    spec: object
    norm: object  # sum of pi-weights

    @property
    def bound(self):
        return self.spec.bound

    def pmf(self, j: int):
        return exact_div(pi_weight(self.spec, j), self.norm)

    def vector(self, upto: int | None = None):
        top = self.bound if upto is None else upto
        return [self.pmf(j) for j in range(top + 1)]


def stationary_distribution(spec):
    """The limit distribution pi_j / sum pi_k, or None when sum pi_k diverges."""
    fam = spec.family
    if fam == "mm_infinity":
        norm = math.exp(spec.lam / spec.mu_rate)
    elif fam == "linear":
        if spec.lam >= spec.mu_rate:
            return None
        norm = power(1 - exact_div(spec.lam, spec.mu_rate), -spec.beta)
    elif fam in ("two_urn", "ehrenfest", "custom"):
        if spec.bound is None:
            raise UnsupportedFamilyError("custom unbounded spec: no closed form")
        norm = sum(pi_weight(spec, j) for j in range(spec.bound + 1))
    else:
        raise UnsupportedFamilyError(fam)
    return Stationary(spec=spec, norm=norm)


# -- spectral data ----------------------------------------------------------------

@dataclass(frozen=True)
class SpectralData:
    """Support, masses and polynomial evaluator of the spectral measure."""

    spec: object
    kind: str                 # "discrete" | "continuous"
    stationary: bool
    support_size: int | None  # atoms in a finite discrete spectrum, else None
    zeta: object              # l -> spectral point
    psi: object               # l -> mass (discrete only)
    poly: object              # (i, l) -> Q_i(zeta_l) by index (discrete only)
    poly_at: object           # (i, z) -> Q_i(z) closed form at an arbitrary point
    density: tuple | None = None  # (beta, scale) of the Gamma density (continuous)
    psi_f: object = None      # float variants, used for long truncated sums
    poly_f: object = None

    def __post_init__(self):
        if self.psi_f is None and self.psi is not None:
            object.__setattr__(self, "psi_f", lambda l: float(self.psi(l)))
        if self.poly_f is None and self.poly is not None:
            object.__setattr__(self, "poly_f", lambda i, l: float(self.poly(i, l)))

    def pi(self, j: int):
        return pi_weight(self.spec, j)


def _mm_infinity_data(spec) -> SpectralData:
    nu = exact_div(spec.lam, spec.mu_rate)
    nu_f = float(nu)
    mass0 = math.exp(-nu_f)

    def zeta(l):
        return spec.mu_rate * l

    def psi(l):
        return mass0 * nu_f**l / math.factorial(l)

    def poly(i, l):
        return polys.charlier_eval(i, l, nu)

    def poly_at(i, z):
        return polys.charlier_eval(i, int(round(exact_div(z, spec.mu_rate))), nu)

    return SpectralData(spec=spec, kind="discrete", stationary=True,
                        support_size=None, zeta=zeta, psi=psi, poly=poly,
                        poly_at=poly_at,
                        poly_f=lambda i, l: polys.charlier_eval(i, l, nu_f))


def _linear_data(spec) -> SpectralData:
    lam, mu, beta = spec.lam, spec.mu_rate, spec.beta
    if lam < mu:
        q = exact_div(lam, mu)
        gap = mu - lam
        qf, bf = float(q), float(beta)

        def zeta(l):
            return gap * l

        def psi(l):
            return power(1 - q, beta) * exact_div(rising(beta, l), math.factorial(l)) * q**l

        def psi_f(l):
            out = (1 - qf) ** bf
            for i in range(l):
                out *= (bf + i) / (i + 1) * qf
            return out

        def poly(i, l):
            return polys.meixner_eval(i, l, beta, q)

        return SpectralData(spec=spec, kind="discrete", stationary=True,
                            support_size=None, zeta=zeta, psi=psi, poly=poly,
                            poly_at=lambda i, z: poly(i, int(round(exact_div(z, gap)))),
                            psi_f=psi_f,
                            poly_f=lambda i, l: polys.meixner_eval(i, l, bf, qf))
    if lam > mu:
        q = exact_div(mu, lam)
        gap = lam - mu
        qf, bf = float(q), float(beta)

        def zeta(l):
            return (l + beta) * gap

        def psi(l):
            return power(1 - q, beta) * exact_div(rising(beta, l), math.factorial(l)) * q**l

        def psi_f(l):
            out = (1 - qf) ** bf
            for i in range(l):
                out *= (bf + i) / (i + 1) * qf
            return out

        def poly(i, l):
            # prefactor (mu/lam)^i forced by the three-term recurrence
            return q**i * polys.meixner_eval(i, l, beta, q)

        return SpectralData(spec=spec, kind="discrete", stationary=False,
                            support_size=None, zeta=zeta, psi=psi, poly=poly,
                            poly_at=lambda i, z: poly(i, int(round(exact_div(z, gap) - beta))),
                            psi_f=psi_f,
                            poly_f=lambda i, l: qf**i * polys.meixner_eval(i, l, bf, qf))

    # lam == mu: continuous Gamma(beta, scale lam) spectrum, Laguerre polynomials
    def poly_at(i, z):
        # classical L_i^(beta-1)(z/lam): the package evaluator negated
        val = polys.laguerre_eval(i, -exact_div(z, lam), beta)
        return exact_div(math.factorial(i) * val, rising(beta, i))

    return SpectralData(spec=spec, kind="continuous", stationary=False,
                        support_size=None, zeta=None, psi=None, poly=None,
                        poly_at=poly_at, density=(beta, lam))


def _two_urn_data(spec) -> SpectralData:
    a, b, N = spec.a, spec.b, spec.N

    def zeta(z):
        return z * (a + b + 1 - z)

    def psi(z):
        # hypergeometric-type dual Hahn weight, total mass 1 over z = 0..N
        num = (math.factorial(N) * falling(N, z) * falling(a, z)
               * (2 * z - a - b - 1))
        den = (math.factorial(z) * falling(b, z) * rising(z - a - b - 1, N + 1))
        cnb = exact_div(falling(N - b - 1, N), math.factorial(N))
        return exact_div(cnb * num, den)

    def poly(i, z):
        return polys.dual_hahn_eval(i, z, a, b, N)

    return SpectralData(spec=spec, kind="discrete", stationary=True,
                        support_size=N + 1, zeta=zeta, psi=psi, poly=poly,
                        poly_at=None)


def _ehrenfest_data(spec) -> SpectralData:
    N, p = spec.N, spec.p
    q = 1 - p

    def zeta(z):
        return z

    def psi(z):
        return math.comb(N, z) * p**z * q ** (N - z)

    def poly(i, z):
        k0 = polys.krawtchouk_eval(i, 0, N, p)
        return exact_div(polys.krawtchouk_eval(i, z, N, p), k0)

    return SpectralData(spec=spec, kind="discrete", stationary=True,
                        support_size=N + 1, zeta=zeta, psi=psi, poly=poly,
                        poly_at=lambda i, z: poly(i, int(z)))


def spectral_data(spec) -> SpectralData:
    """Closed-form spectral data for the named families."""
    fam = spec.family
    if fam == "mm_infinity":
        return _mm_infinity_data(spec)
    if fam == "linear":
        return _linear_data(spec)
    if fam == "two_urn":
        return _two_urn_data(spec)
    if fam == "ehrenfest":
        return _ehrenfest_data(spec)
    raise UnsupportedFamilyError(
        f"family {fam!r} has no closed-form spectrum; use recurrence_eval")


def gauss_gamma_quadrature(beta, scale, nodes: int):
    """Nodes/weights integrating against the Gamma(beta, scale) density."""
    from scipy.special import gamma as gamma_fn
    from scipy.special import roots_genlaguerre

    y, w = roots_genlaguerre(nodes, float(beta) - 1.0)
    return scale * y, w / gamma_fn(float(beta))


# -- transition probabilities -----------------------------------------------------

@dataclass(frozen=True)
class TransitionResult:
    """A transition probability with its truncation-error bookkeeping."""

    p: object
    truncation_error: float = 0.0
    flagged: bool = False
    terms: int = 0

    def __float__(self):
        return float(self.p)


def _exp_factor(zeta_l, t):
    if t == 0:
        return 1
    return math.exp(-float(zeta_l) * float(t))


def _discrete_sum(data: SpectralData, i, j, t, tol, max_terms):
    if data.support_size is not None:
        total = sum(_exp_factor(data.zeta(l), t)
                    * data.poly(i, l) * data.poly(j, l) * data.psi(l)
                    for l in range(data.support_size))
        return total, 0.0, False, data.support_size
    # float path: truncated sums over an infinite support stay cheap
    pij_terms = lambda l: (_exp_factor(data.zeta(l), t)
                           * data.poly_f(i, l) * data.poly_f(j, l) * data.psi_f(l))
    # infinite discrete support: add blocks until a geometric tail fit clears tol
    total = 0
    l = 0
    blocks = []
    flagged = True
    est = math.inf
    while l < max_terms:
        block = 0.0
        babs = 0.0
        for _ in range(_BLOCK):
            term = pij_terms(l)
            block += term
            babs += abs(float(term))
            l += 1
        total += block
        blocks.append(babs)
        if len(blocks) >= 3:
            b1, b2, b3 = blocks[-3:]
            if b3 == 0.0:
                est, flagged = 0.0, False
                break
            if b3 < b2 < b1:
                r = b3 / b2
                est = b3 * r / (1 - r)
                if est <= tol:
                    flagged = False
                    break
    return total, float(est if est != math.inf else 1.0), flagged, l


def km_transition(spec, i: int, j: int, t, tol: float = DEFAULT_TOL,
                  max_terms: int = DEFAULT_MAX_TERMS,
                  quad_nodes: int = 64) -> TransitionResult:
    """p_ij(t) via the spectral sum (discrete) or Gamma quadrature (continuous)."""
    if t < 0:
        raise DomainError("time must be nonnegative")
    data = spectral_data(spec)
    pij = pi_weight(spec, j)
    if data.kind == "discrete":
        total, est, flagged, terms = _discrete_sum(data, i, j, t, tol, max_terms)
        return TransitionResult(p=pij * total, truncation_error=est,
                                flagged=flagged, terms=terms)
    beta, scale = data.density
    z, w = gauss_gamma_quadrature(beta, scale, quad_nodes)
    total = 0.0
    for zk, wk in zip(z, w):
        total += wk * math.exp(-zk * float(t)) * float(data.poly_at(i, zk)) * float(
            data.poly_at(j, zk))
    return TransitionResult(p=float(pij) * total, truncation_error=0.0,
                            flagged=False, terms=quad_nodes)


def spectral_eigenfunctions(data: SpectralData, imax: int, lmax: int,
                            form: str = "stationary"):
    """Tables u[l][i] from the spectral polynomials.

    form="stationary": u^(l)_i = Q_i(zeta_l) sqrt(psi_l / psi_0); orthonormal
    against the stationary distribution p_i.  Requires psi_0 > 0.
    form="pi":         u^(l)_i = Q_i(zeta_l) sqrt(psi_l); orthonormal against
    the (possibly unnormalized) pi-weights.
    """
    if data.kind != "discrete":
        raise UnsupportedFamilyError("eigenfunction tables need a discrete spectrum")
    from .util import sqrt_or_float

    if form == "stationary":
        psi0 = data.psi(0)
        if psi0 == 0:
            raise DomainError("psi({0}) vanishes; stationary form unavailable")
        scales = [sqrt_or_float(exact_div(data.psi(l), psi0)) for l in range(lmax + 1)]
    elif form == "pi":
        scales = [sqrt_or_float(data.psi(l)) for l in range(lmax + 1)]
    else:
        raise DomainError(f"unknown eigenfunction form {form!r}")
    return tuple(tuple(data.poly(i, l) * scales[l] for i in range(imax + 1))
                 for l in range(lmax + 1))
