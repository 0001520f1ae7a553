"""Event-driven simulation and the uniformization matrix-exponential oracle.

Both exist to cross-check the spectral formulas: the oracle gives e^{Qt} of a
truncated generator to ~1e-13, the simulator gives statistical agreement with
per-replicate reproducible randomness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .util import DomainError, ScaleError, compositions

MAX_ORACLE_STATES = 10_000


@dataclass(frozen=True)
class SimConfig:
    seed: int
    replicates: int
    horizon: object
    x0: tuple

    def __post_init__(self):
        if self.replicates < 1:
            raise DomainError("need at least one replicate")
        if self.horizon < 0:
            raise DomainError("horizon must be nonnegative")


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Terminal-state counts with frequencies and binomial standard errors."""

    counts: dict
    replicates: int
    overflow: int = 0

    def frequency(self, state):
        return self.counts.get(tuple(state), 0) / self.replicates

    def stderr(self, state):
        f = self.frequency(state)
        return math.sqrt(f * (1 - f) / self.replicates)

    def items(self):
        return sorted(self.counts.items())


def _transition_table(model, levels: int):
    """state -> (targets, rates, total outflow), cached per reachable state."""
    from .composition import CompositionProcess, UrnSpec, composition_rates, urn_rates

    cache = {}

    def lookup(state):
        if state not in cache:
            if isinstance(model, UrnSpec):
                moves = urn_rates(state, model)
            else:
                moves = composition_rates(state, model)
            targets, rates = [], []
            for y, r in moves:
                targets.append(y)
                rates.append(float(r))
            cache[state] = (targets, np.array(rates), float(sum(rates)))
        return cache[state]

    return lookup


def simulate_paths(model, config: SimConfig):
    """Exact-jump CTMC simulation; one terminal state per replicate.

    Randomness comes from per-replicate Philox substreams keyed by
    (seed, replicate), so results do not depend on execution order.  Paths
    that try to leave the truncated level range count as overflow and return
    None.
    """
    from .composition import CompositionProcess, UrnSpec

    if isinstance(model, UrnSpec):
        levels = model.d
    elif isinstance(model, CompositionProcess):
        levels = model.levels
    else:
        raise DomainError(f"cannot simulate {type(model).__name__}")
    x0 = tuple(config.x0)
    if len(x0) != levels:
        raise DomainError("initial state has the wrong number of levels")
    lookup = _transition_table(model, levels)
    horizon = float(config.horizon)
    out = []
    for rep in range(config.replicates):
        rng = np.random.Generator(np.random.Philox(key=config.seed + (rep << 20)))
        state = x0
        clock = 0.0
        overflowed = False
        while True:
            targets, rates, total = lookup(state)
            if total == 0.0:
                break
            clock += rng.exponential(1.0 / total)
            if clock >= horizon:
                break
            pick = rng.random() * total
            acc = 0.0
            idx = len(rates) - 1
            for k, r in enumerate(rates):
                acc += r
                if pick < acc:
                    idx = k
                    break
            nxt = targets[idx]
            if nxt is None:
                overflowed = True
                break
            state = nxt
        out.append(None if overflowed else state)
    return out


def empirical_transition(paths) -> EmpiricalDistribution:
    """Aggregate terminal states into counts/frequencies."""
    if not paths:
        raise DomainError("no replicates")
    counts = {}
    overflow = 0
    for s in paths:
        if s is None:
            overflow += 1
        else:
            counts[s] = counts.get(s, 0) + 1
    return EmpiricalDistribution(counts=counts, replicates=len(paths),
                                 overflow=overflow)


def chi_square_vs(empirical: EmpiricalDistribution, expected: dict):
    """Chi-square statistic and p-value of observed counts vs expected probs.

    Cells with expected probability below 5/replicates are pooled.
    """
    from scipy.stats import chi2

    R = empirical.replicates
    pooled_obs, pooled_exp = 0.0, 0.0
    stat, cells = 0.0, 0
    for state, prob in expected.items():
        obs = empirical.counts.get(tuple(state), 0)
        exp = float(prob) * R
        if exp < 5.0:
            pooled_obs += obs
            pooled_exp += exp
            continue
        stat += (obs - exp) ** 2 / exp
        cells += 1
    if pooled_exp > 0:
        stat += (pooled_obs - pooled_exp) ** 2 / pooled_exp
        cells += 1
    dof = max(cells - 1, 1)
    return stat, float(chi2.sf(stat, dof))


# -- uniformization oracle -------------------------------------------------------

def expm_uniformized(Q: np.ndarray, t: float, tail: float = 1e-13) -> np.ndarray:
    """e^{Qt} by Poisson-weighted powers of the uniformized kernel.

    The Poisson series is cut when the accumulated mass reaches 1 - tail.
    Large rate*t products are handled by repeated squaring.
    """
    n = Q.shape[0]
    if t == 0:
        return np.eye(n)
    rate = float(max(-Q.diagonal().min(), 0.0))
    if rate == 0.0:
        return np.eye(n)
    halvings = 0
    while rate * t > 350.0:
        t /= 2.0
        halvings += 1
    a = rate * t
    K = np.eye(n) + Q * (t / a) if a > 0 else np.eye(n)
    weight = math.exp(-a)
    acc = weight
    term = np.eye(n)
    out = weight * term
    k = 0
    while acc < 1.0 - tail:
        k += 1
        term = term @ K
        weight *= a / k
        out += weight * term
        acc += weight
        if k > 100_000:
            raise RuntimeError("uniformization series failed to converge")
    for _ in range(halvings):
        out = out @ out
    return out


def enumerate_states(N: int, levels: int):
    """Lexicographic composition enumeration (the documented matrix order)."""
    return list(compositions(N, levels))


def generator_matrix(model):
    """(states, index map, dense rate matrix) of a composition process or urn."""
    from .composition import CompositionProcess, UrnSpec, composition_rates, urn_rates

    if isinstance(model, UrnSpec):
        N, levels = model.N, model.d
        moves = lambda x: urn_rates(x, model)
    elif isinstance(model, CompositionProcess):
        N, levels = model.N, model.levels
        moves = lambda x: composition_rates(x, model)
    else:
        raise DomainError(f"no generator for {type(model).__name__}")
    states = enumerate_states(N, levels)
    if len(states) > MAX_ORACLE_STATES:
        raise ScaleError(f"{len(states)} states exceed the oracle bound")
    index = {s: i for i, s in enumerate(states)}
    Q = np.zeros((len(states), len(states)))
    for s in states:
        i = index[s]
        for y, r in moves(s):
            Q[i, i] -= float(r)
            if y is not None:
                Q[i, index[y]] += float(r)
    return states, index, Q


def generator_expm(model, t, tail: float = 1e-13):
    """(states, transition matrix e^{Qt}) for the truncated model."""
    states, _, Q = generator_matrix(model)
    return states, expm_uniformized(Q, float(t), tail=tail)


def bdp_generator(spec, bound: int) -> np.ndarray:
    """Truncated single-chain generator on states 0..bound (mass loss at the top)."""
    if bound + 1 > MAX_ORACLE_STATES:
        raise ScaleError("bound too large for the oracle")
    Q = np.zeros((bound + 1, bound + 1))
    for n in range(bound + 1):
        lam = float(spec.lam_at(n))
        mu = float(spec.mu_at(n))
        if n < bound:
            Q[n, n + 1] = lam
        # the diagonal keeps the full outflow: leaked mass is tracked, not reflected
        Q[n, n] -= lam + mu
        if n > 0:
            Q[n, n - 1] = mu
        else:
            Q[n, n] += mu  # mu_0 = 0 anyway for all specs here
    return Q


def bdp_expm(spec, t, bound: int | None = None, tail: float = 1e-13) -> np.ndarray:
    """Uniformization oracle for a single birth-death chain.

    The truncation bound defaults to the family bound, or to a point where the
    stationary tail (when one exists) is negligible.
    """
    if bound is None:
        bound = default_truncation(spec)
    return expm_uniformized(bdp_generator(spec, bound), float(t), tail=tail)


def default_truncation(spec, tail: float = 1e-12, cap: int = 400) -> int:
    """Truncation level with stationary tail below `tail` (heuristic otherwise)."""
    if spec.bound is not None:
        return spec.bound
    from .spectral import stationary_distribution

    st = stationary_distribution(spec)
    if st is not None:
        total = 0.0
        for j in range(cap):
            total += float(st.pmf(j))
            if 1.0 - total < tail and j >= 20:
                return j
        return cap
    return 150
