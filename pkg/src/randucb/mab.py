"""Multi-armed bandit policies.

The randomized confidence-bound policy draws a multiplier Z from a
:class:`~randucb.zdist.ZDist` each round and plays
argmax_i { mean_i + Z * sqrt(1/pulls_i) }; baselines share the same
sufficient statistics. Every argmax breaks ties toward the lowest index so
that special-case equivalences between policies are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .zdist import ZDist, make_gaussian_zdist

__all__ = [
    "MabState",
    "BtsState",
    "randucb_mab_choose",
    "ucb1_choose",
    "klucb_indices",
    "klucb_choose",
    "bernoulli_ts_choose",
    "gaussian_ts_samples",
    "gaussian_ts_choose",
    "eps_greedy_choose",
    "annealed_eps",
    "default_mab_zdist",
    "default_ucb1_beta",
    "RandUcbPolicy",
    "Ucb1Policy",
    "KlUcbPolicy",
    "BernoulliTsPolicy",
    "GaussianTsPolicy",
    "EpsGreedyPolicy",
    "UniformRandomPolicy",
]


@dataclass
class MabState:
    """Per-arm pull counts and reward sums; ``t`` is the 1-based round."""

    counts: np.ndarray
    sums: np.ndarray
    t: int = 1

    @classmethod
    def empty(cls, n_arms: int) -> "MabState":
        return cls(counts=np.zeros(n_arms, dtype=np.int64), sums=np.zeros(n_arms))

    @property
    def n_arms(self) -> int:
        return self.counts.size

    def record(self, arm: int, reward: float) -> None:
        self.counts[arm] += 1
        self.sums[arm] += reward
        self.t += 1

    def means(self) -> np.ndarray:
        """Empirical means, 0 for arms never pulled."""
        return np.divide(self.sums, self.counts, out=np.zeros_like(self.sums),
                         where=self.counts > 0)

    def first_unpulled(self) -> int | None:
        idle = np.flatnonzero(self.counts == 0)
        return int(idle[0]) if idle.size else None


def randucb_mab_choose(
    state: MabState,
    z: ZDist,
    rng: np.random.Generator,
    *,
    coupled: bool = True,
    plus_one: bool = False,
) -> int:
    """Randomized confidence-bound choice.

    Pulls each arm once before using indices. ``coupled`` shares one Z draw
    across arms; otherwise each arm gets an independent draw. ``plus_one``
    uses mean Y_i/(s_i+1) and width 1/sqrt(s_i+1), the form under which the
    policy coincides exactly with its ridge-regression (lambda = 1, one-hot
    features) counterpart.
    """
    forced = state.first_unpulled()
    if forced is not None:
        return forced
    if plus_one:
        denom = state.counts + 1
        mean = state.sums / denom
        width = np.sqrt(1.0 / denom)
    else:
        mean = state.sums / state.counts
        width = np.sqrt(1.0 / state.counts)
    if coupled:
        return int(np.argmax(mean + z.sample(rng) * width))
    return int(np.argmax(mean + z.sample_many(state.n_arms, rng) * width))


def ucb1_choose(state: MabState, beta: float) -> int:
    """Deterministic index choice argmax mean_i + beta * sqrt(1/pulls_i)."""
    forced = state.first_unpulled()
    if forced is not None:
        return forced
    mean = state.sums / state.counts
    width = np.sqrt(1.0 / state.counts)
    return int(np.argmax(mean + beta * width))


def _kl_bernoulli(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """KL(Ber(p) || Ber(q)) with the 0*log(0) = 0 convention."""
    p = np.clip(p, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(p > 0, p * np.log(p / q), 0.0)
        b = np.where(p < 1, (1.0 - p) * np.log((1.0 - p) / (1.0 - q)), 0.0)
    return a + b


def klucb_indices(state: MabState, t: int, *, tol: float = 1e-9, max_iter: int = 60) -> np.ndarray:
    """Per-arm index: the largest q in [mean, 1] with pulls * KL(mean, q) <= ln t.

    Solved by bisection on the monotone map q -> KL(mean, q), to absolute
    tolerance ``tol`` or ``max_iter`` halvings. Arms never pulled get index 1.
    """
    mean = np.where(state.counts > 0, state.means(), 0.0)
    budget = np.divide(math.log(t), state.counts,
                       out=np.full(state.n_arms, math.inf), where=state.counts > 0)
    lo = mean.copy()
    hi = np.ones_like(mean)
    for _ in range(max_iter):
        if np.all(hi - lo < tol):
            break
        mid = 0.5 * (lo + hi)
        ok = _kl_bernoulli(mean, mid) <= budget
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    return np.where(state.counts > 0, lo, 1.0)


def klucb_choose(state: MabState, t: int, *, tol: float = 1e-9, max_iter: int = 60) -> int:
    """KL-based upper-confidence choice for rewards in [0, 1]."""
    forced = state.first_unpulled()
    if forced is not None:
        return forced
    return int(np.argmax(klucb_indices(state, t, tol=tol, max_iter=max_iter)))


def bernoulli_ts_choose(successes: np.ndarray, failures: np.ndarray,
                        rng: np.random.Generator) -> int:
    """Sample theta_i ~ Beta(1 + S_i, 1 + F_i) per arm; play the argmax."""
    theta = rng.beta(1.0 + successes, 1.0 + failures)
    return int(np.argmax(theta))


def gaussian_ts_samples(state: MabState, rng: np.random.Generator,
                        *, optimistic: bool = False) -> np.ndarray:
    """Posterior draws theta_i ~ Normal(mean_i, 1/pulls_i), one per arm.

    In optimistic mode the Gaussian is folded above the mean (the sample is
    conditioned on exceeding it), so theta_i >= mean_i always. Requires every
    arm pulled at least once.
    """
    noise = rng.standard_normal(state.n_arms)
    if optimistic:
        noise = np.abs(noise)
    return state.sums / state.counts + noise / np.sqrt(state.counts)


def gaussian_ts_choose(state: MabState, rng: np.random.Generator,
                       *, optimistic: bool = False) -> int:
    """Argmax of the per-arm Gaussian posterior draws, after forced pulls."""
    forced = state.first_unpulled()
    if forced is not None:
        return forced
    return int(np.argmax(gaussian_ts_samples(state, rng, optimistic=optimistic)))


def eps_greedy_choose(state: MabState, eps_t: float, rng: np.random.Generator) -> int:
    """Uniform arm with probability eps_t, otherwise greedy on the means."""
    eps_t = min(max(eps_t, 0.0), 1.0)
    if eps_t > 0.0 and rng.random() < eps_t:
        return int(rng.integers(state.n_arms))
    return int(np.argmax(state.means()))


def annealed_eps(eps: float, horizon: int, t: int) -> float:
    """Annealing schedule eps * sqrt(T) / (2 sqrt(t)), clamped to [0, 1]."""
    return min(max(eps * math.sqrt(horizon) / (2.0 * math.sqrt(t)), 0.0), 1.0)


def default_mab_zdist(horizon: int, *, M: int = 20, eps: float = 1e-7,
                      sigma: float = 0.125, optimistic: bool = True) -> ZDist:
    """Default multiplier distribution: discretized Gaussian on [0, 2*sqrt(ln T)].

    The non-optimistic variant mirrors the grid to [-U, U] and doubles the
    number of points, keeping the eps atom at the top.
    """
    upper = 2.0 * math.sqrt(math.log(horizon))
    if optimistic:
        return make_gaussian_zdist(0.0, upper, M, eps, sigma)
    return make_gaussian_zdist(-upper, upper, 2 * M, eps, sigma)


def default_ucb1_beta(horizon: int) -> float:
    return math.sqrt(2.0 * math.log(horizon))


# --- policy adapters -------------------------------------------------------
#
# Thin stateful wrappers with a uniform choose/update surface for the
# experiment runner. Each instance is owned by a single replication.


class RandUcbPolicy:
    def __init__(self, n_arms: int, horizon: int, z: ZDist | None = None,
                 *, coupled: bool = True, plus_one: bool = False):
        self.z = z if z is not None else default_mab_zdist(horizon)
        self.coupled = coupled
        self.plus_one = plus_one
        self.state = MabState.empty(n_arms)

    def choose(self, rng: np.random.Generator) -> int:
        return randucb_mab_choose(self.state, self.z, rng,
                                  coupled=self.coupled, plus_one=self.plus_one)

    def update(self, arm: int, reward: float, rng: np.random.Generator) -> None:
        self.state.record(arm, reward)


class Ucb1Policy:
    def __init__(self, n_arms: int, horizon: int, beta: float | None = None):
        self.beta = beta if beta is not None else default_ucb1_beta(horizon)
        self.state = MabState.empty(n_arms)

    def choose(self, rng: np.random.Generator) -> int:
        return ucb1_choose(self.state, self.beta)

    def update(self, arm: int, reward: float, rng: np.random.Generator) -> None:
        self.state.record(arm, reward)


class KlUcbPolicy:
    def __init__(self, n_arms: int, horizon: int):
        self.state = MabState.empty(n_arms)

    def choose(self, rng: np.random.Generator) -> int:
        return klucb_choose(self.state, self.state.t)

    def update(self, arm: int, reward: float, rng: np.random.Generator) -> None:
        self.state.record(arm, reward)


@dataclass
class BtsState:
    """Beta-posterior counters; fractional rewards are binarized on update."""

    successes: np.ndarray
    failures: np.ndarray

    @classmethod
    def empty(cls, n_arms: int) -> "BtsState":
        return cls(np.zeros(n_arms), np.zeros(n_arms))

    def record(self, arm: int, reward: float, rng: np.random.Generator) -> None:
        if reward not in (0.0, 1.0):
            reward = float(rng.random() < reward)
        self.successes[arm] += reward
        self.failures[arm] += 1.0 - reward


class BernoulliTsPolicy:
    def __init__(self, n_arms: int, horizon: int):
        self.state = BtsState.empty(n_arms)

    def choose(self, rng: np.random.Generator) -> int:
        return bernoulli_ts_choose(self.state.successes, self.state.failures, rng)

    def update(self, arm: int, reward: float, rng: np.random.Generator) -> None:
        self.state.record(arm, reward, rng)


class GaussianTsPolicy:
    def __init__(self, n_arms: int, horizon: int, *, optimistic: bool = False):
        self.optimistic = optimistic
        self.state = MabState.empty(n_arms)

    def choose(self, rng: np.random.Generator) -> int:
        return gaussian_ts_choose(self.state, rng, optimistic=self.optimistic)

    def update(self, arm: int, reward: float, rng: np.random.Generator) -> None:
        self.state.record(arm, reward)


class EpsGreedyPolicy:
    def __init__(self, n_arms: int, horizon: int, eps: float = 0.05):
        self.eps = eps
        self.horizon = horizon
        self.state = MabState.empty(n_arms)

    def choose(self, rng: np.random.Generator) -> int:
        return eps_greedy_choose(self.state, annealed_eps(self.eps, self.horizon, self.state.t), rng)

    def update(self, arm: int, reward: float, rng: np.random.Generator) -> None:
        self.state.record(arm, reward)


class UniformRandomPolicy:
    def __init__(self, n_arms: int, horizon: int):
        self.n_arms = n_arms

    def choose(self, rng: np.random.Generator) -> int:
        return int(rng.integers(self.n_arms))

    def update(self, arm: int, reward: float, rng: np.random.Generator) -> None:
        pass
