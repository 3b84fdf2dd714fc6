"""Ground-truth bandit environments and randomized instance generators.

Instances are immutable after generation and safe to share across parallel
replications; each replication owns its own reward RNG stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .links import get_link

__all__ = [
    "MabInstance",
    "StructuredInstance",
    "gen_mab",
    "gen_structured",
]

_NORM_TOL = 1e-12

DIFFICULTY_RANGES = {"easy": (0.25, 0.75), "hard": (0.45, 0.55)}


@dataclass(frozen=True)
class MabInstance:
    """K-armed instance: per-arm means plus a reward noise family.

    ``kind`` selects the reward distribution around each mean: ``bernoulli``
    ({0,1} coin), ``beta`` (Beta(nu*mu, nu*(1-mu)), mean mu, concentration
    nu), or ``gaussian`` (Normal(mu, sigma_r^2), not clipped to [0, 1]).
    """

    means: np.ndarray
    kind: str = "bernoulli"
    nu: float = 4.0
    sigma_r: float = 0.1

    def __post_init__(self) -> None:
        means = np.asarray(self.means, dtype=float)
        means.flags.writeable = False
        object.__setattr__(self, "means", means)
        if means.ndim != 1 or means.size < 2:
            raise ValueError("need at least 2 arms")
        if np.any(means < 0.0) or np.any(means > 1.0):
            raise ValueError("arm means must lie in [0, 1]")
        if self.kind not in ("bernoulli", "beta", "gaussian"):
            raise ValueError(f"unknown reward kind: {self.kind!r}")
        if self.kind == "beta":
            if self.nu <= 0:
                raise ValueError("beta concentration nu must be positive")
            if np.any(means <= 0.0) or np.any(means >= 1.0):
                raise ValueError("beta rewards need means strictly inside (0, 1)")
        if self.kind == "gaussian" and self.sigma_r <= 0:
            raise ValueError("gaussian reward stddev must be positive")

    @property
    def n_arms(self) -> int:
        return self.means.size

    def expected_rewards(self) -> np.ndarray:
        return self.means

    def optimal_arm(self) -> int:
        return int(np.argmax(self.means))

    def gap(self, arm: int) -> float:
        return float(self.means.max() - self.means[arm])

    def pull(self, arm: int, rng: np.random.Generator) -> float:
        mu = float(self.means[arm])
        if self.kind == "bernoulli":
            return float(rng.random() < mu)
        if self.kind == "beta":
            return float(rng.beta(self.nu * mu, self.nu * (1.0 - mu)))
        return float(mu + self.sigma_r * rng.standard_normal())

    def pull_matrix(self, horizon: int, rng: np.random.Generator) -> np.ndarray:
        """Pre-draw a (horizon, K) reward table, one row per round."""
        shape = (horizon, self.n_arms)
        if self.kind == "bernoulli":
            return (rng.random(shape) < self.means).astype(float)
        if self.kind == "beta":
            return rng.beta(self.nu * self.means, self.nu * (1.0 - self.means), size=shape)
        return self.means + self.sigma_r * rng.standard_normal(shape)


@dataclass(frozen=True)
class StructuredInstance:
    """Feature-based instance: expected reward is link(<x_i, theta_star>).

    Feature rows and the hidden parameter have norm at most 1, and the link
    output lies in [0, 1] for every arm. Rewards are Bernoulli coins around
    the expected value unless ``mean_rewards`` is set, in which case pulls
    return the expected value itself (deterministic mode for tests).
    """

    theta_star: np.ndarray
    features: np.ndarray
    link: str = "identity"
    mean_rewards: bool = False

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta_star, dtype=float)
        feats = np.asarray(self.features, dtype=float)
        theta.flags.writeable = False
        feats.flags.writeable = False
        object.__setattr__(self, "theta_star", theta)
        object.__setattr__(self, "features", feats)
        if feats.ndim != 2 or feats.shape[1] != theta.size:
            raise ValueError("features must be a (K, d) matrix matching theta_star")
        if np.linalg.norm(theta) > 1.0 + _NORM_TOL:
            raise ValueError("theta_star must have norm at most 1")
        if np.any(np.linalg.norm(feats, axis=1) > 1.0 + _NORM_TOL):
            raise ValueError("every feature row must have norm at most 1")
        get_link(self.link)  # validates the name
        p = self.expected_rewards()
        if np.any(p < -_NORM_TOL) or np.any(p > 1.0 + _NORM_TOL):
            raise ValueError("expected rewards must lie in [0, 1]")

    @property
    def n_arms(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def expected_rewards(self) -> np.ndarray:
        return np.asarray(get_link(self.link).g(self.features @ self.theta_star), dtype=float)

    def optimal_arm(self) -> int:
        return int(np.argmax(self.expected_rewards()))

    def gap(self, arm: int) -> float:
        p = self.expected_rewards()
        return float(p.max() - p[arm])

    def pull(self, arm: int, rng: np.random.Generator) -> float:
        p = float(self.expected_rewards()[arm])
        if self.mean_rewards:
            return p
        return float(rng.random() < p)

    def pull_matrix(self, horizon: int, rng: np.random.Generator) -> np.ndarray:
        p = self.expected_rewards()
        if self.mean_rewards:
            return np.tile(p, (horizon, 1))
        return (rng.random((horizon, self.n_arms)) < p).astype(float)


def gen_mab(
    K: int,
    difficulty: str,
    rng: np.random.Generator,
    *,
    kind: str = "bernoulli",
    nu: float = 4.0,
    sigma_r: float = 0.1,
) -> MabInstance:
    """Draw a K-armed instance with means uniform on the difficulty interval."""
    if K < 2:
        raise ValueError("need at least 2 arms")
    try:
        lo, hi = DIFFICULTY_RANGES[difficulty]
    except KeyError:
        raise ValueError(f"unknown difficulty: {difficulty!r}") from None
    means = rng.uniform(lo, hi, size=K)
    return MabInstance(means=means, kind=kind, nu=nu, sigma_r=sigma_r)


def _half_sphere_point(d: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform direction in R^(d-1) scaled to norm 1/sqrt(2), plus a 1/sqrt(2) slot.

    The constant final coordinate keeps every dot product with a vector of the
    same construction inside [0, 1].
    """
    v = rng.standard_normal(d - 1)
    v *= (1.0 / math.sqrt(2.0)) / np.linalg.norm(v)
    return np.append(v, 1.0 / math.sqrt(2.0))


def gen_structured(
    K: int,
    d: int,
    link: str,
    rng: np.random.Generator,
    *,
    mean_rewards: bool = False,
) -> StructuredInstance:
    """Draw a feature-based instance with unit-norm parameter and features."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    if K < 2:
        raise ValueError("need at least 2 arms")
    theta = _half_sphere_point(d, rng)
    feats = np.stack([_half_sphere_point(d, rng) for _ in range(K)])
    return StructuredInstance(theta_star=theta, features=feats, link=link, mean_rewards=mean_rewards)
