"""Discrete sampling distributions for the randomized confidence-bound multiplier.

A randomized UCB policy replaces the fixed confidence-width multiplier of an
optimistic index policy with a random draw Z. This module builds the discrete
distributions used for Z: a grid of equally spaced support points on [L, U]
with per-point probabilities, sampled by inverse CDF so that one uniform draw
produces one Z value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ZDist",
    "make_point_zdist",
    "make_gaussian_zdist",
    "make_uniform_zdist",
    "make_two_point_zdist",
]

_SPACING_RTOL = 1e-12
_PROB_ATOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class ZDist:
    """Discrete distribution on equally spaced support points.

    ``alphas`` are strictly ascending with ``alphas[0] == lower`` and
    ``alphas[-1] == upper``; a single-point distribution requires
    ``lower == upper``. ``probs`` are nonnegative and sum to one. Instances
    are immutable and safe to share across concurrent runs.
    """

    alphas: np.ndarray
    probs: np.ndarray
    lower: float
    upper: float
    kind: str = "custom"
    eps: float | None = None
    sigma: float | None = None
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        alphas = _readonly(self.alphas)
        probs = _readonly(self.probs)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "probs", probs)
        m = alphas.size
        if m < 1 or probs.size != m:
            raise ValueError("alphas and probs must be nonempty and equal-length")
        if not (np.all(np.isfinite(alphas)) and np.all(np.isfinite(probs))):
            raise ValueError("support points and probabilities must be finite")
        if m == 1:
            if self.lower != self.upper:
                raise ValueError("single-point distribution requires lower == upper")
        else:
            gaps = np.diff(alphas)
            if np.any(gaps <= 0):
                raise ValueError("support points must be strictly ascending")
            width = self.upper - self.lower
            if np.any(np.abs(gaps * (m - 1) - width) > _SPACING_RTOL * max(abs(width), 1.0)):
                raise ValueError("support points must be equally spaced on [lower, upper]")
        if alphas[0] != self.lower or alphas[-1] != self.upper:
            raise ValueError("support must start at lower and end at upper")
        if np.any(probs < 0):
            raise ValueError("probabilities must be nonnegative")
        if abs(float(probs.sum()) - 1.0) > _PROB_ATOL:
            raise ValueError("probabilities must sum to 1")
        object.__setattr__(self, "_cum", _readonly(np.cumsum(probs)))

    @property
    def m(self) -> int:
        """Number of support points."""
        return self.alphas.size

    def sample(self, rng: np.random.Generator) -> float:
        """Draw one value by inverse CDF, consuming exactly one uniform."""
        u = rng.random()
        idx = min(int(np.searchsorted(self._cum, u, side="right")), self.m - 1)
        return float(self.alphas[idx])

    def sample_many(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``n`` values, consuming exactly ``n`` uniforms."""
        u = rng.random(n)
        idx = np.minimum(np.searchsorted(self._cum, u, side="right"), self.m - 1)
        return self.alphas[idx]

    def tail_prob(self, c: float) -> float:
        """P(Z > c), strict inequality."""
        return float(self.probs[self.alphas > c].sum())

    def abs_tail_prob(self, c: float) -> float:
        """P(|Z| > c), strict inequality."""
        return float(self.probs[np.abs(self.alphas) > c].sum())

    def scaled_to(self, upper: float) -> "ZDist":
        """Affinely rescale the support so its top point lands at ``upper``.

        Probabilities are kept fixed; only the grid moves. Used by policies
        whose confidence width changes per round.
        """
        if upper == self.upper or self.upper == 0.0:
            return self
        scale = upper / self.upper
        if self.m == 1:
            lower, alphas = upper, np.array([upper])
        else:
            lower = self.lower * scale
            alphas = np.linspace(lower, upper, self.m)
        return ZDist(
            alphas=alphas,
            probs=self.probs,
            lower=lower,
            upper=upper,
            kind=self.kind,
            eps=self.eps,
            sigma=self.sigma,
        )

    def to_config(self) -> dict:
        """Serialize as the flat mapping used by harness config files."""
        cfg = {"kind": self.kind, "L": self.lower, "U": self.upper, "M": self.m}
        if self.eps is not None:
            cfg["eps"] = self.eps
        if self.sigma is not None:
            cfg["sigma"] = self.sigma
        return cfg


def zdist_from_config(cfg: dict) -> ZDist:
    """Rebuild a distribution from its ``to_config`` mapping."""
    kind = cfg.get("kind")
    if kind == "point":
        return make_point_zdist(float(cfg["U"]))
    if kind == "gaussian":
        return make_gaussian_zdist(
            float(cfg["L"]), float(cfg["U"]), int(cfg["M"]),
            float(cfg["eps"]), float(cfg["sigma"]),
        )
    if kind == "uniform":
        return make_uniform_zdist(float(cfg["L"]), float(cfg["U"]), int(cfg["M"]))
    if kind == "two_point":
        eps = float(cfg["eps"])
        if not 0.0 < eps < 1.0:
            raise ValueError("two_point eps must lie in (0, 1)")
        upper = float(cfg["U"])
        return ZDist(
            alphas=np.array([0.0, upper]),
            probs=np.array([1.0 - eps, eps]),
            lower=0.0,
            upper=upper,
            kind="two_point",
            eps=eps,
        )
    raise ValueError(f"unknown sampling-distribution kind: {kind!r}")


def make_point_zdist(beta: float) -> ZDist:
    """Degenerate distribution with all mass at ``beta``.

    A randomized index policy driven by this distribution reduces to the
    deterministic confidence-bound policy with multiplier ``beta``.
    """
    return ZDist(
        alphas=np.array([float(beta)]),
        probs=np.array([1.0]),
        lower=float(beta),
        upper=float(beta),
        kind="point",
    )


def make_gaussian_zdist(L: float, U: float, M: int, eps: float, sigma: float) -> ZDist:
    """Truncated, discretized Gaussian on ``M`` equally spaced points in [L, U].

    The top point carries probability exactly ``eps``; the remaining M - 1
    points receive Gaussian weights exp(-a^2 / (2 sigma^2)) normalized to
    total mass 1 - eps, where ``a`` is the support point rescaled to unit
    grid size (divided by max(|L|, |U|)). ``sigma`` therefore measures
    concentration relative to the grid span: small sigma piles mass near
    zero, sigma well above 1 approaches uniform weights, and the shape is
    invariant under affine rescaling of the grid. With M = 1 (which requires
    L == U) the distribution is the single atom with probability one.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must lie in [0, 1)")
    if L > U:
        raise ValueError("L must not exceed U")
    if M == 1:
        if L != U:
            raise ValueError("M = 1 requires L == U")
        return ZDist(
            alphas=np.array([float(L)]), probs=np.array([1.0]),
            lower=float(L), upper=float(U),
            kind="gaussian", eps=float(eps), sigma=float(sigma),
        )
    if L == U:
        raise ValueError("M >= 2 requires L < U")
    alphas = np.linspace(L, U, M)
    scale = max(abs(L), abs(U))
    # Shift exponents by their max before exponentiating; the normalized
    # weights are unchanged and cannot underflow to 0/0.
    exponents = -((alphas[:-1] / scale) ** 2) / (2.0 * sigma**2)
    raw = np.exp(exponents - exponents.max())
    probs = np.empty(M)
    probs[:-1] = (1.0 - eps) * raw / raw.sum()
    probs[-1] = eps
    return ZDist(
        alphas=alphas, probs=probs, lower=float(L), upper=float(U),
        kind="gaussian", eps=float(eps), sigma=float(sigma),
    )


def make_uniform_zdist(L: float, U: float, M: int) -> ZDist:
    """Uniform distribution over ``M`` equally spaced points in [L, U]."""
    if M < 2:
        raise ValueError("M must be at least 2")
    if L >= U:
        raise ValueError("L must be strictly below U")
    return ZDist(
        alphas=np.linspace(L, U, M), probs=np.full(M, 1.0 / M),
        lower=float(L), upper=float(U), kind="uniform",
    )


def make_two_point_zdist(eps: float, T: int) -> ZDist:
    """Two-point distribution: 0 with probability 1 - eps, 2*sqrt(ln T) with eps.

    Driving a randomized index policy with this distribution yields an
    adaptive epsilon-greedy strategy: greedy with probability 1 - eps,
    otherwise the arm maximizing the data-dependent upper confidence bound.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if T < 2:
        raise ValueError("T must be at least 2 so that ln T > 0")
    upper = 2.0 * math.sqrt(math.log(T))
    return ZDist(
        alphas=np.array([0.0, upper]), probs=np.array([1.0 - eps, eps]),
        lower=0.0, upper=upper, kind="two_point", eps=float(eps),
    )
