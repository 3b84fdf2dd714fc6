"""Linear bandit machinery: incremental ridge regression and index policies.

The regression state keeps the regularized Gram matrix, its inverse (rank-1
updates with periodic dense refreshes), the log-determinant, and the ridge
estimate. Policies score a finite arm set by
<theta_hat, x_i> + multiplier * ||x_i||_{M^{-1}}; the randomized variant
draws the multiplier from a :class:`~randucb.zdist.ZDist` whose grid can be
rescaled each round to track the data-dependent confidence width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mab import annealed_eps
from .zdist import ZDist, make_gaussian_zdist

__all__ = [
    "LinState",
    "sherman_morrison",
    "linucb_beta",
    "fixed_mode_c1",
    "randlinucb_choose",
    "linucb_choose",
    "lints_sample_theta",
    "lints_choose",
    "RandLinUcbPolicy",
    "LinUcbPolicy",
    "LinTsPolicy",
    "LinEpsGreedyPolicy",
]

_REFRESH_EVERY = 500
_FEATURE_NORM_TOL = 1e-9
_DRIFT_TOL = 1e-8


def sherman_morrison(inv: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, float]:
    """Inverse of A + x x^T given inv = A^{-1}; also returns 1 + x^T A^{-1} x."""
    v = inv @ x
    denom = 1.0 + float(x @ v)
    return inv - np.outer(v, v) / denom, denom


@dataclass
class LinState:
    """Ridge-regression sufficient statistics after t - 1 observations."""

    gram: np.ndarray
    gram_inv: np.ndarray
    b: np.ndarray
    theta_hat: np.ndarray
    logdet: float
    lam: float
    t: int = 1
    _pending_refresh: int = field(default=0, repr=False)

    @classmethod
    def empty(cls, d: int, lam: float) -> "LinState":
        if lam <= 0:
            raise ValueError("ridge parameter must be positive")
        return cls(
            gram=lam * np.eye(d),
            gram_inv=np.eye(d) / lam,
            b=np.zeros(d),
            theta_hat=np.zeros(d),
            logdet=d * math.log(lam),
            lam=lam,
        )

    @property
    def dim(self) -> int:
        return self.b.size

    def update(self, x: np.ndarray, y: float) -> None:
        """Fold in one observation (x, y) via a rank-1 inverse update."""
        x = np.asarray(x, dtype=float)
        if not (np.all(np.isfinite(x)) and math.isfinite(y)):
            raise ValueError("observation must be finite")
        if np.linalg.norm(x) > 1.0 + _FEATURE_NORM_TOL:
            raise ValueError("feature norm must be at most 1")
        self.gram_inv, denom = sherman_morrison(self.gram_inv, x)
        self.gram += np.outer(x, x)
        self.logdet += math.log(denom)
        self.b += y * x
        # Dense solve rather than gram_inv @ b: it avoids amplifying inverse
        # drift and makes the estimate exact for diagonal systems.
        self.theta_hat = np.linalg.solve(self.gram, self.b)
        self.t += 1
        self._pending_refresh += 1
        if self._pending_refresh >= _REFRESH_EVERY:
            self._refresh()

    def _refresh(self) -> None:
        """Recompute the inverse and log-determinant from a dense factorization."""
        fresh_inv = np.linalg.inv(self.gram)
        sign, fresh_logdet = np.linalg.slogdet(self.gram)
        assert sign > 0, "Gram matrix lost positive definiteness"
        assert np.max(np.abs(self.gram @ self.gram_inv - np.eye(self.dim))) < _DRIFT_TOL, \
            "rank-1 inverse drifted beyond tolerance"
        assert abs(self.logdet - fresh_logdet) < _DRIFT_TOL, \
            "log-determinant drifted beyond tolerance"
        self.gram_inv = 0.5 * (fresh_inv + fresh_inv.T)
        self.logdet = float(fresh_logdet)
        self.theta_hat = np.linalg.solve(self.gram, self.b)
        self._pending_refresh = 0

    def norm_minv(self, x: np.ndarray) -> float:
        """||x||_{M^{-1}} = sqrt(x^T M^{-1} x)."""
        q = float(np.asarray(x, dtype=float) @ self.gram_inv @ np.asarray(x, dtype=float))
        return math.sqrt(max(q, 0.0))

    def norms_minv(self, features: np.ndarray) -> np.ndarray:
        """||x||_{M^{-1}} for every row of ``features``."""
        q = np.einsum("kd,kd->k", features @ self.gram_inv, features)
        return np.sqrt(np.maximum(q, 0.0))


def linucb_beta(state: LinState, horizon: int) -> float:
    """Data-dependent width sqrt(lam) + 0.5*sqrt(ln(T^2 lam^-d det(M_t)))."""
    inner = 2.0 * math.log(horizon) + state.logdet - state.dim * math.log(state.lam)
    return math.sqrt(state.lam) + 0.5 * math.sqrt(max(inner, 0.0))


def fixed_mode_c1(d: int, horizon: int, lam: float) -> float:
    """Horizon constant sqrt(lam) + 0.5*sqrt(d ln(T + T^2/(d lam)))."""
    return math.sqrt(lam) + 0.5 * math.sqrt(d * math.log(horizon + horizon**2 / (d * lam)))


def _round_zdist(state: LinState, z: ZDist, u_mode: str, horizon: int) -> ZDist:
    if u_mode == "data_dependent":
        return z.scaled_to(linucb_beta(state, horizon))
    if u_mode == "fixed":
        return z.scaled_to(3.0 * fixed_mode_c1(state.dim, horizon, state.lam))
    if u_mode == "none":
        return z
    raise ValueError(f"unknown u_mode: {u_mode!r}")


def randlinucb_choose(
    state: LinState,
    features: np.ndarray,
    z: ZDist,
    rng: np.random.Generator,
    *,
    u_mode: str = "data_dependent",
    horizon: int,
) -> int:
    """Draw one shared Z and play argmax <theta_hat, x_i> + Z * ||x_i||_{M^{-1}}.

    The multiplier grid is rescaled so its top point sits at the current
    confidence width: the per-round data-dependent width, or three times the
    horizon constant in fixed mode. ``u_mode="none"`` uses the grid as given.
    """
    zval = _round_zdist(state, z, u_mode, horizon).sample(rng)
    scores = features @ state.theta_hat + zval * state.norms_minv(features)
    return int(np.argmax(scores))


def linucb_choose(state: LinState, features: np.ndarray, beta_t: float) -> int:
    """Deterministic index choice argmax <theta_hat, x_i> + beta_t * ||x_i||_{M^{-1}}."""
    scores = features @ state.theta_hat + beta_t * state.norms_minv(features)
    return int(np.argmax(scores))


def lints_sample_theta(state: LinState, beta_t: float, rng: np.random.Generator,
                       *, inflation: float = 1.0) -> np.ndarray:
    """One draw theta ~ Normal(theta_hat, (inflation*beta_t)^2 M^{-1})."""
    if inflation < 1.0:
        raise ValueError("inflation must be at least 1")
    cov_chol = np.linalg.cholesky(0.5 * (state.gram_inv + state.gram_inv.T))
    return state.theta_hat + inflation * beta_t * (cov_chol @ rng.standard_normal(state.dim))


def lints_choose(
    state: LinState,
    features: np.ndarray,
    beta_t: float,
    rng: np.random.Generator,
    *,
    inflation: float = 1.0,
) -> int:
    """Play the argmax of <theta, x_i> under one posterior-style draw.

    ``inflation`` = 1 is the common practical variant; sqrt(d) restores the
    theoretically calibrated posterior width.
    """
    theta = lints_sample_theta(state, beta_t, rng, inflation=inflation)
    return int(np.argmax(features @ theta))


# --- policy adapters -------------------------------------------------------


def default_linear_zdist(d: int, horizon: int, lam: float, *, M: int = 20,
                         eps: float = 1e-7, sigma: float = 0.125) -> ZDist:
    """Gaussian multiplier grid anchored at the round-1 data-dependent width."""
    upper = math.sqrt(lam) + 0.5 * math.sqrt(2.0 * math.log(horizon))
    return make_gaussian_zdist(0.0, upper, M, eps, sigma)


class RandLinUcbPolicy:
    def __init__(self, features: np.ndarray, horizon: int, *, lam: float = 1e-4,
                 z: ZDist | None = None, u_mode: str = "data_dependent"):
        self.features = np.asarray(features, dtype=float)
        self.horizon = horizon
        self.u_mode = u_mode
        d = self.features.shape[1]
        self.z = z if z is not None else default_linear_zdist(d, horizon, lam)
        self.state = LinState.empty(d, lam)

    def choose(self, rng: np.random.Generator) -> int:
        return randlinucb_choose(self.state, self.features, self.z, rng,
                                 u_mode=self.u_mode, horizon=self.horizon)

    def update(self, arm: int, reward: float, rng: np.random.Generator) -> None:
        self.state.update(self.features[arm], reward)


class LinUcbPolicy:
    """Deterministic confidence-bound policy; ``beta=None`` tracks the
    data-dependent width each round, a float pins it."""

    def __init__(self, features: np.ndarray, horizon: int, *, lam: float = 1e-4,
                 beta: float | None = None):
        self.features = np.asarray(features, dtype=float)
        self.horizon = horizon
        self.beta = beta
        self.state = LinState.empty(self.features.shape[1], lam)

    def choose(self, rng: np.random.Generator) -> int:
        beta_t = self.beta if self.beta is not None else linucb_beta(self.state, self.horizon)
        return linucb_choose(self.state, self.features, beta_t)

    def update(self, arm: int, reward: float, rng: np.random.Generator) -> None:
        self.state.update(self.features[arm], reward)


class LinTsPolicy:
    def __init__(self, features: np.ndarray, horizon: int, *, lam: float = 1e-4,
                 inflation: float = 1.0):
        self.features = np.asarray(features, dtype=float)
        self.horizon = horizon
        self.inflation = inflation
        self.state = LinState.empty(self.features.shape[1], lam)

    def choose(self, rng: np.random.Generator) -> int:
        beta_t = linucb_beta(self.state, self.horizon)
        return lints_choose(self.state, self.features, beta_t, rng, inflation=self.inflation)

    def update(self, arm: int, reward: float, rng: np.random.Generator) -> None:
        self.state.update(self.features[arm], reward)


class LinEpsGreedyPolicy:
    def __init__(self, features: np.ndarray, horizon: int, *, lam: float = 1e-4,
                 eps: float = 0.05):
        self.features = np.asarray(features, dtype=float)
        self.horizon = horizon
        self.eps = eps
        self.t = 1
        self.state = LinState.empty(self.features.shape[1], lam)

    def choose(self, rng: np.random.Generator) -> int:
        eps_t = annealed_eps(self.eps, self.horizon, self.t)
        if eps_t > 0.0 and rng.random() < eps_t:
            return int(rng.integers(self.features.shape[0]))
        return int(np.argmax(self.features @ self.state.theta_hat))

    def update(self, arm: int, reward: float, rng: np.random.Generator) -> None:
        self.state.update(self.features[arm], reward)
        self.t += 1
