"""Generalized linear (logistic) bandit machinery.

Policies here maintain a maximum-likelihood estimate of the hidden parameter
under a monotone link, refreshed by warm-started damped Newton steps, plus an
unregularized Gram matrix for confidence widths. Because the Gram matrix
starts singular, every policy runs a forced initialization phase that pulls a
spanning basis of arms a fixed number of times before index play begins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .links import LinkSpec, get_link
from .linear import sherman_morrison
from .mab import annealed_eps
from .zdist import ZDist, make_gaussian_zdist

__all__ = [
    "GlbState",
    "LinkSpec",
    "log_likelihood",
    "log_likelihood_gradient",
    "logistic_mle",
    "compute_hessian",
    "select_basis",
    "init_schedule",
    "theory_tau0",
    "capped_tau0",
    "glb_beta",
    "randucblog_choose",
    "ucbglm_choose",
    "glmts_choose",
    "RandUcbLogPolicy",
    "UcbGlmPolicy",
    "GlmTsPolicy",
    "GlbEpsGreedyPolicy",
]

_REFRESH_EVERY = 500
_RANK_TOL = 1e-12


def log_likelihood(X: np.ndarray, y: np.ndarray, theta: np.ndarray, link: LinkSpec) -> float:
    u = X @ theta
    return float(y @ u - np.sum(link.b(u)))


def log_likelihood_gradient(X: np.ndarray, y: np.ndarray, theta: np.ndarray,
                            link: LinkSpec) -> np.ndarray:
    u = X @ theta
    return X.T @ (y - link.g(u))


def logistic_mle(
    X: np.ndarray,
    y: np.ndarray,
    warm_start: np.ndarray,
    link: LinkSpec,
    *,
    max_iter: int = 100,
    tol: float = 1e-8,
    max_halvings: int = 20,
) -> tuple[np.ndarray, bool]:
    """Maximize the GLM log-likelihood sum_l [y_l u_l - b(u_l)], u = X theta.

    Damped Newton from ``warm_start``: each step is halved until the
    log-likelihood does not decrease, so accepted iterates are monotone.
    Returns the final iterate and a convergence flag (gradient norm <= tol).
    Non-convergence is signaled, not raised; callers keep their previous
    estimate or accept the improved iterate as they see fit.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    theta = np.asarray(warm_start, dtype=float).copy()
    ll = log_likelihood(X, y, theta, link)
    for _ in range(max_iter):
        u = X @ theta
        grad = X.T @ (y - link.g(u))
        if float(np.linalg.norm(grad)) <= tol:
            return theta, True
        w = link.g_prime(u)
        hess = X.T @ (X * w[:, None])
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            return theta, False
        scale = 1.0
        for _ in range(max_halvings):
            cand = theta + scale * step
            cand_ll = log_likelihood(X, y, cand, link)
            if cand_ll >= ll:
                break
            scale *= 0.5
        else:
            return theta, False
        theta, ll = cand, cand_ll
    converged = float(np.linalg.norm(log_likelihood_gradient(X, y, theta, link))) <= tol
    return theta, converged


def compute_hessian(X: np.ndarray, theta: np.ndarray, link: LinkSpec) -> np.ndarray:
    """Curvature sum_l g'(<x_l, theta>) x_l x_l^T; zero matrix for empty history."""
    X = np.asarray(X, dtype=float)
    if X.size == 0:
        d = X.shape[1] if X.ndim == 2 else np.asarray(theta).size
        return np.zeros((d, d))
    w = link.g_prime(X @ np.asarray(theta, dtype=float))
    return X.T @ (X * w[:, None])


def select_basis(features: np.ndarray) -> tuple[list[int], float]:
    """Greedy max-determinant selection of d spanning arms.

    Each step picks the arm with the largest residual outside the span of the
    rows chosen so far (which multiplies the selected volume by that residual
    norm). Returns the arm indices and rho, the smallest eigenvalue of
    sum_j v_j v_j^T over the selected rows.
    """
    X = np.asarray(features, dtype=float)
    n_arms, d = X.shape
    selected: list[int] = []
    basis_q = np.zeros((d, 0))
    for _ in range(d):
        residual = X - (X @ basis_q) @ basis_q.T
        norms2 = np.einsum("kd,kd->k", residual, residual)
        pick = int(np.argmax(norms2))
        if norms2[pick] <= _RANK_TOL:
            raise ValueError("features do not span the space; no basis exists")
        selected.append(pick)
        q = residual[pick] / math.sqrt(norms2[pick])
        basis_q = np.hstack([basis_q, q[:, None]])
    v = X[selected]
    rho = float(np.linalg.eigvalsh(v.T @ v)[0])
    return selected, rho


def init_schedule(basis: list[int], tau0: int) -> list[int]:
    """Forced pull order: each basis arm tau0 times, then each once more."""
    if tau0 < 1:
        raise ValueError("tau0 must be at least 1")
    return [arm for arm in basis for _ in range(tau0)] + list(basis)


def theory_tau0(d: int, horizon: int, mu: float, rho: float) -> int:
    """Per-basis-arm pull count max{(d ln(T/d) + 2 ln T)/(mu^2 rho), 1/rho}."""
    raw = max((d * math.log(horizon / d) + 2.0 * math.log(horizon)) / (mu**2 * rho),
              1.0 / rho)
    return max(int(math.ceil(raw)), 1)


def capped_tau0(d: int, horizon: int, mu: float, rho: float, *, cap: int = 50) -> int:
    """Desk-scale schedule: the theoretical count shrunk 100x and capped.

    The full theoretical count can exceed short horizons outright; this keeps
    initialization a small fraction of the run while still forcing a
    well-conditioned Gram matrix.
    """
    raw = d * math.log(horizon) / (mu**2 * rho * 100.0)
    return min(max(int(math.ceil(raw)), 1), cap)


def glb_beta(d: int, horizon: int, mu: float) -> float:
    """Confidence width (1/mu) sqrt((d/2) ln(1 + 2T/d) + ln T)."""
    return math.sqrt(0.5 * d * math.log(1.0 + 2.0 * horizon / d) + math.log(horizon)) / mu


class GlbState:
    """Observation history, MLE iterate, and unregularized Gram matrix."""

    def __init__(self, d: int, link: LinkSpec):
        self.link = link
        self._X = np.empty((64, d))
        self._y = np.empty(64)
        self.n = 0
        self.gram = np.zeros((d, d))
        self.gram_inv: np.ndarray | None = None
        self.theta_hat = np.zeros(d)
        self.converged = False
        self.initialized = False
        self.t = 1
        self._pending_refresh = 0

    @property
    def dim(self) -> int:
        return self._X.shape[1]

    @property
    def X(self) -> np.ndarray:
        return self._X[: self.n]

    @property
    def y(self) -> np.ndarray:
        return self._y[: self.n]

    def record(self, x: np.ndarray, reward: float) -> None:
        if self.n == self._X.shape[0]:
            self._X = np.vstack([self._X, np.empty_like(self._X)])
            self._y = np.concatenate([self._y, np.empty_like(self._y)])
        self._X[self.n] = x
        self._y[self.n] = reward
        self.n += 1
        self.t += 1
        self.gram += np.outer(x, x)
        if self.initialized:
            self.gram_inv, _ = sherman_morrison(self.gram_inv, np.asarray(x, dtype=float))
            self._pending_refresh += 1
            if self._pending_refresh >= _REFRESH_EVERY:
                self._refresh_inverse()

    def _refresh_inverse(self) -> None:
        inv = np.linalg.inv(self.gram)
        self.gram_inv = 0.5 * (inv + inv.T)
        self._pending_refresh = 0

    def finalize_init(self) -> None:
        """Close the forced phase: invert the Gram matrix and solve the MLE in full."""
        np.linalg.cholesky(self.gram)  # raises if the forced pulls failed to span
        self._refresh_inverse()
        self.theta_hat, self.converged = logistic_mle(
            self.X, self.y, np.zeros(self.dim), self.link)
        np.linalg.cholesky(compute_hessian(self.X, self.theta_hat, self.link))
        self.initialized = True

    def refit(self, *, max_iter: int = 5) -> None:
        """Warm-started Newton refresh of the MLE after a new observation."""
        self.theta_hat, self.converged = logistic_mle(
            self.X, self.y, self.theta_hat, self.link, max_iter=max_iter)

    def norms_minv(self, features: np.ndarray) -> np.ndarray:
        if self.gram_inv is None:
            raise RuntimeError("Gram inverse unavailable before initialization")
        q = np.einsum("kd,kd->k", features @ self.gram_inv, features)
        return np.sqrt(np.maximum(q, 0.0))


def randucblog_choose(state: GlbState, features: np.ndarray, z: ZDist,
                      rng: np.random.Generator) -> int:
    """Randomized index argmax <theta_hat, x_i> + Z * ||x_i||_{M^{-1}}."""
    if not state.initialized:
        raise RuntimeError("initialization phase incomplete")
    zval = z.sample(rng)
    scores = features @ state.theta_hat + zval * state.norms_minv(features)
    return int(np.argmax(scores))


def ucbglm_choose(state: GlbState, features: np.ndarray, beta: float) -> int:
    """Deterministic index argmax <theta_hat, x_i> + beta * ||x_i||_{M^{-1}}."""
    if not state.initialized:
        raise RuntimeError("initialization phase incomplete")
    scores = features @ state.theta_hat + beta * state.norms_minv(features)
    return int(np.argmax(scores))


def glmts_choose(state: GlbState, features: np.ndarray, scale: float,
                 rng: np.random.Generator) -> int:
    """Laplace-approximation sample theta ~ Normal(theta_hat, scale^2 H^{-1}).

    The argmax of <theta, x_i> equals the argmax of g(<theta, x_i>) since the
    link is strictly increasing.
    """
    if not state.initialized:
        raise RuntimeError("initialization phase incomplete")
    hess = compute_hessian(state.X, state.theta_hat, state.link)
    chol = np.linalg.cholesky(hess)
    noise = np.linalg.solve(chol.T, rng.standard_normal(state.dim))
    theta = state.theta_hat + scale * noise
    return int(np.argmax(features @ theta))


# --- policy adapters -------------------------------------------------------


def default_glb_zdist(d: int, horizon: int, mu: float, *, M: int = 20,
                      eps: float = 1e-7, sigma: float = 0.125) -> ZDist:
    return make_gaussian_zdist(0.0, glb_beta(d, horizon, mu), M, eps, sigma)


class _GlbPolicyBase:
    """Shared forced-initialization and MLE upkeep for the GLM policies."""

    def __init__(self, features: np.ndarray, horizon: int, *, link: str = "logistic",
                 mu: float | None = None, tau0: int | None = None,
                 tau0_mode: str = "capped"):
        self.features = np.asarray(features, dtype=float)
        self.horizon = horizon
        self.link = get_link(link)
        self.mu = mu if mu is not None else self.link.mu_floor
        d = self.features.shape[1]
        basis, self.rho = select_basis(self.features)
        if tau0 is None:
            if tau0_mode == "capped":
                tau0 = capped_tau0(d, horizon, self.mu, self.rho)
            elif tau0_mode == "theory":
                tau0 = theory_tau0(d, horizon, self.mu, self.rho)
            else:
                raise ValueError(f"unknown tau0_mode: {tau0_mode!r}")
        self.schedule = init_schedule(basis, tau0)
        self.state = GlbState(d, self.link)

    def choose(self, rng: np.random.Generator) -> int:
        done = self.state.t - 1
        if done < len(self.schedule):
            return self.schedule[done]
        return self._index_choose(rng)

    def update(self, arm: int, reward: float, rng: np.random.Generator) -> None:
        self.state.record(self.features[arm], reward)
        if not self.state.initialized:
            if self.state.t - 1 == len(self.schedule):
                self.state.finalize_init()
            return
        self.state.refit()

    def _index_choose(self, rng: np.random.Generator) -> int:
        raise NotImplementedError


class RandUcbLogPolicy(_GlbPolicyBase):
    def __init__(self, features: np.ndarray, horizon: int, *, z: ZDist | None = None,
                 **kwargs):
        super().__init__(features, horizon, **kwargs)
        d = self.features.shape[1]
        self.z = z if z is not None else default_glb_zdist(d, horizon, self.mu)

    def _index_choose(self, rng: np.random.Generator) -> int:
        return randucblog_choose(self.state, self.features, self.z, rng)


class UcbGlmPolicy(_GlbPolicyBase):
    def __init__(self, features: np.ndarray, horizon: int, *, beta: float | None = None,
                 **kwargs):
        super().__init__(features, horizon, **kwargs)
        d = self.features.shape[1]
        self.beta = beta if beta is not None else glb_beta(d, horizon, self.mu)

    def _index_choose(self, rng: np.random.Generator) -> int:
        return ucbglm_choose(self.state, self.features, self.beta)


class GlmTsPolicy(_GlbPolicyBase):
    def __init__(self, features: np.ndarray, horizon: int, *, scale: float = 1.0,
                 **kwargs):
        super().__init__(features, horizon, **kwargs)
        self.scale = scale

    def _index_choose(self, rng: np.random.Generator) -> int:
        return glmts_choose(self.state, self.features, self.scale, rng)


class GlbEpsGreedyPolicy(_GlbPolicyBase):
    def __init__(self, features: np.ndarray, horizon: int, *, eps: float = 0.05,
                 **kwargs):
        super().__init__(features, horizon, **kwargs)
        self.eps = eps

    def _index_choose(self, rng: np.random.Generator) -> int:
        eps_t = annealed_eps(self.eps, self.horizon, self.state.t)
        if eps_t > 0.0 and rng.random() < eps_t:
            return int(rng.integers(self.features.shape[0]))
        return int(np.argmax(self.features @ self.state.theta_hat))
