"""Mean (link) functions for structured bandit reward models."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["LinkSpec", "IDENTITY", "LOGISTIC", "get_link"]


def _sigmoid(u):
    return 1.0 / (1.0 + np.exp(-u))


@dataclass(frozen=True)
class LinkSpec:
    """A strictly increasing differentiable mean function with slope bounds.

    ``lipschitz`` upper-bounds the derivative everywhere; ``mu_floor``
    lower-bounds it over the feasible region (unit-norm features, parameter
    within distance 1 of a unit ball), so linear predictors stay in [-2, 2].
    """

    kind: str
    lipschitz: float
    mu_floor: float

    def g(self, u):
        if self.kind == "identity":
            return u
        return _sigmoid(u)

    def g_prime(self, u):
        if self.kind == "identity":
            return np.ones_like(np.asarray(u, dtype=float))
        s = _sigmoid(u)
        return s * (1.0 - s)

    def b(self, u):
        """Antiderivative of ``g``; strictly convex, drives the GLM likelihood."""
        if self.kind == "identity":
            return 0.5 * np.asarray(u, dtype=float) ** 2
        return np.logaddexp(0.0, u)


# Logistic slope attains its max 1/4 at 0 and its floor over |u| <= 2 at u = 2.
_MU_LOGISTIC = math.exp(2.0) / (1.0 + math.exp(2.0)) ** 2

IDENTITY = LinkSpec(kind="identity", lipschitz=1.0, mu_floor=1.0)
LOGISTIC = LinkSpec(kind="logistic", lipschitz=0.25, mu_floor=_MU_LOGISTIC)

_BY_NAME = {"identity": IDENTITY, "logistic": LOGISTIC}


def get_link(name: str) -> LinkSpec:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise ValueError(f"unknown link: {name!r}") from None
