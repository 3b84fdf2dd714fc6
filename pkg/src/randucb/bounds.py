"""Closed-form regret-bound evaluators for the randomized index policies.

Each evaluator assembles a published worst-case (or gap-dependent) regret
bound from the tail probabilities of the multiplier distribution and the
problem constants, so simulations can be checked against theory. A bound's
preconditions can fail for user-supplied distributions; that outcome is
reported as a first-class non-applicable result rather than an exception.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .zdist import ZDist

__all__ = [
    "BoundReport",
    "mab_minimax_bound",
    "mab_gap_bound",
    "linear_minimax_bound",
    "glb_minimax_bound",
]


@dataclass(frozen=True)
class BoundReport:
    """One evaluated bound and the pieces it was assembled from.

    ``tail_hi`` is the optimism probability P(Z > threshold) entering the
    denominator; ``tail_abs`` is P(|Z| > c2), whose complement must hold for
    the bound's concentration argument; ``extra`` collects the additive
    constants. ``value`` is +inf when the bound is not applicable, with the
    failed precondition named in ``reason``.
    """

    value: float
    c1: float = 0.0
    c2: float = 0.0
    c3: float = 0.0
    tail_hi: float = 0.0
    tail_abs: float = 0.0
    extra: float = 0.0
    applicable: bool = True
    reason: str | None = None
    aux: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "value": self.value,
            "c1": self.c1,
            "c2": self.c2,
            "c3": self.c3,
            "tail_hi": self.tail_hi,
            "tail_abs": self.tail_abs,
            "extra": self.extra,
            "applicable": self.applicable,
        }
        if self.reason is not None:
            out["reason"] = self.reason
        out.update(self.aux)
        return out


def _not_applicable(reason: str, **fields) -> BoundReport:
    return BoundReport(value=math.inf, applicable=False, reason=reason, **fields)


def mab_minimax_bound(K: int, T: int, z: ZDist, c2: float | None = None) -> BoundReport:
    """Worst-case bound for the coupled randomized policy on a K-armed problem.

    With c1 = 1 + sqrt(ln(K T^2)) and c3 = 2 K ln(1 + T/K), the bound is
    (c1 + c2)(1 + 2/(P(Z > c1) - P(|Z| > c2))) sqrt(c3 T) + T P(|Z| > c2) + K + 1
    for any c2 > c1. By default c2 is the distribution's upper end, which
    zeroes the P(|Z| > c2) term.
    """
    c1 = 1.0 + math.sqrt(math.log(K * T**2))
    c3 = 2.0 * K * math.log(1.0 + T / K)
    if c2 is None:
        c2 = z.upper
    tail_hi = z.tail_prob(c1)
    tail_abs = z.abs_tail_prob(c2)
    parts = dict(c1=c1, c2=c2, c3=c3, tail_hi=tail_hi, tail_abs=tail_abs)
    if c2 <= c1:
        return _not_applicable("requires c2 > c1", **parts, extra=K + 1.0)
    denom = tail_hi - tail_abs
    if denom <= 0.0:
        return _not_applicable("optimism probability does not exceed the c2 tail",
                               **parts, extra=K + 1.0)
    value = (c1 + c2) * (1.0 + 2.0 / denom) * math.sqrt(c3 * T) + T * tail_abs + K + 1.0
    return BoundReport(value=value, **parts, extra=K + 1.0)


def mab_gap_bound(gaps, z: ZDist, T: int, K: int) -> BoundReport:
    """Gap-dependent bound for the uncoupled randomized policy.

    For support points 0 <= alpha_1 <= ... <= alpha_M with probabilities p_m
    and top mass p_M > 1/T, the bound is

        K + (sum_{n<M} [(p_1+..+p_n)/(p_{n+1}+..+p_M)] e^{-2 alpha_n^2}
             + T e^{-2 alpha_M^2} + 4 + 3 alpha_M^2) * sum_{gap>0} 6/gap.

    ``aux['crude_value']`` reports the looser variant with the probability
    ratios replaced by (M-1)/p_M and the exponentials by 1.
    """
    gaps = np.asarray(gaps, dtype=float)
    if gaps.size != K:
        raise ValueError("gaps must have one entry per arm")
    if np.any(gaps < 0):
        raise ValueError("gaps must be nonnegative")
    if not np.any(gaps <= 1e-12):
        raise ValueError("gaps must include a zero entry for the optimal arm")
    p_top = float(z.probs[-1])
    alpha_top = float(z.alphas[-1])
    if z.lower < 0:
        return _not_applicable("requires nonnegative support points", extra=float(K))
    if p_top <= 1.0 / T:
        return _not_applicable("top-point probability must exceed 1/T", extra=float(K))
    prefix = np.cumsum(z.probs)[:-1]
    ratios = prefix / (1.0 - prefix)
    series = float(np.sum(ratios * np.exp(-2.0 * z.alphas[:-1] ** 2)))
    per_round = series + T * math.exp(-2.0 * alpha_top**2) + 4.0 + 3.0 * alpha_top**2
    gap_sum = float(np.sum(6.0 / gaps[gaps > 0]))
    crude_per_round = ((z.m - 1) / p_top + T * math.exp(-2.0 * alpha_top**2)
                       + 4.0 + 3.0 * alpha_top**2)
    return BoundReport(
        value=K + per_round * gap_sum,
        c3=gap_sum,
        tail_hi=p_top,
        extra=float(K),
        aux={"per_round_term": per_round, "crude_value": K + crude_per_round * gap_sum},
    )


def linear_minimax_bound(d: int, T: int, lam: float, z: ZDist,
                         c2: float | None = None) -> BoundReport:
    """Worst-case bound for the randomized linear-bandit policy.

    With c1 = sqrt(lam) + 0.5 sqrt(d ln(T + T^2/(d lam))) and
    c3 = 2 d ln(1 + T/(d lam)), the bound is
    (c1 + c2)(1 + 2/(P(Z > c1) - P(|Z| > c2))) sqrt(c3 T) + T P(|Z| > c2) + 1.
    Arm count does not enter. T = 0 leaves only the additive constant.
    """
    if T == 0:
        return BoundReport(value=1.0, extra=1.0)
    c1 = math.sqrt(lam) + 0.5 * math.sqrt(d * math.log(T + T**2 / (d * lam)))
    c3 = 2.0 * d * math.log(1.0 + T / (d * lam))
    if c2 is None:
        c2 = z.upper
    tail_hi = z.tail_prob(c1)
    tail_abs = z.abs_tail_prob(c2)
    parts = dict(c1=c1, c2=c2, c3=c3, tail_hi=tail_hi, tail_abs=tail_abs)
    if c2 <= c1:
        return _not_applicable("requires c2 > c1", **parts, extra=1.0)
    denom = tail_hi - tail_abs
    if denom <= 0.0:
        return _not_applicable("optimism probability does not exceed the c2 tail",
                               **parts, extra=1.0)
    value = (c1 + c2) * (1.0 + 2.0 / denom) * math.sqrt(c3 * T) + T * tail_abs + 1.0
    return BoundReport(value=value, **parts, extra=1.0)


def glb_minimax_bound(d: int, T: int, mu: float, lipschitz: float, rho: float,
                      z: ZDist, c2: float | None = None) -> BoundReport:
    """Worst-case bound for the randomized generalized-linear policy.

    With c1 = sqrt(d ln(T/d) + 2 ln T)/(2 mu) and c3 = 2 d ln(1 + T/d), the
    bound is

        (c1 + c2/sqrt(mu)) (1 + 2/(P(Z > sqrt(L) c1) - P(|Z| > c2)))
            * L sqrt(c3 T) + T P(|Z| > c2) + tau,

    where L is the link's Lipschitz constant and
    tau = d + max{(d^2 ln(T/d) + 2 d ln T)/(mu^2 rho), d/rho} counts the
    forced-initialization rounds.

    The default c2 is max(U, 3 sqrt(L) c1): for L <= 1/4 the prescribed
    upper end 2 sqrt(L) c1 does not exceed c1, so c2 = U alone would always
    fail the c2 > c1 precondition; 3 sqrt(L) c1 is the choice that makes the
    bound sqrt(T)-scale while keeping P(|Z| > c2) = 0.
    """
    c1 = math.sqrt(d * math.log(T / d) + 2.0 * math.log(T)) / (2.0 * mu)
    c3 = 2.0 * d * math.log(1.0 + T / d)
    tau = d + max((d**2 * math.log(T / d) + 2.0 * d * math.log(T)) / (mu**2 * rho),
                  d / rho)
    if c2 is None:
        c2 = max(z.upper, 3.0 * math.sqrt(lipschitz) * c1)
    threshold = math.sqrt(lipschitz) * c1
    tail_hi = z.tail_prob(threshold)
    tail_abs = z.abs_tail_prob(c2)
    parts = dict(c1=c1, c2=c2, c3=c3, tail_hi=tail_hi, tail_abs=tail_abs)
    if c2 <= c1:
        return _not_applicable("requires c2 > c1", **parts, extra=tau,
                               aux={"tau": tau, "threshold": threshold})
    denom = tail_hi - tail_abs
    if denom <= 0.0:
        return _not_applicable("optimism probability does not exceed the c2 tail",
                               **parts, extra=tau, aux={"tau": tau, "threshold": threshold})
    value = ((c1 + c2 / math.sqrt(mu)) * (1.0 + 2.0 / denom)
             * lipschitz * math.sqrt(c3 * T) + T * tail_abs + tau)
    return BoundReport(value=value, **parts, extra=tau,
                       aux={"tau": tau, "threshold": threshold})
