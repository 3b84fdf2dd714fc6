"""Policy registry: config names to policy builders, per environment family."""

from __future__ import annotations

import math

import numpy as np

from .. import glb, linear, mab
from ..links import get_link
from ..zdist import ZDist, make_gaussian_zdist, make_point_zdist, make_two_point_zdist, make_uniform_zdist
from .config import ConfigError, PolicySpec

__all__ = ["validate_policy_spec", "build_policy", "build_zdist", "policy_names"]

_ZDIST_KEYS = {"zdist.kind", "zdist.L", "zdist.U", "zdist.M", "zdist.eps", "zdist.sigma"}
_GLB_COMMON = {"link", "mu_mode", "mu", "tau0", "tau0_mode"}

_ALLOWED = {
    "mab": {
        "randucb": _ZDIST_KEYS | {"coupled", "plus_one", "optimistic"},
        "randucb_uncoupled": _ZDIST_KEYS | {"plus_one", "optimistic"},
        "randucb_nonoptimistic": _ZDIST_KEYS | {"coupled", "plus_one"},
        "ucb1": {"beta"},
        "klucb": set(),
        "bts": set(),
        "gts": set(),
        "ots": set(),
        "eps_greedy": {"eps"},
        "random": set(),
    },
    "linear": {
        "randlinucb": _ZDIST_KEYS | {"lambda", "u_mode"},
        "linucb": {"lambda", "beta_mode", "beta"},
        "lints": {"lambda", "inflation"},
        "eps_greedy": {"lambda", "eps"},
        "random": set(),
    },
    "logistic": {
        "randucblog": _ZDIST_KEYS | _GLB_COMMON,
        "ucbglm": _GLB_COMMON | {"beta"},
        "glmts": _GLB_COMMON | {"scale"},
        "eps_greedy": _GLB_COMMON | {"eps"},
        "random": set(),
    },
}


def policy_names(family: str) -> list[str]:
    return sorted(_ALLOWED[family])


def validate_policy_spec(family: str, spec: PolicySpec) -> None:
    try:
        allowed = _ALLOWED[family]
    except KeyError:
        raise ConfigError(f"family: unknown family {family!r}") from None
    if spec.kind not in allowed:
        raise ConfigError(
            f"policy.{spec.label}.kind: unknown policy {spec.kind!r} for family "
            f"{family!r}; expected one of {', '.join(policy_names(family))}")
    bad = sorted(set(spec.params) - allowed[spec.kind])
    if bad:
        raise ConfigError(f"policy.{spec.label}.{bad[0]}: not a parameter of {spec.kind!r}")


def _pfloat(spec: PolicySpec, key: str, default: float) -> float:
    value = spec.params.get(key)
    if value is None:
        return default
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"policy.{spec.label}.{key}: expected a number, got {value!r}") from None


def _pint(spec: PolicySpec, key: str, default: int) -> int:
    value = spec.params.get(key)
    if value is None:
        return default
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"policy.{spec.label}.{key}: expected an integer, got {value!r}") from None


def _pbool(spec: PolicySpec, key: str, default: bool) -> bool:
    value = spec.params.get(key)
    if value is None:
        return default
    if value.lower() in ("true", "yes", "1"):
        return True
    if value.lower() in ("false", "no", "0"):
        return False
    raise ConfigError(f"policy.{spec.label}.{key}: expected true/false, got {value!r}")


def build_zdist(spec: PolicySpec, default_upper: float, *, horizon: int,
                 optimistic: bool = True) -> ZDist:
    kind = spec.params.get("zdist.kind", "gaussian")
    upper = _pfloat(spec, "zdist.U", default_upper)
    eps = _pfloat(spec, "zdist.eps", 1e-7)
    sigma = _pfloat(spec, "zdist.sigma", 0.125)
    try:
        if kind == "gaussian":
            lower = _pfloat(spec, "zdist.L", 0.0 if optimistic else -upper)
            m = _pint(spec, "zdist.M", 20 if optimistic else 40)
            return make_gaussian_zdist(lower, upper, m, eps, sigma)
        if kind == "uniform":
            lower = _pfloat(spec, "zdist.L", 0.0)
            return make_uniform_zdist(lower, upper, _pint(spec, "zdist.M", 20))
        if kind == "point":
            return make_point_zdist(upper)
        if kind == "two_point":
            if "zdist.U" in spec.params:
                return ZDist(alphas=np.array([0.0, upper]),
                             probs=np.array([1.0 - eps, eps]),
                             lower=0.0, upper=upper, kind="two_point", eps=eps)
            return make_two_point_zdist(eps, horizon)
    except ValueError as exc:
        raise ConfigError(f"policy.{spec.label}.zdist: {exc}") from exc
    raise ConfigError(f"policy.{spec.label}.zdist.kind: unknown kind {kind!r}")


def _build_mab(spec: PolicySpec, n_arms: int, horizon: int):
    kind = spec.kind
    if kind in ("randucb", "randucb_uncoupled", "randucb_nonoptimistic"):
        optimistic = kind != "randucb_nonoptimistic" and _pbool(spec, "optimistic", True)
        coupled = kind != "randucb_uncoupled" and _pbool(spec, "coupled", True)
        z = build_zdist(spec, 2.0 * math.sqrt(math.log(horizon)),
                         horizon=horizon, optimistic=optimistic)
        return mab.RandUcbPolicy(n_arms, horizon, z, coupled=coupled,
                                 plus_one=_pbool(spec, "plus_one", False))
    if kind == "ucb1":
        beta = spec.params.get("beta")
        return mab.Ucb1Policy(n_arms, horizon,
                              beta=_pfloat(spec, "beta", 0.0) if beta is not None else None)
    if kind == "klucb":
        return mab.KlUcbPolicy(n_arms, horizon)
    if kind == "bts":
        return mab.BernoulliTsPolicy(n_arms, horizon)
    if kind == "gts":
        return mab.GaussianTsPolicy(n_arms, horizon, optimistic=False)
    if kind == "ots":
        return mab.GaussianTsPolicy(n_arms, horizon, optimistic=True)
    if kind == "eps_greedy":
        return mab.EpsGreedyPolicy(n_arms, horizon, eps=_pfloat(spec, "eps", 0.05))
    if kind == "random":
        return mab.UniformRandomPolicy(n_arms, horizon)
    raise ConfigError(f"policy.{spec.label}.kind: unknown policy {kind!r}")


def _build_linear(spec: PolicySpec, features, horizon: int):
    kind = spec.kind
    lam = _pfloat(spec, "lambda", 1e-4)
    if kind == "randlinucb":
        d = features.shape[1]
        u_mode = spec.params.get("u_mode", "data_dependent")
        if u_mode not in ("data_dependent", "fixed"):
            raise ConfigError(f"policy.{spec.label}.u_mode: expected data_dependent or fixed")
        default_upper = math.sqrt(lam) + 0.5 * math.sqrt(2.0 * math.log(horizon))
        z = build_zdist(spec, default_upper, horizon=horizon)
        return linear.RandLinUcbPolicy(features, horizon, lam=lam, z=z, u_mode=u_mode)
    if kind == "linucb":
        beta_mode = spec.params.get("beta_mode", "data_dependent")
        if beta_mode not in ("data_dependent", "fixed"):
            raise ConfigError(f"policy.{spec.label}.beta_mode: expected data_dependent or fixed")
        beta = None
        if beta_mode == "fixed":
            if "beta" not in spec.params:
                raise ConfigError(f"policy.{spec.label}.beta: required when beta_mode = fixed")
            beta = _pfloat(spec, "beta", 0.0)
        elif "beta" in spec.params:
            beta = _pfloat(spec, "beta", 0.0)
        return linear.LinUcbPolicy(features, horizon, lam=lam, beta=beta)
    if kind == "lints":
        raw = spec.params.get("inflation", "1.0")
        inflation = math.sqrt(features.shape[1]) if raw == "sqrt_d" else _pfloat(spec, "inflation", 1.0)
        return linear.LinTsPolicy(features, horizon, lam=lam, inflation=inflation)
    if kind == "eps_greedy":
        return linear.LinEpsGreedyPolicy(features, horizon, lam=lam,
                                         eps=_pfloat(spec, "eps", 0.05))
    if kind == "random":
        return mab.UniformRandomPolicy(features.shape[0], horizon)
    raise ConfigError(f"policy.{spec.label}.kind: unknown policy {kind!r}")


def _glb_kwargs(spec: PolicySpec) -> dict:
    kwargs: dict = {"tau0_mode": spec.params.get("tau0_mode", "capped")}
    if kwargs["tau0_mode"] not in ("capped", "theory"):
        raise ConfigError(f"policy.{spec.label}.tau0_mode: expected capped or theory")
    link = spec.params.get("link", "logistic")
    if link not in ("logistic", "identity"):
        raise ConfigError(f"policy.{spec.label}.link: expected logistic or identity")
    kwargs["link"] = link
    mu_mode = spec.params.get("mu_mode", "g_prime_2")
    if mu_mode == "custom":
        if "mu" not in spec.params:
            raise ConfigError(f"policy.{spec.label}.mu: required when mu_mode = custom")
        kwargs["mu"] = _pfloat(spec, "mu", 0.0)
    elif mu_mode == "g_prime_2":
        if "mu" in spec.params:
            kwargs["mu"] = _pfloat(spec, "mu", 0.0)
    else:
        raise ConfigError(f"policy.{spec.label}.mu_mode: expected g_prime_2 or custom")
    if "tau0" in spec.params:
        kwargs["tau0"] = _pint(spec, "tau0", 1)
    return kwargs


def _build_logistic(spec: PolicySpec, features, horizon: int):
    kind = spec.kind
    kwargs = _glb_kwargs(spec) if kind != "random" else {}
    if kind == "randucblog":
        mu = kwargs.get("mu", get_link(kwargs["link"]).mu_floor)
        z = build_zdist(spec, glb.glb_beta(features.shape[1], horizon, mu),
                        horizon=horizon)
        return glb.RandUcbLogPolicy(features, horizon, z=z, **kwargs)
    if kind == "ucbglm":
        beta = spec.params.get("beta")
        return glb.UcbGlmPolicy(features, horizon,
                                beta=_pfloat(spec, "beta", 0.0) if beta is not None else None,
                                **kwargs)
    if kind == "glmts":
        return glb.GlmTsPolicy(features, horizon, scale=_pfloat(spec, "scale", 1.0), **kwargs)
    if kind == "eps_greedy":
        return glb.GlbEpsGreedyPolicy(features, horizon, eps=_pfloat(spec, "eps", 0.05), **kwargs)
    if kind == "random":
        return mab.UniformRandomPolicy(features.shape[0], horizon)
    raise ConfigError(f"policy.{spec.label}.kind: unknown policy {kind!r}")


def build_policy(family: str, spec: PolicySpec, instance, horizon: int):
    """Instantiate the policy named by ``spec`` for one replication."""
    if family == "mab":
        return _build_mab(spec, instance.n_arms, horizon)
    if family == "linear":
        return _build_linear(spec, instance.features, horizon)
    if family == "logistic":
        return _build_logistic(spec, instance.features, horizon)
    raise ConfigError(f"family: unknown family {family!r}")
