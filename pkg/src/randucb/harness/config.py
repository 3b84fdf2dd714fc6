"""Experiment configuration: flat key-value files with dotted section names.

A config file is plain text, one ``key = value`` pair per line, ``#`` starting
a comment. Dotted keys group related settings (``instance.K``,
``policy.randucb.zdist.sigma``). The full key reference lives in the README.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["ConfigError", "PolicySpec", "InstanceSpec", "ExperimentConfig",
           "parse_kv_file", "parse_kv_text", "build_experiment_config"]

FAMILIES = ("mab", "linear", "logistic")


class ConfigError(Exception):
    """Invalid configuration; the message names the offending key."""


def parse_kv_text(text: str, source: str = "<config>") -> dict[str, str]:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, value = stripped.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in raw:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        raw[key] = value.strip()
    return raw


def parse_kv_file(path) -> dict[str, str]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_kv_text(text, source=str(path))


def _pop_int(raw: dict, key: str, default=None, *, minimum=None) -> int:
    value = raw.pop(key, None)
    if value is None:
        if default is None:
            raise ConfigError(f"{key}: required")
        result = default
    else:
        try:
            result = int(value)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {value!r}") from None
    if minimum is not None and result < minimum:
        raise ConfigError(f"{key}: must be at least {minimum}, got {result}")
    return result


def _pop_float(raw: dict, key: str, default=None) -> float:
    value = raw.pop(key, None)
    if value is None:
        if default is None:
            raise ConfigError(f"{key}: required")
        return default
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None


def _pop_bool(raw: dict, key: str, default: bool) -> bool:
    value = raw.pop(key, None)
    if value is None:
        return default
    lowered = value.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {value!r}")


def _pop_choice(raw: dict, key: str, choices, default=None) -> str:
    value = raw.pop(key, default)
    if value is None:
        raise ConfigError(f"{key}: required")
    if value not in choices:
        raise ConfigError(f"{key}: expected one of {', '.join(choices)}, got {value!r}")
    return value


@dataclass(frozen=True)
class PolicySpec:
    """A named policy entry: ``label`` keys the output traces, ``kind`` the
    registry entry, ``params`` the raw per-policy block."""

    label: str
    kind: str
    params: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class InstanceSpec:
    n_arms: int
    difficulty: str = "easy"
    reward_kind: str = "bernoulli"
    nu: float = 4.0
    sigma_r: float = 0.1
    dim: int = 5
    mean_rewards: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    family: str
    horizon: int
    replications: int
    base_seed: int
    checkpoint_every: int
    instance: InstanceSpec
    policies: tuple[PolicySpec, ...]


def build_experiment_config(raw: dict[str, str]) -> ExperimentConfig:
    """Validate and assemble an experiment description from raw key-values."""
    raw = dict(raw)
    family = _pop_choice(raw, "family", FAMILIES)
    horizon = _pop_int(raw, "horizon", minimum=2)
    replications = _pop_int(raw, "replications", minimum=1)
    base_seed = _pop_int(raw, "base_seed", default=0)
    checkpoint_every = _pop_int(raw, "checkpoint_every",
                                default=max(horizon // 200, 1), minimum=1)
    if horizon // checkpoint_every < 2:
        raise ConfigError("checkpoint_every: must yield at least 2 checkpoints")

    n_arms = _pop_int(raw, "instance.K", minimum=2)
    instance = InstanceSpec(
        n_arms=n_arms,
        difficulty=_pop_choice(raw, "instance.difficulty", ("easy", "hard"), default="easy"),
        reward_kind=_pop_choice(raw, "instance.reward_kind",
                                ("bernoulli", "beta", "gaussian"), default="bernoulli"),
        nu=_pop_float(raw, "instance.nu", default=4.0),
        sigma_r=_pop_float(raw, "instance.sigma_r", default=0.1),
        dim=_pop_int(raw, "instance.d", default=5, minimum=2),
        mean_rewards=_pop_bool(raw, "instance.mean_rewards", default=False),
    )
    if family == "mab" and horizon < n_arms:
        raise ConfigError("horizon: must be at least instance.K for forced initialization")

    policies_value = raw.pop("policies", None)
    if not policies_value:
        raise ConfigError("policies: required (comma-separated list)")
    labels = [p.strip() for p in policies_value.split(",") if p.strip()]
    if not labels:
        raise ConfigError("policies: empty list")
    if len(set(labels)) != len(labels):
        raise ConfigError("policies: duplicate labels")

    specs = []
    for label in labels:
        prefix = f"policy.{label}."
        params = {k[len(prefix):]: raw.pop(k) for k in list(raw) if k.startswith(prefix)}
        kind = params.pop("kind", label)
        specs.append(PolicySpec(label=label, kind=kind, params=params))

    leftovers = [k for k in raw if k.startswith("policy.")]
    if leftovers:
        raise ConfigError(f"{leftovers[0]}: no matching entry in 'policies'")
    if raw:
        raise ConfigError(f"{sorted(raw)[0]}: unknown key")

    from .registry import validate_policy_spec  # deferred: registry imports policies

    for spec in specs:
        validate_policy_spec(family, spec)
    return ExperimentConfig(
        family=family,
        horizon=horizon,
        replications=replications,
        base_seed=base_seed,
        checkpoint_every=checkpoint_every,
        instance=instance,
        policies=tuple(specs),
    )
