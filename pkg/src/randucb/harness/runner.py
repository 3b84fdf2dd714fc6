"""Experiment runner: seeded replications, regret traces, aggregation, CSV.

All policies within one replication see the identical instance and the
identical table of pre-drawn rewards, so empirical regret compares a policy's
realized rewards against the optimal arm's realized rewards from the same
random world. Replications are independent and may run in parallel; results
are byte-identical regardless of scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..envs import gen_mab, gen_structured
from .config import ConfigError, ExperimentConfig
from .registry import build_policy
from .streams import ROLE_INSTANCE, ROLE_POLICY, ROLE_REWARDS, stream

__all__ = ["RegretTrace", "AggregateRow", "run_experiment", "run_replication",
           "aggregate", "write_csv", "WORKERS_ENV"]

WORKERS_ENV = "RANDUCB_WORKERS"


@dataclass(frozen=True)
class RegretTrace:
    """Cumulative empirical regret of one policy in one replication."""

    family: str
    policy: str
    run: int
    rounds: np.ndarray
    cum_regret: np.ndarray


@dataclass(frozen=True)
class AggregateRow:
    family: str
    policy: str
    round: int
    mean_regret: float
    stderr: float
    runs: int


def checkpoint_rounds(horizon: int, every: int) -> list[int]:
    rounds = list(range(every, horizon + 1, every))
    if not rounds or rounds[-1] != horizon:
        rounds.append(horizon)
    return rounds


def make_instance(config: ExperimentConfig, rng: np.random.Generator):
    spec = config.instance
    if config.family == "mab":
        return gen_mab(spec.n_arms, spec.difficulty, rng, kind=spec.reward_kind,
                       nu=spec.nu, sigma_r=spec.sigma_r)
    link = "identity" if config.family == "linear" else "logistic"
    return gen_structured(spec.n_arms, spec.dim, link, rng,
                          mean_rewards=spec.mean_rewards)


def run_replication(config: ExperimentConfig, run: int, instance=None) -> list[RegretTrace]:
    """Run every configured policy once on this replication's shared world.

    ``instance`` overrides the generated environment (same reward streams),
    which is useful for driving hand-built instances through the runner.
    """
    if instance is None:
        instance = make_instance(config, stream(config.base_seed, run, ROLE_INSTANCE))
    rewards = instance.pull_matrix(config.horizon, stream(config.base_seed, run, ROLE_REWARDS))
    star_rewards = rewards[:, instance.optimal_arm()]
    marks = checkpoint_rounds(config.horizon, config.checkpoint_every)
    traces = []
    for spec in config.policies:
        policy = build_policy(config.family, spec, instance, config.horizon)
        rng = stream(config.base_seed, run, ROLE_POLICY, spec.label)
        cum = 0.0
        values = np.empty(len(marks))
        next_mark = 0
        for t in range(config.horizon):
            arm = policy.choose(rng)
            reward = rewards[t, arm]
            policy.update(arm, reward, rng)
            cum += star_rewards[t] - reward
            if t + 1 == marks[next_mark]:
                values[next_mark] = cum
                next_mark += 1
        traces.append(RegretTrace(family=config.family, policy=spec.label, run=run,
                                  rounds=np.array(marks), cum_regret=values))
    return traces


def _worker_count() -> int:
    value = os.environ.get(WORKERS_ENV)
    if value is None:
        return 1
    try:
        workers = int(value)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV}: expected an integer, got {value!r}") from None
    if workers < 0:
        raise ConfigError(f"{WORKERS_ENV}: must be nonnegative")
    return workers if workers > 0 else (os.cpu_count() or 1)


def run_experiment(config: ExperimentConfig) -> list[RegretTrace]:
    """All replications, ordered by (run, policy position in the config)."""
    workers = min(_worker_count(), config.replications)
    if workers <= 1:
        batches = [run_replication(config, run) for run in range(config.replications)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(run_replication,
                                    [config] * config.replications,
                                    range(config.replications)))
    return [trace for batch in batches for trace in batch]


def aggregate(traces: list[RegretTrace]) -> list[AggregateRow]:
    """Per-policy mean and standard error of cumulative regret per checkpoint."""
    by_policy: dict[str, list[RegretTrace]] = {}
    for trace in traces:
        by_policy.setdefault(trace.policy, []).append(trace)
    rows = []
    for policy in sorted(by_policy):
        group = sorted(by_policy[policy], key=lambda tr: tr.run)
        rounds = group[0].rounds
        stacked = np.stack([tr.cum_regret for tr in group])
        runs = stacked.shape[0]
        means = stacked.mean(axis=0)
        stderr = (stacked.std(axis=0, ddof=1) / np.sqrt(runs)) if runs > 1 \
            else np.zeros(means.shape)
        family = group[0].family
        for i, rnd in enumerate(rounds):
            rows.append(AggregateRow(family=family, policy=policy, round=int(rnd),
                                     mean_regret=float(means[i]), stderr=float(stderr[i]),
                                     runs=runs))
    return rows


CSV_HEADER = "family,policy,round,mean_regret,stderr,runs"


def write_csv(rows: list[AggregateRow], path) -> None:
    """Emit aggregate rows sorted by (policy, round), floats at 9 significant digits."""
    ordered = sorted(rows, key=lambda r: (r.policy, r.round))
    lines = [CSV_HEADER]
    for r in ordered:
        lines.append(f"{r.family},{r.policy},{r.round},{r.mean_regret:.9g},{r.stderr:.9g},{r.runs}")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
