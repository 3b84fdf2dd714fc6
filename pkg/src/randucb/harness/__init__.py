"""Declarative experiment harness: configs, seeded runner, aggregation, CLI."""

from .config import ConfigError, ExperimentConfig, InstanceSpec, PolicySpec, \
    build_experiment_config, parse_kv_file, parse_kv_text
from .runner import AggregateRow, RegretTrace, aggregate, run_experiment, \
    run_replication, write_csv
from .streams import ROLE_INSTANCE, ROLE_POLICY, ROLE_REWARDS, stream

__all__ = [
    "ConfigError", "ExperimentConfig", "InstanceSpec", "PolicySpec",
    "build_experiment_config", "parse_kv_file", "parse_kv_text",
    "AggregateRow", "RegretTrace", "aggregate", "run_experiment",
    "run_replication", "write_csv",
    "ROLE_INSTANCE", "ROLE_POLICY", "ROLE_REWARDS", "stream",
]
