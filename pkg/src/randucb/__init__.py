"""Randomized confidence-bound bandit policies, baselines, and simulation tools.

Subpackages and modules:

- ``zdist``: discrete sampling distributions for the random multiplier.
- ``envs``: ground-truth environments and instance generators.
- ``mab``, ``linear``, ``glb``: policies for multi-armed, linear, and
  generalized linear (logistic) bandits.
- ``bounds``: closed-form regret-bound evaluators.
- ``harness``: config-driven seeded experiment runner and CLI.
"""

from . import bounds, envs, glb, harness, linear, links, mab, zdist

__all__ = ["bounds", "envs", "glb", "harness", "linear", "links", "mab", "zdist"]
__version__ = "0.1.0"
