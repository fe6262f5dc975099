"""Shared random generators for the test suite (all explicitly seeded)."""

import numpy as np
import pytest

from quditbell.bounds import Bipartition, DeterministicStrategy
from quditbell.quantum import DensityMatrix, PhaseConfiguration
from quditbell.scenario import BellScenario, JointProbabilityTable, all_setting_strings


def random_table(scenario: BellScenario, rng) -> JointProbabilityTable:
    probs = {}
    for s in all_setting_strings(scenario.n_parties):
        row = rng.random(scenario.n_outcome_tuples)
        probs[s] = row / row.sum()
    return JointProbabilityTable(scenario, probs)


def random_density(scenario: BellScenario, rng) -> DensityMatrix:
    dim = scenario.n_outcome_tuples
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    mat = x @ x.conj().T
    return DensityMatrix(scenario, mat / np.trace(mat))


def random_config(scenario: BellScenario, rng) -> PhaseConfiguration:
    return PhaseConfiguration(
        scenario, rng.uniform(0.0, 2.0 * np.pi, (scenario.n_parties, 2, scenario.dimension))
    )


def random_strategy(
    scenario: BellScenario, partition: Bipartition, rng
) -> DeterministicStrategy:
    d = scenario.dimension
    xi = {c: int(rng.integers(d)) for c in all_setting_strings(len(partition.block_a))}
    zeta = {c: int(rng.integers(d)) for c in all_setting_strings(len(partition.block_b))}
    return DeterministicStrategy(partition, xi, zeta)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
