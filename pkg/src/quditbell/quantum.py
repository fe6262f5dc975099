"""Qudit states, multiport-beamsplitter measurements, and joint probabilities.

Two evaluation paths produce the same tables: a dense one that rotates the
density matrix for every setting string, and a closed form specific to GHZ
states that sums the d coherent branches directly.  The dense path is the
ground truth; the closed form is the fast path the optimizer runs on.
"""

from __future__ import annotations

import math
from functools import reduce
from typing import Sequence

import numpy as np

from .scenario import (
    BellScenario,
    JointProbabilityTable,
    all_setting_strings,
    as_setting_string,
    coefficient_by_residue,
    outcome_sums_mod_d,
    t_count,
)

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_EIGENVALUE_FLOOR = -1e-10

# Dense-path guardrail: past this Hilbert dimension the per-setting matrix
# rotations stop being desk-scale; GHZ users should take ghz_table instead.
DENSE_DIMENSION_LIMIT = 4096

# The closed form was calibrated once against joint_probabilities and the
# winning convention frozen; both values coincide anyway because conjugating
# every branch leaves the modulus alone.
GHZ_SIGN_CONVENTION = "plus"

__all__ = [
    "DENSE_DIMENSION_LIMIT",
    "GHZ_SIGN_CONVENTION",
    "DenseLimitError",
    "DensityMatrix",
    "PhaseConfiguration",
    "ghz_bell_value",
    "ghz_probability_closed_form",
    "ghz_state",
    "ghz_table",
    "joint_probabilities",
    "maximally_mixed",
    "mix_with_noise",
    "multiport_unitary",
    "product_state",
]


class DenseLimitError(RuntimeError):
    """Hilbert space too large for the dense path."""


class DensityMatrix:
    """Validated density matrix on (C^d)^(tensor N).

    The basis index uses the same little-endian party encoding as the
    probability tables: party 1 occupies the fastest digit.
    """

    def __init__(self, scenario: BellScenario, matrix: np.ndarray):
        dim = scenario.n_outcome_tuples
        mat = np.array(matrix, dtype=complex)
        if mat.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} matrix, got shape {mat.shape}")
        herm = float(np.max(np.abs(mat - mat.conj().T)))
        if herm > HERMITICITY_TOL:
            raise ValueError(f"matrix is not Hermitian (deviation {herm:.3e})")
        trace = complex(np.trace(mat))
        if abs(trace - 1.0) > TRACE_TOL:
            raise ValueError(f"trace is {trace}, expected 1")
        smallest = float(np.linalg.eigvalsh(mat)[0])
        if smallest < PSD_EIGENVALUE_FLOOR:
            raise ValueError(
                f"matrix is not positive semidefinite (min eigenvalue {smallest:.3e})"
            )
        mat.flags.writeable = False
        self.scenario = scenario
        self.matrix = mat

    @property
    def dim(self) -> int:
        return self.scenario.n_outcome_tuples

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


def ghz_state(scenario: BellScenario) -> DensityMatrix:
    """Rank-1 projector onto (1/sqrt(d)) sum_j |jj...j>."""
    d = scenario.dimension
    vec = np.zeros(scenario.n_outcome_tuples, dtype=complex)
    step = (scenario.n_outcome_tuples - 1) // (d - 1)  # index of |jj...j> is j*step
    vec[np.arange(d) * step] = 1.0 / math.sqrt(d)
    return DensityMatrix(scenario, np.outer(vec, vec.conj()))


def maximally_mixed(scenario: BellScenario) -> DensityMatrix:
    dim = scenario.n_outcome_tuples
    return DensityMatrix(scenario, np.eye(dim, dtype=complex) / dim)


def mix_with_noise(rho: DensityMatrix, visibility: float) -> DensityMatrix:
    """White-noise mixture V*rho + (1-V)*identity/d^N."""
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {visibility}")
    dim = rho.dim
    mixed = visibility * rho.matrix + (1.0 - visibility) * np.eye(dim) / dim
    return DensityMatrix(rho.scenario, mixed)


def product_state(rho_a: DensityMatrix, rho_b: DensityMatrix) -> DensityMatrix:
    """Tensor product with rho_a on parties 1..m and rho_b on the rest."""
    if rho_a.scenario.dimension != rho_b.scenario.dimension:
        raise ValueError(
            "factors must share the outcome dimension, got "
            f"{rho_a.scenario.dimension} and {rho_b.scenario.dimension}"
        )
    scenario = BellScenario(
        rho_a.scenario.n_parties + rho_b.scenario.n_parties,
        rho_a.scenario.dimension,
    )
    # kron puts its first factor in the slow digits; block A must stay fast.
    return DensityMatrix(scenario, np.kron(rho_b.matrix, rho_a.matrix))


class PhaseConfiguration:
    """Per-party, per-setting phase vectors (radians) for multiport measurements."""

    def __init__(self, scenario: BellScenario, phases: np.ndarray):
        arr = np.array(phases, dtype=float)
        expected = (scenario.n_parties, 2, scenario.dimension)
        if arr.shape != expected:
            raise ValueError(f"expected phases of shape {expected}, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("phases must be finite")
        arr.flags.writeable = False
        self.scenario = scenario
        self.phases = arr

    def vector(self, party: int, setting: int) -> np.ndarray:
        """Phase vector of a 1-indexed party for setting 1 or 2."""
        if not 1 <= party <= self.scenario.n_parties:
            raise ValueError(f"party {party} out of range")
        if setting not in (1, 2):
            raise ValueError(f"setting must be 1 or 2, got {setting}")
        return self.phases[party - 1, setting - 1]

    @classmethod
    def zero(cls, scenario: BellScenario) -> "PhaseConfiguration":
        return cls(scenario, np.zeros((scenario.n_parties, 2, scenario.dimension)))

    @classmethod
    def from_party_vectors(
        cls, scenario: BellScenario, setting1: Sequence[float], setting2: Sequence[float]
    ) -> "PhaseConfiguration":
        """Same two phase vectors for every party."""
        pair = np.stack([np.asarray(setting1, float), np.asarray(setting2, float)])
        return cls(scenario, np.tile(pair, (scenario.n_parties, 1, 1)))

    def to_json_dict(self) -> dict:
        return {
            "n": self.scenario.n_parties,
            "d": self.scenario.dimension,
            "phases": {
                f"party-{p}": {
                    f"setting-{i}": list(map(float, self.phases[p - 1, i - 1]))
                    for i in (1, 2)
                }
                for p in range(1, self.scenario.n_parties + 1)
            },
        }

    @classmethod
    def from_json_dict(cls, payload) -> "PhaseConfiguration":
        if not isinstance(payload, dict) or not {"n", "d", "phases"} <= set(payload):
            raise ValueError("phase payload must be an object with n, d, phases")
        scenario = BellScenario(payload["n"], payload["d"])
        arr = np.zeros((scenario.n_parties, 2, scenario.dimension))
        for p in range(1, scenario.n_parties + 1):
            party = payload["phases"].get(f"party-{p}")
            if party is None:
                raise ValueError(f"phase payload missing party-{p}")
            for i in (1, 2):
                vec = party.get(f"setting-{i}")
                if vec is None or len(vec) != scenario.dimension:
                    raise ValueError(f"party-{p} setting-{i} must list {scenario.dimension} phases")
                arr[p - 1, i - 1] = vec
        return cls(scenario, arr)


def multiport_unitary(phase_vector: Sequence[float]) -> np.ndarray:
    """Unbiased symmetric multiport splitter with input phase shifters.

    Entry (k, l) is omega^(k l) e^(i phi_l)/sqrt(d) with omega = exp(2 pi i/d),
    so every matrix element has modulus 1/sqrt(d).
    """
    phi = np.asarray(phase_vector, dtype=float)
    if phi.ndim != 1 or phi.size < 2:
        raise ValueError(f"phase vector must be 1-d with at least 2 entries, got shape {phi.shape}")
    d = phi.size
    k = np.arange(d)
    fourier = np.exp(2j * np.pi * np.outer(k, k) / d)
    return fourier * np.exp(1j * phi)[None, :] / math.sqrt(d)


def _setting_unitary(config: PhaseConfiguration, setting: str) -> np.ndarray:
    ops = [
        multiport_unitary(config.vector(p, int(setting[p - 1])))
        for p in range(1, config.scenario.n_parties + 1)
    ]
    # reversed so that party 1 lands in the fastest basis digit
    return reduce(np.kron, ops[::-1])


def joint_probabilities(
    rho: DensityMatrix, config: PhaseConfiguration
) -> JointProbabilityTable:
    """Outcome distributions for every setting string, by direct rotation.

    Each setting rotates the state once and reads the diagonal:
    P(x|s) = <x| U_s rho U_s^dag |x> with U_s the tensor product of the
    parties' multiport unitaries for their chosen settings.
    """
    if rho.scenario != config.scenario:
        raise ValueError(
            f"state is for {rho.scenario}, phases are for {config.scenario}"
        )
    if rho.dim > DENSE_DIMENSION_LIMIT:
        raise DenseLimitError(
            f"dense path supports d^N <= {DENSE_DIMENSION_LIMIT}, got {rho.dim}; "
            "for GHZ states use the closed-form path (ghz_table)"
        )
    probs = {}
    for s in all_setting_strings(rho.scenario.n_parties):
        u = _setting_unitary(config, s)
        rotated = u @ rho.matrix @ u.conj().T
        probs[s] = np.real(np.diagonal(rotated)).copy()
    return JointProbabilityTable(rho.scenario, probs)


def _branch_sign(sign_convention: str) -> float:
    try:
        return {"plus": 1.0, "minus": -1.0}[sign_convention]
    except KeyError:
        raise ValueError(f"sign_convention must be 'plus' or 'minus', got {sign_convention!r}")


def _ghz_residue_probs(
    config: PhaseConfiguration, setting: str, sign_convention: str
) -> np.ndarray:
    """GHZ probability per outcome-sum residue class for one setting string.

    Every outcome tuple with the same sum mod d is equally likely, so the
    whole table per setting collapses to d numbers.
    """
    scenario = config.scenario
    d = scenario.dimension
    sigma = _branch_sign(sign_convention)
    chosen = np.array([int(c) - 1 for c in setting])
    total_phase = config.phases[np.arange(scenario.n_parties), chosen].sum(axis=0)
    j = np.arange(d)
    angles = total_phase[None, :] + 2.0 * np.pi * np.outer(j, j) / d  # rows: residue r
    amps = np.exp(1j * sigma * angles).sum(axis=1)
    return np.abs(amps) ** 2 / d ** (scenario.n_parties + 1)


def ghz_probability_closed_form(
    config: PhaseConfiguration,
    setting,
    outcome: Sequence[int],
    sign_convention: str = GHZ_SIGN_CONVENTION,
) -> float:
    """GHZ outcome probability without touching the d^N density matrix.

    The d branches of the GHZ state interfere coherently:

        P = |sum_j exp(i sigma [Phi_j + 2 pi j (sum_n x_n)/d])|^2 / d^(N+1)

    where Phi_j sums the chosen settings' j-th phase over the parties and
    sigma is +-1 per sign_convention.
    """
    scenario = config.scenario
    s = as_setting_string(setting, scenario.n_parties)
    residues = _ghz_residue_probs(config, s, sign_convention)
    return float(residues[sum(int(x) for x in outcome) % scenario.dimension])


def ghz_table(
    config: PhaseConfiguration, sign_convention: str = GHZ_SIGN_CONVENTION
) -> JointProbabilityTable:
    """Full probability table for the GHZ state via the closed form."""
    scenario = config.scenario
    sums = outcome_sums_mod_d(scenario.n_parties, scenario.dimension)
    probs = {}
    for s in all_setting_strings(scenario.n_parties):
        probs[s] = _ghz_residue_probs(config, s, sign_convention)[sums]
    return JointProbabilityTable(scenario, probs)


def ghz_bell_value(
    config: PhaseConfiguration, sign_convention: str = GHZ_SIGN_CONVENTION
) -> float:
    """Bell functional on the GHZ state, collapsed over residue classes.

    Equals bell_value(ghz_table(config)) but costs O(4^N + 2^N d^2) instead of
    building d^N-entry tables; this is the optimizer's objective.
    """
    scenario = config.scenario
    d = scenario.dimension
    per_residue_count = d ** (scenario.n_parties - 1)
    value = 0.0
    for s in all_setting_strings(scenario.n_parties):
        coeffs = coefficient_by_residue(t_count(s), d)
        residues = _ghz_residue_probs(config, s, sign_convention)
        value -= per_residue_count * float(coeffs @ residues)
    return value
