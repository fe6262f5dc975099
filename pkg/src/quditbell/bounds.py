"""Hidden-variable bounds by exhaustive enumeration of deterministic strategies.

A hybrid local-nonlocal model splits the parties into two blocks that may be
arbitrarily correlated inside but only classically across.  Every coefficient
of the Bell functional depends on the outcomes only through their sum, so a
block's behaviour collapses to one Z_d value per block setting combination;
enumerating those assignments exhaustively certifies the 2^(N-1) bound.  All
strategy values are exact rationals (multiples of 1/S), so bound checks are
equalities, not tolerances.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .scenario import (
    BellScenario,
    JointProbabilityTable,
    all_setting_strings,
    coefficient_exact,
    g1_exact,
    g2_exact,
    outcome_index,
    t_count,
)

DEFAULT_BUDGET = 10**8

# Below this strategy count a process pool costs more than it saves; the
# chunked reduction gives identical results either way.
_PARALLEL_THRESHOLD = 200_000

__all__ = [
    "DEFAULT_BUDGET",
    "Bipartition",
    "BudgetExceededError",
    "DeterministicStrategy",
    "Grouping",
    "bipartitions",
    "build_grouping",
    "group_deterministic_max",
    "hlnhv_bound",
    "lhv_bound",
    "strategy_bell_value",
    "strategy_delta_table",
    "t_coefficient",
    "verify_group_cglmp",
]


class BudgetExceededError(RuntimeError):
    """Enumeration would exceed the configured strategy budget."""

    def __init__(self, required: int, budget: int):
        super().__init__(
            f"enumeration needs {required} strategies, budget allows {budget}"
        )
        self.required = required
        self.budget = budget


@dataclass(frozen=True)
class Bipartition:
    """Split of parties 1..N into two non-empty blocks."""

    block_a: tuple[int, ...]
    block_b: tuple[int, ...]

    def __post_init__(self):
        a = tuple(sorted(int(p) for p in self.block_a))
        b = tuple(sorted(int(p) for p in self.block_b))
        if not a or not b:
            raise ValueError("both blocks must be non-empty")
        n = len(a) + len(b)
        if set(a) & set(b):
            raise ValueError(f"blocks overlap: {set(a) & set(b)}")
        if set(a) | set(b) != set(range(1, n + 1)):
            raise ValueError(f"blocks {a} and {b} do not partition 1..{n}")
        object.__setattr__(self, "block_a", a)
        object.__setattr__(self, "block_b", b)

    @property
    def n_parties(self) -> int:
        return len(self.block_a) + len(self.block_b)

    @classmethod
    def from_block(cls, n_parties: int, block_a) -> "Bipartition":
        block_a = tuple(sorted(int(p) for p in block_a))
        block_b = tuple(p for p in range(1, n_parties + 1) if p not in block_a)
        return cls(block_a, block_b)

    @classmethod
    def parse(cls, text: str, n_parties: int) -> "Bipartition":
        """Parse the CLI syntax '1,2/3' (1-indexed parties)."""
        parts = text.split("/")
        if len(parts) != 2:
            raise ValueError(f"partition must look like '1,2/3', got {text!r}")
        try:
            blocks = [tuple(int(x) for x in part.split(",") if x) for part in parts]
        except ValueError as exc:
            raise ValueError(f"partition has non-integer parties: {text!r}") from exc
        partition = cls(blocks[0], blocks[1])
        if partition.n_parties != n_parties:
            raise ValueError(
                f"partition {text!r} covers {partition.n_parties} parties, expected {n_parties}"
            )
        return partition

    def canonical(self) -> "Bipartition":
        """Equivalent partition with party 1 in block A."""
        if 1 in self.block_a:
            return self
        return Bipartition(self.block_b, self.block_a)

    def describe(self) -> str:
        return ",".join(map(str, self.block_a)) + "/" + ",".join(map(str, self.block_b))


def bipartitions(n_parties: int):
    """All canonical bipartitions of 1..N (party 1 in block A), by block size."""
    rest = range(2, n_parties + 1)
    for size_a in range(1, n_parties):
        for extra in itertools.combinations(rest, size_a - 1):
            yield Bipartition.from_block(n_parties, (1,) + extra)


@dataclass(frozen=True)
class DeterministicStrategy:
    """Predetermined outcome sums per block setting combination.

    xi maps block A's 2^|A| setting combinations (strings over {1,2}) to a
    value in Z_d, zeta does the same for block B.
    """

    partition: Bipartition
    xi: Mapping[str, int]
    zeta: Mapping[str, int]

    def __post_init__(self):
        object.__setattr__(self, "xi", dict(self.xi))
        object.__setattr__(self, "zeta", dict(self.zeta))

    def validate_for(self, scenario: BellScenario) -> None:
        if self.partition.n_parties != scenario.n_parties:
            raise ValueError(
                f"strategy partition covers {self.partition.n_parties} parties, "
                f"scenario has {scenario.n_parties}"
            )
        for name, mapping, block in (
            ("xi", self.xi, self.partition.block_a),
            ("zeta", self.zeta, self.partition.block_b),
        ):
            expected = all_setting_strings(len(block))
            if set(mapping) != set(expected):
                raise ValueError(f"{name} must cover exactly the combinations {expected}")
            for combo, value in mapping.items():
                if not 0 <= int(value) < scenario.dimension:
                    raise ValueError(
                        f"{name}[{combo}] = {value} outside [0, {scenario.dimension - 1}]"
                    )

    def to_json_dict(self) -> dict:
        return {
            "partition": [list(self.partition.block_a), list(self.partition.block_b)],
            "xi": dict(self.xi),
            "zeta": dict(self.zeta),
        }


def _substring(setting: str, parties: tuple[int, ...]) -> str:
    return "".join(setting[p - 1] for p in parties)


def _numerators(scenario: BellScenario, partition: Bipartition):
    """num[(comboA, comboB)][r] = (d-1) * coefficient at outcome-sum residue r."""
    d = scenario.dimension
    tables = {}
    for s in all_setting_strings(scenario.n_parties):
        key = (_substring(s, partition.block_a), _substring(s, partition.block_b))
        t = t_count(s)
        tables[key] = tuple(
            int(coefficient_exact(t, r, d) * (d - 1)) for r in range(d)
        )
    return tables


def strategy_bell_value(
    strategy: DeterministicStrategy, scenario: BellScenario
) -> Fraction:
    """Bell functional value of the delta table the strategy induces, exact."""
    strategy.validate_for(scenario)
    tables = _numerators(scenario, strategy.partition)
    d = scenario.dimension
    total = 0
    for (combo_a, combo_b), nums in tables.items():
        total += nums[(strategy.xi[combo_a] + strategy.zeta[combo_b]) % d]
    return Fraction(-total, d - 1)


def strategy_delta_table(
    strategy: DeterministicStrategy, scenario: BellScenario
) -> JointProbabilityTable:
    """Point-mass table realizing the strategy's block sums.

    The first party of each block carries the block's sum and the rest stay
    at 0; any other split of the sums gives the same Bell value.
    """
    strategy.validate_for(scenario)
    part = strategy.partition
    size = scenario.n_outcome_tuples
    probs = {}
    for s in all_setting_strings(scenario.n_parties):
        outcome = [0] * scenario.n_parties
        outcome[part.block_a[0] - 1] = strategy.xi[_substring(s, part.block_a)]
        outcome[part.block_b[0] - 1] = strategy.zeta[_substring(s, part.block_b)]
        row = np.zeros(size)
        row[outcome_index(outcome, scenario.dimension)] = 1.0
        probs[s] = row
    return JointProbabilityTable(scenario, probs)


def _scan_hlnhv_range(
    n_parties: int,
    dimension: int,
    block_a: tuple[int, ...],
    start: int,
    stop: int,
) -> tuple[int, int]:
    """Minimize the coefficient-sum numerator over flat strategy indices.

    Flat indices encode (xi digits, zeta digits) base d, most significant
    first, so the index order is the lexicographic strategy order.  Returns
    the minimal numerator sum and the first index achieving it.
    """
    partition = Bipartition.from_block(n_parties, block_a)
    scenario = BellScenario(n_parties, dimension)
    tables = _numerators(scenario, partition)
    combos_a = all_setting_strings(len(partition.block_a))
    combos_b = all_setting_strings(len(partition.block_b))
    num = [
        [tables[(ca, cb)] for cb in combos_b]
        for ca in combos_a
    ]
    ka, kb = len(combos_a), len(combos_b)
    n_digits = ka + kb
    d = dimension

    digits = [0] * n_digits
    rem = start
    for pos in range(n_digits - 1, -1, -1):
        rem, digits[pos] = divmod(rem, d)

    best_sum, best_index = None, -1
    for index in range(start, stop):
        total = 0
        for i in range(ka):
            row = num[i]
            x = digits[i]
            for j in range(kb):
                total += row[j][(x + digits[ka + j]) % d]
        if best_sum is None or total < best_sum:
            best_sum, best_index = total, index
        # odometer increment, least significant digit last
        pos = n_digits - 1
        while pos >= 0:
            digits[pos] += 1
            if digits[pos] < d:
                break
            digits[pos] = 0
            pos -= 1
    return best_sum, best_index


def _strategy_from_index(
    scenario: BellScenario, partition: Bipartition, index: int
) -> DeterministicStrategy:
    combos_a = all_setting_strings(len(partition.block_a))
    combos_b = all_setting_strings(len(partition.block_b))
    n_digits = len(combos_a) + len(combos_b)
    d = scenario.dimension
    digits = [0] * n_digits
    for pos in range(n_digits - 1, -1, -1):
        index, digits[pos] = divmod(index, d)
    xi = dict(zip(combos_a, digits[: len(combos_a)]))
    zeta = dict(zip(combos_b, digits[len(combos_a) :]))
    return DeterministicStrategy(partition, xi, zeta)


def hlnhv_bound(
    scenario: BellScenario,
    partition: Bipartition,
    budget: int = DEFAULT_BUDGET,
    jobs: int = 1,
) -> tuple[Fraction, DeterministicStrategy]:
    """Exhaustive maximum of the Bell functional over one partition's strategies.

    Returns the maximum (exact) and its lexicographically least witness.
    The strategy space has size d^(2^|A|) * d^(2^|B|); anything above the
    budget raises BudgetExceededError.  jobs > 1 splits the index range over
    worker processes; the reduction keeps the result identical to sequential.
    """
    if partition.n_parties != scenario.n_parties:
        raise ValueError(
            f"partition covers {partition.n_parties} parties, scenario has {scenario.n_parties}"
        )
    partition = partition.canonical()
    d = scenario.dimension
    required = d ** (2 ** len(partition.block_a)) * d ** (2 ** len(partition.block_b))
    if required > budget:
        raise BudgetExceededError(required, budget)

    chunks = _index_chunks(required, jobs)
    args = [
        (scenario.n_parties, d, partition.block_a, start, stop)
        for start, stop in chunks
    ]
    if len(args) > 1 and required >= _PARALLEL_THRESHOLD:
        with ProcessPoolExecutor(max_workers=len(args)) as pool:
            results = list(pool.map(_scan_hlnhv_worker, args))
    else:
        results = [_scan_hlnhv_worker(a) for a in args]
    best_sum, best_index = min(results)

    witness = _strategy_from_index(scenario, partition, best_index)
    return Fraction(-best_sum, d - 1), witness


def _scan_hlnhv_worker(args):
    return _scan_hlnhv_range(*args)


def _index_chunks(total: int, jobs: int) -> list[tuple[int, int]]:
    jobs = max(1, min(int(jobs), total))
    step = -(-total // jobs)
    return [(lo, min(lo + step, total)) for lo in range(0, total, step)]


def lhv_bound(
    scenario: BellScenario, budget: int = DEFAULT_BUDGET
) -> tuple[Fraction, tuple[tuple[int, int], ...]]:
    """Exhaustive maximum over fully local deterministic assignments.

    Each party predetermines one outcome per setting: d^(2N) strategies.
    Returns the maximum and the lexicographically least witness as a tuple of
    (setting-1 outcome, setting-2 outcome) pairs per party.
    """
    n, d = scenario.n_parties, scenario.dimension
    required = d ** (2 * n)
    if required > budget:
        raise BudgetExceededError(required, budget)
    settings = all_setting_strings(n)
    nums = {
        s: tuple(int(coefficient_exact(t_count(s), r, d) * (d - 1)) for r in range(d))
        for s in settings
    }
    # assignment digit for party p, setting i sits at 2*(p-1) + (i-1)
    slots = {s: tuple(2 * p + (1 if s[p] == "2" else 0) for p in range(n)) for s in settings}

    best_sum, best_assignment = None, None
    for assignment in itertools.product(range(d), repeat=2 * n):
        total = 0
        for s in settings:
            acc = 0
            for slot in slots[s]:
                acc += assignment[slot]
            total += nums[s][acc % d]
        if best_sum is None or total < best_sum:
            best_sum, best_assignment = total, assignment
    witness = tuple(
        (best_assignment[2 * p], best_assignment[2 * p + 1]) for p in range(n)
    )
    return Fraction(-best_sum, d - 1), witness


def t_coefficient(n_parties: int, k: int) -> int:
    """Multiplicity of the base-t-count-k quadruple: alternating binomial sum."""
    return sum(
        (-1) ** (k - i) * (k + 1 - i) * math.comb(n_parties, i) for i in range(k + 1)
    )


@dataclass(frozen=True)
class Grouping:
    """Partition of the 2^N setting strings into CGLMP-shaped quadruples.

    Each quadruple (AB, AB', A'B, A'B') pairs a block-A setting combination
    with its flip and likewise for block B, so its t-counts run
    (k, k+1, k+1, k+2).
    """

    scenario: BellScenario
    partition: Bipartition
    groups: tuple[tuple[str, str, str, str], ...]
    multiplicities: tuple[int, ...]  # count of quadruples per base t-count k


def build_grouping(scenario: BellScenario, partition: Bipartition) -> Grouping:
    """Group the setting strings by flipping each block's first party.

    Toggling one fixed party inside a block pairs every block combination
    with one of t-count exactly one higher; crossing the two blocks' pairs
    yields 2^(N-2) quadruples covering every setting string once.
    """
    if partition.n_parties != scenario.n_parties:
        raise ValueError(
            f"partition covers {partition.n_parties} parties, scenario has {scenario.n_parties}"
        )
    n = scenario.n_parties

    def pairs(block):
        combos = all_setting_strings(len(block))
        return [(c, "2" + c[1:]) for c in combos if c[0] == "1"]

    def compose(combo_a, combo_b):
        chars = [""] * n
        for pos, party in enumerate(partition.block_a):
            chars[party - 1] = combo_a[pos]
        for pos, party in enumerate(partition.block_b):
            chars[party - 1] = combo_b[pos]
        return "".join(chars)

    groups = []
    for base_a, flip_a in pairs(partition.block_a):
        for base_b, flip_b in pairs(partition.block_b):
            groups.append(
                (
                    compose(base_a, base_b),
                    compose(base_a, flip_b),
                    compose(flip_a, base_b),
                    compose(flip_a, flip_b),
                )
            )
    counts = [0] * (n - 1)
    for group in groups:
        counts[t_count(group[0])] += 1
    return Grouping(scenario, partition, tuple(groups), tuple(counts))


def _group_blocks(group, partition):
    """Block combinations (base A, flipped A, base B, flipped B) of a quadruple."""
    base_a = _substring(group[0], partition.block_a)
    base_b = _substring(group[0], partition.block_b)
    flip_a = _substring(group[2], partition.block_a)
    flip_b = _substring(group[1], partition.block_b)
    if (
        _substring(group[1], partition.block_a) != base_a
        or _substring(group[2], partition.block_b) != base_b
        or _substring(group[3], partition.block_a) != flip_a
        or _substring(group[3], partition.block_b) != flip_b
        or t_count(flip_a) != t_count(base_a) + 1
        or t_count(flip_b) != t_count(base_b) + 1
    ):
        raise ValueError(f"malformed quadruple {group}")
    return base_a, flip_a, base_b, flip_b


def _group_value(group, xi_pair, zeta_pair, dimension) -> Fraction:
    """Direct four-term sum of -Q over a quadruple, exact."""
    (xa, xa2), (zb, zb2) = xi_pair, zeta_pair
    sums = (xa + zb, xa + zb2, xa2 + zb, xa2 + zb2)
    return -sum(
        coefficient_exact(t_count(s), total, dimension)
        for s, total in zip(group, sums)
    )


def verify_group_cglmp(
    group, strategy: DeterministicStrategy, scenario: BellScenario
) -> Fraction:
    """Value of one quadruple under a strategy, cross-checked in two-party form.

    After shifting the block-A sums by a multiple of 3 fixed by the parity of
    the base t-count, the four terms become exactly the two-party functional
    whose deterministic maximum is 2.  Both evaluations are exact; a mismatch
    means the quadruple is not one of build_grouping's and raises.
    """
    strategy.validate_for(scenario)
    d = scenario.dimension
    part = strategy.partition
    base_a, flip_a, base_b, flip_b = _group_blocks(group, part)
    xi_pair = (strategy.xi[base_a], strategy.xi[flip_a])
    zeta_pair = (strategy.zeta[base_b], strategy.zeta[flip_b])
    direct = _group_value(group, xi_pair, zeta_pair, d)

    k = t_count(group[0])
    if k % 2 == 0:
        half = k // 2
        alpha1 = xi_pair[0] - 3 * half
        alpha2 = xi_pair[1] - 3 * half
    else:
        half = (k + 1) // 2
        alpha1 = xi_pair[1] - 3 * half
        alpha2 = xi_pair[0] - 3 * (half - 1)
    beta1, beta2 = zeta_pair
    reduced = -(
        g1_exact(alpha1 + beta1 + 3, d)
        + g2_exact(alpha1 + beta2 + 3, d)
        + g2_exact(alpha2 + beta1 + 3, d)
        + g1_exact(alpha2 + beta2, d)
    )
    if direct != reduced:
        raise ValueError(
            f"quadruple {group} does not reduce to the two-party form "
            f"({direct} vs {reduced})"
        )
    return direct


def group_deterministic_max(
    group, scenario: BellScenario, partition: Bipartition
) -> Fraction:
    """Exhaustive deterministic maximum of one quadruple's value.

    Only the four block combinations appearing in the quadruple influence it,
    so scanning Z_d^4 is exhaustive over the full strategy space.
    """
    d = scenario.dimension
    _group_blocks(group, partition)  # shape check
    best = None
    for xa, xa2, zb, zb2 in itertools.product(range(d), repeat=4):
        value = _group_value(group, (xa, xa2), (zb, zb2), d)
        if best is None or value > best:
            best = value
    return best
