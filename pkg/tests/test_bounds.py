"""Deterministic-strategy enumeration, bound certification, and the grouping."""

from fractions import Fraction

import pytest

from quditbell.bounds import (
    Bipartition,
    BudgetExceededError,
    DeterministicStrategy,
    bipartitions,
    build_grouping,
    group_deterministic_max,
    hlnhv_bound,
    lhv_bound,
    strategy_bell_value,
    strategy_delta_table,
    t_coefficient,
    verify_group_cglmp,
)
from quditbell.scenario import BellScenario, all_setting_strings, bell_value, t_count
from conftest import random_strategy


class TestBipartition:
    def test_parse(self):
        part = Bipartition.parse("1,3/2,4", 4)
        assert part.block_a == (1, 3)
        assert part.block_b == (2, 4)

    def test_parse_rejects_garbage(self):
        for text in ("1,2", "1,2/2,3", "1//2", "a/b", "1/2/3"):
            with pytest.raises(ValueError):
                Bipartition.parse(text, 3)

    def test_parse_rejects_wrong_party_count(self):
        with pytest.raises(ValueError, match="expected 4"):
            Bipartition.parse("1,2/3", 4)

    def test_rejects_empty_block(self):
        with pytest.raises(ValueError):
            Bipartition((1, 2), ())

    def test_canonical_puts_party_one_first(self):
        part = Bipartition((2, 3), (1,)).canonical()
        assert part.block_a == (1,)
        assert part.block_b == (2, 3)

    def test_bipartitions_count(self):
        # 2^(N-1) - 1 canonical splits
        assert len(list(bipartitions(3))) == 3
        assert len(list(bipartitions(4))) == 7


class TestStrategyValue:
    def test_all_zero_three_qubits(self):
        # with every block sum 0 the eight coefficients cancel pairwise
        scen = BellScenario(3, 2)
        part = Bipartition.from_block(3, (1, 2))
        strategy = DeterministicStrategy(
            part, {c: 0 for c in all_setting_strings(2)}, {c: 0 for c in all_setting_strings(1)}
        )
        assert strategy_bell_value(strategy, scen) == 0

    def test_matches_delta_table_oracle(self, rng):
        # the direct block-sum evaluation against the full table evaluation
        cases = [(3, 2), (3, 3), (4, 2), (2, 5), (4, 3)]
        for n, d in cases:
            scen = BellScenario(n, d)
            for part in bipartitions(n):
                for _ in range(10):
                    strategy = random_strategy(scen, part, rng)
                    direct = strategy_bell_value(strategy, scen)
                    table = strategy_delta_table(strategy, scen)
                    assert float(direct) == pytest.approx(bell_value(table), abs=1e-12)

    def test_validates_values_in_range(self):
        scen = BellScenario(3, 2)
        part = Bipartition.from_block(3, (1,))
        bad = DeterministicStrategy(
            part, {"1": 5, "2": 0}, {c: 0 for c in all_setting_strings(2)}
        )
        with pytest.raises(ValueError, match="outside"):
            strategy_bell_value(bad, scen)

    def test_validates_domain_cover(self):
        scen = BellScenario(3, 2)
        part = Bipartition.from_block(3, (1,))
        bad = DeterministicStrategy(part, {"1": 0}, {c: 0 for c in all_setting_strings(2)})
        with pytest.raises(ValueError, match="combinations"):
            strategy_bell_value(bad, scen)


class TestHlnhvBound:
    @pytest.mark.parametrize(
        "n,d,block_a",
        [(3, 3, (1, 2)), (4, 2, (1, 2)), (2, 5, (1,)), (3, 2, (1,)), (3, 4, (1, 2))],
    )
    def test_equals_half_the_settings(self, n, d, block_a):
        scen = BellScenario(n, d)
        bound, witness = hlnhv_bound(scen, Bipartition.from_block(n, block_a))
        assert bound == Fraction(2 ** (n - 1))
        # the witness actually achieves the bound
        assert strategy_bell_value(witness, scen) == bound

    def test_partition_invariance(self):
        scen = BellScenario(3, 3)
        values = {hlnhv_bound(scen, part)[0] for part in bipartitions(3)}
        assert values == {Fraction(4)}

    def test_budget_guard_reports_required(self):
        scen = BellScenario(6, 5)
        part = Bipartition.from_block(6, (1, 2, 3, 4, 5))
        with pytest.raises(BudgetExceededError) as err:
            hlnhv_bound(scen, part)
        assert err.value.required == 5**32 * 5**2
        assert err.value.budget == 10**8

    def test_witness_is_lexicographically_least(self):
        # scanning in index order with strict improvement keeps the first argmax
        scen = BellScenario(2, 2)
        part = Bipartition.from_block(2, (1,))
        bound, witness = hlnhv_bound(scen, part)
        digits = [witness.xi["1"], witness.xi["2"], witness.zeta["1"], witness.zeta["2"]]
        best = strategy_bell_value(witness, scen)
        assert best == bound
        # no strategy with a smaller digit tuple reaches the bound
        import itertools

        for cand in itertools.product(range(2), repeat=4):
            if list(cand) >= digits:
                break
            strategy = DeterministicStrategy(
                part, {"1": cand[0], "2": cand[1]}, {"1": cand[2], "2": cand[3]}
            )
            assert strategy_bell_value(strategy, scen) < bound

    def test_chunked_scan_matches_sequential(self):
        scen = BellScenario(3, 3)
        part = Bipartition.from_block(3, (1, 2))
        seq = hlnhv_bound(scen, part, jobs=1)
        for jobs in (2, 5, 16):
            assert hlnhv_bound(scen, part, jobs=jobs) == seq

    def test_process_pool_matches_sequential(self, monkeypatch):
        # force the pool on a small case so worker results really combine
        monkeypatch.setattr("quditbell.bounds._PARALLEL_THRESHOLD", 1)
        scen = BellScenario(3, 3)
        part = Bipartition.from_block(3, (1, 2))
        pooled = hlnhv_bound(scen, part, jobs=2)
        monkeypatch.undo()
        assert pooled == hlnhv_bound(scen, part, jobs=1)

    def test_noncanonical_partition_same_bound(self):
        scen = BellScenario(3, 2)
        bound_a, _ = hlnhv_bound(scen, Bipartition((2, 3), (1,)))
        bound_b, _ = hlnhv_bound(scen, Bipartition((1,), (2, 3)))
        assert bound_a == bound_b == Fraction(4)


class TestLhvBound:
    def test_two_qubits(self):
        bound, witness = lhv_bound(BellScenario(2, 2))
        assert bound == 2
        assert len(witness) == 2

    def test_two_qutrits(self):
        assert lhv_bound(BellScenario(2, 3))[0] == 2

    def test_three_qubits(self):
        # frozen from the exhaustive 2^6 enumeration; also the hlnhv value here
        bound, _ = lhv_bound(BellScenario(3, 2))
        assert bound == 4
        assert bound <= Fraction(2**2)

    def test_never_above_hlnhv(self):
        for n, d in ((2, 2), (2, 3), (3, 2), (3, 3)):
            scen = BellScenario(n, d)
            lhv, _ = lhv_bound(scen)
            for part in bipartitions(n):
                hlnhv, _ = hlnhv_bound(scen, part)
                assert lhv <= hlnhv <= Fraction(2**n)

    def test_budget_guard(self):
        with pytest.raises(BudgetExceededError):
            lhv_bound(BellScenario(7, 5))

    def test_witness_achieves_bound(self):
        scen = BellScenario(3, 2)
        bound, witness = lhv_bound(scen)
        # local witnesses are one-block-per-party strategies; fold parties 2..N
        # into block B by summing their assigned outcomes per setting combo
        part = Bipartition.from_block(3, (1,))
        xi = {"1": witness[0][0], "2": witness[0][1]}
        zeta = {}
        for combo in all_setting_strings(2):
            total = sum(witness[p + 1][int(c) - 1] for p, c in enumerate(combo))
            zeta[combo] = total % scen.dimension
        strategy = DeterministicStrategy(part, xi, zeta)
        assert strategy_bell_value(strategy, scen) == bound


class TestGrouping:
    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_partition_of_settings(self, n):
        scen = BellScenario(n, 2)
        part = Bipartition.from_block(n, tuple(range(1, n // 2 + 1)))
        grouping = build_grouping(scen, part)
        assert len(grouping.groups) == 2 ** (n - 2)
        flat = [s for group in grouping.groups for s in group]
        assert sorted(flat) == sorted(all_setting_strings(n))

    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    def test_quadruple_shape(self, n):
        scen = BellScenario(n, 3)
        part = Bipartition.from_block(n, (1,))
        for group in build_grouping(scen, part).groups:
            k = t_count(group[0])
            assert tuple(t_count(s) for s in group) == (k, k + 1, k + 1, k + 2)

    @pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
    def test_multiplicities_match_alternating_sum(self, n):
        scen = BellScenario(n, 2)
        part = Bipartition.from_block(n, (1, 2))
        grouping = build_grouping(scen, part)
        expected = tuple(t_coefficient(n, k) for k in range(n - 1))
        assert grouping.multiplicities == expected
        assert sum(grouping.multiplicities) == 2 ** (n - 2)

    def test_group_values_sum_to_strategy_value(self, rng):
        for n, d in ((3, 2), (4, 3), (5, 2)):
            scen = BellScenario(n, d)
            part = Bipartition.from_block(n, (1, 2))
            grouping = build_grouping(scen, part)
            for _ in range(20):
                strategy = random_strategy(scen, part, rng)
                total = sum(
                    verify_group_cglmp(g, strategy, scen) for g in grouping.groups
                )
                assert total == strategy_bell_value(strategy, scen)

    def test_group_value_at_most_two(self, rng):
        for n, d in ((3, 3), (4, 2)):
            scen = BellScenario(n, d)
            part = Bipartition.from_block(n, (1,))
            grouping = build_grouping(scen, part)
            for _ in range(50):
                strategy = random_strategy(scen, part, rng)
                for group in grouping.groups:
                    assert verify_group_cglmp(group, strategy, scen) <= 2

    @pytest.mark.parametrize("n,d", [(3, 2), (3, 3), (4, 2), (4, 3), (5, 2), (5, 3)])
    def test_exhaustive_group_max_is_two(self, n, d):
        scen = BellScenario(n, d)
        part = Bipartition.from_block(n, tuple(range(1, n // 2 + 1)))
        grouping = build_grouping(scen, part)
        for group in grouping.groups:
            assert group_deterministic_max(group, scen, part) == 2

    def test_malformed_quadruple_rejected(self, rng):
        scen = BellScenario(3, 2)
        part = Bipartition.from_block(3, (1, 2))
        strategy = random_strategy(scen, part, rng)
        with pytest.raises(ValueError, match="malformed"):
            verify_group_cglmp(("111", "112", "121", "211"), strategy, scen)
