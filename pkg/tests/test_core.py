import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corrgap.core import (
    CoverageMax,
    FacilityLocationCost,
    GroundSet,
    Instance,
    SizeCapError,
    TableFunction,
    TwoStageFlow,
    ValidationError,
    evaluate,
    function_from_json,
    is_monotone,
    is_subadditive,
    is_submodular,
    is_supermodular,
    mask_of,
)


def cardinality_table(n, fn):
    return TableFunction([float(fn(m.bit_count())) for m in range(1 << n)])


class TestEvaluate:
    def test_coverage_max_example(self):
        f = CoverageMax(4, [[0, 1], [2, 3]])
        assert evaluate(f, mask_of([0, 1, 2], 4)) == 2.0

    def test_two_stage_flow_full_set(self):
        f = TwoStageFlow(4, 3)
        assert evaluate(f, 0b1111) == 3 + 16 * 1

    def test_two_stage_flow_build_cost_jump(self):
        assert TwoStageFlow(4, 4).value(0) == 6.0  # full capacity costs n + 2
        assert TwoStageFlow(4, 3).value(0) == 3.0

    def test_explicit_table_empty_set(self):
        f = TableFunction([0.0, 2.0, 3.0, 5.0])
        assert evaluate(f, 0) == 0.0

    def test_mask_out_of_range(self):
        f = TableFunction([0.0, 1.0])
        with pytest.raises(ValidationError):
            evaluate(f, 2)

    def test_repeat_calls_bit_exact(self):
        f = CoverageMax(6, [[0, 1, 2], [3, 4, 5]])
        for mask in (0, 5, 63):
            assert evaluate(f, mask) == evaluate(f, mask)

    def test_values_matches_value_pointwise(self):
        f = TwoStageFlow(5, 2)
        assert np.array_equal(f.values(), [f.value(m) for m in range(32)])

    def test_values_cached_and_readonly(self):
        f = TableFunction([0.0, 1.0, 1.0, 2.0])
        v = f.values()
        assert v is f.values()
        with pytest.raises(ValueError):
            v[0] = 9.0


class TestStructureCheckers:
    def test_cardinality_is_monotone(self):
        assert is_monotone(cardinality_table(4, lambda s: s))
        assert not is_monotone(cardinality_table(4, lambda s: -s))

    def test_threshold_is_submodular(self):
        f = TableFunction([0.0] + [1.0] * 15)
        assert is_submodular(f)
        assert not is_supermodular(f)

    def test_square_is_supermodular(self):
        f = cardinality_table(4, lambda s: s * s)
        assert is_supermodular(f)
        assert not is_submodular(f)

    def test_coverage_max_subadditive_not_submodular(self):
        f = CoverageMax(4, [[0, 1], [2, 3]])
        assert is_subadditive(f)
        assert not is_submodular(f)

    def test_modular_iff_both(self):
        weights = [0.5, 1.25, 2.0]
        f = TableFunction(
            [sum(w for i, w in enumerate(weights) if m >> i & 1) for m in range(8)]
        )
        assert is_submodular(f) and is_supermodular(f)

    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_both_properties_imply_modular(self, seed):
        from corrgap.instances import random_monotone_instance

        f = random_monotone_instance(seed, 4).function
        if is_submodular(f) and is_supermodular(f):
            base = f.value(0)
            for mask in range(16):
                additive = base + sum(
                    f.value(1 << i) - base for i in range(4) if mask >> i & 1
                )
                assert abs(f.value(mask) - additive) <= 1e-9

    @pytest.mark.parametrize("n", [2, 4, 8])
    def test_two_stage_flow_supermodular_for_all_x(self, n):
        for x in range(n + 1):
            assert is_supermodular(TwoStageFlow(n, x))

    @given(st.integers(2, 8), st.data())
    @settings(max_examples=40, deadline=None)
    def test_coverage_max_monotone_subadditive_any_partition(self, n, data):
        assignment = data.draw(st.lists(st.integers(0, 2), min_size=n, max_size=n))
        blocks = [[i for i in range(n) if assignment[i] == b] for b in range(3)]
        blocks = [b for b in blocks if b]
        f = CoverageMax(n, blocks)
        assert is_monotone(f)
        assert is_subadditive(f)

    def test_size_caps(self):
        with pytest.raises(SizeCapError):
            is_subadditive(CoverageMax(13, [list(range(13))]))


class TestFacilityLocation:
    OPEN = [3.0, 1.0]
    DIST = [[1.0, 5.0], [4.0, 1.0]]

    def test_hand_computed_costs(self):
        f = FacilityLocationCost(self.OPEN, self.DIST)
        assert [f.value(m) for m in range(4)] == [0.0, 4.0, 2.0, 6.0]

    def test_pre_opened_facilities_are_free(self):
        f = FacilityLocationCost(self.OPEN, self.DIST, pre_open=[1])
        assert [f.value(m) for m in range(4)] == [0.0, 4.0, 1.0, 5.0]

    def test_base_cost_shifts_everything(self):
        f = FacilityLocationCost(self.OPEN, self.DIST, pre_open=[1], base_cost=2.0)
        assert [f.value(m) for m in range(4)] == [2.0, 6.0, 3.0, 7.0]

    def test_table_agrees_with_single_evaluations(self):
        # the vectorised materialisation and the per-mask brute force are
        # independent code paths; they must agree exactly
        from corrgap.instances import random_ufl_space

        space = random_ufl_space(3, n_clients=5, n_facilities=3)
        for d in space.decisions[:4]:
            table = d.function.values()
            singles = [d.function.value(m) for m in range(32)]
            assert np.allclose(table, singles, atol=1e-12)

    def test_monotone(self):
        assert is_monotone(FacilityLocationCost(self.OPEN, self.DIST))

    def test_validation(self):
        with pytest.raises(ValidationError):
            FacilityLocationCost([1.0], [[-1.0]])
        with pytest.raises(ValidationError):
            FacilityLocationCost([], [[]])
        with pytest.raises(SizeCapError):
            FacilityLocationCost([1.0] * 13, [[0.0] * 13])
        with pytest.raises(ValidationError):
            FacilityLocationCost([1.0], [[1.0, 2.0]])


class TestJsonRoundTrips:
    @pytest.mark.parametrize(
        "f",
        [
            TableFunction([0.0, 1.0, 1.5, 2.0]),
            CoverageMax(4, [[0, 1], [2, 3]]),
            TwoStageFlow(4, 3),
            FacilityLocationCost([3.0, 1.0], [[1.0, 5.0], [4.0, 1.0]], [1], 2.0),
        ],
    )
    def test_round_trip(self, f):
        g = function_from_json(f.to_json())
        assert g.to_json() == f.to_json()
        assert np.array_equal(g.values(), f.values())

    def test_unknown_type(self):
        with pytest.raises(ValidationError):
            function_from_json({"type": "mystery"})
        with pytest.raises(ValidationError):
            function_from_json({"no": "type"})

    def test_instance_round_trip(self):
        inst = Instance(TwoStageFlow(3, 1), [0.2, 0.5, 0.9])
        again = Instance.from_json(inst.to_json())
        assert again.to_json() == inst.to_json()


class TestValidation:
    def test_ground_set_bounds(self):
        with pytest.raises(ValidationError):
            GroundSet(0)
        with pytest.raises(ValidationError):
            GroundSet(25)

    def test_bad_marginals(self):
        f = TableFunction([0.0, 1.0])
        with pytest.raises(ValidationError):
            Instance(f, [1.5])
        with pytest.raises(ValidationError):
            Instance(f, [0.5, 0.5])

    def test_bad_tables_and_partitions(self):
        with pytest.raises(ValidationError):
            TableFunction([0.0, 1.0, 2.0])  # not a power of two
        with pytest.raises(ValidationError):
            CoverageMax(4, [[0, 1], [1, 2, 3]])  # overlap
        with pytest.raises(ValidationError):
            CoverageMax(4, [[0, 1]])  # does not cover
        with pytest.raises(ValidationError):
            TwoStageFlow(4, 5)

    def test_values_cap(self):
        with pytest.raises(SizeCapError):
            CoverageMax(17, [list(range(17))]).values()
