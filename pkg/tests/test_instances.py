import json
import math

import pytest

from corrgap.core import ValidationError, is_monotone, is_submodular, is_supermodular
from corrgap.distributions import independent_expectation_exact
from corrgap.gap import correlation_gap
from corrgap.instances import (
    REGISTRY,
    build_builtin,
    coverage_partition_instance,
    coverage_two_stage_space,
    max_binomial_expectation,
    poisson_max_expectation,
    property_facts,
    random_coverage_function,
    random_coverage_instance,
    random_monotone_instance,
    random_supermodular_instance,
    random_ufl_space,
    reproduction_facts,
    two_stage_flow_space,
    verification_report,
    welfare_gap_case,
)
from corrgap.robust import approximation_ratio
from corrgap.welfare import welfare_report
from corrgap.worst_case import worst_case_lp


class TestRegistry:
    def test_every_builtin_loads_and_runs(self):
        for name, builtin in REGISTRY.items():
            built = build_builtin(name)
            if builtin.kind == "space":
                report = approximation_ratio(built)
                assert report.ratio >= 1 - 1e-9
            elif builtin.kind == "welfare":
                report = welfare_report(built.function, built.players)
                assert report.opt_ip <= report.upper_bound + 1e-6
            else:
                assert correlation_gap(built).worst_value >= 0

    def test_unknown_builtin(self):
        with pytest.raises(ValidationError):
            build_builtin("nope")

    def test_unknown_parameter(self):
        with pytest.raises(ValidationError):
            build_builtin("example3", k=4)

    def test_parameter_override(self):
        inst = build_builtin("example3", n=5)
        assert inst.n == 5

    def test_export_to_json(self):
        for name, builtin in REGISTRY.items():
            payload = build_builtin(name).to_json()
            json.dumps(payload)  # serialisable


class TestOracles:
    def test_max_binomial_k2_by_hand(self):
        # max of two iid Binomial(2, 1/2): P(0)=1/16, P(1)=8/16, P(2)=7/16
        assert max_binomial_expectation(2) == pytest.approx(22 / 16, abs=1e-12)

    def test_max_binomial_matches_mask_enumeration(self):
        for k in (2, 3):
            inst = coverage_partition_instance(k)
            enum = independent_expectation_exact(inst.function, inst.marginals)
            assert enum == pytest.approx(max_binomial_expectation(k), abs=1e-9)

    def test_poisson_m1_is_mean(self):
        assert poisson_max_expectation(1).expected_max == pytest.approx(1.0, abs=1e-9)

    def test_poisson_m2_vs_double_sum(self):
        # independent oracle: direct double sum over a 50-term truncation
        probs = [math.exp(-1.0)]
        for j in range(1, 50):
            probs.append(probs[-1] / j)
        direct = sum(
            probs[a] * probs[b] * max(a, b) for a in range(50) for b in range(50)
        )
        assert poisson_max_expectation(2).expected_max == pytest.approx(direct, abs=1e-12)

    def test_poisson_growth_reference(self):
        res = poisson_max_expectation(10**4)
        assert res.growth_reference == pytest.approx(math.log(1e4) / math.log(math.log(1e4)))
        assert poisson_max_expectation(2).growth_reference is None

    def test_poisson_cap_boundary(self):
        res = poisson_max_expectation(10**9)
        assert 0.5 <= res.expected_max / res.growth_reference <= 3.0

    def test_poisson_bounds_validated(self):
        with pytest.raises(ValidationError):
            poisson_max_expectation(0)
        with pytest.raises(ValidationError):
            poisson_max_expectation(10**9 + 1)


class TestGenerators:
    def test_coverage_always_monotone_submodular(self):
        for seed in range(20):
            f = random_coverage_function(seed, 3 + seed % 5)
            assert f.value(0) == 0.0
            assert is_monotone(f) and is_submodular(f)

    def test_supermodular_generator(self):
        for seed in range(10):
            inst = random_supermodular_instance(seed, 3 + seed % 6)
            assert is_supermodular(inst.function)

    def test_monotone_generator(self):
        for seed in range(10):
            inst = random_monotone_instance(seed, 3 + seed % 4)
            assert is_monotone(inst.function)
            assert inst.function.value((1 << inst.n) - 1) > 0

    def test_fixed_seed_reproducibility(self):
        a = random_coverage_instance(123, 6)
        b = random_coverage_instance(123, 6)
        assert a.to_json() == b.to_json()
        assert random_ufl_space(9).to_json() == random_ufl_space(9).to_json()

    def test_different_seeds_differ(self):
        assert random_coverage_instance(1, 6).to_json() != random_coverage_instance(2, 6).to_json()

    def test_size_guards(self):
        with pytest.raises(ValidationError):
            random_coverage_function(1, 11)
        with pytest.raises(ValidationError):
            random_ufl_space(1, n_clients=13)


class TestUflSpace:
    def test_shape_and_all_open_gap(self):
        space = random_ufl_space(1)
        assert len(space.decisions) == 2**3
        all_open = space.decisions[-1]
        report = correlation_gap(space.instance_for(all_open))
        assert report.kappa == pytest.approx(1.0, abs=1e-9)

    def test_first_stage_cheaper_than_second(self):
        space = random_ufl_space(4, n_clients=4, n_facilities=3)
        closed = space.decisions[0].function  # nothing pre-opened
        opened = space.decisions[-1].function
        assert opened.base_cost > 0
        assert closed.base_cost == 0

    def test_worst_dominates_independent(self):
        space = random_ufl_space(2, n_clients=5, n_facilities=2)
        for d in space.decisions:
            inst = space.instance_for(d)
            indep = independent_expectation_exact(d.function, space.marginals)
            assert worst_case_lp(inst).value >= indep - 1e-9

    def test_sixteen_decision_solve(self):
        space = random_ufl_space(8, n_clients=5, n_facilities=4)
        assert len(space.decisions) == 16
        report = approximation_ratio(space)
        assert report.chain_ok and report.ratio >= 1 - 1e-9


class TestTwoStageCoverage:
    def test_robust_covers_everything_independent_buys_nothing(self):
        space = coverage_two_stage_space(3)
        report = approximation_ratio(space)
        assert report.x_independent == "0"
        assert report.x_robust == "3"
        assert report.chain_ok

    def test_full_cover_decision_is_constant(self):
        space = coverage_two_stage_space(2)
        f = space.decisions[-1].function
        values = f.values()
        assert values.min() == values.max()


class TestFamilies:
    def test_example1_family_supermodular(self):
        space = two_stage_flow_space(4)
        assert all(is_supermodular(d.function) for d in space.decisions)

    def test_example2_kappa_increasing_small(self):
        kappas = []
        for k in (2, 3):
            inst = coverage_partition_instance(k)
            kappas.append(correlation_gap(inst).kappa)
        assert kappas[1] > kappas[0]

    def test_welfare_case_instance_view(self):
        case = welfare_gap_case()
        inst = case.instance()
        assert inst.marginals == (pytest.approx(1 / 3),) * 6


class TestReproductionSuite:
    def test_all_named_instance_facts_pass(self):
        facts = reproduction_facts()
        failed = [f.name for f in facts if not f.passed]
        assert failed == []

    def test_property_batteries_pass(self):
        facts = property_facts()
        failed = [f.name for f in facts if not f.passed]
        assert failed == []

    def test_report_is_deterministic(self):
        a = verification_report()
        b = verification_report()
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
        assert a["passed"] is True

    def test_threaded_report_matches_serial(self):
        serial = verification_report(threads=1)
        threaded = verification_report(threads=4)
        assert json.dumps(serial, sort_keys=True) == json.dumps(threaded, sort_keys=True)
