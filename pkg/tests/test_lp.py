import numpy as np
import pytest

from covexperts.instance import CoveringInstance, gen_anand_counterexample, gen_mwa_worst_case
from covexperts.lp import (
    LinearProgram,
    build_dual_lp,
    build_lincomb_lp,
    build_relaxation_lp,
    solve_dynamic,
    solve_lp,
    solve_offline_opt,
    to_lp_text,
)
from covexperts.lp.solver import EQ, GE, LE, INFEASIBLE, UNBOUNDED

from oracles import random_small_lp, vertex_enumeration_opt


class TestSolver:
    def test_single_variable(self):
        p = LinearProgram("min", [1.0])
        p.add_row([1.0], GE, 1.0)
        sol = solve_lp(p)
        assert sol.is_optimal
        assert sol.value == pytest.approx(1.0, abs=1e-9)
        assert sol.x[0] == pytest.approx(1.0, abs=1e-9)

    def test_two_variable_vertex(self):
        p = LinearProgram("min", [1.0, 1.0])
        p.add_row([1.0, 2.0], GE, 2.0)
        sol = solve_lp(p)
        assert sol.value == pytest.approx(1.0, abs=1e-9)
        assert sol.x.tolist() == pytest.approx([0.0, 1.0], abs=1e-9)

    def test_infeasible_zero_row(self):
        p = LinearProgram("min", [1.0])
        p.add_row([0.0], GE, 1.0)
        assert solve_lp(p).status == INFEASIBLE

    def test_unbounded(self):
        p = LinearProgram("max", [1.0])
        assert solve_lp(p).status == UNBOUNDED

    def test_equality_and_bounds(self):
        p = LinearProgram("min", [2.0, 1.0], upper_bounds=[1.0, 0.4])
        p.add_row([1.0, 1.0], EQ, 1.0)
        sol = solve_lp(p)
        assert sol.is_optimal
        assert sol.x.tolist() == pytest.approx([0.6, 0.4], abs=1e-9)

    def test_max_sense(self):
        p = LinearProgram("max", [3.0, 1.0], upper_bounds=[2.0, 5.0])
        p.add_row([1.0, 1.0], LE, 4.0)
        sol = solve_lp(p)
        assert sol.value == pytest.approx(8.0, abs=1e-9)

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        p = random_small_lp(rng)
        a, b = solve_lp(p), solve_lp(p)
        assert a.status == b.status
        if a.is_optimal:
            assert a.value == b.value
            assert np.array_equal(a.x, b.x)

    def test_matches_vertex_enumeration_on_200_random_lps(self):
        rng = np.random.default_rng(2024)
        checked = 0
        while checked < 200:
            p = random_small_lp(rng)
            expected_status, expected_value = vertex_enumeration_opt(p)
            sol = solve_lp(p)
            assert sol.status == expected_status, to_lp_text(p)
            if sol.is_optimal:
                assert sol.value == pytest.approx(
                    expected_value, abs=1e-7, rel=1e-7
                ), to_lp_text(p)
            checked += 1

    def test_lp_text_export(self):
        p = LinearProgram("min", [1.0, 2.0], upper_bounds=[np.inf, 3.0])
        p.add_row([1.0, 1.0], GE, 1.0)
        text = to_lp_text(p, name="example")
        assert "Minimize" in text and "Subject To" in text and "Bounds" in text
        assert ">= 1" in text


def _two_expert_stream():
    # two resources, two steps; expert B starts cheap and grows
    s1 = np.array([[1.0, 0.0], [0.0, 2.0]])
    s2 = np.array([[1.0, 0.0], [1.0, 2.0]])
    inst = CoveringInstance(n=2, costs=[1.0, 1.0], rows=[[1.0, 0.5], [0.0, 1.0]])
    return inst, [s1, s2]


class TestBenchmarkPrograms:
    def test_lincomb_single_expert_forces_weight_one(self):
        inst = CoveringInstance(n=2, costs=[1.0, 3.0], rows=[[1.0, 1.0], [0.0, 1.0]])
        preds = [np.array([[0.5], [1.0]]), np.array([[0.5], [1.0]])]
        value = solve_lp(build_lincomb_lp(inst, preds)).value
        assert value == pytest.approx(0.5 + 3.0, abs=1e-9)

    def test_lincomb_identical_experts(self):
        inst = CoveringInstance(n=1, costs=[2.0], rows=[[1.0]])
        preds = [np.array([[1.0, 1.0, 1.0]])]
        value = solve_lp(build_lincomb_lp(inst, preds)).value
        assert value == pytest.approx(2.0, abs=1e-9)

    @pytest.mark.parametrize("K,L", [(2, 1), (3, 1), (3, 2), (5, 2)])
    def test_lincomb_value_on_batched_counterexample(self, K, L):
        inst, preds = gen_anand_counterexample(K, L)
        value = solve_lp(build_lincomb_lp(inst, preds)).value
        assert value == pytest.approx(float(L), abs=1e-6)

    def test_relaxation_equals_dual_and_lower_bounds_lincomb(self):
        inst, preds = _two_expert_stream()
        lincomb = solve_lp(build_lincomb_lp(inst, preds)).value
        relaxation = solve_lp(build_relaxation_lp(inst, preds)).value
        dual = solve_lp(build_dual_lp(inst, preds)).value
        assert dual == pytest.approx(relaxation, rel=1e-7, abs=1e-9)
        assert relaxation <= lincomb + 1e-9

    def test_lincomb_bounded_by_each_expert_cost(self):
        inst, preds = _two_expert_stream()
        lincomb = solve_lp(build_lincomb_lp(inst, preds)).value
        for k in range(2):
            assert lincomb <= float(inst.costs @ preds[-1][:, k]) + 1e-9

    def test_offline_opt_simple(self):
        inst = CoveringInstance(n=2, costs=[1.0, 2.0], rows=[[1.0, 1.0]])
        assert solve_offline_opt(inst).value == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("n", [1, 4, 10])
    def test_offline_opt_on_pathological_family(self, n):
        assert solve_offline_opt(gen_mwa_worst_case(n)).value == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("K,L", [(3, 1), (4, 2), (5, 3)])
    def test_dynamic_value_on_batched_counterexample(self, K, L):
        inst, preds = gen_anand_counterexample(K, L)
        assert solve_dynamic(inst, preds).value == pytest.approx(1.0, abs=1e-6)

    def test_dynamic_single_expert_includes_covering(self):
        # the expert's final solution already covers everything
        inst = CoveringInstance(n=2, costs=[1.0, 1.0], rows=[[1.0, 0.0], [0.0, 1.0]])
        preds = [np.array([[1.0], [0.0]]), np.array([[1.0], [1.0]])]
        assert solve_dynamic(inst, preds).value == pytest.approx(2.0, abs=1e-9)

    def test_dynamic_never_exceeds_lincomb(self):
        inst, preds = _two_expert_stream()
        dynamic = solve_dynamic(inst, preds).value
        lincomb = solve_lp(build_lincomb_lp(inst, preds)).value
        assert dynamic <= lincomb + 1e-9

    def test_shape_mismatch_rejected(self):
        inst, preds = _two_expert_stream()
        with pytest.raises(ValueError):
            build_lincomb_lp(inst, preds[:1])
