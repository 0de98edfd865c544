import json

import numpy as np
import pytest

from covexperts.instance import (
    EXPERIMENT_PARAMS,
    CoveringInstance,
    GeneratorParams,
    gen_anand_counterexample,
    gen_mwa_worst_case,
    gen_random,
    predictions_from_dict,
    predictions_to_dict,
    validate,
)
from covexperts.lp import solve_offline_opt


def test_validate_minimal_instance_ok():
    inst = CoveringInstance(n=1, costs=[1.0], rows=[[1.0]])
    assert validate(inst) == []


def test_validate_flags_all_zero_row():
    inst = CoveringInstance(n=2, costs=[1.0, 1.0], rows=[[0.0, 0.0]])
    assert any("all-zero row" in v for v in validate(inst))


def test_validate_flags_nonpositive_cost():
    inst = CoveringInstance(n=2, costs=[0.0, 1.0], rows=[[1.0, 1.0]])
    assert any("nonpositive cost" in v for v in validate(inst))


def test_validate_flags_negative_coefficient():
    inst = CoveringInstance(n=2, costs=[1.0, 1.0], rows=[[1.0, -0.5]])
    assert any("negative coefficient" in v for v in validate(inst))


class TestRandomGenerator:
    def test_table_params_produce_declared_ranges(self):
        params = EXPERIMENT_PARAMS["instance1"]
        inst = gen_random(params)
        assert inst.n == 10
        assert len(inst.rows) == 10
        assert np.all((inst.costs >= 1) & (inst.costs <= 10))
        for row in inst.rows:
            nz = row[row > 0]
            assert np.all((nz >= 1) & (nz <= 10))
            assert 0 <= int((row == 0).sum()) <= 5
        assert validate(inst) == []

    def test_degenerate_ranges_give_fixed_instance(self):
        params = GeneratorParams(1, 1, 1, 1, 1, 1, 0, 0)
        inst = gen_random(params)
        assert inst.costs.tolist() == [1.0]
        assert [r.tolist() for r in inst.rows] == [[1.0]]

    def test_same_seed_same_instance(self):
        params = GeneratorParams(8, 6, 1, 9, 1, 7, 0, 3, seed=11)
        a, b = gen_random(params), gen_random(params)
        assert a.to_json() == b.to_json()

    def test_different_seed_differs(self):
        p0 = GeneratorParams(8, 6, 1, 9, 1, 7, 0, 3, seed=0)
        p1 = GeneratorParams(8, 6, 1, 9, 1, 7, 0, 3, seed=1)
        assert gen_random(p0).to_json() != gen_random(p1).to_json()

    def test_generated_instances_always_validate(self):
        for seed in range(25):
            params = GeneratorParams(10, 10, 1, 10, 1, 10, 0, 5, seed=seed)
            assert validate(gen_random(params)) == []

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            gen_random(GeneratorParams(5, 5, 10, 1, 1, 10, 0, 2))
        with pytest.raises(ValueError):
            gen_random(GeneratorParams(5, 5, 1, 10, 1, 10, 0, 5))  # zeros >= n


class TestMwaWorstCase:
    def test_structure_n3(self):
        inst = gen_mwa_worst_case(3)
        assert [r.tolist() for r in inst.rows] == [
            [1.0, 1.0, 1.0],
            [0.0, 1.0, 1.0],
            [0.0, 0.0, 1.0],
        ]
        assert inst.costs.tolist() == [1.0, 1.0, 1.0]
        assert solve_offline_opt(inst).value == pytest.approx(1.0, abs=1e-9)

    def test_n1(self):
        inst = gen_mwa_worst_case(1)
        assert [r.tolist() for r in inst.rows] == [[1.0]]

    def test_offline_opt_is_one_for_n10(self):
        assert solve_offline_opt(gen_mwa_worst_case(10)).value == pytest.approx(1.0, abs=1e-9)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            gen_mwa_worst_case(0)


class TestAnandCounterexample:
    def test_k3_l1_shape(self):
        inst, preds = gen_anand_counterexample(3, 1)
        assert inst.n == 4
        assert [r.tolist() for r in inst.rows] == [
            [1.0, 1.0, 1.0, 1.0],
            [0.0, 1.0, 1.0, 1.0],
        ]
        # identity matrix on the batch's first variables at the batch start
        assert preds[0][:3, :].tolist() == np.eye(3).tolist()
        assert preds[0][3, :].tolist() == [0.0, 0.0, 0.0]

    def test_k3_l2_second_batch(self):
        inst, preds = gen_anand_counterexample(3, 2)
        assert inst.n == 7
        assert len(inst.rows) == 4
        assert inst.rows[2].tolist() == [0, 0, 0, 1, 1, 1, 1]
        assert inst.rows[3].tolist() == [0, 0, 0, 0, 1, 1, 1]

    @pytest.mark.parametrize("K,L", [(2, 1), (3, 2), (5, 3)])
    def test_last_expert_and_shared_variable(self, K, L):
        inst, preds = gen_anand_counterexample(K, L)
        last = K - 1
        for t, mat in enumerate(preds):
            assert mat[inst.n - 1].sum() == 0  # nobody suggests the shared variable
        for batch in range(L):
            final = preds[-1]
            assert final[(batch + 1) * K - 1, last] == 1.0
            assert final[(batch + 1) * K - 1, :last].sum() == 0

    @pytest.mark.parametrize("K,L", [(2, 1), (3, 2), (4, 2), (5, 3)])
    def test_scripted_stream_is_feasible_monotone_tight(self, K, L):
        inst, preds = gen_anand_counterexample(K, L)
        for t, mat in enumerate(preds):
            for k in range(K):
                assert float(inst.rows[t] @ mat[:, k]) == pytest.approx(1.0)
                for tp in range(t):
                    assert float(inst.rows[tp] @ mat[:, k]) >= 1.0
                if t:
                    assert np.all(mat[:, k] >= preds[t - 1][:, k])

    def test_offline_opt_is_one(self):
        inst, _ = gen_anand_counterexample(4, 3)
        assert solve_offline_opt(inst).value == pytest.approx(1.0, abs=1e-9)

    def test_rejects_single_expert(self):
        with pytest.raises(ValueError):
            gen_anand_counterexample(1, 2)


def test_json_roundtrip(tmp_path):
    inst = gen_random(GeneratorParams(5, 4, 1, 6, 1, 6, 0, 2, seed=7))
    path = tmp_path / "inst.json"
    inst.save(path)
    loaded = CoveringInstance.load(path)
    assert loaded.to_json() == inst.to_json()
    assert loaded.meta["prng"] == "numpy-pcg64"
    data = json.loads(path.read_text())
    assert set(data) == {"n", "costs", "rows", "meta"}


def test_predictions_roundtrip():
    _, preds = gen_anand_counterexample(3, 2)
    d = predictions_to_dict(preds)
    back = predictions_from_dict(d)
    assert len(back) == len(preds)
    for a, b in zip(preds, back):
        assert np.array_equal(a, b)
