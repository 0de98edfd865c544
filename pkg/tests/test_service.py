import pytest
from fastapi.testclient import TestClient

from covexperts.instance import gen_mwa_worst_case
from covexperts.service.app import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    body = r.json()
    assert body["status"] == "ok"
    assert body["version"]


class TestGenerate:
    def test_random_family(self, client):
        payload = {
            "family": "random",
            "params": {
                "num_variables": 6, "num_constraints": 5,
                "min_objective_coef": 1, "max_objective_coef": 9,
                "min_constraint_coef": 1, "max_constraint_coef": 9,
                "min_zero_coefs": 0, "max_zero_coefs": 2,
            },
            "seed": 4,
        }
        r = client.post("/generate", json=payload)
        assert r.status_code == 200
        inst = r.json()["instance"]
        assert inst["n"] == 6
        assert len(inst["rows"]) == 5
        assert inst["meta"]["seed"] == 4
        # deterministic for the same request
        again = client.post("/generate", json=payload).json()["instance"]
        assert again == inst

    def test_mwa_worst_family(self, client):
        r = client.post("/generate", json={"family": "mwa-worst", "params": {"n": 3}})
        assert r.status_code == 200
        assert r.json()["instance"]["rows"] == [
            [1.0, 1.0, 1.0], [0.0, 1.0, 1.0], [0.0, 0.0, 1.0]
        ]

    def test_anand_family_ships_predictions(self, client):
        r = client.post(
            "/generate",
            json={"family": "anand", "params": {"num_experts": 3, "num_batches": 1}},
        )
        assert r.status_code == 200
        body = r.json()
        assert body["instance"]["n"] == 4
        preds = body["predictions"]
        assert len(preds) == 2  # steps
        assert len(preds[0]) == 3  # experts
        assert preds[0][0] == [1.0, 0.0, 0.0, 0.0]

    def test_bad_params_rejected(self, client):
        r = client.post("/generate", json={"family": "mwa-worst", "params": {}})
        assert r.status_code == 422


class TestValidate:
    def test_valid(self, client):
        inst = gen_mwa_worst_case(2).to_dict()
        r = client.post("/validate", json={"instance": inst})
        assert r.json() == {"ok": True, "violations": []}

    def test_invalid(self, client):
        inst = {"n": 1, "costs": [0.0], "rows": [[1.0]], "meta": {}}
        r = client.post("/validate", json={"instance": inst})
        body = r.json()
        assert not body["ok"]
        assert any("nonpositive" in v for v in body["violations"])


class TestRunAndVerify:
    def test_run_reports_and_traces(self, client):
        inst = gen_mwa_worst_case(4).to_dict()
        roster = [{"type": "perfect"}, {"type": "adversarial"}, {"type": "adversarial"}]
        r = client.post(
            "/run",
            json={"instance": inst, "roster": roster, "algos": ["alg", "mwa"],
                  "include_trace": True, "label": "svc"},
        )
        assert r.status_code == 200
        body = r.json()
        assert body["report"]["passed"]
        assert body["report"]["label"] == "svc"
        assert body["report"]["costs"]["alg"] < body["report"]["costs"]["mwa"]
        assert any(rec["algo"] == "alg" for rec in body["trace"])

        v = client.post("/verify", json={"report": body["report"]})
        assert v.status_code == 200
        assert v.json()["passed"]

    def test_trace_omitted_when_not_requested(self, client):
        inst = gen_mwa_worst_case(2).to_dict()
        r = client.post(
            "/run",
            json={"instance": inst, "roster": [{"type": "perfect"}],
                  "algos": ["alg"], "include_trace": False},
        )
        assert r.json()["trace"] is None

    def test_scripted_roster_inline(self, client):
        inst = {
            "n": 2, "costs": [1.0, 1.0],
            "rows": [[1.0, 1.0], [0.0, 1.0]], "meta": {},
        }
        roster = [{"type": "scripted", "predictions": [[0.0, 1.0], [0.0, 1.0]]}]
        r = client.post(
            "/run", json={"instance": inst, "roster": roster, "algos": ["alg"]}
        )
        assert r.status_code == 200
        assert r.json()["report"]["passed"]

    def test_invalid_instance_rejected(self, client):
        r = client.post(
            "/run",
            json={"instance": {"n": 1, "costs": [1.0], "rows": [[0.0]], "meta": {}},
                  "roster": [{"type": "adversarial"}], "algos": ["alg"]},
        )
        assert r.status_code == 422

    def test_unknown_expert_type_rejected_by_schema(self, client):
        inst = gen_mwa_worst_case(2).to_dict()
        r = client.post(
            "/run", json={"instance": inst, "roster": [{"type": "psychic"}]}
        )
        assert r.status_code == 422


def test_benchmark_endpoint(client):
    inst = gen_mwa_worst_case(3).to_dict()
    job = {
        "instance": inst,
        "roster": [{"type": "perfect"}, {"type": "adversarial"}],
        "algos": ["alg", "mwa"],
        "include_trace": False,
        "label": "job0",
    }
    r = client.post("/benchmark", json={"jobs": [job]})
    assert r.status_code == 200
    body = r.json()
    assert body["passed"]
    assert len(body["reports"]) == 1
    assert "Our Algo" in body["table_markdown"]
    assert body["table_csv"].splitlines()[0] == "Algo name,job0"
