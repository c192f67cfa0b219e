import pytest
from fastapi.testclient import TestClient

from diffuselab.service.app import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def request_1d(**overrides):
    problem = {
        "lower": [-1.0], "upper": [1.0],
        "shape": "interval", "a": -0.5, "b": 0.5,
        "alpha": 2.0, "beta": 1.0, "gamma": 1.0,
        "q": "1", "h": "0", "g": "0.1",
    }
    problem.update(overrides.pop("problem", {}))
    experiment = {"eps": [0.1, 0.05, 0.025]}
    experiment.update(overrides.pop("experiment", {}))
    return {"problem": problem, "experiment": experiment}


class TestHealth:
    def test_health(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        body = resp.json()
        assert body["status"] == "ok" and body["version"]


class TestSweep:
    def test_sweep_rows_and_rates(self, client):
        resp = client.post("/sweep", json=request_1d())
        assert resp.status_code == 200
        body = resp.json()
        assert body["kind"] == "sweep"
        l2 = [r["err_l2"] for r in body["rows"]]
        assert all(b < a for a, b in zip(l2, l2[1:]))
        assert body["rate_l2"]["exponent"] > 0.5

    def test_solve_has_no_reference_columns(self, client):
        resp = client.post("/solve", json=request_1d())
        assert resp.status_code == 200
        body = resp.json()
        assert body["kind"] == "solve"
        assert all(r["err_l2"] is None for r in body["rows"])
        assert all(r["perimeter"] is not None for r in body["rows"])

    def test_invalid_geometry_is_422(self, client):
        req = request_1d(problem={"a": -2.0})
        assert client.post("/sweep", json=req).status_code == 422

    def test_invalid_coefficient_is_422(self, client):
        req = request_1d(problem={"beta": -1.0})
        resp = client.post("/sweep", json=req)
        assert resp.status_code == 422
        assert "beta" in resp.json()["detail"]

    def test_structurally_invalid_is_422(self, client):
        assert client.post("/sweep", json={"problem": {}}).status_code == 422

    def test_bad_expression_is_422(self, client):
        req = request_1d(problem={"q": "1+*2"})
        assert client.post("/sweep", json=req).status_code == 422


class TestGammaCheck:
    def test_recovery_gaps(self, client):
        req = request_1d(experiment={"u": "cos(3.14159265*x)",
                                     "eps": [0.1, 0.05, 0.025, 0.0125]})
        resp = client.post("/gamma-check", json=req)
        assert resp.status_code == 200
        gaps = [r["gap"] for r in resp.json()["rows"]]
        assert all(b < a for a, b in zip(gaps, gaps[1:]))

    def test_missing_candidate_is_422(self, client):
        assert client.post("/gamma-check", json=request_1d()).status_code == 422


class TestLemmaCheck:
    def test_panel(self, client):
        resp = client.post("/lemma-check", json=request_1d())
        assert resp.status_code == 200
        body = resp.json()
        names = {r["w_name"] for r in body["rows"]}
        assert {"one", "linear", "cosine", "bump"} <= names
        assert body["interface_measure"] == 2.0
