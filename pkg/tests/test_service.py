import json

import numpy as np
import pytest

from kondotri.service import create_app


@pytest.fixture(scope="module")
def client():
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient
    return TestClient(create_app())


TINY_SWEEP = {
    "config": {
        "model": {"kind": "2ikm", "j_prime": [0.4], "sizes": [8]},
        "grid": {"values": [0.2, 0.4, 0.8], "spec": None},
        "analysis": {"measures": ["e1"]},
    }
}


class TestHealth:
    def test_health(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        body = resp.json()
        assert body["name"] == "kondotri"


class TestSweepEndpoint:
    def test_tiny_sweep(self, client):
        resp = client.post("/sweep", json=TINY_SWEEP)
        assert resp.status_code == 200
        body = resp.json()
        assert body["n_records"] == 3
        assert body["n_failed"] == 0
        lines = body["csv"].strip().splitlines()
        assert len(lines) == 4
        assert lines[0].startswith("model,j_prime,control")
        assert body["metadata"]["config"]["model"]["kind"] == "2ikm"

    def test_deterministic_sha(self, client):
        a = client.post("/sweep", json=TINY_SWEEP).json()
        b = client.post("/sweep", json=TINY_SWEEP).json()
        assert a["sha256"] == b["sha256"]
        assert a["csv"] == b["csv"]

    def test_unknown_config_key_is_422(self, client):
        bad = {"config": {"model": {"kind": "2ikm", "nope": 1}}}
        assert client.post("/sweep", json=bad).status_code == 422

    def test_bad_parity_is_422(self, client):
        bad = {"config": {"model": {"kind": "2ikm", "sizes": [9]}}}
        resp = client.post("/sweep", json=bad)
        assert resp.status_code == 422
        assert "sizes" in json.dumps(resp.json())


class TestSynthAndFit:
    def test_synth_then_collapse_fit(self, client):
        synth_req = {
            "kind": "collapse7",
            "params": {"nu": 2.0, "beta": 0.38, "g_c": 0.3},
            "sizes": [32, 64, 128, 256],
            "grid": np.linspace(0, 3, 21).tolist(),
            "noise": 0.0,
            "seed": 0,
        }
        synth = client.post("/synth", json=synth_req)
        assert synth.status_code == 200
        csv_text = synth.json()["csv"]

        fit = client.post("/fit", json={
            "mode": "collapse", "csv": csv_text, "measure": "e1",
            "gc_policy": "fixed=0.3", "restarts": 4,
        })
        assert fit.status_code == 200
        body = fit.json()
        report = body["report"]
        assert report["nu"] == pytest.approx(2.0, abs=1e-3)
        assert report["beta"] == pytest.approx(0.38, abs=1e-3)
        assert report["quality"] <= 1e-12
        assert body["rescaled_csv"].startswith("n_total,x,y")

    def test_synth_deterministic(self, client):
        req = {
            "kind": "ansatz6",
            "params": {"a": 0.5, "b": 2.0, "beta": 0.38, "lam": 0.19, "g_c": 0.3},
            "sizes": [32, 64], "grid": [0.1, 0.2, 0.4], "noise": 0.02, "seed": 5,
        }
        a = client.post("/synth", json=req).json()["csv"]
        b = client.post("/synth", json=req).json()["csv"]
        assert a == b

    def test_identity_mode_via_report(self, client):
        resp = client.post("/fit", json={
            "mode": "identity",
            "report": {"beta": 0.38, "nu": 2.0, "lambda": 0.19},
        })
        assert resp.status_code == 200
        assert resp.json()["report"]["identity_residual"] == 0.0

    def test_identity_mode_inline(self, client):
        resp = client.post("/fit", json={"mode": "identity", "beta": 1.0, "nu": 2.0, "lam": 0.5})
        assert resp.json()["report"]["identity_residual"] == 0.0

    def test_fit_bad_csv_is_400_usage(self, client):
        resp = client.post("/fit", json={"mode": "power", "csv": "not,a,dataset\n1,2,3\n"})
        assert resp.status_code == 400
        assert resp.json()["kind"] == "usage"

    def test_fit_missing_csv(self, client):
        resp = client.post("/fit", json={"mode": "power"})
        assert resp.status_code == 400

    def test_ansatz_one_sided_is_400_numerical(self, client):
        synth_req = {
            "kind": "ansatz6",
            "params": {"a": 0.5, "b": 2.0, "beta": 0.38, "lam": 0.19, "g_c": 0.3},
            "sizes": [32, 64, 128], "grid": np.linspace(0.31, 0.5, 8).tolist(),
        }
        csv_text = client.post("/synth", json=synth_req).json()["csv"]
        resp = client.post("/fit", json={"mode": "ansatz", "csv": csv_text,
                                         "gc_policy": "fit"})
        assert resp.status_code == 400
        assert resp.json()["kind"] == "numerical"


class TestOracleEndpoint:
    def test_small_battery_passes(self, client):
        resp = client.post("/oracle-check", json={"n_configs": 2, "seed": 1})
        assert resp.status_code == 200
        body = resp.json()
        assert body["passed"] is True
        assert all(c["passed"] for c in body["checks"])

    def test_corruption_hook_fails_named_check(self, client):
        resp = client.post("/oracle-check", json={
            "n_configs": 1, "seed": 1, "corrupt_matrix_element": True,
        })
        body = resp.json()
        assert body["passed"] is False
        failed = [c for c in body["checks"] if not c["passed"]]
        assert any("hermiticity" in c["name"] for c in failed)
