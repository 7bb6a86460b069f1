import jsonschema
import pytest
from fastapi.testclient import TestClient

from systolab import reports
from systolab.service.app import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    body = resp.json()
    assert body["status"] == "ok"
    assert body["package"] == "systolab"


def test_slice_default_grid(client):
    resp = client.post("/slice", json={"start": 0.0, "stop": 5.0, "step": 0.5})
    assert resp.status_code == 200
    rows = resp.json()["records"]
    assert len(rows) == 11
    assert all(row["det"] == 1.0 for row in rows)
    jsonschema.validate(rows, reports.array_schema("slice"))


def test_slice_row_at_three(client):
    resp = client.post("/slice", json={"start": 3.0, "stop": 3.0, "step": 1.0})
    row = resp.json()["records"][0]
    assert row["sys1"] == 1.0
    assert abs(row["s"]) < 1e-12
    assert abs(row["t"] - 1.0) < 1e-12


def test_slice_empty_range_rejected(client):
    resp = client.post("/slice", json={"start": 2.0, "stop": 1.0, "step": 0.5})
    assert resp.status_code == 422


def test_cylinder_report(client):
    resp = client.post("/cylinder", json={"j": 4})
    assert resp.status_code == 200
    rec = resp.json()["records"][0]
    assert abs(rec["volume"] - 8.0) < 1e-6
    assert rec["mass2_lower"] >= 4.0
    assert rec["psi_residual"] < 1e-12
    assert rec["closedness_residual"] < 1e-6
    assert rec["comass_residual"] < 1e-10
    assert rec["diam1_bound"] < 1.0
    assert 0.99 <= rec["sys1_estimate"] <= 1.0 + 1e-6
    assert "sys1-estimate-not-certified" in rec["flags"]
    jsonschema.validate([rec], reports.array_schema("cylinder"))


def test_cylinder_rejects_j_zero(client):
    assert client.post("/cylinder", json={"j": 0}).status_code == 422


def test_cylinder_small_j_flag(client):
    rec = client.post("/cylinder", json={"j": 1}).json()["records"][0]
    assert "small-j-pairing-uncertified" in rec["flags"]
    assert rec["mass2_lower"] > 0.0


def test_lp_certificate(client):
    resp = client.post("/lp", json={"j": 2, "nx": 16, "ny": 8, "nz": 8, "include_chain": True})
    assert resp.status_code == 200
    body = resp.json()
    rec = body["records"][0]
    assert rec["converged"] and rec["certificate_ok"]
    assert abs(rec["gap"]) < 1e-6 * rec["mass"]
    assert rec["pairing_lower"] <= rec["mass"] + 1e-12
    assert rec["mass"] <= rec["reference_mass"] + 1e-12
    assert body["chain"].startswith("cubical-chain v1 j=2 nx=16 ny=8 nz=8")
    jsonschema.validate([rec], reports.array_schema("lp"))


def test_lp_rejects_coarse_grid(client):
    # fewer than four cells per unit of x cannot resolve the fold
    resp = client.post("/lp", json={"j": 2, "nx": 4, "ny": 8, "nz": 8})
    assert resp.status_code == 422


def test_sweep_ratio_decreases_from_four(client):
    resp = client.post("/sweep", json={"j_max": 8, "restarts": 1})
    assert resp.status_code == 200
    records = resp.json()["records"]
    assert [r["j"] for r in records] == list(range(1, 9))
    ratios = [r["ratio"] for r in records if r["j"] >= 4]
    assert all(a > b for a, b in zip(ratios, ratios[1:]))
    jsonschema.validate(records, reports.array_schema("freedom"))


def test_torus3_with_products(client):
    resp = client.post(
        "/torus3", json={"j_list": [4, 16], "restarts": 1, "include_t4": True}
    )
    assert resp.status_code == 200
    body = resp.json()
    assert [r["j"] for r in body["records"]] == [4, 16]
    r4, r16 = body["records"]
    assert r16["ratio"] < r4["ratio"] / 2.0
    t4, t16 = body["t4_records"]
    assert t16["ratio4"] > t4["ratio4"]
    jsonschema.validate(body["t4_records"], reports.array_schema("t4"))


def test_torus3_rejects_bad_j(client):
    assert client.post("/torus3", json={"j_list": []}).status_code == 422
    assert client.post("/torus3", json={"j_list": [0]}).status_code == 422


def test_verify_subset(client):
    resp = client.post("/verify", json={"criteria": [9, 13]})
    assert resp.status_code == 200
    body = resp.json()
    assert body["all_passed"] is True
    assert [r["number"] for r in body["records"]] == [9, 13]
    assert all(r["passed"] for r in body["records"])
    jsonschema.validate(body["records"], reports.array_schema("verify"))


def test_verify_rejects_unknown_criterion(client):
    assert client.post("/verify", json={"criteria": [99]}).status_code == 422
