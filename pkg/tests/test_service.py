import json

import jsonschema
import pytest
from fastapi.testclient import TestClient

from qnoise.service.app import app
from qnoise.service.models import report_json_schema

BV_TEXT = "qubits 2\nx q1\nh q0\nh q1\ncx q0 q1\nh q0\nh q1\n"  # bv n=1 secret=1


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


@pytest.fixture(scope="module")
def schema():
    return report_json_schema()


def validate(schema, payload):
    jsonschema.validate(payload, schema)


class TestHealth:
    def test_health(self, client):
        r = client.get("/health")
        assert r.status_code == 200
        assert r.json()["status"] == "ok"


class TestSimulate:
    def test_exact(self, client, schema):
        r = client.post(
            "/simulate", json={"circuit": BV_TEXT, "v": "11", "mode": "exact"}
        )
        assert r.status_code == 200
        body = r.json()
        assert body["schema"] == 1
        assert body["value"] == pytest.approx(1.0, abs=1e-9)
        validate(schema, body)

    def test_approx_report_fields(self, client, schema):
        circuit = BV_TEXT + "noise depolarizing(0.01) q0\n"
        r = client.post(
            "/simulate",
            json={"circuit": circuit, "mode": "approx", "level": 1, "workers": 1},
        )
        body = r.json()
        assert r.status_code == 200
        assert body["level"] == 1
        assert body["contraction_count"] == 8  # one 1q noise at level 1
        assert body["bound"] == 0.0  # level == noise count
        assert len(body["term_sums"]) == 2
        validate(schema, body)

    def test_kraus_sum_mode(self, client):
        circuit = BV_TEXT + "noise depolarizing(0.02) q1\n"
        ks = client.post(
            "/simulate", json={"circuit": circuit, "v": "11", "mode": "kraus-sum"}
        ).json()["value"]
        dn = client.post(
            "/simulate", json={"circuit": circuit, "v": "11", "mode": "dense"}
        ).json()["value"]
        assert ks == pytest.approx(dn, abs=1e-10)

    def test_trajectories_needs_budget(self, client):
        r = client.post(
            "/simulate", json={"circuit": BV_TEXT, "mode": "trajectories"}
        )
        assert r.status_code == 422
        assert r.json()["error"]["kind"] == "validation"

    def test_trajectories_with_delta(self, client, schema):
        r = client.post(
            "/simulate",
            json={
                "circuit": BV_TEXT,
                "v": "11",
                "mode": "trajectories",
                "delta": 0.2,
                "seed": 4,
            },
        )
        body = r.json()
        assert r.status_code == 200
        assert body["samples"] == 58  # ceil(ln(100)/(2*0.04))
        assert body["value"] == pytest.approx(1.0, abs=1e-9)
        validate(schema, body)

    def test_parse_error_payload(self, client):
        r = client.post("/simulate", json={"circuit": "qubits 1\nxyz q0\n"})
        assert r.status_code == 400
        err = r.json()["error"]
        assert err["kind"] == "parse"
        assert err["line"] == 2 and err["col"] == 1

    def test_resource_error(self, client):
        # explicit v keeps the gate tensors (no inverse cancellation), so a
        # one-entry budget cannot hold any intermediate
        r = client.post(
            "/simulate",
            json={"circuit": BV_TEXT, "v": "11", "mode": "exact", "mem_budget": 1},
        )
        assert r.status_code == 507
        assert r.json()["error"]["kind"] == "resource"


class TestEqcheck:
    def test_threshold(self, client, schema):
        noisy = BV_TEXT + "noise depolarizing(0.01) q1\n"
        r = client.post(
            "/eqcheck",
            json={
                "ideal": BV_TEXT,
                "circuit": noisy,
                "mode": "exact",
                "threshold": 0.05,
            },
        )
        body = r.json()
        assert r.status_code == 200
        assert body["fidelity"] == pytest.approx(0.99, abs=1e-9)
        assert body["equivalent_within"] is True
        validate(schema, body)

    def test_dense_mode_matches_exact(self, client):
        noisy = BV_TEXT + "noise depolarizing(0.03) q0\n"
        exact = client.post(
            "/eqcheck", json={"ideal": BV_TEXT, "circuit": noisy, "mode": "exact"}
        ).json()["fidelity"]
        dense = client.post(
            "/eqcheck", json={"ideal": BV_TEXT, "circuit": noisy, "mode": "dense"}
        ).json()["fidelity"]
        assert exact == pytest.approx(dense, abs=1e-9)


class TestDecompose:
    def test_depolarizing_golden(self, client, schema):
        r = client.post("/decompose", json={"channel": "depolarizing(0.01)"})
        body = r.json()
        assert r.status_code == 200
        assert body["noise_rate"] == pytest.approx(0.02, abs=1e-12)
        assert body["singular_values"] == pytest.approx(
            [1.98, 0.0067, 0.0067, 0.0067], abs=1e-3
        )
        assert body["reconstruction_error"] < 1e-10
        assert len(body["terms"]) == 4
        validate(schema, body)

    def test_unknown_channel(self, client):
        r = client.post("/decompose", json={"channel": "nope(1)"})
        assert r.status_code == 400


class TestGen:
    def test_bv_roundtrip(self, client):
        r = client.post("/gen", json={"family": "bv", "n": 3, "secret": "101"})
        assert r.status_code == 200
        body = r.json()
        assert body["stats"]["n_qubits"] == 4
        sim = client.post(
            "/simulate", json={"circuit": body["circuit"], "v": "1011", "mode": "exact"}
        ).json()
        assert sim["value"] == pytest.approx(1.0, abs=1e-9)

    def test_qaoa_with_policy(self, client):
        r = client.post(
            "/gen",
            json={
                "family": "qaoa",
                "n": 8,
                "edges": "linear",
                "policy": "random-k:5:depolarizing(0.001):seed=7",
            },
        )
        body = r.json()
        assert body["stats"]["single_qubit_noise_count"] == 5
        r2 = client.post(
            "/gen",
            json={
                "family": "qaoa",
                "n": 8,
                "edges": "linear",
                "policy": "random-k:5:depolarizing(0.001):seed=7",
            },
        )
        assert r2.json()["circuit"] == body["circuit"]

    def test_missing_params(self, client):
        r = client.post("/gen", json={"family": "bv", "n": 3})
        assert r.status_code == 422
        assert r.json()["error"]["kind"] == "validation"

    def test_inst_family(self, client):
        r = client.post(
            "/gen",
            json={"family": "inst", "rows": 2, "cols": 3, "depth": 4, "seed": 5},
        )
        assert r.status_code == 200
        body = r.json()
        assert body["stats"]["n_qubits"] == 6
        assert body["name"] == "inst_2x3_4"


class TestBench:
    def test_level_sweep(self, client, schema):
        circuit = BV_TEXT + "noise depolarizing(0.01) q0\nnoise depolarizing(0.01) q1\n"
        r = client.post(
            "/bench",
            json={
                "circuit": circuit,
                "ideal": BV_TEXT,
                "task": "both",
                "levels": [0, 1],
                "workers": 1,
            },
        )
        body = r.json()
        assert r.status_code == 200
        assert [row["task"] for row in body["rows"]] == [
            "simulate",
            "eqcheck",
            "simulate",
            "eqcheck",
        ]
        validate(schema, body)


def test_schema_file_in_sync():
    with open("docs/report.schema.json", encoding="utf-8") as f:
        on_disk = json.load(f)
    assert on_disk == json.loads(json.dumps(report_json_schema(), sort_keys=True))
