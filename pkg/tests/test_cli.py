import json

import pytest

from qnoise.cli import (
    EXIT_OK,
    EXIT_PARSE,
    EXIT_RESOURCE,
    EXIT_VALIDATION,
    main,
)

BV = "qubits 2\nx q1\nh q0\nh q1\ncx q0 q1\nh q0\nh q1\n"


@pytest.fixture
def bv_file(tmp_path):
    p = tmp_path / "bv.qc"
    p.write_text(BV)
    return str(p)


def run(args):
    return main(args)


class TestSimulateCommand:
    def test_exact_bv(self, bv_file, tmp_path):
        out = tmp_path / "rep.json"
        code = run(
            ["simulate", "--circuit", bv_file, "--v", "11", "--mode", "exact",
             "--out", str(out)]
        )
        assert code == EXIT_OK
        rep = json.loads(out.read_text())
        assert rep["schema"] == 1
        assert rep["command"] == "simulate"
        assert abs(rep["value"] - 1.0) < 1e-9
        assert rep["seed"] == 0

    def test_reports_are_byte_identical(self, bv_file, tmp_path):
        noisy = tmp_path / "noisy.qc"
        noisy.write_text(BV + "noise depolarizing(0.01) q0\n")
        outs = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            code = run(
                ["simulate", "--circuit", str(noisy), "--mode", "approx",
                 "--level", "1", "--workers", "1", "--seed", "3", "--out", str(out)]
            )
            assert code == EXIT_OK
            text = out.read_text()
            # elapsed differs between runs; compare everything else
            rep = json.loads(text)
            rep.pop("elapsed_seconds")
            outs.append(json.dumps(rep, sort_keys=True))
        assert outs[0] == outs[1]

    def test_17_digit_floats_roundtrip(self, bv_file, tmp_path):
        from qnoise.circuit import parse_circuit
        from qnoise.engine import simulate_exact

        out = tmp_path / "r.json"
        run(["simulate", "--circuit", bv_file, "--v", "+1", "--mode", "exact",
             "--out", str(out)])
        rep = json.loads(out.read_text())
        # 17 significant digits reproduce the double bit for bit
        want = simulate_exact(parse_circuit(BV), "zeros", "+1")
        assert rep["value"] == want

    def test_parse_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.qc"
        bad.write_text("qubits 1\nfrob q0\n")
        assert run(["simulate", "--circuit", str(bad)]) == EXIT_PARSE
        assert "line 2" in capsys.readouterr().err

    def test_validation_exit_code(self, bv_file):
        assert (
            run(["simulate", "--circuit", bv_file, "--mode", "approx",
                 "--level", "5"])
            == EXIT_VALIDATION
        )

    def test_resource_exit_code(self, bv_file):
        assert (
            run(["simulate", "--circuit", bv_file, "--v", "11",
                 "--mem-budget", "1"])
            == EXIT_RESOURCE
        )

    def test_missing_file_is_validation(self, tmp_path):
        assert run(["simulate", "--circuit", str(tmp_path / "nope.qc")]) == EXIT_VALIDATION

    def test_bad_flag_is_validation(self):
        assert run(["simulate", "--no-such-flag"]) == EXIT_VALIDATION

    def test_no_partial_report_on_error(self, tmp_path):
        bad = tmp_path / "bad.qc"
        bad.write_text("qubits 1\nfrob q0\n")
        out = tmp_path / "rep.json"
        assert run(["simulate", "--circuit", str(bad), "--out", str(out)]) == EXIT_PARSE
        assert not out.exists()

    def test_workers_env_fallback(self, bv_file, tmp_path, monkeypatch):
        monkeypatch.setenv("QNOISE_WORKERS", "1")
        out = tmp_path / "r.json"
        run(["simulate", "--circuit", bv_file, "--out", str(out)])
        assert json.loads(out.read_text())["workers"] == 1


class TestSpecExamples:
    def test_level1_contraction_count_122(self, tmp_path):
        circ = tmp_path / "qaoa20.qc"
        assert run(
            ["gen", "qaoa", "--n", "20", "--edges", "linear",
             "--policy", "random-k:20:depolarizing(0.001):seed=7",
             "--out", str(circ)]
        ) == EXIT_OK
        out = tmp_path / "r.json"
        assert run(
            ["simulate", "--circuit", str(circ), "--mode", "approx",
             "--level", "1", "--workers", "1", "--out", str(out)]
        ) == EXIT_OK
        rep = json.loads(out.read_text())
        assert rep["contraction_count"] == 122  # 6n + 2 at n = 20
        assert rep["circuit_stats"]["single_qubit_noise_count"] == 20

    def test_trajectories_cross_mode(self, tmp_path):
        circ = tmp_path / "c.qc"
        circ.write_text(
            "qubits 6\n"
            + "".join(f"h q{i}\n" for i in range(6))
            + "cx q0 q1\ncx q2 q3\ncx q4 q5\n"
            + "noise depolarizing(0.05) q1\nnoise depolarizing(0.05) q4\n"
        )
        dense_out = tmp_path / "dense.json"
        run(["simulate", "--circuit", str(circ), "--v", "zeros",
             "--mode", "dense", "--out", str(dense_out)])
        traj_out = tmp_path / "traj.json"
        delta = 0.05
        run(["simulate", "--circuit", str(circ), "--v", "zeros",
             "--mode", "trajectories", "--delta", str(delta), "--seed", "11",
             "--out", str(traj_out)])
        dense = json.loads(dense_out.read_text())["value"]
        traj = json.loads(traj_out.read_text())
        assert traj["samples"] == 922  # ceil(ln(100)/(2*0.0025))
        assert abs(traj["value"] - dense) <= delta


class TestEqcheckCommand:
    def test_threshold_report(self, bv_file, tmp_path):
        noisy = tmp_path / "noisy.qc"
        noisy.write_text(BV + "noise depolarizing(0.001) q0\n")
        out = tmp_path / "eq.json"
        code = run(
            ["eqcheck", "--ideal", bv_file, "--circuit", str(noisy),
             "--mode", "exact", "--threshold", "0.01", "--out", str(out)]
        )
        assert code == EXIT_OK
        rep = json.loads(out.read_text())
        assert rep["command"] == "eqcheck"
        assert abs(rep["fidelity"] - 0.999) < 1e-9
        assert rep["equivalent_within"] is True

    def test_level_sweep_bounded(self, bv_file, tmp_path):
        noisy = tmp_path / "noisy.qc"
        noisy.write_text(
            BV + "noise depolarizing(0.002) q0\nnoise depolarizing(0.002) q1\n"
        )
        exact_out = tmp_path / "e.json"
        run(["eqcheck", "--ideal", bv_file, "--circuit", str(noisy),
             "--mode", "exact", "--out", str(exact_out)])
        f_exact = json.loads(exact_out.read_text())["fidelity"]
        for level in (0, 1, 2):
            out = tmp_path / f"l{level}.json"
            run(["eqcheck", "--ideal", bv_file, "--circuit", str(noisy),
                 "--mode", "approx", "--level", str(level), "--workers", "1",
                 "--out", str(out)])
            rep = json.loads(out.read_text())
            assert abs(rep["fidelity"] - f_exact) <= rep["bound"] + 1e-12


class TestDecomposeCommand:
    def test_depolarizing(self, tmp_path):
        out = tmp_path / "d.json"
        code = run(["decompose", "--channel", "depolarizing(0.01)", "--out", str(out)])
        assert code == EXIT_OK
        rep = json.loads(out.read_text())
        assert abs(rep["singular_values"][0] - 1.98) < 1e-3
        assert rep["reconstruction_error"] < 1e-10

    def test_bad_spec(self):
        assert run(["decompose", "--channel", "frob(1)"]) == EXIT_PARSE


class TestGenCommand:
    def test_bv_generates_and_simulates(self, tmp_path):
        circ = tmp_path / "bv8.qc"
        code = run(["gen", "bv", "--n", "8", "--secret", "10110011",
                    "--out", str(circ)])
        assert code == EXIT_OK
        out = tmp_path / "r.json"
        run(["simulate", "--circuit", str(circ), "--v", "101100111",
             "--mode", "exact", "--out", str(out)])
        assert abs(json.loads(out.read_text())["value"] - 1.0) < 1e-9

    def test_policy_application_stable(self, tmp_path):
        texts = []
        for name in ("a.qc", "b.qc"):
            circ = tmp_path / name
            code = run(
                ["gen", "qaoa", "--n", "20", "--edges", "linear",
                 "--policy", "random-k:10:depolarizing(0.001):seed=7",
                 "--out", str(circ)]
            )
            assert code == EXIT_OK
            texts.append(circ.read_text())
        assert texts[0] == texts[1]
        assert texts[0].count("noise depolarizing(0.001)") == 10

    def test_crosstalk_needs_graph(self, tmp_path):
        code = run(["gen", "qft", "--n", "4",
                    "--policy", "crosstalk-layered:seed=1"])
        assert code == EXIT_VALIDATION

    def test_crosstalk_with_graph_file(self, tmp_path):
        graph = tmp_path / "line.graph"
        graph.write_text("qubits 4\nedge 0 1\nedge 1 2\nedge 2 3\n")
        circ = tmp_path / "c.qc"
        code = run(["gen", "qft", "--n", "4",
                    "--policy", "crosstalk-layered:seed=3",
                    "--graph", str(graph), "--out", str(circ)])
        assert code == EXIT_OK
        text = circ.read_text()
        assert "noise zz(" in text

    def test_qaoa_explicit_edge_list(self, tmp_path):
        circ = tmp_path / "q2.qc"
        code = run(["gen", "qaoa", "--n", "2", "--edges", "0-1",
                    "--out", str(circ)])
        assert code == EXIT_OK
        from qnoise.circuit import parse_circuit

        kinds = [g.kind for g in parse_circuit(circ.read_text()).gates()]
        assert kinds == ["ry", "ry", "rz", "rz", "cz", "rz", "rx", "rx"]


class TestBenchCommand:
    def test_rows(self, bv_file, tmp_path):
        noisy = tmp_path / "noisy.qc"
        noisy.write_text(BV + "noise depolarizing(0.01) q0\n")
        out = tmp_path / "bench.json"
        code = run(["bench", "--circuit", str(noisy), "--levels", "0,1",
                    "--workers", "1", "--out", str(out)])
        assert code == EXIT_OK
        rep = json.loads(out.read_text())
        assert [r["level"] for r in rep["rows"]] == [0, 1]


class TestRemoteMode:
    def test_server_dispatch(self, bv_file, tmp_path, monkeypatch):
        # route --server traffic through the in-process ASGI app
        from fastapi.testclient import TestClient

        from qnoise.service.app import app

        tc = TestClient(app)

        class FakeHttpx:
            HTTPError = Exception

            @staticmethod
            def post(url, json=None, timeout=None):
                path = "/" + url.split("/", 3)[3]
                return tc.post(path, json=json)

        monkeypatch.setitem(
            __import__("sys").modules, "httpx", FakeHttpx
        )
        out = tmp_path / "r.json"
        code = run(["simulate", "--circuit", bv_file, "--v", "11",
                    "--server", "http://svc", "--out", str(out)])
        assert code == EXIT_OK
        assert abs(json.loads(out.read_text())["value"] - 1.0) < 1e-9

        bad = tmp_path / "bad.qc"
        bad.write_text("qubits 1\nfrob q0\n")
        assert run(["simulate", "--circuit", str(bad),
                    "--server", "http://svc"]) == EXIT_PARSE
