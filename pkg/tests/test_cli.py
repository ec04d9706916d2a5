import json
import math

import numpy as np
import pytest

from tscert.cli import main
from tscert.conditions import load_certificate

from conftest import MODEL_PATH

MODEL = str(MODEL_PATH)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def grab(prefix, out):
    for line in out.splitlines():
        if line.startswith(prefix):
            return line[len(prefix):].strip()
    raise AssertionError(f"no line starting with {prefix!r} in:\n{out}")


class TestCheck:
    def test_feasible_quadratic(self, capsys, tmp_path):
        cert_path = tmp_path / "quad.json"
        code, out, _ = run(
            capsys,
            "check",
            "--model", MODEL,
            "--method", "quadratic",
            "--lambda", "3",
            "--out", str(cert_path),
        )
        assert code == 0
        assert grab("verdict:", out) == "strictly-feasible"
        assert float(grab("min verified margin =", out)) > 0
        cert = load_certificate(cert_path)
        assert cert.method.kind == "quadratic"
        assert cert.lam == 3.0

    def test_infeasible_quadratic(self, capsys):
        code, out, _ = run(capsys, "check", "--model", MODEL, "--method", "quadratic", "--lambda", "5")
        assert code == 1
        assert grab("verdict:", out) == "infeasible"

    def test_tanaka_with_rate_bounds(self, capsys):
        code, out, _ = run(
            capsys,
            "check", "--model", MODEL, "--method", "tanaka", "--phi", "0.1,0.1", "--lambda", "40",
        )
        assert code == 0
        assert grab("method:", out) == "tanaka(phi=0.1,0.1)"

    def test_tanaka_needs_phi(self, capsys):
        code, _, err = run(capsys, "check", "--model", MODEL, "--method", "tanaka", "--lambda", "1")
        assert code == 2
        assert "rate bounds" in err

    def test_bad_phi_string(self, capsys):
        code, _, err = run(
            capsys, "check", "--model", MODEL, "--method", "tanaka", "--phi", "abc", "--lambda", "1"
        )
        assert code == 2
        assert "error:" in err

    def test_missing_model_file(self, capsys, tmp_path):
        code, _, err = run(
            capsys, "check", "--model", str(tmp_path / "nope.json"), "--method", "quadratic"
        )
        assert code == 2
        assert "error:" in err


class TestLambdaMax:
    def test_quadratic_search_with_history(self, capsys, tmp_path):
        hist = tmp_path / "probes.jsonl"
        code, out, _ = run(
            capsys,
            "lambda-max", "--model", MODEL, "--method", "quadratic", "--history", str(hist),
        )
        assert code == 0
        value = float(grab("lambda* =", out))
        assert value == pytest.approx(3.8269, abs=0.05)
        assert "probes =" in out

        records = [json.loads(line) for line in hist.read_text().splitlines()]
        assert len(records) >= 10
        assert set(records[0]) == {"lambda", "verdict", "t_star"}
        assert records[0]["lambda"] == 0.001
        assert records[0]["verdict"] == "strictly-feasible"
        verdicts = {rec["verdict"] for rec in records}
        assert verdicts <= {"strictly-feasible", "infeasible", "numerical-failure"}

    def test_no_feasible_lambda(self, capsys):
        code, out, _ = run(
            capsys, "lambda-max", "--model", MODEL, "--method", "tanaka", "--phi", "2"
        )
        assert code == 1
        assert "no feasible lambda in [0.001, 100]" in out

    def test_mozelli_search(self, capsys):
        code, out, _ = run(
            capsys, "lambda-max", "--model", MODEL, "--method", "mozelli", "--phi", "1"
        )
        assert code == 0
        assert float(grab("lambda* =", out)) == pytest.approx(6.7810, abs=0.1)

    def test_deterministic_output(self, capsys):
        args = ("lambda-max", "--model", MODEL, "--method", "quadratic", "--range", "3,4.5")
        code1, out1, _ = run(capsys, *args)
        code2, out2, _ = run(capsys, *args)
        assert code1 == code2 == 0
        assert out1 == out2

    def test_bad_range(self, capsys):
        code, _, err = run(
            capsys, "lambda-max", "--model", MODEL, "--method", "quadratic", "--range", "5"
        )
        assert code == 2
        assert "--range" in err


class TestComplexity:
    def test_csv_values(self, capsys):
        code, out, _ = run(capsys, "complexity", "--n", "2", "--r", "2", "--format", "csv")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "method,N_d,N_l,cost,log_cost"
        rows = {line.split(",")[0]: line.split(",") for line in lines[1:]}
        assert rows["quadratic"][1:4] == ["3", "6", "162"]
        assert rows["augmented-slack"][1:4] == ["95", "70", str(95**3 * 70)]
        assert float(rows["augmented-slack"][4]) == pytest.approx(
            math.log(95**2 * 70), rel=1e-9
        )

    def test_table_format(self, capsys):
        code, out, _ = run(capsys, "complexity", "--n", "3", "--r", "3")
        assert code == 0
        assert "problem sizes for n = 3, r = 3" in out
        assert "N_d^3*N_l" in out
        assert "mozelli" in out

    def test_nonpositive_dimension(self, capsys):
        code, _, err = run(capsys, "complexity", "--n", "0", "--r", "2")
        assert code == 2
        assert "positive" in err


class TestSimulate:
    def test_plain_run(self, capsys):
        code, out, _ = run(
            capsys,
            "simulate", "--model", MODEL, "--x0", "0.2,-0.1", "--lambda", "3", "--t-end", "0.05",
        )
        assert code == 0
        assert grab("# exit:", out) == "horizon"
        assert float(grab("# final-norm =", out)) > 0
        lines = [ln for ln in out.splitlines() if not ln.startswith("#")]
        assert lines[0] == "t,x1,x2"
        assert len(lines) == 52

    def test_zero_state_stays_put(self, capsys):
        code, out, _ = run(
            capsys,
            "simulate", "--model", MODEL, "--x0", "0,0", "--lambda", "3", "--t-end", "0.01",
        )
        assert code == 0
        assert grab("# exit:", out) == "converged"
        for line in out.splitlines():
            if line.startswith(("#", "t,")):
                continue
            _, x1, x2 = line.split(",")
            assert float(x1) == 0.0 and float(x2) == 0.0

    def test_with_certificate_column(self, capsys, tmp_path):
        cert_path = tmp_path / "quad.json"
        run(capsys, "check", "--model", MODEL, "--method", "quadratic", "--lambda", "3",
            "--out", str(cert_path))
        code, out, _ = run(
            capsys,
            "simulate", "--model", MODEL, "--x0", "1,0", "--lambda", "3", "--t-end", "1",
            "--certificate", str(cert_path),
        )
        assert code == 0
        assert grab("# certificate:", out) == "quadratic at lambda = 3"
        assert "# 0 decrease violations" in out
        header = next(ln for ln in out.splitlines() if ln.startswith("t,"))
        assert header == "t,x1,x2,V"
        first_v = float(out.splitlines()[-1].split(",")[-1])
        assert first_v > 0

    def test_out_file(self, capsys, tmp_path):
        dest = tmp_path / "traj.csv"
        code, out, _ = run(
            capsys,
            "simulate", "--model", MODEL, "--x0", "0.1,0", "--lambda", "3", "--t-end", "0.01",
            "--out", str(dest),
        )
        assert code == 0
        assert f"trajectory written: {dest}" in out
        assert dest.read_text().startswith("# exit:")

    def test_x0_outside_region(self, capsys):
        code, _, err = run(
            capsys,
            "simulate", "--model", MODEL, "--x0", "3,0", "--lambda", "3", "--t-end", "1",
        )
        assert code == 2
        assert "outside" in err


class TestVerify:
    @pytest.fixture()
    def cert_path(self, capsys, tmp_path):
        path = tmp_path / "quad.json"
        run(capsys, "check", "--model", MODEL, "--method", "quadratic", "--lambda", "3",
            "--out", str(path))
        return path

    def test_fresh_certificate_passes(self, capsys, cert_path):
        code, out, _ = run(capsys, "verify", "--model", MODEL, "--certificate", str(cert_path))
        assert code == 0
        assert "verdict: pass" in out
        assert "threshold =" in out
        assert "neg_lyap[0]" in out

    def test_tampered_certificate_fails(self, capsys, cert_path, tmp_path):
        data = json.loads(cert_path.read_text())
        data["blocks"]["P"] = [[-v for v in row] for row in data["blocks"]["P"]]
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(data))
        code, out, _ = run(capsys, "verify", "--model", MODEL, "--certificate", str(bad))
        assert code == 1
        assert "verdict: FAIL" in out

    def test_mismatched_certificate_is_usage_error(self, capsys, tmp_path):
        alien = tmp_path / "alien.json"
        alien.write_text(
            json.dumps(
                {
                    "method": "quadratic",
                    "lambda": 1.0,
                    "margin": 0.5,
                    "blocks": {"P": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]},
                }
            )
        )
        code, _, err = run(capsys, "verify", "--model", MODEL, "--certificate", str(alien))
        assert code == 2
        assert "does not match the model" in err

    def test_malformed_certificate(self, capsys, tmp_path):
        broken = tmp_path / "broken.json"
        broken.write_text("{oops")
        code, _, err = run(capsys, "verify", "--model", MODEL, "--certificate", str(broken))
        assert code == 2


class TestTable1:
    def test_rows_and_notes(self, capsys):
        code, out, _ = run(capsys, "table1", "--model", MODEL, "--tol", "0.01")
        assert code == 0
        lines = out.splitlines()
        assert "computed lambda*" in lines[0]
        assert "published" in lines[0]

        def row(label):
            return next(ln for ln in lines if ln.startswith(label))

        quad = row("quadratic ").split()
        assert float(quad[1]) == pytest.approx(3.8269, abs=0.05)
        assert quad[2] == "3.8269"
        assert "no feasible lambda" in row("tanaka(phi=2)")
        assert "41.8152" in row("tanaka(phi=0.1)")
        assert "not computed" in row("line-integral")
        assert "7.7454" in row("line-integral")
        assert any("search artifact" in ln for ln in lines)
        assert any("literature value" in ln for ln in lines)


class TestUsage:
    def test_missing_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_unknown_method_choice(self):
        with pytest.raises(SystemExit) as exc:
            main(["check", "--model", MODEL, "--method", "secret"])
        assert exc.value.code == 2
