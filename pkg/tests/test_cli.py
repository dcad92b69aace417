from __future__ import annotations

import json
import os
import subprocess
import sys

import pytest

from qwsojourn.algebra import grover, hadamard, phi_star
from qwsojourn.cli import ConfigError, build_config, main
from qwsojourn.formats import mat_from_json, scalar_from_json
from qwsojourn.sojourn import gamma_table
from qwsojourn.walk import WalkConfig, evolve_xi, position_distribution


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestDistribution:
    def test_default_is_grover_from_phi_star(self, capsys):
        code, out, _ = run(capsys, "distribution", "--steps", "2")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "n,x,probability"
        assert "1,-1,1" in lines and "2,0,1" in lines

    def test_identity_is_ballistic(self, capsys):
        _, out, _ = run(capsys, "distribution", "--coin", "identity", "--steps", "3")
        for n in range(1, 4):
            assert f"{n},{n},1" in out.splitlines()

    def test_rows_sum_to_one(self, capsys):
        _, out, _ = run(capsys, "distribution", "--coin", "hadamard", "--backend", "float",
                        "--steps", "30")
        totals: dict[int, float] = {}
        for line in out.splitlines()[1:]:
            n, _, p = line.split(",")
            totals[int(n)] = totals.get(int(n), 0.0) + float(p)
        assert all(abs(t - 1) < 1e-12 for t in totals.values())

    def test_json_round_trip_is_exact(self, capsys):
        _, out, _ = run(capsys, "distribution", "--coin", "hadamard", "--steps", "6",
                        "--format", "json")
        doc = json.loads(out)
        table = evolve_xi(WalkConfig(hadamard(), phi_star(), 6))
        expected = {(n, x): p for n in range(7) for x, p in position_distribution(table, phi_star(), n)}
        assert len(doc["rows"]) == len(expected)
        for row in doc["rows"]:
            got = scalar_from_json({"exact": row["exact"], "float": [row["probability"], 0]})
            assert got == expected[(row["n"], row["x"])]

    def test_custom_coin_float(self, capsys):
        h = "0.7071067811865476"
        code, _, _ = run(capsys, "distribution", "--backend", "float", "--coin-entries",
                         f"{h},0,{h},0,{h},0,-{h},0", "--steps", "4")
        assert code == 0

    def test_custom_coin_exact_rationals(self, capsys):
        code, out, _ = run(capsys, "distribution", "--coin-entries", "3/5,0,4/5,0,4/5,0,-3/5,0",
                           "--steps", "2", "--initial", "1,0,0,0")
        assert code == 0 and "1,-1,0.35999999999999999" in out

    def test_oracle_audit(self, capsys):
        code, out, err = run(capsys, "distribution", "--coin", "hadamard", "--steps", "8",
                             "--oracle", "--format", "json")
        assert code == 0 and json.loads(out)["oracle"]["match"] is True


class TestSojourn:
    def test_rows_and_sidecars(self, capsys, tmp_path):
        out = tmp_path / "g.csv"
        code, _, err = run(capsys, "sojourn", "--steps", "4", "--output", str(out))
        assert code == 0
        rows = out.read_text().splitlines()
        assert rows[0] == "n,k,i,j,re,im"
        assert "4,4,0,0,1,0" in rows
        assert all(r.endswith(",0,0") for r in rows if r.startswith("4,2,"))
        psi = (tmp_path / "g.csv.psi.csv").read_text().splitlines()
        assert psi[0] == "n,x,y,k,i,j,re,im"
        renewal = json.loads((tmp_path / "g.csv.renewal.json").read_text())
        assert renewal["max_residual_right"] == 0
        assert sorted(os.listdir(tmp_path)) == ["g.csv", "g.csv.psi.csv", "g.csv.renewal.json"]

    def test_renewal_grover_20(self, capsys, tmp_path):
        out = tmp_path / "g.csv"
        run(capsys, "sojourn", "--output", str(out))
        renewal = json.loads((tmp_path / "g.csv.renewal.json").read_text())
        assert renewal["max_time"] == 20
        assert renewal["max_residual_right"] == 0
        assert renewal["offdiag_max_residual"] > 0

    def test_json_round_trip(self, capsys):
        _, out, _ = run(capsys, "sojourn", "--coin", "hadamard", "--steps", "8", "--format",
                        "json", "--oracle")
        doc = json.loads(out)
        g = gamma_table(hadamard(), 8)
        got = {(e["n"], e["k"]): mat_from_json(e["matrix"]) for e in doc["gamma"]}
        assert got == g.data
        assert doc["renewal"]["oracle"]["match"] is True

    def test_odd_steps(self, capsys):
        assert run(capsys, "sojourn", "--steps", "5")[0] == 1


class TestGenfun:
    def test_grover(self, capsys, tmp_path):
        out = tmp_path / "gf.csv"
        code, _, _ = run(capsys, "genfun", "--truncation", "40,40", "--output", str(out))
        assert code == 0
        diag = json.loads((tmp_path / "gf.csv.diagnostics.json").read_text())
        assert diag["closed_form_check"]["match"] is True
        d = diag["diagnostics"]
        assert d["gamma_bar"]["divergent"] == [True]
        e11 = d["gamma_bar"]["entries"][0]
        assert e11["label"] == "(1,1)" and e11["points"][0]["final_partial_sum"] == [20.0, 0.0]
        nonzero = [k for k in "pqrs" if any(any(e["profile_norms"]) for e in d[k]["entries"])]
        assert nonzero and all(d[k]["divergent"] == [True] for k in nonzero)
        assert all(d[k]["normalization"] == "4x" for k in "pqrs")

    def test_hadamard_contrast(self, capsys):
        code, out, _ = run(capsys, "genfun", "--coin", "hadamard", "--backend", "float",
                           "--truncation", "60,60", "--format", "json")
        doc = json.loads(out)
        gb = doc["diagnostics"]["gamma_bar"]
        assert code == 0 and gb["divergent"] == [False] and gb["decay_class"] != "non-decaying"

    def test_eval_points(self, capsys):
        _, out, _ = run(capsys, "genfun", "--truncation", "20,20", "--format", "json",
                        "--eval", "1,0,1,0", "--eval", "1/2,0,1,0")
        assert json.loads(out)["diagnostics"]["gamma_bar"]["divergent"] == [True, False]

    def test_insufficient_order(self, capsys):
        code, _, err = run(capsys, "genfun", "--truncation", "10,10")
        assert code == 2 and "InsufficientOrder" in err


class TestScan:
    def test_named(self, capsys):
        code, out, err = run(capsys, "scan", "--family", "grover,hadamard", "--grid", "64")
        rows = out.splitlines()
        assert code == 0 and len(rows) == 3
        g, h = rows[1].split(","), rows[2].split(",")
        assert g[1] == "grover" and g[10] == "True" and g[13] == "True"
        assert h[1] == "hadamard" and h[10] == "False" and h[13] == "False"
        assert "0 counterexample candidates" in err

    def test_empty(self, capsys):
        code, out, _ = run(capsys, "scan", "--count", "0")
        assert code == 0 and len(out.splitlines()) == 1

    def test_byte_identical(self, capsys, tmp_path):
        paths = [tmp_path / "a.json", tmp_path / "b.json"]
        for p in paths:
            run(capsys, "scan", "--count", "4", "--seed", "7", "--steps", "30", "--grid", "64",
                "--format", "json", "--output", str(p))
        assert paths[0].read_bytes() == paths[1].read_bytes()
        doc = json.loads(paths[0].read_text())
        assert doc["summary"]["counterexample_candidates"] == 0


class TestExitCodes:
    @pytest.mark.parametrize(
        "args",
        [
            ["distribution", "--coin", "pauli"],
            ["distribution", "--coin-entries", "1,0,1,0,0,0,1,0"],
            ["distribution", "--coin-entries", "1,2,3"],
            ["distribution", "--initial", "1,0,1,0"],
            ["distribution", "--initial", "a,b,c,d"],
            ["distribution", "--backend", "quad"],
            ["distribution", "--steps", "-1"],
            ["genfun", "--truncation", "x,y"],
            ["scan", "--family", "grover,pauli"],
            ["scan", "--grid", "4"],
            ["frobnicate"],
        ],
    )
    def test_invalid_config(self, capsys, args):
        assert run(capsys, *args)[0] == 1

    def test_resource_limits(self, capsys, monkeypatch):
        assert run(capsys, "distribution", "--steps", "21", "--oracle")[0] == 2
        monkeypatch.setenv("QWSOJOURN_MAX_STEPS", "10")
        assert run(capsys, "distribution", "--steps", "12")[0] == 2

    def test_failed_run_leaves_no_file(self, capsys, tmp_path):
        out = tmp_path / "x.csv"
        assert run(capsys, "genfun", "--truncation", "10,10", "--output", str(out))[0] == 2
        assert not os.listdir(tmp_path)

    def test_help(self, capsys):
        assert run(capsys, "--help")[0] == 0


def test_build_config_validates_before_compute():
    with pytest.raises(ConfigError):
        build_config(initial="0,0,0,2")
    cfg = build_config()
    assert cfg.coin == grover() and cfg.initial == phi_star()


def test_module_entry_point(tmp_path):
    out = tmp_path / "d.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "qwsojourn", "distribution", "--steps", "2", "--output", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and "2,0,1" in out.read_text()
