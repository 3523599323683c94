"""CLI behavior: payloads, formats, config plumbing, exit codes."""

import json
import math
import os

import pytest

from freecorr import cli, verify


def run(capsys, *argv):
    rc = cli.main(list(argv))
    out = capsys.readouterr().out
    return rc, out


def run_json(capsys, *argv):
    rc, out = run(capsys, *argv)
    return rc, json.loads(out)


HC_HALF_SQUARE = json.dumps(
    {"side": "hc", "series": [{"center": 0, "coeffs": [0, 0, 0.5] + [0] * 10}]}
)


class TestMoments:
    def test_gue_pinned_rows(self, capsys):
        rc, p = run_json(capsys, "moments", "--model", "gue", "-K", "6", "-n", "2")
        assert rc == 0
        assert p["schema"] == "freecorr/1"
        assert p["result"]["orders"] == [
            [0, 1, 0, 2, 0, 5],
            [0, 0, 0, 0, 0, 0],
            [0, 0, 0, 1, 0, 10],
        ]
        assert p["result"]["scales"] == ["N^0", "N^-1", "N^-2"]

    def test_uniform_schur_rows(self, capsys):
        rc, p = run_json(capsys, "moments", "--model", "uniform-schur", "-K", "4")
        assert rc == 0
        row0, row1 = p["result"]["orders"]
        assert row0 == pytest.approx([1 / 2, 1 / 3, 1 / 4, 1 / 5])
        assert row1 == pytest.approx([-0.5] * 4)

    def test_raw_input_inline(self, capsys):
        rc, p = run_json(
            capsys, "moments", "--input", HC_HALF_SQUARE, "-K", "6", "-n", "0"
        )
        assert rc == 0
        assert p["result"]["orders"] == [[0, 1, 0, 2, 0, 5]]

    def test_raw_input_file(self, capsys, tmp_path):
        path = tmp_path / "input.json"
        path.write_text(HC_HALF_SQUARE)
        rc, p = run_json(capsys, "moments", "--input", str(path), "-K", "4")
        assert rc == 0
        assert p["result"]["orders"][0] == [0, 1, 0, 2]

    def test_reruns_byte_identical(self, capsys):
        _, first = run(capsys, "moments", "--model", "wishart", "-K", "6", "-n", "1")
        _, second = run(capsys, "moments", "--model", "wishart", "-K", "6", "-n", "1")
        assert first == second

    def test_csv_format(self, capsys):
        rc, out = run(
            capsys, "moments", "--model", "gue", "-K", "4", "--format", "csv"
        )
        assert rc == 0
        lines = out.splitlines()
        assert lines[0] == "# freecorr/1"
        assert lines[1] == "order,scale,k,value"
        # k=2 LLN row carries the semicircle second moment
        assert "0,N^0,2,1" in lines

    def test_output_file_and_figure(self, capsys, tmp_path):
        out = tmp_path / "m.json"
        rc = cli.main(
            ["moments", "--model", "gue", "-K", "4", "-o", str(out), "--quiet"]
        )
        assert rc == 0
        assert json.loads(out.read_text())["command"] == "moments"
        assert (tmp_path / "m.png").exists()

    def test_no_figures(self, tmp_path):
        out = tmp_path / "m.json"
        rc = cli.main(
            ["moments", "--model", "gue", "-o", str(out), "--quiet", "--no-figures"]
        )
        assert rc == 0
        assert not (tmp_path / "m.png").exists()

    def test_quiet_suppresses_stdout(self, capsys):
        rc, out = run(capsys, "moments", "--model", "gue", "--quiet")
        assert rc == 0
        assert out == ""

    def test_kmax_zero_rejected(self, capsys):
        assert cli.main(["moments", "--model", "gue", "-K", "0", "--quiet"]) == 2

    def test_model_and_input_conflict(self, capsys):
        rc = cli.main(
            ["moments", "--model", "gue", "--input", HC_HALF_SQUARE, "--quiet"]
        )
        assert rc == 2

    def test_order_beyond_model_rejected(self, capsys):
        assert cli.main(["moments", "--model", "gue", "-n", "7", "--quiet"]) == 2

    def test_epsilon_with_model_rejected(self):
        rc = cli.main(["moments", "--model", "gue", "--epsilon", "0.2", "--quiet"])
        assert rc == 2

    def test_separated_scales_raw_input(self, capsys):
        inp = json.dumps(
            {
                "side": "hc",
                "series": [{"center": 0, "coeffs": [0, 0, 0.5] + [0] * 10}] * 3,
            }
        )
        rc, p = run_json(
            capsys, "moments", "--input", inp, "-K", "4", "-n", "2",
            "--epsilon", "0.25",
        )
        assert rc == 0
        assert p["result"]["scales"] == ["N^0", "N^-0.25", "N^-0.5"]


class TestCumulants:
    def test_gue_free_cumulants(self, capsys):
        rc, p = run_json(capsys, "cumulants", "--model", "gue", "-K", "6")
        assert rc == 0
        assert p["result"]["rows"][0] == [0, 1, 0, 0, 0, 0]

    def test_uniform_schur_quantized(self, capsys):
        rc, p = run_json(capsys, "cumulants", "--model", "uniform-schur", "-K", "4")
        assert rc == 0
        row0, row1 = p["result"]["rows"]
        assert row0 == pytest.approx([1 / 2, 1 / 12, 0, -1 / 720])
        assert row1 == pytest.approx([-1 / 2, 0, 0, 0])

    def test_csv_shape(self, capsys):
        rc, out = run(
            capsys, "cumulants", "--model", "gue", "-K", "3", "--format", "csv"
        )
        assert rc == 0
        lines = out.splitlines()
        assert lines[1] == "order,n,value"
        # three orders x three cumulants
        assert len(lines) == 2 + 9


class TestDensity:
    def test_dbbp_atom_in_csv(self, capsys):
        rc, out = run(
            capsys, "density", "--model", "dbbp", "--format", "csv", "--npoints", "201"
        )
        assert rc == 0
        atom_rows = [l for l in out.splitlines() if l.startswith("atom,")]
        assert len(atom_rows) == 1
        _, x, w = atom_rows[0].split(",")
        assert float(x) == pytest.approx(16.25)
        assert float(w) == pytest.approx(1.0)

    def test_json_grid_length(self, capsys):
        rc, p = run_json(
            capsys, "density", "--model", "gue", "--npoints", "101"
        )
        assert rc == 0
        assert len(p["result"]["grid"]) == 101
        assert len(p["result"]["density"]) == 101
        assert p["result"]["kind"] == "probability"

    def test_density_figure(self, tmp_path):
        out = tmp_path / "d.json"
        rc = cli.main(
            ["density", "--model", "gue-bbp", "--npoints", "101",
             "-o", str(out), "--quiet"]
        )
        assert rc == 0
        assert (tmp_path / "d.png").exists()

    def test_order_not_available(self):
        assert cli.main(["density", "--model", "gue", "-n", "2", "--quiet"]) == 2

    def test_needs_model(self):
        assert cli.main(["density", "--quiet"]) == 2

    def test_npoints_floor(self):
        assert cli.main(["density", "--model", "gue", "--npoints", "4", "--quiet"]) == 2


class TestVerify:
    def test_schur_eigenrelation_exact(self, capsys):
        rc, p = run_json(
            capsys, "verify", "--check", "dk-schur", "--signature", "2,1,0", "-k", "2"
        )
        assert rc == 0
        assert p["result"][0]["pass"] is True
        assert p["result"][0]["max_rel_err"] == 0

    def test_hc_eigenrelation(self, capsys):
        rc, p = run_json(
            capsys, "verify", "--check", "dk-hc",
            "--xs", "0.9,0.2,-0.4", "--lams", "1.2,0.5,-0.8", "-k", "3",
        )
        assert rc == 0
        assert p["result"][0]["max_rel_err"] < 1e-8

    def test_expansion_equivalence(self, capsys):
        rc, p = run_json(
            capsys, "verify", "--check", "dk-expansion", "--xs", "0.8,0.1,-0.5",
            "-k", "2",
        )
        assert rc == 0

    def test_report(self, capsys):
        rc, p = run_json(capsys, "verify", "--check", "report", "--instances", "5")
        assert rc == 0
        assert [c["check"] for c in p["result"]] == [
            "dk_hc_eigenrelation",
            "dk_schur_eigenrelation_exact",
            "dk_expansion_equivalence",
        ]
        assert all(c["pass"] for c in p["result"])

    def test_failing_check_exits_one(self, capsys, monkeypatch):
        monkeypatch.setattr(verify, "check_dk_eigenrelation", lambda *a: 1.0)
        rc = cli.main(
            ["verify", "--check", "dk-hc", "--xs", "0.9,0.2", "--lams", "1.2,0.5",
             "--quiet"]
        )
        assert rc == 1

    def test_us_length_mismatch(self):
        rc = cli.main(
            ["verify", "--check", "dk-schur", "--signature", "2,1,0",
             "--us", "1/2,1/3", "--quiet"]
        )
        assert rc == 2

    def test_verify_figure(self, tmp_path):
        out = tmp_path / "v.json"
        rc = cli.main(
            ["verify", "--check", "report", "--instances", "3",
             "-o", str(out), "--quiet"]
        )
        assert rc == 0
        assert (tmp_path / "v.png").exists()


class TestMc:
    def test_gue_model_scored(self, capsys):
        rc, p = run_json(
            capsys, "mc", "--model", "gue", "-K", "2", "--ngrid", "32,64,128",
            "--samples", "300", "--seed", "11",
        )
        assert rc == 0
        for rep in p["result"]:
            assert rep["predictions"] is not None
            assert max(abs(z) for z in rep["z_scores"]) < 3.0

    def test_ztol_failure_exits_one(self, capsys):
        rc, _ = run(
            capsys, "mc", "--model", "gue", "-K", "2", "--ngrid", "32,64,128",
            "--samples", "300", "--seed", "11", "--ztol", "0.05", "--quiet",
        )
        assert rc == 1

    def test_genus_mode(self, capsys):
        rc, p = run_json(
            capsys, "mc", "--genus", "-K", "2", "--ngrid", "8,16,32,64",
            "--samples", "300", "--seed", "11",
        )
        assert rc == 0
        rep = p["result"][0]
        assert rep["k"] == 2
        assert rep["basis"] == [0, 2]
        assert rep["predictions"][0] == 1.0

    def test_ensemble_inline(self, capsys):
        spec = json.dumps(
            {"components": [{"kind": "diag_spikes", "spikes": [2.0], "scale": 0.0}]}
        )
        rc, p = run_json(
            capsys, "mc", "--ensemble", spec, "-K", "1", "--ngrid", "8,16,32",
            "--samples", "4",
        )
        assert rc == 0
        # deterministic matrices: the fit reproduces m1 = 2/N exactly
        assert p["result"][0]["coefficients"][0] == pytest.approx(0.0, abs=1e-12)
        assert p["result"][0]["coefficients"][1] == pytest.approx(2.0, rel=1e-9)
        assert p["result"][0]["z_scores"] is None

    def test_csv_empty_prediction_cells(self, capsys):
        spec = json.dumps(
            {"components": [{"kind": "diag_spikes", "spikes": [1.0], "scale": 0.0}]}
        )
        rc, out = run(
            capsys, "mc", "--ensemble", spec, "-K", "1", "--ngrid", "8,16,32",
            "--samples", "4", "--format", "csv",
        )
        assert rc == 0
        lines = out.splitlines()
        assert lines[1] == "k,power,coefficient,stderr,prediction,z"
        assert lines[2].endswith(",,")  # no prediction, no z

    def test_model_without_ensemble_rejected(self):
        rc = cli.main(["mc", "--model", "gue-two-scale", "--quiet"])
        assert rc == 2

    def test_model_and_ensemble_conflict(self):
        rc = cli.main(
            ["mc", "--model", "gue", "--ensemble", '{"components": []}', "--quiet"]
        )
        assert rc == 2

    def test_order2_needs_expensive(self):
        rc = cli.main(
            ["mc", "--model", "gue", "--orders", "2",
             "--ngrid", "8,12,16,24,32", "--samples", "4", "--quiet"]
        )
        assert rc == 2

    def test_no_source_rejected(self):
        assert cli.main(["mc", "--quiet"]) == 2

    def test_bad_ensemble_descriptor(self):
        rc = cli.main(
            ["mc", "--ensemble", '{"components": [{"kind": "nope"}]}', "--quiet"]
        )
        assert rc == 2

    def test_mc_figure(self, tmp_path):
        out = tmp_path / "mc.json"
        spec = json.dumps(
            {"components": [{"kind": "diag_spikes", "spikes": [1.0], "scale": 0.0}]}
        )
        rc = cli.main(
            ["mc", "--ensemble", spec, "-K", "2", "--ngrid", "8,16,32",
             "--samples", "4", "-o", str(out), "--quiet"]
        )
        assert rc == 0
        assert (tmp_path / "mc.png").exists()


class TestExamples:
    def test_lists_models(self, capsys):
        rc, p = run_json(capsys, "examples")
        assert rc == 0
        names = [e["name"] for e in p["result"]]
        assert "gue" in names and "aztec" in names
        assert len(names) == 11
        assert all(e["sample_command"].startswith("freecorr ") for e in p["result"])


class TestConfig:
    def test_command_in_config(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"command": "moments", "model": "gue", "kmax": 4}))
        rc, p = run_json(capsys, "--config", str(cfg))
        assert rc == 0
        assert p["result"]["orders"][0] == [0, 1, 0, 2]

    def test_explicit_flag_beats_config(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"model": "gue", "kmax": 4}))
        rc, p = run_json(capsys, "moments", "--config", str(cfg), "-K", "2")
        assert rc == 0
        assert len(p["result"]["orders"][0]) == 2

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"model": "gue", "bogus": 1}))
        assert cli.main(["moments", "--config", str(cfg), "--quiet"]) == 2

    def test_config_missing_file(self):
        assert cli.main(["moments", "--config", "/nonexistent.json"]) == 2

    def test_config_needs_value(self):
        assert cli.main(["moments", "--model", "gue", "--config"]) == 2

    def test_config_must_be_object(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("[1, 2]")
        assert cli.main(["--config", str(cfg)]) == 2

    def test_config_without_command_anywhere(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"model": "gue"}))
        assert cli.main(["--config", str(cfg)]) == 2


class TestExitCodes:
    def test_numeric_failure_is_three(self):
        # fraction=0 sends a divide-by-zero through the profile builder
        rc = cli.main(
            ["moments", "--model", "aztec", "--param", "fraction=0", "--quiet"]
        )
        assert rc == 3

    def test_unknown_model(self):
        assert cli.main(["moments", "--model", "nope", "--quiet"]) == 2

    def test_bad_param_syntax(self):
        rc = cli.main(["moments", "--model", "gue", "--param", "oops", "--quiet"])
        assert rc == 2

    def test_unknown_param_name(self):
        rc = cli.main(["moments", "--model", "gue", "--param", "zeta=1", "--quiet"])
        assert rc == 2

    def test_argparse_error(self):
        assert cli.main(["moments", "--bogus"]) == 2

    def test_no_command(self):
        assert cli.main([]) == 2

    def test_help_exits_zero(self):
        assert cli.main(["--help"]) == 0


class TestStableSerialization:
    def test_float_rendering(self):
        assert cli.format_float(0.1) == "0.10000000000000001"
        assert cli.format_float(1.0) == "1"
        assert cli.format_float(float("nan")) == "NaN"
        assert cli.format_float(float("-inf")) == "-Infinity"

    def test_dumps_handles_bool_before_int(self):
        assert cli.dumps_stable(True) == "true"
        assert cli.dumps_stable(1) == "1"

    def test_dumps_rejects_unknown_types(self):
        with pytest.raises(TypeError):
            cli.dumps_stable(object())

    def test_roundtrip_parses(self):
        obj = {"a": [1.5, None, True], "b": {"c": "text"}, "d": []}
        assert json.loads(cli.dumps_stable(obj)) == obj
