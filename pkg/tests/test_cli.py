"""Command line contract: subcommands, JSON outputs, and exit codes.

Exit codes: 0 pass, 1 violations or negative findings, 2 bad input,
3 cap exceeded.
"""

import json

import pytest

from fpmap import fpcore
from fpmap.cli import main, render_report
from fpmap.extraction import convergent_line_space
from fpmap.fpcore import GroupElement, Truncation, set_prime_cap
from fpmap import jsonio


@pytest.fixture(autouse=True)
def _restore_prime_cap():
    yield
    set_prime_cap(fpcore.DEFAULT_PRIME_CAP)


def write_json(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def graded_run_cfg():
    return {
        "prime": 2,
        "dim": 4,
        "norm": {"kind": "cost_completion", "prime": 2, "dim": 4,
                 "seed": 0, "graded": True},
        "limits": {"l": 1, "m": 4},
    }


def violating_table_norm():
    tr = Truncation(2, 2)
    both = tr.rank_of(GroupElement.make(2, [(1, 1), (2, 1)]))
    entries = []
    for r in range(1, tr.size):
        value = "1/1" if r == both else "1/3"
        entries.append({"element": jsonio.element_to_pairs(tr.element_of(r)),
                        "value": value})
    return {"kind": "table", "prime": 2, "dim": 2, "entries": entries}


def stdout_doc(capsys):
    out = capsys.readouterr().out
    return json.loads(out)


class TestRun:
    def test_pass_run_to_stdout(self, tmp_path, capsys):
        cfg = write_json(tmp_path / "run.json", graded_run_cfg())
        assert main(["run", "--config", cfg]) == 0
        doc = stdout_doc(capsys)
        assert doc["verdict"] == "pass"
        assert doc["timings"] is None

    def test_out_file_and_timings_on_stderr(self, tmp_path, capsys):
        cfg = write_json(tmp_path / "run.json", graded_run_cfg())
        out = tmp_path / "report.json"
        assert main(["run", "--config", cfg, "--out", str(out)]) == 0
        captured = capsys.readouterr()
        assert captured.out == ""
        assert "timing axioms:" in captured.err
        doc = json.loads(out.read_text())
        assert doc["verdict"] == "pass"

    def test_byte_identical_across_invocations(self, tmp_path):
        cfg = write_json(tmp_path / "run.json", graded_run_cfg())
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["run", "--config", cfg, "--out", str(out1)]) == 0
        assert main(["run", "--config", cfg, "--out", str(out2), "--threads", "2"]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_include_timings_embeds_floats(self, tmp_path):
        cfg = write_json(tmp_path / "run.json", graded_run_cfg())
        out = tmp_path / "timed.json"
        assert main(["run", "--config", cfg, "--out", str(out),
                     "--include-timings"]) == 0
        doc = json.loads(out.read_text())
        assert isinstance(doc["timings"]["reduction"], float)

    def test_violations_exit_one(self, tmp_path):
        run = {"prime": 2, "dim": 2, "norm": violating_table_norm(),
               "limits": {"m": 2}}
        cfg = write_json(tmp_path / "viol.json", run)
        out = tmp_path / "report.json"
        assert main(["run", "--config", cfg, "--out", str(out)]) == 1
        doc = json.loads(out.read_text())
        assert doc["verdict"] == "fail"
        assert doc["stages"]["axioms"]["violations"]

    def test_exhausted_exit_one_with_error_field(self, tmp_path):
        run = {
            "prime": 2, "dim": 4,
            "norm": {"kind": "cost_completion", "prime": 2, "dim": 4, "seed": 0,
                     "low": "1/262144", "high": "1/8192"},
            "limits": {"m": 4},
        }
        cfg = write_json(tmp_path / "run.json", run)
        out = tmp_path / "report.json"
        assert main(["run", "--config", cfg, "--out", str(out)]) == 1
        doc = json.loads(out.read_text())
        assert doc["error"]["kind"] == "exhausted"
        assert doc["stages"]["selection"] is None


class TestInputAndCapExits:
    def test_missing_file(self, capsys):
        assert main(["validate-norm", "--config", "/nonexistent/cfg.json"]) == 2
        assert "error:" in capsys.readouterr().err

    def test_invalid_json(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{broken")
        assert main(["validate-norm", "--config", str(path)]) == 2
        assert "invalid JSON" in capsys.readouterr().err

    def test_non_prime(self, tmp_path, capsys):
        cfg = write_json(tmp_path / "n.json",
                         {"kind": "ultrametric", "prime": 6, "dim": 3})
        assert main(["validate-norm", "--config", cfg]) == 2
        assert "not prime" in capsys.readouterr().err

    def test_unknown_config_key(self, tmp_path):
        cfg = write_json(tmp_path / "n.json",
                         {"kind": "ultrametric", "prime": 2, "dim": 3, "speed": 9})
        assert main(["validate-norm", "--config", cfg]) == 2

    def test_enum_cap_exit_three(self, tmp_path, capsys):
        run = dict(graded_run_cfg(), caps={"enum": 5})
        cfg = write_json(tmp_path / "run.json", run)
        assert main(["run", "--config", cfg]) == 3
        assert "cap 5" in capsys.readouterr().err


class TestEnvOverrides:
    def test_enum_cap_env_beats_config(self, tmp_path, monkeypatch):
        monkeypatch.setenv("FPMAP_ENUM_CAP", "5")
        cfg = write_json(tmp_path / "run.json",
                         dict(graded_run_cfg(), caps={"enum": 1000}))
        assert main(["run", "--config", cfg]) == 3

    def test_bad_env_value(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("FPMAP_ENUM_CAP", "banana")
        cfg = write_json(tmp_path / "n.json",
                         {"kind": "ultrametric", "prime": 2, "dim": 3})
        assert main(["validate-norm", "--config", cfg]) == 2
        assert "FPMAP_ENUM_CAP" in capsys.readouterr().err

    def test_prime_cap_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("FPMAP_PRIME_CAP", "3")
        cfg = write_json(tmp_path / "n.json",
                         {"kind": "ultrametric", "prime": 5, "dim": 2})
        assert main(["validate-norm", "--config", cfg]) == 2

    def test_matching_cap_env_reaches_graev(self, tmp_path, monkeypatch):
        monkeypatch.setenv("FPMAP_MATCHING_CAP", "2")
        space = convergent_line_space(2)
        cfg = write_json(tmp_path / "g.json",
                         {"kind": "graev_boolean", "space": space.to_json_dict()})
        assert main(["validate-norm", "--config", cfg]) == 3


class TestValidateNorm:
    def test_clean_norm(self, tmp_path, capsys):
        cfg = write_json(tmp_path / "n.json",
                         {"kind": "ultrametric", "prime": 2, "dim": 3})
        assert main(["validate-norm", "--config", cfg]) == 0
        doc = stdout_doc(capsys)
        assert doc["ok"] is True
        assert doc["violations"] == []

    def test_violating_norm(self, tmp_path, capsys):
        cfg = write_json(tmp_path / "n.json", violating_table_norm())
        assert main(["validate-norm", "--config", cfg]) == 1
        doc = stdout_doc(capsys)
        assert doc["ok"] is False
        assert doc["violations"][0]["axiom"] == 3

    def test_entries_as_mapping_is_input_error(self, tmp_path, capsys):
        cfg = write_json(tmp_path / "n.json",
                         {"kind": "table", "prime": 2, "dim": 2,
                          "entries": {"10": "1/3", "01": "1/3", "11": "1/1"}})
        assert main(["validate-norm", "--config", cfg]) == 2
        assert "entries must be a JSON array" in capsys.readouterr().err


class TestReduceVerify:
    def test_reduce_then_verify_roundtrip(self, tmp_path, capsys):
        norm_cfg = {"kind": "cost_completion", "prime": 2, "dim": 4,
                    "seed": 0, "graded": True}
        cfg = write_json(tmp_path / "n.json", norm_cfg)
        red = tmp_path / "red.json"
        assert main(["reduce", "--config", cfg, "--out", str(red)]) == 0
        doc = json.loads(red.read_text())
        assert doc["norm"] == norm_cfg
        assert len(doc["reduced"]["steps"]) == 4
        assert main(["verify", "--reduced", str(red)]) == 0
        ver = stdout_doc(capsys)
        assert ver["properties"]["ok"] is True
        assert ver["member_word_bound"]["ok"] is True
        assert ver["pair_domination"]["ok"] is True

    def test_lemma_selection(self, tmp_path, capsys):
        cfg = write_json(tmp_path / "n.json",
                         {"kind": "ultrametric", "prime": 2, "dim": 3})
        assert main(["verify", "--config", cfg, "--lemma", "1",
                     "--limits", "n=3"]) == 0
        doc = stdout_doc(capsys)
        assert doc["properties"] is None
        assert doc["pair_domination"] is None
        assert "up to 3 distinct" in doc["member_word_bound"]["domain"]

    def test_bad_limits_token(self, tmp_path, capsys):
        cfg = write_json(tmp_path / "n.json",
                         {"kind": "ultrametric", "prime": 2, "dim": 3})
        assert main(["verify", "--config", cfg, "--limits", "q=4"]) == 2
        assert "unknown limit" in capsys.readouterr().err
        assert main(["verify", "--config", cfg, "--limits", "n=x"]) == 2

    def test_verify_needs_a_source(self, capsys):
        assert main(["verify"]) == 2
        assert "--config or --reduced" in capsys.readouterr().err


class TestExtractModulus:
    def test_extract_graded(self, tmp_path, capsys):
        cfg = write_json(tmp_path / "n.json",
                         {"kind": "cost_completion", "prime": 2, "dim": 4,
                          "seed": 0, "graded": True})
        assert main(["extract", "--config", cfg, "--length", "4"]) == 0
        doc = stdout_doc(capsys)
        assert doc["selection"]["maxes"] == [1, 2, 3, 4]
        assert doc["family"]["indices"] == [1, 2, 3, 4]

    def test_extract_exhaustion_is_a_finding(self, tmp_path, capsys):
        cfg = write_json(tmp_path / "n.json",
                         {"kind": "ultrametric", "prime": 2, "dim": 3})
        assert main(["extract", "--config", cfg, "--length", "2"]) == 1
        assert "finding:" in capsys.readouterr().err

    def test_modulus_chain(self, tmp_path, capsys):
        cfg = write_json(tmp_path / "n.json",
                         {"kind": "cost_completion", "prime": 2, "dim": 4,
                          "seed": 0, "graded": True})
        assert main(["modulus", "--config", cfg, "--l", "1", "--m", "4"]) == 0
        doc = stdout_doc(capsys)
        assert doc["ok"] is True
        assert doc["delta"] == "1/8"


class TestDuality:
    def topo(self, tmp_path):
        return write_json(tmp_path / "topo.json", {
            "kind": "elements", "prime": 2, "dim": 3,
            "base": [[[[3, 1]]]],
        })

    def test_map_report(self, tmp_path, capsys):
        assert main(["duality", "--check", "map", "--spec", self.topo(tmp_path),
                     "--prime", "2", "--dim", "3"]) == 0
        doc = stdout_doc(capsys)
        assert doc["is_map"] is False
        assert doc["kernel_basis"] == [[[3, 1]]]

    def test_kernel_report(self, tmp_path, capsys):
        assert main(["duality", "--check", "kernel",
                     "--spec", self.topo(tmp_path)]) == 0
        doc = stdout_doc(capsys)
        assert doc == {"dim": 3, "kernel_basis": [[[3, 1]]], "prime": 2}

    def test_prime_cross_check(self, tmp_path, capsys):
        assert main(["duality", "--check", "map", "--spec", self.topo(tmp_path),
                     "--prime", "3"]) == 2
        assert "does not match" in capsys.readouterr().err

    def test_coarser_uses_run_config(self, tmp_path, capsys):
        cfg = write_json(tmp_path / "run.json", graded_run_cfg())
        assert main(["duality", "--check", "coarser", "--spec", cfg]) == 0
        doc = stdout_doc(capsys)
        assert doc["violations"] == []
        assert doc["m"] == 4


class TestDemoAndReport:
    def test_demo_boolean(self, capsys):
        assert main(["demo-boolean", "--points", "100"]) == 0
        doc = stdout_doc(capsys)
        assert doc["certificate"]["counterexample"] is True
        assert doc["certificate"]["min_bad_value"] == "1/9900"

    def test_demo_boolean_bad_points(self, capsys):
        assert main(["demo-boolean", "--points", "1"]) == 2

    def test_report_renders_pass(self, tmp_path, capsys):
        cfg = write_json(tmp_path / "run.json", graded_run_cfg())
        out = tmp_path / "report.json"
        main(["run", "--config", cfg, "--out", str(out)])
        capsys.readouterr()
        assert main(["report", str(out)]) == 0
        text = capsys.readouterr().out
        assert "verdict: pass" in text
        assert "reduction: 4 steps" in text
        assert "modulus: l=1 m=4" in text

    def test_report_fail_exit(self, tmp_path, capsys):
        run = {"prime": 2, "dim": 2, "norm": violating_table_norm(),
               "limits": {"m": 2}}
        cfg = write_json(tmp_path / "viol.json", run)
        out = tmp_path / "report.json"
        main(["run", "--config", cfg, "--out", str(out)])
        capsys.readouterr()
        assert main(["report", str(out)]) == 1
        text = capsys.readouterr().out
        assert "verdict: fail" in text
        assert "reduction: (not run)" in text

    def test_render_report_shows_error(self):
        doc = {
            "verdict": "fail",
            "config": {"prime": 2, "dim": 4, "norm": {"kind": "cost_completion"}},
            "error": {"stage": "selection", "kind": "exhausted",
                      "message": "no qualifying subsequence"},
            "stages": {k: None for k in (
                "axioms", "reduction", "properties", "member_word_bound",
                "pair_domination", "selection", "family", "modulus", "coarser")},
            "timings": None,
        }
        text = render_report(doc)
        assert "stopped at stage selection" in text
        assert "axioms: (not run)" in text
