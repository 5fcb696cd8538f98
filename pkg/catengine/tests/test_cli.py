"""
Tests for the command-line front end.

These tests verify that:
1. Each subcommand writes its data file and manifest into --out
2. Usage, schema, zero-probability and reproduction failures map to their exit codes
3. --verify-oracle records the cross-checks in the simulate output
"""

import json
from unittest.mock import patch

import pandas as pd
import pytest

from catengine import cli
from catengine.report import find_manifest


def _write(tmp_path, document, name="scheme.json"):
    path = tmp_path / name
    path.write_text(json.dumps(document), encoding="utf-8")
    return path


def _fixed_vacuum(**overrides):
    document = {
        "input": {"kind": "vacuum"},
        "aux_photons": [1, 2],
        "bs_theta": [0.5, 0.9],
        "aux_alpha": [[0.0, 0.0], [0.0, 0.0]],
        "alpha0": 0.0,
    }
    document.update(overrides)
    return document


class TestScq:
    """catengine scq."""

    def test_single_beta(self, output_dir):
        """One row with the bound and the alpha used."""
        code = cli.main(["--out", str(output_dir), "scq", "--n", "4", "--parity", "even", "--beta", "1.5",
                         "--alpha-mode", "fixed"])
        assert code == cli.EXIT_OK
        frame = pd.read_csv(output_dir / "scq_n4_even.csv")
        assert list(frame.columns) == ["beta", "fidelity_upper_bound", "alpha_used"]
        assert len(frame) == 1
        assert 0.0 < frame["fidelity_upper_bound"][0] <= 1.0
        assert frame["alpha_used"][0] == 0.0
        assert find_manifest(output_dir / "scq_n4_even.csv").command.startswith("catengine --out")

    def test_range_with_roots(self, output_dir):
        """--emit-roots writes n roots per beta."""
        code = cli.main(["--out", str(output_dir), "scq", "--n", "5", "--parity", "odd",
                         "--beta-range", "1", "2", "0.5", "--alpha-mode", "fixed", "--emit-roots"])
        assert code == cli.EXIT_OK
        assert len(pd.read_csv(output_dir / "scq_n5_odd.csv")) == 3
        roots = pd.read_csv(output_dir / "scq_n5_odd_roots.csv")
        assert len(roots) == 15
        assert sorted(roots["index"].unique()) == [0, 1, 2, 3, 4]

    def test_empty_range(self, output_dir):
        """An empty beta range is a usage error."""
        code = cli.main(["--out", str(output_dir), "scq", "--n", "2", "--parity", "even", "--beta-range", "2", "1", "0.1"])
        assert code == cli.EXIT_USAGE

    def test_non_positive_beta(self, output_dir):
        """beta <= 0 is a usage error."""
        assert cli.main(["--out", str(output_dir), "scq", "--n", "2", "--parity", "even", "--beta", "0"]) == cli.EXIT_USAGE

    def test_missing_parity(self):
        """argparse rejects a missing required flag."""
        with pytest.raises(SystemExit) as excinfo:
            cli.main(["scq", "--n", "2", "--beta", "1"])
        assert excinfo.value.code == 2


class TestSimulate:
    """catengine simulate."""

    def test_vacuum_number_state(self, tmp_path, output_dir):
        """Vacuum input without displacements heralds |3>."""
        path = _write(tmp_path, _fixed_vacuum())
        assert cli.main(["--out", str(output_dir), "simulate", str(path)]) == cli.EXIT_OK
        payload = json.loads((output_dir / "simulate.json").read_text(encoding="utf-8"))
        assert payload["mean_photon_number"] == pytest.approx(3.0, abs=1e-10)
        assert payload["target"] is None
        assert abs(complex(*payload["result"]["amplitudes"][3])) == pytest.approx(1.0, abs=1e-10)

    def test_verify_oracle(self, tmp_path, output_dir):
        """Both oracles agree with the contraction."""
        document = _fixed_vacuum(
            input={"kind": "coherent", "gamma": [0.8, -0.2]},
            aux_alpha=[[0.3, 0.1], [-0.5, 0.4]],
            alpha0=0.6,
            target={"beta": 1.5, "parity": "odd"},
        )
        path = _write(tmp_path, document)
        assert cli.main(["--out", str(output_dir), "--verify-oracle", "simulate", str(path)]) == cli.EXIT_OK
        payload = json.loads((output_dir / "simulate.json").read_text(encoding="utf-8"))
        assert set(payload["oracle_checks"]) == {"polynomial_oracle", "analytic"}
        assert all(check["pass"] for check in payload["oracle_checks"].values())
        assert 0.0 <= payload["result"]["fidelity"] <= 1.0

    def test_verify_oracle_failure(self, tmp_path, output_dir):
        """A disagreeing oracle exits with the verification code."""
        path = _write(tmp_path, _fixed_vacuum())
        with patch.object(cli, "_verify_oracles", return_value={"analytic": {"pass": False}}):
            code = cli.main(["--out", str(output_dir), "--verify-oracle", "simulate", str(path)])
        assert code == cli.EXIT_FAILED

    def test_free_parameters_refused(self, tmp_path, output_dir):
        """simulate needs every parameter fixed."""
        path = _write(tmp_path, _fixed_vacuum(alpha0="free"))
        assert cli.main(["--out", str(output_dir), "simulate", str(path)]) == cli.EXIT_USAGE

    def test_malformed_json(self, tmp_path, output_dir):
        """Malformed JSON is a usage error."""
        path = tmp_path / "broken.json"
        path.write_text("{\"input\":", encoding="utf-8")
        assert cli.main(["--out", str(output_dir), "simulate", str(path)]) == cli.EXIT_USAGE

    def test_schema_violation(self, tmp_path, output_dir):
        """Mismatched lengths are a usage error."""
        path = _write(tmp_path, _fixed_vacuum(bs_theta=[0.5]))
        assert cli.main(["--out", str(output_dir), "simulate", str(path)]) == cli.EXIT_USAGE

    def test_missing_file(self, tmp_path, output_dir):
        """A missing config is a usage error."""
        assert cli.main(["--out", str(output_dir), "simulate", str(tmp_path / "absent.json")]) == cli.EXIT_USAGE

    def test_zero_probability(self, tmp_path, output_dir):
        """A heralding event that cannot happen exits with code 3."""
        path = _write(tmp_path, _fixed_vacuum(aux_photons=[1], bs_theta=[0.0], aux_alpha=[[0.0, 0.0]]))
        assert cli.main(["--out", str(output_dir), "simulate", str(path)]) == cli.EXIT_ZERO_PROBABILITY


    def test_cutoff_too_small(self, tmp_path, output_dir):
        """A cutoff below the photon budget is an engine error."""
        path = _write(tmp_path, _fixed_vacuum())
        assert cli.main(["--out", str(output_dir), "--cutoff", "2", "simulate", str(path)]) == cli.EXIT_ENGINE
        assert not (output_dir / "simulate.json").exists()


class TestHelp:
    """Top-level --help."""

    def test_lists_exit_codes(self, capsys):
        """Every exit code is documented."""
        with pytest.raises(SystemExit) as excinfo:
            cli.main(["--help"])
        assert excinfo.value.code == 0
        text = capsys.readouterr().out
        assert "exit codes:" in text
        for code in (cli.EXIT_OK, cli.EXIT_ENGINE, cli.EXIT_USAGE, cli.EXIT_ZERO_PROBABILITY, cli.EXIT_FAILED):
            assert f"\n  {code}  " in text


class TestOptimizeAndSweep:
    """catengine optimize and sweep with tiny budgets."""

    BUDGET = ["--restarts", "1", "--max-evaluations", "60", "--threads", "1", "--seed", "3"]

    def test_optimize(self, tmp_path, output_dir):
        """The result lists every free parameter in search-vector order."""
        document = {"input": {"kind": "vacuum"}, "aux_photons": [1, 1], "target": {"beta": 1.0, "parity": "even"}}
        path = _write(tmp_path, document)
        assert cli.main(["--out", str(output_dir), *self.BUDGET, "optimize", str(path)]) == cli.EXIT_OK
        payload = json.loads((output_dir / "optimize.json").read_text(encoding="utf-8"))
        assert [name for name, _ in payload["parameters"]] == [
            "theta_1", "theta_2", "re_alpha_1", "re_alpha_2", "im_alpha_1", "im_alpha_2", "alpha_0",
        ]
        thetas = [value for name, value in payload["parameters"] if name.startswith("theta_")]
        assert all(0.0 < value < 1.6 for value in thetas)
        assert payload["seed"] == 3
        assert find_manifest(output_dir / "optimize.json").seed == 3

    def test_optimize_needs_target(self, tmp_path, output_dir):
        """Without a target there is nothing to optimize."""
        path = _write(tmp_path, {"input": {"kind": "vacuum"}, "aux_photons": [1]})
        assert cli.main(["--out", str(output_dir), "optimize", str(path)]) == cli.EXIT_USAGE

    def test_sweep(self, tmp_path, output_dir):
        """One row per beta with bounds and a gnuplot script."""
        path = _write(tmp_path, {"input": {"kind": "vacuum"}, "aux_photons": [1, 1]})
        code = cli.main(["--out", str(output_dir), *self.BUDGET, "sweep", str(path),
                         "--beta-range", "1", "1.5", "0.5", "--parity", "even", "--gnuplot"])
        assert code == cli.EXIT_OK
        frame = pd.read_csv(output_dir / "sweep_even.csv")
        assert list(frame["beta"]) == [1.0, 1.5]
        assert {"parity", "fidelity", "scq_bound_alpha0", "scq_bound_maximized"} <= set(frame.columns)
        assert (output_dir / "sweep_even.gp").exists()

    def test_sweep_empty_range(self, tmp_path, output_dir):
        """An empty range exits 2 before any optimization."""
        path = _write(tmp_path, {"input": {"kind": "vacuum"}, "aux_photons": [1, 1]})
        code = cli.main(["--out", str(output_dir), "sweep", str(path), "--beta-range", "2", "2", "0.1", "--parity", "odd"])
        assert code == cli.EXIT_USAGE

    def test_sweep_needs_parity(self, tmp_path, output_dir):
        """Parity comes from the flag or the config target."""
        path = _write(tmp_path, {"input": {"kind": "vacuum"}, "aux_photons": [1, 1]})
        code = cli.main(["--out", str(output_dir), "sweep", str(path), "--beta-range", "1", "2", "0.5"])
        assert code == cli.EXIT_USAGE


class TestReproduce:
    """catengine reproduce with the recipe runner mocked."""

    def _outcome(self, passed):
        frame = pd.DataFrame({"case": ["4-4"], "parity": ["even"], "beta": [1.5], "fidelity": [0.97]})
        return {"tables": {"fig3": frame}, "passed": passed, "ratios": {}}

    def test_failure_exit_code(self, output_dir):
        """A failing recipe exits with code 4."""
        with patch.object(cli, "run_recipe", return_value=self._outcome(False)):
            assert cli.main(["--out", str(output_dir), "reproduce", "table1"]) == cli.EXIT_FAILED

    def test_success_with_outputs(self, output_dir):
        """Passing recipes write CSVs, gnuplot scripts and the workbook."""
        with patch.object(cli, "run_recipe", return_value=self._outcome(True)) as runner:
            code = cli.main(["--out", str(output_dir), "reproduce", "fig3", "--gnuplot", "--xlsx"])
        assert code == cli.EXIT_OK
        runner.assert_called_once()
        assert (output_dir / "fig3.csv").exists()
        assert (output_dir / "fig3.gp").exists()
        assert (output_dir / "reproduce.xlsx").exists()

    def test_all_runs_every_recipe(self, output_dir):
        """'all' expands to every recipe name."""
        with patch.object(cli, "run_recipe", return_value=self._outcome(None)) as runner:
            assert cli.main(["--out", str(output_dir), "reproduce", "all"]) == cli.EXIT_OK
        assert sorted(call.args[0] for call in runner.call_args_list) == sorted(cli.RECIPES)

    def test_unknown_recipe(self):
        """argparse rejects unknown recipe names."""
        with pytest.raises(SystemExit):
            cli.main(["reproduce", "table9"])
