import json

import numpy as np
import pytest

from racos.cli import build_parser, main
from racos.io import write_dense_csv, write_masked_csv
from racos.pipelines import RacosIParams, RacosNParams
from racos.sampling import RngSeed
from racos.synth import make_incomplete_problem, make_noisy_problem


class TestExitCodes:
    def test_no_arguments_is_usage_error(self, capsys):
        assert main([]) == 1
        assert "usage" in capsys.readouterr().err.lower()

    def test_unknown_flag_is_usage_error(self):
        assert main(["bounds", "--does-not-exist", "1"]) == 1

    def test_malformed_csv_is_computation_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("1.0,x\n")
        code = main(
            ["detect-noisy", "--input", str(bad), "--out", str(tmp_path / "r.json"), "--m", "4"]
        )
        assert code == 2
        assert "row 0, column 1" in capsys.readouterr().err


class TestDetectNoisy:
    def test_end_to_end_recovers_support(self, tmp_path, capsys):
        problem = make_noisy_problem(
            20, 50, k=5, r=2, seed=RngSeed(1), sigma_r=80.0, noise=("gaussian", 0.05)
        )
        matrix = tmp_path / "M.csv"
        out = tmp_path / "report.json"
        write_dense_csv(matrix, problem.m)
        code = main(
            [
                "detect-noisy",
                "--input", str(matrix),
                "--out", str(out),
                "--gamma", "0.5",
                "--m", "12",
                "--q", "8",
                "--lambda", "0.4",
                "--alpha-energy", "0.99",
                "--eps2", "auto",
                "--seed", "7",
            ]
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert report["estimated_outliers"] == problem.truth.to_list()
        assert len(report["residuals"]) == 50
        assert report["measurement_count"] > 0

    def test_matches_library_call(self, tmp_path):
        problem = make_noisy_problem(16, 30, k=3, r=2, seed=RngSeed(2), sigma_r=60.0)
        matrix = tmp_path / "M.csv"
        out = tmp_path / "report.json"
        write_dense_csv(matrix, problem.m)
        main(
            ["detect-noisy", "--input", str(matrix), "--out", str(out),
             "--gamma", "0.5", "--m", "8", "--seed", "3"]
        )
        from racos.pipelines import racos_n
        from racos.solvers import SolverOptions

        params = RacosNParams(gamma=0.5, m=8, q=0, seed=RngSeed(3), solver=SolverOptions())
        direct = racos_n(problem.m, params)
        report = json.loads(out.read_text())
        assert report["estimated_outliers"] == direct.estimated_outliers.to_list()


class TestDetectMissing:
    def test_end_to_end(self, tmp_path):
        problem = make_incomplete_problem(40, 80, k=8, r=2, p=0.8, seed=RngSeed(4))
        matrix = tmp_path / "M.csv"
        out = tmp_path / "report.json"
        write_masked_csv(matrix, problem.m)
        code = main(
            [
                "detect-missing",
                "--input", str(matrix),
                "--out", str(out),
                "--gamma1", "0.8",
                "--gamma2", "0.5",
                "--rho", "0.9",
                "--floor-rel", "1e-4",
                "--seed", "5",
            ]
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert report["estimated_outliers"] == problem.truth.to_list()
        assert report["sampled_rows"] is not None


class TestSynthCommand:
    def test_writes_files(self, tmp_path):
        out_dir = tmp_path / "problem"
        code = main(
            [
                "synth", "--kind", "noisy", "--n1", "12", "--n2", "24", "--k", "3",
                "--r", "2", "--noise", "gaussian", "--sigma", "0.1",
                "--seed", "9", "--out-dir", str(out_dir),
            ]
        )
        assert code == 0
        assert (out_dir / "M.csv").exists()
        truth = json.loads((out_dir / "truth.json").read_text())
        assert truth["outliers"] == [21, 22, 23]
        meta = json.loads((out_dir / "meta.json").read_text())
        assert meta["r"] == 2

    def test_incomplete_writes_nan_tokens(self, tmp_path):
        out_dir = tmp_path / "problem"
        main(
            [
                "synth", "--kind", "incomplete", "--n1", "10", "--n2", "20", "--k", "2",
                "--r", "2", "--p", "0.5", "--seed", "9", "--out-dir", str(out_dir),
            ]
        )
        assert "NaN" in (out_dir / "M.csv").read_text()


class TestBoundsCommand:
    def test_matches_calculators(self, capsys):
        code = main(
            ["bounds", "--n1", "100", "--n2", "1000", "--n-l", "800", "--r", "5",
             "--mu-v", "1", "--delta", "0.1"]
        )
        assert code == 0
        table = json.loads(capsys.readouterr().out)
        from racos.bounds import TheoryInputs, k_upper_noisy, m_lower

        inputs = TheoryInputs(n1=100, n2=1000, n_l=800, r=5, mu_v=1.0, delta=0.1)
        assert table["k_upper_noisy"] == pytest.approx(k_upper_noisy(inputs))
        assert table["m_lower"] == pytest.approx(m_lower(inputs))
        assert table["tau2_lower"] is None  # inputs insufficient


class TestSweepCommand:
    def test_sweep_from_config_file(self, tmp_path, capsys):
        config = {
            "kind": "noisy",
            "problem": {"n1": 14, "n2": 30, "k": 3, "r": 2, "sigma_r": 40.0,
                        "noise": ["gaussian", 0.05]},
            "algorithm": {"gamma": 0.5, "m": 8, "q": 0,
                          "solver": {"max_iters": 400,
                                     "primal_tolerance": 1e-6, "dual_tolerance": 1e-6}},
            "sweep_name": "sigma_r",
            "sweep_values": [5.0, 40.0],
            "trials": 2,
            "base_seed": 3,
            "success_rule": "separation",
        }
        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps(config))
        out = tmp_path / "sweep.csv"
        assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("param,value,rescaled_value")
        assert len(lines) == 3


class TestBenchCommand:
    def test_bench_noisy_prints_json(self, capsys):
        code = main(
            ["bench", "--kind", "noisy", "--n1", "20", "--n2", "40", "--r", "2",
             "--k", "4", "--m", "6", "--gamma", "0.3", "--trials", "1", "--seed", "2"]
        )
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert set(out) == {"racos_mean_ms", "full_mean_ms", "speedup"}


class TestHelpDefaults:
    def test_documented_defaults_match_module_defaults(self):
        parser = build_parser()
        sub = {
            a.dest: a for a in parser._subparsers._group_actions[0].choices["detect-noisy"]._actions
        }
        n_defaults = RacosNParams(gamma=0.2, m=1)
        assert sub["lam"].default == n_defaults.lambda_policy[1]
        assert sub["alpha_energy"].default == n_defaults.alpha_policy[1]
        assert sub["eps1"].default == n_defaults.epsilon1
        sub_i = {
            a.dest: a
            for a in parser._subparsers._group_actions[0].choices["detect-missing"]._actions
        }
        i_defaults = RacosIParams(gamma1=0.5, gamma2=0.3)
        assert sub_i["lam"].default == i_defaults.lambda_policy[1]
        assert sub_i["floor_rel"].default == i_defaults.residual_floor_rel
        from racos.solvers import SolverOptions

        assert sub["max_iters"].default == SolverOptions().max_iters
        assert sub["tol"].default == SolverOptions().primal_tolerance
