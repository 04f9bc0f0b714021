import os

import numpy as np
import pytest

from sparsedepth.bench import (
    ExperimentConfig,
    SweepSpec,
    bilinear_baseline,
    config_from_mapping,
    emit_convergence,
    load_input,
    parse_config_file,
    run_experiment,
    run_sweep,
)
from sparsedepth.bench.cli import main
from sparsedepth.errors import ConfigError, ParameterError
from sparsedepth.raster import Observation, synth_scene
from sparsedepth.sampling import grid_pattern

FAST = dict(input="synth:ellipse:64x64:3", xi=0.3, tol=1e-2, max_iter=60, seed=4)


class TestConfig:
    def test_defaults_validate(self):
        ExperimentConfig().validate()

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            config_from_mapping({"xii": "0.2"})

    def test_bad_value_rejected(self):
        with pytest.raises(ConfigError):
            config_from_mapping({"trials": "many"})

    def test_file_parsing_with_comments(self, tmp_path):
        p = tmp_path / "exp.cfg"
        p.write_text("# experiment\nxi = 0.15\nsampling=grid\ntrials=3\n")
        cfg = parse_config_file(str(p))
        assert (cfg.xi, cfg.sampling, cfg.trials) == (0.15, "grid", 3)

    def test_overrides_beat_file(self, tmp_path):
        p = tmp_path / "exp.cfg"
        p.write_text("xi=0.15\n")
        cfg = parse_config_file(str(p))
        cfg = config_from_mapping({"xi": "0.4"}, cfg)
        assert cfg.xi == 0.4

    def test_missing_file_rejected(self):
        with pytest.raises(ConfigError):
            parse_config_file("/nonexistent/exp.cfg")

    def test_malformed_line_rejected(self, tmp_path):
        p = tmp_path / "exp.cfg"
        p.write_text("this is not a key value pair\n")
        with pytest.raises(ConfigError):
            parse_config_file(str(p))

    @pytest.mark.parametrize("kw", [
        {"sampling": "random"}, {"dicts": "both"}, {"xi": 0.0},
        {"trials": 0}, {"multiscale_q": 0}, {"noise_sigma": -0.1},
        {"workers": 0},
    ])
    def test_invalid_fields_rejected(self, kw):
        with pytest.raises(ConfigError):
            config_from_mapping({k: str(v) for k, v in kw.items()}).validate()

    def test_solver_params_follow_dict_choice(self):
        cfg = ExperimentConfig(dicts="wavelet", lambda1=1e-4, rho1=1e-2)
        p = cfg.solver_params()
        assert p.lam == (1e-4,) and p.rho == (1e-2,)
        assert len(ExperimentConfig(dicts="combined").solver_params().lam) == 2

    def test_sweep_spec_validation(self):
        SweepSpec("beta", 1e-4, 1e-2, 5).validate()
        with pytest.raises(ConfigError):
            SweepSpec("sigma", 1e-4, 1e-2, 5).validate()
        with pytest.raises(ConfigError):
            SweepSpec("beta", 1e-2, 1e-4, 5).validate()
        with pytest.raises(ConfigError):
            SweepSpec("beta", 1e-4, 1e-2, 1).validate()


class TestLoadInput:
    def test_synth_spec(self):
        x = load_input(ExperimentConfig(input="synth:ellipse:48x40:2"))
        assert x.shape == (40, 48)

    def test_file_input(self, tmp_path):
        from sparsedepth.raster import save_image
        # Round through float32 first: that is the precision the file holds.
        x = synth_scene("ellipse", 64, 64, 0).astype(np.float32).astype(np.float64)
        p = tmp_path / "scene.pfm"
        save_image(x, str(p), "pfm-float")
        assert np.array_equal(load_input(ExperimentConfig(input=str(p))), x)

    @pytest.mark.parametrize("spec", [
        "synth:ellipse:64x64", "synth:cube:64x64:0", "synth:ellipse:4x4:0",
        "/nonexistent.pgm",
    ])
    def test_bad_inputs_rejected(self, spec):
        with pytest.raises(ConfigError):
            load_input(ExperimentConfig(input=spec))


class TestRunExperiment:
    def test_deterministic_csv(self, tmp_path):
        cfg = ExperimentConfig(**FAST, trials=2, output_dir=str(tmp_path))
        _, csv1 = run_experiment(cfg)
        _, csv2 = run_experiment(cfg, write=False)
        assert csv1 == csv2
        assert (tmp_path / "results.csv").read_text() == csv1
        assert (tmp_path / "timings.csv").exists()

    def test_aggregates_match_recomputation(self):
        cfg = ExperimentConfig(**FAST, trials=3)
        results, csv_text = run_experiment(cfg, write=False)
        lines = csv_text.strip().splitlines()
        header, trials = lines[0].split(","), lines[1:4]
        mean_row = lines[4].split(",")
        data = np.array([[float(v) for v in t.split(",")[3:]] for t in trials])
        recomputed = data.mean(axis=0)
        reported = [float(v) for v in mean_row[3:]]
        assert np.allclose(recomputed, reported, rtol=1e-10)
        psnr_col = header.index("psnr_db")
        assert reported[psnr_col - 3] == pytest.approx(
            np.mean([r.report.psnr_db for r in results]), rel=1e-9)

    def test_full_sampling_sanity(self):
        cfg = ExperimentConfig(input="synth:ellipse:64x64:3", xi=1.0,
                               sampling="grid", trials=1, lambda1=1e-8,
                               lambda2=1e-8, beta=1e-8, tol=1e-6, max_iter=200)
        results, _ = run_experiment(cfg, write=False)
        assert results[0].report.psnr_db >= 60.0
        assert results[0].pattern.realized_ratio == 1.0

    def test_worker_pool_matches_serial(self):
        serial = run_experiment(ExperimentConfig(**FAST, trials=3), write=False)[1]
        pooled = run_experiment(ExperimentConfig(**FAST, trials=3, workers=3),
                                write=False)[1]
        assert serial == pooled


class TestRunSweep:
    def test_single_value_sweep_matches_experiment(self):
        cfg = ExperimentConfig(**FAST, trials=1)
        spec = SweepSpec("beta", 2e-3, 2e-3, 2)
        points, _ = run_sweep(spec, cfg, write=False)
        results, _ = run_experiment(cfg, write=False)
        for value, mean_mse, _, mean_iters in points:
            assert value == pytest.approx(2e-3)
            assert mean_mse == pytest.approx(results[0].report.mse, rel=1e-12)
            assert mean_iters == len(results[0].trace.iters)

    def test_csv_shape_and_determinism(self, tmp_path):
        cfg = ExperimentConfig(**FAST, trials=1, output_dir=str(tmp_path))
        spec = SweepSpec("lambda1", 1e-5, 1e-3, 3)
        _, csv1 = run_sweep(spec, cfg)
        _, csv2 = run_sweep(spec, cfg, write=False)
        assert csv1 == csv2
        lines = csv1.strip().splitlines()
        assert lines[0].startswith("param,value,input")
        assert len(lines) == 4
        assert (tmp_path / "sweep_lambda1.csv").exists()


class TestEmitConvergence:
    def test_trace_matches_iterations(self, tmp_path):
        cfg = ExperimentConfig(**FAST, trials=1, output_dir=str(tmp_path))
        result, csv_text = emit_convergence(cfg)
        rows = [l for l in csv_text.strip().splitlines()
                if not l.startswith(("#", "iter"))]
        assert len(rows) == len(result.trace.iters)
        final_rel = float(rows[-1].split(",")[2])
        assert final_rel < cfg.tol or len(rows) == cfg.max_iter

    def test_requires_single_trial(self):
        with pytest.raises(ConfigError):
            emit_convergence(ExperimentConfig(**FAST, trials=2), write=False)

    def test_multiscale_trace_annotated(self):
        cfg = ExperimentConfig(input="synth:ellipse:128x128:3", xi=0.3,
                               tol=1e-2, max_iter=40, trials=1, multiscale_q=2)
        _, csv_text = emit_convergence(cfg, write=False)
        assert csv_text.startswith("# level_starts=")


class TestBilinearBaseline:
    def test_reproduces_affine_surface_on_grid(self):
        yy, xx = np.mgrid[0:32, 0:32]
        truth = 0.2 + 0.01 * yy + 0.005 * xx
        pat = grid_pattern(truth.shape, 0.25)
        est = bilinear_baseline(Observation(values=pat.mask * truth, mask=pat.mask))
        # Linear interpolation is exact inside the hull of the sample grid
        # (rows/cols 0..30); the last row/column is nearest-filled.
        assert np.abs(est - truth)[:31, :31].max() < 1e-8
        assert np.abs(est - truth).max() < 0.02

    def test_needs_three_samples(self):
        mask = np.zeros((8, 8))
        mask[0, 0] = mask[3, 3] = 1
        with pytest.raises(ParameterError):
            bilinear_baseline(Observation(values=mask, mask=mask))


class TestCli:
    ARGS = ["--input", "synth:ellipse:64x64:3", "--xi", "0.3",
            "--tol", "1e-2", "--max-iter", "60"]

    def test_reconstruct_writes_artifacts(self, tmp_path, capsys):
        code = main(["reconstruct", *self.ARGS, "--output-dir", str(tmp_path)])
        assert code == 0
        assert (tmp_path / "estimate.pgm").exists()
        assert (tmp_path / "mask.pgm").exists()
        assert (tmp_path / "trace.csv").exists()
        assert "psnr=" in capsys.readouterr().out

    def test_sample_only(self, tmp_path, capsys):
        code = main(["sample", "--input", "synth:ellipse:64x64:3",
                     "--sampling", "grid", "--xi", "0.25",
                     "--output-dir", str(tmp_path)])
        assert code == 0
        assert (tmp_path / "mask.pgm").exists()
        assert (tmp_path / "probs.pfm").exists()

    def test_bench_runs(self, tmp_path, capsys):
        code = main(["bench", *self.ARGS, "--trials", "2",
                     "--output-dir", str(tmp_path)])
        assert code == 0
        assert (tmp_path / "results.csv").exists()

    def test_config_file_plus_override(self, tmp_path, capsys):
        p = tmp_path / "exp.cfg"
        p.write_text("input=synth:ellipse:64x64:3\nxi=0.3\ntol=1e-2\nmax_iter=60\n")
        code = main(["trace", "--config", str(p), "--output-dir", str(tmp_path)])
        assert code == 0
        assert (tmp_path / "trace.csv").exists()

    def test_config_error_exit_code(self, capsys):
        assert main(["bench", "--sampling", "bogus"]) == 2
        assert "config error" in capsys.readouterr().err

    def test_runtime_error_exit_code(self, capsys):
        # 64x64 cannot host a 2-level pyramid whose coarse level still
        # meets the transform divisibility requirement.
        code = main(["trace", *self.ARGS, "--multiscale-q", "2"])
        assert code == 3

    def test_reconstruct_rejects_multiple_trials(self, capsys):
        assert main(["reconstruct", *self.ARGS, "--trials", "3"]) == 2
