import subprocess
import sys

import numpy as np
import pytest

from prune24.cli import main
from prune24.matio import load_matrix, save_matrix
from prune24.pruner import is_24_sparse


@pytest.fixture
def instance(tmp_path):
    w = tmp_path / "w.bin"
    h = tmp_path / "h.bin"
    assert main(["synth", "--d", "8", "--alpha", "0.5", "--seed", "1",
                 "--out-weights", str(w), "--out-hessian", str(h)]) == 0
    return w, h


@pytest.mark.parametrize("method", ["prox", "wanda", "wanda-gd", "sparsegpt",
                                    "sparsegpt-gd", "l0", "l1", "l2"])
def test_prune_all_methods(tmp_path, instance, method):
    w, h = instance
    out = tmp_path / "out.bin"
    mask = tmp_path / "mask.csv"
    code = main(["prune", "--method", method, "--weights", str(w), "--hessian", str(h),
                 "--out", str(out), "--mask-out", str(mask),
                 "--gd-steps", "50", "--max-iter", "400"])
    assert code == 0
    W = load_matrix(out)
    M = load_matrix(mask)
    assert is_24_sparse(W, eps=0.0)
    assert set(np.unique(M)) <= {0.0, 1.0}
    assert np.array_equal((np.abs(W) > 0).astype(float), M)


def test_prune_adaptive_lambda(tmp_path, instance):
    w, h = instance
    code = main(["prune", "--method", "prox", "--weights", str(w), "--hessian", str(h),
                 "--out", str(tmp_path / "o.bin"), "--mask-out", str(tmp_path / "m.bin"),
                 "--adaptive-lambda", "1e-3", "--gd-steps", "20"])
    assert code == 0


def test_eval_loss_roundtrip(tmp_path, instance, capsys):
    w, h = instance
    out = tmp_path / "out.bin"
    mask = tmp_path / "mask.bin"
    main(["prune", "--method", "wanda", "--weights", str(w), "--hessian", str(h),
          "--out", str(out), "--mask-out", str(mask)])
    assert main(["eval-loss", "--weights", str(out), "--ref-weights", str(w),
                 "--hessian", str(h)]) == 0
    loss = float(capsys.readouterr().out.strip())
    assert loss >= 0.0
    # identical files give zero loss
    assert main(["eval-loss", "--weights", str(w), "--ref-weights", str(w),
                 "--hessian", str(h)]) == 0
    assert float(capsys.readouterr().out.strip()) == 0.0


def test_prox_path_csv(tmp_path):
    out = tmp_path / "path.csv"
    code = main(["prox-path", "--z", "1.6,1.1,0.8,0.5", "--lambda-min", "0.01",
                 "--lambda-max", "2.0", "--points", "20", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "lambda,w1,w2,w3,w4,case,lambda2_threshold"
    assert len(lines) == 21
    assert lines[-1].split(",")[5] == "two_sparse"


def test_prox_path_bad_z(tmp_path):
    code = main(["prox-path", "--z", "1,2,3", "--lambda-min", "0.1",
                 "--lambda-max", "1.0", "--points", "5", "--out", str(tmp_path / "x.csv")])
    assert code == 1


def test_synth_csv_output(tmp_path):
    w = tmp_path / "w.csv"
    h = tmp_path / "h.csv"
    assert main(["synth", "--d", "8", "--alpha", "1.0", "--seed", "0",
                 "--out-weights", str(w), "--out-hessian", str(h)]) == 0
    H = load_matrix(h)
    assert H.shape == (8, 8)
    assert np.all(H[~np.eye(8, dtype=bool)] == 0.0)


def test_bench_command(tmp_path):
    out = tmp_path / "bench.csv"
    code = main(["bench", "--alphas", "1.0,0.5", "--d", "8", "--seeds", "2",
                 "--methods", "wanda,wanda-gd,sparsegpt", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "method,alpha,seed,loss,runtime_s,iterations"
    assert len(lines) == 1 + 2 * 2 * 3


def test_bench_rejects_unknown_method(tmp_path):
    code = main(["bench", "--alphas", "1.0", "--d", "8", "--seeds", "1",
                 "--methods", "nope", "--out", str(tmp_path / "b.csv")])
    assert code == 1


def test_toy_command(capsys):
    assert main(["toy", "--method", "wanda"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "method wanda"
    assert out[1] == "weights 0 5 3 0 0 5 5 0"
    assert out[2] == "mask 0 1 1 0 0 1 1 0"
    assert float(out[3].split()[1]) == pytest.approx(16.0)


def test_toy_prox_finds_better_mask(capsys):
    assert main(["toy", "--method", "prox", "--gd-steps", "400"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[2] == "mask 0 1 0 1 0 1 1 0"
    assert float(out[3].split()[1]) == pytest.approx(9.0, abs=1e-5)


def test_missing_file_is_one_line_error(tmp_path, capsys):
    code = main(["eval-loss", "--weights", "missing.bin",
                 "--ref-weights", "missing.bin", "--hessian", "missing.bin"])
    assert code == 1
    err = capsys.readouterr().err
    assert err.startswith("error:")
    assert len(err.strip().splitlines()) == 1


def test_console_entry_point(tmp_path):
    # exercise the installed script end to end in a subprocess
    r = subprocess.run([sys.executable, "-m", "prune24.cli", "toy", "--method", "l1"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert "loss" in r.stdout


def test_shape_mismatch_fails_cleanly(tmp_path, instance, capsys):
    w, h = instance
    bad = tmp_path / "bad.bin"
    save_matrix(bad, np.ones((2, 12)))
    code = main(["prune", "--method", "wanda", "--weights", str(bad), "--hessian", str(h),
                 "--out", str(tmp_path / "o.bin"), "--mask-out", str(tmp_path / "m.bin")])
    assert code == 1
    assert capsys.readouterr().err.startswith("error:")
