"""Boundary fidelity: binding output equals CLI output on shared fixtures.

Every fixture is serialized to NPY files and pushed through the
`miprune select` / `miprune score` CLI in a subprocess; the binding runs
on the same arrays in memory. Indices must match exactly, scores to 1e-9.
"""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

import miprune_bindings as mb
from miprune import EmbeddingMatrix, save_array

N_FIXTURES = 50


def fixture_case(seed):
    rng = np.random.default_rng(9000 + seed)
    n = int(rng.integers(3, 60))
    t = int(rng.integers(2, 8))
    d = int(rng.integers(2, 24))
    visual = rng.normal(size=(n, d))
    text = rng.normal(size=(t, d))
    config = {
        "budget": int(rng.integers(1, n + 1)),
        "tau": float(rng.choice([0.05, 0.1, 0.5])),
        "lambda_": float(rng.choice([1.0, 0.75, 0.5, 0.0])),
        "aggregation": str(rng.choice(["max", "global"])),
        "normalization": str(rng.choice(["softmax", "minmax"])),
    }
    return visual, text, config


def run_cli(command, v_path, t_path, config, tmp_path):
    args = [
        sys.executable, "-m", "miprune.cli", command, str(v_path), str(t_path),
        "--budget", str(config["budget"]), "--tau", str(config["tau"]),
        "--lambda", str(config["lambda_"]), "--agg", config["aggregation"],
        "--norm", config["normalization"],
    ]
    env = dict(os.environ)
    env.pop("MIPRUNE_THREADS", None)
    proc = subprocess.run(args, capture_output=True, env=env)
    assert proc.returncode == 0, proc.stderr.decode()
    return json.loads(proc.stdout)


@pytest.mark.parametrize("seed", range(N_FIXTURES))
def test_select_matches_cli(seed, tmp_path):
    visual, text, config = fixture_case(seed)
    v_path, t_path = tmp_path / "V.npy", tmp_path / "T.npy"
    save_array(EmbeddingMatrix(visual), v_path)
    save_array(EmbeddingMatrix(text, kind="textual"), t_path)

    cli = run_cli("select", v_path, t_path, config, tmp_path)
    kept, step_scores = mb.select(visual, text, **config)

    assert kept == cli["kept_indices"]
    np.testing.assert_allclose(step_scores, cli["step_scores"], atol=1e-9)


@pytest.mark.parametrize("seed", range(0, N_FIXTURES, 5))
def test_score_matches_cli(seed, tmp_path):
    visual, text, config = fixture_case(seed)
    v_path, t_path = tmp_path / "V.npy", tmp_path / "T.npy"
    save_array(EmbeddingMatrix(visual), v_path)
    save_array(EmbeddingMatrix(text, kind="textual"), t_path)

    cli = run_cli("score", v_path, t_path, config, tmp_path)
    out = mb.score(visual, text, **config)

    np.testing.assert_allclose(out["cross_scores"], cli["cross_scores"], atol=1e-9)
    if config["lambda_"] < 1.0:
        assert out["kept_indices"] == cli["kept_indices"]
        np.testing.assert_allclose(
            out["self_max_scores"], cli["self_max_scores"], atol=1e-9
        )
    else:
        assert "self_max_scores" not in out


class TestValidation:
    def test_budget_covering_everything(self):
        rng = np.random.default_rng(1)
        kept, _ = mb.select(rng.normal(size=(6, 4)), rng.normal(size=(2, 4)),
                            budget=6)
        assert sorted(kept) == list(range(6))

    def test_lambda_out_of_range(self):
        rng = np.random.default_rng(2)
        with pytest.raises(ValueError, match="lambda"):
            mb.select(rng.normal(size=(4, 3)), rng.normal(size=(2, 3)),
                      budget=2, lambda_=1.5)

    def test_dim_mismatch(self):
        rng = np.random.default_rng(3)
        with pytest.raises(ValueError, match="dims differ"):
            mb.select(rng.normal(size=(4, 3)), rng.normal(size=(2, 5)), budget=2)

    def test_rejects_non_float(self):
        with pytest.raises(TypeError):
            mb.select(np.ones((3, 2), dtype=np.int64), np.ones((2, 2)), budget=1)

    def test_rejects_1d(self):
        with pytest.raises(ValueError, match="2-D"):
            mb.select(np.ones(4), np.ones((2, 2)), budget=1)

    def test_unknown_config_key(self):
        rng = np.random.default_rng(4)
        with pytest.raises(TypeError, match="unknown config"):
            mb.select(rng.normal(size=(3, 2)), rng.normal(size=(2, 2)),
                      budget=1, temperature=0.1)

    def test_float32_accepted(self):
        rng = np.random.default_rng(5)
        v64 = rng.normal(size=(8, 4))
        t64 = rng.normal(size=(2, 4))
        kept64, scores64 = mb.select(v64, t64, budget=3)
        kept32, scores32 = mb.select(
            v64.astype(np.float32), t64.astype(np.float32), budget=3
        )
        # float32 inputs quantize the embeddings; selection still works and
        # stays close to the float64 run on well-separated scores
        assert len(kept32) == 3
        np.testing.assert_allclose(scores32, scores64, atol=1e-4)

    def test_default_budget_keeps_everything(self):
        rng = np.random.default_rng(6)
        kept, _ = mb.select(rng.normal(size=(5, 3)), rng.normal(size=(2, 3)))
        assert sorted(kept) == list(range(5))

    def test_equal_logit_scene_constant_scores(self):
        # identical visual rows: every conditional row matches, so every
        # token scores the same
        rng = np.random.default_rng(7)
        visual = np.tile(rng.normal(size=(1, 4)), (6, 1))
        out = mb.score(visual, rng.normal(size=(3, 4)), budget=2)
        np.testing.assert_allclose(out["cross_scores"],
                                   out["cross_scores"][0], atol=1e-12)
