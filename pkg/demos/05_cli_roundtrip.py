"""Drive the CLI end to end: save matrices, select, score, render a mask.

Everything runs through subprocesses exactly as a shell user would; the
script leaves its artifacts in a scratch directory and prints them.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from miprune import EmbeddingMatrix, save_array


def run(*args):
    proc = subprocess.run([sys.executable, "-m", "miprune.cli", *args],
                          capture_output=True, text=True)
    if proc.returncode != 0:
        raise SystemExit(f"command failed: {args}\n{proc.stderr}")
    return proc.stdout


workdir = Path(tempfile.mkdtemp(prefix="miprune_demo_"))
rng = np.random.default_rng(7)
save_array(EmbeddingMatrix(rng.normal(size=(144, 32))), workdir / "V.npy")
save_array(EmbeddingMatrix(rng.normal(size=(6, 32)), kind="textual"), workdir / "T.npy")
print(f"wrote embeddings under {workdir}\n")

run("select", str(workdir / "V.npy"), str(workdir / "T.npy"),
    "--budget", "36", "--lambda", "0.5", "--out", str(workdir / "kept.json"))
kept = json.loads((workdir / "kept.json").read_text())
print(f"select: kept {len(kept['kept_indices'])} of 144 tokens via "
      f"{kept['method']}; first picks {kept['kept_indices'][:8]}")

scores = json.loads(run("score", str(workdir / "V.npy"), str(workdir / "T.npy")))
print(f"score: {len(scores['cross_scores'])} per-token cross scores, "
      f"max {max(scores['cross_scores']):.3f}")

mask = json.loads(run("mask", str(workdir / "kept.json"), "--grid", "12x12"))
print("mask: 12x12 grid of kept (1) vs pruned (0) tokens:")
for row in mask["mask"]:
    print("   " + "".join("#" if bit else "." for bit in row))

run("mask", str(workdir / "kept.json"), "--grid", "12x12",
    "--format", "pgm", "--out", str(workdir / "mask.pgm"))
print(f"\nwrote {workdir / 'mask.pgm'} "
      f"({(workdir / 'mask.pgm').stat().st_size} bytes, binary P5)")

csv = run("synth", "--n-visual", "144", "--n-planted", "12", "--dim", "32",
          "--budgets", "24", "--methods", "mi,random,similarity")
print("\nsynth comparison on a small scene:\n" + csv)
