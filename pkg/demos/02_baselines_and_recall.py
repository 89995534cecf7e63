"""Compare pruning policies on a synthetic scene with planted tokens.

The scene plants 24 query-relevant tokens among 576; the synthetic
attention matrix is biased toward a distractor cluster, mimicking
prompt-agnostic encoder salience. Recall of the planted tokens measures
whether each policy keeps the queried region.
"""

from miprune import SceneSpec, generate_scene, run_comparison
from miprune.synth import comparison_to_csv

spec = SceneSpec()  # 576 visual tokens, 24 planted, seed 7
scene = generate_scene(spec)
print(f"scene: {spec.n_visual} visual tokens, {len(scene.planted)} planted, "
      f"{len(scene.distractors)} distractor tokens\n")

budgets = [24, 48, 96, 192]
rows = run_comparison(spec, budgets=budgets,
                      methods=("random", "similarity", "attention", "mi", "mi_attention"))

print(f"{'method':14s}" + "".join(f"  recall@{b:<4d}" for b in budgets))
for method in ("random", "similarity", "attention", "mi", "mi_attention"):
    cells = [row["recall"] for row in rows if row["method"] == method]
    print(f"{method:14s}" + "".join(f"  {r:10.3f}" for r in cells))

print("\nNotes: attention chases the distractor cluster, so its recall is "
      "low at small budgets. mi_attention inherits the attention pool in "
      "round 1 and can only recover once the pool covers planted tokens.")

print("\nCSV form (as emitted by `miprune synth`):\n")
print(comparison_to_csv(rows[:5]))
