"""Time the selection phase across sizes and budgets.

The fast modular path (lambda = 1) builds a heap over a linearly
prescanned candidate band, so its cost barely moves with N_V. Naive
greedy re-scans the whole selected set per step, so its cost blows up
with the budget. Tables and scores are prepared outside the timed
region; this measures selection itself.
"""

from miprune.bench import bench_to_csv, run_latency_benchmark

print("fast path across sizes (budget 64):")
rows = run_latency_benchmark(sizes=[1024, 4096, 16384], budgets=[64],
                             methods=["fast_modular"], repeats=15, warmups=5)
print(bench_to_csv(rows))

print("incremental vs naive greedy across budgets (N_V = 2048, lambda = 0.5):")
rows = run_latency_benchmark(sizes=[2048], budgets=[32, 128, 512],
                             methods=["greedy", "greedy_naive"],
                             repeats=5, warmups=2)
print(bench_to_csv(rows))

medians = {(r.method, r.budget): r.median_ns for r in rows}
growth_naive = medians[("greedy_naive", 512)] / medians[("greedy_naive", 32)]
growth_incr = medians[("greedy", 512)] / medians[("greedy", 32)]
print(f"budget 512 vs 32 cost growth: naive {growth_naive:.1f}x, "
      f"incremental {growth_incr:.1f}x")
