"""Command-line front door.

Subcommands: select, score, bench, verify, mask, synth. Every command
writes its primary output (JSON or CSV) to stdout or --out, and a run
manifest (tool version, resolved config, input digests, wall time,
timing split) as one JSON line on stderr, plus a <out>.manifest.json
sidecar when --out is given. Primary outputs are byte-deterministic for
fixed flags and input bytes; anything wall-clock lives in the manifest.

Exit codes: 0 success, 1 verification/selection failure, 2 usage error.

MIPRUNE_THREADS caps BLAS parallelism (0 or unset = auto); the package
__init__ applies it before numpy loads.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part]


def _grid(text: str) -> tuple[int, int]:
    h, _, w = text.lower().partition("x")
    return int(h), int(w)


def _add_config_flags(p: argparse.ArgumentParser, require_budget: bool) -> None:
    p.add_argument("--budget", type=int, required=require_budget, default=None,
                   help="number of visual tokens to keep")
    p.add_argument("--tau", type=float, default=0.1, help="similarity temperature")
    p.add_argument("--self-tau", dest="self_tau", type=float, default=None,
                   help="separate temperature for the visual-visual matrix")
    p.add_argument("--lambda", dest="lambda_", type=float, default=1.0,
                   help="relevance/redundancy balance in [0, 1]")
    p.add_argument("--agg", choices=("max", "global"), default="max")
    p.add_argument("--norm", choices=("softmax", "minmax"), default="softmax")
    p.add_argument("--mask-diagonal", action="store_true")
    p.add_argument("--seed", type=int, default=0)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="miprune",
        description="Mutual-information guided visual token selection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="select tokens from embedding matrices")
    p.add_argument("visual_path")
    p.add_argument("text_path")
    _add_config_flags(p, require_budget=True)
    p.add_argument("--method", default="auto",
                   choices=("auto", "fast", "greedy", "naive", "mi_attention",
                            "random", "similarity", "attention"))
    p.add_argument("--attention", default=None, help="NPY attention matrix path")
    p.add_argument("--cls-index", dest="cls_index", type=int, default=None)
    p.add_argument("--round1-fraction", dest="round1_fraction", type=float, default=0.5)
    p.add_argument("--out", default=None)

    p = sub.add_parser("score", help="dump per-token scores")
    p.add_argument("visual_path")
    p.add_argument("text_path")
    _add_config_flags(p, require_budget=False)
    p.add_argument("--out", default=None)

    p = sub.add_parser("bench", help="selection latency microbenchmark")
    p.add_argument("--sizes", type=_int_list, default=[2048, 16384])
    p.add_argument("--budgets", type=_int_list, default=[64])
    p.add_argument("--methods", default="fast_modular,greedy_naive")
    p.add_argument("--repeats", type=int, default=30)
    p.add_argument("--warmups", type=int, default=10)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--n-text", dest="n_text", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("verify", help="run the information-theory identity suite")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inject-fault", action="store_true",
                   help="negative control: corrupt one probability, must fail")

    p = sub.add_parser("mask", help="render kept indices as a grid mask")
    p.add_argument("kept_json_path")
    p.add_argument("--grid", type=_grid, required=True, metavar="HxW")
    p.add_argument("--format", choices=("json", "pgm"), default="json")
    p.add_argument("--out", default=None)

    p = sub.add_parser("synth", help="synthetic planted-recall comparison")
    p.add_argument("--n-visual", dest="n_visual", type=int, default=576)
    p.add_argument("--n-text", dest="n_text", type=int, default=8)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--n-planted", dest="n_planted", type=int, default=24)
    p.add_argument("--clusters", type=int, default=5)
    p.add_argument("--spread", type=float, default=0.15)
    p.add_argument("--distractor-fraction", dest="distractor_fraction",
                   type=float, default=0.2)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--budgets", type=_int_list, default=[32, 64, 128])
    p.add_argument("--methods", default="random,similarity,attention,mi,mi_attention")
    p.add_argument("--tau", type=float, default=0.1)
    p.add_argument("--lambda", dest="lambda_", type=float, default=1.0)
    p.add_argument("--agg", choices=("max", "global"), default="max")
    p.add_argument("--norm", choices=("softmax", "minmax"), default="softmax")
    p.add_argument("--out", default=None)

    return parser


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _finite_or_none(values) -> list:
    # strict JSON has no Infinity; -inf only appears for a [CLS] token
    # force-included by a full budget
    import math

    return [v if math.isfinite(v) else None for v in values]


def _write_output(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")


def _emit_manifest(command: str, inputs: list, config: dict, started_ns: int,
                   out, extra: dict | None = None) -> None:
    from . import __version__

    manifest = {
        "tool": "miprune",
        "version": __version__,
        "command": command,
        "inputs": [{"path": str(p), "sha256": _sha256(p)} for p in inputs],
        "config": config,
        "wall_time_ms": (time.perf_counter_ns() - started_ns) / 1e6,
    }
    if extra:
        manifest.update(extra)
    line = json.dumps(manifest)
    print(line, file=sys.stderr)
    if out is not None:
        Path(str(out) + ".manifest.json").write_text(line + "\n")


def _prune_config(args, n_visual: int):
    from .scoring import PruneConfig

    budget = args.budget if args.budget is not None else n_visual
    return PruneConfig(
        budget=budget, tau=args.tau, lambda_=args.lambda_, aggregation=args.agg,
        normalization=args.norm, mask_diagonal=args.mask_diagonal,
        self_tau=args.self_tau, seed=args.seed,
    )


def _config_dict(cfg, n_visual: int, n_text: int, dim: int) -> dict:
    return {
        "budget": cfg.budget,
        "tau": cfg.tau,
        "lambda": cfg.lambda_,
        "aggregation": cfg.aggregation,
        "normalization": cfg.normalization,
        "mask_diagonal": cfg.mask_diagonal,
        "self_tau": cfg.self_tau,
        "seed": cfg.seed,
        "n_visual": n_visual,
        "n_text": n_text,
        "dim": dim,
    }


def _load_pair(args):
    from .matrixio import load_array, row_normalize

    V = row_normalize(load_array(args.visual_path, kind="visual"))
    T = row_normalize(load_array(args.text_path, kind="textual"))
    if V.cols != T.cols:
        from .errors import ShapeError

        raise ShapeError(
            f"embedding dims differ: visual {V.cols}, text {T.cols}"
        )
    return V, T


def _run_select(args) -> int:
    from .baselines import (
        AttentionInput,
        attention_select,
        mi_attention_select,
        random_select,
        similarity_select,
    )
    from .errors import ConfigError
    from .matrixio import load_array
    from .selection import fast_select_modular, greedy_select, greedy_select_naive

    started = time.perf_counter_ns()
    V, T = _load_pair(args)
    cfg = _prune_config(args, V.rows)

    attn = None
    if args.attention is not None:
        attn = AttentionInput(load_array(args.attention, kind="attention"),
                              cls_index=args.cls_index)

    method = args.method
    if method == "auto":
        method = "fast" if cfg.lambda_ == 1.0 else "greedy"
    if method == "fast":
        result = fast_select_modular(V, T, cfg)
    elif method == "greedy":
        result = greedy_select(V, T, cfg)
    elif method == "naive":
        result = greedy_select_naive(V, T, cfg)
    elif method == "random":
        result = random_select(V.rows, cfg.budget, cfg.seed)
    elif method == "similarity":
        result = similarity_select(V, T, cfg.tau, cfg.budget)
    elif method == "attention":
        if attn is None:
            raise ConfigError("--method attention requires --attention PATH")
        mode = "cls_row" if args.cls_index is not None else "column_sum"
        result = attention_select(attn, cfg.budget, mode=mode)
    else:  # mi_attention
        if attn is None:
            raise ConfigError("--method mi_attention requires --attention PATH")
        result = mi_attention_select(V, T, attn, cfg,
                                     round1_fraction=args.round1_fraction)

    payload = {
        "kept_indices": result.kept,
        "step_scores": _finite_or_none(result.step_scores),
        "method": result.method,
        "config": _config_dict(cfg, V.rows, T.rows, V.cols),
    }
    _write_output(json.dumps(payload), args.out)
    inputs = [args.visual_path, args.text_path]
    if args.attention is not None:
        inputs.append(args.attention)
    _emit_manifest(
        "select", inputs, payload["config"], started, args.out,
        extra={"timing_ns": {"score": result.score_ns, "select": result.select_ns,
                             "total": result.wall_time_ns}},
    )
    return 0


def _run_score(args) -> int:
    from .scoring import self_score_max
    from .selection import build_tables, cross_scores, greedy_select

    started = time.perf_counter_ns()
    V, T = _load_pair(args)
    cfg = _prune_config(args, V.rows)

    tables = build_tables(V, T, cfg, need_self=cfg.lambda_ < 1.0)
    cross = cross_scores(tables, cfg)
    payload = {
        "cross_scores": cross.values.tolist(),
        "method": f"score_{cfg.aggregation}",
        "config": _config_dict(cfg, V.rows, T.rows, V.cols),
    }
    if cfg.lambda_ < 1.0:
        result = greedy_select(V, T, cfg)
        self_max = self_score_max(tables.self_pmi, result.kept)
        payload["kept_indices"] = result.kept
        payload["self_max_scores"] = self_max.values.tolist()
    _write_output(json.dumps(payload), args.out)
    _emit_manifest("score", [args.visual_path, args.text_path],
                   payload["config"], started, args.out)
    return 0


def _run_bench(args) -> int:
    from .bench import bench_to_csv, run_latency_benchmark

    started = time.perf_counter_ns()
    rows = run_latency_benchmark(
        sizes=args.sizes, budgets=args.budgets,
        methods=[m for m in args.methods.split(",") if m],
        repeats=args.repeats, warmups=args.warmups,
        n_text=args.n_text, dim=args.dim, seed=args.seed,
    )
    _write_output(bench_to_csv(rows), args.out)
    config = {"sizes": args.sizes, "budgets": args.budgets, "methods": args.methods,
              "repeats": args.repeats, "warmups": args.warmups, "dim": args.dim,
              "n_text": args.n_text, "seed": args.seed}
    _emit_manifest("bench", [], config, started, args.out)
    return 0


def _run_verify(args) -> int:
    from dataclasses import asdict

    from .infotheory import run_verification_suite

    started = time.perf_counter_ns()
    report = run_verification_suite(trials=args.trials, seed=args.seed,
                                    inject_fault=args.inject_fault)
    print(json.dumps(asdict(report), indent=2))
    _emit_manifest("verify", [], {"trials": args.trials, "seed": args.seed,
                                  "inject_fault": args.inject_fault}, started, None)
    return 0 if report.passed else 1


def _run_mask(args) -> int:
    from .errors import ConfigError, FormatError

    started = time.perf_counter_ns()
    try:
        payload = json.loads(Path(args.kept_json_path).read_text())
        kept = payload["kept_indices"]
    except (OSError, ValueError, KeyError) as exc:
        raise FormatError(f"cannot read kept list from {args.kept_json_path}: {exc}")
    h, w = args.grid
    if h < 1 or w < 1:
        raise ConfigError(f"grid must be positive, got {h}x{w}")
    n_visual = payload.get("config", {}).get("n_visual")
    if n_visual is not None and h * w != n_visual:
        raise ConfigError(f"grid {h}x{w} covers {h * w} tokens, input has {n_visual}")
    if any(not 0 <= i < h * w for i in kept):
        raise ConfigError(f"kept index out of range for grid {h}x{w}")

    flat = [0] * (h * w)
    for i in kept:
        flat[i] = 1
    if args.format == "json":
        mask = [flat[r * w:(r + 1) * w] for r in range(h)]
        _write_output(json.dumps({"grid": [h, w], "mask": mask}), args.out)
    else:
        data = b"P5\n%d %d\n255\n" % (w, h) + bytes(255 * v for v in flat)
        if args.out is None:
            sys.stdout.buffer.write(data)
            sys.stdout.buffer.flush()
        else:
            Path(args.out).write_bytes(data)
    _emit_manifest("mask", [args.kept_json_path],
                   {"grid": [h, w], "format": args.format}, started, args.out)
    return 0


def _run_synth(args) -> int:
    from .scoring import PruneConfig
    from .synth import SceneSpec, comparison_to_csv, run_comparison

    started = time.perf_counter_ns()
    spec = SceneSpec(
        n_visual=args.n_visual, n_text=args.n_text, dim=args.dim,
        n_planted=args.n_planted, n_background_clusters=args.clusters,
        cluster_spread=args.spread, distractor_fraction=args.distractor_fraction,
        seed=args.seed,
    )
    template = PruneConfig(budget=1, tau=args.tau, lambda_=args.lambda_,
                           aggregation=args.agg, normalization=args.norm)
    rows = run_comparison(spec, args.budgets,
                          methods=[m for m in args.methods.split(",") if m],
                          config=template)
    _write_output(comparison_to_csv(rows), args.out)
    config = {"spec": spec.__dict__, "budgets": args.budgets, "methods": args.methods,
              "tau": args.tau, "lambda": args.lambda_, "aggregation": args.agg,
              "normalization": args.norm}
    _emit_manifest("synth", [], config, started, args.out)
    return 0


_RUNNERS = {
    "select": _run_select,
    "score": _run_score,
    "bench": _run_bench,
    "verify": _run_verify,
    "mask": _run_mask,
    "synth": _run_synth,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    from .errors import ConfigError, MipruneError

    try:
        return _RUNNERS[args.command](args)
    except ConfigError as exc:
        print(f"miprune: usage error: {exc}", file=sys.stderr)
        return 2
    except KeyError as exc:
        print(f"miprune: usage error: unknown name {exc}", file=sys.stderr)
        return 2
    except MipruneError as exc:
        print(f"miprune: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
