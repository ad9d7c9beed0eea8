"""Command-line front end for generation and the experiment runners.

Subcommands: generate, coverage, acceptance, throughput, equivalence.
Experiments are driven by a JSON config file; generate accepts overrides
for the decoding method and sampling parameters. The exit code is 0 only
if every assertion of the invoked experiment holds.
"""

from __future__ import annotations

import argparse
import sys

from ..costsim import load_preset
from ..engine import generate_sequential, generate_specexec, stats_record
from ..sampling import SamplingConfig
from ..specinfer import branching_for_budget, generate_specinfer, schedule_size
from ..tree import BuilderParams
from .config import ExperimentConfig
from .experiments import (
    resolve_prompts,
    run_acceptance,
    run_coverage,
    run_equivalence,
    run_throughput,
)
from .io import write_jsonl


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="speckit", description="Speculative decoding engines over exact toy models."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="decode one prompt and print text plus stats")
    gen.add_argument("--config", required=True, help="experiment config JSON")
    gen.add_argument(
        "--method", choices=["sx", "si", "sequential"], default="sx", help="decoding engine"
    )
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--temperature", type=float, default=None)
    gen.add_argument("--top-p", type=float, default=None)
    gen.add_argument("--max-new-tokens", type=int, default=None)
    gen.add_argument("--budget", type=int, default=None, help="draft budget override")
    gen.add_argument("--stats-jsonl", default=None, help="append the run record here")

    for name, help_text in [
        ("coverage", "top-k probability mass captured by the draft ranking"),
        ("acceptance", "generation rate vs draft budget for both engines"),
        ("equivalence", "bit-exactness of cached decoding vs the sequential oracle"),
    ]:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True)
        cmd.add_argument("--output", default=None, help="override the config output path")

    tput = sub.add_parser("throughput", help="simulated tokens/second over the budget grid")
    tput.add_argument("--config", required=True)
    tput.add_argument("--preset", required=True, help="cost-model preset name or JSON path")
    tput.add_argument("--output", default=None)

    return parser


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(args.config)
    if getattr(args, "output", None):
        cfg.output_path = args.output
    return cfg


def _cmd_generate(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    target = cfg.target_model()
    prompt = resolve_prompts(cfg, target)[0]

    base = cfg.sampling[0]
    run_cfg = SamplingConfig(
        temperature=args.temperature if args.temperature is not None else base.get("temperature", 1.0),
        top_p=args.top_p if args.top_p is not None else base.get("top_p", 1.0),
        seed=args.seed if args.seed is not None else cfg.seeds[0],
        max_new_tokens=args.max_new_tokens if args.max_new_tokens is not None else cfg.max_new_tokens,
    )
    budget = args.budget if args.budget is not None else cfg.budgets[0]

    if args.method == "sequential":
        tokens, stats = generate_sequential(prompt, target, run_cfg)
        record = stats_record("sequential", run_cfg, stats, 0, 0, 0)
    elif args.method == "sx":
        params = BuilderParams(budget, cfg.max_depth, cfg.batch_size)
        tokens, stats = generate_specexec(prompt, target if cfg.draft is None else cfg.draft_model(), target, params, run_cfg)
        record = stats_record("sx", run_cfg, stats, budget, cfg.max_depth, cfg.batch_size)
    else:
        branching = cfg.branching or branching_for_budget(budget, cfg.si_depth)
        tokens, stats = generate_specinfer(
            prompt, target if cfg.draft is None else cfg.draft_model(), target, branching, run_cfg
        )
        record = stats_record(
            "si", run_cfg, stats, schedule_size(branching), len(branching), branching[0]
        )

    print(target.decode(tokens))
    print(
        f"[{args.method}] tokens={stats.tokens_generated} target_calls={stats.target_calls} "
        f"draft_calls={stats.draft_calls} gen_rate={stats.generation_rate:.3f} "
        f"seed={run_cfg.seed} t={run_cfg.temperature} top_p={run_cfg.top_p}"
    )
    if args.stats_jsonl:
        write_jsonl(args.stats_jsonl, [record])
    return 0


def _cmd_coverage(args: argparse.Namespace) -> int:
    report = run_coverage(_load_config(args))
    print(f"coverage over {report.positions} positions (k up to {report.ks[-1]}):")
    for k, t, d in zip(report.ks, report.target_mass, report.draft_mass):
        print(f"  k={k:<3d} target_topk={t:.4f} draft_topk={d:.4f}")
    return 0


def _cmd_acceptance(args: argparse.Namespace) -> int:
    result = run_acceptance(_load_config(args))
    print("method budget mean_gen_rate [95% CI] rounds")
    for row in result.rows:
        print(
            f"{row.method:>6} {row.budget:>6} {row.mean_gen_rate:13.3f} "
            f"[{row.ci_lo:.3f}, {row.ci_hi:.3f}] {row.mean_rounds:.2f}"
        )
    return 0


def _cmd_throughput(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    cost_model = load_preset(args.preset)
    out = cfg.output_path
    cfg.output_path = None  # the measurement pass must not clobber the report
    acceptance = run_acceptance(cfg)
    cfg.output_path = out
    result = run_throughput(cfg, cost_model, acceptance.curves)
    print("method budget gen_rate t_draft t_forward tok_per_s speedup")
    for row in result.rows:
        star = " *" if row.optimal else ""
        print(
            f"{row.method:>6} {row.budget:>6} {row.gen_rate:8.3f} {row.t_draft:8.3f} "
            f"{row.t_forward:9.3f} {row.tok_per_s:9.4f} {row.speedup:7.2f}x{star}"
        )
    for method, choice in sorted(result.choices.items()):
        print(
            f"optimal budget for {method}: K*={choice.budget} "
            f"({choice.tokens_per_second:.4f} tok/s, {choice.speedup:.2f}x vs sequential)"
        )
    return 0


def _cmd_equivalence(args: argparse.Namespace) -> int:
    report = run_equivalence(_load_config(args))
    if report.passed:
        print(f"equivalence: all {len(report.cells)} cells bit-exact")
        return 0
    for cell in report.failures:
        print(
            f"cell {cell.index} DIVERGED at position {cell.divergence_position}: "
            f"expected {cell.expected} got {cell.got}"
        )
        print(f"  repro: {cell.provenance()}")
    print(f"equivalence: {len(report.failures)} of {len(report.cells)} cells diverged")
    return 1


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "generate": _cmd_generate,
        "coverage": _cmd_coverage,
        "acceptance": _cmd_acceptance,
        "throughput": _cmd_throughput,
        "equivalence": _cmd_equivalence,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
