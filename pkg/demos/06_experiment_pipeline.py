#!/usr/bin/env python3
"""The full experiment pipeline on a desk-scale synthetic pair.

Runs coverage, the acceptance-vs-budget sweep, the simulated-throughput
join, and the bit-exactness grid, writing versioned CSV/JSONL reports into
./out. This is the script-sized version of what the CLI subcommands do.
"""

from pathlib import Path

from speckit import load_preset
from speckit.harness import (
    ExperimentConfig,
    run_acceptance,
    run_coverage,
    run_equivalence,
    run_throughput,
)

OUT = Path(__file__).parent / "out"


def main():
    OUT.mkdir(exist_ok=True)
    target = {"kind": "synthetic", "seed": 21, "vocab_size": 32, "sharpness": 0.005}
    draft = {"kind": "power", "base": target, "power": 0.7}

    print("== coverage: how much target mass the draft ranking captures ==")
    coverage_cfg = ExperimentConfig(
        kind="coverage",
        target=target,
        draft=draft,
        prompt_source={"kind": "sampled", "length": 4, "count": 2},
        coverage_positions=48,
        k_max=8,
        output_path=str(OUT / "coverage.csv"),
    )
    report = run_coverage(coverage_cfg)
    for k, t, d in zip(report.ks, report.target_mass, report.draft_mass):
        print(f"  k={k}  target {t:.3f}  draft {d:.3f}")

    print("\n== acceptance vs budget (both engines, same seeds) ==")
    acceptance_cfg = ExperimentConfig(
        kind="acceptance",
        target=target,
        draft=draft,
        prompt_source={"kind": "sampled", "length": 4, "count": 2},
        budgets=[16, 64, 256, 1024],
        seeds=list(range(8)),
        sampling=[{"temperature": 1.0, "top_p": 1.0}],
        max_new_tokens=48,
        max_depth=48,
        batch_size=16,
        si_depth=8,
        output_path=str(OUT / "acceptance.csv"),
    )
    acceptance = run_acceptance(acceptance_cfg)
    for row in acceptance.rows:
        print(
            f"  {row.method} K={row.budget:<5} rate {row.mean_gen_rate:5.2f}"
            f" [{row.ci_lo:.2f}, {row.ci_hi:.2f}]"
        )

    print("\n== simulated throughput at pcie4-16bit-70b ==")
    acceptance_cfg.output_path = str(OUT / "throughput.csv")
    tput = run_throughput(acceptance_cfg, load_preset("pcie4-16bit-70b"), acceptance.curves)
    for row in tput.rows:
        star = "  <- optimal" if row.optimal else ""
        print(f"  {row.method} K={row.budget:<5} {row.tok_per_s:.3f} tok/s ({row.speedup:.1f}x){star}")

    print("\n== equivalence grid ==")
    eq_cfg = ExperimentConfig(
        kind="equivalence",
        target=target,
        equivalence_cells=24,
        vocab_size=16,
        sharpness=0.3,
        budgets=[16],
        max_depth=6,
        batch_size=4,
        max_new_tokens=16,
        seeds=list(range(6)),
        sampling=[
            {"temperature": 0.0, "top_p": 1.0},
            {"temperature": 0.6, "top_p": 0.9},
            {"temperature": 1.0, "top_p": 0.9},
        ],
        output_path=str(OUT / "equivalence.jsonl"),
    )
    eq = run_equivalence(eq_cfg)
    print(f"  {len(eq.cells)} cells, all bit-exact: {eq.passed}")

    print(f"\nreports written to {OUT}/")


if __name__ == "__main__":
    main()
