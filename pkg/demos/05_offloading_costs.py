#!/usr/bin/env python3
"""The offloading latency model: plateau, throughput, optimal budget.

Shows the max(load, compute) pass-time curve, then joins a measured
acceptance curve with a hardware preset to find the throughput-optimal
draft budget and the speedup over sequential offloaded decoding.
"""

from speckit import AcceptanceCurve, estimate_throughput, forward_time, load_preset, optimize_budget
from speckit.costsim import crossover_tokens, sequential_throughput


def main():
    cm = load_preset("pcie4-16bit-70b")
    print("preset pcie4-16bit-70b:")
    print(f"  140 GB over 31.5 GB/s -> single-token pass {forward_time(cm, 1):.2f}s")
    print(f"  load/compute crossover at ~{crossover_tokens(cm):.0f} tokens")

    print("\npass time vs batch size (flat until compute catches the transfer):")
    for n in (1, 16, 256, 1024, 2048, 4096, 8192):
        t = forward_time(cm, n)
        print(f"  n={n:<5} {t:6.2f}s  {'#' * int(t * 4)}")

    # An acceptance curve of the shape the generation experiments produce:
    # rates that saturate while the drafting effort keeps growing.
    curve = AcceptanceCurve(
        budgets=[16, 64, 256, 1024, 2048],
        gen_rates=[6.0, 10.5, 15.0, 18.5, 20.6],
        rounds=[10.0, 18.0, 28.0, 48.0, 64.0],
    )
    print("\nsimulated throughput across budgets:")
    for budget in curve.budgets:
        tput = estimate_throughput(cm, curve, budget)
        print(
            f"  K={budget:<5} rate {curve.gen_rate_at(budget):5.1f}"
            f"  tok/s {tput:5.3f}  {'#' * int(tput * 14)}"
        )
    choice = optimize_budget(cm, curve)
    print(
        f"\noptimal budget K*={choice.budget}: {choice.tokens_per_second:.3f} tok/s,"
        f" {choice.speedup:.1f}x over sequential ({sequential_throughput(cm):.3f} tok/s)"
    )

    quant = load_preset("pcie4-gptq-70b")
    q_choice = optimize_budget(quant, curve)
    print(
        f"4-bit preset: K*={q_choice.budget}, {q_choice.tokens_per_second:.2f} tok/s,"
        f" {q_choice.speedup:.1f}x (smaller transfers favor smaller budgets)"
    )


if __name__ == "__main__":
    main()
