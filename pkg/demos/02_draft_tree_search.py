#!/usr/bin/env python3
"""Draft-tree construction: best-first search vs beam search.

Builds the tree of most likely continuations with the batched best-first
builder, prints it, and shows why beam search captures less probability
mass at the same node budget: beam prunes whole subtrees that the
best-first frontier keeps alive.
"""

import numpy as np

from speckit import BuilderParams, build_beam, build_sssp, flatten, make_synthetic


def print_tree(tree):
    for node in tree.nodes:
        indent = "  " * (node.depth - 1)
        print(
            f"{indent}token {node.token}  p(path) = {np.exp(node.cum_logprob):.4f}"
            f"  (depth {node.depth})"
        )


def main():
    draft = make_synthetic(seed=11, vocab_size=6, sharpness=0.15)
    prompt = (2,)

    print("== best-first tree, budget 10, depth 4 ==")
    tree = build_sssp(prompt, draft, BuilderParams(budget=10, max_depth=4, batch_size=4))
    print_tree(tree)
    print(f"draft batch calls: {tree.rounds} | total mass: {tree.total_mass():.4f}")

    print("\n== same budget spent by beam search ==")
    beam = build_beam(prompt, draft, beam_size=3, max_len=4)
    params = BuilderParams(budget=len(beam.nodes), max_depth=4, batch_size=4)
    matched = build_sssp(prompt, draft, params)
    print(f"beam tree: {len(beam.nodes)} nodes, mass {beam.total_mass():.4f}")
    print(f"best-first at the same node count: mass {matched.total_mass():.4f}")
    print("best-first >= beam:", matched.total_mass() >= beam.total_mass())

    print("\n== flattened layout for one batched verification pass ==")
    flat = flatten(tree)
    print("order:", flat.order)
    print("ancestor mask (1 = attend):")
    for row in flat.ancestor_mask.astype(int):
        print("  ", "".join(map(str, row)))


if __name__ == "__main__":
    main()
