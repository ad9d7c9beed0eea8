"""Independent reference implementations the tests check the library against.

Everything here is deliberately brute force: exhaustive enumeration,
recounting, path walking. None of it shares search or caching logic with
the code under test.
"""

from __future__ import annotations

import numpy as np

from speckit.models import LanguageModel
from speckit.sampling import SamplingConfig, apply_warp
from speckit.tree import ROOT, DraftTree


def enumerate_top_sequences(
    model: LanguageModel,
    prefix: tuple[int, ...],
    budget: int,
    max_depth: int,
    warp: SamplingConfig | None = None,
) -> list[tuple[float, int, tuple[int, ...]]]:
    """All token sequences up to max_depth, ranked, truncated to the budget.

    Ranking key is (cumulative negative log-prob asc, depth asc, path
    lexicographic asc), the documented tie-break order.
    """
    found: list[tuple[float, int, tuple[int, ...]]] = []

    def expand(path: tuple[int, ...], nll: float) -> None:
        if len(path) == max_depth:
            return
        dist = model.next_distribution(prefix + path)
        if warp is not None:
            dist = apply_warp(dist, warp)
        for token in range(model.vocab_size):
            p = dist[token]
            if p <= 0:
                continue
            child_nll = nll - float(np.log(p))
            found.append((child_nll, len(path) + 1, path + (token,)))
            expand(path + (token,), child_nll)

    expand((), 0.0)
    found.sort()
    return found[:budget]


def ancestor_mask_by_walking(tree: DraftTree) -> np.ndarray:
    """Recompute the flattened ancestor mask by walking parent pointers."""
    n = len(tree.nodes)
    mask = np.zeros((n + 1, n + 1), dtype=bool)
    mask[0, 0] = True
    for node in tree.nodes:
        row = node.node_id + 1
        mask[row, row] = True
        mask[row, 0] = True  # the anchor root is an ancestor of every node
        cur = node
        while cur.parent != ROOT:
            mask[row, cur.parent + 1] = True
            cur = tree.nodes[cur.parent]
    return mask


def ngram_distribution_by_counting(
    corpus: str, order: int, smoothing: float, context: str
) -> np.ndarray:
    """Add-lambda smoothed next-unit distribution, recounted from scratch."""
    units = [chr(b) for b in corpus.encode("utf-8")]
    alphabet = sorted(set(units))
    counts = np.zeros(len(alphabet))
    ctx_units = [chr(b) for b in context.encode("utf-8")][-order:]
    span = len(ctx_units)
    for pos in range(span, len(units)):
        if units[pos - span : pos] == ctx_units:
            counts[alphabet.index(units[pos])] += 1
    smoothed = counts + smoothing
    return smoothed / smoothed.sum()


def random_attachment_tree(gen: np.random.Generator, n_nodes: int, vocab: int) -> DraftTree:
    """Random tree shape for structural tests; probabilities are arbitrary."""
    tree = DraftTree(prefix=(0,))
    for i in range(n_nodes):
        parent = ROOT if i == 0 else int(gen.integers(-1, i))
        token = int(gen.integers(0, vocab))
        tree.add_child(parent, token, float(np.log(gen.uniform(0.05, 1.0))))
    return tree


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())
