"""Generation by sequential sampling from a cache of precomputed distributions.

``precompute`` builds a draft tree of likely continuations and evaluates
the target model on every prefix in it with one batched call. The
generation loop then samples token after token from the cached target
distributions, walking the tree as tokens land on draft nodes, and only
returns to the target model when a sampled token falls off the tree.

Because the cache stores the target model's *raw* distributions and the
sampling warp is applied at draw time, the loop consumes the exact same
(distribution, uniform-draw) pairs as plain sequential decoding and its
output is bit-identical for any seed. ``generate_sequential`` is that
oracle loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .models import LanguageModel, Prefix
from .rng import CounterRng
from .sampling import SamplingConfig, apply_warp, sample
from .tree import ROOT, BuilderParams, DraftTree, build_sssp, flatten

GENERATION_STREAM = "generation"


@dataclass
class GenStats:
    """Call accounting for one generation run."""

    target_calls: int = 0
    draft_calls: int = 0
    tokens_generated: int = 0
    accepted_per_iteration: list[int] = field(default_factory=list)

    @property
    def generation_rate(self) -> float:
        """Mean tokens emitted per target-model call; 0 for empty runs."""
        if self.target_calls == 0:
            return 0.0
        return self.tokens_generated / self.target_calls


class ProbCache:
    """Target next-token distributions for every prefix in a draft tree.

    Row 0 of ``dists`` is the distribution at the anchor prefix itself;
    row i+1 belongs to tree node i. The cursor tracks the node whose
    distribution serves the next sample, starting at the root.
    """

    def __init__(self, prefix: Prefix, tree: DraftTree, dists: np.ndarray) -> None:
        self.prefix = prefix
        self.tree = tree
        self.dists = dists
        self.cursor = ROOT

    def current_dist(self) -> np.ndarray:
        return self.dists[self.cursor + 1]

    def advance(self, token: int) -> bool:
        """Move the cursor to the child carrying ``token``; False on a miss."""
        child = self.tree.child_with_token(self.cursor, token)
        if child is None:
            return False
        self.cursor = child
        return True


def precompute(
    prefix: Prefix,
    draft: LanguageModel,
    target: LanguageModel,
    params: BuilderParams,
    warp: SamplingConfig | None = None,
) -> ProbCache:
    """Build the draft tree and fill the cache with one batched target call.

    The batched evaluation covers the anchor prefix plus every tree node's
    prefix, mirroring a single forward pass over the flattened tree.
    """
    tree = build_sssp(prefix, draft, params, warp)
    flat = flatten(tree)
    prefixes = [prefix] + [tree.full_prefix(i) for i in flat.order]
    dists = target.next_distributions(prefixes)
    return ProbCache(prefix, tree, dists)


def generate_specexec(
    prompt: Prefix,
    draft: LanguageModel,
    target: LanguageModel,
    params: BuilderParams,
    cfg: SamplingConfig,
) -> tuple[list[int], GenStats]:
    """Decode with the speculative cache; bit-equal to ``generate_sequential``.

    Each precompute counts as one target call. A sampled token that is not
    among the cursor's children is a cache miss: the next iteration
    rebuilds the cache at the grown prefix, whose root row then serves the
    following sample, so no distribution is ever approximated.
    """
    prompt = tuple(prompt)
    rng = CounterRng(cfg.seed, GENERATION_STREAM)
    stats = GenStats()
    tokens: list[int] = []
    if cfg.max_new_tokens == 0:
        return tokens, stats

    cache = precompute(prompt, draft, target, params, cfg)
    stats.target_calls += 1
    stats.draft_calls += cache.tree.rounds
    stats.accepted_per_iteration.append(0)

    for _ in range(cfg.max_new_tokens):
        if cache is None:  # previous token fell off the tree
            cache = precompute(prompt + tuple(tokens), draft, target, params, cfg)
            stats.target_calls += 1
            stats.draft_calls += cache.tree.rounds
            stats.accepted_per_iteration.append(0)
        token = sample(apply_warp(cache.current_dist(), cfg), rng)
        tokens.append(token)
        stats.accepted_per_iteration[-1] += 1
        if not cache.advance(token):
            cache = None

    stats.tokens_generated = len(tokens)
    return tokens, stats


def generate_sequential(
    prompt: Prefix, target: LanguageModel, cfg: SamplingConfig
) -> tuple[list[int], GenStats]:
    """Classic one-token-at-a-time decoding; the equivalence oracle."""
    prompt = tuple(prompt)
    rng = CounterRng(cfg.seed, GENERATION_STREAM)
    stats = GenStats()
    tokens: list[int] = []
    for _ in range(cfg.max_new_tokens):
        dist = target.next_distribution(prompt + tuple(tokens))
        tokens.append(sample(apply_warp(dist, cfg), rng))
        stats.target_calls += 1
        stats.accepted_per_iteration.append(1)
    stats.tokens_generated = len(tokens)
    return tokens, stats


def stats_record(
    method: str,
    cfg: SamplingConfig,
    stats: GenStats,
    budget: int,
    depth: int,
    batch_size: int,
) -> dict:
    """Per-run stats record in the shared JSON-lines schema."""
    return {
        "method": method,
        "K": budget,
        "D": depth,
        "B": batch_size,
        "t": cfg.temperature,
        "top_p": cfg.top_p,
        "seed": cfg.seed,
        "tokens": stats.tokens_generated,
        "target_calls": stats.target_calls,
        "generation_rate": stats.generation_rate,
    }
