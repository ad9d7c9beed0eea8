"""Tree speculative sampling baseline: stochastic drafting plus verification.

Drafting samples a token tree from the draft model; verification walks
the tree, accepting each child with probability min(1, p/q) where p is
the warped target distribution at the current node and q the warped draft
distribution the children were sampled from. Rejecting a child moves the
target distribution to the residual normalize(max(p - q, 0)) before the
next child is tried, and a bonus token is sampled from whatever
distribution is left when no child fits, so every iteration emits at
least one token and the overall output distribution matches sequential
sampling from the target exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import GenStats
from .models import LanguageModel, Prefix
from .rng import CounterRng
from .sampling import SamplingConfig, apply_warp, sample, validate_distribution
from .tree import ROOT, DraftTree, build_stochastic, flatten

DRAFT_STREAM = "specinfer-draft"
ACCEPT_STREAM = "specinfer-accept"


@dataclass
class VerifyOutcome:
    """Result of verifying one draft tree."""

    accepted_path: list[int]  # node ids, root child first
    bonus_token: int

    @property
    def tokens_emitted(self) -> int:
        return len(self.accepted_path) + 1


def _residual(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Rejection residual normalize(max(p - q, 0)); validated before use."""
    diff = np.maximum(p - q, 0.0)
    total = diff.sum()
    if total <= 0.0:
        # Unreachable when p != q: exact ratio 1 always accepts. Guards the
        # p == q corner where the residual is undefined.
        return p.copy()
    return validate_distribution(diff / total)


def verify_specinfer(
    tree: DraftTree,
    target: LanguageModel,
    warp: SamplingConfig,
    rng: CounterRng,
) -> VerifyOutcome:
    """Multi-round rejection walk over a stochastically drafted tree.

    Requires the tree to carry the draft distributions it was sampled from
    (``build_stochastic`` records them). Target distributions for all tree
    prefixes come from one batched evaluation. A child merged from m
    duplicate samples gets m acceptance rounds.
    """
    if tree.draft_dists is None:
        raise ValueError("tree carries no draft distributions; build it with build_stochastic")

    flat = flatten(tree)
    prefixes = [tree.prefix] + [tree.full_prefix(i) for i in flat.order]
    target_dists = target.next_distributions(prefixes)

    node = ROOT
    path: list[int] = []
    p = apply_warp(target_dists[0], warp)
    while True:
        children = tree.children_of(node)
        accepted: int | None = None
        for child_id in children:
            child = tree.nodes[child_id]
            q = tree.draft_dists[node]
            for _ in range(child.multiplicity):
                ratio = min(1.0, p[child.token] / q[child.token])
                if rng.uniform() < ratio:
                    accepted = child_id
                    break
                p = _residual(p, q)
            if accepted is not None:
                break
        if accepted is None:
            # Every child rejected (or leaf): emit from what remains of p.
            return VerifyOutcome(accepted_path=path, bonus_token=sample(p, rng))
        path.append(accepted)
        node = accepted
        p = apply_warp(target_dists[accepted + 1], warp)


def generate_specinfer(
    prompt: Prefix,
    draft: LanguageModel,
    target: LanguageModel,
    branching: list[int],
    cfg: SamplingConfig,
) -> tuple[list[int], GenStats]:
    """Iterate draft-then-verify until ``cfg.max_new_tokens`` tokens emitted.

    One target call per iteration; the final iteration's emission is
    truncated at the requested length and counted as-is in the stats.
    """
    prompt = tuple(prompt)
    rng_draft = CounterRng(cfg.seed, DRAFT_STREAM)
    rng_accept = CounterRng(cfg.seed, ACCEPT_STREAM)
    stats = GenStats()
    tokens: list[int] = []
    while len(tokens) < cfg.max_new_tokens:
        tree = build_stochastic(prompt + tuple(tokens), draft, branching, rng_draft, cfg)
        stats.draft_calls += tree.rounds
        outcome = verify_specinfer(tree, target, cfg, rng_accept)
        stats.target_calls += 1
        emitted = [tree.nodes[i].token for i in outcome.accepted_path]
        emitted.append(outcome.bonus_token)
        emitted = emitted[: cfg.max_new_tokens - len(tokens)]
        tokens.extend(emitted)
        stats.accepted_per_iteration.append(len(emitted))
    stats.tokens_generated = len(tokens)
    return tokens, stats


def branching_for_budget(budget: int, depth: int) -> list[int]:
    """Stem-shaped schedule with about ``budget`` total nodes.

    ``width`` stems of length ``depth``: the root fans out to width
    children, then each stem continues single file. Total node count is
    width * depth, the multiple of depth closest to the budget.
    """
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    depth = min(depth, budget)
    width = max(1, round(budget / depth))
    return [width] + [1] * (depth - 1)


def schedule_size(branching: list[int]) -> int:
    """Maximum node count a branching schedule can produce."""
    total = 0
    level = 1
    for width in branching:
        level *= width
        total += level
    return total
