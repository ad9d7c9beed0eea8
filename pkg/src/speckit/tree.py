"""Draft trees of candidate continuations and their construction strategies.

A draft tree hangs off an anchor prefix and holds candidate future tokens,
each scored by the cumulative log-probability of its root path under the
draft model. Three builders produce trees:

- ``build_sssp``: batched best-first search that returns exactly the
  budget-many highest-cumulative-probability sequences (a shortest-path
  search on negative log-probabilities);
- ``build_beam``: standard beam search, kept as the deliberately weaker
  strategy for comparison (pruned branches are discarded);
- ``build_stochastic``: samples children from the draft distribution at
  every node, the drafting step of tree speculative sampling.

Node ordering everywhere breaks ties by (cumulative log-prob desc, depth
asc, path lexicographic asc), so builds are deterministic and comparable
against exhaustive enumeration.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .models import LanguageModel, Prefix
from .rng import CounterRng
from .sampling import SamplingConfig, apply_warp, sample

ROOT = -1


@dataclass(frozen=True)
class BuilderParams:
    """Search budget for tree construction.

    budget: maximum number of tree nodes (the anchor root is not counted).
    max_depth: maximum root-path length of any node.
    batch_size: nodes expanded per draft-model call.
    """

    budget: int
    max_depth: int
    batch_size: int = 8

    def __post_init__(self) -> None:
        if self.budget < 1:
            raise ValueError(f"budget must be >= 1, got {self.budget}")
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass
class DraftNode:
    """One candidate token in a draft tree."""

    node_id: int
    parent: int  # node_id of the parent, or ROOT
    token: int
    edge_logprob: float
    cum_logprob: float
    depth: int
    multiplicity: int = 1


@dataclass
class FlattenedTree:
    """Topological layout of a tree for one batched verification pass.

    ``order`` lists node ids parents-first; position 0 of the mask is the
    anchor root and position i+1 corresponds to ``order[i]``. Mask entry
    [i, j] is True iff position j is position i itself or one of its
    ancestors.
    """

    order: list[int]
    ancestor_mask: np.ndarray


class DraftTree:
    """Prefix-closed tree of draft tokens anchored at a prompt prefix.

    Nodes are appended parents-first; sibling order is insertion order.
    ``rounds`` records how many draft-model batch calls the builder used.
    ``draft_dists`` (filled by the stochastic builder) maps a node id, or
    ROOT, to the warped draft distribution its children were sampled from.
    """

    def __init__(self, prefix: Prefix) -> None:
        self.prefix: Prefix = tuple(prefix)
        self.nodes: list[DraftNode] = []
        self.rounds: int = 0
        self.draft_dists: dict[int, np.ndarray] | None = None
        self._children: dict[int, list[int]] = {ROOT: []}

    def __len__(self) -> int:
        return len(self.nodes)

    def add_child(self, parent: int, token: int, edge_logprob: float) -> int:
        if parent != ROOT:
            self._check_id(parent)
        node_id = len(self.nodes)
        parent_cum = 0.0 if parent == ROOT else self.nodes[parent].cum_logprob
        parent_depth = 0 if parent == ROOT else self.nodes[parent].depth
        node = DraftNode(
            node_id=node_id,
            parent=parent,
            token=int(token),
            edge_logprob=float(edge_logprob),
            cum_logprob=parent_cum + float(edge_logprob),
            depth=parent_depth + 1,
        )
        self.nodes.append(node)
        self._children[node_id] = []
        self._children[parent].append(node_id)
        return node_id

    def _check_id(self, node_id: int) -> None:
        if not 0 <= node_id < len(self.nodes):
            raise KeyError(f"no node with id {node_id}")

    def children_of(self, node_id: int) -> list[int]:
        if node_id != ROOT:
            self._check_id(node_id)
        return list(self._children[node_id])

    def child_with_token(self, node_id: int, token: int) -> int | None:
        for child in self._children[node_id]:
            if self.nodes[child].token == token:
                return child
        return None

    def path_tokens(self, node_id: int) -> Prefix:
        """Tokens along the root path, root child first."""
        if node_id == ROOT:
            return ()
        self._check_id(node_id)
        path = []
        while node_id != ROOT:
            node = self.nodes[node_id]
            path.append(node.token)
            node_id = node.parent
        return tuple(reversed(path))

    def full_prefix(self, node_id: int) -> Prefix:
        """Anchor prefix extended by the node's root path."""
        return self.prefix + self.path_tokens(node_id)

    def cumulative_logprob(self, node_id: int) -> float:
        """Root-path sum of edge log-probabilities, recomputed from the edges."""
        self._check_id(node_id)
        total = 0.0
        while node_id != ROOT:
            node = self.nodes[node_id]
            total += node.edge_logprob
            node_id = node.parent
        return total

    def max_depth(self) -> int:
        return max((n.depth for n in self.nodes), default=0)

    def total_mass(self) -> float:
        """Sum of cumulative probabilities over all nodes.

        Summed in sorted order so identical node sets give identical sums.
        """
        masses = sorted(math.exp(n.cum_logprob) for n in self.nodes)
        return float(sum(masses))

    def to_json(self) -> str:
        """Debug dump of the node table as a single JSON document."""
        return json.dumps(
            {
                "prefix": list(self.prefix),
                "nodes": [
                    {
                        "id": n.node_id,
                        "parent": n.parent,
                        "token": n.token,
                        "edge_logprob": n.edge_logprob,
                        "cum_logprob": n.cum_logprob,
                    }
                    for n in self.nodes
                ],
            }
        )

    @classmethod
    def from_json(cls, document: str) -> "DraftTree":
        """Rebuild a tree from its debug dump (golden-file comparisons)."""
        data = json.loads(document)
        tree = cls(prefix=tuple(data["prefix"]))
        for record in data["nodes"]:
            node_id = tree.add_child(record["parent"], record["token"], record["edge_logprob"])
            if node_id != record["id"]:
                raise ValueError(f"node ids must be contiguous; got {record['id']}")
            stored = record["cum_logprob"]
            if abs(tree.nodes[node_id].cum_logprob - stored) > 1e-9:
                raise ValueError(f"inconsistent cum_logprob for node {node_id}")
        return tree


def flatten(tree: DraftTree) -> FlattenedTree:
    """Topological order plus the ancestor mask used for batched verification."""
    order = [n.node_id for n in tree.nodes]  # ids are assigned parents-first
    m = len(order) + 1
    mask = np.zeros((m, m), dtype=bool)
    mask[0, 0] = True
    for node in tree.nodes:
        pos = node.node_id + 1
        parent_pos = node.parent + 1  # ROOT maps to position 0
        mask[pos] = mask[parent_pos]
        mask[pos, pos] = True
    return FlattenedTree(order=order, ancestor_mask=mask)


def _scored_dist(
    dist: np.ndarray, warp: SamplingConfig | None, warp_scores: bool
) -> np.ndarray:
    if warp is not None and warp_scores:
        return apply_warp(dist, warp)
    return dist


def _log_edges(dist: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(dist)


# Candidate ordering key: (nll asc, depth asc, path lexicographic asc).
# Distinct candidates always have distinct paths, so the order is total.
_Key = tuple[float, int, Prefix]


def build_sssp(
    prefix: Prefix,
    draft: LanguageModel,
    params: BuilderParams,
    warp: SamplingConfig | None = None,
    warp_scores: bool = True,
) -> DraftTree:
    """Best-first search for the budget-many most likely continuations.

    Maintains a frontier of candidate extensions keyed by cumulative
    negative log-probability. Each round extracts up to ``batch_size``
    candidates that can still beat the current budget threshold, evaluates
    the draft model on them in one batch, and enqueues their children.
    The threshold is the budget-th best cumulative score seen so far;
    candidates at the depth cap are kept as nodes but never expanded.

    The returned tree is exactly the top-``budget`` sequences of length at
    most ``max_depth`` by cumulative draft probability, under the module's
    documented tie-breaks.
    """
    tree = DraftTree(prefix)
    budget, max_depth, batch = params.budget, params.max_depth, params.batch_size

    # Materialized candidates: path -> (nll, depth, edge_logprob). Kept pruned
    # to the budget-many best; anything worse than the budget-th best key can
    # never re-enter the answer because child keys exceed parent keys.
    materialized: dict[Prefix, tuple[float, int, float]] = {}
    heap: list[tuple[float, int, Prefix, float]] = []
    threshold: _Key | None = None  # budget-th best key once enough candidates exist

    def prune_materialized() -> None:
        nonlocal materialized, threshold
        if len(materialized) >= budget:
            items = sorted(
                materialized.items(), key=lambda kv: (kv[1][0], kv[1][1], kv[0])
            )[:budget]
            materialized = dict(items)
            worst_path, (worst_nll, worst_depth, _) = items[-1]
            threshold = (worst_nll, worst_depth, worst_path)

    pending_root = True
    while True:
        batch_paths: list[Prefix] = []
        if pending_root:
            batch_paths.append(())
            pending_root = False
        while len(batch_paths) < batch and heap:
            nll, depth, path, _ = heap[0]
            if threshold is not None and (nll, depth, path) >= threshold:
                break  # nothing left in the frontier can enter the budget
            heapq.heappop(heap)
            if depth < max_depth:
                batch_paths.append(path)
        if not batch_paths:
            break

        dists = draft.next_distributions([prefix + p for p in batch_paths])
        tree.rounds += 1

        children: list[tuple[float, int, Prefix, float]] = []
        for path, dist in zip(batch_paths, dists):
            scored = _scored_dist(dist, warp, warp_scores)
            parent_nll = 0.0 if not path else materialized[path][0]
            log_edges = _log_edges(scored)
            for token in np.nonzero(scored > 0)[0]:
                edge = float(log_edges[token])
                children.append((parent_nll - edge, len(path) + 1, path + (int(token),), edge))

        # Only the budget-many best children can matter this round.
        children.sort(key=lambda c: (c[0], c[1], c[2]))
        for nll, depth, path, edge in children[:budget]:
            materialized[path] = (nll, depth, edge)
            heapq.heappush(heap, (nll, depth, path, edge))
        prune_materialized()

        # Keep the frontier no larger than the budget.
        if len(heap) > budget:
            heap = heapq.nsmallest(budget, heap)
            heapq.heapify(heap)

    # Final trim: the budget-many best materialized candidates, in key order,
    # which also inserts parents before children.
    final = sorted(materialized.items(), key=lambda kv: (kv[1][0], kv[1][1], kv[0]))
    path_to_id: dict[Prefix, int] = {(): ROOT}
    for path, (_, _, edge) in final[:budget]:
        parent_id = path_to_id[path[:-1]]
        path_to_id[path] = tree.add_child(parent_id, path[-1], edge)
    return tree


def build_beam(
    prefix: Prefix,
    draft: LanguageModel,
    beam_size: int,
    max_len: int,
    warp: SamplingConfig | None = None,
    warp_scores: bool = True,
) -> DraftTree:
    """Standard beam search; the tree is the prefix closure of the final beam.

    Hypotheses pruned out of the beam are discarded entirely, which is
    what makes this strategy weaker than the best-first search at equal
    node budgets.
    """
    if beam_size < 1:
        raise ValueError(f"beam_size must be >= 1, got {beam_size}")
    if max_len < 1:
        raise ValueError(f"max_len must be >= 1, got {max_len}")

    tree = DraftTree(prefix)
    beams: list[tuple[float, Prefix]] = [(0.0, ())]  # (nll, path)
    edges: dict[Prefix, float] = {}

    for _ in range(max_len):
        dists = draft.next_distributions([prefix + path for _, path in beams])
        tree.rounds += 1
        candidates: list[tuple[float, Prefix, float]] = []
        for (nll, path), dist in zip(beams, dists):
            scored = _scored_dist(dist, warp, warp_scores)
            log_edges = _log_edges(scored)
            for token in np.nonzero(scored > 0)[0]:
                edge = float(log_edges[token])
                candidates.append((nll - edge, path + (int(token),), edge))
        if not candidates:
            break
        candidates.sort(key=lambda c: (c[0], c[1]))
        kept = candidates[:beam_size]
        for _, path, edge in kept:
            edges[path] = edge
        beams = [(nll, path) for nll, path, _ in kept]

    # Union of all prefixes of the surviving hypotheses.
    keep: set[Prefix] = set()
    for _, path in beams:
        for end in range(1, len(path) + 1):
            keep.add(path[:end])
    path_to_id: dict[Prefix, int] = {(): ROOT}
    for path in sorted(keep, key=lambda p: (len(p), p)):
        parent_id = path_to_id[path[:-1]]
        path_to_id[path] = tree.add_child(parent_id, path[-1], edges[path])
    return tree


def build_stochastic(
    prefix: Prefix,
    draft: LanguageModel,
    branching: list[int],
    rng: CounterRng,
    warp: SamplingConfig | None = None,
    warp_scores: bool = True,
) -> DraftTree:
    """Sample a draft tree: ``branching[d]`` children per node at depth d.

    Children are drawn i.i.d. from the warped draft distribution; repeats
    of the same token are merged into one node with its multiplicity
    recorded. The distribution each node's children were sampled from is
    kept on the tree for later verification.
    """
    if not branching:
        raise ValueError("branching schedule must be non-empty")
    if any(w < 1 for w in branching):
        raise ValueError(f"branching widths must be >= 1, got {branching}")

    tree = DraftTree(prefix)
    tree.draft_dists = {}
    level: list[int] = [ROOT]
    for width in branching:
        if not level:
            break
        dists = draft.next_distributions([tree.full_prefix(n) for n in level])
        tree.rounds += 1
        next_level: list[int] = []
        for node_id, dist in zip(level, dists):
            q = _scored_dist(dist, warp, warp_scores)
            tree.draft_dists[node_id] = q
            log_q = _log_edges(q)
            for _ in range(width):
                token = sample(q, rng)
                existing = tree.child_with_token(node_id, token)
                if existing is not None:
                    tree.nodes[existing].multiplicity += 1
                else:
                    child = tree.add_child(node_id, token, float(log_q[token]))
                    next_level.append(child)
        level = next_level
    return tree
