"""Speculative decoding engines over exact toy language models.

The package pairs a deterministic best-first draft-tree search with a
cache-based generation loop that is bit-identical to sequential sampling,
a stochastic tree-verification baseline, and a latency model for decoding
with offloaded parameters. All model backends are exact (tabular, Markov,
n-gram), which makes every probabilistic claim testable either bit-exactly
or against closed-form values.
"""

from .costsim import (
    AcceptanceCurve,
    BudgetChoice,
    CostModel,
    estimate_throughput,
    forward_time,
    load_preset,
    optimize_budget,
)
from .engine import GenStats, ProbCache, generate_sequential, generate_specexec, precompute
from .models import (
    LanguageModel,
    MarkovModel,
    NgramModel,
    TabularModel,
    make_synthetic,
    model_from_json,
    train_ngram,
)
from .rng import CounterRng
from .sampling import SamplingConfig, apply_warp, sample
from .specinfer import VerifyOutcome, branching_for_budget, generate_specinfer, verify_specinfer
from .tree import (
    BuilderParams,
    DraftTree,
    FlattenedTree,
    build_beam,
    build_sssp,
    build_stochastic,
    flatten,
)

__version__ = "0.1.0"

__all__ = [
    "AcceptanceCurve",
    "BudgetChoice",
    "BuilderParams",
    "CostModel",
    "CounterRng",
    "DraftTree",
    "FlattenedTree",
    "GenStats",
    "LanguageModel",
    "MarkovModel",
    "NgramModel",
    "ProbCache",
    "SamplingConfig",
    "TabularModel",
    "VerifyOutcome",
    "apply_warp",
    "branching_for_budget",
    "build_beam",
    "build_sssp",
    "build_stochastic",
    "estimate_throughput",
    "flatten",
    "forward_time",
    "generate_sequential",
    "generate_specexec",
    "generate_specinfer",
    "load_preset",
    "make_synthetic",
    "model_from_json",
    "optimize_budget",
    "precompute",
    "sample",
    "train_ngram",
    "verify_specinfer",
]
