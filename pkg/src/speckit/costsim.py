"""Latency model for decoding with parameters streamed from host memory.

A forward pass that has to reload the model takes the maximum of the
parameter-transfer time and the compute time, so the cost of a pass is
flat in the token count until compute catches up with the transfer (the
load-bound plateau) and linear afterwards. Combining that pass cost with
a measured acceptance curve gives end-to-end throughput estimates and a
best draft budget.

The compute term is modeled linear in tokens; the model is meant for
budgets up to a few thousand tokens, below the regime where attention
cost bends the curve upward.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class CostModel:
    """Hardware parameters for the offloading simulation.

    target_bytes / draft_bytes: parameter sizes of the two models.
    bandwidth: host-to-device transfer rate in bytes/second.
    compute_rate: tokens/second the device sustains once saturated.
    fixed_overhead: per-call setup cost in seconds.
    prefetch_fraction: share of target bytes preloaded while drafting.
    draft_step_time: seconds per draft-model batch call (draft resident).
    """

    target_bytes: float
    bandwidth: float
    compute_rate: float
    draft_bytes: float = 0.0
    fixed_overhead: float = 0.0
    prefetch_fraction: float = 0.0
    draft_step_time: float = 0.0

    def __post_init__(self) -> None:
        for name in ("target_bytes", "bandwidth", "compute_rate"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        for name in ("draft_bytes", "fixed_overhead", "draft_step_time"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0 <= self.prefetch_fraction <= 1:
            raise ValueError("prefetch_fraction must be in [0, 1]")

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def forward_time(cm: CostModel, n_tokens: float) -> float:
    """Seconds for one target forward pass over ``n_tokens`` tokens."""
    if n_tokens < 1:
        raise ValueError(f"n_tokens must be >= 1, got {n_tokens}")
    load = (1.0 - cm.prefetch_fraction) * cm.target_bytes / cm.bandwidth
    compute = n_tokens / cm.compute_rate
    return cm.fixed_overhead + max(load, compute)


def crossover_tokens(cm: CostModel) -> float:
    """Token count where compute time equals the parameter-load time."""
    return cm.compute_rate * (1.0 - cm.prefetch_fraction) * cm.target_bytes / cm.bandwidth


@dataclass
class AcceptanceCurve:
    """Measured generation rate and draft effort per budget.

    budgets must be strictly increasing; ``rounds`` holds the mean number
    of draft-model batch calls per target call at each budget.
    """

    budgets: list[int]
    gen_rates: list[float]
    rounds: list[float]

    def __post_init__(self) -> None:
        if len(self.budgets) != len(self.gen_rates) or len(self.budgets) != len(self.rounds):
            raise ValueError("budgets, gen_rates and rounds must have equal length")
        if not self.budgets:
            raise ValueError("curve must have at least one point")
        if any(b2 <= b1 for b1, b2 in zip(self.budgets, self.budgets[1:])):
            raise ValueError(f"budgets must be strictly increasing, got {self.budgets}")

    def _interp(self, values: list[float], budget: float) -> float:
        if not self.budgets[0] <= budget <= self.budgets[-1]:
            raise ValueError(
                f"budget {budget} outside measured range "
                f"[{self.budgets[0]}, {self.budgets[-1]}]; no extrapolation"
            )
        return float(np.interp(budget, self.budgets, values))

    def gen_rate_at(self, budget: float) -> float:
        return self._interp(self.gen_rates, budget)

    def rounds_at(self, budget: float) -> float:
        return self._interp(self.rounds, budget)


def draft_time(cm: CostModel, curve: AcceptanceCurve, budget: float) -> float:
    """Seconds spent drafting per target call at the given budget.

    Prefetch overlap is credited once, inside ``forward_time`` via
    ``prefetch_fraction``; it is not discounted here again.
    """
    return curve.rounds_at(budget) * cm.draft_step_time


def estimate_throughput(cm: CostModel, curve: AcceptanceCurve, budget: float) -> float:
    """Predicted end-to-end tokens/second at one draft budget."""
    step = draft_time(cm, curve, budget) + forward_time(cm, budget)
    return curve.gen_rate_at(budget) / step


def sequential_throughput(cm: CostModel) -> float:
    """Tokens/second of plain decoding: one token per offloaded pass."""
    return 1.0 / forward_time(cm, 1)


@dataclass(frozen=True)
class BudgetChoice:
    budget: int
    tokens_per_second: float
    speedup: float


def optimize_budget(cm: CostModel, curve: AcceptanceCurve) -> BudgetChoice:
    """Sweep the measured budgets for the throughput-optimal draft size.

    Speedup is measured against sequential decoding on the same hardware,
    so a constant curve at rate 1 with zero draft cost reports exactly 1.
    """
    if len(curve.budgets) < 2:
        raise ValueError("curve must have at least 2 points to optimize over")
    throughputs = [estimate_throughput(cm, curve, b) for b in curve.budgets]
    best = int(np.argmax(throughputs))
    return BudgetChoice(
        budget=curve.budgets[best],
        tokens_per_second=throughputs[best],
        speedup=throughputs[best] / sequential_throughput(cm),
    )


def cost_model_from_json(document: str) -> CostModel:
    data = json.loads(document)
    return CostModel(**data)


def load_preset(name_or_path: str) -> CostModel:
    """Load a bundled preset by name, or any cost-model JSON by path."""
    candidate = Path(name_or_path)
    if candidate.suffix == ".json" and candidate.exists():
        return cost_model_from_json(candidate.read_text())
    try:
        text = (resources.files("speckit") / "presets" / f"{name_or_path}.json").read_text()
    except FileNotFoundError:
        raise ValueError(f"unknown cost-model preset {name_or_path!r}") from None
    return cost_model_from_json(text)


def preset_names() -> list[str]:
    preset_dir = resources.files("speckit") / "presets"
    return sorted(p.name.removesuffix(".json") for p in preset_dir.iterdir())
