"""The desk-scale experiments: coverage, acceptance sweeps, throughput, equivalence.

Each runner takes an ``ExperimentConfig``, fans its cells out over an
optional worker pool (cells are independent; results are ordered by cell
index, never by completion), and returns a report object that can also be
written as versioned CSV / JSON-lines.
"""

from __future__ import annotations

import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from ..costsim import AcceptanceCurve, BudgetChoice, CostModel, forward_time, optimize_budget
from ..costsim import draft_time as _draft_time
from ..costsim import estimate_throughput
from .. import engine
from ..engine import GenStats, generate_sequential, generate_specexec, stats_record
from ..models import LanguageModel, Prefix, make_synthetic
from ..sampling import SamplingConfig, apply_warp
from ..specinfer import branching_for_budget, generate_specinfer, schedule_size
from ..tree import BuilderParams
from .config import ExperimentConfig
from . import prompts as bundled_prompts
from .io import write_csv, write_jsonl


def _map_cells(fn: Callable[[Any], Any], cells: Sequence[Any], workers: int) -> list[Any]:
    """Run independent cells, returning results in cell order."""
    if workers <= 1 or len(cells) <= 1:
        return [fn(cell) for cell in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cells))


def bootstrap_mean_ci(
    values: Sequence[float], n_resamples: int = 1000, seed: int = 0, alpha: float = 0.05
) -> tuple[float, float]:
    """Percentile bootstrap confidence interval for the mean."""
    arr = np.asarray(values, dtype=np.float64)
    gen = np.random.default_rng(seed)
    idx = gen.integers(0, arr.size, size=(n_resamples, arr.size))
    means = arr[idx].mean(axis=1)
    return float(np.quantile(means, alpha / 2)), float(np.quantile(means, 1 - alpha / 2))


def resolve_prompts(cfg: ExperimentConfig, target: LanguageModel) -> list[Prefix]:
    """Materialize the prompt list for an experiment."""
    src = cfg.prompt_source
    kind = src.get("kind")
    if kind == "inline":
        if "token_lists" in src:
            return [tuple(int(t) for t in toks) for toks in src["token_lists"]]
        return [target.encode(text) for text in src["texts"]]
    if kind == "snippet":
        names = src.get("names", list(bundled_prompts.SNIPPETS))
        return [target.encode(bundled_prompts.SNIPPETS[name]) for name in names]
    if kind == "file":
        path = Path(src["path"])
        if cfg.base_dir is not None and not path.is_absolute():
            path = cfg.base_dir / path
        lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
        return [target.encode(ln) for ln in lines]
    if kind == "sampled":
        base_seed = src.get("seed", 7777)
        length = src.get("length", 8)
        out = []
        for j in range(src.get("count", 2)):
            sample_cfg = SamplingConfig(seed=base_seed + j, max_new_tokens=length)
            tokens, _ = generate_sequential((), target, sample_cfg)
            out.append(tuple(tokens))
        return out
    raise ValueError(f"unknown prompt source kind {kind!r}")


# ---------------------------------------------------------------------------
# Coverage
# ---------------------------------------------------------------------------


@dataclass
class CoverageReport:
    """Mean target mass captured by top-k tokens, by the target's own ranking
    and by the draft model's ranking, averaged over evaluation positions."""

    ks: list[int]
    target_mass: list[float]
    draft_mass: list[float]
    positions: int

    def validate(self) -> None:
        t = np.asarray(self.target_mass)
        d = np.asarray(self.draft_mass)
        tol = 1e-9
        if np.any(np.diff(t) < -tol) or np.any(np.diff(d) < -tol):
            raise AssertionError("coverage curves must be non-decreasing in k")
        if np.any(t > 1 + tol) or np.any(d > 1 + tol):
            raise AssertionError("coverage curves must be bounded by 1")
        if np.any(t + tol < d):
            raise AssertionError("target-optimal curve must dominate the draft curve")

    def rows(self) -> list[list[Any]]:
        return [
            [k, t, d] for k, t, d in zip(self.ks, self.target_mass, self.draft_mass)
        ]


def run_coverage(cfg: ExperimentConfig) -> CoverageReport:
    """Measure how much target probability mass top-k draft choices capture.

    Evaluation positions are prefixes of continuations sampled from the
    target model itself (raw probabilities unless ``coverage_warp``).
    """
    target = cfg.target_model()
    draft = cfg.draft_model()
    base_prompts = resolve_prompts(cfg, target)
    k_max = cfg.k_max or target.vocab_size
    warp_cfgs = cfg.sampling_configs(seed=0)
    warp = warp_cfgs[0] if cfg.coverage_warp else None

    def positions_for(args: tuple[int, Prefix]) -> list[Prefix]:
        idx, prompt = args
        sample_cfg = SamplingConfig(
            temperature=warp.temperature if warp else 1.0,
            top_p=warp.top_p if warp else 1.0,
            seed=9000 + idx,
            max_new_tokens=cfg.coverage_positions,
        )
        tokens, _ = generate_sequential(prompt, target, sample_cfg)
        return [prompt + tuple(tokens[:j]) for j in range(len(tokens))]

    all_positions: list[Prefix] = []
    for chunk in _map_cells(positions_for, list(enumerate(base_prompts)), cfg.workers):
        all_positions.extend(chunk)

    target_curves = np.zeros(k_max)
    draft_curves = np.zeros(k_max)
    for prefix in all_positions:
        p_t = target.next_distribution(prefix)
        p_d = draft.next_distribution(prefix)
        if warp is not None:
            p_t = apply_warp(p_t, warp)
            p_d = apply_warp(p_d, warp)
        ids = np.arange(p_t.size)
        target_order = np.lexsort((ids, -p_t))
        draft_order = np.lexsort((ids, -p_d))
        target_curves += np.cumsum(p_t[target_order])[:k_max]
        draft_curves += np.cumsum(p_t[draft_order])[:k_max]

    n = len(all_positions)
    report = CoverageReport(
        ks=list(range(1, k_max + 1)),
        target_mass=(target_curves / n).tolist(),
        draft_mass=(draft_curves / n).tolist(),
        positions=n,
    )
    report.validate()
    if cfg.output_path:
        write_csv(
            cfg.output_path, ["k", "target_topk_mass", "draft_topk_mass"], report.rows()
        )
    return report


# ---------------------------------------------------------------------------
# Acceptance vs budget
# ---------------------------------------------------------------------------


@dataclass
class AcceptanceRow:
    method: str
    budget: int
    n_runs: int
    mean_gen_rate: float
    ci_lo: float
    ci_hi: float
    mean_rounds: float


@dataclass
class AcceptanceResult:
    rows: list[AcceptanceRow]
    curves: dict[str, AcceptanceCurve]
    run_records: list[dict[str, Any]]

    def row(self, method: str, budget: int) -> AcceptanceRow:
        for row in self.rows:
            if row.method == method and row.budget == budget:
                return row
        raise KeyError(f"no row for method={method!r} budget={budget}")


def run_acceptance(
    cfg: ExperimentConfig, methods: tuple[str, ...] = ("sx", "si")
) -> AcceptanceResult:
    """Sweep generation rate over the budget grid for both engines.

    The same prompts, seeds and warps are used for every (method, budget)
    cell so the comparison is paired.
    """
    target = cfg.target_model()
    draft = cfg.draft_model()
    prompt_list = resolve_prompts(cfg, target)

    cells: list[tuple[str, int, SamplingConfig, Prefix]] = []
    for method in methods:
        for budget in cfg.budgets:
            for seed in cfg.seeds:
                for warp in cfg.sampling_configs(seed):
                    for prompt in prompt_list:
                        cells.append((method, budget, warp, prompt))

    def run_cell(cell: tuple[str, int, SamplingConfig, Prefix]) -> tuple[GenStats, dict]:
        method, budget, warp, prompt = cell
        if method == "sx":
            params = BuilderParams(budget, cfg.max_depth, cfg.batch_size)
            _, stats = generate_specexec(prompt, draft, target, params, warp)
            record = stats_record("sx", warp, stats, budget, cfg.max_depth, cfg.batch_size)
        elif method == "si":
            branching = cfg.branching or branching_for_budget(budget, cfg.si_depth)
            _, stats = generate_specinfer(prompt, draft, target, branching, warp)
            record = stats_record(
                "si", warp, stats, schedule_size(branching), len(branching), branching[0]
            )
        else:
            raise ValueError(f"unknown method {method!r}")
        return stats, record

    results = _map_cells(run_cell, cells, cfg.workers)

    grouped: dict[tuple[str, int], list[GenStats]] = {}
    for (method, budget, _, _), (stats, _) in zip(cells, results):
        grouped.setdefault((method, budget), []).append(stats)
    run_records = [record for _, record in results]

    rows: list[AcceptanceRow] = []
    curves: dict[str, AcceptanceCurve] = {}
    for method in methods:
        budgets, rates, rounds = [], [], []
        for budget in cfg.budgets:
            stats_list = grouped[(method, budget)]
            gen_rates = [s.generation_rate for s in stats_list]
            mean_rounds = float(
                np.mean([s.draft_calls / max(1, s.target_calls) for s in stats_list])
            )
            lo, hi = bootstrap_mean_ci(gen_rates, seed=zlib.crc32(f"{method}:{budget}".encode()))
            rows.append(
                AcceptanceRow(
                    method=method,
                    budget=budget,
                    n_runs=len(gen_rates),
                    mean_gen_rate=float(np.mean(gen_rates)),
                    ci_lo=lo,
                    ci_hi=hi,
                    mean_rounds=mean_rounds,
                )
            )
            budgets.append(budget)
            rates.append(float(np.mean(gen_rates)))
            rounds.append(mean_rounds)
        curves[method] = AcceptanceCurve(budgets, rates, rounds)

    if cfg.output_path:
        write_csv(
            cfg.output_path,
            ["method", "budget", "n_runs", "mean_gen_rate", "ci_lo", "ci_hi", "mean_rounds"],
            [
                [r.method, r.budget, r.n_runs, r.mean_gen_rate, r.ci_lo, r.ci_hi, r.mean_rounds]
                for r in rows
            ],
        )
        write_jsonl(Path(cfg.output_path).with_suffix(".runs.jsonl"), run_records)
    return AcceptanceResult(rows=rows, curves=curves, run_records=run_records)


# ---------------------------------------------------------------------------
# Throughput
# ---------------------------------------------------------------------------


@dataclass
class ThroughputRow:
    method: str
    budget: int
    gen_rate: float
    t_draft: float
    t_forward: float
    tok_per_s: float
    speedup: float
    optimal: bool


@dataclass
class ThroughputResult:
    rows: list[ThroughputRow]
    choices: dict[str, BudgetChoice]


def run_throughput(
    cfg: ExperimentConfig,
    cost_model: CostModel,
    curves: dict[str, AcceptanceCurve] | None,
) -> ThroughputResult:
    """Join measured acceptance curves with the cost model.

    ``curves`` must come from ``run_acceptance`` (or equivalent); running
    without one is an error rather than a silent re-measure.
    """
    if not curves:
        raise ValueError("run_throughput requires acceptance curves; run run_acceptance first")
    rows: list[ThroughputRow] = []
    choices: dict[str, BudgetChoice] = {}
    sequential = 1.0 / forward_time(cost_model, 1)
    for method, curve in sorted(curves.items()):
        choice = optimize_budget(cost_model, curve)
        choices[method] = choice
        for budget in curve.budgets:
            tput = estimate_throughput(cost_model, curve, budget)
            rows.append(
                ThroughputRow(
                    method=method,
                    budget=budget,
                    gen_rate=curve.gen_rate_at(budget),
                    t_draft=_draft_time(cost_model, curve, budget),
                    t_forward=forward_time(cost_model, budget),
                    tok_per_s=tput,
                    speedup=tput / sequential,
                    optimal=budget == choice.budget,
                )
            )
    if cfg.output_path:
        write_csv(
            cfg.output_path,
            ["method", "K", "gen_rate", "t_draft", "t_forward", "tok_per_s", "speedup", "optimal"],
            [
                [
                    r.method,
                    r.budget,
                    r.gen_rate,
                    r.t_draft,
                    r.t_forward,
                    r.tok_per_s,
                    r.speedup,
                    int(r.optimal),
                ]
                for r in rows
            ],
        )
    return ThroughputResult(rows=rows, choices=choices)


# ---------------------------------------------------------------------------
# Equivalence
# ---------------------------------------------------------------------------


@dataclass
class EquivalenceCell:
    index: int
    draft_seed: int
    target_seed: int
    prompt: Prefix
    seed: int
    temperature: float
    top_p: float
    ok: bool = True
    divergence_position: int | None = None
    expected: list[int] = field(default_factory=list)
    got: list[int] = field(default_factory=list)

    def provenance(self) -> dict[str, Any]:
        """Everything needed to replay this cell in isolation."""
        return {
            "index": self.index,
            "draft_seed": self.draft_seed,
            "target_seed": self.target_seed,
            "prompt": list(self.prompt),
            "seed": self.seed,
            "temperature": self.temperature,
            "top_p": self.top_p,
            "rng_stream": engine.GENERATION_STREAM,
        }


@dataclass
class EquivalenceReport:
    cells: list[EquivalenceCell]

    @property
    def passed(self) -> bool:
        return all(cell.ok for cell in self.cells)

    @property
    def failures(self) -> list[EquivalenceCell]:
        return [cell for cell in self.cells if not cell.ok]


def run_equivalence(cfg: ExperimentConfig) -> EquivalenceReport:
    """Assert cached speculative decoding matches the sequential oracle.

    Every cell gets its own synthetic model pair, prompt, seed and warp;
    any token mismatch is reported with the first divergence position and
    full reproduction data.
    """
    warps = cfg.sampling
    budget = cfg.budgets[0]

    def run_cell(index: int) -> EquivalenceCell:
        draft_seed = 101 + 2 * index
        target_seed = 102 + 2 * index
        draft = make_synthetic(draft_seed, cfg.vocab_size, cfg.sharpness)
        target = make_synthetic(target_seed, cfg.vocab_size, cfg.sharpness)
        prompt_cfg = SamplingConfig(seed=5000 + index, max_new_tokens=4)
        prompt, _ = generate_sequential((), target, prompt_cfg)
        prompt = tuple(prompt)

        warp_spec = warps[index % len(warps)]
        run_cfg = SamplingConfig(
            temperature=warp_spec.get("temperature", 1.0),
            top_p=warp_spec.get("top_p", 1.0),
            seed=cfg.seeds[index % len(cfg.seeds)],
            max_new_tokens=cfg.max_new_tokens,
        )
        params = BuilderParams(budget, cfg.max_depth, cfg.batch_size)
        expected, _ = generate_sequential(prompt, target, run_cfg)
        got, _ = engine.generate_specexec(prompt, draft, target, params, run_cfg)

        cell = EquivalenceCell(
            index=index,
            draft_seed=draft_seed,
            target_seed=target_seed,
            prompt=prompt,
            seed=run_cfg.seed,
            temperature=run_cfg.temperature,
            top_p=run_cfg.top_p,
        )
        if got != expected:
            cell.ok = False
            cell.expected = expected
            cell.got = got
            diverge = next(
                (i for i, (a, b) in enumerate(zip(expected, got)) if a != b),
                min(len(expected), len(got)),
            )
            cell.divergence_position = diverge
        return cell

    cells = _map_cells(run_cell, list(range(cfg.equivalence_cells)), cfg.workers)
    report = EquivalenceReport(cells=cells)
    if cfg.output_path:
        write_jsonl(
            cfg.output_path,
            [
                {**cell.provenance(), "ok": cell.ok, "divergence_position": cell.divergence_position}
                for cell in cells
            ],
        )
    return report
