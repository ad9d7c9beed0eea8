"""Experiment runners: coverage invariants, reproducibility, equivalence grid."""

import json
from pathlib import Path

import numpy as np
import pytest

import speckit.engine
from speckit.costsim import load_preset
from speckit.harness import (
    ExperimentConfig,
    bootstrap_mean_ci,
    resolve_model,
    resolve_prompts,
    run_acceptance,
    run_coverage,
    run_equivalence,
    run_throughput,
)
from speckit.models import TabularModel


def synthetic_spec(seed=1, vocab=12, sharpness=0.2):
    return {"kind": "synthetic", "seed": seed, "vocab_size": vocab, "sharpness": sharpness}


def power_spec(base, power=0.7):
    return {"kind": "power", "base": base, "power": power}


# ---------------------------------------------------------------------------
# config / model resolution
# ---------------------------------------------------------------------------


def test_resolve_model_kinds(tmp_path):
    tab = resolve_model({"kind": "tabular", "row": [0.7, 0.3]})
    assert tab.next_distribution(()).tolist() == [0.7, 0.3]
    syn = resolve_model(synthetic_spec())
    assert syn.vocab_size == 12
    ngram = resolve_model({"kind": "ngram", "corpus_text": "abab", "order": 1, "smoothing": 1.0})
    assert ngram.vocab_size == 2
    path = tmp_path / "m.json"
    path.write_text(tab.to_json())
    from_file = resolve_model({"kind": "file", "path": str(path)})
    assert np.array_equal(from_file.next_distribution(()), tab.next_distribution(()))
    flat = resolve_model(power_spec(synthetic_spec()))
    assert flat.table.max() < syn.table.max()
    with pytest.raises(ValueError):
        resolve_model({"kind": "bert"})


def test_config_validation_and_file_loading(tmp_path):
    with pytest.raises(ValueError):
        ExperimentConfig(kind="training", target=synthetic_spec())
    with pytest.raises(ValueError):
        ExperimentConfig(kind="coverage", target=synthetic_spec(), budgets=[])
    with pytest.raises(ValueError):
        ExperimentConfig(kind="coverage", target=synthetic_spec(), seeds=[])

    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(
        json.dumps({"kind": "acceptance", "target": synthetic_spec(), "draft": synthetic_spec(2)})
    )
    cfg = ExperimentConfig.from_file(cfg_path)
    assert cfg.kind == "acceptance"
    assert cfg.base_dir == tmp_path

    missing = tmp_path / "missing.json"
    cfg_path.write_text(
        json.dumps(
            {
                "kind": "acceptance",
                "target": {"kind": "file", "path": str(missing)},
            }
        )
    )
    with pytest.raises(FileNotFoundError):
        ExperimentConfig.from_file(cfg_path)


def test_resolve_prompts_kinds(tmp_path):
    target = resolve_model({"kind": "ngram", "corpus_text": "the cat sat", "order": 1, "smoothing": 0.5})
    cfg = ExperimentConfig(
        kind="generate",
        target={"kind": "ngram", "corpus_text": "the cat sat", "order": 1, "smoothing": 0.5},
        prompt_source={"kind": "inline", "texts": ["cat"]},
    )
    assert resolve_prompts(cfg, target) == [target.encode("cat")]

    cfg.prompt_source = {"kind": "inline", "token_lists": [[0, 1], [2]]}
    assert resolve_prompts(cfg, target) == [(0, 1), (2,)]

    prompt_file = tmp_path / "prompts.txt"
    prompt_file.write_text("cat\nsat\n")
    cfg.prompt_source = {"kind": "file", "path": str(prompt_file)}
    assert len(resolve_prompts(cfg, target)) == 2

    cfg.prompt_source = {"kind": "sampled", "length": 5, "count": 3}
    sampled = resolve_prompts(cfg, target)
    assert len(sampled) == 3 and all(len(p) == 5 for p in sampled)
    # Deterministic: same config resolves the same prompts.
    assert sampled == resolve_prompts(cfg, target)


# ---------------------------------------------------------------------------
# coverage
# ---------------------------------------------------------------------------


def coverage_config(**overrides):
    base = synthetic_spec(seed=3, vocab=10, sharpness=0.3)
    defaults = dict(
        kind="coverage",
        target=base,
        draft=power_spec(base, 0.6),
        prompt_source={"kind": "sampled", "length": 4, "count": 2},
        coverage_positions=20,
    )
    defaults.update(overrides)
    return ExperimentConfig(**defaults)


def test_coverage_identical_models_coincide():
    cfg = coverage_config(draft=synthetic_spec(seed=3, vocab=10, sharpness=0.3))
    report = run_coverage(cfg)
    assert np.allclose(report.target_mass, report.draft_mass, atol=1e-12)


def test_coverage_full_vocab_reaches_one():
    report = run_coverage(coverage_config())
    assert report.ks[-1] == 10
    assert report.target_mass[-1] == pytest.approx(1.0, abs=1e-9)
    assert report.draft_mass[-1] == pytest.approx(1.0, abs=1e-9)


def test_coverage_curves_monotone_and_dominated():
    report = run_coverage(coverage_config())
    report.validate()
    assert all(b >= a - 1e-12 for a, b in zip(report.target_mass, report.target_mass[1:]))
    assert all(t >= d - 1e-12 for t, d in zip(report.target_mass, report.draft_mass))


def test_coverage_adversarial_draft_scores_low():
    # Draft ranks tokens in exactly reversed target order on a sharp target.
    sharp = [0.91, 0.03, 0.02, 0.02, 0.01, 0.01]
    cfg = ExperimentConfig(
        kind="coverage",
        target={"kind": "tabular", "row": sharp},
        draft={"kind": "tabular", "row": sharp[::-1]},
        prompt_source={"kind": "inline", "token_lists": [[0]]},
        coverage_positions=8,
    )
    report = run_coverage(cfg)
    assert report.target_mass[0] > 0.9
    assert report.draft_mass[0] < 0.1


def test_coverage_csv_written(tmp_path):
    out = tmp_path / "coverage.csv"
    run_coverage(coverage_config(output_path=str(out)))
    lines = out.read_text().splitlines()
    assert lines[0] == "schema_version,k,target_topk_mass,draft_topk_mass"
    assert len(lines) == 11


# ---------------------------------------------------------------------------
# acceptance
# ---------------------------------------------------------------------------


def acceptance_config(**overrides):
    base = synthetic_spec(seed=5, vocab=12, sharpness=0.1)
    defaults = dict(
        kind="acceptance",
        target=base,
        draft=power_spec(base),
        prompt_source={"kind": "sampled", "length": 3, "count": 2},
        budgets=[1, 8, 32],
        seeds=[0, 1, 2],
        sampling=[{"temperature": 0.6, "top_p": 0.9}],
        max_new_tokens=12,
        max_depth=8,
        batch_size=4,
        si_depth=4,
    )
    defaults.update(overrides)
    return ExperimentConfig(**defaults)


def test_acceptance_budget_one_rates_between_one_and_two():
    result = run_acceptance(acceptance_config())
    for method in ("sx", "si"):
        row = result.row(method, 1)
        assert 1.0 <= row.mean_gen_rate <= 2.0


def test_acceptance_rates_grow_with_budget_for_sx():
    # Paired comparison, 100 runs per budget on the same (seed, prompt) cells.
    result = run_acceptance(
        acceptance_config(seeds=list(range(50)), budgets=[1, 32]), methods=("sx",)
    )
    small = result.row("sx", 1)
    large = result.row("sx", 32)
    assert small.n_runs == large.n_runs == 100
    assert large.mean_gen_rate >= small.mean_gen_rate


def test_acceptance_reports_are_byte_identical_across_runs(tmp_path):
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_acceptance(acceptance_config(output_path=str(out_a)))
    run_acceptance(acceptance_config(output_path=str(out_b)))
    assert out_a.read_bytes() == out_b.read_bytes()
    assert (tmp_path / "a.runs.jsonl").read_bytes() == (tmp_path / "b.runs.jsonl").read_bytes()


def test_acceptance_run_records_schema(tmp_path):
    out = tmp_path / "acc.csv"
    result = run_acceptance(acceptance_config(output_path=str(out)))
    record = result.run_records[0]
    assert set(record) == {
        "method", "K", "D", "B", "t", "top_p", "seed", "tokens", "target_calls", "generation_rate",
    }
    jsonl = (tmp_path / "acc.runs.jsonl").read_text().splitlines()
    assert len(jsonl) == len(result.run_records)
    assert json.loads(jsonl[0])["method"] in ("sx", "si")


def test_acceptance_worker_pool_matches_serial():
    serial = run_acceptance(acceptance_config())
    parallel = run_acceptance(acceptance_config(workers=4))
    assert [(r.method, r.budget, r.mean_gen_rate) for r in serial.rows] == [
        (r.method, r.budget, r.mean_gen_rate) for r in parallel.rows
    ]


# ---------------------------------------------------------------------------
# throughput
# ---------------------------------------------------------------------------


def test_throughput_requires_curves():
    with pytest.raises(ValueError):
        run_throughput(acceptance_config(), load_preset("pcie4-gptq-70b"), None)


def test_throughput_join_and_optimum(tmp_path):
    cfg = acceptance_config(output_path=None)
    acceptance = run_acceptance(cfg)
    cfg.output_path = str(tmp_path / "tput.csv")
    result = run_throughput(cfg, load_preset("pcie4-gptq-70b"), acceptance.curves)
    assert {r.method for r in result.rows} == {"sx", "si"}
    for method, choice in result.choices.items():
        rows = [r for r in result.rows if r.method == method]
        assert sum(r.optimal for r in rows) == 1
        assert max(r.tok_per_s for r in rows) == pytest.approx(choice.tokens_per_second)
    header = (tmp_path / "tput.csv").read_text().splitlines()[0]
    assert header == "schema_version,method,K,gen_rate,t_draft,t_forward,tok_per_s,speedup,optimal"


# ---------------------------------------------------------------------------
# equivalence
# ---------------------------------------------------------------------------


def equivalence_config(**overrides):
    defaults = dict(
        kind="equivalence",
        target=synthetic_spec(),
        equivalence_cells=20,
        vocab_size=10,
        sharpness=0.3,
        budgets=[12],
        max_depth=5,
        batch_size=4,
        max_new_tokens=16,
        seeds=list(range(7)),
        sampling=[
            {"temperature": 0.0, "top_p": 1.0},
            {"temperature": 0.6, "top_p": 0.9},
            {"temperature": 1.0, "top_p": 1.0},
            {"temperature": 1.0, "top_p": 0.9},
        ],
    )
    defaults.update(overrides)
    return ExperimentConfig(**defaults)


def test_equivalence_grid_passes(tmp_path):
    cfg = equivalence_config(output_path=str(tmp_path / "eq.jsonl"))
    report = run_equivalence(cfg)
    assert report.passed
    assert len(report.cells) == 20
    records = [json.loads(ln) for ln in (tmp_path / "eq.jsonl").read_text().splitlines()]
    assert len(records) == 20
    # Per-cell provenance is enough to replay any cell in isolation.
    assert {"draft_seed", "target_seed", "prompt", "seed", "temperature", "top_p", "rng_stream"} <= set(records[0])


def test_equivalence_detects_corrupted_cache(monkeypatch):
    real_precompute = speckit.engine.precompute

    def corrupted(prefix, draft, target, params, warp=None):
        cache = real_precompute(prefix, draft, target, params, warp)
        if len(cache.tree.nodes) > 1:
            # Off-by-one node: serve node 1's distribution from node 0's row.
            cache.dists[2] = cache.dists[1]
        return cache

    monkeypatch.setattr(speckit.engine, "precompute", corrupted)
    report = run_equivalence(equivalence_config())
    assert not report.passed
    failure = report.failures[0]
    assert failure.divergence_position is not None
    assert failure.expected != failure.got


def test_equivalence_greedy_grid_is_seed_independent():
    cfg = equivalence_config(sampling=[{"temperature": 0.0}], equivalence_cells=6, seeds=[0])
    report = run_equivalence(cfg)
    assert report.passed
    cfg_other_seeds = equivalence_config(sampling=[{"temperature": 0.0}], equivalence_cells=6, seeds=[99])
    report_b = run_equivalence(cfg_other_seeds)
    assert report_b.passed


# ---------------------------------------------------------------------------
# bootstrap helper
# ---------------------------------------------------------------------------


def test_bootstrap_ci_brackets_mean_and_is_deterministic():
    values = [1.0, 2.0, 3.0, 4.0, 5.0]
    lo, hi = bootstrap_mean_ci(values, seed=3)
    assert lo <= float(np.mean(values)) <= hi
    assert (lo, hi) == bootstrap_mean_ci(values, seed=3)
