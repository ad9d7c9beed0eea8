"""Command-line surface: determinism, method selection, exit codes."""

import json

import pytest

from speckit.harness.cli import main


@pytest.fixture
def config_path(tmp_path):
    base = {"kind": "synthetic", "seed": 11, "vocab_size": 10, "sharpness": 0.2}
    cfg = {
        "kind": "generate",
        "target": base,
        "draft": {"kind": "power", "base": base, "power": 0.7},
        "prompt_source": {"kind": "sampled", "length": 4, "count": 1},
        "budgets": [8, 16],
        "seeds": [0, 1, 2],
        "sampling": [{"temperature": 0.6, "top_p": 0.9}],
        "max_new_tokens": 12,
        "max_depth": 6,
        "batch_size": 4,
        "si_depth": 4,
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def run_cli(capsys, *argv) -> tuple[int, str]:
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_generate_is_deterministic(capsys, config_path):
    code_a, out_a = run_cli(capsys, "generate", "--config", config_path, "--method", "sx", "--seed", "1")
    code_b, out_b = run_cli(capsys, "generate", "--config", config_path, "--method", "sx", "--seed", "1")
    assert code_a == code_b == 0
    assert out_a == out_b


def test_generate_sequential_and_sx_same_text(capsys, config_path):
    _, out_sx = run_cli(capsys, "generate", "--config", config_path, "--method", "sx", "--seed", "7")
    _, out_seq = run_cli(capsys, "generate", "--config", config_path, "--method", "sequential", "--seed", "7")
    assert out_sx.splitlines()[0] == out_seq.splitlines()[0]


def test_generate_si_respects_token_budget(capsys, config_path):
    code, out = run_cli(
        capsys, "generate", "--config", config_path, "--method", "si", "--max-new-tokens", "32"
    )
    assert code == 0
    assert "tokens=32" in out


def test_generate_writes_stats_jsonl(capsys, config_path, tmp_path):
    stats_path = tmp_path / "runs.jsonl"
    code, _ = run_cli(
        capsys,
        "generate", "--config", config_path, "--method", "sx", "--stats-jsonl", str(stats_path),
    )
    assert code == 0
    record = json.loads(stats_path.read_text())
    assert record["method"] == "sx"
    assert record["tokens"] == 12


def test_unknown_method_is_usage_error(capsys, config_path):
    with pytest.raises(SystemExit) as excinfo:
        main(["generate", "--config", config_path, "--method", "warp-drive"])
    assert excinfo.value.code == 2


def test_unknown_subcommand_is_usage_error(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["simulate"])
    assert excinfo.value.code == 2


def test_coverage_command(capsys, config_path, tmp_path):
    out_csv = tmp_path / "cov.csv"
    code, out = run_cli(capsys, "coverage", "--config", config_path, "--output", str(out_csv))
    assert code == 0
    assert "target_topk" in out
    assert out_csv.exists()


def test_acceptance_command(capsys, config_path):
    code, out = run_cli(capsys, "acceptance", "--config", config_path)
    assert code == 0
    assert "sx" in out and "si" in out


def test_throughput_command(capsys, config_path):
    code, out = run_cli(
        capsys, "throughput", "--config", config_path, "--preset", "pcie4-gptq-70b"
    )
    assert code == 0
    assert "K*=" in out


def test_equivalence_command_exit_codes(capsys, config_path, monkeypatch):
    code, out = run_cli(capsys, "equivalence", "--config", config_path)
    assert code == 0
    assert "bit-exact" in out

    import speckit.engine

    real = speckit.engine.precompute

    def corrupted(prefix, draft, target, params, warp=None):
        cache = real(prefix, draft, target, params, warp)
        if len(cache.tree.nodes) > 1:
            cache.dists[2] = cache.dists[1]
        return cache

    monkeypatch.setattr(speckit.engine, "precompute", corrupted)
    code, out = run_cli(capsys, "equivalence", "--config", config_path)
    assert code == 1
    assert "DIVERGED" in out


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "speckit", "--help"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "generate" in proc.stdout
