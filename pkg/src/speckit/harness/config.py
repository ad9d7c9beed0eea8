"""Experiment configuration: JSON documents describing models, prompts, grids."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..models import (
    LanguageModel,
    MarkovModel,
    TabularModel,
    make_synthetic,
    model_from_json,
    train_ngram,
)
from ..sampling import SamplingConfig
from . import prompts

KINDS = ("coverage", "acceptance", "throughput", "equivalence", "generate")


def resolve_model(spec: dict[str, Any], base_dir: Path | None = None) -> LanguageModel:
    """Build a model from its config spec.

    Supported kinds:
      tabular:   {"kind": "tabular", "row": [...]}
      synthetic: {"kind": "synthetic", "seed", "vocab_size", "sharpness", "order"?}
      ngram:     {"kind": "ngram", "corpus_text"? | "corpus_file"? | bundled
                  "snippet"?, "order", "smoothing", "tokenizer"?}
      file:      {"kind": "file", "path": "model.json"}
      power:     {"kind": "power", "base": <spec>, "power": 0.7} - a flattened
                 variant of a table-backed base model, handy as a weaker draft.
    """
    kind = spec.get("kind")
    if kind == "tabular":
        return TabularModel(spec["row"])
    if kind == "synthetic":
        return make_synthetic(
            seed=spec["seed"],
            vocab_size=spec["vocab_size"],
            sharpness=spec["sharpness"],
            order=spec.get("order", 1),
        )
    if kind == "ngram":
        if "corpus_text" in spec:
            corpus = spec["corpus_text"]
        elif "corpus_file" in spec:
            path = Path(spec["corpus_file"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            corpus = path.read_text(encoding="utf-8")
        else:
            corpus = prompts.SNIPPETS.get(spec.get("snippet", ""), prompts.DEFAULT_CORPUS)
        return train_ngram(
            corpus,
            order=spec["order"],
            smoothing=spec["smoothing"],
            tokenizer=spec.get("tokenizer", "byte"),
        )
    if kind == "file":
        path = Path(spec["path"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return model_from_json(path.read_text(encoding="utf-8"))
    if kind == "power":
        base = resolve_model(spec["base"], base_dir)
        if not isinstance(base, (MarkovModel, TabularModel)):
            raise ValueError("power spec requires a table-backed base model")
        return base.power_smoothed(spec["power"])
    raise ValueError(f"unknown model spec kind {kind!r}")


@dataclass
class ExperimentConfig:
    """One experiment cell grid, loadable from a JSON file.

    ``prompt_source`` is one of
      {"kind": "inline", "texts": [...]} or {"kind": "inline", "token_lists": [...]}
      {"kind": "file", "path": ...}            one prompt per line
      {"kind": "sampled", "length", "count"}   sampled from the target model
      {"kind": "snippet", "names": [...]}      bundled public-domain texts
    """

    kind: str
    target: dict[str, Any]
    draft: dict[str, Any] | None = None
    prompt_source: dict[str, Any] = field(
        default_factory=lambda: {"kind": "sampled", "length": 8, "count": 2}
    )
    budgets: list[int] = field(default_factory=lambda: [16, 64, 256])
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4, 5, 6, 7])
    sampling: list[dict[str, Any]] = field(
        default_factory=lambda: [{"temperature": 0.6, "top_p": 0.9}]
    )
    max_new_tokens: int = 32
    max_depth: int = 16
    batch_size: int = 8
    si_depth: int = 8
    branching: list[int] | None = None  # overrides the per-budget stem schedule
    k_max: int | None = None  # coverage curve length; defaults to vocab size
    coverage_positions: int = 64
    coverage_warp: bool = False  # measure raw target probabilities by default
    equivalence_cells: int = 100
    vocab_size: int = 16  # synthetic models built per equivalence cell
    sharpness: float = 0.3
    workers: int = 1
    output_path: str | None = None
    base_dir: Path | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if not self.budgets:
            raise ValueError("budgets must be non-empty")
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        if not self.sampling:
            raise ValueError("sampling grid must be non-empty")

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        data = json.loads(path.read_text(encoding="utf-8"))
        cfg = cls(**data)
        cfg.base_dir = path.parent
        cfg.validate_files()
        return cfg

    def validate_files(self) -> None:
        """Fail at load time if any referenced file is missing."""
        for spec in (self.target, self.draft):
            if spec is None:
                continue
            for key in ("path", "corpus_file"):
                if key in spec:
                    path = Path(spec[key])
                    if self.base_dir is not None and not path.is_absolute():
                        path = self.base_dir / path
                    if not path.exists():
                        raise FileNotFoundError(f"model spec references missing file {path}")
        if self.prompt_source.get("kind") == "file":
            path = Path(self.prompt_source["path"])
            if self.base_dir is not None and not path.is_absolute():
                path = self.base_dir / path
            if not path.exists():
                raise FileNotFoundError(f"prompt source references missing file {path}")

    def target_model(self) -> LanguageModel:
        return resolve_model(self.target, self.base_dir)

    def draft_model(self) -> LanguageModel:
        if self.draft is None:
            raise ValueError("config has no draft model spec")
        return resolve_model(self.draft, self.base_dir)

    def sampling_configs(self, seed: int, max_new_tokens: int | None = None) -> list[SamplingConfig]:
        length = self.max_new_tokens if max_new_tokens is None else max_new_tokens
        return [
            SamplingConfig(
                temperature=s.get("temperature", 1.0),
                top_p=s.get("top_p", 1.0),
                seed=seed,
                max_new_tokens=length,
            )
            for s in self.sampling
        ]
