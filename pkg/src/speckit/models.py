"""Exact language-model backends: stationary tables, Markov chains, n-grams.

Every backend is a pure function from a token prefix to a next-token
distribution: the same prefix always returns a bit-identical probability
vector, and batched evaluation equals one-at-a-time evaluation. That
exactness is what lets the generation engines be tested for bit-exact
seed equivalence instead of statistical agreement.

Prefixes are plain tuples of token ids. Contexts shorter than a model's
order are handled deterministically: Markov tables pad on the left with
token 0, n-gram models back off to the longest available shorter context.
"""

from __future__ import annotations

import json
from typing import Iterable, Sequence

import numpy as np

Prefix = tuple[int, ...]


def _check_prefix(prefix: Sequence[int], vocab_size: int) -> Prefix:
    toks = tuple(int(t) for t in prefix)
    for t in toks:
        if not 0 <= t < vocab_size:
            raise ValueError(f"token id {t} outside vocabulary [0, {vocab_size})")
    return toks


class LanguageModel:
    """Interface shared by all backends.

    Attributes:
        vocab_size: number of token ids.
        backend: short backend name ("tabular", "markov", "ngram").
    """

    vocab_size: int
    backend: str

    def next_distribution(self, prefix: Sequence[int]) -> np.ndarray:
        """Exact conditional next-token distribution for ``prefix``."""
        raise NotImplementedError

    def next_distributions(self, prefixes: Iterable[Sequence[int]]) -> np.ndarray:
        """Batched evaluation; rows equal per-prefix next_distribution calls."""
        rows = [self.next_distribution(p) for p in prefixes]
        if not rows:
            return np.empty((0, self.vocab_size))
        return np.stack(rows)

    def to_json(self) -> str:
        """Serialize the full parameter table as a single JSON document."""
        raise NotImplementedError

    def decode(self, tokens: Sequence[int]) -> str:
        """Render token ids as text; backends without an alphabet print ids."""
        return " ".join(str(int(t)) for t in tokens)

    def encode(self, text: str) -> Prefix:
        raise NotImplementedError(f"{self.backend} backend has no text mapping")


def _normalize_rows(table: np.ndarray) -> np.ndarray:
    """Normalize rows once; rows already summing to 1 within 1e-9 keep their bits."""
    table = np.asarray(table, dtype=np.float64)
    sums = table.sum(axis=-1, keepdims=True)
    if np.any(table < 0) or np.any(sums <= 0):
        raise ValueError("probability table rows must be non-negative with positive mass")
    if np.max(np.abs(sums - 1.0)) <= 1e-9:
        return table.copy()
    return table / sums


class TabularModel(LanguageModel):
    """Stationary backend: one fixed row, independent of the prefix."""

    backend = "tabular"

    def __init__(self, row: Sequence[float]) -> None:
        self.row = _normalize_rows(np.asarray(row, dtype=np.float64)[None, :])[0]
        self.vocab_size = self.row.size

    def next_distribution(self, prefix: Sequence[int]) -> np.ndarray:
        _check_prefix(prefix, self.vocab_size)
        return self.row.copy()

    def power_smoothed(self, power: float) -> "TabularModel":
        """Variant with probabilities exponentiated by ``power`` and renormalized."""
        return TabularModel(self.row**power)

    def to_json(self) -> str:
        return json.dumps(
            {"backend": self.backend, "vocab_size": self.vocab_size, "row": self.row.tolist()}
        )


class MarkovModel(LanguageModel):
    """Order-k Markov chain over a dense transition table.

    The table has ``vocab_size ** order`` rows; the context is the last
    ``order`` tokens of the prefix, padded on the left with token 0 when
    the prefix is shorter than the order.
    """

    backend = "markov"

    def __init__(self, table: np.ndarray, order: int = 1) -> None:
        if order < 1:
            raise ValueError(f"order must be >= 1, got {order}")
        table = _normalize_rows(table)
        vocab = table.shape[1]
        if table.shape[0] != vocab**order:
            raise ValueError(
                f"table has {table.shape[0]} rows, expected vocab**order = {vocab**order}"
            )
        self.table = table
        self.order = order
        self.vocab_size = vocab

    def _row_index(self, prefix: Prefix) -> int:
        context = prefix[-self.order :]
        context = (0,) * (self.order - len(context)) + context
        idx = 0
        for t in context:
            idx = idx * self.vocab_size + t
        return idx

    def next_distribution(self, prefix: Sequence[int]) -> np.ndarray:
        toks = _check_prefix(prefix, self.vocab_size)
        return self.table[self._row_index(toks)].copy()

    def power_smoothed(self, power: float) -> "MarkovModel":
        """Variant with each row exponentiated by ``power`` and renormalized.

        Powers below 1 flatten the rows, giving a weaker model that keeps
        the original ranking; useful as a synthetic draft for a target.
        """
        return MarkovModel(self.table**power, order=self.order)

    def to_json(self) -> str:
        return json.dumps(
            {
                "backend": self.backend,
                "vocab_size": self.vocab_size,
                "order": self.order,
                "table": self.table.tolist(),
            }
        )


class NgramModel(LanguageModel):
    """Additively smoothed n-gram model with backoff for short prefixes.

    ``order`` is the number of context tokens conditioned on. Count tables
    are held for every context length 0..order, and a query uses the
    longest available one: the full ``order`` tokens normally, shorter
    only when the prefix itself is shorter.
    """

    backend = "ngram"

    def __init__(
        self,
        alphabet: list[str],
        counts: list[dict[Prefix, np.ndarray]],
        order: int,
        smoothing: float,
        tokenizer: str,
    ) -> None:
        self.alphabet = alphabet
        self.vocab_size = len(alphabet)
        self.counts = counts
        self.order = order
        self.smoothing = smoothing
        self.tokenizer = tokenizer
        self._unit_to_id = {u: i for i, u in enumerate(alphabet)}

    def next_distribution(self, prefix: Sequence[int]) -> np.ndarray:
        toks = _check_prefix(prefix, self.vocab_size)
        ctx_len = min(self.order, len(toks))
        context = toks[len(toks) - ctx_len :]
        table = self.counts[ctx_len]
        counts = table.get(context)
        if counts is None:
            counts = np.zeros(self.vocab_size)
        smoothed = counts + self.smoothing
        return smoothed / smoothed.sum()

    def encode(self, text: str) -> Prefix:
        units = _tokenize(text, self.tokenizer)
        try:
            return tuple(self._unit_to_id[u] for u in units)
        except KeyError as exc:
            raise ValueError(f"unit {exc.args[0]!r} not in model alphabet") from exc

    def decode(self, tokens: Sequence[int]) -> str:
        units = [self.alphabet[int(t)] for t in tokens]
        return "".join(units) if self.tokenizer == "byte" else " ".join(units)

    def to_json(self) -> str:
        return json.dumps(
            {
                "backend": self.backend,
                "vocab_size": self.vocab_size,
                "order": self.order,
                "smoothing": self.smoothing,
                "tokenizer": self.tokenizer,
                "alphabet": self.alphabet,
                "counts": [
                    [[list(ctx), row.tolist()] for ctx, row in sorted(table.items())]
                    for table in self.counts
                ],
            }
        )


def _tokenize(text: str, tokenizer: str) -> list[str]:
    if tokenizer == "byte":
        return [chr(b) for b in text.encode("utf-8")]
    if tokenizer == "whitespace":
        return text.split()
    raise ValueError(f"unknown tokenizer {tokenizer!r}; expected 'byte' or 'whitespace'")


def train_ngram(
    corpus: str, order: int, smoothing: float, tokenizer: str = "byte"
) -> NgramModel:
    """Train an n-gram model conditioning on ``order`` tokens, add-lambda smoothed.

    The vocabulary is the sorted set of units observed in the corpus.
    Count tables are built for every context length up to ``order`` so
    short prefixes can be scored without padding tokens.
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if smoothing <= 0:
        raise ValueError(f"smoothing must be > 0, got {smoothing}")
    units = _tokenize(corpus, tokenizer)
    if not units:
        raise ValueError("corpus is empty after tokenization")

    alphabet = sorted(set(units))
    unit_to_id = {u: i for i, u in enumerate(alphabet)}
    ids = [unit_to_id[u] for u in units]
    vocab = len(alphabet)

    counts: list[dict[Prefix, np.ndarray]] = []
    for ctx_len in range(order + 1):
        table: dict[Prefix, np.ndarray] = {}
        for pos in range(ctx_len, len(ids)):
            context = tuple(ids[pos - ctx_len : pos])
            row = table.get(context)
            if row is None:
                row = np.zeros(vocab)
                table[context] = row
            row[ids[pos]] += 1
        counts.append(table)

    return NgramModel(alphabet, counts, order, float(smoothing), tokenizer)


def make_synthetic(
    seed: int, vocab_size: int, sharpness: float, order: int = 1
) -> MarkovModel:
    """Random Markov model with rows drawn from a symmetric Dirichlet.

    Small ``sharpness`` concentrates each row on a few tokens (low
    entropy); large values approach uniform rows. Deterministic in seed.
    """
    if vocab_size < 2:
        raise ValueError(f"vocab_size must be >= 2, got {vocab_size}")
    if sharpness <= 0:
        raise ValueError(f"sharpness must be > 0, got {sharpness}")
    gen = np.random.default_rng(seed)
    table = gen.dirichlet(np.full(vocab_size, sharpness), size=vocab_size**order)
    return MarkovModel(table, order=order)


def model_from_json(document: str) -> LanguageModel:
    """Rebuild any backend from its ``to_json`` document."""
    data = json.loads(document)
    backend = data.get("backend")
    if backend == "tabular":
        return TabularModel(data["row"])
    if backend == "markov":
        return MarkovModel(np.asarray(data["table"]), order=data["order"])
    if backend == "ngram":
        counts = [
            {tuple(ctx): np.asarray(row, dtype=np.float64) for ctx, row in table}
            for table in data["counts"]
        ]
        return NgramModel(
            data["alphabet"], counts, data["order"], data["smoothing"], data["tokenizer"]
        )
    raise ValueError(f"unknown backend {backend!r}")
