"""Sampling configuration, distribution warps, and the seeded sampling primitive.

A "warp" is the temperature / nucleus transform applied to a raw model
distribution before sampling. Warps are pure: they take a probability
vector and return a new one. All tie-breaking (argmax at temperature 0,
the nucleus cut) resolves toward the lowest token id so that every
consumer of a warped distribution sees the same result bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import CounterRng

DIST_ATOL = 1e-9


@dataclass(frozen=True)
class SamplingConfig:
    """Decoding parameters shared by all generation engines.

    temperature 0 means greedy decoding; top_p 1 disables nucleus
    filtering. ``max_new_tokens`` of 0 is allowed and produces an empty
    generation.
    """

    temperature: float = 1.0
    top_p: float = 1.0
    seed: int = 0
    max_new_tokens: int = 16

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if not 0 < self.top_p <= 1:
            raise ValueError(f"top_p must be in (0, 1], got {self.top_p}")
        if self.max_new_tokens < 0:
            raise ValueError(f"max_new_tokens must be >= 0, got {self.max_new_tokens}")


def validate_distribution(probs: np.ndarray) -> np.ndarray:
    """Check that ``probs`` is a probability vector; returns it as float64."""
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1:
        raise ValueError(f"distribution must be 1-D, got shape {p.shape}")
    if p.size == 0:
        raise ValueError("distribution must be non-empty")
    if np.any(p < 0):
        raise ValueError("distribution has negative entries")
    total = float(p.sum())
    if abs(total - 1.0) > DIST_ATOL:
        raise ValueError(f"distribution sums to {total!r}, expected 1 within {DIST_ATOL}")
    return p


def log_view(probs: np.ndarray) -> np.ndarray:
    """Log-space view of a distribution; zero entries map to -inf."""
    p = np.asarray(probs, dtype=np.float64)
    with np.errstate(divide="ignore"):
        return np.log(p)


def apply_warp(dist: np.ndarray, cfg: SamplingConfig) -> np.ndarray:
    """Temperature-scale then nucleus-truncate a distribution.

    Temperature scaling exponentiates probabilities by 1/temperature and
    renormalizes (equivalent to dividing logits by the temperature).
    Nucleus truncation keeps the smallest probability-sorted prefix whose
    cumulative mass reaches ``top_p`` and renormalizes; the sort breaks
    probability ties by lowest token id. Temperature 0 short-circuits to a
    one-hot at the argmax (lowest id on ties).
    """
    p = np.asarray(dist, dtype=np.float64)

    if cfg.temperature == 0.0:
        out = np.zeros_like(p)
        out[int(np.argmax(p))] = 1.0
        return out

    if cfg.temperature != 1.0:
        with np.errstate(divide="ignore"):
            scaled = np.where(p > 0, p ** (1.0 / cfg.temperature), 0.0)
        p = scaled / scaled.sum()

    if cfg.top_p < 1.0:
        # Sort by (probability desc, token id asc); lexsort keys are last-major.
        order = np.lexsort((np.arange(p.size), -p))
        csum = np.cumsum(p[order])
        cut = int(np.searchsorted(csum, cfg.top_p - DIST_ATOL, side="left"))
        keep = order[: cut + 1]
        out = np.zeros_like(p)
        out[keep] = p[keep]
        p = out / out.sum()

    return p


def sample(dist: np.ndarray, rng: CounterRng) -> int:
    """Inverse-CDF sample over ascending token ids, consuming exactly one draw.

    The draw is consumed even for degenerate (one-hot) distributions so
    that randomness consumption is independent of the distribution shape.
    """
    p = np.asarray(dist, dtype=np.float64)
    u = rng.uniform()
    cdf = np.cumsum(p)
    token = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    if token >= p.size or p[token] == 0.0:
        token = int(np.max(np.nonzero(p)[0]))
    return token
