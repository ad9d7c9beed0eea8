"""Counter-based pseudo-random streams for reproducible decoding runs.

Every engine in this package draws randomness from a ``CounterRng``: a
(seed, stream-name) pair where the n-th draw is a pure function of
``(seed, stream, n)``. This makes two properties cheap to guarantee:

- replay: re-running with the same seed consumes the identical sequence,
  no matter how the draws are interleaved with deterministic work;
- stream isolation: separate concerns (generation, draft sampling,
  acceptance tests) each own a stream and cannot perturb one another.

Backed by numpy's Philox counter-based generator, keyed by a hash of the
seed and stream label. Values are produced lazily in blocks and cached so
sequential draws stay fast while random access (``draw_at``) stays pure.
"""

from __future__ import annotations

import hashlib

import numpy as np

_BLOCK = 1024


def _stream_key(seed: int, stream: str) -> int:
    """Derive a 128-bit Philox key from (seed, stream label)."""
    digest = hashlib.sha256(f"{seed}\x1f{stream}".encode()).digest()
    return int.from_bytes(digest[:16], "little")


class CounterRng:
    """A named uniform stream whose n-th draw depends only on (seed, stream, n).

    Args:
        seed: 64-bit base seed shared by all streams of one run.
        stream: label naming the consumer ("generation", "specinfer-accept", ...).
        counter: index of the next draw; defaults to the start of the stream.
    """

    def __init__(self, seed: int, stream: str = "generation", counter: int = 0) -> None:
        if counter < 0:
            raise ValueError(f"counter must be >= 0, got {counter}")
        self.seed = int(seed)
        self.stream = stream
        self.counter = int(counter)
        self._key = _stream_key(self.seed, stream)
        self._gen: np.random.Generator | None = None
        self._buffer = np.empty(0, dtype=np.float64)

    def _ensure(self, n: int) -> None:
        """Extend the cached stream prefix so indices [0, n] are materialized."""
        if n < self._buffer.size:
            return
        if self._gen is None:
            self._gen = np.random.Generator(np.random.Philox(key=self._key))
        # Grow geometrically from a small first block; most streams are short.
        size = max(64, min(2 * self._buffer.size, _BLOCK * 64))
        while size <= n:
            size *= 2
        # The generator continues the fixed stream, so the prefix never changes.
        self._buffer = np.concatenate([self._buffer, self._gen.random(size - self._buffer.size)])

    def draw_at(self, index: int) -> float:
        """Return the index-th uniform in [0, 1) without touching the counter."""
        if index < 0:
            raise ValueError(f"index must be >= 0, got {index}")
        self._ensure(index)
        return float(self._buffer[index])

    def uniform(self) -> float:
        """Consume and return the next uniform in [0, 1)."""
        value = self.draw_at(self.counter)
        self.counter += 1
        return value

    def uniforms(self, n: int) -> np.ndarray:
        """Consume the next n uniforms as a vector (same values as n uniform() calls)."""
        if n < 0:
            raise ValueError(f"n must be >= 0, got {n}")
        self._ensure(self.counter + n)
        out = self._buffer[self.counter : self.counter + n].copy()
        self.counter += n
        return out

    def fork(self, stream: str) -> "CounterRng":
        """A fresh stream under the same seed, starting at draw 0."""
        return CounterRng(self.seed, stream)

    def __repr__(self) -> str:
        return f"CounterRng(seed={self.seed}, stream={self.stream!r}, counter={self.counter})"
