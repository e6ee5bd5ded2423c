"""Monte Carlo plumbing: estimates, counter-based streams, block execution.

Randomness is addressed by ``(seed, tag, block_index)``: each block of a run
owns an independent Philox stream whose counter is offset by the block index.
Blocks have a size fixed by the caller, never by the worker count, and results
are concatenated in block order before any reduction, so the numerical output
is bitwise identical whatever ``workers`` is.
"""

from __future__ import annotations

import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .errors import DomainError

__all__ = ["McEstimate", "stream", "map_blocks", "estimate"]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class McEstimate:
    """Sample mean with its standard error."""

    mean: float
    stderr: float
    n_samples: int
    seed: int
    truncated_fraction: float = 0.0

    @classmethod
    def from_samples(cls, values, seed: int, truncated_fraction: float = 0.0) -> "McEstimate":
        values = np.asarray(values, dtype=float)
        n = values.size
        if n == 0:
            raise DomainError("no samples")
        mean = float(values.mean())
        std = float(values.std(ddof=1)) if n > 1 else 0.0
        return cls(mean, std / math.sqrt(n), int(n), int(seed), float(truncated_fraction))

    def scaled(self, factor: float) -> "McEstimate":
        return McEstimate(self.mean * factor, self.stderr * abs(factor), self.n_samples,
                          self.seed, self.truncated_fraction)

    def z_score(self, other) -> float:
        """Standardized difference to another estimate or to an exact number."""
        if isinstance(other, McEstimate):
            se = math.hypot(self.stderr, other.stderr)
            diff = self.mean - other.mean
        else:
            se = self.stderr
            diff = self.mean - float(other)
        if se == 0:
            return 0.0 if diff == 0 else math.inf
        return diff / se

    def to_row(self) -> dict:
        row = asdict(self)
        row["estimate"] = row.pop("mean")
        row["n"] = row.pop("n_samples")
        return row


def stream(seed: int, tag: str, index: int) -> np.random.Generator:
    """Independent generator for block ``index`` of the run ``(seed, tag)``."""
    key = np.array([int(seed) & _MASK64, zlib.crc32(tag.encode())], dtype=np.uint64)
    counter = np.array([0, 0, 0, int(index) & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def map_blocks(
    fn: Callable[[np.random.Generator, int], np.ndarray],
    n_samples: int,
    block_size: int,
    seed: int,
    tag: str,
    workers: int = 1,
) -> np.ndarray:
    """Run ``fn(generator, count)`` over fixed-size blocks and concatenate in order."""
    if n_samples < 1:
        raise DomainError("n_samples must be >= 1")
    if block_size < 1:
        raise DomainError("block_size must be >= 1")
    n_blocks = -(-n_samples // block_size)
    jobs = [(b, min(block_size, n_samples - b * block_size)) for b in range(n_blocks)]

    def run(job):
        b, count = job
        return np.asarray(fn(stream(seed, tag, b), count))

    if workers <= 1 or n_blocks == 1:
        parts = [run(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, jobs))
    return np.concatenate(parts, axis=0)


def estimate(fn, n_samples: int, block_size: int, seed: int, tag: str, workers: int = 1,
             truncated_fraction: float = 0.0) -> McEstimate:
    values = map_blocks(fn, n_samples, block_size, seed, tag, workers)
    return McEstimate.from_samples(values, seed, truncated_fraction)
