"""Deterministic random-stream plumbing shared by the simulation modules.

Every Monte Carlo routine derives one independent substream per trial from a
master seed using a counter-based bit generator: trial ``i`` reads the Philox
sequence keyed by the master seed with the 256-bit counter started at block
``(0, i, 0, 0)``.  Each trial therefore owns 2**64 consecutive blocks, and its
draws are a pure function of ``(master_seed, i)``, independent of batching,
thread count, and execution order.  Aggregates over trials are exact integer
sums, so parallel and serial runs produce identical results.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist
from typing import Callable, Sequence, TypeVar

import numpy as np

from .errors import ParameterError

RNG_ID = "numpy-philox4x64"
SEED_RULE_ID = "philox-counter-v1:trial[i]=Philox(key=seedseq(master),counter=(0,i,0,0))"

#: Direction codes drawn by every walk: 0:+e1, 1:-e1, 2:+e2, 3:-e2.
NUM_DIRECTIONS = 4

_T = TypeVar("_T")


def _philox_key(master_seed) -> np.ndarray:
    # SeedSequence accepts ints or tuples of ints as entropy.
    return np.random.SeedSequence(master_seed).generate_state(2, np.uint64)


def trial_generator(master_seed, trial: int) -> np.random.Generator:
    """Return the independent generator owned by one trial.

    ``master_seed`` may be a non-negative int or a tuple of ints (used to
    derive per-round or per-purpose substreams).
    """
    if trial < 0:
        raise ParameterError("trial index must be >= 0")
    key = _philox_key(master_seed)
    bitgen = np.random.Philox(key=key, counter=[0, trial, 0, 0])
    return np.random.Generator(bitgen)


def direction_codes(master_seed, trial: int, n: int) -> np.ndarray:
    """Direction codes (0..3) for steps 1..n of one trial's walk."""
    if n < 0:
        raise ParameterError("horizon must be >= 0")
    gen = trial_generator(master_seed, trial)
    return gen.integers(0, NUM_DIRECTIONS, size=n, dtype=np.int64)


@dataclass(frozen=True)
class ConfidenceInterval:
    low: float
    high: float
    method: str
    level: float

    def to_json_dict(self) -> dict:
        return {
            "low": self.low,
            "high": self.high,
            "method": self.method,
            "level": self.level,
        }


def wilson_interval(successes: int, trials: int, level: float = 0.95) -> ConfidenceInterval:
    """Two-sided Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ParameterError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise ParameterError("successes must lie in [0, trials]")
    if not 0.0 < level < 1.0:
        raise ParameterError("confidence level must lie in (0, 1)")
    z = NormalDist().inv_cdf(0.5 + level / 2.0)
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = (z / denom) * ((phat * (1.0 - phat) / trials + z * z / (4.0 * trials * trials)) ** 0.5)
    return ConfidenceInterval(max(0.0, center - half), min(1.0, center + half), "wilson", level)


def chunk_ranges(trials: int, chunk_size: int = 256) -> list[range]:
    """Split trial indices 0..trials-1 into contiguous chunks."""
    return [range(lo, min(lo + chunk_size, trials)) for lo in range(0, trials, chunk_size)]


def map_trial_chunks(
    trials: int,
    chunk_fn: Callable[[range], _T],
    combine: Callable[[Sequence[_T]], _T],
    workers: int = 1,
) -> _T:
    """Apply ``chunk_fn`` to chunks of trial indices and combine in chunk order.

    Each trial's randomness comes from its own substream, so the chunk layout
    and the worker count cannot change the combined result.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    if workers < 1:
        raise ParameterError("workers must be >= 1")
    chunks = chunk_ranges(trials)
    if workers == 1 or len(chunks) == 1:
        parts = [chunk_fn(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(chunk_fn, chunks))
    return combine(parts)
