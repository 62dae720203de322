"""Counter-based random substreams and worker-count-independent trial execution.

Trial ``r`` under master seed ``s`` always draws from Philox with key ``s`` and
counter ``(0, 0, r, stream)``, so results depend only on (seed, trial index)
and never on how trials are split across processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable

import numpy as np

from .errors import ValidationError

_MASK64 = (1 << 64) - 1


def trial_rng(seed: int, trial: int, stream: int = 0) -> np.random.Generator:
    if seed < 0 or trial < 0 or stream < 0:
        raise ValidationError("seed, trial and stream must be nonnegative")
    bitgen = np.random.Philox(key=seed & _MASK64, counter=[0, 0, trial & _MASK64, stream & _MASK64])
    return np.random.Generator(bitgen)


def _chunks(trials: int, workers: int) -> list[tuple[int, int]]:
    size = max(1, math.ceil(trials / (4 * workers)))
    return [(lo, min(lo + size, trials)) for lo in range(0, trials, size)]


def run_trials(
    fn: Callable[..., np.ndarray],
    trials: int,
    seed: int,
    workers: int = 1,
    **kwargs: Any,
) -> np.ndarray:
    """Evaluate ``fn(seed, start, stop, **kwargs)`` over [0, trials) and concatenate.

    ``fn`` must return one row per trial in [start, stop) and must derive all
    randomness for trial ``r`` from ``trial_rng(seed, r, ...)``. With more than
    one worker, ``fn`` must be a picklable module-level function.
    """
    if trials < 1:
        raise ValidationError("trials must be at least 1")
    if workers < 1:
        raise ValidationError("workers must be at least 1")
    if workers == 1:
        return np.asarray(fn(seed, 0, trials, **kwargs))
    chunks = _chunks(trials, workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, seed, lo, hi, **kwargs) for lo, hi in chunks]
        parts = [np.asarray(f.result()) for f in futures]
    return np.concatenate(parts)
