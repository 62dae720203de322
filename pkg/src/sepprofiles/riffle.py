"""Driven inverse riffle shuffles and k-random-to-top.

One step draws a pile size K from a law f on {1, ..., n} and moves a uniform
K-subset of the deck to the top, keeping relative order. Card i's row history
is its sequence of selection bits; the first time all n rows are distinct is an
optimal strong stationary time, so separation equals P[T > t].

Exact values come from inclusion-exclusion over set-partition types.
Monte Carlo estimates come from simulating row histories.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Literal, Sequence

import numpy as np

from .combinatorics import Partition, as_partition, enumerate_partitions, mobius_type_weight
from .errors import ParameterError, ValidationError
from .streams import run_trials, trial_rng

log = logging.getLogger(__name__)

Mode = Literal["exact", "float"]

T_BEYOND = 0xFFFFFFFF
"""Sentinel stored in binary collision-time output for T beyond the horizon."""

MASK_BITS = 64
SMALL_PILE = 32


@dataclass(frozen=True)
class PileSizeLaw:
    """Probability mass f(1), ..., f(n) on pile sizes."""

    n: int
    mass: tuple
    mode: Mode = "exact"

    def __post_init__(self) -> None:
        if self.mode not in ("exact", "float"):
            raise ValidationError(f"mode must be 'exact' or 'float', got {self.mode!r}")
        if self.n < 1 or len(self.mass) != self.n:
            raise ValidationError(f"need n >= 1 and exactly n masses, got n={self.n}, {len(self.mass)} masses")
        if self.mode == "exact":
            if any(isinstance(p, float) for p in self.mass):
                raise ValidationError("float mass in an exact-mode law")
            mass = tuple(Fraction(p) for p in self.mass)
            ok = sum(mass) == 1
        else:
            mass = tuple(float(p) for p in self.mass)
            ok = abs(math.fsum(mass) - 1.0) <= 1e-12
        if any(p < 0 for p in mass):
            raise ValidationError("masses must be nonnegative")
        if not ok:
            raise ValidationError(f"masses sum to {sum(mass)}, not 1")
        object.__setattr__(self, "mass", mass)

    @classmethod
    def uniform(cls, n: int, mode: Mode = "exact") -> "PileSizeLaw":
        p = Fraction(1, n) if mode == "exact" else 1.0 / n
        return cls(n, (p,) * n, mode)

    @classmethod
    def delta(cls, n: int, k: int, mode: Mode = "exact") -> "PileSizeLaw":
        if not 1 <= k <= n:
            raise ValidationError(f"pile size k={k} outside 1..{n}")
        one, zero = (Fraction(1), Fraction(0)) if mode == "exact" else (1.0, 0.0)
        return cls(n, tuple(one if j == k else zero for j in range(1, n + 1)), mode)

    def __call__(self, k: int) -> Any:
        return self.mass[k - 1] if 1 <= k <= self.n else 0 * self.mass[0]

    @property
    def support(self) -> list[int]:
        return [k for k in range(1, self.n + 1) if self.mass[k - 1] != 0]

    def point_mass(self) -> int | None:
        """The pile size if the law is a point mass, else None."""
        support = self.support
        return support[0] if len(support) == 1 else None

    def is_uniform(self) -> bool:
        return len(set(self.mass)) == 1

    def var_fraction(self) -> float:
        """Var(K / n)."""
        p = np.array([float(m) for m in self.mass])
        y = np.arange(1, self.n + 1) / self.n
        mean = float(p @ y)
        return float(p @ (y - mean) ** 2)

    def concentration_diagnostic(self) -> float:
        """Var(K / n) * ln n; small values indicate a concentrated pile size."""
        return self.var_fraction() * math.log(self.n) if self.n > 1 else 0.0

    def as_float(self) -> "PileSizeLaw":
        return self if self.mode == "float" else PileSizeLaw(self.n, tuple(float(p) for p in self.mass), "float")


def _block_polynomial(lam: Partition) -> list[int]:
    """Coefficients c_s = number of sub-multisets of blocks of total size s."""
    poly = [1]
    for j, m in lam.multiplicities.items():
        factor = [0] * (j * m + 1)
        for r in range(m + 1):
            factor[j * r] = math.comb(m, r)
        out = [0] * (len(poly) + len(factor) - 1)
        for a, ca in enumerate(poly):
            if ca:
                for b, cb in enumerate(factor):
                    if cb:
                        out[a + b] += ca * cb
        poly = out
    return poly


def q_lambda(law: PileSizeLaw, lam: Partition | Sequence[int]) -> Any:
    """One-step probability that the selected set is a union of blocks of a fixed
    set partition of type lam."""
    lam = as_partition(lam)
    n = law.n
    if lam.n != n:
        raise ValidationError(f"|lam|={lam.n} does not match deck size {n}")
    poly = _block_polynomial(lam)
    if law.mode == "exact":
        return sum(
            (Fraction(poly[s], math.comb(n, s)) * law(s) for s in range(1, n + 1) if poly[s] and law(s)),
            Fraction(0),
        )
    return math.fsum(float(Fraction(poly[s], math.comb(n, s))) * law(s) for s in range(1, n + 1) if poly[s])


@dataclass(frozen=True)
class _Expansion:
    weights: tuple[int, ...]
    qs: tuple


def _expansion(law: PileSizeLaw) -> _Expansion:
    parts = enumerate_partitions(law.n)
    return _Expansion(tuple(mobius_type_weight(p) for p in parts), tuple(q_lambda(law, p) for p in parts))


def _evaluate(exp: _Expansion, t: int, mode: Mode) -> Any:
    if t < 0:
        raise ValidationError("t must be nonnegative")
    if mode == "exact":
        return 1 - sum(w * q**t for w, q in zip(exp.weights, exp.qs))
    value = 1.0 - math.fsum(w * q**t for w, q in zip(exp.weights, exp.qs))
    if not 0.0 <= value <= 1.0:
        log.warning("inclusion-exclusion value %.3e at t=%d clamped to [0, 1]", value, t)
        value = min(1.0, max(0.0, value))
    return value


def exact_separation(law: PileSizeLaw, t: int) -> Any:
    """s(t) = 1 - sum over types lam of w_lam q_lam^t (exact for exact-mode laws)."""
    return _evaluate(_expansion(law), t, law.mode)


def exact_separation_curve(law: PileSizeLaw, times: Iterable[int]) -> list:
    exp = _expansion(law)
    return [_evaluate(exp, t, law.mode) for t in times]


def q2(law: PileSizeLaw) -> Any:
    """Probability that two fixed cards receive the same selection bit in one step."""
    n = law.n
    if n < 2:
        raise ValidationError("q2 needs n >= 2")
    terms = (law(k) * Fraction(math.comb(k, 2) + math.comb(n - k, 2), math.comb(n, 2)) for k in law.support)
    if law.mode == "exact":
        return sum(terms, Fraction(0))
    return math.fsum(float(x) for x in terms)


def q3(law: PileSizeLaw) -> Any:
    """Probability that three fixed cards all receive the same selection bit in one step."""
    n = law.n
    if n < 3:
        raise ValidationError("q3 needs n >= 3")
    terms = (law(k) * Fraction(math.comb(k, 3) + math.comb(n - k, 3), math.comb(n, 3)) for k in law.support)
    if law.mode == "exact":
        return sum(terms, Fraction(0))
    return math.fsum(float(x) for x in terms)


def _agreement(n: int, law: PileSizeLaw | None, k: int | None) -> float:
    if law is None:
        if k is None:
            raise ValidationError("give either a pile-size law or a fixed k")
        law = PileSizeLaw.delta(n, k)
    elif law.n != n:
        raise ValidationError("law size does not match n")
    p = float(q2(law))
    if not 0.0 < p < 1.0:
        raise ParameterError(f"degenerate law: two-card agreement probability is {p}")
    return p


def dense_time(n: int, c: float, *, law: PileSizeLaw | None = None, k: int | None = None) -> int:
    """round((2 ln n + c) / (-ln q2)), natural logarithms."""
    p = _agreement(n, law, k)
    return max(0, round((2 * math.log(n) + c) / -math.log(p)))


def effective_dense_c(n: int, t: int, *, law: PileSizeLaw | None = None, k: int | None = None) -> float:
    """The c for which t equals (2 ln n + c) / (-ln q2) exactly, before rounding."""
    p = _agreement(n, law, k)
    return -t * math.log(p) - 2 * math.log(n)


def sparse_time(n: int, k: int, c: float) -> int:
    """floor((n / k)(ln n + c))."""
    if not 1 <= k <= n:
        raise ValidationError(f"k={k} outside 1..{n}")
    return max(0, math.floor(n / k * (math.log(n) + c)))


def uniform_driven_time(n: int, c: float) -> int:
    """floor(a ln n + b c sqrt(ln n)) for the uniformly driven shuffle."""
    from .profiles import gaussian_constants

    consts = gaussian_constants()
    ln = math.log(n)
    return max(0, math.floor(consts.a * ln + consts.b * c * math.sqrt(ln)))


def untouched_factorial_moment(n: int, k: int, t: int, r: int) -> float:
    """E[(U_t)_r] = (n)_r (C(n-r, k) / C(n, k))^t for U_t the never-selected count.

    For n - k < r <= n and t >= 1 some selected card always falls in any r-set,
    so the moment is 0. r > n is rejected.
    """
    if not 1 <= k <= n or t < 0 or r < 0:
        raise ValidationError("need 1 <= k <= n, t >= 0, r >= 0")
    if r > n:
        raise ValidationError(f"r={r} exceeds n={n}")
    if r == 0:
        return 1.0
    log_falling = math.lgamma(n + 1) - math.lgamma(n - r + 1)
    if t == 0:
        return math.exp(log_falling)
    if r > n - k:
        return 0.0
    log_ratio = math.fsum(math.log1p(-k / (n - i)) for i in range(r))
    return math.exp(log_falling + t * log_ratio)


def repeated_nonzero_rows_bound(n: int, k: int, t: int) -> float:
    """Upper bound on the expected number of card pairs with equal, nonzero rows."""
    both = k * (k - 1) / (n * (n - 1))
    neither = (n - k) * (n - k - 1) / (n * (n - 1))
    agree = both + neither
    if agree == 0:
        return 0.0
    return math.comb(n, 2) * agree**t * t * both / agree


# --------------------------------------------------------------------------- Monte Carlo


@dataclass(frozen=True)
class SSTEstimate:
    t: int
    estimate: float
    stderr: float
    exceed: int
    trials: int


@dataclass
class SSTCurve:
    times: tuple[int, ...]
    exceed: np.ndarray
    trials: int
    collision_times: np.ndarray | None = field(default=None, repr=False)

    @property
    def estimates(self) -> np.ndarray:
        return self.exceed / self.trials

    @property
    def stderrs(self) -> np.ndarray:
        p = self.estimates
        return np.sqrt(p * (1 - p) / self.trials)

    def points(self) -> list[SSTEstimate]:
        return [
            SSTEstimate(t, float(p), float(se), int(e), self.trials)
            for t, p, se, e in zip(self.times, self.estimates, self.stderrs, self.exceed)
        ]


@dataclass(frozen=True)
class _Sampler:
    n: int
    kind: str  # "fixed" | "uniform" | "general"
    k: int = 0
    probs: tuple[float, ...] = ()


def _sampler(law: PileSizeLaw) -> _Sampler:
    k = law.point_mass()
    if k is not None:
        return _Sampler(law.n, "fixed", k)
    if law.is_uniform():
        return _Sampler(law.n, "uniform")
    return _Sampler(law.n, "general", probs=tuple(float(p) for p in law.mass))


def _pile_sizes(rng: np.random.Generator, s: _Sampler, t: int) -> np.ndarray:
    if s.kind == "fixed":
        return np.full(t, s.k, dtype=np.int64)
    if s.kind == "uniform":
        return rng.integers(1, s.n + 1, size=t)
    return rng.choice(s.n, size=t, p=np.asarray(s.probs)) + 1


def _small_subsets(rng: np.random.Generator, n: int, k: int, t: int) -> np.ndarray:
    """t independent uniform k-subsets of range(n) by rejection of repeated draws."""
    out = rng.integers(0, n, size=(t, k))
    if k == 1:
        return out
    while True:
        srt = np.sort(out, axis=1)
        bad = np.nonzero(np.any(srt[:, 1:] == srt[:, :-1], axis=1))[0]
        if bad.size == 0:
            return out
        out[bad] = rng.integers(0, n, size=(bad.size, k))


def selection_record(rng: np.random.Generator, s: _Sampler, t: int) -> tuple[np.ndarray, np.ndarray]:
    """Selected cards for steps 0..t-1 as (cards, offsets) in compressed row form."""
    n = s.n
    if s.kind == "fixed" and s.k <= SMALL_PILE and s.k * s.k <= n:
        cards = _small_subsets(rng, n, s.k, t).ravel()
        return cards, np.arange(t + 1, dtype=np.int64) * s.k
    sizes = _pile_sizes(rng, s, t)
    chunks = [
        np.arange(n) if size == n else rng.choice(n, int(size), replace=False, shuffle=False)
        for size in sizes
    ]
    offsets = np.zeros(t + 1, dtype=np.int64)
    np.cumsum(sizes, out=offsets[1:])
    cards = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)
    return cards.astype(np.int64), offsets


class _RowState:
    """Row histories of one trial, queried at arbitrary prefixes of time."""

    def __init__(self, n: int, cards: np.ndarray, offsets: np.ndarray, rng: np.random.Generator) -> None:
        self.n = n
        self.cards = cards
        self.offsets = offsets
        horizon = len(offsets) - 1
        self.steps = np.repeat(np.arange(horizon, dtype=np.int64), np.diff(offsets))
        self.exact_bits = horizon <= MASK_BITS
        if self.exact_bits:
            self.rows = np.zeros(n, dtype=np.uint64)
            np.bitwise_or.at(self.rows, cards, np.left_shift(np.uint64(1), self.steps.astype(np.uint64)))
        else:
            self.keys = rng.integers(0, np.iinfo(np.uint64).max, size=horizon, dtype=np.uint64, endpoint=True)

    def _hashes(self, t: int) -> np.ndarray:
        if self.exact_bits:
            if t >= MASK_BITS:
                return self.rows
            return self.rows & np.uint64((1 << t) - 1)
        h = np.zeros(self.n, dtype=np.uint64)
        stop = self.offsets[t]
        np.bitwise_xor.at(h, self.cards[:stop], self.keys[self.steps[:stop]])
        return h

    def _verified_repeat(self, t: int, h: np.ndarray) -> bool:
        """True iff two cards have identical rows on steps < t, checking hash ties exactly."""
        order = np.argsort(h, kind="stable")
        sh = h[order]
        tie = np.nonzero(sh[1:] == sh[:-1])[0]
        if tie.size == 0:
            return False
        if self.exact_bits:
            return True
        stop = self.offsets[t]
        cards, steps = self.cards[:stop], self.steps[:stop]
        by_card = np.argsort(cards, kind="stable")
        bounds = np.searchsorted(cards[by_card], np.arange(self.n + 1))
        candidates = np.unique(np.concatenate([order[tie], order[tie + 1]]))
        seen: dict[tuple[int, bytes], int] = {}
        for card in candidates:
            row = steps[by_card[bounds[card] : bounds[card + 1]]]
            key = (int(h[card]), row.tobytes())
            if key in seen:
                return True
            seen[key] = int(card)
        return False

    def repeats_at(self, t: int) -> bool:
        return self._verified_repeat(t, self._hashes(t))

    def collision_time(self) -> int:
        """First t in [0, horizon] with all rows distinct, or T_BEYOND."""
        horizon = len(self.offsets) - 1
        if self.repeats_at(horizon):
            return T_BEYOND
        if not self.repeats_at(0):
            return 0
        lo, hi = 0, horizon  # rows repeat at lo and are distinct at hi
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.repeats_at(mid):
                lo = mid
            else:
                hi = mid
        return hi


def _sst_chunk(
    seed: int,
    start: int,
    stop: int,
    sampler: _Sampler,
    times: tuple[int, ...],
    want_times: bool,
) -> np.ndarray:
    horizon = max(times)
    out = np.zeros((stop - start, len(times) + 1), dtype=np.int64)
    for row, trial in enumerate(range(start, stop)):
        rng = trial_rng(seed, trial)
        cards, offsets = selection_record(rng, sampler, horizon)
        state = _RowState(sampler.n, cards, offsets, rng)
        for col, t in enumerate(times):
            out[row, col] = 1 if sampler.n > 1 and (t == 0 or state.repeats_at(t)) else 0
        if want_times:
            out[row, -1] = state.collision_time() if sampler.n > 1 else 0
    return out


def simulate_sst_curve(
    law: PileSizeLaw,
    times: Sequence[int],
    trials: int,
    seed: int = 0,
    workers: int = 1,
    return_collision_times: bool = False,
) -> SSTCurve:
    """Estimate P[T > t] for each t in ``times`` from one set of simulated histories."""
    times = tuple(int(t) for t in times)
    if not times or min(times) < 0:
        raise ValidationError("need a nonempty list of nonnegative times")
    raw = run_trials(
        _sst_chunk,
        trials,
        seed,
        workers,
        sampler=_sampler(law),
        times=times,
        want_times=return_collision_times,
    )
    collisions = raw[:, -1].astype(np.uint32) if return_collision_times else None
    return SSTCurve(times, raw[:, :-1].sum(axis=0), trials, collisions)


def simulate_sst(law: PileSizeLaw, t: int, trials: int, seed: int = 0, workers: int = 1) -> SSTEstimate:
    """Monte Carlo estimate of s(t) = P[T > t] with its binomial standard error."""
    return simulate_sst_curve(law, [t], trials, seed, workers).points()[0]


@dataclass(frozen=True)
class RowHistorySample:
    n: int
    t: int
    rows: np.ndarray  # bool, shape (n, t)
    collision_time: int  # T_BEYOND when rows still repeat at t

    def recheck(self) -> bool:
        """Recompute the collision time from the stored rows."""
        for s in range(self.t + 1):
            if len({r.tobytes() for r in self.rows[:, :s]}) == self.n:
                return s == self.collision_time
        return self.collision_time == T_BEYOND


def sample_row_history(law: PileSizeLaw, t: int, seed: int = 0, trial: int = 0) -> RowHistorySample:
    """The full row histories of one trial (the same draws simulate_sst uses for that trial)."""
    sampler = _sampler(law)
    rng = trial_rng(seed, trial)
    cards, offsets = selection_record(rng, sampler, t)
    state = _RowState(law.n, cards, offsets, rng)
    rows = np.zeros((law.n, t), dtype=bool)
    rows[cards, state.steps] = True
    return RowHistorySample(law.n, t, rows, state.collision_time() if law.n > 1 else 0)


def write_collision_times(path, values: np.ndarray) -> None:
    """Little-endian uint32 per trial; T_BEYOND marks 'beyond horizon'."""
    np.asarray(values, dtype="<u4").tofile(path)


def read_collision_times(path) -> np.ndarray:
    return np.fromfile(path, dtype="<u4")
