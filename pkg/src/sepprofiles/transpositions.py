"""Random transpositions on S_n and its biased and centrally perturbed relatives.

The walk picks two labels independently and uniformly and swaps them (equal
labels mean holding). On the irreducible representation lam its eigenvalue is
p_lam = 1/n + 2 diag(lam) / n^2, and only hook shapes survive at the n-cycle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .combinatorics import (
    Partition,
    as_partition,
    character,
    diag_content,
    dimension,
    enumerate_partitions,
    log_dimension,
)
from .errors import ParameterError, SizeError, UnreliableResultWarning, ValidationError
from .streams import run_trials, trial_rng

EXACT_NCYCLE_CAP = 30
SMALL_CAP = 6
CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class HookEntry:
    leg: int
    eigenvalue: Fraction
    sign: int
    multiplicity: int


@dataclass(frozen=True)
class HookSpectrum:
    """Hook shapes (n - j, 1^j): eigenvalue 1 - 2j/n, n-cycle character (-1)^j, dimension C(n-1, j)."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValidationError("n must be at least 2")

    @property
    def entries(self) -> list[HookEntry]:
        n = self.n
        return [
            HookEntry(j, Fraction(n - 2 * j, n), -1 if j % 2 else 1, math.comb(n - 1, j)) for j in range(n)
        ]


def eigenvalue(lam: Partition | Sequence[int]) -> Fraction:
    """p_lam = 1/n + 2 diag(lam) / n^2."""
    lam = as_partition(lam)
    n = lam.n
    return Fraction(1, n) + Fraction(2 * diag_content(lam), n * n)


def mixing_steps(n: int, c: float) -> int:
    """m_n(c) = floor((n/2)(ln n + c)), clipped at 0."""
    return max(0, math.floor(n / 2 * (math.log(n) + c)))


@dataclass(frozen=True)
class NcycleRatio:
    value: Any
    condition: float


def ncycle_ratio_detail(n: int, m: int, exact: bool | None = None) -> NcycleRatio:
    """n! P^m(id, n-cycle) = sum_j C(n-1, j)(-1)^j (1 - 2j/n)^m with a condition estimate.

    Exact rational for n <= 30 (or when ``exact=True``); above that a double
    precision sum in log space with compensated summation. The condition
    estimate is sum |terms| / |result|.
    """
    if n < 2 or m < 0:
        raise ValidationError("need n >= 2 and m >= 0")
    if exact is None:
        exact = n <= EXACT_NCYCLE_CAP
    if exact:
        total = sum((-1) ** j * math.comb(n - 1, j) * (n - 2 * j) ** m for j in range(n))
        value = Fraction(total, n**m)
        abs_sum = Fraction(sum(math.comb(n - 1, j) * abs(n - 2 * j) ** m for j in range(n)), n**m)
        cond = math.inf if value == 0 and abs_sum else (float(abs_sum / abs(value)) if value else 1.0)
        return NcycleRatio(value, cond)
    log_binom = [math.lgamma(n) - math.lgamma(j + 1) - math.lgamma(n - j) for j in range(n)]
    terms = []
    for j in range(n):
        base = (n - 2 * j) / n
        if base == 0:
            if m == 0:
                terms.append((-1) ** j * math.exp(log_binom[j]))
            continue
        sign = (-1) ** j * (1 if base > 0 or m % 2 == 0 else -1)
        terms.append(sign * math.exp(log_binom[j] + m * math.log(abs(base))))
    value = math.fsum(terms)
    abs_sum = math.fsum(abs(x) for x in terms)
    cond = abs_sum / abs(value) if value else math.inf
    return NcycleRatio(value, cond)


def ncycle_ratio(n: int, m: int, exact: bool | None = None) -> Any:
    """n! P^m(id, n-cycle); warns with UnreliableResultWarning when badly conditioned."""
    res = ncycle_ratio_detail(n, m, exact)
    if not isinstance(res.value, Fraction) and res.condition > CONDITION_LIMIT:
        warnings.warn(
            f"n-cycle sum at n={n}, m={m} has condition {res.condition:.3g}", UnreliableResultWarning, stacklevel=2
        )
    return res.value


def separation_lower_bound(n: int, c: float) -> Any:
    """1 - n! P^m(id, n-cycle) at m = m_n(c), a lower bound on separation."""
    return 1 - ncycle_ratio(n, mixing_steps(n, c))


@dataclass(frozen=True)
class ClassSeparation:
    value: Fraction
    argmin: Partition
    ratios: dict


def exact_separation_small(n: int, m: int, cap: int = SMALL_CAP) -> ClassSeparation:
    """Exact separation after m steps by character inversion over conjugacy classes.

    ratios[rho] = n! P^m(id, g) for g of cycle type rho. Ties in the minimum go
    to the class listed first in reverse-lexicographic order.
    """
    if n < 1 or m < 0:
        raise ValidationError("need n >= 1 and m >= 0")
    if n > cap:
        raise SizeError(f"character inversion capped at n={cap}, got {n}")
    shapes = enumerate_partitions(n)
    powers = {lam: eigenvalue(lam) ** m for lam in shapes}
    ratios = {
        rho: sum(dimension(lam) * character(lam, rho) * powers[lam] for lam in shapes) for rho in shapes
    }
    argmin = min(shapes, key=lambda rho: ratios[rho])
    return ClassSeparation(1 - ratios[argmin], argmin, ratios)


def _log_spectral_terms(n: int, c: float, include_trivial: bool) -> list[float]:
    log_x = -0.5 * (c + math.log(n))
    out = []
    for lam in enumerate_partitions(n):
        if not include_trivial and len(lam) == 1:
            continue
        exponent = n - 1 - 2 * diag_content(lam) / n
        out.append(2 * log_dimension(lam) + exponent * log_x)
    return out


def _log_sum_exp(values: Sequence[float]) -> float:
    if not values:
        return -math.inf
    top = max(values)
    return top + math.log(math.fsum(math.exp(v - top) for v in values))


def log_weighted_dimension_sum(n: int, c: float, include_trivial: bool = False) -> float:
    """log of sum_lam f_lam^2 (e^c n)^{-(n - 1 - 2 diag(lam)/n)/2}."""
    return _log_sum_exp(_log_spectral_terms(n, c, include_trivial))


def _check_scale(n: int, c: float) -> float:
    scale = math.log(n) + c
    if scale <= 0:
        raise ParameterError(f"ln n + c must be positive, got {scale}")
    return scale


def spectral_weight_sum(n: int, c: float, include_trivial: bool = False) -> float:
    """(n (ln n + c) / n!) * sum over lam != (n) of f_lam^2 (1/sqrt(e^c n))^{n - 1 - 2 diag(lam)/n}.

    ``include_trivial`` adds the lam = (n) term n (ln n + c) / n!.
    """
    scale = _check_scale(n, c)
    log_prefactor = math.log(n * scale) - math.lgamma(n + 1)
    return math.exp(log_prefactor + log_weighted_dimension_sum(n, c, include_trivial))


@dataclass(frozen=True)
class BiasedParams:
    """Label weights a/n on the n - 1 labels of A and b/n on the single label of B."""

    n: int
    a: Any
    b: Any

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValidationError("n must be at least 2")
        if not 0 < self.b <= self.a:
            raise ValidationError("need 0 < b <= a")
        gap = self.a * (self.n - 1) + self.b - self.n
        exact = isinstance(gap, (int, Fraction))
        if (gap != 0) if exact else abs(gap) > 1e-12:
            raise ValidationError(f"a(n-1) + b must equal n, off by {gap}")

    @classmethod
    def from_epsilon(cls, n: int, eps: Any) -> "BiasedParams":
        """a = 1 + eps/(n-1), b = 1 - eps."""
        return cls(n, 1 + eps / (n - 1) if isinstance(eps, float) else 1 + Fraction(eps) / (n - 1), 1 - eps)


def biased_eigenvalue(params: BiasedParams, lam: Partition | Sequence[int], mu: Partition | Sequence[int]) -> Any:
    """Eigenvalue of the biased walk on the (lam, mu) block, mu a corner removal of lam."""
    lam, mu = as_partition(lam), as_partition(mu)
    n = params.n
    if lam.n != n or mu not in lam.remove_corners():
        raise ValidationError(f"{mu} is not obtained from {lam} by removing one corner")
    a, b = params.a, params.b
    nn = n * n
    if isinstance(a, Fraction) or isinstance(b, Fraction):
        nn = Fraction(nn)
    return (a * a * (n - 1) + b * b) / nn + 2 * (a * a - a * b) * diag_content(mu) / nn + 2 * a * b * diag_content(lam) / nn


@dataclass(frozen=True)
class BiasedBound:
    value: float
    delta: float
    rate_gap: float
    constant: float


def biased_comparison_bound(n: int, c: float, eps: Any = None) -> BiasedBound:
    """Bound on |s^{P_11}(t) - s^{P_ab}(t/b)| in continuous time, t = (n/2)(ln n + c).

    With delta = max over (lam, mu) of |(t/b)(1 - q_lam,mu) - t(1 - p_lam)|, each
    exponential pair differs by at most delta e^delta e^{-t(1 - p_lam)}; summing
    with multiplicities f_lam f_mu and the branching identity gives the value.
    ``rate_gap`` is delta / t and ``constant`` is the factor multiplying
    (n L / n!) sum f_lam^2 (...) in the unspecified-constant form.
    """
    if eps is None:
        eps = Fraction(1, math.factorial(n))
    scale = _check_scale(n, c)
    t = n / 2 * scale
    if eps == 0:
        return BiasedBound(0.0, 0.0, 0.0, 0.0)
    params = BiasedParams.from_epsilon(n, eps if isinstance(eps, float) else Fraction(eps))
    b = params.b
    gap = 0
    for lam in enumerate_partitions(n):
        p = eigenvalue(lam)
        for mu in lam.remove_corners():
            q = biased_eigenvalue(params, lam, mu)
            gap = max(gap, abs((1 - q) / b - (1 - p)))
    delta = t * float(gap)
    log_sum = log_weighted_dimension_sum(n, c, include_trivial=False)
    value = math.exp(math.log(delta) + delta + log_sum) if delta > 0 else 0.0
    constant = delta * math.exp(delta) * math.factorial(n) / (n * scale)
    return BiasedBound(value, delta, float(gap), constant)


def central_perturbation_bound(n: int, c: float, eps: Any) -> float:
    """3 t eps sum_lam f_lam^2 e^{-t (1 - p_lam)} with t = (n/2)(ln n + c)."""
    if eps < 0:
        raise ValidationError("eps must be nonnegative")
    if eps == 0:
        return 0.0
    t = n / 2 * _check_scale(n, c)
    return math.exp(math.log(3 * t * float(eps)) + log_weighted_dimension_sum(n, c, include_trivial=True))


# --------------------------------------------------------------------------- untouched labels


@dataclass(frozen=True)
class TouchedLabels:
    """Histogram of U_m, the number of labels absent from the first m label pairs."""

    n: int
    steps: tuple[int, ...]
    histograms: np.ndarray  # shape (len(steps), n + 1)
    trials: int

    def _row(self, m: int) -> np.ndarray:
        return self.histograms[self.steps.index(m)]

    def mean(self, m: int) -> float:
        return float(self._row(m) @ np.arange(self.n + 1)) / self.trials

    def mean_stderr(self, m: int) -> float:
        h = self._row(m)
        u = np.arange(self.n + 1)
        second = float(h @ u**2) / self.trials
        return math.sqrt(max(0.0, second - self.mean(m) ** 2) / self.trials)

    def prob_at_least(self, m: int, r: int) -> float:
        return float(self._row(m)[r:].sum()) / self.trials

    def prob_stderr(self, m: int, r: int) -> float:
        p = self.prob_at_least(m, r)
        return math.sqrt(p * (1 - p) / self.trials)

    def exact_mean(self, m: int) -> float:
        """E[U_m] = n (1 - 1/n)^{2m}."""
        return self.n * math.exp(2 * m * math.log1p(-1 / self.n))


BATCH = 256


def _touched_chunk(seed: int, start: int, stop: int, n: int, steps: tuple[int, ...]) -> np.ndarray:
    draws = 2 * max(steps)
    out = np.zeros((stop - start, len(steps)), dtype=np.int64)
    thresholds = 2 * np.asarray(steps)
    for lo in range(start, stop, BATCH):
        hi = min(lo + BATCH, stop)
        first = np.full((hi - lo) * n, draws, dtype=np.int64)
        if draws:
            labels = np.stack([trial_rng(seed, r).integers(0, n, size=draws) for r in range(lo, hi)])
            flat = labels + (np.arange(hi - lo) * n)[:, None]
            np.minimum.at(first, flat.ravel(), np.tile(np.arange(draws), hi - lo))
        first = first.reshape(hi - lo, n)
        out[lo - start : hi - start] = (first[:, :, None] >= thresholds[None, None, :]).sum(axis=1)
    return out


def simulate_touched_labels(
    n: int, steps: int | Sequence[int], trials: int, seed: int = 0, workers: int = 1
) -> TouchedLabels:
    """Simulate 2m uniform labels per trial and record U_m for each m in ``steps``."""
    if n < 1:
        raise ValidationError("n must be positive")
    grid = (steps,) if isinstance(steps, int) else tuple(int(m) for m in steps)
    if not grid or min(grid) < 0:
        raise ValidationError("steps must be nonnegative")
    counts = run_trials(_touched_chunk, trials, seed, workers, n=n, steps=grid)
    hist = np.stack([np.bincount(counts[:, i], minlength=n + 1) for i in range(len(grid))])
    return TouchedLabels(n, grid, hist, trials)
