"""Coordinate-refresh walks on (Z/mZ)^n and the Bernoulli-Laplace urn chain.

In continuous time coordinate k of a coordinate-refresh walk is replaced by a
uniform value at rate alpha_k. From any start the worst target differs in every
coordinate, so the separation is 1 - prod_k (1 - exp(-alpha_k t)) for every m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Any, NamedTuple, Sequence

import numpy as np
from scipy.special import logsumexp

from .chain import ChainKernel, SpectralDecomposition
from .errors import ParameterError, SizeError, ValidationError

DIRECT_CAP = 1000
BL_SUM_CAP = 100_000
BL_KERNEL_CAP = 200
BL_EXACT_CAP = 20


@dataclass(frozen=True)
class RateVector:
    """Coordinate ring rates alpha_1..alpha_n, positive and summing to 1."""

    rates: tuple

    def __post_init__(self) -> None:
        rates = tuple(self.rates)
        if not rates:
            raise ValidationError("need at least one coordinate")
        if any(r <= 0 for r in rates):
            raise ValidationError("rates must be positive")
        total = sum(rates)
        exact = all(isinstance(r, (int, Fraction)) for r in rates)
        if (total != 1) if exact else abs(math.fsum(float(r) for r in rates) - 1) > 1e-12:
            raise ValidationError(f"rates sum to {total}, not 1")
        object.__setattr__(self, "rates", rates)

    @classmethod
    def uniform(cls, n: int, exact: bool = False) -> "RateVector":
        return cls((Fraction(1, n),) * n if exact else (1.0 / n,) * n)

    @classmethod
    def first_coordinate(cls, n: int, b: Any) -> "RateVector":
        """alpha_1 = 1/n + b and alpha_k = 1/n - b/(n-1) for k >= 2."""
        slow = first_coordinate_slow_rate(n, b)
        fast = Fraction(1, n) + b if isinstance(b, (int, Fraction)) else 1.0 / n + b
        return cls((fast,) + (slow,) * (n - 1))

    @classmethod
    def half_split(cls, n: int, b: Any) -> "RateVector":
        """Rate (1 + 2b)/n on the first n/2 coordinates and (1 - 2b)/n on the rest."""
        _check_half_split(n, b)
        one = Fraction(1) if isinstance(b, (int, Fraction)) else 1.0
        half = n // 2
        return cls(((one + 2 * b) / n,) * half + ((one - 2 * b) / n,) * half)

    @property
    def n(self) -> int:
        return len(self.rates)

    @property
    def min_rate(self) -> Any:
        return min(self.rates)

    @property
    def min_multiplicity(self) -> int:
        """gamma, the number of coordinates ringing at the minimal rate."""
        low = float(self.min_rate)
        return sum(1 for r in self.rates if math.isclose(float(r), low, rel_tol=1e-12, abs_tol=0.0))

    def as_array(self) -> np.ndarray:
        return np.array([float(r) for r in self.rates])


def first_coordinate_slow_rate(n: int, b: Any) -> Any:
    if not 0 < b < 1:
        raise ParameterError("b must lie in (0, 1)")
    slow = Fraction(1, n) - Fraction(b) / (n - 1) if isinstance(b, (int, Fraction)) else 1.0 / n - b / (n - 1)
    if n < 2 or slow <= 0:
        raise ParameterError(f"slow rate 1/n - b/(n-1) is not positive for n={n}, b={b}")
    return slow


def _check_half_split(n: int, b: float) -> None:
    if n < 2 or n % 2:
        raise ParameterError("half-split walks need even n")
    if not 0 < b < 0.5:
        raise ParameterError("b must lie in (0, 1/2)")


# --------------------------------------------------------------------------- separation


def _product_separation(rates: np.ndarray, t: float, force_direct: bool | None = None) -> float:
    if t < 0:
        raise ValidationError("t must be nonnegative")
    if t == 0:
        return 1.0
    direct = rates.size <= DIRECT_CAP if force_direct is None else force_direct
    if direct:
        return float(1.0 - np.prod(1.0 - np.exp(-rates * t)))
    return float(-np.expm1(np.sum(np.log1p(-np.exp(-rates * t)))))


def hypercube_separation(rates: RateVector, t: float) -> float:
    """1 - prod_k (1 - exp(-alpha_k t)); a log1p/expm1 path is used for n > 1000."""
    return _product_separation(rates.as_array(), t)


def refresh_separation(rates: RateVector, t: float) -> float:
    """Separation of the coordinate-refresh walk on (Z/mZ)^n; the formula does not involve m."""
    return hypercube_separation(rates, t)


def zmn_separation_uniform(m: int, n: int, t: float) -> float:
    """1 - (1 - exp(-t/n))^n for the uniform-rate walk on (Z/mZ)^n."""
    if m < 2:
        raise ParameterError("m must be at least 2")
    if n < 1 or t < 0:
        raise ValidationError("need n >= 1 and t >= 0")
    if t == 0:
        return 1.0
    if n <= DIRECT_CAP:
        return 1.0 - (1.0 - math.exp(-t / n)) ** n
    return -math.expm1(n * math.log1p(-math.exp(-t / n)))


def lazy_time_map(t: float, alpha: float) -> float:
    """The lazy chain (1 - alpha) I + alpha P at time t / alpha matches P at time t."""
    if not 0 < alpha <= 1:
        raise ParameterError("alpha must lie in (0, 1]")
    return t / alpha


def lazy_separation(rates: RateVector, alpha: float, t: float) -> float:
    """Continuous-time separation of the lazy version of a coordinate-refresh walk."""
    if not 0 < alpha <= 1:
        raise ParameterError("alpha must lie in (0, 1]")
    return _product_separation(alpha * rates.as_array(), t)


class GumbelCheck(NamedTuple):
    value: float
    time: float
    diagnostic: float


def gumbel_profile_check(rates: RateVector, c: float) -> GumbelCheck:
    """Separation at t = (ln gamma + c) / alpha_min, with max over faster k of gamma^(-alpha_k/alpha_min)."""
    low = float(rates.min_rate)
    gamma = rates.min_multiplicity
    t = (math.log(gamma) + c) / low
    ratios = rates.as_array() / low
    faster = ratios[~np.isclose(ratios, 1.0, rtol=1e-12, atol=0.0)]
    diag = float(np.max(gamma ** (-faster))) if faster.size else 0.0
    return GumbelCheck(hypercube_separation(rates, max(t, 0.0)), t, diag)


# --------------------------------------------------------------------------- kernels and spectra


def coordinate_refresh_kernel(m: int, rates: RateVector, mode: str = "float", cap: int = 4096) -> ChainKernel:
    """Discrete kernel on (Z/mZ)^n: pick coordinate k w.p. alpha_k and redraw it uniformly."""
    if m < 2:
        raise ParameterError("m must be at least 2")
    n = rates.n
    size = m**n
    if size > cap:
        raise SizeError(f"state space {size} exceeds cap {cap}")
    states = list(product(range(m), repeat=n))
    index = {s: i for i, s in enumerate(states)}
    if mode == "exact":
        alphas = [Fraction(r) for r in rates.rates]
        share = [a / m for a in alphas]
    else:
        alphas = [float(r) for r in rates.rates]
        share = [a / m for a in alphas]
    hold = sum(share)
    rows = []
    for s in states:
        row = {index[s]: hold}
        for k in range(n):
            for v in range(m):
                if v != s[k]:
                    nxt = s[:k] + (v,) + s[k + 1 :]
                    row[index[nxt]] = share[k]
        rows.append(row)
    pi = [Fraction(1, size)] * size if mode == "exact" else [1.0 / size] * size
    return ChainKernel(states, rows, mode=mode, stationary=pi)


def hypercube_spectrum(rates: RateVector, with_table: bool = True) -> SpectralDecomposition:
    """Characters (-1)^{v.x} with eigenvalues 1 - sum_k alpha_k v_k.

    Columns follow itertools.product order on v, rows the product order on x,
    matching coordinate_refresh_kernel(2, rates).
    """
    n = rates.n
    alpha = rates.as_array()
    vs = np.array(list(product((0, 1), repeat=n)), dtype=np.int64)
    eig = 1.0 - vs @ alpha
    mult = np.ones(len(vs), dtype=np.int64)
    if not with_table:
        return SpectralDecomposition(eig, mult)
    if n > 12:
        raise SizeError("eigenfunction tables capped at n=12")
    table = (-1.0) ** ((vs @ vs.T) % 2)
    return SpectralDecomposition(eig, mult, table, np.full(len(vs), 1.0 / len(vs)))


# --------------------------------------------------------------------------- comparison sums


def _log_pow1p(u: float, k: float, power: float) -> float:
    """log((1 + u/k)^power)."""
    return power * math.log1p(u / k)


class ComparisonSums(NamedTuple):
    s0: float
    s1: float

    @property
    def total(self) -> float:
        return self.s0 + self.s1


def perturbed_comparison_sums(m: int, n: int, b: float, c: float, exact: bool = False) -> ComparisonSums:
    """Comparison sums for the first-coordinate perturbation of the uniform walk on (Z/mZ)^n.

    The paired times are n(ln n + c) for the uniform walk and (ln(n-1) + c)/a_n
    for the perturbed one. S0 is exact; S1 is the triangle-inequality bound
    unless ``exact`` asks for the signed-difference sum itself.
    """
    if m < 2:
        raise ParameterError("m must be at least 2")
    if n < 3:
        raise ParameterError("n must be at least 3")
    slow = float(first_coordinate_slow_rate(n, b))
    rho = (1.0 / n + b) / slow
    u = (m - 1) * math.exp(-c)
    log_a = _log_pow1p(u, n - 1, n - 1)
    log_b = _log_pow1p(u, n, n - 1)
    s0 = math.exp(log_b) * math.expm1(log_a - log_b)
    if not exact:
        first = math.log(m - 1) - rho * (math.log(n - 1) + c) + log_a
        second = math.log(m - 1) - math.log(n) - c + log_b
        return ComparisonSums(s0, math.exp(first) + math.exp(second))
    j = np.arange(n, dtype=float)
    log_mult = (
        math.lgamma(n) - np.array([math.lgamma(x + 1) + math.lgamma(n - x) for x in j]) + (j + 1) * math.log(m - 1)
    )
    x = -(rho + j) * (math.log(n - 1) + c)
    y = -(j + 1) * (math.log(n) + c)
    hi, lo = np.maximum(x, y), np.minimum(x, y)
    with np.errstate(divide="ignore"):
        log_diff = hi + np.log(-np.expm1(lo - hi))
    return ComparisonSums(s0, float(np.exp(logsumexp(log_mult + log_diff))))


def perturbed_comparison_sum_direct(m: int, n: int, b: float, c: float) -> float:
    """Sum over characters of multiplicity times |difference of exponentials|, grouped by support."""
    slow = float(first_coordinate_slow_rate(n, b))
    rho = (1.0 / n + b) / slow
    total = []
    for i in (0, 1):
        for j in range(n):
            mult = math.comb(n - 1, j) * (m - 1) ** (i + j)
            q = math.exp(-(i * rho + j) * (math.log(n - 1) + c))
            p = math.exp(-(i + j) * (math.log(n) + c))
            total.append(mult * abs(q - p))
    return math.fsum(total)


def halfsplit_comparison_bound(n: int, b: float, b_prime: float, c: float) -> float:
    """(1 + L^-1)^N ((1 + L^-r_b)^N - 1 + (1 + L^-r_b')^N - 1), N = n/2, L = N e^c."""
    _check_half_split(n, b)
    _check_half_split(n, b_prime)
    half = n // 2
    log_l = math.log(half) + c
    common = half * math.log1p(math.exp(-log_l))
    parts = []
    for beta in (b, b_prime):
        r = (1 + 2 * beta) / (1 - 2 * beta)
        parts.append(math.expm1(half * math.log1p(math.exp(-r * log_l))))
    return math.exp(common) * (parts[0] + parts[1])


def halfsplit_times(n: int, b: float, c: float) -> float:
    """n/(1 - 2b) (ln(n/2) + c), the slow-coordinate cutoff time of the half-split walk."""
    _check_half_split(n, b)
    return n / (1 - 2 * b) * (math.log(n / 2) + c)


class ContinuityParts(NamedTuple):
    slow_part: float
    fast_part: float

    @property
    def total(self) -> float:
        return self.slow_part + self.fast_part


def hypercube_continuity_sums(variant: str, n: int, c: float, b: float) -> ContinuityParts:
    """B_n(c) split into the part from slow-only characters and the part touching fast coordinates.

    ``first_coordinate``: window 1/a_n at time (ln(n-1) + c)/a_n.
    ``half_split``: window n/(1-2b) at time n/(1-2b)(ln(n/2) + c).
    """
    if variant == "first_coordinate":
        slow = float(first_coordinate_slow_rate(n, b))
        rho = (1.0 / n + b) / slow
        x = math.exp(-c) / (n - 1)
        slow_part = math.exp(-c + (n - 2) * math.log1p(x))
        log_fast = rho * math.log(x) + math.log(
            rho * math.exp((n - 1) * math.log1p(x)) + (n - 1) * x * math.exp((n - 2) * math.log1p(x))
        )
        return ContinuityParts(slow_part, math.exp(log_fast))
    if variant == "half_split":
        _check_half_split(n, b)
        half = n // 2
        r = (1 + 2 * b) / (1 - 2 * b)
        log_l = math.log(half) + c
        inv_l, inv_lr = math.exp(-log_l), math.exp(-r * log_l)
        slow_part = math.exp(half * math.log1p(inv_lr) + math.log(half) - log_l + (half - 1) * math.log1p(inv_l))
        fast_part = math.exp(
            half * math.log1p(inv_l) + math.log(r * half) - r * log_l + (half - 1) * math.log1p(inv_lr)
        )
        return ContinuityParts(slow_part, fast_part)
    raise ValidationError(f"unknown variant {variant!r}")


def refresh_continuity_sum(rates: RateVector, t: float, w: float, c: float, m: int = 2) -> float:
    """w sum over nonzero characters of lambda e^{-(t + c w) lambda} for a refresh walk on (Z/mZ)^n.

    Uses sum_v lambda_v e^{-T lambda_v} = -d/dT prod_k (1 + (m-1) e^{-T alpha_k}).
    """
    horizon = t + c * w
    alpha = rates.as_array()
    damp = (m - 1) * np.exp(-horizon * alpha)
    log_prod = float(np.sum(np.log1p(damp)))
    return float(w * math.exp(log_prod) * np.sum(alpha * damp / (1 + damp)))


# --------------------------------------------------------------------------- Bernoulli-Laplace


def _check_bl(n: int, cap: int) -> None:
    if n < 2 or n % 2:
        raise ParameterError("Bernoulli-Laplace needs even n >= 2")
    if n > cap:
        raise SizeError(f"n={n} exceeds cap {cap}")


@dataclass(frozen=True)
class BLSpectrum:
    """Gaps 4j(n-j+1)/n^2 and dimensions C(n,j) - C(n,j-1) for j = 0..n/2."""

    n: int

    def __post_init__(self) -> None:
        _check_bl(self.n, BL_SUM_CAP)

    @property
    def gaps(self) -> list[Fraction]:
        n = self.n
        return [Fraction(4 * j * (n - j + 1), n * n) for j in range(n // 2 + 1)]

    @property
    def dimensions(self) -> list[int]:
        n = self.n
        return [math.comb(n, j) - (math.comb(n, j - 1) if j else 0) for j in range(n // 2 + 1)]


def bl_spectrum(n: int) -> BLSpectrum:
    return BLSpectrum(n)


def _bl_log_terms(n: int, c: float) -> np.ndarray:
    j = np.arange(1, n // 2 + 1, dtype=float)
    from scipy.special import gammaln

    log_dim = gammaln(n + 1) - gammaln(j + 1) - gammaln(n - j + 1) + np.log(n - 2 * j + 1) - np.log(n - j + 1)
    kappa = j * (n - j + 1) / n  # (n/4) * gap
    return log_dim + np.log(kappa) - (math.log(n) + c) * kappa


def bl_continuity_sum(n: int, c: float) -> float:
    """B_n(c) = (n/4) sum_{j>=1} d_j lambda_j exp(-(n/4)(ln n + c) lambda_j), summed in log space."""
    _check_bl(n, BL_SUM_CAP)
    return float(np.exp(logsumexp(_bl_log_terms(n, c))))


def bl_dominating_bound(n: int, big_a: float) -> float:
    """sum_{j=1}^{n/2} j e^{A j} n^{j(j-1)/n} / j!; dominates B_n(c) whenever A >= |c|."""
    _check_bl(n, BL_SUM_CAP)
    from scipy.special import gammaln

    j = np.arange(1, n // 2 + 1, dtype=float)
    log_terms = np.log(j) + big_a * j + j * (j - 1) / n * math.log(n) - gammaln(j + 1)
    return float(np.exp(logsumexp(log_terms)))


def bl_kernel(n: int, mode: str = "float") -> ChainKernel:
    """Urn chain on x = red balls in the left urn (0..n/2) with hypergeometric stationary law."""
    _check_bl(n, BL_KERNEL_CAP)
    if mode == "exact" and n > BL_EXACT_CAP:
        raise SizeError(f"exact Bernoulli-Laplace kernels capped at n={BL_EXACT_CAP}")
    half = n // 2
    conv = Fraction if mode == "exact" else float
    total = math.comb(n, half)
    rows = []
    for x in range(half + 1):
        down = conv(Fraction(2 * x, n) ** 2)
        up = conv(Fraction(n - 2 * x, n) ** 2)
        row = {x: 1 - down - up}
        if x > 0:
            row[x - 1] = down
        if x < half:
            row[x + 1] = up
        rows.append(row)
    pi = [conv(Fraction(math.comb(half, x) ** 2, total)) for x in range(half + 1)]
    return ChainKernel(range(half + 1), rows, mode=mode, stationary=pi)
