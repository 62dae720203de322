"""Closed-form separation limit profiles and the Gaussian-window constants."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Sequence

import numpy as np
from scipy import integrate, special

from .errors import NumericError, ValidationError


def _apply(fn: Callable[[np.ndarray], np.ndarray], c: Any) -> Any:
    arr = np.asarray(c, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        out = fn(arr)
    return float(out) if arr.ndim == 0 else out


def gumbel(c: Any) -> Any:
    """1 - exp(-e^{-c})."""
    return _apply(lambda x: -np.expm1(-np.exp(-x)), c)


def half_poisson(c: Any) -> Any:
    """1 - exp(-e^{-c} / 2), the chance a Poisson(e^{-c}/2) count is nonzero."""
    return _apply(lambda x: -np.expm1(-0.5 * np.exp(-x)), c)


def sparse_ktop(c: Any) -> Any:
    """1 - e^{-x}(1 + x) with x = e^{-c}, i.e. P[Poisson(x) >= 2]."""
    return _apply(lambda x: special.gammainc(2.0, np.exp(-x)), c)


def gaussian_profile(c: Any) -> Any:
    """Standard normal upper tail 1 - Phi(c), via erfc."""
    return _apply(lambda x: 0.5 * special.erfc(x / math.sqrt(2.0)), c)


PROFILES: dict[str, Callable[[Any], Any]] = {
    "gumbel": gumbel,
    "half_poisson": half_poisson,
    "sparse_ktop": sparse_ktop,
    "gaussian": gaussian_profile,
}


def profile(name: str) -> Callable[[Any], Any]:
    try:
        return PROFILES[name]
    except KeyError:
        raise ValidationError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}") from None


# --------------------------------------------------------------------------- constants


def catalan_series(terms: int = 2000, rounds: int = 40) -> float:
    """Catalan's constant from sum (-1)^l / (2l+1)^2, with repeated averaging of
    consecutive partial sums to accelerate the alternating tail."""
    ell = np.arange(terms, dtype=float)
    partial = np.cumsum((-1.0) ** ell / (2 * ell + 1) ** 2)
    for _ in range(rounds):
        partial = 0.5 * (partial[1:] + partial[:-1])
    return float(partial[-1])


def _log_h(u: float) -> float:
    return math.log(u * u + (1 - u) * (1 - u))


@dataclass(frozen=True)
class GaussianConstants:
    """Constants of the uniformly driven shuffle's Gaussian window t = a ln n + b c sqrt(ln n)."""

    a: float
    b: float
    mu: float
    v: float
    catalan: float
    checks: dict[str, float] = field(compare=False, default_factory=dict)


CHECK_TOL = 1e-8


@lru_cache(maxsize=1)
def gaussian_constants() -> GaussianConstants:
    """Closed forms for a, b, mu, v, verified against quadrature.

    mu and v are the mean and variance of log(u^2 + (1-u)^2) for u uniform on
    [0, 1]; the Catalan series is checked against the integral of arctan(x)/x.
    Any disagreement above 1e-8 raises NumericError.
    """
    catalan = catalan_series()
    mu = math.pi / 2 - 2
    v = 4 + math.pi * math.log(2) - 4 * catalan - math.pi**2 / 4
    a = 4 / (4 - math.pi)
    b = 4 * math.sqrt(v) / (4 - math.pi) ** 1.5

    opts = dict(epsabs=1e-13, epsrel=1e-13, limit=200)
    mu_q, mu_err = integrate.quad(_log_h, 0, 1, **opts)
    v_q, v_err = integrate.quad(lambda u: (_log_h(u) - mu_q) ** 2, 0, 1, **opts)
    cat_q, cat_err = integrate.quad(lambda x: math.atan(x) / x if x else 1.0, 0, 1, **opts)
    if max(mu_err, v_err, cat_err) > 1e-9:
        raise NumericError("quadrature did not converge to 1e-9")

    checks = {
        "mu_quadrature_diff": abs(mu - mu_q),
        "v_quadrature_diff": abs(v - v_q),
        "catalan_integral_diff": abs(catalan - cat_q),
        "b_identity_diff": abs(b * b * (4 - math.pi) ** 3 - 16 * v),
    }
    bad = {k: d for k, d in checks.items() if d > CHECK_TOL}
    if bad:
        raise NumericError(f"constant verification failed: {bad}")
    return GaussianConstants(a, b, mu, v, catalan, checks)


# --------------------------------------------------------------------------- curves


@dataclass
class ProfileCurve:
    """Points (c, value, stderr) for one chain family at a fixed parametrization."""

    family: str
    c: np.ndarray
    values: np.ndarray
    stderrs: np.ndarray | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.c = np.asarray(self.c, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.c.shape != self.values.shape or self.c.size == 0:
            raise ValidationError("grid and values must be nonempty and the same length")
        if np.any((self.values < 0) | (self.values > 1)):
            raise ValidationError("profile values must lie in [0, 1]")
        if self.stderrs is not None:
            self.stderrs = np.asarray(self.stderrs, dtype=float)
            if self.stderrs.shape != self.values.shape:
                raise ValidationError("stderrs must match values")

    @classmethod
    def closed_form(cls, name: str, grid: Sequence[float], **metadata: Any) -> "ProfileCurve":
        return cls(name, np.asarray(grid, dtype=float), profile(name)(np.asarray(grid, dtype=float)), None, metadata)

    def sup_gap(self, other: "ProfileCurve") -> float:
        if not np.array_equal(self.c, other.c):
            raise ValidationError("curves are on different grids")
        return float(np.max(np.abs(self.values - other.values)))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["family", "c", "value", "stderr"])
            for i, (c, v) in enumerate(zip(self.c, self.values)):
                se = "" if self.stderrs is None else f"{self.stderrs[i]:.12g}"
                writer.writerow([self.family, f"{c:.12g}", f"{v:.12g}", se])
