"""Integer partitions and the symmetric-group quantities built on them.

Partitions are immutable and hashable, so they double as memo keys. The
character table is computed with the Murnaghan-Nakayama rule on beta-sets
(an abacus encoding in which removing a border strip of length r is moving
one bead r places down).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Mapping, Sequence

from .errors import SizeError, ValidationError

PARTITION_CAP = 60
CHARACTER_CAP = 12


@dataclass(frozen=True, order=True)
class Partition:
    """A weakly decreasing tuple of positive integers."""

    parts: tuple[int, ...]

    def __post_init__(self) -> None:
        parts = tuple(int(p) for p in self.parts)
        if any(p <= 0 for p in parts):
            raise ValidationError(f"parts must be positive: {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ValidationError(f"parts must be weakly decreasing: {parts}")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def of(cls, *parts: int) -> "Partition":
        return cls(tuple(parts))

    @classmethod
    def from_multiplicities(cls, mult: Mapping[int, int]) -> "Partition":
        parts: list[int] = []
        for j in sorted(mult, reverse=True):
            if j <= 0 or mult[j] < 0:
                raise ValidationError(f"bad multiplicity entry {j}: {mult[j]}")
            parts.extend([j] * mult[j])
        return cls(tuple(parts))

    @classmethod
    def hook(cls, n: int, j: int) -> "Partition":
        """The hook shape (n - j, 1^j)."""
        if not 0 <= j < n:
            raise ValidationError(f"hook leg {j} out of range for n={n}")
        return cls((n - j,) + (1,) * j)

    @property
    def n(self) -> int:
        return sum(self.parts)

    @property
    def multiplicities(self) -> dict[int, int]:
        mult: dict[int, int] = {}
        for p in self.parts:
            mult[p] = mult.get(p, 0) + 1
        return mult

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def __getitem__(self, i: int) -> int:
        return self.parts[i]

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.parts)) + ")"

    def conjugate(self) -> "Partition":
        if not self.parts:
            return self
        return Partition(
            tuple(sum(1 for p in self.parts if p > j) for j in range(self.parts[0]))
        )

    def is_hook(self) -> bool:
        return len(self.parts) <= 1 or self.parts[1] == 1

    def hook_lengths(self) -> list[int]:
        conj = self.conjugate().parts
        return [
            (row - j) + (conj[j] - i) - 1
            for i, row in enumerate(self.parts)
            for j in range(row)
        ]

    def remove_corners(self) -> list["Partition"]:
        """All partitions obtained by deleting one corner box, top row first."""
        out = []
        parts = self.parts
        for i, p in enumerate(parts):
            if i + 1 == len(parts) or parts[i + 1] < p:
                new = list(parts)
                new[i] -= 1
                out.append(Partition(tuple(q for q in new if q > 0)))
        return out


ConjugacyClass = Partition
"""Conjugacy classes of S_n are labelled by their cycle type."""


def as_partition(value: Partition | Sequence[int]) -> Partition:
    return value if isinstance(value, Partition) else Partition(tuple(value))


@lru_cache(maxsize=64)
def _partition_tuples(n: int) -> tuple[tuple[int, ...], ...]:
    out: list[tuple[int, ...]] = []

    def rec(remaining: int, largest: int, prefix: tuple[int, ...]) -> None:
        if remaining == 0:
            out.append(prefix)
            return
        for first in range(min(remaining, largest), 0, -1):
            rec(remaining - first, first, prefix + (first,))

    rec(n, n, ())
    return tuple(out)


def enumerate_partitions(n: int, cap: int = PARTITION_CAP) -> list[Partition]:
    """Partitions of n in reverse-lexicographic order, (n) first and 1^n last."""
    if n < 1:
        raise ValidationError(f"n must be positive, got {n}")
    if n > cap:
        raise SizeError(f"partition enumeration capped at n={cap}, got {n}")
    return [Partition(p) for p in _partition_tuples(n)]


def partition_count(n: int) -> int:
    """p(n) by Euler's pentagonal-number recurrence."""
    p = [1] + [0] * n
    for m in range(1, n + 1):
        total, k = 0, 1
        while True:
            g1 = k * (3 * k - 1) // 2
            if g1 > m:
                break
            sign = 1 if k % 2 else -1
            total += sign * p[m - g1]
            g2 = k * (3 * k + 1) // 2
            if g2 <= m:
                total += sign * p[m - g2]
            k += 1
        p[m] = total
    return p[n]


def dimension(lam: Partition | Sequence[int]) -> int:
    """Number of standard Young tableaux of shape lam (hook-length formula)."""
    lam = as_partition(lam)
    return math.factorial(lam.n) // math.prod(lam.hook_lengths())


def log_dimension(lam: Partition | Sequence[int]) -> float:
    """Natural log of dimension(lam), from summed log hook lengths."""
    lam = as_partition(lam)
    return math.lgamma(lam.n + 1) - math.fsum(math.log(h) for h in lam.hook_lengths())


def diag_content(lam: Partition | Sequence[int]) -> int:
    """Sum over cells (r, s) of s - r, with 1-indexed rows and columns."""
    lam = as_partition(lam)
    return sum(p * (p - 1) // 2 - i * p for i, p in enumerate(lam.parts))


def class_size(rho: Partition | Sequence[int]) -> int:
    """Number of permutations of cycle type rho."""
    rho = as_partition(rho)
    denom = math.prod(j**m * math.factorial(m) for j, m in rho.multiplicities.items())
    return math.factorial(rho.n) // denom


def mobius_type_weight(lam: Partition | Sequence[int]) -> int:
    """(number of set partitions of type lam) * mu(0, pi) for any one of them.

    Equals n! * prod_j (-1)^((j-1) m_j) / (j^m_j m_j!); the sign is (-1)^(n - len).
    """
    lam = as_partition(lam)
    sign = -1 if (lam.n - len(lam)) % 2 else 1
    return sign * class_size(lam)


def _beta_to_parts(beta: Sequence[int]) -> tuple[int, ...]:
    ordered = sorted(beta, reverse=True)
    length = len(ordered)
    return tuple(p for p in (b - (length - 1 - i) for i, b in enumerate(ordered)) if p > 0)


@lru_cache(maxsize=None)
def _mn(parts: tuple[int, ...], rho: tuple[int, ...]) -> int:
    if not rho:
        return 1 if not parts else 0
    r, rest = rho[0], rho[1:]
    length = len(parts)
    beta = [p + (length - 1 - i) for i, p in enumerate(parts)]
    occupied = set(beta)
    total = 0
    for b in beta:
        target = b - r
        if target < 0 or target in occupied:
            continue
        height = sum(1 for x in beta if target < x < b)
        moved = [target if x == b else x for x in beta]
        value = _mn(_beta_to_parts(moved), rest)
        total += -value if height % 2 else value
    return total


def character(
    lam: Partition | Sequence[int],
    rho: Partition | Sequence[int],
    cap: int = CHARACTER_CAP,
) -> int:
    """chi_lam evaluated on the conjugacy class of cycle type rho."""
    lam, rho = as_partition(lam), as_partition(rho)
    if lam.n != rho.n:
        raise ValidationError(f"size mismatch: |lam|={lam.n}, |rho|={rho.n}")
    if lam.n > cap:
        raise SizeError(f"full characters capped at n={cap}, got {lam.n}")
    return _mn(lam.parts, rho.parts)
