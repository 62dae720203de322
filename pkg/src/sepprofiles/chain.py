"""Finite Markov kernels, brute-force separation, and spectral comparison bounds.

Exact-mode kernels hold :class:`fractions.Fraction` entries and propagate the
start distribution with integer arithmetic over a common denominator, so
separation values are exact rationals. Float-mode kernels use numpy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Any, Callable, Hashable, Literal, Mapping, NamedTuple, Sequence

import numpy as np
from scipy import stats

from .errors import NumericError, SizeError, ValidationError

Mode = Literal["exact", "float"]

FLOAT_TOL = 1e-12
POISSON_TAIL = 1e-14
SHUFFLE_CAP = 6


class Separation(NamedTuple):
    value: Any
    argmax: int


def _check_mode(mode: str) -> None:
    if mode not in ("exact", "float"):
        raise ValidationError(f"mode must be 'exact' or 'float', got {mode!r}")


def _exact(value: Any) -> Fraction:
    if isinstance(value, float):
        raise ValidationError("float entry in an exact-mode kernel")
    return Fraction(value)


class ChainKernel:
    """Row-stochastic kernel on an explicit finite state space.

    ``rows[i]`` maps column index to transition probability. The arithmetic
    mode is an explicit argument and is never inferred from the entries.
    """

    def __init__(
        self,
        states: Sequence[Hashable],
        rows: Sequence[Mapping[int, Any]],
        *,
        mode: Mode,
        stationary: Sequence[Any] | None = None,
    ) -> None:
        _check_mode(mode)
        self.mode = mode
        self.states = tuple(states)
        size = len(self.states)
        if len(rows) != size:
            raise ValidationError(f"{len(rows)} rows for {size} states")
        self.index = {s: i for i, s in enumerate(self.states)}
        if len(self.index) != size:
            raise ValidationError("duplicate states")

        self._dense: np.ndarray | None = None
        self._int_form: tuple[int, list[list[tuple[int, int]]]] | None = None
        conv = _exact if mode == "exact" else float
        self.rows: list[dict[int, Any]] = []
        for i, row in enumerate(rows):
            clean = {int(j): conv(p) for j, p in row.items() if p != 0}
            if any(j < 0 or j >= size for j in clean):
                raise ValidationError(f"row {i} has an out-of-range column")
            if any(p < 0 for p in clean.values()):
                raise ValidationError(f"row {i} has a negative entry")
            total = sum(clean.values())
            bad = total != 1 if mode == "exact" else abs(total - 1.0) > FLOAT_TOL
            if bad:
                raise ValidationError(f"row {i} sums to {total}, not 1")
            self.rows.append(clean)

        if stationary is None:
            stationary = self._solve_stationary()
        pi = [conv(p) for p in stationary]
        if len(pi) != size or any(p <= 0 for p in pi):
            raise ValidationError("stationary law must be strictly positive on every state")
        self.stationary = tuple(pi) if mode == "exact" else np.asarray(pi, dtype=float)
        self._check_stationary()
        self.reversible = self._detailed_balance()

    @classmethod
    def from_dense(cls, states, matrix, *, mode: Mode, stationary=None) -> "ChainKernel":
        rows = [{j: p for j, p in enumerate(row) if p != 0} for row in matrix]
        return cls(states, rows, mode=mode, stationary=stationary)

    def __len__(self) -> int:
        return len(self.states)

    def __repr__(self) -> str:
        return f"ChainKernel(size={len(self)}, mode={self.mode!r}, reversible={self.reversible})"

    def resolve(self, x: Hashable) -> int:
        try:
            return self.index[x]
        except KeyError:
            raise ValidationError(f"unknown state {x!r}") from None

    def _solve_stationary(self) -> list:
        size = len(self.states)
        if self.mode == "float":
            a = self.dense().T - np.eye(size)
            a = np.vstack([a, np.ones(size)])
            rhs = np.zeros(size + 1)
            rhs[-1] = 1.0
            return list(np.linalg.lstsq(a, rhs, rcond=None)[0])
        import sympy

        m = sympy.zeros(size, size)
        for i, row in enumerate(self.rows):
            for j, p in row.items():
                m[j, i] += sympy.Rational(p.numerator, p.denominator)
        null = (m - sympy.eye(size)).nullspace()
        if len(null) != 1:
            raise ValidationError("kernel is not irreducible: stationary law is not unique")
        vec = null[0] / sum(null[0])
        return [Fraction(int(sympy.fraction(v)[0]), int(sympy.fraction(v)[1])) for v in vec]

    def _check_stationary(self) -> None:
        pi = self.stationary
        out = [0] * len(self.states) if self.mode == "exact" else np.zeros(len(self.states))
        for i, row in enumerate(self.rows):
            for j, p in row.items():
                out[j] += pi[i] * p
        if self.mode == "exact":
            ok = sum(pi) == 1 and all(o == q for o, q in zip(out, pi))
        else:
            ok = abs(pi.sum() - 1.0) <= FLOAT_TOL and np.max(np.abs(out - pi)) <= FLOAT_TOL
        if not ok:
            raise ValidationError("stationary law does not satisfy pi P = pi")

    def _detailed_balance(self) -> bool:
        pi = self.stationary
        for i, row in enumerate(self.rows):
            for j, p in row.items():
                back = self.rows[j].get(i, 0)
                lhs, rhs = pi[i] * p, pi[j] * back
                if self.mode == "exact":
                    if lhs != rhs:
                        return False
                elif abs(lhs - rhs) > FLOAT_TOL:
                    return False
        return True

    def dense(self) -> np.ndarray:
        """Float matrix view (exact entries are rounded to double)."""
        if self._dense is None:
            size = len(self.states)
            mat = np.zeros((size, size))
            for i, row in enumerate(self.rows):
                for j, p in row.items():
                    mat[i, j] = float(p)
            self._dense = mat
        return self._dense

    def stationary_float(self) -> np.ndarray:
        return np.array([float(p) for p in self.stationary])

    def integer_form(self) -> tuple[int, list[list[tuple[int, int]]]]:
        """Common denominator D and integer rows with P(i, j) = rows[i][j] / D."""
        if self.mode != "exact":
            raise ValidationError("integer form exists only for exact kernels")
        if self._int_form is None:
            denom = 1
            for row in self.rows:
                for p in row.values():
                    denom = math.lcm(denom, p.denominator)
            int_rows = [
                sorted((j, int(p * denom)) for j, p in row.items()) for row in self.rows
            ]
            self._int_form = (denom, int_rows)
        return self._int_form

    def distribution(self, t: int, x: Hashable) -> list:
        """Row x of P^t (exact Fractions or floats)."""
        if t < 0:
            raise ValidationError("t must be nonnegative")
        start = self.resolve(x)
        size = len(self.states)
        if self.mode == "exact":
            denom, int_rows = self.integer_form()
            vec = [0] * size
            vec[start] = 1
            for _ in range(t):
                nxt = [0] * size
                for i, vi in enumerate(vec):
                    if vi:
                        for j, w in int_rows[i]:
                            nxt[j] += vi * w
                vec = nxt
            scale = denom**t
            return [Fraction(v, scale) for v in vec]
        mat = self.dense()
        if size <= 256 and t > 2 * size:
            return list(np.linalg.matrix_power(mat, t)[start])
        vec = np.zeros(size)
        vec[start] = 1.0
        for _ in range(t):
            vec = vec @ mat
        return list(vec)


def _separation_from_ratios(ratios: Sequence[Any]) -> Separation:
    best = min(range(len(ratios)), key=lambda j: (ratios[j], j))
    value = 1 - ratios[best]
    return Separation(value if isinstance(value, Fraction) else float(value), best)


def separation_discrete(kernel: ChainKernel, t: int, x: Hashable) -> Separation:
    """max_y (1 - P^t(x, y) / pi(y)) together with the maximizing state index."""
    dist = kernel.distribution(t, x)
    pi = kernel.stationary
    return _separation_from_ratios([d / p for d, p in zip(dist, pi)])


def poisson_weights(t: float, max_terms: int | None = None) -> np.ndarray:
    """Poisson(t) masses 0..K with the tail beyond K below POISSON_TAIL."""
    if t < 0:
        raise ValidationError("t must be nonnegative")
    cap = max_terms if max_terms is not None else int(10 * (t + 20))
    if t == 0:
        return np.ones(1)
    k = int(stats.poisson.isf(POISSON_TAIL, t)) + 1
    while stats.poisson.sf(k, t) >= POISSON_TAIL:
        k += 1
    if k + 1 > cap:
        raise NumericError(f"uniformization needs {k + 1} terms at t={t}, cap is {cap}")
    ks = np.arange(k + 1)
    return np.exp(-t + ks * math.log(t) - np.array([math.lgamma(j + 1) for j in ks]))


def continuous_distribution(kernel: ChainKernel, t: float, x: Hashable) -> np.ndarray:
    """Row x of exp(-t (I - P)) by uniformization."""
    weights = poisson_weights(t)
    mat = kernel.dense()
    vec = np.zeros(len(kernel))
    vec[kernel.resolve(x)] = 1.0
    acc = np.zeros_like(vec)
    for w in weights:
        acc += w * vec
        vec = vec @ mat
    return acc


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues with multiplicities, optionally with an l2(pi)-orthonormal table.

    ``table[:, j]`` is the eigenfunction for ``eigenvalues[j]`` evaluated on the
    states; when a table is present every multiplicity is 1.
    """

    eigenvalues: np.ndarray
    multiplicities: np.ndarray
    table: np.ndarray | None = None
    stationary: np.ndarray | None = None

    def __post_init__(self) -> None:
        eig = np.asarray(self.eigenvalues, dtype=float)
        mult = np.asarray(self.multiplicities, dtype=np.int64)
        object.__setattr__(self, "eigenvalues", eig)
        object.__setattr__(self, "multiplicities", mult)
        if eig.shape != mult.shape or eig.ndim != 1:
            raise ValidationError("eigenvalues and multiplicities must be matching 1-d arrays")
        if np.any(mult <= 0):
            raise ValidationError("multiplicities must be positive")
        if np.any(np.abs(eig) > 1 + FLOAT_TOL):
            raise ValidationError("eigenvalue of modulus > 1 for a stochastic kernel")
        if self.table is not None:
            tab = np.asarray(self.table, dtype=float)
            object.__setattr__(self, "table", tab)
            if self.stationary is None:
                raise ValidationError("an eigenfunction table needs the stationary law")
            pi = np.asarray(self.stationary, dtype=float)
            object.__setattr__(self, "stationary", pi)
            if tab.shape != (pi.size, eig.size) or np.any(mult != 1):
                raise ValidationError("table must be |states| x |eigenvalues| with unit multiplicities")
            gram = tab.T @ (pi[:, None] * tab)
            if np.max(np.abs(gram - np.eye(eig.size))) > 1e-10:
                raise ValidationError("eigenfunctions are not orthonormal in l2(pi)")

    @property
    def gaps(self) -> np.ndarray:
        return 1.0 - self.eigenvalues

    @property
    def size(self) -> int:
        return int(self.multiplicities.sum())

    @classmethod
    def from_reversible_kernel(cls, kernel: ChainKernel) -> "SpectralDecomposition":
        """Numerical decomposition through the symmetrized matrix D^1/2 P D^-1/2."""
        if not kernel.reversible:
            raise ValidationError("kernel is not reversible")
        pi = kernel.stationary_float()
        root = np.sqrt(pi)
        sym = root[:, None] * kernel.dense() / root[None, :]
        vals, vecs = np.linalg.eigh((sym + sym.T) / 2)
        order = np.argsort(-vals, kind="stable")
        vals, vecs = vals[order], vecs[:, order]
        table = vecs / root[:, None]
        return cls(np.clip(vals, -1.0, 1.0), np.ones(vals.size, dtype=np.int64), table, pi)


def separation_continuous(
    kernel: ChainKernel,
    t: float,
    x: Hashable,
    spectral: SpectralDecomposition | None = None,
) -> Separation:
    """Separation of exp(-t(I - P)) from x, by uniformization or a spectral sum."""
    if t < 0:
        raise ValidationError("t must be nonnegative")
    if spectral is not None and spectral.table is not None:
        tab = spectral.table
        weights = np.exp(-t * spectral.gaps)
        ratios = (tab[kernel.resolve(x)] * weights) @ tab.T
        return _separation_from_ratios(list(ratios))
    dist = continuous_distribution(kernel, t, x)
    return _separation_from_ratios(list(dist / kernel.stationary_float()))


def _paired(spec_p: SpectralDecomposition, spec_q: SpectralDecomposition) -> None:
    if spec_p.eigenvalues.shape != spec_q.eigenvalues.shape:
        raise ValidationError("spectral decompositions have different dimensions")
    if not np.array_equal(spec_p.multiplicities, spec_q.multiplicities):
        raise ValidationError("paired eigenvalues must have equal multiplicities")


def _spectral_bound(
    spec_p: SpectralDecomposition,
    spec_q: SpectralDecomposition,
    diffs: np.ndarray,
    x: int | None,
    transitive: bool,
) -> float:
    if transitive:
        return float(np.sum(spec_p.multiplicities * np.abs(diffs)))
    tab = spec_p.table
    if tab is None or x is None:
        raise ValidationError("the max-over-y form needs a shared eigenfunction table and a start index")
    if spec_q.table is not None and not np.allclose(spec_q.table, tab, atol=1e-12):
        raise ValidationError("the two decompositions do not share eigenfunctions")
    row = np.abs(tab[x])
    return float(np.max(np.abs(tab) @ (row * np.abs(diffs))))


def comparison_bound_discrete(
    spec_p: SpectralDecomposition,
    spec_q: SpectralDecomposition,
    t: int,
    x: int | None = None,
    transitive: bool = False,
) -> float:
    """Upper bound on |s_x^P(t) - s_x^Q(t)| for simultaneously diagonalizable kernels.

    With ``transitive=True`` the eigenfunction-free form sum_j m_j |p_j^t - q_j^t|
    is returned; it applies to transitive chains with P perfectly transitive.
    """
    _paired(spec_p, spec_q)
    diffs = spec_p.eigenvalues**t - spec_q.eigenvalues**t
    return _spectral_bound(spec_p, spec_q, diffs, x, transitive)


def comparison_bound_continuous(
    spec_p: SpectralDecomposition,
    spec_q: SpectralDecomposition,
    t: float,
    t_bar: float,
    x: int | None = None,
    transitive: bool = False,
) -> float:
    """Upper bound on |s_x^P(t) - s_x^Q(t_bar)| for the continuous-time chains."""
    _paired(spec_p, spec_q)
    diffs = np.exp(-t * spec_p.gaps) - np.exp(-t_bar * spec_q.gaps)
    return _spectral_bound(spec_p, spec_q, diffs, x, transitive)


def continuity_sum_general(
    spec: SpectralDecomposition,
    t: float,
    w: float,
    c: float,
    x: int | None = None,
    transitive: bool = False,
) -> float:
    """w * max_y sum_j |f_j(x) f_j(y)| gap_j exp(-(t + c w) gap_j).

    Zero-gap eigenfunctions contribute nothing, so the constant one drops out.
    ``transitive=True`` gives w * sum_j m_j gap_j exp(-(t + c w) gap_j).
    """
    gaps = np.clip(spec.gaps, 0.0, None)
    weights = gaps * np.exp(-(t + c * w) * gaps)
    if transitive:
        return float(w * np.sum(spec.multiplicities * weights))
    if spec.table is None or x is None:
        raise ValidationError("the max-over-y form needs an eigenfunction table and a start index")
    row = np.abs(spec.table[x])
    return float(w * np.max(np.abs(spec.table) @ (row * weights)))


def _apply_top(deck: tuple[int, ...], mask: int) -> tuple[int, ...]:
    top = tuple(c for i, c in enumerate(deck) if mask >> i & 1)
    rest = tuple(c for i, c in enumerate(deck) if not mask >> i & 1)
    return top + rest


def _label_law(n: int, a: Any, b: Any) -> list[Fraction]:
    a, b = Fraction(a), Fraction(b)
    if a * (n - 1) + b != n:
        raise ValidationError("biased transpositions need a(n-1) + b = n")
    return [a / n] * (n - 1) + [b / n]


def build_shuffle_kernel(
    family: str,
    n: int,
    *,
    law: Callable[[int], Any] | None = None,
    k: int | None = None,
    a: Any = None,
    b: Any = None,
    cap: int = SHUFFLE_CAP,
) -> ChainKernel:
    """Exact kernel on S_n (decks as tuples, identity first) for a shuffle family.

    Families: ``riffle`` (needs ``law``, a callable k -> f(k)), ``k_to_top``
    (needs ``k``), ``random_transpositions``, and ``biased_transpositions``
    (needs ``a``, ``b`` with |A| = n - 1, |B| = 1; label n - 1 is the B label).
    """
    if n < 1:
        raise ValidationError("n must be positive")
    if n > cap:
        raise SizeError(f"brute-force shuffle kernels capped at n={cap}, got {n}")
    states = list(permutations(range(n)))
    index = {s: i for i, s in enumerate(states)}
    rows: list[dict[int, Fraction]] = [dict() for _ in states]

    if family in ("riffle", "k_to_top"):
        if family == "k_to_top":
            if k is None or not 1 <= k <= n:
                raise ValidationError("k_to_top needs 1 <= k <= n")
            masses = {k: Fraction(1)}
        else:
            if law is None:
                raise ValidationError("riffle needs a pile-size law")
            masses = {size: _exact(law(size)) for size in range(1, n + 1)}
        moves = [
            (mask, masses[bin(mask).count("1")] / math.comb(n, bin(mask).count("1")))
            for mask in range(1, 1 << n)
            if masses.get(bin(mask).count("1"), 0) != 0
        ]
        for i, deck in enumerate(states):
            row = rows[i]
            for mask, p in moves:
                j = index[_apply_top(deck, mask)]
                row[j] = row.get(j, 0) + p
    elif family in ("random_transpositions", "biased_transpositions"):
        if family == "random_transpositions":
            mu = [Fraction(1, n)] * n
        else:
            mu = _label_law(n, a, b)
        for i, deck in enumerate(states):
            row = rows[i]
            for p in range(n):
                for q in range(n):
                    nxt = list(deck)
                    nxt[p], nxt[q] = nxt[q], nxt[p]
                    j = index[tuple(nxt)]
                    row[j] = row.get(j, 0) + mu[p] * mu[q]
    else:
        raise ValidationError(f"unknown shuffle family {family!r}")

    uniform = [Fraction(1, len(states))] * len(states)
    return ChainKernel(states, rows, mode="exact", stationary=uniform)


def random_reversible_kernel(size: int, rng: np.random.Generator) -> ChainKernel:
    """Float kernel from a random symmetric weight matrix (reversible by construction)."""
    weights = rng.random((size, size)) + 0.05
    weights = weights + weights.T
    totals = weights.sum(axis=1)
    return ChainKernel.from_dense(
        range(size), weights / totals[:, None], mode="float", stationary=totals / totals.sum()
    )
