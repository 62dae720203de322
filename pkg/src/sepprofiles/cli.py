"""Command-line front end: profile tables, oracle cross-checks and bound evaluations.

Every command prints one table (CSV or JSON) to stdout or --output. Exit codes:
0 success, 1 an enabled tolerance check failed, 2 usage or validation error,
3 numeric error (or an unreliable-result warning under --strict).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np

from . import chain, product_walks as pw, profiles, riffle, transpositions as rt
from .errors import NumericError, ParameterError, SizeError, UnreliableResultWarning, ValidationError

log = logging.getLogger("sepprofiles")

EXIT_OK, EXIT_TOLERANCE, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


# --------------------------------------------------------------------------- config


@dataclass
class ExperimentConfig:
    command: str
    n: int | None = None
    k: int | None = None
    m: int | None = None
    b: float | None = None
    b_prime: float | None = None
    eps: str | None = None
    rates: str = "uniform"
    law: str = "uniform"
    regime: str = "sparse"
    family: str | None = None
    c_grid: list[float] = field(default_factory=lambda: [0.0])
    steps: list[int] = field(default_factory=list)
    n_values: list[int] = field(default_factory=list)
    trials: int = 10_000
    seed: int = 0
    workers: int = 1
    mode: str = "exact"
    fmt: str = "csv"
    output: str | None = None
    strict: bool = False
    tol: float | None = None
    touched: bool = False
    times_out: str | None = None

    def validate(self) -> None:
        if not self.c_grid:
            raise ValidationError("the c grid is empty")
        if self.trials < 1:
            raise ValidationError("--trials must be at least 1")
        if self.workers < 1:
            raise ValidationError("--workers must be at least 1")
        if self.seed < 0:
            raise ValidationError("--seed must be nonnegative")
        if self.mode not in ("exact", "float"):
            raise ValidationError("--mode must be exact or float")


def parse_int_range(text: str) -> list[int]:
    """'3', '1..6', '10..30:2' or '1,4,9' to a list of integers."""
    out: list[int] = []
    for piece in text.split(","):
        piece = piece.strip()
        if ".." in piece:
            span, _, step = piece.partition(":")
            lo, hi = (int(x) for x in span.split(".."))
            out.extend(range(lo, hi + 1, int(step) if step else 1))
        elif piece:
            out.append(int(piece))
    if not out:
        raise ValidationError(f"empty range {text!r}")
    return out


def parse_float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def c_grid(values: str | None, lo: float | None, hi: float | None, step: float | None) -> list[float]:
    if values is not None:
        return parse_float_list(values)
    if lo is None and hi is None:
        return [0.0]
    if lo is None or hi is None or step is None or step <= 0:
        raise ValidationError("--c-min, --c-max and a positive --c-step must be given together")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 12) for i in range(count)]


def parse_law(text: str, n: int, mode: str = "exact") -> riffle.PileSizeLaw:
    """'uniform', 'delta:K' or 'weights:w1,...,wn' (weights are normalized)."""
    kind, _, arg = text.partition(":")
    if kind == "uniform":
        return riffle.PileSizeLaw.uniform(n, mode)
    if kind == "delta":
        return riffle.PileSizeLaw.delta(n, int(arg), mode)
    if kind == "weights":
        weights = [Fraction(w) for w in arg.split(",")]
        total = sum(weights)
        if len(weights) != n or total <= 0:
            raise ValidationError(f"need {n} nonnegative weights with positive sum")
        mass = tuple(w / total for w in weights)
        return riffle.PileSizeLaw(n, mass if mode == "exact" else tuple(float(p) for p in mass), mode)
    raise ValidationError(f"unknown law {text!r}; use uniform, delta:K or weights:w1,...")


def parse_rates(text: str, n: int) -> pw.RateVector:
    """'uniform', 'first:B', 'half:B' or an explicit comma list."""
    kind, _, arg = text.partition(":")
    if kind == "uniform":
        return pw.RateVector.uniform(n)
    if kind == "first":
        return pw.RateVector.first_coordinate(n, float(arg))
    if kind == "half":
        return pw.RateVector.half_split(n, float(arg))
    return pw.RateVector(tuple(parse_float_list(text)))


def parse_eps(text: str | None, n: int) -> Fraction | float:
    if text is None or text == "1/n!":
        return Fraction(1, math.factorial(n))
    return Fraction(text) if "/" in text else float(text)


# --------------------------------------------------------------------------- tables


@dataclass
class Table:
    rows: list[dict[str, Any]] = field(default_factory=list)
    tolerance_failures: int = 0

    def add(self, tol: float | None = None, **row: Any) -> None:
        oracle, value = row.get("oracle"), row.get("value")
        if oracle is not None and value is not None and "abs_diff" not in row:
            row["abs_diff"] = abs(value - oracle)
        if tol is not None and row.get("abs_diff") is not None:
            ok = row["abs_diff"] <= tol
            row["check"] = "pass" if ok else "FAIL"
            self.tolerance_failures += not ok
        self.rows.append(row)

    @property
    def columns(self) -> list[str]:
        cols: list[str] = []
        for row in self.rows:
            cols.extend(k for k in row if k not in cols)
        return cols


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, Fraction):
        return f"{float(value):.12g}" if value.denominator != 1 else str(value.numerator)
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def _json_cell(value: Any) -> Any:
    text = format_cell(value)
    if isinstance(value, (bool, str)) or value is None:
        return value
    try:
        num = float(text)
    except ValueError:
        return text
    return int(text) if text.lstrip("-").isdigit() else num


def render(table: Table, fmt: str) -> str:
    cols = table.columns
    if fmt == "json":
        rows = [{c: _json_cell(row.get(c)) for c in cols} for row in table.rows]
        return json.dumps({"columns": cols, "rows": rows}, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(cols)
    for row in table.rows:
        writer.writerow([format_cell(row.get(c)) for c in cols])
    return buf.getvalue()


def _exact_text(value: Any) -> str | None:
    return str(value) if isinstance(value, Fraction) else None


# --------------------------------------------------------------------------- commands


def _require(cfg: ExperimentConfig, *names: str) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(cfg, n) is None]
    if missing:
        raise ValidationError(f"{cfg.command} needs {', '.join(missing)}")


def cmd_riffle_exact(cfg: ExperimentConfig) -> Table:
    _require(cfg, "n")
    law = parse_law(cfg.law, cfg.n, cfg.mode)
    times = cfg.steps or list(range(11))
    values = riffle.exact_separation_curve(law, times)
    oracle: list[Any] = [None] * len(times)
    if cfg.n <= 5 and cfg.mode == "exact":
        kernel = chain.build_shuffle_kernel("riffle", cfg.n, law=law)
        start = tuple(range(cfg.n))
        oracle = [chain.separation_discrete(kernel, t, start).value for t in times]
    table = Table()
    tol = cfg.tol if cfg.tol is not None else (0.0 if cfg.mode == "exact" else 1e-9)
    for t, v, o in zip(times, values, oracle):
        table.add(tol if o is not None else None, quantity="separation", n=cfg.n, law=cfg.law, t=t,
                  value=v, exact=_exact_text(v), oracle=o)
    return table


def _unique_curve(law: riffle.PileSizeLaw, times: list[int], cfg: ExperimentConfig) -> dict[int, riffle.SSTEstimate]:
    distinct = sorted(set(times))
    curve = riffle.simulate_sst_curve(
        law, distinct, cfg.trials, cfg.seed, cfg.workers, return_collision_times=cfg.times_out is not None
    )
    if cfg.times_out is not None:
        riffle.write_collision_times(cfg.times_out, curve.collision_times)
    return {p.t: p for p in curve.points()}


def cmd_riffle_mc(cfg: ExperimentConfig) -> Table:
    _require(cfg, "n")
    law = parse_law(cfg.law, cfg.n, "float")
    if law.is_uniform():
        times = [riffle.uniform_driven_time(cfg.n, c) for c in cfg.c_grid]
        ref, ref_name, eff = profiles.gaussian_profile, "gaussian", [None] * len(times)
    else:
        times = [riffle.dense_time(cfg.n, c, law=law) for c in cfg.c_grid]
        ref, ref_name = profiles.half_poisson, "half_poisson"
        eff = [riffle.effective_dense_c(cfg.n, t, law=law) for t in times]
    est = _unique_curve(law, times, cfg)
    table = Table()
    for c, t, e in zip(cfg.c_grid, times, eff):
        p = est[t]
        table.add(cfg.tol, quantity="separation_mc", n=cfg.n, law=cfg.law, c=c, t=t, effective_c=e,
                  value=p.estimate, stderr=p.stderr, reference=ref_name, oracle=ref(c),
                  concentration=law.concentration_diagnostic())
    return table


def cmd_ktop(cfg: ExperimentConfig) -> Table:
    _require(cfg, "n", "k")
    law = riffle.PileSizeLaw.delta(cfg.n, cfg.k, "float")
    if cfg.regime == "sparse":
        times = [riffle.sparse_time(cfg.n, cfg.k, c) for c in cfg.c_grid]
        ref, ref_name = profiles.sparse_ktop, "sparse_ktop"
    elif cfg.regime == "dense":
        times = [riffle.dense_time(cfg.n, c, k=cfg.k) for c in cfg.c_grid]
        ref, ref_name = profiles.half_poisson, "half_poisson"
    else:
        raise ValidationError("--regime must be sparse or dense")
    est = _unique_curve(law, times, cfg)
    table = Table()
    for c, t in zip(cfg.c_grid, times):
        p = est[t]
        row: dict[str, Any] = dict(quantity="separation_mc", n=cfg.n, k=cfg.k, regime=cfg.regime, c=c, t=t)
        if cfg.regime == "dense":
            row["effective_c"] = riffle.effective_dense_c(cfg.n, t, k=cfg.k)
        else:
            row["untouched_mean"] = riffle.untouched_factorial_moment(cfg.n, cfg.k, t, 1)
            row["pair_bound"] = riffle.repeated_nonzero_rows_bound(cfg.n, cfg.k, t)
        table.add(cfg.tol, **row, value=p.estimate, stderr=p.stderr, reference=ref_name, oracle=ref(c))
    return table


def cmd_rt_profile(cfg: ExperimentConfig) -> Table:
    _require(cfg, "n")
    table = Table()
    steps = [rt.mixing_steps(cfg.n, c) for c in cfg.c_grid]
    for c, m in zip(cfg.c_grid, steps):
        res = rt.ncycle_ratio_detail(cfg.n, m)
        if not isinstance(res.value, Fraction) and res.condition > rt.CONDITION_LIMIT:
            warnings.warn(f"n-cycle sum at n={cfg.n}, m={m} is badly conditioned", UnreliableResultWarning)
        table.add(cfg.tol, quantity="lower_bound", n=cfg.n, c=c, m=m, value=float(1 - res.value),
                  condition=res.condition, reference="gumbel", oracle=profiles.gumbel(c))
    if cfg.touched:
        sim = rt.simulate_touched_labels(cfg.n, sorted(set(steps)), cfg.trials, cfg.seed, cfg.workers)
        for c, m in zip(cfg.c_grid, steps):
            table.add(cfg.tol, quantity="untouched_at_least_2", n=cfg.n, c=c, m=m, value=sim.prob_at_least(m, 2),
                      stderr=sim.prob_stderr(m, 2), reference="sparse_ktop", oracle=profiles.sparse_ktop(c))
    return table


def cmd_rt_exact(cfg: ExperimentConfig) -> Table:
    _require(cfg, "n")
    steps = cfg.steps or list(range(1, 7))
    kernel = chain.build_shuffle_kernel("random_transpositions", cfg.n)
    start = tuple(range(cfg.n))
    table = Table()
    tol = cfg.tol if cfg.tol is not None else 0.0
    for m in steps:
        res = rt.exact_separation_small(cfg.n, m)
        brute = chain.separation_discrete(kernel, m, start).value
        table.add(tol, quantity="separation", n=cfg.n, m=m, value=res.value, exact=str(res.value),
                  argmin_class=str(res.argmin), ncycle_ratio=rt.ncycle_ratio(cfg.n, m), oracle=brute)
    return table


def cmd_hypercube(cfg: ExperimentConfig) -> Table:
    _require(cfg, "n")
    rates = parse_rates(cfg.rates, cfg.n)
    table = Table()
    for c in cfg.c_grid:
        chk = pw.gumbel_profile_check(rates, c)
        table.add(cfg.tol, quantity="separation", n=cfg.n, rates=cfg.rates, c=c, t=chk.time, value=chk.value,
                  reference="gumbel", oracle=profiles.gumbel(c), diagnostic=chk.diagnostic)
    kind, _, arg = cfg.rates.partition(":")
    if kind == "first":
        b = float(arg)
        for c in cfg.c_grid:
            sums = pw.perturbed_comparison_sums(2, cfg.n, b, c)
            parts = pw.hypercube_continuity_sums("first_coordinate", cfg.n, c, b)
            table.add(None, quantity="comparison_bound", n=cfg.n, rates=cfg.rates, c=c, value=sums.total,
                      s0=sums.s0, s1=sums.s1)
            table.add(None, quantity="continuity_sum", n=cfg.n, rates=cfg.rates, c=c, value=parts.total,
                      slow_part=parts.slow_part, fast_part=parts.fast_part)
    elif kind == "half":
        b = float(arg)
        for c in cfg.c_grid:
            parts = pw.hypercube_continuity_sums("half_split", cfg.n, c, b)
            table.add(None, quantity="continuity_sum", n=cfg.n, rates=cfg.rates, c=c, value=parts.total,
                      slow_part=parts.slow_part, fast_part=parts.fast_part)
            if cfg.b_prime is not None:
                table.add(None, quantity="halfsplit_bound", n=cfg.n, rates=cfg.rates, c=c,
                          value=pw.halfsplit_comparison_bound(cfg.n, b, cfg.b_prime, c))
    return table


def cmd_zmn(cfg: ExperimentConfig) -> Table:
    _require(cfg, "n", "m")
    table = Table()
    n, m = cfg.n, cfg.m
    for c in cfg.c_grid:
        t = n * (math.log(n) + c)
        uniform = pw.zmn_separation_uniform(m, n, max(t, 0.0))
        table.add(cfg.tol, quantity="separation_uniform", m=m, n=n, c=c, t=t, value=uniform,
                  reference="gumbel", oracle=profiles.gumbel(c))
        if cfg.b is not None:
            rates = pw.RateVector.first_coordinate(n, cfg.b)
            t_bar = (math.log(n - 1) + c) / float(rates.min_rate)
            perturbed = pw.refresh_separation(rates, max(t_bar, 0.0))
            sums = pw.perturbed_comparison_sums(m, n, cfg.b, c)
            table.add(None, quantity="separation_perturbed", m=m, n=n, c=c, t=t_bar, value=perturbed,
                      paired_gap=abs(perturbed - uniform), s0=sums.s0, s1=sums.s1, bound=sums.total)
    return table


def cmd_bl(cfg: ExperimentConfig) -> Table:
    _require(cfg, "n")
    table = Table()
    for c in cfg.c_grid:
        value = pw.bl_continuity_sum(cfg.n, c)
        dom = pw.bl_dominating_bound(cfg.n, abs(c))
        table.add(None, quantity="continuity_sum", n=cfg.n, c=c, value=value, dominating_bound=dom,
                  dominated=value <= dom)
    return table


def cmd_bounds(cfg: ExperimentConfig) -> Table:
    family = cfg.family or "biased"
    ns = cfg.n_values or ([cfg.n] if cfg.n else list(range(10, 31)))
    table = Table()
    for c in cfg.c_grid:
        for n in ns:
            if family == "biased":
                res = rt.biased_comparison_bound(n, c, parse_eps(cfg.eps, n))
                table.add(None, quantity="biased_bound", n=n, c=c, value=res.value, delta=res.delta,
                          constant=res.constant)
            elif family == "central":
                table.add(None, quantity="central_bound", n=n, c=c,
                          value=rt.central_perturbation_bound(n, c, parse_eps(cfg.eps, n)))
            elif family == "spectral":
                table.add(None, quantity="spectral_weight_sum", n=n, c=c, value=rt.spectral_weight_sum(n, c))
            elif family == "zmn":
                sums = pw.perturbed_comparison_sums(cfg.m or 3, n, cfg.b if cfg.b is not None else 0.5, c)
                table.add(None, quantity="zmn_comparison", n=n, c=c, value=sums.total, s0=sums.s0, s1=sums.s1)
            elif family == "halfsplit":
                b = cfg.b if cfg.b is not None else 0.1
                bp = cfg.b_prime if cfg.b_prime is not None else 0.2
                table.add(None, quantity="halfsplit_bound", n=n, c=c, value=pw.halfsplit_comparison_bound(n, b, bp, c))
            else:
                raise ValidationError("--family must be biased, central, spectral, zmn or halfsplit")
    return table


def cmd_constants(cfg: ExperimentConfig) -> Table:
    consts = profiles.gaussian_constants()
    table = Table()
    tol = cfg.tol if cfg.tol is not None else 1e-4
    table.add(tol, quantity="a", value=consts.a, oracle=4.65979)
    table.add(tol, quantity="b", value=consts.b, oracle=1.08247)
    table.add(None, quantity="mu", value=consts.mu)
    table.add(None, quantity="v", value=consts.v)
    table.add(None, quantity="catalan", value=consts.catalan)
    for name, diff in consts.checks.items():
        table.add(profiles.CHECK_TOL, quantity=name, value=diff, oracle=0.0)
    return table


def cmd_selftest(cfg: ExperimentConfig) -> Table:
    table = Table()
    for n in (2, 3, 4):
        for spec in ("uniform", "delta:1", f"delta:{max(1, n - 1)}"):
            law = parse_law(spec, n)
            kernel = chain.build_shuffle_kernel("riffle", n, law=law)
            start = tuple(range(n))
            worst = max(
                abs(riffle.exact_separation(law, t) - chain.separation_discrete(kernel, t, start).value)
                for t in range(8)
            )
            table.add(0.0, quantity="riffle_exact_vs_kernel", n=n, law=spec, value=worst, oracle=0)
    for n in (3, 4, 5):
        kernel = chain.build_shuffle_kernel("random_transpositions", n)
        start = tuple(range(n))
        worst = max(
            abs(rt.exact_separation_small(n, m).value - chain.separation_discrete(kernel, m, start).value)
            for m in range(9)
        )
        table.add(0.0, quantity="rt_characters_vs_kernel", n=n, value=worst, oracle=0)
    for n in (2, 3, 4):
        rates = pw.RateVector.uniform(n)
        kernel = pw.coordinate_refresh_kernel(2, rates)
        worst = max(
            abs(chain.separation_continuous(kernel, t, (0,) * n).value - pw.hypercube_separation(rates, t))
            for t in (0.5, 1.0, 2.0, 5.0)
        )
        table.add(1e-9, quantity="hypercube_product_vs_uniformization", n=n, value=worst, oracle=0.0)
    consts = profiles.gaussian_constants()
    table.add(1e-4, quantity="constant_a", value=consts.a, oracle=4.65979)
    table.add(1e-4, quantity="constant_b", value=consts.b, oracle=1.08247)
    for n in (4, 6, 8):
        for c in (-1.0, 0.0, 1.0):
            rates = pw.RateVector.first_coordinate(n, 0.5)
            gap = abs(
                pw.hypercube_separation(rates, (math.log(n - 1) + c) / float(rates.min_rate))
                - pw.zmn_separation_uniform(2, n, n * (math.log(n) + c))
            )
            bound = pw.perturbed_comparison_sums(2, n, 0.5, c).total
            table.add(None, quantity="comparison_bound_dominates", n=n, c=c, value=gap, bound=bound,
                      check="pass" if gap <= bound + 1e-10 else "FAIL")
            table.tolerance_failures += gap > bound + 1e-10
    return table


COMMANDS: dict[str, tuple[Callable[[ExperimentConfig], Table], str]] = {
    "riffle-exact": (cmd_riffle_exact, "exact separation of a driven inverse riffle shuffle"),
    "riffle-mc": (cmd_riffle_mc, "Monte Carlo profile of a driven inverse riffle shuffle"),
    "ktop": (cmd_ktop, "Monte Carlo profile of k-random-to-top"),
    "rt-profile": (cmd_rt_profile, "random transpositions lower-bound curve"),
    "rt-exact": (cmd_rt_exact, "random transpositions exact separation for n <= 6"),
    "hypercube": (cmd_hypercube, "coordinate-refresh walk on the hypercube"),
    "zmn": (cmd_zmn, "coordinate-refresh walk on (Z/mZ)^n"),
    "bl": (cmd_bl, "Bernoulli-Laplace continuity sums"),
    "bounds": (cmd_bounds, "comparison-bound decay tables"),
    "constants": (cmd_constants, "constants of the Gaussian window"),
    "selftest": (cmd_selftest, "fast oracle cross-check suite"),
}


# --------------------------------------------------------------------------- parsing


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="file of key=value lines; command-line flags win")
    p.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")
    p.add_argument("--output", "-o", help="write the table here instead of stdout")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--mode", choices=["exact", "float"], default="exact")
    p.add_argument("--tol", type=float, help="enable (or override) the tolerance check on oracle diffs")
    p.add_argument("--strict", action="store_true", help="treat unreliable-result warnings as failures")
    p.add_argument("--verbose", "-v", action="store_true")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--m", help="integer, or a range such as 1..6 for rt-exact")
    p.add_argument("--b", type=float)
    p.add_argument("--b-prime", type=float)
    p.add_argument("--eps", help="perturbation size, e.g. 1/n! (default), 1/3628800 or 1e-7")
    p.add_argument("--rates", default="uniform", help="uniform, first:B, half:B, or a comma list")
    p.add_argument("--law", default="uniform", help="uniform, delta:K or weights:w1,...,wn")
    p.add_argument("--regime", choices=["sparse", "dense"], default="sparse")
    p.add_argument("--family", help="bounds family: biased, central, spectral, zmn, halfsplit")
    p.add_argument("--c", help="comma list of c values")
    p.add_argument("--c-min", type=float)
    p.add_argument("--c-max", type=float)
    p.add_argument("--c-step", type=float)
    p.add_argument("--t", help="time range for riffle-exact, e.g. 0..10")
    p.add_argument("--n-range", help="deck sizes for bounds, e.g. 10..30")
    p.add_argument("--touched", action="store_true", help="rt-profile: add the untouched-label simulation")
    p.add_argument("--times-out", help="write per-trial collision times as little-endian uint32")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sepprofiles", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        _common(sub.add_parser(name, help=help_text, description=help_text))
    return parser


def read_config_file(path: str) -> list[str]:
    """Turn key=value lines into flags; '#' starts a comment, bare keys are switches."""
    args: list[str] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip().replace("_", "-")
            if not key:
                raise ValidationError(f"{path}:{lineno}: missing key")
            args.append(f"--{key}")
            if sep and value.strip().lower() not in ("true", ""):
                args.append(value.strip())
    return args


_NEGATIVE_OK = {"--c", "--c-min", "--c-max", "--b", "--eps"}


def _glue_negative_values(argv: list[str]) -> list[str]:
    """Rewrite '--c -1,0,1' as '--c=-1,0,1' so argparse does not read the list as a flag."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else ""
        if tok in _NEGATIVE_OK and nxt[:1] == "-" and (nxt[1:2].isdigit() or nxt[1:2] == "."):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _expand_config(argv: list[str]) -> list[str]:
    for i, tok in enumerate(argv):
        path = None
        if tok == "--config" and i + 1 < len(argv):
            path, rest = argv[i + 1], argv[:i] + argv[i + 2 :]
        elif tok.startswith("--config="):
            path, rest = tok.split("=", 1)[1], argv[:i] + argv[i + 1 :]
        if path is not None:
            return rest[:1] + read_config_file(path) + rest[1:]
    return argv


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig(
        command=ns.command, n=ns.n, k=ns.k, b=ns.b, b_prime=ns.b_prime, eps=ns.eps, rates=ns.rates,
        law=ns.law, regime=ns.regime, family=ns.family, trials=ns.trials, seed=ns.seed, workers=ns.workers,
        mode=ns.mode, fmt=ns.fmt, output=ns.output, strict=ns.strict, tol=ns.tol, touched=ns.touched,
        times_out=ns.times_out,
    )
    cfg.c_grid = c_grid(ns.c, ns.c_min, ns.c_max, ns.c_step)
    if ns.m is not None:
        ms = parse_int_range(ns.m)
        if ns.command == "rt-exact":
            cfg.steps = ms
        else:
            cfg.m = ms[0]
    if ns.t is not None:
        cfg.steps = parse_int_range(ns.t)
    if ns.n_range is not None:
        cfg.n_values = parse_int_range(ns.n_range)
    cfg.validate()
    return cfg


def run(cfg: ExperimentConfig) -> tuple[int, str]:
    """Execute one command; returns (exit status, rendered table)."""
    handler, _ = COMMANDS[cfg.command]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", UnreliableResultWarning)
        table = handler(cfg)
    unreliable = [w for w in caught if issubclass(w.category, UnreliableResultWarning)]
    for w in caught:
        log.warning("%s", w.message)
    text = render(table, cfg.fmt)
    if unreliable and cfg.strict:
        return EXIT_NUMERIC, text
    return (EXIT_TOLERANCE if table.tolerance_failures else EXIT_OK), text


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        ns = parser.parse_args(_glue_negative_values(_expand_config(argv)))
    except (OSError, ValidationError) as exc:
        print(f"sepprofiles: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(ns)
        status, text = run(cfg)
    except (ValidationError, SizeError, ParameterError, ValueError) as exc:
        print(f"sepprofiles: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericError, ArithmeticError) as exc:
        print(f"sepprofiles: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
