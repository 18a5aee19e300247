"""Diagnostics: separated sets, entropy lower bounds, pair classification.

Everything here produces certified *lower* bounds or finite-horizon
classifications; no limit quantity is ever claimed.  Distances are exact
rationals; logarithms appear only in the reported estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .blowup import LimitMapBundle
from .constructions import BlockProgram
from .dynamics import trajectory
from .plmap import sup_distance
from .symbolic import Code


@dataclass(frozen=True)
class SeparationReport:
    times: tuple[int, ...]
    epsilon: Fraction
    n: int
    cardinality: int
    entropy_estimate: float
    witnesses: tuple[Fraction, ...]
    flagged: bool = False

    def to_json_dict(self) -> dict:
        return {
            "times": list(self.times),
            "epsilon": str(self.epsilon),
            "n": self.n,
            "cardinality": self.cardinality,
            "entropy_estimate": self.entropy_estimate,
            "flagged": self.flagged,
            "witnesses": [str(w) for w in self.witnesses],
        }


@dataclass(frozen=True)
class PairVerdict:
    tail_min: Fraction
    tail_max: Fraction
    horizon: int
    classification: str  # "LY-candidate" | "asymptotic-candidate" | "distal-candidate"

    def to_json_dict(self) -> dict:
        return {
            "tail_min": str(self.tail_min),
            "tail_max": str(self.tail_max),
            "horizon": self.horizon,
            "classification": self.classification,
        }


def _sampled_values(
    program: BlockProgram, x: Fraction, times: Sequence[int]
) -> tuple[list[Fraction], bool]:
    T = max(times) if times else 0
    traj = trajectory(program, x, T)
    return [traj.values[t] for t in times], traj.tainted


def rho_nA(
    program: BlockProgram,
    x: Fraction,
    y: Fraction,
    A: Sequence[int],
    n: int,
) -> tuple[Fraction, bool]:
    """Exact max distance over the first n sampled times; flag = inexact.

    The flag is set when either trajectory touched a frontier interval or
    the last sampled time exceeds the program's exact horizon.
    """
    if not 1 <= n <= len(A):
        raise ValueError("n must satisfy 1 <= n <= len(A)")
    times = list(A[:n])
    vx, fx = _sampled_values(program, Fraction(x), times)
    vy, fy = _sampled_values(program, Fraction(y), times)
    flagged = fx or fy
    if program.exact_horizon is not None and times and max(times) > program.exact_horizon:
        flagged = True
    return max(abs(a - b) for a, b in zip(vx, vy)), flagged


def greedy_separated(
    program: BlockProgram,
    candidates: Sequence[Fraction],
    A: Sequence[int],
    n: int,
    epsilon: Fraction,
) -> SeparationReport:
    """Greedy pairwise-separated subset: a certified lower bound.

    A candidate joins the witness set when its sampled values differ from
    every chosen witness by more than epsilon at one of the first n times.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not 1 <= n <= len(A):
        raise ValueError("n must satisfy 1 <= n <= len(A)")
    times = list(A[:n])
    epsilon = Fraction(epsilon)
    rows: list[list[Fraction]] = []
    flagged = False
    selected: list[Fraction] = []
    for x in candidates:
        vx, fx = _sampled_values(program, Fraction(x), times)
        flagged = flagged or fx
        ok = True
        for row in rows:
            if not any(abs(a - b) > epsilon for a, b in zip(vx, row)):
                ok = False
                break
        if ok:
            rows.append(vx)
            selected.append(Fraction(x))
    a_n = times[-1]
    # time 0 may legitimately appear in Bowen-style checks; those cells carry
    # no entropy normalisation
    est = math.log(len(selected)) / a_n if selected and a_n > 0 else 0.0
    return SeparationReport(
        times=tuple(times),
        epsilon=epsilon,
        n=n,
        cardinality=len(selected),
        entropy_estimate=est,
        witnesses=tuple(selected),
        flagged=flagged,
    )


def verify_separated(
    program: BlockProgram,
    report: SeparationReport,
) -> bool:
    """Post-hoc soundness check of a report's witness set."""
    times = report.times
    rows = [_sampled_values(program, w, times)[0] for w in report.witnesses]
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            if not any(
                abs(a - b) > report.epsilon for a, b in zip(rows[i], rows[j])
            ):
                return False
    return True


@dataclass(frozen=True)
class EntropyTable:
    A: tuple[int, ...]
    rows: tuple[tuple[str, int, int, float], ...]  # (epsilon, n, cardinality, estimate)
    headline: float

    def to_json_dict(self) -> dict:
        return {
            "times": list(self.A),
            "rows": [
                {"epsilon": e, "n": n, "cardinality": c, "estimate": est}
                for e, n, c, est in self.rows
            ],
            "headline": self.headline,
        }


def _greedy_count(rows: list[list[Fraction]], n: int, epsilon: Fraction) -> int:
    chosen: list[list[Fraction]] = []
    for row in rows:
        vx = row[:n]
        if all(any(abs(a - b) > epsilon for a, b in zip(vx, c)) for c in chosen):
            chosen.append(vx)
    return len(chosen)


def entropy_estimate(
    program: BlockProgram,
    A: Sequence[int],
    epsilons: Sequence[Fraction],
    n_list: Sequence[int],
    candidates: Sequence[Fraction],
) -> EntropyTable:
    """Lower-bound table log(cardinality)/a_n over (epsilon, n) cells.

    The headline is the table maximum.  This estimates the sequence-entropy
    double limit from below only; callers choose the cells, and the identity
    program yields exactly 0 whenever epsilon dominates the candidate spread.
    """
    n_max = max(n_list)
    times = list(A[:n_max])
    rows_cache = [_sampled_values(program, Fraction(x), times)[0] for x in candidates]
    rows = []
    headline = 0.0
    for eps in epsilons:
        eps = Fraction(eps)
        for n in n_list:
            card = _greedy_count(rows_cache, n, eps)
            a_n = times[n - 1]
            est = math.log(card) / a_n if card and a_n > 0 else 0.0
            rows.append((str(eps), n, card, est))
            headline = max(headline, est)
    return EntropyTable(A=tuple(times), rows=tuple(rows), headline=headline)


def ly_classify(
    program: BlockProgram,
    x: Fraction,
    y: Fraction,
    T: int,
    delta: Fraction,
) -> PairVerdict:
    """Finite-horizon pair classification over the window [T/2, T].

    Distances below delta somewhere and above delta somewhere in the window
    make the pair an LY-candidate; staying below is asymptotic-like, staying
    at or above is distal-like.  This is a heuristic about a finite window
    and never a limit claim.
    """
    if T < 1:
        raise ValueError("horizon must be >= 1")
    if delta <= 0:
        raise ValueError("delta must be positive")
    tx = trajectory(program, Fraction(x), T)
    ty = trajectory(program, Fraction(y), T)
    lo = T // 2
    dists = [abs(a - b) for a, b in zip(tx.values[lo:], ty.values[lo:])]
    tail_min, tail_max = min(dists), max(dists)
    if tail_min >= delta:
        cls = "distal-candidate"
    elif tail_max > delta:
        cls = "LY-candidate"
    else:
        cls = "asymptotic-candidate"
    return PairVerdict(tail_min=tail_min, tail_max=tail_max, horizon=T, classification=cls)


def eventual_constancy(
    program: BlockProgram, x: Fraction, T: int
) -> Optional[tuple[int, Fraction]]:
    """Least t0 with exactly constant values on [t0, T], or None.

    A trajectory counts as settled only when the constant run covers at
    least the last two sampled values (t0 <= T - 1); the single final value
    alone is vacuous.
    """
    if T < 1:
        raise ValueError("horizon must be >= 1")
    vals = trajectory(program, Fraction(x), T).values
    t0 = T
    while t0 > 0 and vals[t0 - 1] == vals[T]:
        t0 -= 1
    if t0 <= T - 1:
        return t0, vals[T]
    return None


@dataclass(frozen=True)
class DistalityRow:
    pair: tuple[str, str]
    split_depth: int
    bound: Fraction
    min_distance: Fraction
    ok: bool

    def to_json_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "split_depth": self.split_depth,
            "bound": str(self.bound),
            "min_distance": str(self.min_distance),
            "ok": self.ok,
        }


def _split_depth(a: Code, b: Code) -> int:
    n = max(a.depth, b.depth) + 1
    ea, eb = a.expand(n), b.expand(n)
    for i, (p, q) in enumerate(zip(ea, eb), start=1):
        if p != q:
            return i
    raise ValueError("codes must be distinct")


def distality_report(
    bundle: LimitMapBundle,
    program: BlockProgram,
    code_pairs: Sequence[tuple[Code, Code]],
    T: int,
) -> list[DistalityRow]:
    """Interval-surrogate distality bounds for pairs of blown intervals.

    For each pair the orbits of the two intervals (tracked through their
    endpoints, which ride every program map exactly) must stay at least the
    minimal gap between distinct cylinder hulls at the pair's split depth.
    """
    if T > bundle.exact_horizon:
        raise ValueError("horizon exceeds the atlas's exact range")
    cache: dict[Code, tuple] = {}

    def endpoints(c: Code):
        if c not in cache:
            l, r = bundle.g_interval(c)
            cache[c] = (
                trajectory(program, l, T).values,
                trajectory(program, r, T).values,
            )
        return cache[c]

    out = []
    for a, b in code_pairs:
        if a == b:
            raise ValueError("pairs must consist of distinct codes")
        d = _split_depth(a, b)
        bound = bundle.atlas.min_hull_gap(d)
        ta, tb = endpoints(a), endpoints(b)
        min_d = None
        for t in range(T + 1):
            gap = max(tb[0][t] - ta[1][t], ta[0][t] - tb[1][t], Fraction(0))
            min_d = gap if min_d is None else min(min_d, gap)
        out.append(
            DistalityRow(
                pair=(str(a), str(b)),
                split_depth=d,
                bound=bound,
                min_distance=min_d,
                ok=min_d >= bound,
            )
        )
    return out


@dataclass(frozen=True)
class ConvergenceRow:
    label: str
    envelope: Fraction
    bound: Optional[Fraction]
    within_bound: Optional[bool]

    def to_json_dict(self) -> dict:
        return {
            "label": self.label,
            "envelope": str(self.envelope),
            "bound": None if self.bound is None else str(self.bound),
            "within_bound": self.within_bound,
        }


def convergence_report(
    program: BlockProgram, limit
) -> tuple[list[ConvergenceRow], bool]:
    """Per-stage uniform-distance envelopes against the limit map.

    The envelope of a stage is the largest sup-distance between any of its
    maps and the limit; when the stage carries an image-hull record the
    envelope is compared against that hull's length.  Returns the rows and
    whether the envelopes decrease strictly.
    """
    rows: list[ConvergenceRow] = []
    for s in program.stages:
        maps = s.meta.get("distinct_maps") or tuple(dict.fromkeys(s.maps))
        env = max(sup_distance(m, limit) for m in maps)
        bound = None
        if "image_hull" in s.meta:
            lo, hi = s.meta["image_hull"]
            bound = hi - lo
        rows.append(
            ConvergenceRow(
                label=s.label,
                envelope=env,
                bound=bound,
                within_bound=None if bound is None else env <= bound,
            )
        )
    strict = all(a.envelope > b.envelope for a, b in zip(rows, rows[1:]))
    return rows, strict
