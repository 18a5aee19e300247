"""Time-indexed evaluation of block programs.

Trajectories are always computed pointwise; composing the maps symbolically
would multiply breakpoint counts and is reserved for short verification
chains elsewhere.  Each step is exact; a step whose input lies in a
frontier-flagged interval of the underlying atlas taints the rest of the
trajectory (the finite-depth limit map is only an approximation there).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .constructions import BlockProgram
from .plmap import PLMap, eval_pl


@dataclass(frozen=True)
class Trajectory:
    start: Fraction
    values: tuple[Fraction, ...]      # values[t] for t = 0..T
    flags: tuple[bool, ...]           # exactness taint, monotone in t

    def __len__(self) -> int:
        return len(self.values)

    @property
    def tainted(self) -> bool:
        return self.flags[-1]

    def rows(self) -> list[tuple[int, int, int, bool]]:
        """CSV rows (t, numerator, denominator, flag)."""
        return [
            (t, v.numerator, v.denominator, fl)
            for t, (v, fl) in enumerate(zip(self.values, self.flags))
        ]


def map_at(program: BlockProgram, t: int) -> PLMap:
    """The map applied at time t >= 1."""
    return program.map_at(t)


def iterate_from(program: BlockProgram, i: int, x: Fraction, n: int) -> Fraction:
    """Apply maps i, i+1, ..., i+n-1 in order."""
    if i < 1:
        raise ValueError("start index must be >= 1")
    if n < 0:
        raise ValueError("step count must be >= 0")
    v = Fraction(x)
    for t in range(i, i + n):
        v = eval_pl(program.map_at(t), v)
    return v


def _in_any(x: Fraction, intervals) -> bool:
    return any(l <= x <= r for l, r in intervals)


def trajectory(program: BlockProgram, x: Fraction, T: int) -> Trajectory:
    """The exact value list x, f_1(x), f_2 f_1(x), ... up to time T."""
    if T < 0:
        raise ValueError("horizon must be >= 0")
    frontier = program.frontier
    values = [Fraction(x)]
    flags = [False]
    tainted = False
    for t in range(1, T + 1):
        if frontier and not tainted and _in_any(values[-1], frontier):
            tainted = True
        values.append(eval_pl(program.map_at(t), values[-1]))
        flags.append(tainted)
    return Trajectory(Fraction(x), tuple(values), tuple(flags))


def code_rel_trajectory(
    program: BlockProgram, code_rel: tuple, T: int
) -> Optional[list[tuple[str, Fraction]]]:
    """Trajectory in (code, relative position) coordinates.

    The start is given as (Code, rel in [0,1]); the result lists, for each
    time, the blown interval's code string and the exact relative position
    inside it, or None as soon as the orbit leaves the blown intervals.
    These coordinates are independent of the atlas depth as long as no step
    is frontier-tainted, which makes them the right object for
    model-consistency comparisons across depths.
    """
    bundle = program.bundle
    if bundle is None:
        raise ValueError("program carries no atlas bundle")
    code, rel = code_rel
    x = bundle.point_at(code, Fraction(rel))
    traj = trajectory(program, x, T)
    out: list[tuple[str, Fraction]] = []
    for v in traj.values:
        loc = bundle.rel_of(v)
        if loc is None:
            return out
        out.append((str(loc[0]), loc[1]))
    return out
