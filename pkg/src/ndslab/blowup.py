"""Finite-depth blow-up of the adding-machine orbit on the Cantor set.

Every eventually-constant code of depth <= D becomes a closed interval G(c)
in [0,1]; the intervals are laid out in theta-order with Cantor-proportional
gaps, and the limit map f_D carries G(c) onto G(alpha(c)) as an increasing
linear bijection.  The one code whose alpha-image would exceed depth D (the
all-ones block with tail 0) is a *frontier* code: its image is placed inside
the appropriate gap, and trajectories touching it are only approximate.

The layout formulas:

* |G(c)| = rho * base^(-depth(c)) / W  with  W = sum over codes of
  base^(-depth);
* the gap between theta-consecutive codes c < c' has length
  (1 - rho) * (theta(c') - theta(c));
* G(all-zeros) starts at 0 and G(all-ones) ends at 1, so the pieces tile
  [0,1] exactly and f_D is surjective.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .plmap import PLMap, interval_image, is_surjective, pl_from_points
from .symbolic import (
    ZERO,
    Code,
    alpha,
    alpha_iter,
    all_codes,
    code_at_index,
    evaluate_e,
    orbit_index,
    theta,
)

Interval = tuple[Fraction, Fraction]


@dataclass(frozen=True)
class Atlas:
    """The ordered interval family G(c) for all codes of depth <= depth."""

    depth: int
    rho: Fraction
    weight_base: int
    codes: tuple[Code, ...]                      # theta-sorted
    intervals: tuple[Interval, ...]              # G(c), same order
    total_weight: Fraction                       # W
    hulls: dict[tuple[int, int], Interval]       # (n, e(word)) -> J(n, k)
    _lefts: tuple[Fraction, ...] = field(repr=False, default=())

    @property
    def size(self) -> int:
        return len(self.codes)

    def locate_code(self, c: Code) -> Optional[Interval]:
        """G(c) if the code is represented, else None."""
        if c.depth > self.depth:
            return None
        th = theta(c)
        i = bisect_right(self._thetas(), th) - 1
        if i >= 0 and self.codes[i] == c:
            return self.intervals[i]
        return None

    def _thetas(self) -> tuple[Fraction, ...]:
        # theta is strictly increasing along self.codes; cache lazily
        if not hasattr(self, "_theta_cache"):
            object.__setattr__(self, "_theta_cache", tuple(theta(c) for c in self.codes))
        return getattr(self, "_theta_cache")

    def interval_of(self, c: Code) -> Interval:
        iv = self.locate_code(c)
        if iv is None:
            raise KeyError(f"code {c} exceeds atlas depth {self.depth}")
        return iv

    def interval_at_index(self, j: int) -> Interval:
        """G at orbit index j (j-th forward/backward image of the base code)."""
        return self.interval_of(code_at_index(j))

    def find_g(self, x: Fraction) -> Optional[int]:
        """Index in theta-order of the G containing x, or None (gap point)."""
        i = bisect_right(self._lefts, x) - 1
        if i >= 0 and self.intervals[i][0] <= x <= self.intervals[i][1]:
            return i
        return None

    def hull(self, n: int, k: int) -> Interval:
        return self.hulls[(n, k)]

    def hulls_at_level(self, n: int) -> list[Interval]:
        """The 2^n level-n hulls in spatial order."""
        ivs = [v for (m, _), v in self.hulls.items() if m == n]
        return sorted(ivs)

    def min_hull_gap(self, n: int) -> Fraction:
        """Smallest gap between consecutive level-n cylinder hulls."""
        ivs = self.hulls_at_level(n)
        return min(b[0] - a[1] for a, b in zip(ivs, ivs[1:]))

    def to_json_dict(self) -> dict:
        return {
            "depth": self.depth,
            "rho": str(self.rho),
            "weight_base": self.weight_base,
            "entries": [
                {"code": str(c), "left": str(l), "right": str(r)}
                for c, (l, r) in zip(self.codes, self.intervals)
            ],
        }


def build_atlas(depth: int, rho: Fraction, weight_base: int) -> Atlas:
    """Lay out all codes of depth <= ``depth`` per the mass/gap formulas."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    rho = Fraction(rho)
    if not (0 < rho < 1):
        raise ValueError("rho must lie strictly between 0 and 1")
    if weight_base < 2:
        raise ValueError("weight_base must be >= 2")

    codes = all_codes(depth)
    w = sum(Fraction(1, weight_base ** c.depth) for c in codes)
    lengths = [rho * Fraction(1, weight_base ** c.depth) / w for c in codes]
    thetas = [theta(c) for c in codes]

    intervals: list[Interval] = []
    pos = Fraction(0)
    for i, ln in enumerate(lengths):
        intervals.append((pos, pos + ln))
        pos += ln
        if i + 1 < len(codes):
            pos += (1 - rho) * (thetas[i + 1] - thetas[i])
    if intervals[-1][1] != 1:
        raise AssertionError("layout does not tile [0,1] exactly")

    hulls: dict[tuple[int, int], Interval] = {}
    for n in range(1, depth + 1):
        groups: dict[tuple[int, ...], list[Interval]] = {}
        for c, iv in zip(codes, intervals):
            groups.setdefault(c.expand(n), []).append(iv)
        for prefix, ivs in groups.items():
            k = sum(2 ** i for i, b in enumerate(prefix) if b)
            hulls[(n, k)] = (min(a for a, _ in ivs), max(b for _, b in ivs))

    return Atlas(
        depth=depth,
        rho=rho,
        weight_base=weight_base,
        codes=tuple(codes),
        intervals=tuple(intervals),
        total_weight=w,
        hulls=hulls,
        _lefts=tuple(iv[0] for iv in intervals),
    )


@dataclass(frozen=True)
class LimitMapBundle:
    """The atlas together with its limit map and exactness bookkeeping."""

    atlas: Atlas
    f: PLMap
    exact_horizon: int
    frontier_codes: frozenset[Code]
    frontier_image: Interval
    image_of: dict[Code, Interval]

    def g_interval(self, c: Code) -> Interval:
        return self.atlas.interval_of(c)

    def frontier_intervals(self) -> list[Interval]:
        out = [self.atlas.interval_of(c) for c in self.frontier_codes]
        out.append(self.frontier_image)
        return out

    def point_at(self, c: Code, rel: Fraction) -> Fraction:
        """The point of G(c) at relative position rel in [0,1]."""
        l, r = self.g_interval(c)
        return l + Fraction(rel) * (r - l)

    def rel_of(self, x: Fraction) -> Optional[tuple[Code, Fraction]]:
        """(code, relative position) if x lies in a G interval, else None."""
        i = self.atlas.find_g(x)
        if i is None:
            return None
        l, r = self.atlas.intervals[i]
        return self.atlas.codes[i], (x - l) / (r - l)


def _frontier_code(depth: int) -> Code:
    return Code("1" * depth, 0)


def build_limit_map(atlas: Atlas) -> LimitMapBundle:
    """Extend the interval-to-interval adding machine to a continuous f_D.

    Non-frontier G(c) map increasingly and linearly onto G(alpha(c)); each
    gap maps linearly between the image endpoints of its two neighbours; the
    frontier interval maps onto a segment placed inside the gap that holds
    its true (depth D+1) image, at the theta-proportional position.
    """
    d = atlas.depth
    frontier = _frontier_code(d)

    # Gap that will receive the frontier image: between G(all-zeros) and its
    # theta-successor.  The true image code is 0^d 1 0-bar at theta 2/3^(d+1).
    succ = atlas.codes[1]
    gap_lo = atlas.intervals[0][1]
    gap_hi = atlas.intervals[1][0]
    th_lo, th_hi = theta(atlas.codes[0]), theta(succ)
    th_true = Fraction(2, 3 ** (d + 1))
    center = gap_lo + (th_true - th_lo) / (th_hi - th_lo) * (gap_hi - gap_lo)
    true_len = atlas.rho * Fraction(1, atlas.weight_base ** (d + 1)) / atlas.total_weight
    half = min(true_len / 2, (center - gap_lo) / 2, (gap_hi - center) / 2)
    frontier_image: Interval = (center - half, center + half)

    image_of: dict[Code, Interval] = {}
    points: list[tuple[Fraction, Fraction]] = []
    for c, (l, r) in zip(atlas.codes, atlas.intervals):
        if c == frontier:
            img = frontier_image
        else:
            img = atlas.interval_of(alpha(c))
        image_of[c] = img
        points.append((l, img[0]))
        points.append((r, img[1]))
    f = pl_from_points(points)
    if not is_surjective(f):
        raise AssertionError("limit map must be surjective")

    return LimitMapBundle(
        atlas=atlas,
        f=f,
        exact_horizon=2 ** (d - 1),
        frontier_codes=frozenset([frontier]),
        frontier_image=frontier_image,
        image_of=image_of,
    )


def verify_orbit_action(bundle: LimitMapBundle, steps: int) -> dict:
    """Iterate G(all-zeros) by interval images and match against the orbit.

    Returns ``{"ok": bool, "steps": int, "first_failure": Optional[int]}``;
    raises if ``steps`` exceeds the exact horizon.
    """
    if steps > bundle.exact_horizon:
        raise ValueError(
            f"steps {steps} beyond exact horizon {bundle.exact_horizon}"
        )
    cur = bundle.g_interval(ZERO)
    code = ZERO
    for m in range(1, steps + 1):
        cur = interval_image(bundle.f, *cur)
        code = alpha(code)
        if cur != bundle.g_interval(code):
            return {"ok": False, "steps": steps, "first_failure": m}
    return {"ok": True, "steps": steps, "first_failure": None}


def verify_hull_periodicity(bundle: LimitMapBundle, n: int) -> dict:
    """Check the level-n hull cycle J(n,0) -> J(n,1) -> ... -> J(n,0).

    Follows set images of J(n,0) for min(2^n, exact horizon) steps.  When the
    full cycle fits inside the horizon the return time is certified to be
    exactly 2^n (the hulls at one level are pairwise disjoint, so no earlier
    return is possible); otherwise the checked prefix must agree with the
    cyclic pattern.
    """
    atlas = bundle.atlas
    if not 1 <= n <= atlas.depth:
        raise ValueError("level must satisfy 1 <= n <= depth")
    period = 2 ** n
    steps = min(period, bundle.exact_horizon)
    cur = atlas.hull(n, 0)
    for m in range(1, steps + 1):
        cur = interval_image(bundle.f, *cur)
        expected = atlas.hull(n, m % period)
        if cur != expected:
            return {"ok": False, "level": n, "first_failure": m, "certified_full_cycle": False}
    return {
        "ok": True,
        "level": n,
        "first_failure": None,
        "certified_full_cycle": period <= bundle.exact_horizon,
    }


def hull_nesting_holds(atlas: Atlas, n: int, k: int, bit: int) -> bool:
    """J(n+1, k + bit*2^n) inside J(n, k): one nesting instance."""
    outer = atlas.hull(n, k)
    inner = atlas.hull(n + 1, k + bit * 2 ** n)
    return outer[0] <= inner[0] and inner[1] <= outer[1]


def order_isomorphism_holds(atlas: Atlas) -> bool:
    """Interval order along the layout equals theta order of the codes."""
    ths = [theta(c) for c in atlas.codes]
    if any(a >= b for a, b in zip(ths, ths[1:])):
        return False
    return all(
        a[1] < b[0] for a, b in zip(atlas.intervals, atlas.intervals[1:])
    )


def one_code_per_deep_cylinder(atlas: Atlas) -> bool:
    """Each depth-(D+1) cylinder holds exactly one represented code.

    The represented codes biject with the words of length depth+1: the
    expansion prefix of that length determines the code and vice versa.
    """
    prefixes = {c.expand(atlas.depth + 1) for c in atlas.codes}
    return len(prefixes) == len(atlas.codes) == 2 ** (atlas.depth + 1)
