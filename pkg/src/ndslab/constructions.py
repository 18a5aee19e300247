"""The two block-built map sequences and their auxiliary maps.

Family one ("lemma" family): surjective maps phi_n / psi_n supported on a
growing stack of intervals K_n = [a_n, 1-a_n]; blocks of repeated phi_n
followed by one psi_n collapse K_n to the common fixed point 1/2 while the
phi's create a 3-horseshoe inside K_n.

Family two ("main" family): perturbations of the blow-up limit map f_D.
Each stage picks a cylinder block n_i; lambda_i permutes the blown intervals
of that cylinder the way the symbol-reversing involution permutes codes,
eta_i = f_D after lambda_i, phi_{i,n} folds the orbit interval K^n at the
cylinder's visit point three-fold, and psi_{i,n} collapses it to the centre
of the next blown interval.

All maps are exact PLMaps; programs are finite stage lists plus an explicit
tail policy so that the map at any time t >= 1 is well defined.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Literal, Optional

from .blowup import Interval, LimitMapBundle
from .plmap import PLMap, compose, eval_pl, pl_from_points
from .symbolic import Block, Code, code_at_index, evaluate_e, tau

# ---------------------------------------------------------------------------
# programs


@dataclass(frozen=True)
class Stage:
    """A block of maps plus bookkeeping used by the analysis reports."""

    label: str
    maps: tuple[PLMap, ...]
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class BlockProgram:
    """A time-indexed sequence of maps: finite stages, then a tail policy.

    ``tail_mode`` is either ``"repeat"`` (keep applying ``tail_map``) or
    ``"cycle"`` (wrap around the concatenated stage maps forever).  Programs
    built on an atlas carry the frontier intervals (where the finite-depth
    limit map is only approximate) and the exact horizon for flagging.
    """

    stages: tuple[Stage, ...]
    tail_mode: Literal["repeat", "cycle"]
    tail_map: Optional[PLMap] = None
    bundle: Optional[LimitMapBundle] = None
    frontier: tuple[Interval, ...] = ()
    exact_horizon: Optional[int] = None

    def __post_init__(self) -> None:
        if self.tail_mode == "repeat" and self.tail_map is None:
            raise ValueError("repeat tail needs a map")
        if not self.stages:
            raise ValueError("a program needs at least one stage")
        if self.bundle is not None and not self.frontier:
            object.__setattr__(
                self, "frontier", tuple(self.bundle.frontier_intervals())
            )
            object.__setattr__(self, "exact_horizon", self.bundle.exact_horizon)

    @property
    def stage_length(self) -> int:
        return sum(len(s.maps) for s in self.stages)

    def stage_boundaries(self) -> list[int]:
        """Time of the last map of each stage."""
        out, t = [], 0
        for s in self.stages:
            t += len(s.maps)
            out.append(t)
        return out

    def map_at(self, t: int) -> PLMap:
        if t < 1:
            raise ValueError("time starts at 1")
        idx = t - 1
        total = self.stage_length
        if idx < total:
            for s in self.stages:
                if idx < len(s.maps):
                    return s.maps[idx]
                idx -= len(s.maps)
        if self.tail_mode == "cycle":
            idx = (t - 1) % total
            for s in self.stages:
                if idx < len(s.maps):
                    return s.maps[idx]
                idx -= len(s.maps)
        assert self.tail_map is not None
        return self.tail_map


# ---------------------------------------------------------------------------
# family one: the non-uniform example


@dataclass(frozen=True)
class LemmaParams:
    """Parameters of the stacked-interval family.

    ``a`` gives the left endpoint of K_n; it must start at 1/3 and decrease
    strictly toward 0.  ``repeats`` gives the number of phi_n copies in the
    n-th block.
    """

    a: Callable[[int], Fraction] = lambda n: Fraction(1, n + 2)
    repeats: Callable[[int], int] = lambda k: k

    def a_n(self, n: int) -> Fraction:
        v = Fraction(self.a(n))
        if n == 1 and v != Fraction(1, 3):
            raise ValueError("a_1 must equal 1/3")
        if not (0 < v < Fraction(1, 2)):
            raise ValueError(f"a_{n} = {v} outside (0, 1/2)")
        if n > 1 and v >= Fraction(self.a(n - 1)):
            raise ValueError("a_n must decrease strictly")
        return v

    def K(self, n: int) -> Interval:
        an = self.a_n(n)
        return (an, 1 - an)


def lemma_phi(n: int, params: LemmaParams = LemmaParams()) -> PLMap:
    """Three-lap horseshoe map on K_n, identity outside.

    For n = 1 the inner fold points are 4/9 and 5/9; the last linear piece is
    3x - 4/3 (the value forced by continuity at 5/9 and 2/3).  For n > 1 the
    fold are the endpoints of K_{n-1}: the two outer pieces rise onto K_n and
    the middle piece falls onto K_n.
    """
    if n <= 0:
        raise ValueError("stage must be >= 1")
    a_n, b_n = params.K(n)
    if n == 1:
        lo, hi = Fraction(4, 9), Fraction(5, 9)
    else:
        lo, hi = params.K(n - 1)
    return pl_from_points(
        [
            (Fraction(0), Fraction(0)),
            (a_n, a_n),
            (lo, b_n),
            (hi, a_n),
            (b_n, b_n),
            (Fraction(1), Fraction(1)),
        ]
    )


def lemma_psi(n: int, params: LemmaParams = LemmaParams()) -> PLMap:
    """Collapse of K_n to 1/2, identity outside K_{n+1}."""
    if n <= 0:
        raise ValueError("stage must be >= 1")
    a_n, b_n = params.K(n)
    a_next, b_next = params.K(n + 1)
    half = Fraction(1, 2)
    return pl_from_points(
        [
            (Fraction(0), Fraction(0)),
            (a_next, a_next),
            (a_n, half),
            (b_n, half),
            (b_next, b_next),
            (Fraction(1), Fraction(1)),
        ]
    )


def lemma_nds(params: LemmaParams = LemmaParams(), num_stages: int = 5) -> BlockProgram:
    """Blocks B_k = (phi_k repeated, then psi_k), k = 1..num_stages."""
    if num_stages < 1:
        raise ValueError("need at least one stage")
    stages = []
    for k in range(1, num_stages + 1):
        phi, psi = lemma_phi(k, params), lemma_psi(k, params)
        reps = params.repeats(k)
        if reps < 1:
            raise ValueError("repeat count must be positive")
        stages.append(
            Stage(
                label=f"B{k}",
                maps=tuple([phi] * reps + [psi]),
                meta={"k": k, "repeats": reps, "K": params.K(k)},
            )
        )
    return BlockProgram(
        stages=tuple(stages), tail_mode="repeat", tail_map=stages[-1].maps[-1]
    )


# ---------------------------------------------------------------------------
# family two: perturbations of the blow-up limit map


@dataclass(frozen=True)
class StageSpec:
    block: Block
    a: int

    def __post_init__(self) -> None:
        if self.a < 1:
            raise ValueError("repeat count a must be >= 1")

    @property
    def k(self) -> int:
        return len(self.block)

    @property
    def p(self) -> int:
        return evaluate_e(self.block)

    @property
    def q(self) -> int:
        return 2 ** self.k - self.p


def default_stages() -> tuple[StageSpec, ...]:
    return (
        StageSpec(Block("1"), 3),
        StageSpec(Block("11"), 5),
        StageSpec(Block("111"), 7),
    )


@dataclass(frozen=True)
class StageParams:
    """Stage blocks plus the nested stack widths inside each blown interval.

    ``stack_rel(n)`` is |K^n| / |G|; the default 1 - 2^(-n-1) increases to 1,
    keeps every stack strictly inside its interval, and makes the level-1
    stack longer than a third of the interval.
    """

    stages: tuple[StageSpec, ...] = field(default_factory=default_stages)
    stack_rel: Callable[[int], Fraction] = lambda n: 1 - Fraction(1, 2 ** (n + 1))

    def __post_init__(self) -> None:
        ks = [s.k for s in self.stages]
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValueError("cylinder block lengths must increase strictly")
        if not Fraction(self.stack_rel(1)) > Fraction(1, 3):
            raise ValueError("level-1 stack must exceed a third of its interval")

    def rel(self, n: int) -> Fraction:
        v = Fraction(self.stack_rel(n))
        if not (0 < v < 1):
            raise ValueError(f"stack fraction at level {n} outside (0,1)")
        return v


def build_k_interval(
    bundle: LimitMapBundle, params: StageParams, n: int, j: int
) -> Interval:
    """K^n_j: the centred level-n stack interval inside the j-th orbit image.

    The limit map is linear and increasing on every blown interval, so the
    j-th image of the centred stack is again centred with the same relative
    length; the interval is computed in closed form.
    """
    if n < 0:
        raise ValueError("stack level must be >= 0")
    if abs(j) > bundle.exact_horizon:
        raise ValueError(f"orbit index {j} beyond exact horizon")
    code = code_at_index(j)
    if code.depth > bundle.atlas.depth:
        raise ValueError(f"orbit index {j} needs depth {code.depth} > atlas depth")
    l, r = bundle.g_interval(code)
    rel = params.rel(n)  # level 0 is legal here: it serves as the fold divider
    mid = (l + r) / 2
    half = rel * (r - l) / 2
    return (mid - half, mid + half)


def cylinder_codes(bundle: LimitMapBundle, word: str) -> list[Code]:
    """Theta-ordered atlas codes lying in the cylinder of ``word``."""
    out = [c for c in bundle.atlas.codes if c.starts_with(word)]
    if not out:
        raise ValueError(f"cylinder {word} not represented at this depth")
    return out


def _collar_width(
    gap: tuple[Fraction, Fraction],
    image_hull: Interval,
    f_at_inner: Fraction,
    f_at_outer: Fraction,
) -> Fraction:
    """Width of the thin ramp through which lambda joins the identity.

    The ramp sits just outside the permuted hull.  Its width is capped so
    that the limit map's values over the ramp stay inside the image hull;
    that keeps the uniform distance of the perturbed maps from the limit map
    bounded by the hull's image length.
    """
    u, v = gap
    width_cap = (v - u) / 2
    slope = (f_at_inner - f_at_outer) / (v - u)
    if slope == 0:
        return width_cap
    if f_at_outer > f_at_inner:
        margin = image_hull[1] - f_at_inner
    else:
        margin = f_at_inner - image_hull[0]
    if margin <= 0:
        return (v - u) / 16
    return min(width_cap, margin / (2 * abs(slope)))


def build_lambda(bundle: LimitMapBundle, n_block: Block) -> PLMap:
    """Interval lift of the symbol-reversing involution for one cylinder.

    Inside the cylinder hull the blown intervals are permuted (each mapped
    increasingly onto its partner); everywhere else the map is the identity
    except for a thin collar on each side of the hull where the graph climbs
    from the diagonal to the permuted boundary value.
    """
    atlas = bundle.atlas
    word = n_block.word
    codes = cylinder_codes(bundle, word)
    first, last = codes[0], codes[-1]
    jl = atlas.interval_of(first)[0]
    jr = atlas.interval_of(last)[1]
    k = len(word)
    hull = atlas.hull(k, evaluate_e(n_block))
    assert hull == (jl, jr)
    image_hull = atlas.hull(k, (evaluate_e(n_block) + 1) % 2 ** k)

    points: list[tuple[Fraction, Fraction]] = []
    if jl > 0:
        points.append((Fraction(0), Fraction(0)))
    if jr < 1:
        points.append((Fraction(1), Fraction(1)))
    for c in codes:
        l, r = atlas.interval_of(c)
        l2, r2 = atlas.interval_of(tau(n_block, c))
        points.append((l, l2))
        points.append((r, r2))

    # collars: locate the spatial neighbours of the hull
    order = {c: i for i, c in enumerate(atlas.codes)}
    i0, i1 = order[first], order[last]
    if jl > 0:
        u = atlas.intervals[i0 - 1][1]
        prev_code = atlas.codes[i0 - 1]
        delta = _collar_width(
            (u, jl),
            image_hull,
            f_at_inner=bundle.image_of[first][0],
            f_at_outer=bundle.image_of[prev_code][1],
        )
        points.append((jl - delta, jl - delta))
    if jr < 1:
        w = atlas.intervals[i1 + 1][0]
        next_code = atlas.codes[i1 + 1]
        delta = _collar_width(
            (jr, w),
            image_hull,
            f_at_inner=bundle.image_of[last][1],
            f_at_outer=bundle.image_of[next_code][0],
        )
        points.append((jr + delta, jr + delta))
    return pl_from_points(points)


def build_eta_stage(bundle: LimitMapBundle, n_block: Block) -> PLMap:
    """One reversing-then-mapping step: the limit map after lambda."""
    return compose(bundle.f, build_lambda(bundle, n_block))


def build_phi_stage(
    bundle: LimitMapBundle, params: StageParams, i: int, n: int
) -> PLMap:
    """Limit map with a three-lap fold spliced over K^n at the visit point.

    The three parts of K^n delimited by K^(n-1) map onto the whole of K^n
    (outer parts rising, middle falling) and the limit map is applied after
    the fold, so the stack interval covers its successor three times.  Level
    n = 0 is rejected: the fold needs the inner divider.
    """
    if n < 1:
        raise ValueError("fold level must be >= 1")
    spec = params.stages[i - 1]
    p = spec.p
    kl, kr = build_k_interval(bundle, params, n, p)
    il, ir = build_k_interval(bundle, params, n - 1, p)
    nl, nr = build_k_interval(bundle, params, n, p + 1)
    f = bundle.f
    assert eval_pl(f, kl) == nl and eval_pl(f, kr) == nr
    points = [(x, y) for x, y in zip(f.xs, f.ys) if x < kl or x > kr]
    points += [(kl, nl), (il, nr), (ir, nl), (kr, nr)]
    return pl_from_points(points)


def build_psi_stage(
    bundle: LimitMapBundle, params: StageParams, i: int, n: int
) -> PLMap:
    """Limit map with K^n collapsed to the centre of the next blown interval.

    Constant on K^n, equal to the limit map outside K^(n+1), linear on the
    two joining pieces; both one-sided values at the splice boundary lie in
    the image interval, so the result is continuous.
    """
    if n < 1:
        raise ValueError("collapse level must be >= 1")
    spec = params.stages[i - 1]
    p = spec.p
    kl, kr = build_k_interval(bundle, params, n, p)
    ol, orr = build_k_interval(bundle, params, n + 1, p)
    g_next = bundle.atlas.interval_at_index(p + 1)
    centre = (g_next[0] + g_next[1]) / 2
    f = bundle.f
    points = [(x, y) for x, y in zip(f.xs, f.ys) if x < ol or x > orr]
    points += [(ol, eval_pl(f, ol)), (kl, centre), (kr, centre), (orr, eval_pl(f, orr))]
    return pl_from_points(points)


def build_g1inf(
    bundle: LimitMapBundle, params: StageParams, i: int, n: int
) -> BlockProgram:
    """The single-stage periodic probe: fold step, then 2^k - 1 plain steps."""
    spec = params.stages[i - 1]
    lam = build_lambda(bundle, spec.block)
    eta = compose(bundle.f, lam)
    elem = compose(build_phi_stage(bundle, params, i, n), lam)
    unit = tuple([elem] + [eta] * (2 ** spec.k - 1))
    stage = Stage(
        label=f"g{i}n{n}",
        maps=unit,
        meta={"i": i, "n": n, "k": spec.k, "p": spec.p},
    )
    return BlockProgram(stages=(stage,), tail_mode="cycle", bundle=bundle)


def build_main_nds(bundle: LimitMapBundle, params: StageParams) -> BlockProgram:
    """The full uniformly convergent sequence: blocks B_1, B_2, ...

    Block n consists of a_n rounds of (fold-after-reverse, then 2^k - 1
    reverse-and-map steps) followed by one collapse map; afterwards the tail
    repeats the limit map.
    """
    stages = []
    for i, spec in enumerate(params.stages, start=1):
        lam = build_lambda(bundle, spec.block)
        eta = compose(bundle.f, lam)
        elem = compose(build_phi_stage(bundle, params, i, i), lam)
        psi = build_psi_stage(bundle, params, i, i)
        unit = [elem] + [eta] * (2 ** spec.k - 1)
        maps = tuple(unit * spec.a + [psi])
        hull = bundle.atlas.hull(spec.k, spec.p)
        image_hull = bundle.atlas.hull(spec.k, (spec.p + 1) % 2 ** spec.k)
        stages.append(
            Stage(
                label=f"B{i}",
                maps=maps,
                meta={
                    "i": i,
                    "k": spec.k,
                    "a": spec.a,
                    "p": spec.p,
                    "block": spec.block.word,
                    "hull": hull,
                    "image_hull": image_hull,
                    "distinct_maps": (elem, eta, psi),
                },
            )
        )
        expected = spec.a * 2 ** spec.k + 1
        assert len(maps) == expected
    return BlockProgram(
        stages=tuple(stages), tail_mode="repeat", tail_map=bundle.f, bundle=bundle
    )


def times_R(params: StageParams, i: int, m_max: int) -> list[int]:
    """Arithmetic sampling times q - 1 + m * 2^k for one probe stage."""
    if m_max < 1:
        raise ValueError("need at least one time")
    spec = params.stages[i - 1]
    step = 2 ** spec.k
    return [spec.q - 1 + m * step for m in range(1, m_max + 1)]


def times_S(params: StageParams, count: int) -> list[int]:
    """The stage-stitched sampling sequence.

    Stage n contributes a_n terms spaced 2^(k_n), offset q_n - 1 past the
    previous stage's last term (the first stage starts from 0).
    """
    if count < 1:
        raise ValueError("need at least one time")
    out: list[int] = []
    base = 0
    for spec in params.stages:
        step = 2 ** spec.k
        for m in range(1, spec.a + 1):
            out.append(base + spec.q - 1 + m * step)
            if len(out) == count:
                return out
        base = out[-1]
    raise ValueError(f"count {count} exceeds configured stages ({len(out)} times)")
