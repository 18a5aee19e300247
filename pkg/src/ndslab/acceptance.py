"""The verification battery: one callable per shipped guarantee.

Each criterion function returns a :class:`CriterionResult`; ``run_all``
executes the battery in order and prints one PASS/FAIL line per criterion.
The parameters frozen here (depths, grids, tolerances, candidate recipes,
random seeds) are the published contract of the package; tests and the CLI
``verify-all`` command both call into this module so there is exactly one
source of truth.

Criterion 7c is expected to fail and is reported honestly: an exactly
constant trajectory tail would require a common fixed point of all later
maps of the sequence, but the collapse maps send their stack onto interval
*centres*, which the limit map keeps moving along the orbit.  The no-LY
mechanism of the construction is the distality floor (criterion 7e) plus
pairwise merging, not literal constancy; see the README for the argument.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable

from .analysis import (
    distality_report,
    entropy_estimate,
    eventual_constancy,
    greedy_separated,
    ly_classify,
    verify_separated,
    convergence_report,
)
from .blowup import (
    build_atlas,
    build_limit_map,
    one_code_per_deep_cylinder,
    order_isomorphism_holds,
    verify_hull_periodicity,
    verify_orbit_action,
)
from .constructions import (
    BlockProgram,
    LemmaParams,
    Stage,
    StageParams,
    build_k_interval,
    build_main_nds,
    lemma_phi,
    lemma_psi,
    times_S,
)
from .dynamics import code_rel_trajectory, trajectory
from .plmap import (
    compose_chain,
    eval_pl,
    identity_map,
    interval_image,
    tent_map,
)
from .symbolic import (
    ZERO,
    Block,
    alpha,
    all_blocks,
    all_codes,
    block_successor,
    canonicalize,
    eta_orbit,
    evaluate_e,
)

DEFAULT_RHO = Fraction(1, 2)
DEFAULT_BASE = 4


@dataclass
class CriterionResult:
    number: str
    name: str
    ok: bool
    expected_fail: bool
    details: str
    elapsed: float

    def line(self) -> str:
        verdict = "PASS" if self.ok else "FAIL"
        note = " (known limitation, see README)" if (not self.ok and self.expected_fail) else ""
        return f"[{verdict}] {self.number} {self.name}: {self.details}{note} [{self.elapsed:.1f}s]"


def _timed(fn: Callable[[], tuple[bool, str]]) -> tuple[bool, str, float]:
    t0 = time.time()
    ok, details = fn()
    return ok, details, time.time() - t0


def grid_in(l: Fraction, r: Fraction, m: int) -> list[Fraction]:
    """m interior midpoints of [l, r], uniformly spaced."""
    return [l + Fraction(2 * j + 1, 2 * m) * (r - l) for j in range(m)]


# ---------------------------------------------------------------------------
# shared fixtures (built lazily and cached by run_all / tests)


def autonomous_program(f, bundle=None) -> BlockProgram:
    return BlockProgram(
        stages=(Stage("auto", (f,)),), tail_mode="cycle", bundle=bundle
    )


def main_candidates(bundle) -> list[Fraction]:
    """The frozen candidate recipe for the separated-set counts.

    Dense interior grids inside every blown interval of depth <= 4 plus
    grids in every layout gap adjacent to one of them; the gaps carry the
    steep joining pieces of the limit map, where orbits spread fastest.
    """
    atlas = bundle.atlas
    cands: list[Fraction] = []
    density = {0: 400, 1: 240, 2: 120, 3: 50, 4: 16}
    for c, iv in zip(atlas.codes, atlas.intervals):
        if c.depth <= 4:
            cands += grid_in(*iv, density[c.depth])
    pairs = zip(zip(atlas.codes, atlas.intervals), zip(atlas.codes[1:], atlas.intervals[1:]))
    for (c1, iv1), (c2, iv2) in pairs:
        if min(c1.depth, c2.depth) <= 4 and iv2[0] > iv1[1]:
            cands += grid_in(iv1[1], iv2[0], 60)
    return cands


def epsilon_zero(bundle) -> Fraction:
    l, r = bundle.atlas.intervals[0]
    return (r - l) / 3


# ---------------------------------------------------------------------------
# criteria


def criterion_1() -> CriterionResult:
    """Reversing-step periodicity, exhaustively over all blocks of length <= 6."""

    def run():
        checked = 0
        for k in range(1, 7):
            period = 2 ** k
            for w in all_blocks(k):
                orbit = eta_orbit(w, ZERO, period)
                if orbit[-1] != ZERO:
                    return False, f"orbit of the zero code does not close for {w}"
                pts = orbit[:-1]
                if len(set(pts)) != period:
                    return False, f"orbit of the zero code degenerate for {w}"
                inside = [c for c in pts if c.starts_with(w.word)]
                if len(inside) != 1 or inside[0] != canonicalize(w.word, 0):
                    return False, f"cylinder visit wrong for {w}"
                checked += 1
        return True, f"{checked} blocks verified exactly"

    ok, details, dt = _timed(run)
    return CriterionResult("1", "reversing-step orbit closure", ok and dt < 5.0,
                           False, details + f"; runtime limit 5s", dt)


def criterion_2() -> CriterionResult:
    """Every k-cylinder, k <= 8, first returns to itself after exactly 2^k."""

    def run():
        for k in range(1, 9):
            for w in all_blocks(k):
                x, steps = w, 0
                while True:
                    x = block_successor(x)
                    steps += 1
                    if x.word == w.word:
                        break
                    if steps > 2 ** k:
                        return False, f"no return for {w.word}"
                if steps != 2 ** k:
                    return False, f"return time {steps} != 2^{k} for {w.word}"
        return True, "all cylinders of length <= 8 return in exactly 2^k steps"

    ok, details, dt = _timed(run)
    return CriterionResult("2", "cylinder first-return times", ok, False, details, dt)


def criterion_3() -> CriterionResult:
    """Block and prefix collapse of the stacked-interval family, exact."""

    def run():
        params = LemmaParams()
        grid = [Fraction(i, 512) for i in range(513)]
        prefix_maps = []
        for k in range(1, 6):
            phi, psi = lemma_phi(k, params), lemma_psi(k, params)
            block = compose_chain([phi] * k + [psi])
            for x in grid:
                if eval_pl(block, x) != eval_pl(psi, x):
                    return False, f"block {k} does not collapse at x={x}"
            prefix_maps += [phi] * k + [psi]
            prefix = compose_chain(prefix_maps)
            for x in grid:
                if eval_pl(prefix, x) != eval_pl(psi, x):
                    return False, f"prefix of {k} blocks differs at x={x}"
        return True, "blocks 1..5 collapse exactly on the 1/512 grid"

    ok, details, dt = _timed(run)
    return CriterionResult("3", "block collapse to the flattening map", ok, False, details, dt)


def criterion_4() -> CriterionResult:
    """Greedy horseshoe counts: 3^i separated points for i <= 5."""

    def run():
        params = LemmaParams()
        phi1 = lemma_phi(1, params)
        prog = autonomous_program(phi1)
        a1, b1 = params.K(1)
        eps = (b1 - a1) / 10
        cands = [a1 + Fraction(j, 3 ** 7) * (b1 - a1) for j in range(3 ** 7 + 1)]
        times = [1, 2, 3, 4, 5]
        cards = []
        for i in range(1, 6):
            rep = greedy_separated(prog, cands, times, i, eps)
            cards.append(rep.cardinality)
            if rep.cardinality < 3 ** i:
                return False, f"i={i}: {rep.cardinality} < {3 ** i}"
        return True, f"cards {cards} vs bounds {[3**i for i in range(1,6)]}"

    ok, details, dt = _timed(run)
    return CriterionResult("4", "three-branch horseshoe counting", ok and dt < 60.0,
                           False, details + "; runtime limit 60s", dt)


def criterion_5() -> CriterionResult:
    """Atlas structure at depth 10: order, action, hull periodicity."""

    def run():
        atlas = build_atlas(10, DEFAULT_RHO, DEFAULT_BASE)
        bundle = build_limit_map(atlas)
        if not order_isomorphism_holds(atlas):
            return False, "interval order does not match code order"
        if not one_code_per_deep_cylinder(atlas):
            return False, "deep-cylinder bijection broken"
        for c, iv in zip(atlas.codes, atlas.intervals):
            if c in bundle.frontier_codes:
                continue
            if interval_image(bundle.f, *iv) != atlas.interval_of(alpha(c)):
                return False, f"interval action wrong at {c}"
        act = verify_orbit_action(bundle, bundle.exact_horizon)
        if not act["ok"]:
            return False, f"orbit action fails at step {act['first_failure']}"
        full = []
        for n in range(1, 11):
            rep = verify_hull_periodicity(bundle, n)
            if not rep["ok"]:
                return False, f"hull cycle broken at level {n}, step {rep['first_failure']}"
            full.append(rep["certified_full_cycle"])
        # nesting J(n+1) inside J(n)
        for n in range(1, 10):
            for k in range(2 ** n):
                for bit in (0, 1):
                    outer, inner = atlas.hull(n, k), atlas.hull(n + 1, k + bit * 2 ** n)
                    if not (outer[0] <= inner[0] and inner[1] <= outer[1]):
                        return False, f"nesting broken at ({n},{k},{bit})"
        return True, (
            "order, deep-cylinder bijection, interval action, "
            f"hull cycles (full cycles certified up to level {sum(full)}), nesting"
        )

    ok, details, dt = _timed(run)
    return CriterionResult("5", "blow-up structure at depth 10", ok, False, details, dt)


def criterion_6() -> CriterionResult:
    """Separated-set entropy proxy of the limit map stays under 0.05."""

    def run():
        atlas = build_atlas(10, DEFAULT_RHO, DEFAULT_BASE)
        bundle = build_limit_map(atlas)
        prog = autonomous_program(bundle.f, bundle)
        horizon = 2 ** 8
        eps = atlas.min_hull_gap(10) / 2
        cands = [Fraction(2 * j + 1, 1024) for j in range(512)]
        rep = greedy_separated(prog, cands, list(range(1, horizon + 1)), horizon, eps)
        est = math.log(rep.cardinality) / horizon
        return est <= 0.05, f"estimate {est:.4f} (cardinality {rep.cardinality}) <= 0.05"

    ok, details, dt = _timed(run)
    return CriterionResult("6", "zero-entropy proxy of the limit map", ok, False, details, dt)


def _main_fixture():
    atlas = build_atlas(12, DEFAULT_RHO, DEFAULT_BASE)
    bundle = build_limit_map(atlas)
    params = StageParams()
    program = build_main_nds(bundle, params)
    return bundle, params, program


def criterion_7a(fixture=None) -> CriterionResult:
    """Uniform-convergence envelopes under the hull-image bounds, decreasing."""

    def run():
        bundle, params, program = fixture or _main_fixture()
        rows, strict = convergence_report(program, bundle.f)
        for r in rows:
            if not r.within_bound:
                return False, f"{r.label}: envelope {float(r.envelope):.4f} exceeds bound"
        if not strict:
            return False, "envelopes not strictly decreasing"
        desc = ", ".join(f"{r.label}={float(r.envelope):.4f}<={float(r.bound):.4f}" for r in rows)
        return True, desc

    ok, details, dt = _timed(run)
    return CriterionResult("7a", "uniform convergence envelopes", ok, False, details, dt)


def criterion_7b(fixture=None) -> CriterionResult:
    """Separated-set counts along the stitched sampling times."""

    def run():
        bundle, params, program = fixture or _main_fixture()
        S = times_S(params, 8)
        eps = epsilon_zero(bundle) / 2
        cands = main_candidates(bundle)
        rep3 = greedy_separated(program, cands, S, 3, eps)
        rep8 = greedy_separated(program, cands, S, 8, eps)
        if rep3.cardinality < 9:
            return False, f"n=3 count {rep3.cardinality} < 9"
        if rep8.cardinality < 81:
            return False, f"n=8 count {rep8.cardinality} < 81"
        if not (verify_separated(program, rep3) and verify_separated(program, rep8)):
            return False, "witness sets fail post-hoc verification"
        table = entropy_estimate(program, S, [eps], [1, 3, 8], cands)
        target = 0.9 * math.log(3)
        if table.headline < target:
            return False, f"headline {table.headline:.4f} < {target:.4f}"
        return True, (
            f"counts n=3:{rep3.cardinality}>=9, n=8:{rep8.cardinality}>=81, "
            f"headline {table.headline:.3f}>=0.9*log3"
        )

    ok, details, dt = _timed(run)
    return CriterionResult("7b", "separated-set growth along S", ok, False, details, dt)


def settle_sample_points(bundle, params) -> list[Fraction]:
    pts: list[Fraction] = []
    for c in bundle.atlas.codes:
        if c.depth <= 3:
            pts += grid_in(*bundle.atlas.interval_of(c), 50)
    for n in (1, 2, 3):
        for j in (0, 1):
            kl, kr = build_k_interval(bundle, params, n, j)
            pts += [kl, kr]
    return pts


def criterion_7c(fixture=None) -> CriterionResult:
    """Settlement to exactly constant trajectories (expected to fail)."""

    def run():
        bundle, params, program = fixture or _main_fixture()
        T = program.stage_length
        pts = settle_sample_points(bundle, params)
        settled = 0
        for x in pts:
            if eventual_constancy(program, x, T) is not None:
                settled += 1
        ok = settled == len(pts)
        return ok, f"{settled}/{len(pts)} sampled points settle within {T} steps"

    ok, details, dt = _timed(run)
    return CriterionResult("7c", "eventual constancy of sampled trajectories",
                           ok, True, details, dt)


def criterion_7d(fixture=None) -> CriterionResult:
    """No LY-candidates among pairs from distinct shallow intervals."""

    def run():
        bundle, params, program = fixture or _main_fixture()
        T = program.stage_length
        delta = epsilon_zero(bundle) / 4
        rng = random.Random(11)
        groups = []
        for c in bundle.atlas.codes:
            if c.depth <= 2:
                groups.append(grid_in(*bundle.atlas.interval_of(c), 10))
        bad = 0
        made = 0
        while made < 1000:
            gi, gj = rng.randrange(len(groups)), rng.randrange(len(groups))
            if gi == gj:
                continue
            x, y = rng.choice(groups[gi]), rng.choice(groups[gj])
            verdict = ly_classify(program, x, y, T, delta)
            if verdict.classification == "LY-candidate":
                bad += 1
            made += 1
        return bad == 0, f"{bad}/1000 LY-candidates at delta=eps0/4"

    ok, details, dt = _timed(run)
    return CriterionResult("7d", "LY-candidate scan", ok, False, details, dt)


def criterion_7e(fixture=None) -> CriterionResult:
    """Distality floor for interval pairs of depth <= 4 over 2^(D-2) steps."""

    def run():
        bundle, params, program = fixture or _main_fixture()
        pairs = list(combinations(all_codes(4), 2))
        rows = distality_report(bundle, program, pairs, 2 ** 10)
        bad = [r for r in rows if not r.ok]
        if bad:
            r = bad[0]
            return False, f"{len(bad)} pairs below bound, first {r.pair}"
        return True, f"all {len(rows)} pairs keep their split-depth gap bound"

    ok, details, dt = _timed(run)
    return CriterionResult("7e", "distality of interval pairs", ok, False, details, dt)


def criterion_8() -> CriterionResult:
    """Estimator oracle: tent map near log 2, identity exactly zero."""

    def run():
        tent = autonomous_program(tent_map())
        grid = [Fraction(j, 2 ** 12) for j in range(2 ** 12 + 1)]
        table = entropy_estimate(tent, list(range(1, 11)), [Fraction(1, 6)], [10], grid)
        if not (0.6 <= table.headline <= 0.75):
            return False, f"tent headline {table.headline:.4f} outside [0.6, 0.75]"
        ident = autonomous_program(identity_map())
        zero = entropy_estimate(ident, [1, 2, 3], [Fraction(1)], [3], grid[::64])
        if zero.headline != 0.0:
            return False, f"identity headline {zero.headline} != 0"
        return True, f"tent headline {table.headline:.4f} around log2, identity 0.0"

    ok, details, dt = _timed(run)
    return CriterionResult("8", "estimator sanity oracles", ok, False, details, dt)


def criterion_9() -> CriterionResult:
    """Unflagged trajectories agree across depths 6 and 7 in orbit coordinates."""

    def run():
        progs = {}
        for d in (6, 7):
            atlas = build_atlas(d, DEFAULT_RHO, DEFAULT_BASE)
            bundle = build_limit_map(atlas)
            progs[d] = (
                bundle,
                build_main_nds(bundle, StageParams()),
                autonomous_program(bundle.f, bundle),
            )
        starts = [
            (c, rel)
            for c in all_codes(3)
            for rel in (Fraction(1, 7), Fraction(1, 2), Fraction(6, 7))
        ]
        horizon = 32
        compared = 0
        for idx in (1, 2):
            for cr in starts:
                v6 = trajectory(progs[6][idx], progs[6][0].point_at(*cr), horizon)
                v7 = trajectory(progs[7][idx], progs[7][0].point_at(*cr), horizon)
                if v6.tainted or v7.tainted:
                    continue
                t6 = code_rel_trajectory(progs[6][idx], cr, horizon)
                t7 = code_rel_trajectory(progs[7][idx], cr, horizon)
                if t6 != t7 or len(t6) != horizon + 1:
                    return False, f"divergence from {cr[0]} rel {cr[1]}"
                compared += 1
        return True, f"{compared} trajectory pairs agree exactly in orbit coordinates"

    ok, details, dt = _timed(run)
    return CriterionResult("9", "cross-depth model consistency", ok, False, details, dt)


def run_all(echo: Callable[[str], None] = print) -> list[CriterionResult]:
    """Execute the full battery, printing one line per criterion."""
    results = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
    ]
    fixture = _main_fixture()
    results += [
        criterion_7a(fixture),
        criterion_7b(fixture),
        criterion_7c(fixture),
        criterion_7d(fixture),
        criterion_7e(fixture),
        criterion_8(),
        criterion_9(),
    ]
    for r in results:
        echo(r.line())
    return results
