"""Program evaluation: map lookup, iteration identities, trajectories."""

from fractions import Fraction

import pytest

from ndslab.blowup import build_atlas, build_limit_map
from ndslab.constructions import (
    BlockProgram,
    LemmaParams,
    Stage,
    StageParams,
    build_main_nds,
    lemma_nds,
    lemma_phi,
    lemma_psi,
)
from ndslab.dynamics import code_rel_trajectory, iterate_from, map_at, trajectory
from ndslab.plmap import eval_pl
from ndslab.symbolic import ZERO, all_codes, canonicalize


@pytest.fixture(scope="module")
def lemma_prog():
    return lemma_nds(LemmaParams(), 3)


@pytest.fixture(scope="module")
def main_prog():
    bundle = build_limit_map(build_atlas(6, Fraction(1, 2), 4))
    return build_main_nds(bundle, StageParams())


class TestMapAt:
    def test_lemma_schedule(self, lemma_prog):
        assert map_at(lemma_prog, 1) == lemma_phi(1)
        assert map_at(lemma_prog, 2) == lemma_psi(1)

    def test_tail(self, lemma_prog):
        t = lemma_prog.stage_length
        assert map_at(lemma_prog, t + 1) == lemma_psi(3)
        assert map_at(lemma_prog, t + 999) == lemma_psi(3)

    def test_main_block_end(self, main_prog):
        b1 = len(main_prog.stages[0].maps)
        assert map_at(main_prog, b1) == main_prog.stages[0].maps[-1]

    def test_time_starts_at_one(self, lemma_prog):
        with pytest.raises(ValueError):
            map_at(lemma_prog, 0)


class TestIterate:
    def test_zero_steps(self, lemma_prog):
        assert iterate_from(lemma_prog, 1, Fraction(2, 7), 0) == Fraction(2, 7)

    def test_one_step(self, lemma_prog):
        x = Fraction(3, 8)
        assert iterate_from(lemma_prog, 1, x, 1) == eval_pl(map_at(lemma_prog, 1), x)

    @pytest.mark.parametrize("m,n", [(1, 3), (2, 2), (4, 5)])
    def test_composition_identity(self, lemma_prog, m, n):
        x = Fraction(5, 11)
        whole = iterate_from(lemma_prog, 1, x, m + n)
        staged = iterate_from(lemma_prog, 1 + m, iterate_from(lemma_prog, 1, x, m), n)
        assert whole == staged


class TestTrajectory:
    def test_lemma_collapse_to_half(self, lemma_prog):
        # any stack point is flattened to 1/2 at the first block end and stays
        traj = trajectory(lemma_prog, Fraction(1, 2), 4)
        assert set(traj.values) == {Fraction(1, 2)}
        traj2 = trajectory(lemma_prog, Fraction(2, 5), 6)
        assert traj2.values[2] == Fraction(1, 2)       # after phi_1, psi_1
        assert all(v == Fraction(1, 2) for v in traj2.values[2:])

    def test_identity_region_fixed(self, lemma_prog):
        traj = trajectory(lemma_prog, Fraction(0), 10)
        assert set(traj.values) == {Fraction(0)}

    def test_determinism(self, main_prog):
        a = trajectory(main_prog, Fraction(1, 3), 30)
        b = trajectory(main_prog, Fraction(1, 3), 30)
        assert a == b

    def test_flags_monotone(self, main_prog):
        traj = trajectory(main_prog, Fraction(1, 3), 40)
        assert all(b or not a for a, b in zip(traj.flags, traj.flags[1:]))

    def test_frontier_taints(self, main_prog):
        bundle = main_prog.bundle
        (frontier_code,) = bundle.frontier_codes
        l, r = bundle.g_interval(frontier_code)
        traj = trajectory(main_prog, (l + r) / 2, 3)
        assert not traj.flags[0] and traj.flags[1] and traj.tainted

    def test_rows_format(self, lemma_prog):
        rows = trajectory(lemma_prog, Fraction(1, 3), 2).rows()
        assert rows[0] == (0, 1, 3, False)
        assert len(rows) == 3


class TestCodeRelCoordinates:
    def test_matches_absolute_dynamics(self, main_prog):
        bundle = main_prog.bundle
        for c in all_codes(2):
            seq = code_rel_trajectory(main_prog, (c, Fraction(1, 3)), 8)
            x = bundle.point_at(c, Fraction(1, 3))
            traj = trajectory(main_prog, x, 8)
            assert len(seq) == 9
            for (code_str, rel), v in zip(seq, traj.values):
                block, tail = code_str.split("|")
                l, r = bundle.atlas.interval_of(canonicalize(block, int(tail)))
                assert l + rel * (r - l) == v

    def test_requires_bundle(self, lemma_prog):
        with pytest.raises(ValueError):
            code_rel_trajectory(lemma_prog, (ZERO, Fraction(1, 2)), 3)
