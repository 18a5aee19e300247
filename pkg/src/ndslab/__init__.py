"""Exact-arithmetic lab for nonautonomous interval dynamics.

Builds adding-machine blow-ups of the Cantor set at finite symbolic depth,
the block-structured map sequences perturbing their limit map, and the
diagnostics (separated-set entropy bounds, Li-Yorke pair classification,
distality and uniform-convergence reports) used to verify their properties.
"""

from .symbolic import (
    ZERO,
    ONE,
    Block,
    Code,
    Cylinder,
    alpha,
    alpha_iter,
    all_blocks,
    all_codes,
    canonicalize,
    code_at_index,
    compare,
    eta,
    eta_orbit,
    eta_period,
    evaluate_e,
    orbit_index,
    tau,
    theta,
)
from .plmap import (
    PLMap,
    compose,
    compose_chain,
    constant_map,
    eval_pl,
    identity_map,
    interval_image,
    is_surjective,
    lap_count,
    pl_from_points,
    sup_distance,
    tent_map,
)
from .blowup import (
    Atlas,
    LimitMapBundle,
    build_atlas,
    build_limit_map,
    verify_hull_periodicity,
    verify_orbit_action,
)
from .constructions import (
    BlockProgram,
    LemmaParams,
    Stage,
    StageParams,
    StageSpec,
    build_eta_stage,
    build_g1inf,
    build_k_interval,
    build_lambda,
    build_main_nds,
    build_phi_stage,
    build_psi_stage,
    lemma_nds,
    lemma_phi,
    lemma_psi,
    times_R,
    times_S,
)
from .dynamics import Trajectory, iterate_from, map_at, trajectory
from .analysis import (
    EntropyTable,
    PairVerdict,
    SeparationReport,
    convergence_report,
    distality_report,
    entropy_estimate,
    eventual_constancy,
    greedy_separated,
    ly_classify,
    rho_nA,
    verify_separated,
)

__version__ = "0.1.0"
