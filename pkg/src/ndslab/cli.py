"""Command-line front end: build artefacts, run scans, verify everything.

Exit codes: 0 when all requested checks pass, 1 when a check fails, 2 for
configuration errors.  All JSON artefacts are emitted with sorted keys and
fixed indentation, so identical configurations produce identical bytes.
Rationals serialise as "p/q" strings; floats appear only in entropy
estimates.
"""

from __future__ import annotations

import json
import os
import random
import sys
from fractions import Fraction
from itertools import combinations
from pathlib import Path

import click

from . import acceptance
from .analysis import (
    convergence_report,
    distality_report,
    entropy_estimate,
    eventual_constancy,
    ly_classify,
)
from .blowup import build_atlas, build_limit_map
from .constructions import (
    BlockProgram,
    LemmaParams,
    Stage,
    StageParams,
    StageSpec,
    build_main_nds,
    lemma_nds,
    times_R,
    times_S,
)
from .dynamics import trajectory
from .symbolic import Block, all_blocks, all_codes, canonicalize, eta_orbit, ZERO
from .plmap import PLMap, tent_map, identity_map

EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2


def _threads_env() -> int:
    """Validated parallelism cap; evaluation is sequential either way."""
    raw = os.environ.get("NDSLAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise click.UsageError(f"NDSLAB_THREADS must be an integer, got {raw!r}")
    if n < 1:
        raise click.UsageError("NDSLAB_THREADS must be >= 1")
    return n


def _frac(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise click.UsageError(f"bad rational {text!r}: {e}")


def _dump_json(path: str, payload) -> None:
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise click.UsageError(f"cannot read config {path}: {e}")


def _bundle_from_options(depth: int, rho: str, base: int):
    try:
        atlas = build_atlas(depth, _frac(rho), base)
    except ValueError as e:
        raise click.UsageError(str(e))
    return build_limit_map(atlas)


def _stage_params(cfg: dict) -> StageParams:
    if "stages" in cfg:
        specs = tuple(
            StageSpec(Block(s["block"]), int(s["a"])) for s in cfg["stages"]
        )
        return StageParams(stages=specs)
    return StageParams()


def _lemma_params(cfg: dict) -> tuple[LemmaParams, int]:
    num = int(cfg.get("num_stages", 5))
    if "repeats" in cfg:
        reps = [int(v) for v in cfg["repeats"]]
        params = LemmaParams(repeats=lambda k: reps[k - 1])
    else:
        params = LemmaParams()
    return params, num


def _build_program(family: str, cfg: dict, depth: int, rho: str, base: int):
    """Returns (program, bundle-or-None)."""
    if family == "lemma":
        params, num = _lemma_params(cfg)
        return lemma_nds(params, num), None
    if family == "main":
        bundle = _bundle_from_options(depth, rho, base)
        return build_main_nds(bundle, _stage_params(cfg)), bundle
    if family == "tent":
        return acceptance.autonomous_program(tent_map()), None
    if family == "identity":
        return acceptance.autonomous_program(identity_map()), None
    raise click.UsageError(f"unknown family {family!r}")


def _program_json(program: BlockProgram) -> dict:
    maps: list[PLMap] = []
    index: dict[int, int] = {}

    def ref(m: PLMap) -> int:
        if id(m) not in index:
            index[id(m)] = len(maps)
            maps.append(m)
        return index[id(m)]

    stages = [
        {
            "label": s.label,
            "maps": [ref(m) for m in s.maps],
            "meta": {
                k: v
                for k, v in s.meta.items()
                if isinstance(v, (int, str))
            },
        }
        for s in program.stages
    ]
    return {
        "stages": stages,
        "tail_mode": program.tail_mode,
        "tail_map": None if program.tail_map is None else ref(program.tail_map),
        "map_table": [m.to_json_dict() for m in maps],
        "frontier": [[str(l), str(r)] for l, r in program.frontier],
        "exact_horizon": program.exact_horizon,
    }


def load_program(path: str) -> BlockProgram:
    d = json.loads(Path(path).read_text())
    maps = [PLMap.from_json_dict(m) for m in d["map_table"]]
    stages = tuple(
        Stage(s["label"], tuple(maps[i] for i in s["maps"]), dict(s.get("meta", {})))
        for s in d["stages"]
    )
    tail = None if d["tail_map"] is None else maps[d["tail_map"]]
    frontier = tuple((Fraction(l), Fraction(r)) for l, r in d["frontier"])
    return BlockProgram(
        stages=stages,
        tail_mode=d["tail_mode"],
        tail_map=tail,
        frontier=frontier,
        exact_horizon=d["exact_horizon"],
    )


def _resolve_times(spec: str, params: StageParams, count: int, family: str) -> list[int]:
    if spec in ("S", "R") and family != "main":
        raise click.UsageError(
            f"times {spec} are defined by the main family's stages; "
            f"use 1..n for family {family!r}"
        )
    if spec == "S":
        return times_S(params, count)
    if spec == "R":
        return times_R(params, 1, count)
    if spec.startswith("1.."):
        n = int(spec[3:])
        return list(range(1, n + 1))
    raise click.UsageError(f"unknown times spec {spec!r} (use R, S or 1..n)")


def _check_horizon(program: BlockProgram, needed: int) -> None:
    if program.exact_horizon is not None and needed > program.exact_horizon:
        raise click.UsageError(
            f"requested horizon {needed} exceeds the exact horizon "
            f"{program.exact_horizon} of the configured atlas"
        )


@click.group()
def main():
    """Exact nonautonomous interval-dynamics laboratory."""
    _threads_env()


@main.command("build-atlas")
@click.option("--depth", type=int, default=12, show_default=True)
@click.option("--rho", default="1/2", show_default=True)
@click.option("--base", type=int, default=4, show_default=True)
@click.option("-o", "out", default="atlas.json", show_default=True)
def build_atlas_cmd(depth, rho, base, out):
    """Write the blown-interval layout as JSON."""
    bundle = _bundle_from_options(depth, rho, base)
    payload = bundle.atlas.to_json_dict()
    payload["exact_horizon"] = bundle.exact_horizon
    payload["frontier_codes"] = sorted(str(c) for c in bundle.frontier_codes)
    _dump_json(out, payload)
    click.echo(f"atlas with {bundle.atlas.size} intervals -> {out}")


@main.command("build-nds")
@click.option("--family", type=click.Choice(["lemma", "main", "tent", "identity"]), required=True)
@click.option("--config", "config_path", default=None, help="JSON stage configuration")
@click.option("--depth", type=int, default=12, show_default=True)
@click.option("--rho", default="1/2", show_default=True)
@click.option("--base", type=int, default=4, show_default=True)
@click.option("-o", "out", default="program.json", show_default=True)
def build_nds_cmd(family, config_path, depth, rho, base, out):
    """Build a block program and write it (maps included) as JSON."""
    cfg = _load_config(config_path)
    program, _ = _build_program(family, cfg, depth, rho, base)
    _dump_json(out, _program_json(program))
    click.echo(
        f"{family} program: stages {[len(s.maps) for s in program.stages]} -> {out}"
    )


@main.command("trajectory")
@click.option("--program", "program_path", required=True)
@click.option("--x", "x_text", required=True, help="start point p/q")
@click.option("--steps", type=int, required=True)
@click.option("-o", "out", default="trajectory.csv", show_default=True)
def trajectory_cmd(program_path, x_text, steps, out):
    """Iterate a point and write t,value_num,value_den,flag rows."""
    program = load_program(program_path)
    x = _frac(x_text)
    if not 0 <= x <= 1:
        raise click.UsageError("start point must lie in [0,1]")
    traj = trajectory(program, x, steps)
    lines = ["t,value_num,value_den,flag"]
    lines += [f"{t},{n},{d},{int(fl)}" for t, n, d, fl in traj.rows()]
    Path(out).write_text("\n".join(lines) + "\n")
    click.echo(f"{steps} steps -> {out} (tainted: {traj.tainted})")


@main.command("dump-map")
@click.option("--program", "program_path", required=True)
@click.option("--t", "time_index", type=int, default=1, show_default=True)
@click.option("--grid", type=int, default=256, show_default=True)
@click.option("-o", "out", default="map.csv", show_default=True)
def dump_map_cmd(program_path, time_index, grid, out):
    """Sample the map applied at time t on a uniform grid, as x,y CSV."""
    from .plmap import graph_samples

    program = load_program(program_path)
    if time_index < 1:
        raise click.UsageError("time starts at 1")
    if grid < 1:
        raise click.UsageError("grid must be >= 1")
    f = program.map_at(time_index)
    lines = ["x,y"] + [f"{x},{y}" for x, y in graph_samples(f, grid)]
    Path(out).write_text("\n".join(lines) + "\n")
    click.echo(f"map at t={time_index} on {grid + 1} grid points -> {out}")


@main.command("entropy")
@click.option("--family", type=click.Choice(["lemma", "main", "tent", "identity"]), required=True)
@click.option("--config", "config_path", default=None)
@click.option("--depth", type=int, default=12, show_default=True)
@click.option("--rho", default="1/2", show_default=True)
@click.option("--base", type=int, default=4, show_default=True)
@click.option("--times", "times_spec", default="S", show_default=True, help="R, S or 1..n")
@click.option("--epsilon", multiple=True, help="scales; default family-specific")
@click.option("--count", type=int, default=8, show_default=True, help="times to take")
@click.option("--min-headline", type=float, default=None, help="fail below this")
@click.option("-o", "out", default="entropy.json", show_default=True)
def entropy_cmd(family, config_path, depth, rho, base, times_spec, epsilon, count, min_headline, out):
    """Greedy separated-set entropy table for a program."""
    cfg = _load_config(config_path)
    program, bundle = _build_program(family, cfg, depth, rho, base)
    params = _stage_params(cfg)
    A = _resolve_times(times_spec, params, count, family)
    if family == "main":
        assert bundle is not None
        cands = acceptance.main_candidates(bundle)
        eps_default = [acceptance.epsilon_zero(bundle) / 2]
    else:
        cands = [Fraction(j, 2 ** 12) for j in range(2 ** 12 + 1)]
        eps_default = [Fraction(1, 6)]
    epsilons = [_frac(e) for e in epsilon] or eps_default
    n_list = sorted({1, max(1, len(A) // 2), len(A)})
    table = entropy_estimate(program, A, epsilons, n_list, cands)
    _dump_json(out, table.to_json_dict())
    click.echo(f"headline {table.headline:.6g} -> {out}")
    if min_headline is not None and table.headline < min_headline:
        sys.exit(EXIT_CHECK_FAILED)


@main.command("ly-scan")
@click.option("--depth", type=int, default=12, show_default=True)
@click.option("--rho", default="1/2", show_default=True)
@click.option("--base", type=int, default=4, show_default=True)
@click.option("--config", "config_path", default=None)
@click.option("--pairs", type=int, default=1000, show_default=True)
@click.option("--max-code-depth", type=int, default=2, show_default=True)
@click.option("--delta", default=None, help="closeness scale; default eps0/4")
@click.option("--seed", type=int, default=11, show_default=True)
@click.option("-o", "out", default="ly_scan.json", show_default=True)
def ly_scan_cmd(depth, rho, base, config_path, pairs, max_code_depth, delta, seed, out):
    """Classify sampled pairs from distinct blown intervals; fail on LY."""
    cfg = _load_config(config_path)
    program, bundle = _build_program("main", cfg, depth, rho, base)
    assert bundle is not None
    T = program.stage_length
    dl = _frac(delta) if delta else acceptance.epsilon_zero(bundle) / 4
    rng = random.Random(seed)
    groups = [
        acceptance.grid_in(*bundle.atlas.interval_of(c), 10)
        for c in bundle.atlas.codes
        if c.depth <= max_code_depth
    ]
    counts = {"LY-candidate": 0, "asymptotic-candidate": 0, "distal-candidate": 0}
    made = 0
    while made < pairs:
        gi, gj = rng.randrange(len(groups)), rng.randrange(len(groups))
        if gi == gj:
            continue
        verdict = ly_classify(program, rng.choice(groups[gi]), rng.choice(groups[gj]), T, dl)
        counts[verdict.classification] += 1
        made += 1
    payload = {"delta": str(dl), "horizon": T, "pairs": pairs, "counts": counts}
    _dump_json(out, payload)
    click.echo(f"{counts} -> {out}")
    if counts["LY-candidate"] > 0:
        sys.exit(EXIT_CHECK_FAILED)


@main.command("settle-scan")
@click.option("--depth", type=int, default=12, show_default=True)
@click.option("--rho", default="1/2", show_default=True)
@click.option("--base", type=int, default=4, show_default=True)
@click.option("--config", "config_path", default=None)
@click.option("-o", "out", default="settle_scan.json", show_default=True)
def settle_scan_cmd(depth, rho, base, config_path, out):
    """Check sampled points for exactly constant trajectory tails."""
    cfg = _load_config(config_path)
    program, bundle = _build_program("main", cfg, depth, rho, base)
    assert bundle is not None
    params = _stage_params(cfg)
    T = program.stage_length
    pts = acceptance.settle_sample_points(bundle, params)
    settled = sum(1 for x in pts if eventual_constancy(program, x, T) is not None)
    payload = {"horizon": T, "sampled": len(pts), "settled": settled}
    _dump_json(out, payload)
    click.echo(f"{settled}/{len(pts)} settle -> {out}")
    if settled < len(pts):
        sys.exit(EXIT_CHECK_FAILED)


@main.command("distality")
@click.option("--depth", type=int, default=12, show_default=True)
@click.option("--rho", default="1/2", show_default=True)
@click.option("--base", type=int, default=4, show_default=True)
@click.option("--config", "config_path", default=None)
@click.option("--max-code-depth", type=int, default=4, show_default=True)
@click.option("--steps", type=int, default=None, help="default 2^(depth-2)")
@click.option("-o", "out", default="distality.json", show_default=True)
def distality_cmd(depth, rho, base, config_path, max_code_depth, steps, out):
    """Verify split-depth gap bounds for interval pairs."""
    cfg = _load_config(config_path)
    program, bundle = _build_program("main", cfg, depth, rho, base)
    assert bundle is not None
    T = steps if steps is not None else 2 ** (depth - 2)
    _check_horizon(program, T)
    pairs = list(combinations(all_codes(max_code_depth), 2))
    rows = distality_report(bundle, program, pairs, T)
    bad = [r for r in rows if not r.ok]
    _dump_json(out, {"steps": T, "rows": [r.to_json_dict() for r in rows]})
    click.echo(f"{len(rows) - len(bad)}/{len(rows)} pairs hold -> {out}")
    if bad:
        sys.exit(EXIT_CHECK_FAILED)


@main.command("convergence")
@click.option("--depth", type=int, default=12, show_default=True)
@click.option("--rho", default="1/2", show_default=True)
@click.option("--base", type=int, default=4, show_default=True)
@click.option("--config", "config_path", default=None)
@click.option("-o", "out", default="convergence.json", show_default=True)
def convergence_cmd(depth, rho, base, config_path, out):
    """Per-stage uniform-distance envelopes against the limit map."""
    cfg = _load_config(config_path)
    program, bundle = _build_program("main", cfg, depth, rho, base)
    assert bundle is not None
    rows, strict = convergence_report(program, bundle.f)
    payload = {
        "rows": [r.to_json_dict() for r in rows],
        "strictly_decreasing": strict,
    }
    _dump_json(out, payload)
    click.echo(
        "envelopes: "
        + ", ".join(f"{r.label}={float(r.envelope):.5f}" for r in rows)
        + f" -> {out}"
    )
    if not strict or not all(r.within_bound for r in rows):
        sys.exit(EXIT_CHECK_FAILED)


@main.command("verify-lemma-lm")
@click.option("--max-k", type=int, default=6, show_default=True)
def verify_lemma_lm_cmd(max_k):
    """Exhaustive reversing-step orbit checks for all blocks up to max-k."""
    checked = 0
    for k in range(1, max_k + 1):
        for w in all_blocks(k):
            orbit = eta_orbit(w, ZERO, 2 ** k)
            inside = [c for c in orbit[:-1] if c.starts_with(w.word)]
            ok = (
                orbit[-1] == ZERO
                and len(set(orbit[:-1])) == 2 ** k
                and inside == [canonicalize(w.word, 0)]
            )
            if not ok:
                click.echo(f"FAIL at block {w.word}")
                sys.exit(EXIT_CHECK_FAILED)
            checked += 1
    click.echo(f"{checked} blocks verified (orbit closure and single cylinder visit)")


@main.command("verify-all")
def verify_all_cmd():
    """Run the full acceptance battery; exit 0 only if every line passes."""
    results = acceptance.run_all(echo=click.echo)
    if not all(r.ok for r in results):
        sys.exit(EXIT_CHECK_FAILED)


if __name__ == "__main__":
    main()
