"""Experiment orchestration with per-instance random streams.

Every instance draws from ``SeedSequence(seed, spawn_key=(experiment_id,
*instance_index))``, so results do not depend on scheduling or thread count.
The stream label ``seed/experiment_id/index...`` is written to the CSVs.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .. import ghz_budget, hlf, ksb
from ..games import ghz, magic_square
from ..grid import GridGraph
from . import report
from .config import RunConfig

EXPERIMENT_IDS = {"magic_square": 1, "ksb": 2, "ghz_game": 3, "ghz_fidelity": 4, "hlf": 5}
CROSSING_SCAN = range(2, 201)


def stream(seed: int, experiment: str, *index: int):
    """Generator for one instance and its recorded label."""
    key = (EXPERIMENT_IDS[experiment],) + tuple(int(i) for i in index)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))
    return rng, "/".join(str(v) for v in (seed,) + key)


def _map(fn, tasks, threads: int):
    if threads <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def run_magic_square(cfg: RunConfig, out: Path, threads: int) -> list[Path]:
    noise, shots = cfg.noise_params(), cfg.shots_per_instance
    tasks = [(v, j, k) for v in cfg.variations for j in (1, 2, 3) for k in (1, 2, 3)]

    def one(task):
        v, j, k = task
        rng, label = stream(cfg.seed, "magic_square", v, j, k)
        kw = {"rule": cfg.rule} if v == 2 else {}
        g = magic_square.play(v, j, k, noise, rng, shots, **kw)
        return {"variation": v, "j": j, "k": k, "shots": g.shots, "wins": g.wins,
                "win_rate": g.win_rate, "sigma_binomial": g.sigma, "stream": label}

    rows = _map(one, tasks, threads)
    summary = []
    for v in cfg.variations:
        sub = [r for r in rows if r["variation"] == v]
        s = report.emit_summary([(r["wins"], r["shots"]) for r in sub], "binomial")
        summary.append({"variation": v, "rule": cfg.rule if v == 2 else "", "games": len(sub),
                        "shots": shots, "win_rate": s.mean, "sigma": s.sigma,
                        "sigma_kind": s.kind, "classical_bound": 8 / 9})
    paths = [report.write_csv(out / "magic_square_results.csv", "magic_square_results", rows),
             report.write_csv(out / "magic_square_summary.csv", "magic_square_summary", summary)]
    if cfg.budget:
        budget = []
        for v in cfg.variations:
            rng, label = stream(cfg.seed, "magic_square", v, 0, 0)
            for r in magic_square.error_budget(v, noise, shots, rng):
                budget.append({"variation": v, **r, "stream": label})
        paths.append(report.write_csv(out / "magic_square_budget.csv", "magic_square_budget", budget))
    report.plot_magic_square(paths[0], out / "magic_square.svg")
    return paths + [out / "magic_square.svg"]


def _pool_agree(stats_list):
    out = {}
    for label in ksb.CELL_LABELS:
        row = {"pauli": label}
        for side in ("compatible", "incompatible"):
            n = sum(getattr(s[label], f"{side}_n") for s in stats_list)
            hits = sum(getattr(s[label], f"{side}_rate") * getattr(s[label], f"{side}_n")
                       for s in stats_list if getattr(s[label], f"{side}_n"))
            rate = hits / n if n else None
            row[f"{side}_rate"] = rate
            row[f"{side}_n"] = n
            row[f"{side}_sigma"] = math.sqrt(rate * (1 - rate) / n) if n else None
        out[label] = row
    return [out[label] for label in ksb.CELL_LABELS]


def run_ksb(cfg: RunConfig, out: Path, threads: int) -> list[Path]:
    noise, shots = cfg.noise_params(), cfg.shots_per_instance

    def one(s):
        rng, label = stream(cfg.seed, "ksb", s)
        seq = ksb.random_context_sequence(cfg.contexts, rng)
        return ksb.run_ksb(seq, shots, noise, rng, cfg.initial), label

    runs = _map(one, range(cfg.sequences), threads)
    summ = ksb.chi_ksb([r for r, _ in runs])
    rows = [{"kind": ctx.kind, "index": ctx.index, "count": summ.counts[ctx.label],
             "mean": summ.means[ctx.label], "sigma": summ.sigmas[ctx.label]}
            for ctx in ksb.CONTEXTS]
    summary = [{"chi": summ.chi, "sigma": summ.sigma, "contexts": cfg.contexts,
                "sequences": cfg.sequences, "shots": shots, "nchv_bound": 4,
                "quantum_bound": 6, "stream": ";".join(label for _, label in runs)}]
    agree = _pool_agree([ksb.p_agree_stats(r) for r, _ in runs])
    paths = [report.write_csv(out / "ksb_results.csv", "ksb_results", rows),
             report.write_csv(out / "ksb_summary.csv", "ksb_summary", summary),
             report.write_csv(out / "ksb_agree.csv", "ksb_agree", agree)]
    report.plot_ksb(paths[0], paths[1], out / "ksb.svg")
    return paths + [out / "ksb.svg"]


def run_ghz_game(cfg: RunConfig, out: Path, threads: int) -> list[Path]:
    noise, shots = cfg.noise_params(), cfg.shots_per_instance
    tasks = [(N, g) for N in cfg.N for g in range(cfg.growth_seeds)]
    grids = {N: GridGraph.centered(N) for N in cfg.N}

    def one(task):
        N, g = task
        rng, label = stream(cfg.seed, "ghz_game", N, g)
        growth_seed = int(rng.integers(2**63))
        growth = ghz.bfs_growth(grids[N], np.random.default_rng(growth_seed))
        rows = []
        for q in range(cfg.games):
            inst = ghz.GhzGameInstance.create(ghz.sample_questions(N, rng), growth_seed, grids[N])
            win = ghz.play_ghz_game(inst, noise, rng, shots, growth=growth)
            rows.append({"N": N, "growth_id": g, "game_id": q, "growth_seed": growth_seed,
                         "shots": shots, "wins": int(win.sum()), "win_rate": float(win.mean()),
                         "stream": label})
        return rows

    rows = [r for chunk in _map(one, tasks, threads) for r in chunk]
    summary = []
    for N in cfg.N:
        per_growth = [np.mean([r["win_rate"] for r in rows if r["N"] == N and r["growth_id"] == g])
                      for g in range(cfg.growth_seeds)]
        s = report.emit_summary(per_growth, "ensemble")
        summary.append({"N": N, "growth_patterns": cfg.growth_seeds, "games": cfg.games,
                        "shots": shots, "win_rate": s.mean, "sigma_N": s.sigma,
                        "sigma_kind": s.kind, "classical_bound": ghz.classical_bound_formula(N),
                        "classical_bound_ceil": ghz.classical_bound_ceil(N)})
    paths = [report.write_csv(out / "ghz_game_results.csv", "ghz_game_results", rows),
             report.write_csv(out / "ghz_game_summary.csv", "ghz_game_summary", summary)]
    report.plot_ghz_game(paths[1], out / "ghz_game.svg")
    return paths + [out / "ghz_game.svg"]


def analytic_crossing(noise, seed: int, dd_pulses: int = 0, sizes=CROSSING_SCAN):
    """First N whose analytic F_total drops below 1/2, or None."""
    for N in sizes:
        rng, _ = stream(seed, "ghz_fidelity", N, 1)
        growth = ghz.bfs_growth(GridGraph.centered(N), rng)
        sched = ghz_budget.schedule_from_growth(growth, noise, dd_pulses)
        if ghz_budget.f_total(noise, N, sched).F_total < 0.5:
            return N
    return None


def run_ghz_fidelity(cfg: RunConfig, out: Path, threads: int) -> list[Path]:
    noise, shots = cfg.noise_params(), cfg.shots_per_instance

    def one(N):
        rng, label = stream(cfg.seed, "ghz_fidelity", N, 0)
        growth_seed = int(rng.integers(2**63))
        growth = ghz.bfs_growth(GridGraph.centered(N), np.random.default_rng(growth_seed))
        mc = ghz_budget.estimate_fidelity_mc(growth, noise, ghz_budget.default_m(N, cfg.m),
                                             shots, rng, rotation_noise=False)
        an = ghz_budget.f_total(noise, N, ghz_budget.schedule_from_growth(growth, noise,
                                                                           cfg.dd_pulses))
        return {"N": N, "F": mc.F, "F_X": mc.F_X, "F_Z": mc.F_Z, "sigma": mc.sigma,
                "F_T1": an.F_T1, "F_sq": an.F_sq, "F_2q": an.F_2q, "F_ro": an.F_readout,
                "F_total_analytic": an.F_total, "witnessed": mc.witnessed,
                "growth_seed": growth_seed, "stream": label}

    rows = _map(one, cfg.N, threads)
    witnessed = [r["N"] for r in rows if r["witnessed"]]
    summary = [{"N_max_witnessed_mc": max(witnessed) if witnessed else None,
                "N_cross_analytic": analytic_crossing(noise, cfg.seed, cfg.dd_pulses),
                "sizes": ";".join(str(N) for N in cfg.N)}]
    paths = [report.write_csv(out / "ghz_fidelity_results.csv", "ghz_fidelity_results", rows),
             report.write_csv(out / "ghz_fidelity_summary.csv", "ghz_fidelity_summary", summary)]
    report.plot_ghz_fidelity(paths[0], out / "ghz_fidelity.svg")
    return paths + [out / "ghz_fidelity.svg"]


def run_hlf(cfg: RunConfig, out: Path, threads: int) -> list[Path]:
    noise, shots = cfg.noise_params(), cfg.shots_per_instance
    grids = {n: GridGraph.centered(n) for n in cfg.sizes}
    tasks = [(n, i) for n in cfg.sizes for i in range(cfg.instances)]
    inst_dir = out / "hlf_instances"
    if cfg.save_instances:
        inst_dir.mkdir(exist_ok=True)

    def one(task):
        n, i = task
        rng, label = stream(cfg.seed, "hlf", n, i)
        inst_seed = int(rng.integers(2**63))
        inst = hlf.random_instance(grids[n], cfg.p_gate, np.random.default_rng(inst_seed),
                                   seed=inst_seed)
        if cfg.save_instances:
            hlf.write_instance(inst, inst_dir / f"n{n}_i{i}.txt")
        r = hlf.run_instance(inst, noise, shots, rng)
        return {"n": n, "instance_id": i, "shots": r.shots, "correct": r.correct,
                "fraction": r.fraction, "effective_depth": r.effective_depth,
                "L_classical": r.L_classical, "n_s_gates": r.n_s_gates,
                "n_cz_gates": r.n_cz_gates, "instance_seed": inst_seed, "stream": label}

    rows = _map(one, tasks, threads)
    summary = []
    for n in cfg.sizes:
        s = report.emit_summary([r["fraction"] for r in rows if r["n"] == n], "ensemble")
        summary.append({"n": n, "instances": cfg.instances, "shots": shots, "fraction": s.mean,
                        "sigma_N": s.sigma, "sigma_kind": s.kind,
                        "effective_depth": hlf.effective_depth(min(1.0, s.mean)),
                        "tts": hlf.tts(hlf.CZ_LAYERS, min(1.0, s.mean)),
                        "L_classical": hlf.classical_depth_bound(grids[n])})
    paths = [report.write_csv(out / "hlf_results.csv", "hlf_results", rows),
             report.write_csv(out / "hlf_summary.csv", "hlf_summary", summary)]
    report.plot_hlf(paths[1], out / "hlf.svg")
    return paths + [out / "hlf.svg"]


RUNNERS = {"magic_square": run_magic_square, "ksb": run_ksb, "ghz_game": run_ghz_game,
           "ghz_fidelity": run_ghz_fidelity, "hlf": run_hlf}


def run(cfg: RunConfig, out: Path, threads: int = 1) -> list[Path]:
    cfg.validate()
    out.mkdir(parents=True, exist_ok=True)
    return RUNNERS[cfg.experiment](cfg, out, threads)
