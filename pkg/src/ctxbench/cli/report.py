"""CSV emission, summaries and static plots.

Plots are drawn only from CSV files so they can be regenerated offline.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

from ..stats import SummaryStats, binomial_sigma, ensemble_sigma

SCHEMAS = {
    "magic_square_results": ("variation", "j", "k", "shots", "wins", "win_rate",
                             "sigma_binomial", "stream"),
    "magic_square_summary": ("variation", "rule", "games", "shots", "win_rate", "sigma",
                             "sigma_kind", "classical_bound"),
    "magic_square_budget": ("variation", "mechanism", "loss", "sigma", "stream"),
    "ksb_results": ("kind", "index", "count", "mean", "sigma"),
    "ksb_summary": ("chi", "sigma", "contexts", "sequences", "shots", "nchv_bound",
                    "quantum_bound", "stream"),
    "ksb_agree": ("pauli", "compatible_rate", "compatible_n", "compatible_sigma",
                  "incompatible_rate", "incompatible_n", "incompatible_sigma"),
    "ghz_game_results": ("N", "growth_id", "game_id", "growth_seed", "shots", "wins",
                         "win_rate", "stream"),
    "ghz_game_summary": ("N", "growth_patterns", "games", "shots", "win_rate", "sigma_N",
                         "sigma_kind", "classical_bound", "classical_bound_ceil"),
    "ghz_fidelity_results": ("N", "F", "F_X", "F_Z", "sigma", "F_T1", "F_sq", "F_2q",
                             "F_ro", "F_total_analytic", "witnessed", "growth_seed", "stream"),
    "ghz_fidelity_summary": ("N_max_witnessed_mc", "N_cross_analytic", "sizes"),
    "hlf_results": ("n", "instance_id", "shots", "correct", "fraction", "effective_depth",
                    "L_classical", "n_s_gates", "n_cz_gates", "instance_seed", "stream"),
    "hlf_summary": ("n", "instances", "shots", "fraction", "sigma_N", "sigma_kind",
                    "effective_depth", "tts", "L_classical"),
}


def fmt(v) -> str:
    """Deterministic text form: repr for floats, '' for missing values."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def render_csv(schema: str, rows) -> str:
    cols = SCHEMAS[schema]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for i, row in enumerate(rows):
        if set(row) != set(cols):
            missing = sorted(set(cols) - set(row))
            extra = sorted(set(row) - set(cols))
            raise ValueError(f"{schema} row {i}: missing {missing}, unexpected {extra}")
        w.writerow([fmt(row[c]) for c in cols])
    return buf.getvalue()


def write_csv(path: Path, schema: str, rows) -> Path:
    path.write_text(render_csv(schema, rows))
    return path


def read_csv(path) -> list[dict[str, str]]:
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def emit_summary(records, kind: str) -> SummaryStats:
    """Pool replicate records into one :class:`SummaryStats`.

    ``kind="binomial"`` takes ``(wins, trials)`` pairs and pools them;
    ``kind="ensemble"`` takes replicate means and reports SD / sqrt(count).
    """
    records = list(records)
    if not records:
        raise ValueError("emit_summary needs at least one record")
    if kind == "binomial":
        wins = sum(int(w) for w, _ in records)
        trials = sum(int(t) for _, t in records)
        p = wins / trials
        return SummaryStats(p, binomial_sigma(p, trials), trials, "binomial")
    if kind == "ensemble":
        vals = [float(v) for v in records]
        return SummaryStats(sum(vals) / len(vals), ensemble_sigma(vals), len(vals), "ensemble")
    raise ValueError("kind must be 'binomial' or 'ensemble'")


# plots

def _figure():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "ctxbench"
    return plt


def _save(plt, fig, path: Path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_magic_square(results_csv, path: Path):
    plt = _figure()
    rows = read_csv(results_csv)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for var, marker in (("1", "o"), ("2", "s")):
        sub = [r for r in rows if r["variation"] == var]
        if not sub:
            continue
        x = [3 * (int(r["j"]) - 1) + int(r["k"]) for r in sub]
        ax.errorbar(x, [float(r["win_rate"]) for r in sub],
                    yerr=[float(r["sigma_binomial"]) for r in sub],
                    fmt=marker, label=f"variation {var}")
    ax.axhline(8 / 9, color="gray", ls="--", label="classical 8/9")
    ax.set_xlabel("game index (row, column)")
    ax.set_ylabel("win rate")
    ax.set_xticks(range(1, 10))
    ax.legend(loc="lower right")
    _save(plt, fig, path)


def plot_ksb(results_csv, summary_csv, path: Path):
    plt = _figure()
    rows = read_csv(results_csv)
    chi = float(read_csv(summary_csv)[0]["chi"])
    fig, ax = plt.subplots(figsize=(6, 3.5))
    labels = [f"{r['kind']}{r['index']}" for r in rows]
    ax.bar(labels, [float(r["mean"]) for r in rows],
           yerr=[float(r["sigma"]) for r in rows], color="tab:blue")
    ax.axhline(0, color="black", lw=0.5)
    ax.set_ylabel("context mean")
    ax2 = ax.twinx()
    ax2.axhline(chi, color="tab:red", label=f"chi = {chi:.3f}")
    ax2.axhline(4, color="gray", ls="--", label="NCHV bound 4")
    ax2.axhline(6, color="gray", ls=":", label="quantum value 6")
    ax2.set_ylim(0, 6.5)
    ax2.set_ylabel("chi")
    ax2.legend(loc="lower right")
    _save(plt, fig, path)


def plot_ghz_game(summary_csv, path: Path):
    plt = _figure()
    rows = read_csv(summary_csv)
    N = [int(r["N"]) for r in rows]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.errorbar(N, [float(r["win_rate"]) for r in rows],
                yerr=[float(r["sigma_N"]) for r in rows], fmt="o", label="quantum")
    ax.plot(N, [float(r["classical_bound"]) for r in rows], "k--",
            label="1/2 + 2^-floor(N/2)")
    ax.plot(N, [float(r["classical_bound_ceil"]) for r in rows], "k:",
            label="1/2 + 2^-ceil(N/2)")
    ax.set_xlabel("N")
    ax.set_ylabel("win probability")
    ax.legend()
    _save(plt, fig, path)


def plot_ghz_fidelity(results_csv, path: Path):
    plt = _figure()
    rows = read_csv(results_csv)
    N = [int(r["N"]) for r in rows]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.errorbar(N, [float(r["F"]) for r in rows], yerr=[float(r["sigma"]) for r in rows],
                fmt="o", label="Monte Carlo")
    ax.plot(N, [float(r["F_total_analytic"]) for r in rows], "-", label="analytic total")
    ax.axhline(0.5, color="gray", ls="--", label="witness 1/2")
    ax.set_xlabel("N")
    ax.set_ylabel("GHZ fidelity")
    ax.legend()
    _save(plt, fig, path)


def plot_hlf(summary_csv, path: Path):
    plt = _figure()
    rows = read_csv(summary_csv)
    n = [int(r["n"]) for r in rows]
    d = [float(r["effective_depth"]) for r in rows]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(n, d, "o-", label="effective depth")
    for x, r in zip(n, rows):
        L = float(r["L_classical"])
        ax.hlines(L, x - 2, x + 2, color="gray")
    ax.axhline(4 / (7 / 8), color="tab:red", ls="--", label="4 / (7/8)")
    ax.set_xlabel("n")
    ax.set_ylabel("two-qubit layers")
    ax.legend()
    _save(plt, fig, path)
