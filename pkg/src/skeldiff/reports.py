"""Report rendering: JSON + CSV tables with matplotlib figures alongside."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

# gate-count buckets: 2-10, 11-20, ... up to 121-130
HISTOGRAM_EDGES = [(2, 10)] + [(lo, lo + 9) for lo in range(11, 130, 10)]


def _save_fig(fig, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)


def gate_count_histogram(counts: list[int]) -> list[dict]:
    rows = []
    below = sum(1 for c in counts if c < 2)
    if below:
        rows.append({"bucket": "0-1", "lo": 0, "hi": 1, "variants": below})
    for lo, hi in HISTOGRAM_EDGES:
        rows.append({"bucket": f"{lo}-{hi}", "lo": lo, "hi": hi,
                     "variants": sum(1 for c in counts if lo <= c <= hi)})
    above = sum(1 for c in counts if c > HISTOGRAM_EDGES[-1][1])
    if above:
        lo = HISTOGRAM_EDGES[-1][1] + 1
        rows.append({"bucket": f">={lo}", "lo": lo, "hi": None, "variants": above})
    while rows and rows[-1]["variants"] == 0:
        rows.pop()
    return rows


def histogram_text_table(rows: list[dict]) -> str:
    width = max((len(r["bucket"]) for r in rows), default=5)
    lines = [f"{'gates':<{width}}  variants"]
    for r in rows:
        lines.append(f"{r['bucket']:<{width}}  {r['variants']}")
    return "\n".join(lines)


def write_stats_outputs(counts: list[int], reduction: dict, outdir: str | Path) -> dict:
    """Gate-count histogram + reduction summary as JSON, CSV, and figures."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    rows = gate_count_histogram(counts)
    payload = {"histogram": rows, "reduction": reduction,
               "total_variants": len(counts)}
    (out / "stats.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")

    with (out / "histogram.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["bucket", "lo", "hi", "variants"])
        writer.writeheader()
        writer.writerows(rows)

    if rows:
        fig, ax = plt.subplots(figsize=(7, 3.2))
        ax.bar(range(len(rows)), [r["variants"] for r in rows], color="#336699")
        ax.set_xticks(range(len(rows)))
        ax.set_xticklabels([r["bucket"] for r in rows], rotation=45, ha="right")
        ax.set_xlabel("gates per lowered circuit")
        ax.set_ylabel("variants")
        _save_fig(fig, out / "gate_histogram.png")

    if reduction:
        names = sorted(reduction)
        rates = [reduction[n]["reduction_rate"] for n in names]
        fig, ax = plt.subplots(figsize=(7, 3.2))
        ax.bar(range(len(names)), rates, color="#993344")
        ax.axhline(0.9, color="black", linewidth=0.8, linestyle="--")
        ax.set_xticks(range(len(names)))
        ax.set_xticklabels(names, rotation=60, ha="right", fontsize=7)
        ax.set_ylabel("reduction rate")
        ax.set_ylim(0, 1.0)
        _save_fig(fig, out / "reduction_rates.png")
    return payload


def write_campaign_outputs(report, outdir: str | Path) -> None:
    """report.json plus verdicts.csv, ks_table.csv, and summary figures."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(
        json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n")

    with (out / "verdicts.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["variant", "rule", "kind", "fidelity", "side", "error"],
            extrasaction="ignore")
        writer.writeheader()
        writer.writerows(report.verdicts)

    if report.ks_table:
        with (out / "ks_table.csv").open("w", newline="") as fh:
            writer = csv.DictWriter(
                fh, fieldnames=["shots", "trials", "frac_K_gt_t", "median_K"])
            writer.writeheader()
            writer.writerows(report.ks_table)

        fig, ax = plt.subplots(figsize=(5.4, 3.2))
        shots = [row["shots"] for row in report.ks_table]
        ax.plot(shots, [row["median_K"] for row in report.ks_table],
                marker="o", label="median K")
        ax.plot(shots, [row["frac_K_gt_t"] for row in report.ks_table],
                marker="s", label="fraction K > t")
        ax.set_xscale("log")
        ax.set_xlabel("measurement shots")
        ax.legend()
        _save_fig(fig, out / "ks_convergence.png")

    per_rule: dict[str, int] = {}
    for row in report.verdicts:
        if row["kind"] == "mismatch":
            per_rule[row["rule"]] = per_rule.get(row["rule"], 0) + 1
    fig, ax = plt.subplots(figsize=(4.4, 3.0))
    rules = sorted({row["rule"] for row in report.verdicts})
    ax.bar(range(len(rules)), [per_rule.get(r, 0) for r in rules], color="#447744")
    ax.set_xticks(range(len(rules)))
    ax.set_xticklabels(rules)
    ax.set_ylabel("mismatches")
    _save_fig(fig, out / "mismatches_by_rule.png")
