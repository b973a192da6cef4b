"""Report emission: machine-readable JSON plus aligned-column text tables
(one row per sampling strategy, one table per budget sweep)."""

from __future__ import annotations

import json
from typing import Optional

from .metrics import ChannelStat, DiversityReport, ModelRanking, OodReport, RankingFidelity
from .simulator import ExperimentReport, StrategyResult


def _fmt(value: float, digits: int = 3) -> str:
    return f"{value:.{digits}f}"


def strategy_result_to_dict(row: StrategyResult) -> dict:
    out = {
        "strategy": row.strategy,
        "budget": row.budget,
        "srcc": {
            "mean": row.fidelity.srcc_mean,
            "std": row.fidelity.srcc_std,
            "ci95": [row.fidelity.ci95_low, row.fidelity.ci95_high],
            "rounds": row.fidelity.bootstrap_rounds,
        },
        "chi2": {"statistic": row.diversity.chi2, "p_value": row.diversity.p_value},
        "mean_dmos": {
            channel: {
                "mean": stat.mean,
                "ci95": [stat.ci95_low, stat.ci95_high],
                "count": stat.count,
            }
            for channel, stat in row.mean_dmos.items()
        },
    }
    if row.ood is not None:
        out["ood"] = {
            "fraction": row.ood.fraction,
            "labeled": row.ood.n_labeled,
            "unlabeled": row.ood.n_unlabeled,
        }
    return out


def experiment_to_dict(report: ExperimentReport) -> dict:
    return {
        "k": report.k,
        "rounds": report.rounds,
        "seed": report.seed,
        "channel": report.channel,
        "rows": [strategy_result_to_dict(r) for r in report.rows],
    }


def format_experiment_table(report: ExperimentReport) -> str:
    """Strategy comparison in aligned columns."""
    header = ["strategy", "budget", "srcc", "+/-std", "chi2", "p", "ood%", "dmos(ovrl)"]
    rows = [header]
    for r in report.rows:
        ood = _fmt(100.0 * r.ood.fraction, 1) if r.ood is not None else "-"
        rows.append([
            r.strategy,
            str(r.budget),
            _fmt(r.fidelity.srcc_mean),
            _fmt(r.fidelity.srcc_std),
            _fmt(r.diversity.chi2, 1),
            _fmt(r.diversity.p_value, 4),
            ood,
            _fmt(r.mean_dmos["ovrl"].mean),
        ])
    widths = [max(len(row[c]) for row in rows) for c in range(len(header))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.rjust(widths[c]) for c, cell in enumerate(row)))
        if i == 0:
            lines.append("  ".join("-" * widths[c] for c in range(len(header))))
    return "\n".join(lines) + "\n"


def format_ranking_table(ranking: ModelRanking) -> str:
    order = sorted(range(len(ranking.model_ids)), key=lambda j: ranking.ranks[j])
    width = max(len(m) for m in ranking.model_ids)
    lines = [f"{'model'.ljust(width)}  {'rank':>5}  {'mean_dmos':>10}"]
    for j in order:
        lines.append(
            f"{ranking.model_ids[j].ljust(width)}  {ranking.ranks[j]:>5.1f}  "
            f"{ranking.mean_dmos[j]:>10.4f}"
        )
    return "\n".join(lines) + "\n"


def sample_report_to_dict(diversity: DiversityReport,
                          fidelity: Optional[RankingFidelity],
                          srcc_point: Optional[float],
                          ood: Optional[OodReport],
                          dmos_stats: dict[str, ChannelStat]) -> dict:
    out = {
        "chi2": {"statistic": diversity.chi2, "p_value": diversity.p_value,
                 "cluster_counts": diversity.cluster_counts},
        "mean_dmos": {
            channel: {"mean": s.mean, "ci95": [s.ci95_low, s.ci95_high], "count": s.count}
            for channel, s in dmos_stats.items()
        },
    }
    if srcc_point is not None:
        out["srcc_vs_full"] = srcc_point
    if fidelity is not None:
        out["srcc_bootstrap"] = {
            "mean": fidelity.srcc_mean, "std": fidelity.srcc_std,
            "ci95": [fidelity.ci95_low, fidelity.ci95_high],
            "rounds": fidelity.bootstrap_rounds,
        }
    if ood is not None:
        out["ood"] = {"fraction": ood.fraction, "labeled": ood.n_labeled,
                      "unlabeled": ood.n_unlabeled}
    return out


def format_sample_report(data: dict) -> str:
    lines = []
    chi2 = data["chi2"]
    lines.append(f"chi2 statistic : {chi2['statistic']:.2f} (p = {chi2['p_value']:.4f})")
    if "srcc_vs_full" in data:
        lines.append(f"srcc vs full   : {data['srcc_vs_full']:.4f}")
    if "srcc_bootstrap" in data:
        b = data["srcc_bootstrap"]
        lines.append(
            f"srcc bootstrap : {b['mean']:.4f} +/- {b['std']:.4f} "
            f"(95% CI [{b['ci95'][0]:.4f}, {b['ci95'][1]:.4f}], {b['rounds']} rounds)"
        )
    if "ood" in data:
        o = data["ood"]
        lines.append(
            f"ood fraction   : {o['fraction']:.4f} "
            f"({o['labeled']} labeled, {o['unlabeled']} unlabeled)"
        )
    for channel, s in data["mean_dmos"].items():
        lines.append(
            f"dmos {channel:<5}     : {s['mean']:+.4f} "
            f"(95% CI [{s['ci95'][0]:+.4f}, {s['ci95'][1]:+.4f}])"
        )
    return "\n".join(lines) + "\n"


def write_json(path, data: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
