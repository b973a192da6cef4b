"""Command-line orchestration.

Subcommands: ingest, cluster, sample, rank, report, simulate, pipeline.
Every command takes an explicit seed where randomness is involved; there
is no wall-clock default, so any run can be replayed exactly.

Exit codes: 0 success, 1 internal error, 2 invalid input or config.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import clustering, dataset, metrics, reports, sampling, simulator

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INVALID = 2


class ConfigError(ValueError):
    pass


def _load_config_file(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    text = p.read_text(encoding="utf-8")
    if p.suffix == ".toml":
        try:
            import tomllib
        except ImportError:
            raise ConfigError("TOML configs need Python >= 3.11; use JSON") from None
        return tomllib.loads(text)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None


def _require(value, name: str):
    if value is None:
        raise ConfigError(f"missing required option: {name}")
    return value


def _parse_k_grid(raw) -> list[int]:
    if isinstance(raw, str):
        raw = [part for part in raw.replace(",", " ").split() if part]
    try:
        grid = [int(v) for v in raw]
    except (TypeError, ValueError):
        raise ConfigError(f"bad k grid: {raw!r}") from None
    if not grid:
        raise ConfigError("k grid is empty")
    return grid


def _load_baseline_labels(path: str) -> list[str]:
    try:
        labels = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read baseline labels {path}: {exc}") from None
    if not isinstance(labels, list) or not all(isinstance(v, str) for v in labels):
        raise ConfigError(f"{path}: baseline labels must be a JSON list of strings")
    return labels


def cmd_ingest(args) -> int:
    collection = dataset.load_collection(args.manifest, args.embeddings)
    if args.out_manifest or args.out_embeddings:
        _require(args.out_manifest, "--out-manifest")
        _require(args.out_embeddings, "--out-embeddings")
        dataset.write_collection(collection, args.out_manifest, args.out_embeddings)
    coverage = dataset.label_coverage(collection)
    print(
        f"{len(collection)} clips, dim {collection.dim}, "
        f"{len(collection.model_ids)} models"
    )
    print(f"label coverage: {coverage:.1%}")
    return EXIT_OK


def cmd_cluster(args) -> int:
    collection = dataset.load_collection(args.manifest, args.embeddings)
    grid = _parse_k_grid(args.k_grid)
    model = clustering.select_k(
        collection.embeddings.astype(np.float64),
        grid,
        seed=_require(args.seed, "--seed"),
        restarts=args.restarts,
        max_iter=args.max_iter,
        tol=args.tol,
    )
    clustering.save_cluster_model(model, args.out_clusters, args.out_summary)
    print(f"selected k={model.k} (davies-bouldin {model.db_index:.4f})")
    return EXIT_OK


def cmd_sample(args) -> int:
    collection = dataset.load_collection(args.manifest, args.embeddings)
    cluster_model = None
    if args.clusters:
        cluster_model = clustering.load_cluster_model(args.clusters)
    config = sampling.SamplingConfig(
        budget=_require(args.budget, "--budget"),
        mode=args.mode,
        channel=args.channel,
        seed=_require(args.seed, "--seed"),
        epsilon=args.epsilon,
    )
    manifest = sampling.draw_sample(collection, cluster_model, config)
    k = cluster_model.k if cluster_model is not None else None
    sampling.write_sample_manifest(manifest, args.out, k=k)
    print(f"wrote {len(manifest.entries)} entries to {args.out}")
    return EXIT_OK


def cmd_rank(args) -> int:
    collection = dataset.load_collection(args.manifest, args.embeddings)
    sample = None
    if args.sample:
        sample = sampling.read_sample_manifest(args.sample)
    ranking = metrics.rank_models(collection, args.channel, sample)
    sys.stdout.write(reports.format_ranking_table(ranking))
    if args.json:
        reports.write_json(args.json, {
            "channel": args.channel,
            "models": [
                {"model_id": m, "mean_dmos": float(ranking.mean_dmos[j]),
                 "rank": float(ranking.ranks[j])}
                for j, m in enumerate(ranking.model_ids)
            ],
        })
    return EXIT_OK


def cmd_report(args) -> int:
    collection = dataset.load_collection(args.manifest, args.embeddings)
    cluster_model = clustering.load_cluster_model(args.clusters)
    sample = sampling.read_sample_manifest(args.sample)

    counts = metrics.sample_cluster_counts(sample, collection, cluster_model)
    diversity = metrics.chi_square_uniformity(counts)
    full = metrics.rank_models(collection, args.channel)
    sub = metrics.rank_models(collection, args.channel, sample)
    srcc_point = metrics.srcc(sub.mean_dmos, full.mean_dmos)
    fidelity = None
    if args.rounds:
        fidelity = metrics.bootstrap_srcc(collection, cluster_model, sample.config,
                                          rounds=args.rounds)
    ood = None
    if args.baseline_labels:
        labels = _load_baseline_labels(args.baseline_labels)
        ood = metrics.ood_fraction(sample, collection, labels)
    dmos_stats = metrics.mean_dmos(sample, collection)

    data = reports.sample_report_to_dict(diversity, fidelity, srcc_point, ood, dmos_stats)
    text = reports.format_sample_report(data)
    sys.stdout.write(text)
    if args.out_json:
        reports.write_json(args.out_json, data)
    if args.out_text:
        Path(args.out_text).write_text(text, encoding="utf-8")
    return EXIT_OK


def _workload_spec_from_dict(raw: dict, seed_override=None) -> simulator.WorkloadSpec:
    raw = dict(raw)
    if seed_override is not None:
        raw["seed"] = seed_override
    if "seed" not in raw:
        raise ConfigError("workload spec needs a seed (or pass --seed)")
    if "channel_offsets" in raw:
        raw["channel_offsets"] = tuple(raw["channel_offsets"])
    try:
        return simulator.WorkloadSpec(**raw)
    except TypeError as exc:
        raise ConfigError(f"bad workload spec: {exc}") from None


def cmd_simulate(args) -> int:
    if args.spec:
        spec = _workload_spec_from_dict(_load_config_file(args.spec), args.seed)
    else:
        spec = simulator.default_workload_spec(seed=_require(args.seed, "--seed"))
    collection = simulator.generate_workload(spec)
    dataset.write_collection(collection, args.out_manifest, args.out_embeddings)
    print(
        f"generated {len(collection)} clips, dim {collection.dim}, "
        f"{len(collection.model_ids)} models (separation {spec.separation():.1f} sigma)"
    )
    return EXIT_OK


def _resolve_pipeline_config(raw: dict) -> dict:
    try:
        paths = raw["paths"]
        cfg = {
            "manifest": Path(paths["manifest"]),
            "embeddings": Path(paths["embeddings"]),
            "output_dir": Path(paths["output_dir"]),
            "seed": raw["seed"],
        }
    except KeyError as exc:
        raise ConfigError(f"pipeline config missing key: {exc}") from None
    for key in ("manifest", "embeddings"):
        if not cfg[key].exists():
            raise ConfigError(f"{key} path does not exist: {cfg[key]}")
    clus = raw.get("clustering", {})
    cfg["k_grid"] = _parse_k_grid(clus.get("k_grid", [4, 6, 8, 10]))
    cfg["restarts"] = int(clus.get("restarts", clustering.DEFAULT_RESTARTS))
    cfg["max_iter"] = int(clus.get("max_iter", clustering.DEFAULT_MAX_ITER))
    cfg["tol"] = float(clus.get("tol", clustering.DEFAULT_TOL))
    samp = raw.get("sampling", {})
    cfg["budget"] = int(samp.get("budget", 0)) or None
    cfg["mode"] = samp.get("mode", "hardness")
    cfg["channel"] = samp.get("channel", "ovrl")
    cfg["epsilon"] = float(samp.get("epsilon", sampling.DEFAULT_EPSILON))
    met = raw.get("metrics", {})
    cfg["rounds"] = int(met.get("rounds", 0))
    baseline = met.get("baseline_labels")
    cfg["baseline_labels"] = _load_baseline_labels(baseline) if baseline else None
    if cfg["budget"] is None:
        raise ConfigError("pipeline config needs sampling.budget")
    return cfg


def cmd_pipeline(args) -> int:
    cfg = _resolve_pipeline_config(_load_config_file(args.config))
    out_dir = cfg["output_dir"]
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = {
        "clusters": out_dir / "clusters.bin",
        "cluster_summary": out_dir / "clusters.json",
        "sample": out_dir / "sample.jsonl",
        "report_json": out_dir / "report.json",
        "report_text": out_dir / "report.txt",
    }

    written: list[Path] = []
    stage = "load"
    try:
        collection = dataset.load_collection(cfg["manifest"], cfg["embeddings"])
        if cfg["budget"] > len(collection):
            raise ConfigError(
                f"budget {cfg['budget']} exceeds collection size {len(collection)}"
            )

        stage = "cluster"
        model = clustering.select_k(
            collection.embeddings.astype(np.float64),
            cfg["k_grid"], seed=cfg["seed"], restarts=cfg["restarts"],
            max_iter=cfg["max_iter"], tol=cfg["tol"],
        )
        clustering.save_cluster_model(model, outputs["clusters"], outputs["cluster_summary"])
        written += [outputs["clusters"], outputs["cluster_summary"]]

        stage = "sample"
        config = sampling.SamplingConfig(
            budget=cfg["budget"], mode=cfg["mode"], channel=cfg["channel"],
            seed=cfg["seed"], epsilon=cfg["epsilon"],
        )
        manifest = sampling.draw_sample(collection, model, config)
        sampling.write_sample_manifest(manifest, outputs["sample"], k=model.k)
        written.append(outputs["sample"])

        stage = "metrics"
        counts = metrics.sample_cluster_counts(manifest, collection, model)
        diversity = metrics.chi_square_uniformity(counts)
        full = metrics.rank_models(collection, cfg["channel"])
        sub = metrics.rank_models(collection, cfg["channel"], manifest)
        srcc_point = metrics.srcc(sub.mean_dmos, full.mean_dmos)
        fidelity = None
        if cfg["rounds"]:
            fidelity = metrics.bootstrap_srcc(collection, model, config, rounds=cfg["rounds"])
        ood = None
        if cfg["baseline_labels"] is not None:
            ood = metrics.ood_fraction(manifest, collection, cfg["baseline_labels"])
        dmos_stats = metrics.mean_dmos(manifest, collection)
        data = reports.sample_report_to_dict(diversity, fidelity, srcc_point, ood, dmos_stats)
        reports.write_json(outputs["report_json"], data)
        written.append(outputs["report_json"])
        outputs["report_text"].write_text(
            reports.format_sample_report(data), encoding="utf-8"
        )
        written.append(outputs["report_text"])
    except Exception as exc:
        for path in written:
            path.unlink(missing_ok=True)
        if isinstance(exc, ValueError):
            raise ConfigError(f"pipeline stage '{stage}' failed: {exc}") from exc
        raise RuntimeError(f"pipeline stage '{stage}' failed: {exc}") from exc

    print(f"pipeline complete: outputs in {out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aura",
        description="Budget-constrained test-set curation and model ranking",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a manifest/embedding pair")
    p.add_argument("--manifest", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--out-manifest")
    p.add_argument("--out-embeddings")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("cluster", help="fit kmeans++/Lloyd, select k by Davies-Bouldin")
    p.add_argument("--manifest", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--k-grid", default="4,6,8,10")
    p.add_argument("--restarts", type=int, default=clustering.DEFAULT_RESTARTS)
    p.add_argument("--max-iter", type=int, default=clustering.DEFAULT_MAX_ITER)
    p.add_argument("--tol", type=float, default=clustering.DEFAULT_TOL)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-clusters", required=True)
    p.add_argument("--out-summary", required=True)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("sample", help="draw a budget-limited sample")
    p.add_argument("--manifest", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--clusters", help="cluster sidecar; omit for a global draw")
    p.add_argument("--mode", choices=sampling.MODES, default="hardness")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--channel", choices=dataset.CHANNELS, default="ovrl")
    p.add_argument("--epsilon", type=float, default=sampling.DEFAULT_EPSILON)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("rank", help="rank models by mean DMOS")
    p.add_argument("--manifest", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--sample", help="rank on a sample manifest instead of the full set")
    p.add_argument("--channel", choices=dataset.CHANNELS, default="ovrl")
    p.add_argument("--json", help="also write the ranking as JSON")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("report", help="quality metrics for a drawn sample")
    p.add_argument("--manifest", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--clusters", required=True)
    p.add_argument("--sample", required=True)
    p.add_argument("--baseline-labels", help="JSON list of in-distribution categories")
    p.add_argument("--rounds", type=int, default=0, help="bootstrap rounds (0 = skip)")
    p.add_argument("--channel", choices=dataset.CHANNELS, default="ovrl")
    p.add_argument("--out-json")
    p.add_argument("--out-text")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("simulate", help="generate a synthetic workload")
    p.add_argument("--spec", help="workload spec file (JSON or TOML)")
    p.add_argument("--seed", type=int, help="overrides the spec seed")
    p.add_argument("--out-manifest", required=True)
    p.add_argument("--out-embeddings", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("pipeline", help="cluster, sample, and report in one run")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, dataset.DatasetError, clustering.ClusteringError,
            sampling.SamplingError, metrics.MetricError, simulator.SimulatorError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
