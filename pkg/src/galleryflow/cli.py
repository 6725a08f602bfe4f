"""Command-line pipeline runner.

Subcommands: ingest | cluster | flow | tours | sentiment | synth | all.
Each stage writes its JSON report plus plot-ready CSV tables into --outdir.
Exit codes: 0 success, 1 input/config error, 2 data-quality rejection.

The bundled toy museum and demo lexicon are used whenever no explicit paths
are given, so a full walkthrough needs nothing beyond `synth` and `all`.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from . import _kernels, ingest as ingest_mod, museum as museum_mod
from . import segmentation, spatial, text_analytics, tours as tours_mod
from .config import PipelineConfig
from .errors import ConfigError, CorpusRejectedError, GalleryFlowError, MuseumLoadError
from .presets import make_preset
from .report import build_meta, write_csv, write_json
from .synthgen import events_to_jsonl, generate_reviews, generate_trips, labels_to_jsonl, reviews_to_jsonl


class DataQualityError(GalleryFlowError):
    pass


def _bundled(name: str) -> bytes:
    return resources.files("galleryflow").joinpath(f"data/{name}").read_bytes()


def _load_museum(cfg: PipelineConfig):
    path = cfg.path("paths.museum")
    if path is None:
        return museum_mod.load_museum_graph(_bundled("toy_museum.json"))
    if not path.exists():
        raise ConfigError(f"museum file not found: {path}")
    return museum_mod.load_museum_graph(path.read_bytes())


def _load_lexicon(cfg: PipelineConfig):
    path = cfg.path("paths.lexicon")
    if path is None:
        return text_analytics.load_lexicon(_bundled("demo_lexicon.tsv").decode("utf-8"), "demo")
    if not path.exists():
        raise ConfigError(f"lexicon file not found: {path}")
    return text_analytics.load_lexicon(path.read_text(encoding="utf-8"), path.stem)


def _require_events(cfg: PipelineConfig) -> Path:
    path = cfg.path("paths.events")
    if path is None:
        raise ConfigError("no events path configured (paths.events)")
    if not path.exists():
        raise ConfigError(f"events file not found: {path}")
    return path


def _meta(cfg: PipelineConfig) -> dict:
    return build_meta(
        cfg.to_canonical_dict(),
        {
            "events": cfg.path("paths.events"),
            "reviews": cfg.path("paths.reviews"),
            "museum": cfg.path("paths.museum"),
            "lexicon": cfg.path("paths.lexicon"),
        },
    )


def run_ingest(cfg: PipelineConfig, outdir: Path):
    graph, catalog, tour_defs = _load_museum(cfg)
    events_path = _require_events(cfg)
    with open(events_path, "rb") as fh:
        events, malformed = ingest_mod.parse_event_log(fh, str(cfg["ingest.format"]))
    trips, rep = ingest_mod.clean_events(events, graph, catalog, cfg.ingest_config(), malformed)

    (outdir / "trips.jsonl").write_text(ingest_mod.trips_to_jsonl(trips), encoding="utf-8")
    write_json(outdir / "cleaning_report.json", {"meta": _meta(cfg), **rep.to_dict()})
    return graph, catalog, tour_defs, trips, rep


def _subsample(trips, cap: int):
    """Deterministic stratified thinning by duration quartile."""
    if len(trips) <= cap:
        return trips, False
    import numpy as np

    durations = np.asarray([t.duration for t in trips], dtype=np.float64)
    qs = np.quantile(durations, [0.25, 0.5, 0.75])
    strata: dict[int, list] = {0: [], 1: [], 2: [], 3: []}
    for t in trips:
        stratum = int(sum(t.duration > q for q in qs))
        strata[stratum].append(t)
    keep = []
    frac = cap / len(trips)
    for stratum in sorted(strata):
        members = sorted(strata[stratum], key=lambda t: t.trip_id)
        quota = max(1, int(round(len(members) * frac)))
        step = len(members) / quota
        keep.extend(members[int(i * step)] for i in range(quota))
    keep.sort(key=lambda t: t.trip_id)
    return keep[:cap], True


def run_cluster(cfg: PipelineConfig, outdir: Path, trips, tour_defs):
    k_max = int(cfg["cluster.k_max"])
    if len(trips) <= k_max:
        raise DataQualityError(f"clustering needs more than {k_max} trips, got {len(trips)}")
    used, subsampled = _subsample(trips, int(cfg["cluster.max_trips"]))
    vectors = segmentation.trips_to_vectors(used)
    dm = segmentation.build_distance_matrix(vectors)
    dendro = segmentation.upgma(dm)
    solution = segmentation.select_k(dm, dendro, (int(cfg["cluster.k_min"]), k_max))
    stops = frozenset(s for t in tour_defs for s in t.stops)
    rules = segmentation.ProfileRules(
        sampler_max_duration=float(cfg["cluster.sampler_max_duration"]),
        targeted_min_tour_share=float(cfg["cluster.targeted_min_tour_share"]),
    )
    solution = segmentation.profile_clusters(solution, used, stops, rules)

    write_json(
        outdir / "cluster_report.json",
        {
            "meta": _meta(cfg),
            "n_trips_total": len(trips),
            "n_trips_used": len(used),
            "subsampled": subsampled,
            **solution.to_dict(),
        },
    )
    return solution


def _boundary_pairs(cfg: PipelineConfig, graph) -> list[tuple[str, str]]:
    raw = str(cfg["flow.boundaries"])
    if raw == "auto":
        return [(e.from_room, e.to_room) for e in graph.stair_edges()]
    pairs = []
    for chunk in raw.split(","):
        a, _, b = chunk.strip().partition(":")
        if not a or not b:
            raise ConfigError(f"bad flow.boundaries entry {chunk!r}")
        pairs.append((a, b))
    return pairs


def run_flow(cfg: PipelineConfig, outdir: Path, trips, graph, emit_csv: bool):
    model = spatial.build_transition_model(trips, graph)
    up_range, down_range = cfg.lambda_grid_ranges()
    fit = spatial.fit_stair_penalty(
        model, graph, graph.entrance, spatial.lambda_grid(up_range, down_range)
    )
    pagerank = spatial.flow_pagerank(model, float(cfg["flow.damping"]), graph.entrance)
    boundaries = _boundary_pairs(cfg, graph)
    dropoffs = spatial.dropoff_rates(model, boundaries)
    popularity = spatial.popularity_distance_fit(model, graph, fit.params, graph.entrance)

    write_json(
        outdir / "flow_report.json",
        {
            "meta": _meta(cfg),
            "entrance": graph.entrance,
            "rooms": model.rooms,
            "counts": model.counts.tolist(),
            "probs": model.probs.tolist(),
            "pagerank": pagerank,
            "fitted_lambda_up": fit.params.lambda_up,
            "fitted_lambda_down": fit.params.lambda_down,
            "spearman": fit.spearman,
            "baseline_spearman": fit.baseline_spearman,
            "degenerate_fit": fit.degenerate,
            "dropoffs": [
                {"from": a, "to": b, "rate": rate} for (a, b), rate in sorted(dropoffs.items())
            ],
            "outlier_rooms": popularity.outlier_rooms,
            "popularity": {
                "spearman": popularity.spearman,
                "pearson": popularity.pearson,
                "distance_r2": popularity.distance_r2,
                "theme_eta2": popularity.theme_eta2,
            },
        },
    )
    if emit_csv:
        write_csv(
            outdir / "transitions.csv",
            ["from_room", "to_room", "count", "prob"],
            [
                [a, b, int(model.counts[i, j]), float(model.probs[i, j])]
                for i, a in enumerate(model.rooms)
                for j, b in enumerate(model.rooms)
                if model.counts[i, j] > 0
            ],
        )
        write_csv(
            outdir / "popularity_distance.csv",
            ["room", "theme", "distance", "visits"],
            [[r["room"], r["theme"], r["distance"], r["visits"]] for r in popularity.rows],
        )
    return model, fit


def run_tours(cfg: PipelineConfig, outdir: Path, trips, tour_defs, emit_csv: bool):
    sessions = tours_mod.match_tour_sessions(trips, tour_defs)
    starters = [s for s in sessions if s.status in ("partial", "completed")]
    completed = sum(1 for s in starters if s.status == "completed")

    entries = []
    csv_rows = []
    for tour in sorted(tour_defs, key=lambda t: t.tour_id):
        for language in ["all", *sorted(tour.languages)]:
            lang = None if language == "all" else language
            curve = tours_mod.completion_curve(sessions, tour, lang)
            if curve is None:
                continue
            slice_sessions = [
                s
                for s in sessions
                if s.tour_id == tour.tour_id and (lang is None or s.language == lang)
            ]
            slice_starters = [s for s in slice_sessions if s.status in ("partial", "completed")]
            n_started = len(slice_starters)
            n_completed = sum(1 for s in slice_starters if s.status == "completed")
            chain = tours_mod.tour_markov_chain(slice_sessions, tour)
            entry = {
                "tour_id": tour.tour_id,
                "language": language,
                "starters": n_started,
                "completed_rate": n_completed / n_started,
                "partial_rate": (n_started - n_completed) / n_started,
                "survival": curve.survival,
                "entropy": tours_mod.completion_entropy(slice_sessions, tour),
                "chain_rows": chain.transition.tolist(),
                "chain_completion_probability": chain.completion_probability,
            }
            entries.append(entry)
            n = len(tour.stops)
            for k, frac in enumerate(curve.survival, start=1):
                csv_rows.append([tour.tour_id, language, k, k / n, frac])

    write_json(
        outdir / "tour_report.json",
        {
            "meta": _meta(cfg),
            "pooled": {
                "sessions": len(sessions),
                "starters": len(starters),
                "completed": completed,
                "completed_rate": completed / len(starters) if starters else None,
                "partial_rate": (len(starters) - completed) / len(starters) if starters else None,
            },
            "tours": entries,
        },
    )
    if emit_csv:
        write_csv(
            outdir / "survival_curves.csv",
            ["tour_id", "language", "stop", "stop_fraction", "survival"],
            csv_rows,
        )
    return sessions


def run_sentiment(cfg: PipelineConfig, outdir: Path, emit_csv: bool):
    reviews_path = cfg.path("paths.reviews")
    if reviews_path is None:
        raise ConfigError("no reviews path configured (paths.reviews)")
    if not reviews_path.exists():
        raise ConfigError(f"reviews file not found: {reviews_path}")
    lexicon = _load_lexicon(cfg)
    reviews, invalid = text_analytics.load_reviews(reviews_path.read_text(encoding="utf-8"))
    if not reviews:
        raise DataQualityError("no valid reviews parsed")

    scores = {}
    for rv in reviews:
        s = text_analytics.score_sentiment(rv, lexicon)
        if s is not None:
            scores[rv.review_id] = s

    by_type = text_analytics.aggregate_by_group(reviews, scores, "trip_type")
    by_month = text_analytics.aggregate_by_group(reviews, scores, "month")
    by_lang = text_analytics.aggregate_by_group(reviews, scores, "language")
    lag = text_analytics.rating_lag_analysis(reviews)
    try:
        length = text_analytics.length_positivity(reviews, scores)
    except ValueError:
        length = None
    tfidf = text_analytics.tfidf_terms(reviews, str(cfg["sentiment.tfidf_group_key"]), int(cfg["sentiment.top_k_terms"]))

    mean_rating = sum(r.rating for r in reviews) / len(reviews)
    write_json(
        outdir / "sentiment_report.json",
        {
            "meta": _meta(cfg),
            "n_reviews": len(reviews),
            "invalid_records": invalid,
            "n_scored": len(scores),
            "mean_rating": mean_rating,
            "by_trip_type": by_type,
            "by_month": by_month,
            "by_language": by_lang,
            "lag": lag,
            "length_positivity": length,
            "tfidf": {str(k): v for k, v in tfidf.items()},
        },
    )
    if emit_csv:
        write_csv(
            outdir / "group_ratings.csv",
            ["group", "n", "mean_rating", "ci_half_width", "low_confidence"],
            [
                [g["group"], g["n"], g["mean_rating"], g["ci_half_width"], g["low_confidence"]]
                for g in by_type
            ],
        )


def run_synth(cfg: PipelineConfig, outdir: Path):
    preset = make_preset(
        str(cfg["synth.preset"]),
        seed=int(cfg["synth.seed"]),
        n_trips=int(cfg["synth.trips"]),
        n_reviews=int(cfg["synth.reviews"]),
    )
    graph, catalog, tour_defs = _load_museum(cfg)
    events, labels = generate_trips(preset, graph, catalog, tour_defs)
    reviews = generate_reviews(preset)

    (outdir / "events.jsonl").write_text(events_to_jsonl(events), encoding="utf-8")
    (outdir / "labels.jsonl").write_text(labels_to_jsonl(labels), encoding="utf-8")
    if reviews:
        (outdir / "reviews.jsonl").write_text(reviews_to_jsonl(reviews), encoding="utf-8")
    write_json(
        outdir / "synth_manifest.json",
        {
            "meta": _meta(cfg),
            "preset": str(cfg["synth.preset"]),
            "seed": preset.seed,
            "n_trips": preset.n_trips,
            "n_reviews": preset.n_reviews,
            "n_events": len(events),
            "kernel_backend": _kernels.backend_name(),
        },
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="galleryflow",
        description="Museum visitor analytics: clean, cluster, model flow, analyse tours and reviews.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("ingest", "cluster", "flow", "tours", "sentiment", "synth", "all"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--outdir", help="output directory (default from config)")
        p.add_argument("--events", help="events JSONL/CSV path")
        p.add_argument("--reviews", help="reviews JSONL path")
        p.add_argument("--museum", help="museum JSON path (default: bundled toy museum)")
        p.add_argument("--lexicon", help="lexicon TSV path (default: bundled demo lexicon)")
        p.add_argument("--seed", type=int, help="synth seed override")
        p.add_argument("--format", choices=("json", "csv"), default="csv", help="csv also emits plot tables")
        if name == "synth":
            p.add_argument("--preset", help="synth preset name")
            p.add_argument("--trips", type=int, help="number of trips")
            p.add_argument("--n-reviews", type=int, dest="n_reviews", help="number of reviews")
    return parser


def _configure(args) -> PipelineConfig:
    cfg = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    overrides = {
        "paths.events": args.events,
        "paths.reviews": args.reviews,
        "paths.museum": args.museum,
        "paths.lexicon": args.lexicon,
        "paths.outdir": args.outdir,
    }
    if args.seed is not None:
        overrides["synth.seed"] = str(args.seed)
    if getattr(args, "preset", None):
        overrides["synth.preset"] = args.preset
    if getattr(args, "trips", None) is not None:
        overrides["synth.trips"] = str(args.trips)
    if getattr(args, "n_reviews", None) is not None:
        overrides["synth.reviews"] = str(args.n_reviews)
    for key, value in overrides.items():
        if value is not None:
            cfg.set(key, str(value))
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    outdir: Path | None = None
    try:
        cfg = _configure(args)
        outdir = Path(str(cfg["paths.outdir"]))
        outdir.mkdir(parents=True, exist_ok=True)
        emit_csv = args.format == "csv"

        if args.command == "synth":
            run_synth(cfg, outdir)
        elif args.command == "sentiment":
            run_sentiment(cfg, outdir, emit_csv)
        elif args.command == "ingest":
            run_ingest(cfg, outdir)
        else:
            graph, catalog, tour_defs, trips, _rep = run_ingest(cfg, outdir)
            if args.command in ("cluster", "all") and bool(cfg["stages.cluster"]):
                run_cluster(cfg, outdir, trips, tour_defs)
            if args.command in ("flow", "all") and bool(cfg["stages.flow"]):
                run_flow(cfg, outdir, trips, graph, emit_csv)
            if args.command in ("tours", "all") and bool(cfg["stages.tours"]):
                run_tours(cfg, outdir, trips, tour_defs, emit_csv)
            if args.command == "all" and bool(cfg["stages.sentiment"]) and cfg.path("paths.reviews"):
                run_sentiment(cfg, outdir, emit_csv)
        return 0
    except (ConfigError, MuseumLoadError, FileNotFoundError) as exc:
        _report_error(outdir, args.command, exc)
        return 1
    except (CorpusRejectedError, DataQualityError, ValueError) as exc:
        _report_error(outdir, args.command, exc)
        return 2


def _report_error(outdir: Path | None, stage: str, exc: Exception):
    print(f"galleryflow {stage}: {exc}", file=sys.stderr)
    if outdir is not None and outdir.exists():
        write_json(
            outdir / "error.json",
            {"stage": stage, "error": type(exc).__name__, "message": str(exc)},
        )


if __name__ == "__main__":
    sys.exit(main())
