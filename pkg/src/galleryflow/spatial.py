"""Room-to-room flow modelling with stair-aversion costs.

Covers the transition/count matrices, cost-penalized shortest paths from the
entrance, a grid-search fit of the stair multipliers against observed room
visitation, entrance-restart PageRank, boundary drop-off rates, and the
popularity-vs-distance regression.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError
from .ingest import CleanTrip
from .museum import MuseumGraph
from .stats import pearson, spearman

EDGE_COST_KEY = {"flat": "flat", "stair_up": "up", "stair_down": "down"}


@dataclass(frozen=True)
class PenaltyParams:
    """Stair cost multipliers; flat transitions always cost 1."""

    lambda_up: float = 1.0
    lambda_down: float = 1.0

    def __post_init__(self):
        if self.lambda_up < 1.0:
            raise ValueError("lambda_up must be >= 1")
        if self.lambda_down <= 0.0:
            raise ValueError("lambda_down must be > 0")

    def edge_cost(self, kind: str) -> float:
        if kind == "flat":
            return 1.0
        if kind == "stair_up":
            return self.lambda_up
        if kind == "stair_down":
            return self.lambda_down
        raise ValueError(f"unknown edge kind {kind!r}")


@dataclass
class PenalizedDistanceField:
    origin: str
    dist: dict[str, float]


@dataclass
class TransitionModel:
    rooms: list[str]
    counts: np.ndarray
    probs: np.ndarray
    room_visits: dict[str, int]
    # per-trip collapsed room sequences; kept so drop-off rates can be
    # computed from trips rather than the aggregated matrix
    trip_room_sequences: list[list[str]] = field(default_factory=list, repr=False)

    def validate(self):
        n = len(self.rooms)
        if self.counts.shape != (n, n) or self.probs.shape != (n, n):
            raise ValueError("matrix shape mismatch")
        row_sums = self.probs.sum(axis=1)
        out = self.counts.sum(axis=1) > 0
        if np.any(np.abs(row_sums[out] - 1.0) > 1e-9):
            raise ValueError("probability rows do not sum to 1")


@dataclass
class StairFit:
    params: PenaltyParams
    spearman: float
    baseline_spearman: float
    degenerate: bool = False


@dataclass
class PopularityFit:
    rows: list[dict]  # room, distance, visits, theme
    spearman: float
    pearson: float
    outlier_rooms: list[str]
    distance_r2: float
    theme_eta2: float


def build_transition_model(trips: list[CleanTrip], graph: MuseumGraph) -> TransitionModel:
    """Count consecutive distinct-room moves per trip and row-normalize.

    Self-pairs (consecutive events in one room) are skipped; room_visits
    counts unique trips entering each room.
    """
    rooms = list(graph.room_ids)
    index = {rid: i for i, rid in enumerate(rooms)}
    counts = np.zeros((len(rooms), len(rooms)), dtype=np.int64)
    visits = {rid: 0 for rid in rooms}
    sequences: list[list[str]] = []

    for trip in trips:
        seq = trip.room_sequence
        sequences.append(seq)
        for rid in set(seq):
            visits[rid] += 1
        for a, b in zip(seq, seq[1:]):
            counts[index[a], index[b]] += 1

    row_sums = counts.sum(axis=1, keepdims=True).astype(np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        probs = np.where(row_sums > 0, counts / np.where(row_sums == 0, 1, row_sums), 0.0)

    model = TransitionModel(
        rooms=rooms,
        counts=counts,
        probs=probs,
        room_visits=visits,
        trip_room_sequences=sequences,
    )
    model.validate()
    return model


def penalized_shortest_paths(
    graph: MuseumGraph, params: PenaltyParams, origin: str
) -> PenalizedDistanceField:
    """Dijkstra from origin with per-kind edge costs; ties break on room id."""
    if origin not in set(graph.room_ids):
        raise KeyError(f"unknown room {origin!r}")
    dist: dict[str, float] = {rid: math.inf for rid in graph.room_ids}
    dist[origin] = 0.0
    heap: list[tuple[float, str]] = [(0.0, origin)]
    done: set[str] = set()
    while heap:
        d, room = heapq.heappop(heap)
        if room in done:
            continue
        done.add(room)
        for e in graph.neighbors(room):
            nd = d + params.edge_cost(e.kind)
            if nd < dist[e.to_room]:
                dist[e.to_room] = nd
                heapq.heappush(heap, (nd, e.to_room))
    return PenalizedDistanceField(origin=origin, dist=dist)


def lambda_grid(
    up_range: tuple[float, float, float] = (1.0, 6.0, 0.25),
    down_range: tuple[float, float, float] = (0.5, 2.0, 0.25),
) -> list[tuple[float, float]]:
    ups = np.arange(up_range[0], up_range[1] + 1e-9, up_range[2])
    downs = np.arange(down_range[0], down_range[1] + 1e-9, down_range[2])
    return [(float(u), float(d)) for u in ups for d in downs]


def _visit_distance_objective(
    model: TransitionModel, graph: MuseumGraph, params: PenaltyParams, entrance: str
) -> float:
    field_ = penalized_shortest_paths(graph, params, entrance)
    rooms = model.rooms
    visits = np.asarray([model.room_visits.get(r, 0) for r in rooms], dtype=np.float64)
    dists = np.asarray([field_.dist[r] for r in rooms], dtype=np.float64)
    return spearman(visits, -dists)


def fit_stair_penalty(
    model: TransitionModel,
    graph: MuseumGraph,
    entrance: str,
    grid: list[tuple[float, float]] | None = None,
) -> StairFit:
    """Grid-search the stair multipliers against observed room visitation.

    Objective: Spearman correlation between per-room unique-visitor counts
    and negated penalized distance from the entrance. Ties take the smallest
    (lambda_up, lambda_down). A single-floor museum is degenerate and
    returns unit penalties with a warning flag.
    """
    floors = {graph.floor_of(r) for r in graph.room_ids}
    baseline = _visit_distance_objective(model, graph, PenaltyParams(1.0, 1.0), entrance)
    if len(floors) < 2:
        return StairFit(
            params=PenaltyParams(1.0, 1.0),
            spearman=baseline,
            baseline_spearman=baseline,
            degenerate=True,
        )

    best_params: PenaltyParams | None = None
    best_score = -math.inf
    for up, down in sorted(grid or lambda_grid()):
        score = _visit_distance_objective(model, graph, PenaltyParams(up, down), entrance)
        if math.isnan(score):
            continue
        if score > best_score:
            best_score = score
            best_params = PenaltyParams(up, down)
    if best_params is None:
        return StairFit(PenaltyParams(1.0, 1.0), float("nan"), baseline, degenerate=True)
    return StairFit(params=best_params, spearman=best_score, baseline_spearman=baseline)


def flow_pagerank(
    model: TransitionModel,
    damping: float = 0.85,
    restart: str | None = None,
    tol: float = 1e-10,
    max_iter: int = 1000,
) -> dict[str, float]:
    """Power-iteration PageRank with teleport mass on the restart room.

    ``restart=None`` spreads the teleport uniformly. Dangling rooms (no
    outgoing transitions) hand their mass to the restart distribution.
    """
    n = len(model.rooms)
    if n == 0:
        raise ValueError("empty model")
    if restart is not None and restart not in model.rooms:
        raise KeyError(f"unknown restart room {restart!r}")

    teleport = np.full(n, 1.0 / n) if restart is None else np.zeros(n)
    if restart is not None:
        teleport[model.rooms.index(restart)] = 1.0

    p = model.probs
    dangling = p.sum(axis=1) == 0.0
    pi = teleport.copy()
    delta = math.inf
    for _ in range(max_iter):
        dangling_mass = pi[dangling].sum()
        nxt = damping * (p.T @ pi + dangling_mass * teleport) + (1.0 - damping) * teleport
        delta = float(np.abs(nxt - pi).sum())
        pi = nxt
        if delta < tol:
            return {rid: float(v) for rid, v in zip(model.rooms, pi)}
    raise ConvergenceError(f"pagerank did not converge in {max_iter} iterations", delta)


def dropoff_rates(
    model: TransitionModel, boundary_pairs: list[tuple[str, str]]
) -> dict[tuple[str, str], float | None]:
    """Fraction of trips reaching room a that never subsequently reach b.

    Computed over per-trip room sequences. ``None`` marks a boundary whose
    first room no trip ever visited.
    """
    out: dict[tuple[str, str], float | None] = {}
    known = set(model.rooms)
    for a, b in boundary_pairs:
        if a not in known or b not in known:
            raise KeyError(f"unknown room in boundary pair ({a!r}, {b!r})")
        reached_a = 0
        continued = 0
        for seq in model.trip_room_sequences:
            try:
                i = seq.index(a)
            except ValueError:
                continue
            reached_a += 1
            if b in seq[i + 1 :]:
                continued += 1
        out[(a, b)] = None if reached_a == 0 else 1.0 - continued / reached_a
    return out


def popularity_distance_fit(
    model: TransitionModel,
    graph: MuseumGraph,
    params: PenaltyParams,
    entrance: str,
) -> PopularityFit:
    """Per-room distance/visits table with correlations and outliers.

    Outliers are rooms with |standardized residual| > 2 under a linear fit
    of log(1+visits) on penalized distance. Also reports the variance share
    explained by distance (R^2) versus by theme grouping (eta^2), both on
    log-visits.
    """
    rooms = model.rooms
    if len(rooms) < 3:
        raise ValueError("need at least 3 rooms")
    field_ = penalized_shortest_paths(graph, params, entrance)
    dists = np.asarray([field_.dist[r] for r in rooms], dtype=np.float64)
    visits = np.asarray([model.room_visits.get(r, 0) for r in rooms], dtype=np.float64)
    themes = [graph.room(r).theme for r in rooms]

    rows = [
        {"room": r, "distance": float(d), "visits": int(v), "theme": t}
        for r, d, v, t in zip(rooms, dists, visits, themes)
    ]

    y = np.log1p(visits)
    x = dists
    sp = spearman(visits, x)
    pe = pearson(visits, x)

    xc = x - x.mean()
    denom = float(xc @ xc)
    ss_total = float(((y - y.mean()) ** 2).sum())
    if denom > 0:
        slope = float(xc @ (y - y.mean())) / denom
        intercept = float(y.mean() - slope * x.mean())
        resid = y - (intercept + slope * x)
        ssr = float((resid**2).sum())
        scale = math.sqrt(ssr / (len(rooms) - 2)) if len(rooms) > 2 else 0.0
        if scale > 0:
            z = resid / scale
            outliers = [rooms[i] for i in range(len(rooms)) if abs(z[i]) > 2.0]
        else:
            outliers = []
        distance_r2 = 1.0 - ssr / ss_total if ss_total > 0 else float("nan")
    else:
        outliers = []
        distance_r2 = float("nan")

    if ss_total > 0:
        ss_within = 0.0
        for theme in set(themes):
            member_y = y[[i for i, t in enumerate(themes) if t == theme]]
            ss_within += float(((member_y - member_y.mean()) ** 2).sum())
        theme_eta2 = 1.0 - ss_within / ss_total
    else:
        theme_eta2 = float("nan")

    return PopularityFit(
        rows=rows,
        spearman=sp,
        pearson=pe,
        outlier_rooms=outliers,
        distance_r2=distance_r2,
        theme_eta2=theme_eta2,
    )
