"""Synthetic visitor and review corpora with planted, recoverable structure.

Every analytic stage is validated against this generator: archetype shares,
stair penalties, drop-off rates, tour exits, and rating structure go in as
exact parameters and must come back out within stated tolerances.

Determinism contract: a fixed seed reproduces byte-identical corpora. Each
trip and review draws from its own counter-keyed Philox stream, so the heavy
work could be parallelized without changing output.

Walker model: a trip samples an itinerary of rooms without replacement with
probability proportional to exp(-beta * cost), where cost is the penalized
shortest-path distance from the entrance under the true stair multipliers,
then walks the itinerary outward, playing objects room by room. Rooms above
the entrance floor carry a small popularity damping so that visitation ranks
stay strict where ground and upper rooms would otherwise tie.

When an archetype plants a nonzero stair refusal, the walk switches to
gate mode at the main staircase: every trip stops at the stair-bottom room,
refusing trips (the planted fraction) never select rooms above the entrance
floor, and non-refusing trips always continue to the stair-top room, so the
trip-level drop-off across that boundary equals the refusal probability.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import date, timedelta

import numpy as np

from .errors import ConfigError
from .ingest import RawEvent, trip_name
from .museum import MuseumGraph, ObjectCatalog, TourDef, all_hop_distances
from .spatial import PenaltyParams, penalized_shortest_paths

POSITIVE_WORDS = (
    "amazing", "beautiful", "incredible", "impressive", "stunning", "wonderful",
    "fascinating", "informative", "superb", "excellent", "brilliant",
    "magnificent", "inspiring", "love", "enjoyed", "friendly", "helpful",
    "free", "treasure", "peaceful",
)
NEGATIVE_WORDS = (
    "crowded", "rude", "queue", "confusing", "noisy", "dirty",
    "disappointing", "boring", "expensive", "chaos", "tired", "slow",
)
FILLER_WORDS = (
    "museum", "gallery", "visit", "room", "objects", "guide", "audio",
    "exhibit", "collection", "history", "ancient", "marble", "display",
    "ticket", "entrance", "cafe", "shop", "day", "time", "tour", "staff",
    "walk", "floor", "stairs", "map", "world", "culture", "art", "stone",
)

PLANTED_SHORT = "planted:short"
PLANTED_SPARSE = "planted:sparse"
PLANTED_TELEPORT = "planted:teleport"

# room_affinity at or above this pins a room as a mandatory itinerary core
CORE_AFFINITY = 10.0


@dataclass
class ArchetypeSpec:
    name: str
    share: float
    duration_range: tuple[int, int]
    objects_range: tuple[int, int]
    tour_affinity: float = 0.0
    stair_refusal: float = 0.0
    language_mix: dict[str, float] = field(default_factory=lambda: {"en": 1.0})
    room_affinity: dict[str, float] = field(default_factory=dict)
    preferred_tours: tuple[str, ...] = ()
    # probability that a room's object picks start at a random offset
    # instead of the deterministic prefix; adds smooth within-archetype
    # variety at the cost of looser clusters
    object_jitter: float = 0.0


@dataclass
class TripLabel:
    trip_id: str
    archetype: str
    exit_stop: int | None


@dataclass
class GenConfig:
    seed: int = 20160701
    n_trips: int = 500
    n_reviews: int = 1000
    archetypes: list[ArchetypeSpec] = field(default_factory=lambda: default_archetypes())
    lambda_up_true: float = 3.0
    lambda_down_true: float = 1.0
    softmax_beta: float = 0.8
    upper_popularity_factor: float = 0.82
    completion_target: float = 0.18
    partial_exit_weights: dict[int, float] = field(
        default_factory=lambda: {2: 0.17, 3: 0.34, 4: 0.20, 5: 0.12, 6: 0.10, 7: 0.07}
    )
    mean_rating_target: float = 4.6
    trip_type_shares: dict[str, float] = field(
        default_factory=lambda: {
            "solo": 0.15, "couple": 0.25, "family": 0.30, "friends": 0.20, "business": 0.10,
        }
    )
    trip_type_offsets: dict[str, float] = field(
        default_factory=lambda: {"couple": -0.2, "business": 0.2}
    )
    lag_drift: float = 0.0
    lag_drift_threshold_days: int = 30
    length_slope: float = 18.0
    base_length: int = 60
    review_language_mix: dict[str, float] = field(
        default_factory=lambda: {
            "en": 0.55, "fr": 0.08, "es": 0.07, "zh": 0.07, "de": 0.06,
            "it": 0.06, "ja": 0.05, "ko": 0.03, "ru": 0.03,
        }
    )
    start_epoch: int = 1467331200  # 2016-07-01
    window_seconds: int = 42076800  # through 2017-10-31
    device_reuse_rate: float = 0.3
    travel_seconds_per_hop: int = 45
    emit_stops: bool = True
    emit_menu: bool = True
    plant_short: int = 0
    plant_sparse: int = 0
    plant_teleport: int = 0


def default_archetypes() -> list[ArchetypeSpec]:
    """The four planted behaviour profiles and their shares.

    Core affinities pin each archetype to a signature room set so recovered
    clusters line up with the plant; the Trekker stays unpinned and sweeps
    the museum by sheer budget.
    """
    return [
        ArchetypeSpec(
            name="Committed Trekker",
            share=0.22,
            duration_range=(3900, 7200),
            objects_range=(22, 34),
            tour_affinity=0.0,
            language_mix={"en": 0.7, "fr": 0.1, "de": 0.1, "es": 0.1},
        ),
        ArchetypeSpec(
            name="Leisurely Explorer",
            share=0.30,
            duration_range=(1500, 2600),
            objects_range=(6, 11),
            room_affinity={"R5": 40.0, "R6": 30.0, "R4": 20.0},
            language_mix={"en": 0.5, "fr": 0.15, "de": 0.15, "it": 0.1, "es": 0.1},
        ),
        ArchetypeSpec(
            name="Targeted Visitor",
            share=0.33,
            duration_range=(1000, 1900),
            objects_range=(4, 6),
            tour_affinity=0.85,
            room_affinity={"R2": 40.0, "R3": 20.0},
            preferred_tours=("T1",),
            language_mix={"en": 0.3, "it": 0.2, "zh": 0.2, "fr": 0.2, "ja": 0.1},
        ),
        ArchetypeSpec(
            name="Speedy Sampler",
            share=0.15,
            duration_range=(320, 850),
            objects_range=(3, 6),
            room_affinity={"R1": 40.0, "R3": 25.0},
            language_mix={"en": 0.4, "it": 0.2, "zh": 0.2, "fr": 0.2},
        ),
    ]


def _trip_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(0, index))))


def _aux_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(1, stream))))


def _review_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(2, index))))


def _categorical(rng: np.random.Generator, weights: dict[str, float]) -> str:
    keys = sorted(weights)
    probs = np.asarray([weights[k] for k in keys], dtype=np.float64)
    probs = probs / probs.sum()
    return keys[int(rng.choice(len(keys), p=probs))]


def _quota_counts(shares: list[float], n: int) -> list[int]:
    """Largest-remainder allocation so realized shares match exactly."""
    raw = [s * n for s in shares]
    counts = [int(math.floor(x)) for x in raw]
    remainder = n - sum(counts)
    order = sorted(range(len(shares)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[:remainder]:
        counts[i] += 1
    return counts


def main_staircase(graph: MuseumGraph) -> tuple[str, str]:
    """The stair_up edge whose bottom room is closest to the entrance."""
    hops = all_hop_distances(graph, graph.entrance)
    stairs = graph.stair_edges()
    if not stairs:
        raise ConfigError("graph has no stair_up edges")
    best = min(stairs, key=lambda e: (hops[e.from_room], e.from_room))
    return best.from_room, best.to_room


class _TripWalker:
    """Shared geometry for trip synthesis over one museum."""

    def __init__(self, config: GenConfig, graph: MuseumGraph, catalog: ObjectCatalog):
        self.config = config
        self.graph = graph
        self.catalog = catalog
        self.entrance = graph.entrance
        params = PenaltyParams(config.lambda_up_true, max(config.lambda_down_true, 1e-9))
        self.dist = penalized_shortest_paths(graph, params, self.entrance).dist
        self.hops = {r: all_hop_distances(graph, r) for r in graph.room_ids}
        self.room_objects = {r: catalog.objects_in_room(r) for r in graph.room_ids}
        entrance_floor = graph.floor_of(self.entrance)
        self.is_upper = {r: graph.floor_of(r) > entrance_floor for r in graph.room_ids}
        self.rooms = [r for r in graph.room_ids if self.room_objects[r]]
        self.base_weight = {
            r: math.exp(-config.softmax_beta * self.dist[r])
            * (config.upper_popularity_factor if self.is_upper[r] else 1.0)
            for r in self.rooms
        }
        self.stair_bottom, self.stair_top = (None, None)
        if any(self.is_upper.values()):
            self.stair_bottom, self.stair_top = main_staircase(graph)

    def route_order(self, rooms: list[str]) -> list[str]:
        return sorted(rooms, key=lambda r: (self.dist[r], r))

    def sample_rooms(self, rng: np.random.Generator, arch: ArchetypeSpec, budget: int, refuser: bool) -> list[str]:
        """Pick itinerary rooms until they can hold the object budget.

        Rooms with affinity at or above CORE_AFFINITY are pinned: they enter
        in descending affinity order before any sampling, which keeps an
        archetype's visit sets nested. The rest are drawn without
        replacement with probability proportional to weight.
        """
        core: list[tuple[float, str]] = []
        weights: dict[str, float] = {}
        for r in self.rooms:
            if refuser and self.is_upper[r]:
                continue
            aff = arch.room_affinity.get(r, 1.0)
            if aff >= CORE_AFFINITY:
                core.append((-aff, r))
            else:
                w = self.base_weight[r] * aff
                if w > 0:
                    weights[r] = w
        chosen: list[str] = []
        capacity = 0
        for _, room in sorted(core):
            chosen.append(room)
            capacity += len(self.room_objects[room])
        while weights and capacity < budget:
            room = _categorical(rng, weights)
            chosen.append(room)
            capacity += len(self.room_objects[room])
            del weights[room]
        return chosen


def _proportional_quotas(caps: list[int], budget: int) -> list[int]:
    """Split the budget across rooms proportionally to capacity, largest
    remainder, one play minimum per room when the budget allows."""
    n = len(caps)
    total = sum(caps)
    budget = min(budget, total)
    if budget <= n:
        return [1] * budget + [0] * (n - budget)
    raw = [budget * c / total for c in caps]
    quotas = [max(1, math.floor(x)) for x in raw]
    order = sorted(range(n), key=lambda i: (-(raw[i] - math.floor(raw[i])), i))
    diff = budget - sum(quotas)
    guard = 0
    while diff > 0 and guard < 4 * n:
        i = order[guard % n]
        if quotas[i] < caps[i]:
            quotas[i] += 1
            diff -= 1
        guard += 1
    while diff < 0:
        i = max(range(n), key=lambda j: (quotas[j] - raw[j] if quotas[j] > 1 else -math.inf, -j))
        quotas[i] -= 1
        diff += 1
    return quotas


def _spread_plays(
    room_objs: dict[str, list[str]],
    route: list[str],
    budget: int,
    rng: np.random.Generator | None = None,
    jitter: float = 0.0,
) -> list[tuple[str, str]]:
    """Turn a route and play budget into (room, object) plays.

    By default object picks inside a room are a deterministic prefix of the
    room's sorted object list, so same-archetype trips produce nested visit
    sets and cluster tightly; variety comes from budgets and room draws.
    With ``jitter`` > 0 a room's window starts at a random offset (wrapping)
    with that probability, loosening the sets smoothly.
    """
    caps = [len(room_objs[r]) for r in route]
    quotas = _proportional_quotas(caps, budget)
    plays: list[tuple[str, str]] = []
    for room, take in zip(route, quotas):
        available = room_objs[room]
        start = 0
        if jitter > 0 and rng is not None and rng.random() < jitter:
            start = int(rng.integers(0, len(available)))
        for offset in range(take):
            plays.append((room, available[(start + offset) % len(available)]))
    return plays


def _emit_trip_events(
    config: GenConfig,
    walker: _TripWalker,
    device: str,
    language: str,
    start: int,
    plays: list[tuple[str, str]],
    duration_target: int,
    rng: np.random.Generator,
) -> list[RawEvent]:
    """Timestamped menu/play/stop events along the play sequence.

    Dwell is stretched so that the play span always reaches the cleaning
    threshold, and travel time scales with hop count so distant consecutive
    rooms never look like teleports.
    """
    n = len(plays)
    gaps = max(1, n - 1)
    dwell = max(45, duration_target // max(1, n))
    travel_total = 0
    prev_room = None
    hops_list = []
    for room, _ in plays:
        if prev_room is not None and room != prev_room:
            hops_list.append(int(walker.hops[prev_room].get(room, 1)))
        else:
            hops_list.append(0)
        prev_room = room
    travel_total = sum(h * config.travel_seconds_per_hop for h in hops_list)
    if (dwell * gaps) + travel_total < 310:
        dwell = max(dwell, math.ceil((310 - travel_total) / gaps))

    events: list[RawEvent] = []
    t = start
    if config.emit_menu:
        events.append(RawEvent(device, t, "", language, "menu"))
    for i, (room, obj) in enumerate(plays):
        if i > 0:
            t += dwell + hops_list[i] * config.travel_seconds_per_hop + int(rng.integers(0, 20))
        events.append(RawEvent(device, t, obj, language, "play"))
        if config.emit_stops:
            events.append(RawEvent(device, t + max(20, dwell // 2), obj, language, "stop"))
    return events


def _make_tour_trip(
    config: GenConfig,
    walker: _TripWalker,
    arch: ArchetypeSpec,
    tours: list[TourDef],
    language: str,
    rng: np.random.Generator,
) -> tuple[list[tuple[str, str]], int] | None:
    candidates = [t for t in tours if language in t.languages]
    if arch.preferred_tours:
        preferred = [t for t in candidates if t.tour_id in arch.preferred_tours]
        candidates = preferred or candidates
    if not candidates:
        return None
    tour = candidates[int(rng.integers(len(candidates)))]
    n = len(tour.stops)

    partial_positions = sorted(k for k in config.partial_exit_weights if 2 <= k <= n - 1)
    if not partial_positions or rng.random() < config.completion_target:
        exit_pos = n
    else:
        w = np.asarray([config.partial_exit_weights[k] for k in partial_positions], dtype=np.float64)
        exit_pos = partial_positions[int(rng.choice(len(partial_positions), p=w / w.sum()))]

    plays = [(walker.catalog.room_of(oid), oid) for oid in tour.stops[:exit_pos]]
    if len(plays) < 3:
        # pad inside the last stop's room with a non-tour object so the trip
        # survives the minimum-interaction rule without extending the match
        all_stop_objects = {s for t in tours for s in t.stops}
        room = plays[-1][0]
        fillers = [o for o in walker.room_objects[room] if o not in all_stop_objects]
        for f in fillers[: 3 - len(plays)]:
            plays.append((room, f))
    return plays, exit_pos


def generate_trips(
    config: GenConfig,
    graph: MuseumGraph,
    catalog: ObjectCatalog,
    tours: list[TourDef],
) -> tuple[list[RawEvent], list[TripLabel]]:
    """Synthesize raw audio-guide events plus the ground-truth sidecar.

    Labels are keyed by the trip ids the cleaning pipeline will assign
    (device id plus per-device session ordinal), so planted archetypes can be
    joined against recovered clusters without leaking anything to analytics.
    """
    shares = [a.share for a in config.archetypes]
    if abs(sum(shares) - 1.0) > 1e-9:
        raise ConfigError(f"archetype shares sum to {sum(shares)}, expected 1")
    catalog_size = len(catalog.entries)
    for a in config.archetypes:
        if a.objects_range[1] > catalog_size:
            raise ConfigError(
                f"archetype {a.name!r} wants up to {a.objects_range[1]} objects, "
                f"catalog has {catalog_size}"
            )
        if a.objects_range[0] < 1 or a.objects_range[0] > a.objects_range[1]:
            raise ConfigError(f"archetype {a.name!r} has bad objects_range")

    walker = _TripWalker(config, graph, catalog)
    counts = _quota_counts(shares, config.n_trips)
    arch_of = np.repeat(np.arange(len(counts)), counts)
    _aux_rng(config.seed, 0).shuffle(arch_of)

    events: list[RawEvent] = []
    labels: list[TripLabel] = []
    device_counter = 0
    pending: tuple[str, int, int] | None = None  # (device, session_index, start)

    for t in range(config.n_trips):
        rng = _trip_rng(config.seed, t)
        arch = config.archetypes[int(arch_of[t])]
        language = _categorical(rng, arch.language_mix)

        if pending is not None:
            device, session_index, start = pending
            pending = None
        else:
            device = f"d{device_counter:06d}"
            device_counter += 1
            session_index = 0
            start = config.start_epoch + int(rng.integers(0, config.window_seconds))

        duration_target = int(rng.integers(arch.duration_range[0], arch.duration_range[1] + 1))
        budget = int(rng.integers(arch.objects_range[0], arch.objects_range[1] + 1))

        refuser = False
        if arch.stair_refusal > 0:
            refuser = bool(rng.random() < arch.stair_refusal)

        exit_stop: int | None = None
        plays: list[tuple[str, str]] | None = None
        if arch.tour_affinity > 0 and not refuser and rng.random() < arch.tour_affinity:
            made = _make_tour_trip(config, walker, arch, tours, language, rng)
            if made is not None:
                plays, exit_stop = made

        if plays is None:
            rooms = walker.sample_rooms(rng, arch, budget, refuser)
            if arch.stair_refusal > 0 and walker.stair_bottom is not None:
                if walker.stair_bottom not in rooms:
                    rooms.append(walker.stair_bottom)
                if refuser:
                    rooms = [r for r in rooms if not walker.is_upper[r]]
                elif walker.stair_top not in rooms:
                    rooms.append(walker.stair_top)
            route = walker.route_order(rooms)
            # inserted gate rooms must still receive a play each
            budget = max(budget, len(route))
            plays = _spread_plays(walker.room_objects, route, budget, rng, arch.object_jitter)

        trip_events = _emit_trip_events(
            config, walker, device, language, start, plays, duration_target, rng
        )
        events.extend(trip_events)
        labels.append(TripLabel(trip_name(device, session_index), arch.name, exit_stop))

        if session_index == 0 and rng.random() < config.device_reuse_rate:
            end = trip_events[-1].timestamp
            pending = (device, 1, end + 1801 + int(rng.integers(900, 7200)))

    events.extend(_planted_anomalies(config, walker, labels))
    events.sort(key=lambda e: (e.timestamp, e.device_id, e.action, e.object_id))
    return events, labels


def _planted_anomalies(
    config: GenConfig, walker: _TripWalker, labels: list[TripLabel]
) -> list[RawEvent]:
    """Sessions engineered to violate exactly one cleaning rule each."""
    events: list[RawEvent] = []
    base = config.start_epoch

    for i in range(config.plant_short):
        rng = _aux_rng(config.seed, 100 + i)
        device = f"bad-short-{i:03d}"
        start = base + int(rng.integers(0, config.window_seconds))
        room = walker.rooms[0]
        objs = walker.room_objects[room]
        for k in range(4):
            events.append(RawEvent(device, start + k * 60, objs[k % len(objs)], "en", "play"))
        labels.append(TripLabel(trip_name(device, 0), PLANTED_SHORT, None))

    for i in range(config.plant_sparse):
        rng = _aux_rng(config.seed, 200 + i)
        device = f"bad-sparse-{i:03d}"
        start = base + int(rng.integers(0, config.window_seconds))
        room = walker.rooms[0]
        objs = walker.room_objects[room]
        events.append(RawEvent(device, start, objs[0], "en", "play"))
        events.append(RawEvent(device, start + 400, objs[min(1, len(objs) - 1)], "en", "play"))
        labels.append(TripLabel(trip_name(device, 0), PLANTED_SPARSE, None))

    if config.plant_teleport:
        hops = walker.hops[walker.entrance]
        far_pairs = [
            (a, b)
            for a in walker.rooms
            for b in walker.rooms
            if walker.hops[a].get(b, 0) >= 3 and walker.room_objects[a] and walker.room_objects[b]
        ]
        if not far_pairs:
            raise ConfigError("no room pair is 3+ hops apart; cannot plant teleports")
        a, b = sorted(far_pairs)[0]
        del hops
        for i in range(config.plant_teleport):
            rng = _aux_rng(config.seed, 300 + i)
            device = f"bad-teleport-{i:03d}"
            start = base + int(rng.integers(0, config.window_seconds))
            t = start
            for k in range(10):
                room = a if k % 2 == 0 else b
                obj = walker.room_objects[room][k % len(walker.room_objects[room])]
                events.append(RawEvent(device, t, obj, "en", "play"))
                t += 10
            events.append(RawEvent(device, t + 400, walker.room_objects[a][0], "en", "play"))
            labels.append(TripLabel(trip_name(device, 0), PLANTED_TELEPORT, None))
    return events


@dataclass
class SyntheticReview:
    review_id: str
    rating: int
    title: str
    body: str
    language: str
    trip_type: str
    visit_date: date
    review_date: date


def _rating_mean_plan(config: GenConfig) -> dict[str, float]:
    """Per-trip-type mean targets: flagged offsets are exact, the rest absorb
    the balance so the overall mean stays on target."""
    shares = config.trip_type_shares
    offsets = config.trip_type_offsets
    target = config.mean_rating_target
    flagged_share = sum(shares[g] for g in offsets if g in shares)
    flagged_mass = sum(shares[g] * (target + offsets[g]) for g in offsets if g in shares)
    rest_share = 1.0 - flagged_share
    rest_mean = (target - flagged_mass) / rest_share if rest_share > 0 else target
    plan = {}
    for g in shares:
        plan[g] = target + offsets[g] if g in offsets else rest_mean
    return plan


def _draw_rating(rng: np.random.Generator, mu: float) -> int:
    mu = min(max(mu, 1.0), 5.0)
    lower = min(int(math.floor(mu)), 4)
    p_upper = mu - lower
    return lower + 1 if rng.random() < p_upper else lower


_LAG_BINS = ((0, 7, 0.4), (8, 30, 0.3), (31, 90, 0.2), (91, 365, 0.1))


def _draw_lag(rng: np.random.Generator) -> int:
    u = rng.random()
    acc = 0.0
    for lo, hi, p in _LAG_BINS:
        acc += p
        if u < acc:
            return lo + int(rng.integers(0, hi - lo + 1))
    return 91 + int(rng.integers(0, 275))


def _expected_drift_share() -> float:
    return sum(p for lo, _, p in _LAG_BINS if lo > 30)


def _compose_text(rng: np.random.Generator, rating: int, n_tokens: int) -> str:
    pos_rate = {1: 0.02, 2: 0.05, 3: 0.10, 4: 0.16, 5: 0.22}[rating]
    neg_rate = {1: 0.22, 2: 0.16, 3: 0.08, 4: 0.04, 5: 0.015}[rating]
    words = []
    for _ in range(n_tokens):
        u = rng.random()
        if u < pos_rate:
            pool = POSITIVE_WORDS
        elif u < pos_rate + neg_rate:
            pool = NEGATIVE_WORDS
        else:
            pool = FILLER_WORDS
        words.append(pool[int(rng.integers(len(pool)))])
    return " ".join(words)


def generate_reviews(config: GenConfig) -> list[SyntheticReview]:
    """Synthesize a review corpus hitting the planted rating structure."""
    for g in config.trip_type_offsets:
        if g not in config.trip_type_shares:
            raise ConfigError(f"offset for unknown trip type {g!r}")
    plan = _rating_mean_plan(config)
    drift_correction = config.lag_drift * _expected_drift_share()
    base_date = date(2016, 1, 1)

    reviews: list[SyntheticReview] = []
    for r in range(config.n_reviews):
        rng = _review_rng(config.seed, r)
        trip_type = _categorical(rng, config.trip_type_shares)
        language = _categorical(rng, config.review_language_mix)
        visit = base_date + timedelta(days=int(rng.integers(0, 660)))
        lag = _draw_lag(rng)
        review_date = visit + timedelta(days=lag)

        mu = plan[trip_type] - drift_correction
        if lag > config.lag_drift_threshold_days:
            mu += config.lag_drift
        rating = _draw_rating(rng, mu)

        n_tokens = int(
            round(
                config.base_length
                + config.length_slope * (rating - config.mean_rating_target)
                + rng.normal(0.0, 6.0)
            )
        )
        n_tokens = min(max(n_tokens, 10), 320)
        body = _compose_text(rng, rating, n_tokens)
        title = _compose_text(rng, rating, 3 + int(rng.integers(0, 3)))

        reviews.append(
            SyntheticReview(
                review_id=f"rv{r:06d}",
                rating=rating,
                title=title,
                body=body,
                language=language,
                trip_type=trip_type,
                visit_date=visit,
                review_date=review_date,
            )
        )
    return reviews


def events_to_jsonl(events: list[RawEvent]) -> str:
    lines = [
        json.dumps(
            {
                "device_id": e.device_id,
                "ts": e.timestamp,
                "object_id": e.object_id,
                "lang": e.language,
                "action": e.action,
            },
            sort_keys=True,
            ensure_ascii=False,
        )
        for e in events
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def reviews_to_jsonl(reviews: list[SyntheticReview]) -> str:
    lines = [
        json.dumps(
            {
                "review_id": rv.review_id,
                "rating": rv.rating,
                "title": rv.title,
                "body": rv.body,
                "lang": rv.language,
                "trip_type": rv.trip_type,
                "visit_date": rv.visit_date.isoformat(),
                "review_date": rv.review_date.isoformat(),
            },
            sort_keys=True,
            ensure_ascii=False,
        )
        for rv in reviews
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def labels_to_jsonl(labels: list[TripLabel]) -> str:
    lines = [
        json.dumps(
            {"trip_id": lb.trip_id, "archetype": lb.archetype, "exit_stop": lb.exit_stop},
            sort_keys=True,
            ensure_ascii=False,
        )
        for lb in sorted(labels, key=lambda lb: lb.trip_id)
    ]
    return "\n".join(lines) + ("\n" if lines else "")
