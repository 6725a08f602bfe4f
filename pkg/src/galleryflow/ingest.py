"""Audio-guide event log cleaning.

Pipeline: parse -> sessionize -> filter -> anomaly flagging -> group-size
inference. Every step is pure given its inputs and the thresholds in
:class:`IngestConfig`; output ordering is stabilized by trip_id so results
are independent of scheduling.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace

from .errors import CorpusRejectedError
from .museum import MuseumGraph, ObjectCatalog, all_hop_distances

ACTIONS = ("play", "stop", "menu")


@dataclass(frozen=True)
class RawEvent:
    device_id: str
    timestamp: int  # UTC epoch seconds, sub-second precision truncated
    object_id: str
    language: str
    action: str


@dataclass
class CleanTrip:
    trip_id: str
    events: list[tuple[int, str, str]]  # (timestamp, object_id, room_id), plays only
    start_time: int
    duration: int
    language: str
    group_size: int = 1
    flagged_fraction: float = 0.0

    @property
    def visited_objects(self) -> set[str]:
        return {oid for _, oid, _ in self.events}

    @property
    def room_sequence(self) -> list[str]:
        """Rooms in event order with consecutive repeats collapsed."""
        rooms: list[str] = []
        for _, _, rid in self.events:
            if not rooms or rooms[-1] != rid:
                rooms.append(rid)
        return rooms


@dataclass
class IngestConfig:
    gap_seconds: int = 1800
    min_plays: int = 3
    min_duration: int = 300
    anomaly_min_hops: int = 3
    anomaly_max_seconds: int = 30
    anomaly_max_fraction: float = 0.10
    group_window_seconds: int = 300
    group_min_similarity: float = 0.8


@dataclass
class CleaningReport:
    input_events: int = 0
    malformed: int = 0
    removed_short: int = 0
    removed_few: int = 0
    removed_anomalous: int = 0
    unknown_objects: int = 0
    trips: int = 0

    def to_dict(self) -> dict:
        return {
            "input_events": self.input_events,
            "malformed": self.malformed,
            "removed_short": self.removed_short,
            "removed_few": self.removed_few,
            "removed_anomalous": self.removed_anomalous,
            "unknown_objects": self.unknown_objects,
            "trips": self.trips,
        }


def trip_name(device_id: str, session_index: int) -> str:
    """Canonical trip id for session ``session_index`` of a device.

    Session indices count all sessions produced by :func:`sessionize` for the
    device, before any filtering, so ids are stable across threshold changes.
    """
    return f"{device_id}:{session_index}"


def _coerce_event(rec: dict) -> RawEvent | None:
    try:
        device_raw, ts_raw = rec["device_id"], rec["ts"]
        lang_raw, action_raw = rec["lang"], rec["action"]
    except (KeyError, TypeError):
        return None
    if device_raw is None or ts_raw is None or lang_raw is None or action_raw is None:
        return None
    device = str(device_raw).strip()
    obj = str(rec.get("object_id") or "").strip()
    lang = str(lang_raw).strip().lower()
    action = str(action_raw).strip().lower()
    if not device or not lang or action not in ACTIONS:
        return None
    try:
        ts = float(ts_raw)
    except (TypeError, ValueError):
        return None
    if not math.isfinite(ts) or ts < 0:
        return None
    if action == "play" and not obj:
        return None
    return RawEvent(device, int(ts), obj, lang, action)


def parse_event_log(source, format: str = "jsonl") -> tuple[list[RawEvent], int]:
    """Parse an event stream; returns (events, malformed_count).

    Malformed records are counted, not fatal, but a corpus that is more than
    half malformed is rejected outright.
    """
    if hasattr(source, "read"):
        raw = source.read()
    else:
        raw = source
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise OSError(f"event stream is not valid UTF-8: {exc}") from exc

    events: list[RawEvent] = []
    malformed = 0
    total = 0
    if format == "jsonl":
        for line in raw.splitlines():
            line = line.strip()
            if not line:
                continue
            total += 1
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                malformed += 1
                continue
            if not isinstance(rec, dict):
                malformed += 1
                continue
            ev = _coerce_event(rec)
            if ev is None:
                malformed += 1
            else:
                events.append(ev)
    elif format == "csv":
        reader = csv.DictReader(io.StringIO(raw))
        for rec in reader:
            total += 1
            ev = _coerce_event({k: v for k, v in rec.items() if k})
            if ev is None:
                malformed += 1
            else:
                events.append(ev)
    else:
        raise ValueError(f"unknown format {format!r}")

    if total and malformed > total / 2:
        raise CorpusRejectedError(
            f"{malformed}/{total} records malformed (over 50%); corpus rejected"
        )
    return events, malformed


def sessionize(events: list[RawEvent], gap_seconds: int = 1800) -> list[list[RawEvent]]:
    """Group events by device, sort by time, and split runs at inactivity gaps.

    A new session starts whenever the gap between consecutive events of one
    device exceeds ``gap_seconds``. The output is a partition of the input.
    """
    by_device: dict[str, list[RawEvent]] = {}
    for ev in events:
        by_device.setdefault(ev.device_id, []).append(ev)

    sessions: list[list[RawEvent]] = []
    for device in sorted(by_device):
        run = sorted(by_device[device], key=lambda e: e.timestamp)
        current = [run[0]]
        for ev in run[1:]:
            if ev.timestamp - current[-1].timestamp > gap_seconds:
                sessions.append(current)
                current = [ev]
            else:
                current.append(ev)
        sessions.append(current)
    return sessions


def filter_sessions(
    sessions: list[list[RawEvent]],
    catalog: ObjectCatalog,
    config: IngestConfig | None = None,
    report: CleaningReport | None = None,
) -> list[CleanTrip]:
    """Drop too-short / too-sparse sessions; map survivors to CleanTrips.

    Boundaries are inclusive: exactly ``min_plays`` interactions or exactly
    ``min_duration`` seconds survive. Events whose object is missing from the
    catalog are dropped (and counted) before the thresholds apply.
    """
    cfg = config or IngestConfig()
    rep = report if report is not None else CleaningReport()

    session_ordinal: dict[str, int] = {}
    trips: list[CleanTrip] = []
    for session in sessions:
        device = session[0].device_id
        index = session_ordinal.get(device, 0)
        session_ordinal[device] = index + 1

        plays: list[tuple[int, str, str]] = []
        for ev in session:
            if ev.action != "play":
                continue
            room = catalog.room_of(ev.object_id)
            if room is None:
                rep.unknown_objects += 1
                continue
            plays.append((ev.timestamp, ev.object_id, room))

        if len(plays) < cfg.min_plays:
            rep.removed_few += 1
            continue
        duration = plays[-1][0] - plays[0][0]
        if duration < cfg.min_duration:
            rep.removed_short += 1
            continue

        langs: dict[str, int] = {}
        for ev in session:
            langs[ev.language] = langs.get(ev.language, 0) + 1
        language = max(sorted(langs), key=lambda k: langs[k])

        trips.append(
            CleanTrip(
                trip_id=trip_name(device, index),
                events=plays,
                start_time=plays[0][0],
                duration=duration,
                language=language,
            )
        )
    return trips


def flag_anomalies(
    trip: CleanTrip,
    graph: MuseumGraph,
    config: IngestConfig | None = None,
    _hop_cache: dict[str, dict[str, float]] | None = None,
) -> CleanTrip | None:
    """Set flagged_fraction; return None when the trip is rejected.

    A consecutive event pair is flagged when the rooms are at least
    ``anomaly_min_hops`` apart (disconnected counts as infinitely far) and the
    time delta is under ``anomaly_max_seconds``. Trips with more than
    ``anomaly_max_fraction`` of their pairs flagged are rejected.
    """
    cfg = config or IngestConfig()
    cache = _hop_cache if _hop_cache is not None else {}

    flagged = 0
    pairs = len(trip.events) - 1
    for (t0, _, r0), (t1, _, r1) in zip(trip.events, trip.events[1:]):
        if r0 == r1:
            continue
        if t1 - t0 >= cfg.anomaly_max_seconds:
            continue
        if r0 not in cache:
            cache[r0] = all_hop_distances(graph, r0)
        hops = cache[r0].get(r1, math.inf)
        if hops >= cfg.anomaly_min_hops:
            flagged += 1

    fraction = flagged / pairs if pairs else 0.0
    if fraction > cfg.anomaly_max_fraction:
        return None
    return replace(trip, flagged_fraction=fraction)


def infer_group_size(
    trips: list[CleanTrip], config: IngestConfig | None = None
) -> list[CleanTrip]:
    """Union trips into visiting groups and set each trip's group_size.

    Two trips join a group when their start times differ by at most the
    configured window and their visited-object Jaccard similarity is at least
    the configured threshold; grouping is the transitive closure.
    """
    cfg = config or IngestConfig()
    n = len(trips)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    order = sorted(range(n), key=lambda i: trips[i].start_time)
    sets = [trips[i].visited_objects for i in range(n)]
    for pos, i in enumerate(order):
        ti = trips[i].start_time
        for j in order[pos + 1 :]:
            if trips[j].start_time - ti > cfg.group_window_seconds:
                break
            a, b = sets[i], sets[j]
            inter = len(a & b)
            if inter and inter / len(a | b) >= cfg.group_min_similarity:
                union(i, j)

    sizes: dict[int, int] = {}
    for i in range(n):
        sizes[find(i)] = sizes.get(find(i), 0) + 1
    return [replace(trips[i], group_size=sizes[find(i)]) for i in range(n)]


def clean_events(
    events: list[RawEvent],
    graph: MuseumGraph,
    catalog: ObjectCatalog,
    config: IngestConfig | None = None,
    malformed: int = 0,
) -> tuple[list[CleanTrip], CleaningReport]:
    """Run the full cleaning pipeline over parsed events."""
    cfg = config or IngestConfig()
    report = CleaningReport(input_events=len(events) + malformed, malformed=malformed)
    if not events:
        return [], report

    sessions = sessionize(events, cfg.gap_seconds)
    trips = filter_sessions(sessions, catalog, cfg, report)

    hop_cache: dict[str, dict[str, float]] = {}
    kept: list[CleanTrip] = []
    for trip in trips:
        flagged = flag_anomalies(trip, graph, cfg, hop_cache)
        if flagged is None:
            report.removed_anomalous += 1
        else:
            kept.append(flagged)

    kept = infer_group_size(kept, cfg)
    kept.sort(key=lambda t: t.trip_id)
    report.trips = len(kept)
    return kept, report


def trips_to_jsonl(trips: list[CleanTrip]) -> str:
    lines = []
    for t in trips:
        lines.append(
            json.dumps(
                {
                    "trip_id": t.trip_id,
                    "events": [[ts, oid, rid] for ts, oid, rid in t.events],
                    "start_time": t.start_time,
                    "duration": t.duration,
                    "language": t.language,
                    "group_size": t.group_size,
                    "flagged_fraction": round(t.flagged_fraction, 6),
                },
                sort_keys=True,
                ensure_ascii=False,
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")
