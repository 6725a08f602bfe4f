import json
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from galleryflow.errors import CorpusRejectedError
from galleryflow.ingest import (
    CleanTrip,
    IngestConfig,
    RawEvent,
    clean_events,
    filter_sessions,
    flag_anomalies,
    infer_group_size,
    parse_event_log,
    sessionize,
    trip_name,
)


def jsonl(records):
    return "\n".join(json.dumps(r) for r in records).encode()


def record(device="d1", ts=0, obj="oa", lang="en", action="play"):
    return {"device_id": device, "ts": ts, "object_id": obj, "lang": lang, "action": action}


def play(device, ts, obj, lang="en"):
    return RawEvent(device, ts, obj, lang, "play")


class TestParseEventLog:
    def test_empty_stream(self):
        events, malformed = parse_event_log(b"")
        assert events == [] and malformed == 0

    def test_three_wellformed_rows_in_order(self):
        rows = [record(ts=5, obj="o1"), record(ts=2, obj="o2"), record(ts=9, obj="o3")]
        events, malformed = parse_event_log(jsonl(rows))
        assert malformed == 0
        assert [e.object_id for e in events] == ["o1", "o2", "o3"]
        assert [e.timestamp for e in events] == [5, 2, 9]
        assert all(e.device_id == "d1" and e.language == "en" and e.action == "play" for e in events)

    def test_missing_timestamp_counted_not_fatal(self):
        rows = [record(ts=1), record(ts=2), record(ts=3)]
        broken = {k: v for k, v in record().items() if k != "ts"}
        events, malformed = parse_event_log(jsonl(rows[:1] + [broken] + rows[1:]))
        assert len(events) == 3
        assert malformed == 1

    def test_mostly_malformed_corpus_rejected(self):
        rows = [record(ts=1), {"nope": 1}, {"nope": 2}]
        with pytest.raises(CorpusRejectedError):
            parse_event_log(jsonl(rows))

    def test_csv_roundtrip(self):
        csv_text = (
            "device_id,ts,object_id,lang,action\n"
            "d1,10,o1,en,play\n"
            "d1,20,,en,menu\n"
            "d1,,o2,en,play\n"
        )
        events, malformed = parse_event_log(csv_text.encode(), format="csv")
        assert len(events) == 2
        assert malformed == 1
        assert events[0].object_id == "o1"
        assert events[1].action == "menu"

    def test_play_requires_object(self):
        events, malformed = parse_event_log(jsonl([record(ts=1), record(obj="")]))
        assert len(events) == 1 and malformed == 1

    def test_negative_timestamp_malformed(self):
        events, malformed = parse_event_log(jsonl([record(ts=1), record(ts=-5)]))
        assert len(events) == 1 and malformed == 1

    def test_non_utf8_stream_raises_io_error(self):
        with pytest.raises(OSError):
            parse_event_log(b"\xff\xfe{bad}")

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            parse_event_log(b"", format="xml")


class TestSessionize:
    def test_no_split_under_gap(self):
        events = [play("d1", t, "o") for t in (0, 600, 1200)]
        assert len(sessionize(events)) == 1

    def test_split_at_large_gap(self):
        events = [play("d1", 0, "o1"), play("d1", 600, "o2"), play("d1", 4200, "o3")]
        sessions = sessionize(events)
        assert len(sessions) == 2
        assert [e.timestamp for e in sessions[0]] == [0, 600]
        assert [e.timestamp for e in sessions[1]] == [4200]

    def test_boundary_gap_does_not_split(self):
        events = [play("d1", 0, "o1"), play("d1", 1800, "o2")]
        assert len(sessionize(events)) == 1

    def test_interleaved_devices_separate(self):
        events = [play("d1", 0, "a"), play("d2", 10, "x"), play("d1", 20, "b"), play("d2", 30, "y")]
        sessions = sessionize(events)
        assert len(sessions) == 2
        by_device = {s[0].device_id: [e.object_id for e in s] for s in sessions}
        assert by_device == {"d1": ["a", "b"], "d2": ["x", "y"]}

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(
            st.tuples(st.sampled_from(["d1", "d2", "d3"]), st.integers(0, 10_000)),
            min_size=1,
            max_size=40,
        )
    )
    def test_partition_property(self, pairs):
        events = [play(d, t, "o") for d, t in pairs]
        sessions = sessionize(events, gap_seconds=900)
        flat = [e for s in sessions for e in s]
        assert Counter((e.device_id, e.timestamp) for e in flat) == Counter(
            (e.device_id, e.timestamp) for e in events
        )
        for session in sessions:
            times = [e.timestamp for e in session]
            assert times == sorted(times)
            assert all(b - a <= 900 for a, b in zip(times, times[1:]))


class TestFilterSessions:
    def test_too_few_interactions_removed(self, toy_museum):
        _, catalog, _ = toy_museum
        session = [play("d1", 0, "o-granite-stele"), play("d1", 900, "o-jade-dragon")]
        trips = filter_sessions([session], catalog)
        assert trips == []

    def test_too_short_removed(self, toy_museum):
        _, catalog, _ = toy_museum
        session = [play("d1", i * 20, "o-granite-stele") for i in range(10)]
        assert filter_sessions([session], catalog) == []

    def test_boundary_inclusive_kept(self, toy_museum):
        _, catalog, _ = toy_museum
        session = [
            play("d1", 0, "o-granite-stele"),
            play("d1", 150, "o-pharaoh-colossus"),
            play("d1", 300, "o-sphinx-fragment"),
        ]
        trips = filter_sessions([session], catalog)
        assert len(trips) == 1
        trip = trips[0]
        assert trip.duration == 300
        assert len(trip.events) == 3
        assert trip.trip_id == trip_name("d1", 0)

    def test_unknown_object_dropped_trip_kept(self, toy_museum):
        _, catalog, _ = toy_museum
        session = [
            play("d1", 0, "o-granite-stele"),
            play("d1", 100, "o-ghost"),
            play("d1", 200, "o-pharaoh-colossus"),
            play("d1", 400, "o-sphinx-fragment"),
        ]
        trips = filter_sessions([session], catalog)
        assert len(trips) == 1
        assert len(trips[0].events) == 3

    def test_language_is_modal(self, toy_museum):
        _, catalog, _ = toy_museum
        session = [
            play("d1", 0, "o-granite-stele", "fr"),
            play("d1", 200, "o-pharaoh-colossus", "fr"),
            play("d1", 400, "o-sphinx-fragment", "en"),
        ]
        assert filter_sessions([session], catalog)[0].language == "fr"


def make_trip(rooms_times, toy_catalog, trip_id="t0"):
    room_to_obj = {
        "R1": "o-atrium-lamassu",
        "R2": "o-granite-stele",
        "R3": "o-demotic-tablet",
        "R4": "o-frieze-panel",
        "R5": "o-reliquary-chest",
        "R7": "o-jade-dragon",
        "R10": "o-kente-panel",
    }
    events = [(ts, room_to_obj[room], room) for ts, room in rooms_times]
    return CleanTrip(
        trip_id=trip_id,
        events=events,
        start_time=events[0][0],
        duration=events[-1][0] - events[0][0],
        language="en",
    )


class TestFlagAnomalies:
    def test_adjacent_rooms_unflagged(self, toy_museum):
        graph, catalog, _ = toy_museum
        trip = make_trip([(0, "R1"), (200, "R2"), (400, "R3"), (600, "R4")], catalog)
        out = flag_anomalies(trip, graph)
        assert out is not None and out.flagged_fraction == 0.0

    def test_one_teleport_in_ten_kept(self, toy_museum):
        graph, catalog, _ = toy_museum
        # 11 events -> 10 transitions, exactly one 4-hop jump in 10 seconds
        seq = [(i * 100, "R1") if i % 2 == 0 else (i * 100, "R2") for i in range(10)]
        seq.append((seq[-1][0] + 10, "R10"))  # R2 -> R10 is 3 hops; need >=3
        trip = make_trip(seq, catalog)
        out = flag_anomalies(trip, graph)
        assert out is not None
        assert out.flagged_fraction == pytest.approx(0.1)

    def test_two_teleports_in_ten_rejected(self, toy_museum):
        graph, catalog, _ = toy_museum
        seq = [(i * 100, "R1") if i % 2 == 0 else (i * 100, "R2") for i in range(9)]
        seq.append((seq[-1][0] + 10, "R10"))
        seq.append((seq[-1][0] + 20, "R1"))
        trip = make_trip(seq, catalog)
        assert flag_anomalies(trip, graph) is None

    def test_slow_long_jumps_unflagged(self, toy_museum):
        graph, catalog, _ = toy_museum
        trip = make_trip([(0, "R1"), (300, "R10"), (600, "R1"), (900, "R10")], catalog)
        out = flag_anomalies(trip, graph)
        assert out is not None and out.flagged_fraction == 0.0


class TestInferGroupSize:
    def test_singleton(self, toy_museum):
        _, catalog, _ = toy_museum
        trip = make_trip([(0, "R1"), (200, "R2"), (400, "R3")], catalog)
        assert infer_group_size([trip])[0].group_size == 1

    def test_identical_sets_close_starts_grouped(self, toy_museum):
        _, catalog, _ = toy_museum
        a = make_trip([(0, "R1"), (200, "R2"), (400, "R3")], catalog, "a")
        b = make_trip([(60, "R1"), (260, "R2"), (460, "R3")], catalog, "b")
        out = infer_group_size([a, b])
        assert [t.group_size for t in out] == [2, 2]

    def test_disjoint_sets_not_grouped(self, toy_museum):
        _, catalog, _ = toy_museum
        a = make_trip([(0, "R1"), (200, "R2"), (400, "R3")], catalog, "a")
        b = make_trip([(60, "R4"), (260, "R5"), (460, "R7")], catalog, "b")
        out = infer_group_size([a, b])
        assert [t.group_size for t in out] == [1, 1]

    def test_transitive_closure(self, toy_museum):
        _, catalog, _ = toy_museum
        a = make_trip([(0, "R1"), (200, "R2"), (400, "R3")], catalog, "a")
        b = make_trip([(250, "R1"), (450, "R2"), (650, "R3")], catalog, "b")
        c = make_trip([(500, "R1"), (700, "R2"), (900, "R3")], catalog, "c")
        out = infer_group_size([a, b, c])  # a-b and b-c within window, a-c not
        assert [t.group_size for t in out] == [3, 3, 3]


class TestCleanEvents:
    def test_pipeline_invariants_and_determinism(self, toy_museum):
        graph, catalog, _ = toy_museum
        events = []
        for d in ("d2", "d1"):
            base = 0 if d == "d2" else 50
            for i, obj in enumerate(["o-granite-stele", "o-pharaoh-colossus", "o-demotic-tablet", "o-frieze-panel"]):
                events.append(play(d, base + i * 200, obj))
        trips1, rep1 = clean_events(events, graph, catalog)
        trips2, rep2 = clean_events(list(events), graph, catalog)
        assert [t.trip_id for t in trips1] == sorted(t.trip_id for t in trips1)
        assert [t.trip_id for t in trips1] == [t.trip_id for t in trips2]
        assert rep1.to_dict() == rep2.to_dict()
        for t in trips1:
            assert len(t.events) >= 3
            assert t.duration >= 300
            assert t.flagged_fraction <= 0.10
            assert all(room in set(graph.room_ids) for _, _, room in t.events)

    def test_empty_input(self, toy_museum):
        graph, catalog, _ = toy_museum
        trips, rep = clean_events([], graph, catalog)
        assert trips == [] and rep.trips == 0

    def test_report_counts_by_reason(self, toy_museum):
        graph, catalog, _ = toy_museum
        events = []
        # valid trip
        for i, obj in enumerate(["o-granite-stele", "o-pharaoh-colossus", "o-demotic-tablet"]):
            events.append(play("ok", i * 200, obj))
        # too few plays
        events.append(play("few", 0, "o-granite-stele"))
        events.append(play("few", 400, "o-jade-dragon"))
        # too short
        for i in range(5):
            events.append(play("short", i * 30, "o-granite-stele"))
        # teleporter: valid counts/duration but jumpy
        for i in range(10):
            room_obj = "o-atrium-lamassu" if i % 2 == 0 else "o-kente-panel"
            events.append(play("tele", i * 10, room_obj))
        events.append(play("tele", 600, "o-atrium-lamassu"))
        trips, rep = clean_events(events, graph, catalog)
        assert [t.trip_id for t in trips] == [trip_name("ok", 0)]
        assert rep.removed_few == 1
        assert rep.removed_short == 1
        assert rep.removed_anomalous == 1
