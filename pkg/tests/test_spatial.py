import json
import math

import numpy as np
import pytest

from galleryflow.errors import ConvergenceError
from galleryflow.ingest import CleanTrip
from galleryflow.museum import hop_distance, load_museum_graph
from galleryflow.spatial import (
    PenaltyParams,
    TransitionModel,
    build_transition_model,
    dropoff_rates,
    fit_stair_penalty,
    flow_pagerank,
    lambda_grid,
    penalized_shortest_paths,
    popularity_distance_fit,
)
from galleryflow.stats import spearman

from oracles import brute_shortest_path, dense_pagerank


def trip_from_rooms(trip_id, rooms, catalog=None, dt=120):
    lookup = {
        "R1": "o-atrium-lamassu", "R2": "o-granite-stele", "R3": "o-demotic-tablet",
        "R4": "o-frieze-panel", "R5": "o-reliquary-chest", "R6": "o-woodcut-series",
        "R7": "o-jade-dragon", "R8": "o-celadon-vase", "R9": "o-porcelain-ewer",
        "R10": "o-kente-panel", "R11": "o-ancestor-mask", "R12": "o-astrolabe-brass",
    }
    events = [(i * dt, lookup.get(r, f"obj-{r}"), r) for i, r in enumerate(rooms)]
    return CleanTrip(trip_id, events, 0, events[-1][0], "en")


class TestBuildTransitionModel:
    def test_direct_construction(self, toy_museum):
        graph, _, _ = toy_museum
        model = build_transition_model([trip_from_rooms("t", ["R1", "R2", "R3"])], graph)
        i = {r: k for k, r in enumerate(model.rooms)}
        assert model.counts[i["R1"], i["R2"]] == 1
        assert model.counts[i["R2"], i["R3"]] == 1
        assert model.counts.sum() == 2
        assert model.room_visits["R1"] == 1

    def test_self_pairs_skipped(self, toy_museum):
        graph, _, _ = toy_museum
        model = build_transition_model([trip_from_rooms("t", ["R1", "R1", "R2"])], graph)
        i = {r: k for k, r in enumerate(model.rooms)}
        assert model.counts[i["R1"], i["R1"]] == 0
        assert model.counts[i["R1"], i["R2"]] == 1
        assert model.counts.sum() == 1

    def test_rows_stochastic(self, toy_museum):
        graph, _, _ = toy_museum
        trips = [
            trip_from_rooms("a", ["R1", "R2", "R3", "R2"]),
            trip_from_rooms("b", ["R1", "R7", "R1", "R2"]),
        ]
        model = build_transition_model(trips, graph)
        model.validate()
        out_rows = model.counts.sum(axis=1) > 0
        assert np.allclose(model.probs[out_rows].sum(axis=1), 1.0, atol=1e-9)


class TestPenalizedShortestPaths:
    def test_origin_zero(self, toy_museum):
        graph, _, _ = toy_museum
        field = penalized_shortest_paths(graph, PenaltyParams(3.0, 1.0), "R1")
        assert field.dist["R1"] == 0.0

    def test_hand_flat_plus_stair(self, toy_museum):
        graph, _, _ = toy_museum
        field = penalized_shortest_paths(graph, PenaltyParams(3.0, 1.0), "R1")
        assert field.dist["R8"] == pytest.approx(4.0)  # flat 1 + stair_up 3

    def test_unit_params_equal_hop_distance(self, toy_museum):
        graph, _, _ = toy_museum
        field = penalized_shortest_paths(graph, PenaltyParams(1.0, 1.0), "R1")
        for room in graph.room_ids:
            assert field.dist[room] == hop_distance(graph, "R1", room)

    def test_matches_exhaustive_enumeration(self):
        rng = np.random.default_rng(31)
        for _ in range(25):
            n = int(rng.integers(3, 8))
            rooms = [{"id": f"N{i}", "name": f"N{i}", "floor": int(i > n // 2), "theme": "t"} for i in range(n)]
            kinds = {}
            edges = []
            for i in range(n - 1):
                a, b = f"N{i}", f"N{i+1}"
                up = rooms[i + 1]["floor"] > rooms[i]["floor"]
                edges.append({"from": a, "to": b, "kind": "stair_up" if up else "flat"})
                edges.append({"from": b, "to": a, "kind": "stair_down" if up else "flat"})
            for _ in range(2):
                i, j = sorted(rng.choice(n, size=2, replace=False).tolist())
                if j - i < 2:
                    continue
                a, b = f"N{i}", f"N{j}"
                if any(e["from"] == a and e["to"] == b for e in edges):
                    continue
                up = rooms[j]["floor"] > rooms[i]["floor"]
                edges.append({"from": a, "to": b, "kind": "stair_up" if up else "flat"})
                edges.append({"from": b, "to": a, "kind": "stair_down" if up else "flat"})
            doc = {"rooms": rooms, "edges": edges, "objects": [], "tours": [], "entrance": "N0"}
            graph, _, _ = load_museum_graph(json.dumps(doc).encode())
            params = PenaltyParams(float(rng.uniform(1, 5)), float(rng.uniform(0.5, 2)))
            field = penalized_shortest_paths(graph, params, "N0")
            weighted = [
                (e.from_room, e.to_room, params.edge_cost(e.kind)) for e in graph.edges
            ]
            for room in graph.room_ids:
                ref = brute_shortest_path(weighted, "N0", room) if room != "N0" else 0.0
                assert field.dist[room] == pytest.approx(ref, abs=1e-12)

    def test_monotone_in_lambda_up(self, toy_museum):
        graph, _, _ = toy_museum
        prev = None
        for lam in (1.0, 2.0, 3.0, 5.0):
            field = penalized_shortest_paths(graph, PenaltyParams(lam, 1.0), "R1")
            upper = [field.dist[r.room_id] for r in graph.rooms if r.floor > 0]
            if prev is not None:
                assert all(b >= a for a, b in zip(prev, upper))
            prev = upper

    def test_unknown_origin(self, toy_museum):
        graph, _, _ = toy_museum
        with pytest.raises(KeyError):
            penalized_shortest_paths(graph, PenaltyParams(1.0, 1.0), "nope")


class TestPenaltyParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            PenaltyParams(0.5, 1.0)
        with pytest.raises(ValueError):
            PenaltyParams(1.0, 0.0)

    def test_grid_shape(self):
        grid = lambda_grid()
        ups = sorted({u for u, _ in grid})
        downs = sorted({d for _, d in grid})
        assert len(ups) == 21 and ups[0] == 1.0 and ups[-1] == 6.0
        assert len(downs) == 7 and downs[0] == 0.5 and downs[-1] == 2.0


class TestFitStairPenalty:
    def test_single_floor_degenerate(self, path_museum):
        graph, _, _ = path_museum
        trips = [trip_from_rooms("t", ["P1", "P2", "P3"])]
        model = build_transition_model(trips, graph)
        fit = fit_stair_penalty(model, graph, "P1")
        assert fit.degenerate
        assert (fit.params.lambda_up, fit.params.lambda_down) == (1.0, 1.0)

    def test_recovers_planted_decay(self, toy_museum):
        graph, _, _ = toy_museum
        # visits follow exact exp decay at lambda_up = 3, ground beats upper on ties
        field = penalized_shortest_paths(graph, PenaltyParams(3.0, 1.0), "R1")
        visits = {}
        for room in graph.room_ids:
            damp = 0.8 if graph.floor_of(room) > 0 else 1.0
            visits[room] = int(10000 * damp * math.exp(-0.8 * field.dist[room]))
        model = TransitionModel(
            rooms=list(graph.room_ids),
            counts=np.zeros((12, 12), dtype=np.int64),
            probs=np.zeros((12, 12)),
            room_visits=visits,
        )
        fit = fit_stair_penalty(model, graph, "R1")
        assert 2.5 <= fit.params.lambda_up <= 3.5
        assert fit.spearman >= fit.baseline_spearman

    def test_deterministic(self, toy_museum):
        graph, _, _ = toy_museum
        trips = [
            trip_from_rooms("a", ["R1", "R2", "R3", "R4"]),
            trip_from_rooms("b", ["R1", "R2", "R8"]),
            trip_from_rooms("c", ["R1", "R7", "R1", "R2"]),
        ]
        model = build_transition_model(trips, graph)
        f1 = fit_stair_penalty(model, graph, "R1")
        f2 = fit_stair_penalty(model, graph, "R1")
        assert (f1.params, f1.spearman) == (f2.params, f2.spearman)


class TestFlowPagerank:
    def test_scores_sum_to_one(self, toy_museum):
        graph, _, _ = toy_museum
        trips = [trip_from_rooms("a", ["R1", "R2", "R3"]), trip_from_rooms("b", ["R1", "R7"])]
        model = build_transition_model(trips, graph)
        scores = flow_pagerank(model, 0.85, "R1")
        assert sum(scores.values()) == pytest.approx(1.0, abs=1e-9)
        assert all(v >= 0 for v in scores.values())

    def test_symmetric_cycle_uniform(self):
        rooms = ["A", "B", "C"]
        probs = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=np.float64)
        model = TransitionModel(rooms, np.ones((3, 3), dtype=np.int64), probs, {})
        scores = flow_pagerank(model, 0.85, restart=None)
        assert all(v == pytest.approx(1 / 3, abs=1e-9) for v in scores.values())

    def test_matches_dense_solve(self, toy_museum):
        graph, _, _ = toy_museum
        rng = np.random.default_rng(17)
        trips = []
        room_ids = list(graph.room_ids)
        for i in range(60):
            length = int(rng.integers(2, 6))
            walk = ["R1"]
            for _ in range(length):
                nbrs = [e.to_room for e in graph.neighbors(walk[-1])]
                walk.append(nbrs[int(rng.integers(len(nbrs)))])
            trips.append(trip_from_rooms(f"t{i}", walk))
        model = build_transition_model(trips, graph)
        scores = flow_pagerank(model, 0.85, "R1")
        teleport = np.zeros(len(room_ids))
        teleport[room_ids.index("R1")] = 1.0
        ref = dense_pagerank(model.probs, 0.85, teleport)
        ours = np.array([scores[r] for r in model.rooms])
        assert np.allclose(ours, ref, atol=1e-8)

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(3)
        counts = rng.integers(0, 5, size=(5, 5))
        np.fill_diagonal(counts, 0)
        rooms = [f"N{i}" for i in range(5)]
        row_sums = counts.sum(axis=1, keepdims=True)
        probs = np.where(row_sums > 0, counts / np.where(row_sums == 0, 1, row_sums), 0.0)
        model = TransitionModel(rooms, counts, probs, {})
        scores = flow_pagerank(model, 0.85, "N2")
        perm = [3, 1, 4, 0, 2]
        rooms_p = [rooms[i] for i in perm]
        model_p = TransitionModel(
            rooms_p, counts[np.ix_(perm, perm)], probs[np.ix_(perm, perm)], {}
        )
        scores_p = flow_pagerank(model_p, 0.85, "N2")
        for room in rooms:
            assert scores[room] == pytest.approx(scores_p[room], abs=1e-12)

    def test_nonconvergence_raises(self):
        probs = np.array([[0.0, 1.0], [1.0, 0.0]])
        model = TransitionModel(["A", "B"], np.ones((2, 2), dtype=np.int64), probs, {})
        with pytest.raises(ConvergenceError) as exc_info:
            flow_pagerank(model, 0.99999, "A", tol=1e-300, max_iter=5)
        assert exc_info.value.last_delta > 0


class TestDropoffRates:
    def test_always_continue(self, toy_museum):
        graph, _, _ = toy_museum
        trips = [trip_from_rooms(f"t{i}", ["R1", "R2", "R8"]) for i in range(5)]
        model = build_transition_model(trips, graph)
        assert dropoff_rates(model, [("R2", "R8")])[("R2", "R8")] == 0.0

    def test_b_before_a_counts_as_dropoff(self, toy_museum):
        graph, _, _ = toy_museum
        trips = [trip_from_rooms("t", ["R8", "R2", "R1"])]
        model = build_transition_model(trips, graph)
        assert dropoff_rates(model, [("R2", "R8")])[("R2", "R8")] == 1.0

    def test_unvisited_room_is_undefined(self, toy_museum):
        graph, _, _ = toy_museum
        trips = [trip_from_rooms("t", ["R1", "R2", "R3"])]
        model = build_transition_model(trips, graph)
        assert dropoff_rates(model, [("R11", "R12")])[("R11", "R12")] is None

    def test_mixed_rate(self, toy_museum):
        graph, _, _ = toy_museum
        trips = [trip_from_rooms(f"c{i}", ["R1", "R2", "R8"]) for i in range(3)]
        trips += [trip_from_rooms(f"d{i}", ["R1", "R2", "R3"]) for i in range(7)]
        model = build_transition_model(trips, graph)
        assert dropoff_rates(model, [("R2", "R8")])[("R2", "R8")] == pytest.approx(0.7)


class TestPopularityFit:
    def test_perfect_monotone_spearman(self, toy_museum):
        graph, _, _ = toy_museum
        params = PenaltyParams(3.0, 1.0)
        field = penalized_shortest_paths(graph, params, "R1")
        order = sorted(graph.room_ids, key=lambda r: (field.dist[r], r))
        visits = {room: 1000 - 50 * i for i, room in enumerate(order)}
        model = TransitionModel(
            list(graph.room_ids), np.zeros((12, 12), dtype=np.int64), np.zeros((12, 12)), visits
        )
        fit = popularity_distance_fit(model, graph, params, "R1")
        # distances tie between some rooms, so allow near-perfect
        assert fit.spearman <= -0.98

    def test_shuffled_visits_weak_correlation(self, toy_museum):
        graph, _, _ = toy_museum
        rng = np.random.default_rng(8)
        rhos = []
        for _ in range(40):
            values = rng.permutation([100 * (i + 1) for i in range(12)])
            visits = {room: int(v) for room, v in zip(graph.room_ids, values)}
            model = TransitionModel(
                list(graph.room_ids), np.zeros((12, 12), dtype=np.int64), np.zeros((12, 12)), visits
            )
            fit = popularity_distance_fit(model, graph, PenaltyParams(1.0, 1.0), "R1")
            rhos.append(abs(fit.spearman))
        assert float(np.median(rhos)) < 0.45

    def test_too_few_rooms(self):
        rooms = ["A", "B"]
        model = TransitionModel(rooms, np.zeros((2, 2), dtype=np.int64), np.zeros((2, 2)), {})
        doc = {
            "rooms": [{"id": r, "name": r, "floor": 0, "theme": "t"} for r in rooms],
            "edges": [
                {"from": "A", "to": "B", "kind": "flat"},
                {"from": "B", "to": "A", "kind": "flat"},
            ],
            "objects": [],
            "tours": [],
            "entrance": "A",
        }
        graph, _, _ = load_museum_graph(json.dumps(doc).encode())
        with pytest.raises(ValueError):
            popularity_distance_fit(model, graph, PenaltyParams(1.0, 1.0), "A")

    def test_outliers_flagged(self, toy_museum):
        graph, _, _ = toy_museum
        params = PenaltyParams(1.0, 1.0)
        field = penalized_shortest_paths(graph, params, "R1")
        visits = {r: int(3000 * math.exp(-0.5 * field.dist[r])) for r in graph.room_ids}
        visits["R10"] = 3500  # a remote room with implausibly high traffic
        model = TransitionModel(
            list(graph.room_ids), np.zeros((12, 12), dtype=np.int64), np.zeros((12, 12)), visits
        )
        fit = popularity_distance_fit(model, graph, params, "R1")
        assert "R10" in fit.outlier_rooms
