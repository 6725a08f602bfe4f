"""Typed room graph, object catalog, and tour definitions.

The museum document is a single JSON object with ``rooms``, ``edges``,
``objects``, ``tours`` and ``entrance``. Loading validates referential
integrity atomically: any violation raises a :class:`MuseumLoadError`
subclass naming the offending record, and nothing is returned.

Edges are stored directed with mandatory reciprocals (flat pairs with flat,
stair_up pairs with stair_down) so stair direction can carry asymmetric
traversal cost downstream.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field

from .errors import (
    AsymmetricEdgeError,
    DanglingReferenceError,
    DisconnectedGraphError,
    DuplicateIdError,
    MuseumLoadError,
)

EDGE_KINDS = ("flat", "stair_up", "stair_down")
RECIPROCAL_KIND = {"flat": "flat", "stair_up": "stair_down", "stair_down": "stair_up"}


@dataclass(frozen=True)
class Room:
    room_id: str
    name: str
    floor: int
    theme: str


@dataclass(frozen=True)
class Edge:
    from_room: str
    to_room: str
    kind: str


@dataclass
class MuseumGraph:
    rooms: list[Room]
    edges: list[Edge]
    entrance: str
    _adjacency: dict[str, list[Edge]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._adjacency:
            adj: dict[str, list[Edge]] = {r.room_id: [] for r in self.rooms}
            for e in self.edges:
                adj[e.from_room].append(e)
            self._adjacency = adj

    @property
    def room_ids(self) -> list[str]:
        return [r.room_id for r in self.rooms]

    def room(self, room_id: str) -> Room:
        for r in self.rooms:
            if r.room_id == room_id:
                return r
        raise KeyError(room_id)

    def floor_of(self, room_id: str) -> int:
        return self.room(room_id).floor

    def neighbors(self, room_id: str) -> list[Edge]:
        return self._adjacency[room_id]

    def stair_edges(self) -> list[Edge]:
        """All stair_up edges, ordered as loaded."""
        return [e for e in self.edges if e.kind == "stair_up"]


@dataclass
class ObjectCatalog:
    entries: dict[str, tuple[str, str, str]]  # object_id -> (room_id, title, theme)

    def room_of(self, object_id: str) -> str | None:
        entry = self.entries.get(object_id)
        return entry[0] if entry else None

    def objects_in_room(self, room_id: str) -> list[str]:
        return sorted(oid for oid, (rid, _, _) in self.entries.items() if rid == room_id)


@dataclass(frozen=True)
class TourDef:
    tour_id: str
    name: str
    stops: tuple[str, ...]
    languages: tuple[str, ...]


def object_to_room(catalog: ObjectCatalog, object_id: str) -> str | None:
    """Exact lookup; ``None`` means not found (a value, not a fault)."""
    return catalog.room_of(object_id)


def hop_distance(graph: MuseumGraph, a: str, b: str) -> float:
    """Unweighted BFS shortest hop count between rooms; ``inf`` if unreachable."""
    ids = set(graph.room_ids)
    if a not in ids:
        raise KeyError(f"unknown room {a!r}")
    if b not in ids:
        raise KeyError(f"unknown room {b!r}")
    if a == b:
        return 0
    seen = {a}
    queue = deque([(a, 0)])
    while queue:
        room, d = queue.popleft()
        for e in graph.neighbors(room):
            if e.to_room == b:
                return d + 1
            if e.to_room not in seen:
                seen.add(e.to_room)
                queue.append((e.to_room, d + 1))
    return math.inf


def all_hop_distances(graph: MuseumGraph, origin: str) -> dict[str, float]:
    """BFS distances from ``origin`` to every room (``inf`` if unreachable)."""
    if origin not in set(graph.room_ids):
        raise KeyError(f"unknown room {origin!r}")
    dist: dict[str, float] = {rid: math.inf for rid in graph.room_ids}
    dist[origin] = 0
    queue = deque([origin])
    while queue:
        room = queue.popleft()
        for e in graph.neighbors(room):
            if dist[e.to_room] is math.inf or dist[e.to_room] > dist[room] + 1:
                dist[e.to_room] = dist[room] + 1
                queue.append(e.to_room)
    return dist


def _require(record: dict, key: str, path: str):
    if key not in record:
        raise MuseumLoadError(f"missing field {key!r}", path)
    return record[key]


def load_museum_graph(source) -> tuple[MuseumGraph, ObjectCatalog, list[TourDef]]:
    """Parse and validate a museum document.

    ``source`` may be a bytes/str JSON document or a binary file object.
    """
    if hasattr(source, "read"):
        raw = source.read()
    else:
        raw = source
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MuseumLoadError(f"invalid JSON: {exc}") from exc

    rooms: list[Room] = []
    seen_rooms: set[str] = set()
    for i, rec in enumerate(doc.get("rooms", [])):
        path = f"rooms[{i}]"
        rid = _require(rec, "id", path)
        if rid in seen_rooms:
            raise DuplicateIdError(f"duplicate room id {rid!r}", path)
        seen_rooms.add(rid)
        rooms.append(
            Room(rid, rec.get("name", rid), int(_require(rec, "floor", path)), rec.get("theme", ""))
        )
    if not rooms:
        raise MuseumLoadError("document has no rooms", "rooms")

    edges: list[Edge] = []
    edge_set: set[tuple[str, str, str]] = set()
    for i, rec in enumerate(doc.get("edges", [])):
        path = f"edges[{i}]"
        frm = _require(rec, "from", path)
        to = _require(rec, "to", path)
        kind = _require(rec, "kind", path)
        for endpoint in (frm, to):
            if endpoint not in seen_rooms:
                raise DanglingReferenceError(f"unknown room {endpoint!r}", path)
        if kind not in EDGE_KINDS:
            raise MuseumLoadError(f"unknown edge kind {kind!r}", path)
        if frm == to:
            raise MuseumLoadError("self-loop edge", path)
        key = (frm, to, kind)
        if key in edge_set:
            raise DuplicateIdError(f"duplicate edge {frm}->{to} ({kind})", path)
        edge_set.add(key)
        edges.append(Edge(frm, to, kind))

    for i, e in enumerate(edges):
        want = (e.to_room, e.from_room, RECIPROCAL_KIND[e.kind])
        if want not in edge_set:
            raise AsymmetricEdgeError(
                f"edge {e.from_room}->{e.to_room} ({e.kind}) lacks reciprocal "
                f"{want[0]}->{want[1]} ({want[2]})",
                f"edges[{i}]",
            )

    entrance = doc.get("entrance")
    if not entrance:
        raise MuseumLoadError("missing entrance", "entrance")
    if entrance not in seen_rooms:
        raise DanglingReferenceError(f"unknown room {entrance!r}", "entrance")

    graph = MuseumGraph(rooms=rooms, edges=edges, entrance=entrance)

    reachable = {rid for rid, d in all_hop_distances(graph, entrance).items() if d is not math.inf and d < math.inf}
    if len(reachable) != len(rooms):
        missing = sorted(set(graph.room_ids) - reachable)
        raise DisconnectedGraphError(f"rooms unreachable from entrance: {missing}", "rooms")

    entries: dict[str, tuple[str, str, str]] = {}
    for i, rec in enumerate(doc.get("objects", [])):
        path = f"objects[{i}]"
        oid = _require(rec, "id", path)
        room = _require(rec, "room", path)
        if oid in entries:
            raise DuplicateIdError(f"duplicate object id {oid!r}", path)
        if room not in seen_rooms:
            raise DanglingReferenceError(f"unknown room {room!r}", path)
        entries[oid] = (room, rec.get("title", oid), rec.get("theme", ""))
    catalog = ObjectCatalog(entries=entries)

    tours: list[TourDef] = []
    seen_tours: set[str] = set()
    for i, rec in enumerate(doc.get("tours", [])):
        path = f"tours[{i}]"
        tid = _require(rec, "id", path)
        if tid in seen_tours:
            raise DuplicateIdError(f"duplicate tour id {tid!r}", path)
        seen_tours.add(tid)
        stops = tuple(_require(rec, "stops", path))
        if not stops:
            raise MuseumLoadError("tour has no stops", path)
        if len(set(stops)) != len(stops):
            raise DuplicateIdError("tour has duplicate stops", path)
        for s in stops:
            if s not in entries:
                raise DanglingReferenceError(f"unknown object {s!r}", path)
        tours.append(TourDef(tid, rec.get("name", tid), stops, tuple(rec.get("languages", []))))

    return graph, catalog, tours


def dump_museum_graph(graph: MuseumGraph, catalog: ObjectCatalog, tours: list[TourDef]) -> bytes:
    """Canonical serialization: rooms/edges/objects/tours sorted by id.

    Loading the output and dumping again is byte-stable.
    """
    doc = {
        "rooms": [
            {"id": r.room_id, "name": r.name, "floor": r.floor, "theme": r.theme}
            for r in sorted(graph.rooms, key=lambda r: r.room_id)
        ],
        "edges": [
            {"from": e.from_room, "to": e.to_room, "kind": e.kind}
            for e in sorted(graph.edges, key=lambda e: (e.from_room, e.to_room, e.kind))
        ],
        "objects": [
            {"id": oid, "room": room, "title": title, "theme": theme}
            for oid, (room, title, theme) in sorted(catalog.entries.items())
        ],
        "tours": [
            {
                "id": t.tour_id,
                "name": t.name,
                "stops": list(t.stops),
                "languages": list(t.languages),
            }
            for t in sorted(tours, key=lambda t: t.tour_id)
        ],
        "entrance": graph.entrance,
    }
    return (json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n").encode("utf-8")
