from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from galleryflow.museum import load_museum_graph

TOY_MUSEUM = Path(__file__).parent.parent / "src" / "galleryflow" / "data" / "toy_museum.json"


@pytest.fixture(scope="session")
def toy_museum():
    return load_museum_graph(TOY_MUSEUM.read_bytes())


@pytest.fixture(scope="session")
def toy_museum_doc():
    return json.loads(TOY_MUSEUM.read_text(encoding="utf-8"))


def minimal_museum_doc() -> dict:
    """Two rooms, one flat edge pair, one object each, entrance set."""
    return {
        "rooms": [
            {"id": "A", "name": "A", "floor": 0, "theme": "x"},
            {"id": "B", "name": "B", "floor": 0, "theme": "y"},
        ],
        "edges": [
            {"from": "A", "to": "B", "kind": "flat"},
            {"from": "B", "to": "A", "kind": "flat"},
        ],
        "objects": [
            {"id": "oa", "room": "A", "title": "OA", "theme": "x"},
            {"id": "ob", "room": "B", "title": "OB", "theme": "y"},
        ],
        "tours": [],
        "entrance": "A",
    }


def path_museum_doc(n: int = 5) -> dict:
    """A path graph R1 - R2 - ... - Rn on one floor, one object per room."""
    rooms = [{"id": f"P{i}", "name": f"P{i}", "floor": 0, "theme": "t"} for i in range(1, n + 1)]
    edges = []
    for i in range(1, n):
        edges.append({"from": f"P{i}", "to": f"P{i+1}", "kind": "flat"})
        edges.append({"from": f"P{i+1}", "to": f"P{i}", "kind": "flat"})
    objects = [{"id": f"op{i}", "room": f"P{i}", "title": f"OP{i}", "theme": "t"} for i in range(1, n + 1)]
    return {"rooms": rooms, "edges": edges, "objects": objects, "tours": [], "entrance": "P1"}


@pytest.fixture()
def path_museum():
    return load_museum_graph(json.dumps(path_museum_doc()).encode())
