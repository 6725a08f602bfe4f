"""Behavioural segmentation: Jaccard distances, UPGMA, silhouette, profiles.

Trips become binary object-visitation vectors; pairwise Jaccard distances
feed average-linkage clustering. The cut is chosen by maximum mean
silhouette over a configurable k range, and clusters are profiled into
named archetypes by an overridable decision table.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .ingest import CleanTrip

ARCHETYPE_TREKKER = "Committed Trekker"
ARCHETYPE_EXPLORER = "Leisurely Explorer"
ARCHETYPE_TARGETED = "Targeted Visitor"
ARCHETYPE_SAMPLER = "Speedy Sampler"


@dataclass(frozen=True)
class VisitVector:
    trip_id: str
    visited: frozenset[str]

    def __post_init__(self):
        if not self.visited:
            raise ValueError(f"trip {self.trip_id}: empty visit set")


@dataclass
class DistanceMatrix:
    ids: list[str]
    d: np.ndarray

    def validate(self):
        n = len(self.ids)
        if self.d.shape != (n, n):
            raise ValueError("distance matrix shape mismatch")
        if np.any(np.diag(self.d) != 0):
            raise ValueError("nonzero diagonal")
        if not np.array_equal(self.d, self.d.T):
            raise ValueError("asymmetric matrix")
        if self.d.min() < 0 or self.d.max() > 1:
            raise ValueError("entries outside [0,1]")


@dataclass
class Dendrogram:
    merges: list[tuple[int, int, float, int]]  # (left_node, right_node, height, size)
    n_leaves: int

    def validate(self):
        if len(self.merges) != self.n_leaves - 1:
            raise ValueError("merge count mismatch")
        heights = [m[2] for m in self.merges]
        for a, b in zip(heights, heights[1:]):
            if b < a - 1e-12:
                raise ValueError(f"heights decrease: {a} -> {b}")
        if self.merges and self.merges[-1][3] != self.n_leaves:
            raise ValueError("final merge does not cover all leaves")


@dataclass
class ClusterProfile:
    label: int
    archetype: str
    share: float
    median_duration: float
    median_objects: int
    median_time_per_object: float
    language_mix: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "archetype": self.archetype,
            "share": self.share,
            "median_duration": self.median_duration,
            "median_objects": self.median_objects,
            "median_time_per_object": self.median_time_per_object,
            "language_mix": self.language_mix,
        }


@dataclass
class ClusterSolution:
    k: int
    assignment: dict[str, int]  # trip_id -> label in 1..k
    mean_silhouette: float
    profiles: list[ClusterProfile] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "mean_silhouette": self.mean_silhouette,
            "assignments": [
                {"trip_id": tid, "label": label} for tid, label in sorted(self.assignment.items())
            ],
            "profiles": [p.to_dict() for p in self.profiles],
        }


@dataclass
class ProfileRules:
    """Archetype decision table; thresholds are config keys."""

    sampler_max_duration: float = 900.0
    targeted_min_tour_share: float = 0.5


def jaccard_distance(a: set[str] | frozenset[str], b: set[str] | frozenset[str]) -> float:
    """1 - |a&b| / |a|b|; undefined (error) when both sets are empty."""
    union = len(a | b)
    if union == 0:
        raise ValueError("Jaccard distance undefined for two empty sets")
    return 1.0 - len(a & b) / union


def trips_to_vectors(trips: list[CleanTrip]) -> list[VisitVector]:
    return [VisitVector(t.trip_id, frozenset(t.visited_objects)) for t in trips]


def build_distance_matrix(vectors: list[VisitVector]) -> DistanceMatrix:
    """Full symmetric Jaccard matrix, rows ordered by trip_id."""
    if len(vectors) < 2:
        raise ValueError("need at least 2 vectors")
    ordered = sorted(vectors, key=lambda v: v.trip_id)
    ids = [v.trip_id for v in ordered]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate trip ids")

    objects = sorted({o for v in ordered for o in v.visited})
    col = {o: i for i, o in enumerate(objects)}
    indptr = np.zeros(len(ordered) + 1, dtype=np.int64)
    cols: list[int] = []
    for i, v in enumerate(ordered):
        members = sorted(col[o] for o in v.visited)
        cols.extend(members)
        indptr[i + 1] = len(cols)
    indices = np.asarray(cols, dtype=np.int64)

    d = _kernels.jaccard_matrix(indptr, indices, len(objects))
    return DistanceMatrix(ids=ids, d=d)


def upgma(dm: DistanceMatrix) -> Dendrogram:
    """Average-linkage dendrogram; deterministic via smallest-node tie rule."""
    merges_arr = _kernels.upgma_linkage(dm.d)
    merges = [
        (int(row[0]), int(row[1]), float(row[2]), int(row[3])) for row in merges_arr
    ]
    dendro = Dendrogram(merges=merges, n_leaves=len(dm.ids))
    dendro.validate()
    return dendro


def _cut_labels(dendro: Dendrogram, k: int) -> np.ndarray:
    """0-based labels per leaf, clusters numbered by smallest leaf index."""
    n = dendro.n_leaves
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range 1..{n}")
    parent = list(range(2 * n - 1))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for t, (left, right, _, _) in enumerate(dendro.merges[: n - k]):
        node = n + t
        parent[find(left)] = node
        parent[find(right)] = node

    reps: dict[int, int] = {}
    labels = np.zeros(n, dtype=np.int64)
    for leaf in range(n):
        root = find(leaf)
        if root not in reps:
            reps[root] = len(reps)
        labels[leaf] = reps[root]
    return labels


def cut_dendrogram(dendro: Dendrogram, k: int, ids: list[str]) -> dict[str, int]:
    """Undo the last k-1 merges; labels 1..k ordered by representative trip_id."""
    labels = _cut_labels(dendro, k)
    return {tid: int(lbl) + 1 for tid, lbl in zip(ids, labels)}


def silhouette(dm: DistanceMatrix, assignment: dict[str, int]) -> tuple[dict[str, float], float]:
    """Per-trip silhouette widths and their mean for a labelled matrix."""
    labels_present = sorted(set(assignment.values()))
    if len(labels_present) < 2:
        raise ValueError("silhouette requires at least 2 clusters")
    remap = {lbl: i for i, lbl in enumerate(labels_present)}
    labels = np.asarray([remap[assignment[tid]] for tid in dm.ids], dtype=np.int64)
    s = _kernels.silhouette_samples(dm.d, labels, len(labels_present))
    return {tid: float(v) for tid, v in zip(dm.ids, s)}, float(s.mean())


def select_k(
    dm: DistanceMatrix,
    dendro: Dendrogram,
    k_range: tuple[int, int] = (2, 10),
) -> ClusterSolution:
    """Evaluate each k in range; keep the max mean silhouette (ties: smaller k)."""
    k_min, k_max = k_range
    n = len(dm.ids)
    if n <= k_max:
        raise ValueError(f"need more than {k_max} trips, got {n}")
    best: ClusterSolution | None = None
    for k in range(k_min, k_max + 1):
        labels = _cut_labels(dendro, k)
        s = _kernels.silhouette_samples(dm.d, labels, k)
        mean_s = float(s.mean())
        if best is None or mean_s > best.mean_silhouette:
            assignment = {tid: int(lbl) + 1 for tid, lbl in zip(dm.ids, labels)}
            best = ClusterSolution(k=k, assignment=assignment, mean_silhouette=mean_s)
    assert best is not None
    return best


def _median(values: list[float]) -> float:
    return float(np.median(np.asarray(values, dtype=np.float64)))


def profile_clusters(
    solution: ClusterSolution,
    trips: list[CleanTrip],
    tour_stop_objects: frozenset[str] = frozenset(),
    rules: ProfileRules | None = None,
) -> ClusterSolution:
    """Fill per-cluster behavioural profiles and archetype names.

    Archetypes follow a tercile decision table over the whole corpus:
    top-tercile duration and object count reads as the Trekker, sub-15-minute
    visits as the Sampler, a narrow object set dominated by tour stops as the
    Targeted visitor, everything else as the Explorer.
    """
    r = rules or ProfileRules()
    by_id = {t.trip_id: t for t in trips}
    missing = [tid for tid in solution.assignment if tid not in by_id]
    if missing:
        raise ValueError(f"trips missing for assigned ids: {missing[:3]}")

    assigned = [by_id[tid] for tid in solution.assignment]
    durations = np.asarray([t.duration for t in assigned], dtype=np.float64)
    object_counts = np.asarray([len(t.visited_objects) for t in assigned], dtype=np.float64)
    dur_q33, dur_q67 = np.quantile(durations, [1 / 3, 2 / 3])
    obj_q33, obj_q67 = np.quantile(object_counts, [1 / 3, 2 / 3])

    profiles: list[ClusterProfile] = []
    total = len(solution.assignment)
    for label in range(1, solution.k + 1):
        members = [by_id[tid] for tid, lbl in solution.assignment.items() if lbl == label]
        if not members:
            continue
        durs = [float(t.duration) for t in members]
        objs = [float(len(t.visited_objects)) for t in members]
        tpos = [t.duration / len(t.visited_objects) for t in members]

        langs: dict[str, int] = {}
        for t in members:
            langs[t.language] = langs.get(t.language, 0) + 1
        mix = {lang: count / len(members) for lang, count in sorted(langs.items())}

        med_dur = _median(durs)
        med_obj = _median(objs)
        if tour_stop_objects:
            shares = [
                sum(1 for _, oid, _ in t.events if oid in tour_stop_objects) / len(t.events)
                for t in members
            ]
            tour_share = float(np.mean(shares))
        else:
            tour_share = 0.0

        if med_dur >= dur_q67 and med_obj >= obj_q67:
            archetype = ARCHETYPE_TREKKER
        elif med_dur < r.sampler_max_duration:
            archetype = ARCHETYPE_SAMPLER
        elif med_obj <= obj_q33 and tour_share >= r.targeted_min_tour_share:
            archetype = ARCHETYPE_TARGETED
        else:
            archetype = ARCHETYPE_EXPLORER

        profiles.append(
            ClusterProfile(
                label=label,
                archetype=archetype,
                share=len(members) / total,
                median_duration=med_dur,
                median_objects=int(round(_median(objs))),
                median_time_per_object=_median(tpos),
                language_mix=mix,
            )
        )
    solution.profiles = profiles
    return solution
