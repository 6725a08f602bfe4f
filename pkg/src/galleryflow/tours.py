"""Tour matching, completion curves, Markov chains, and exit entropy.

A trip "starts" a tour when it plays the tour's first stop and later any
further prescribed stop in order; the matcher extracts the longest in-order
subsequence of prescribed stops, so out-of-order detours are absorbed rather
than penalized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import CleanTrip
from .museum import TourDef
from .stats import normalized_entropy

STATUS_COMPLETED = "completed"
STATUS_PARTIAL = "partial"
STATUS_NONE = "none"


@dataclass
class TourSession:
    trip_id: str
    tour_id: str
    language: str
    matched_stops: list[int]  # 1-based stop indices, strictly increasing
    status: str

    @property
    def exit_position(self) -> int:
        """Highest prescribed stop reached after entering at stop 1; 0 if the
        tour was never entered from its first stop."""
        if self.matched_stops and self.matched_stops[0] == 1:
            return self.matched_stops[-1]
        return 0


@dataclass
class CompletionCurve:
    tour_id: str
    language: str
    survival: list[float]  # s_k for k = 1..n over starters

    def validate(self):
        if not self.survival or abs(self.survival[0] - 1.0) > 1e-12:
            raise ValueError("survival must start at 1")
        for a, b in zip(self.survival, self.survival[1:]):
            if b > a + 1e-12:
                raise ValueError("survival must be non-increasing")


@dataclass
class TourChain:
    tour_id: str
    states: list[str]  # "1".."n" plus "exit"
    transition: np.ndarray
    completion_probability: float

    def validate(self):
        n = self.transition.shape[0]
        if self.transition.shape != (n, n):
            raise ValueError("transition matrix not square")
        if np.any(np.abs(self.transition.sum(axis=1) - 1.0) > 1e-9):
            raise ValueError("rows must sum to 1")
        exit_row = self.transition[-1]
        if exit_row[-1] != 1.0 or np.any(exit_row[:-1] != 0.0):
            raise ValueError("exit state must be absorbing")


def _longest_inorder_match(stop_index: dict[str, int], played: list[str]) -> list[int]:
    """Longest strictly-increasing sequence of stop indices appearing in play
    order; ties prefer the lexicographically smallest index sequence."""
    seq = [stop_index[oid] for oid in played if oid in stop_index]
    if not seq:
        return []
    n_stops = max(stop_index.values())
    # best_len[v] / best_seq[v]: optimal subsequence ending exactly at stop v
    best_len = [0] * (n_stops + 1)
    best_seq: list[list[int] | None] = [None] * (n_stops + 1)
    for v in seq:
        cand_len = 0
        cand_prev: list[int] = []
        for u in range(1, v):
            if best_len[u] > cand_len or (
                best_len[u] == cand_len and best_seq[u] is not None and (not cand_prev or best_seq[u] < cand_prev)
            ):
                cand_len = best_len[u]
                cand_prev = best_seq[u] or []
        new_seq = cand_prev + [v]
        if cand_len + 1 > best_len[v] or (cand_len + 1 == best_len[v] and (best_seq[v] is None or new_seq < best_seq[v])):
            best_len[v] = cand_len + 1
            best_seq[v] = new_seq
    best: list[int] = []
    for v in range(1, n_stops + 1):
        s = best_seq[v]
        if s is None:
            continue
        if len(s) > len(best) or (len(s) == len(best) and s < best):
            best = s
    return best


def _status_for(matched: list[int], n_stops: int) -> str:
    started = len(matched) >= 2 and matched[0] == 1
    if not started:
        return STATUS_NONE
    return STATUS_COMPLETED if matched[-1] == n_stops else STATUS_PARTIAL


def match_tour_sessions(trips: list[CleanTrip], tours: list[TourDef]) -> list[TourSession]:
    """Assign each trip to its best-matching tour.

    Best = most matched stops; ties go to the tour whose match begins
    earliest in the trip, then to the smaller tour id. Trips matching no
    prescribed stop of any tour yield no session.
    """
    indexes = {t.tour_id: {oid: i + 1 for i, oid in enumerate(t.stops)} for t in tours}
    sessions: list[TourSession] = []
    for trip in trips:
        played = [oid for _, oid, _ in trip.events]
        best: tuple[int, int, str, list[int]] | None = None  # (-len, first_pos, tour_id, matched)
        for tour in tours:
            matched = _longest_inorder_match(indexes[tour.tour_id], played)
            if not matched:
                continue
            first_stop_obj = tour.stops[matched[0] - 1]
            first_pos = played.index(first_stop_obj)
            key = (-len(matched), first_pos, tour.tour_id, matched)
            if best is None or key < best:
                best = key
        if best is None:
            continue
        tour_id = best[2]
        tour = next(t for t in tours if t.tour_id == tour_id)
        sessions.append(
            TourSession(
                trip_id=trip.trip_id,
                tour_id=tour_id,
                language=trip.language,
                matched_stops=best[3],
                status=_status_for(best[3], len(tour.stops)),
            )
        )
    return sessions


def _starters(sessions: list[TourSession], tour_id: str, language: str | None) -> list[TourSession]:
    return [
        s
        for s in sessions
        if s.tour_id == tour_id
        and (language is None or s.language == language)
        and s.status in (STATUS_PARTIAL, STATUS_COMPLETED)
    ]


def completion_curve(
    sessions: list[TourSession], tour: TourDef, language: str | None = None
) -> CompletionCurve | None:
    """Survival fractions over starters; None when nobody started."""
    starters = _starters(sessions, tour.tour_id, language)
    if not starters:
        return None
    n = len(tour.stops)
    exits = [s.exit_position for s in starters]
    survival = [sum(1 for e in exits if e >= k) / len(starters) for k in range(1, n + 1)]
    curve = CompletionCurve(tour_id=tour.tour_id, language=language or "all", survival=survival)
    curve.validate()
    return curve


def tour_markov_chain(sessions: list[TourSession], tour: TourDef) -> TourChain:
    """Maximum-likelihood stop-progression chain.

    Sessions that entered at stop 1 populate the chain; from stop k the
    continue probability is the fraction of those at k that reached k+1.
    The product of continue probabilities is the chain completion
    probability, which telescopes to the observed completion fraction.
    """
    n = len(tour.stops)
    entered = [s for s in sessions if s.tour_id == tour.tour_id and s.exit_position >= 1]
    if not entered:
        raise ValueError(f"no sessions entered tour {tour.tour_id}")
    reached = [sum(1 for s in entered if s.exit_position >= k) for k in range(1, n + 1)]

    size = n + 1  # states 1..n plus exit
    matrix = np.zeros((size, size), dtype=np.float64)
    completion = 1.0
    for k in range(1, n):
        at_k, at_next = reached[k - 1], reached[k]
        p = at_next / at_k if at_k > 0 else 0.0
        completion *= p
        matrix[k - 1, k] = p
        matrix[k - 1, size - 1] = 1.0 - p
    matrix[n - 1, size - 1] = 1.0  # finishing the last stop ends the tour
    matrix[size - 1, size - 1] = 1.0

    chain = TourChain(
        tour_id=tour.tour_id,
        states=[str(k) for k in range(1, n + 1)] + ["exit"],
        transition=matrix,
        completion_probability=completion,
    )
    chain.validate()
    return chain


def completion_entropy(sessions: list[TourSession], tour: TourDef) -> float:
    """Normalized Shannon entropy of exit positions (0..n) for one tour.

    0 means every visitor exits at the same stop; 1 means exits are uniform
    over all n+1 positions.
    """
    n = len(tour.stops)
    relevant = [s for s in sessions if s.tour_id == tour.tour_id]
    if not any(s.status in (STATUS_PARTIAL, STATUS_COMPLETED) for s in relevant):
        raise ValueError(f"no starters for tour {tour.tour_id}")
    counts = np.zeros(n + 1, dtype=np.int64)
    for s in relevant:
        counts[s.exit_position] += 1
    return normalized_entropy(counts, n + 1)
