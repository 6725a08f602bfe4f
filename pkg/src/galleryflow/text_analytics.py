"""Review sentiment scoring and aggregation.

Reviews arrive pre-translated to English with an original-language tag.
Scoring is plain bag-of-words against a signed lexicon: no negation
handling, matching the aggregation the rest of the pipeline expects. A
lexicon TSV may carry extra named score columns; only the signed ``score``
column feeds polarity, the rest pass through for reporting.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from datetime import date, datetime

import numpy as np

from .stats import pearson

TRIP_TYPES = ("solo", "couple", "family", "friends", "business", "unknown")
LAG_BINS = (("0-7", 0, 7), ("8-30", 8, 30), ("31-90", 31, 90), (">90", 91, None))

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


@dataclass(frozen=True)
class Review:
    review_id: str
    rating: int
    title: str
    body: str
    language: str
    trip_type: str
    review_date: date
    visit_date: date | None = None


@dataclass
class Lexicon:
    name: str
    entries: dict[str, int]
    extras: dict[str, dict[str, float]]

    def validate(self):
        for token, score in self.entries.items():
            if not token or token != token.lower():
                raise ValueError(f"lexicon token not lowercase: {token!r}")
            if not -5 <= score <= 5:
                raise ValueError(f"lexicon score out of range for {token!r}: {score}")


@dataclass(frozen=True)
class SentimentScore:
    review_id: str
    raw_sum: int
    token_count: int

    @property
    def polarity(self) -> float:
        return self.raw_sum / self.token_count


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumeric boundaries, drop 1-char tokens."""
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= 2]


def load_lexicon(source, name: str = "lexicon") -> Lexicon:
    """Read a token<TAB>score TSV, optionally with a header and extra columns."""
    if hasattr(source, "read"):
        raw = source.read()
    else:
        raw = source
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")

    lines = [ln for ln in raw.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty lexicon")
    extra_names: list[str] = []
    start = 0
    first = lines[0].split("\t")
    if len(first) >= 2:
        try:
            float(first[1])
        except ValueError:
            extra_names = [c.strip() for c in first[2:]]
            start = 1

    entries: dict[str, int] = {}
    extras: dict[str, dict[str, float]] = {}
    for ln in lines[start:]:
        parts = ln.split("\t")
        if len(parts) < 2:
            raise ValueError(f"bad lexicon line: {ln!r}")
        token = parts[0].strip()
        score = int(parts[1])
        entries[token] = score
        if len(parts) > 2:
            names = extra_names or [f"col{i}" for i in range(2, len(parts))]
            extras[token] = {nm: float(v) for nm, v in zip(names, parts[2:])}
    lex = Lexicon(name=name, entries=entries, extras=extras)
    lex.validate()
    return lex


def score_sentiment(review: Review, lexicon: Lexicon) -> SentimentScore | None:
    """Sum lexicon hits over title+body tokens; None when there are no tokens."""
    tokens = tokenize(review.title + " " + review.body)
    if not tokens:
        return None
    raw = sum(lexicon.entries.get(t, 0) for t in tokens)
    return SentimentScore(review_id=review.review_id, raw_sum=raw, token_count=len(tokens))


def _parse_date(value) -> date | None:
    if value is None or value == "":
        return None
    return datetime.strptime(str(value), "%Y-%m-%d").date()


def load_reviews(source) -> tuple[list[Review], int]:
    """Parse reviews JSONL; invalid records are counted, not fatal."""
    if hasattr(source, "read"):
        raw = source.read()
    else:
        raw = source
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")

    reviews: list[Review] = []
    invalid = 0
    for line in raw.splitlines():
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
            rating = int(rec["rating"])
            if not 1 <= rating <= 5:
                raise ValueError("rating out of range")
            review_date = _parse_date(rec["review_date"])
            if review_date is None:
                raise ValueError("missing review_date")
            visit_date = _parse_date(rec.get("visit_date"))
            if visit_date is not None and review_date < visit_date:
                raise ValueError("review precedes visit")
            trip_type = str(rec.get("trip_type", "unknown")).lower()
            if trip_type not in TRIP_TYPES:
                trip_type = "unknown"
            reviews.append(
                Review(
                    review_id=str(rec["review_id"]),
                    rating=rating,
                    title=str(rec.get("title", "")),
                    body=str(rec.get("body", "")),
                    language=str(rec.get("lang", "en")).lower(),
                    trip_type=trip_type,
                    review_date=review_date,
                    visit_date=visit_date,
                )
            )
        except (KeyError, ValueError, TypeError):
            invalid += 1
    return reviews, invalid


def _group_key(review: Review, key: str):
    if key == "trip_type":
        return review.trip_type
    if key == "month":
        return (review.visit_date or review.review_date).month
    if key == "language":
        return review.language
    raise ValueError(f"unknown group key {key!r}")


def aggregate_by_group(
    reviews: list[Review],
    scores: dict[str, SentimentScore],
    key: str,
) -> list[dict]:
    """Per-group n, mean rating, mean polarity, and a 95% CI half-width.

    The CI uses the normal approximation 1.96*sd/sqrt(n); groups under five
    reviews are flagged low-confidence.
    """
    groups: dict[object, list[Review]] = {}
    for r in reviews:
        groups.setdefault(_group_key(r, key), []).append(r)

    table: list[dict] = []
    for gval in sorted(groups, key=lambda v: str(v)):
        members = groups[gval]
        ratings = np.asarray([r.rating for r in members], dtype=np.float64)
        pols = [scores[r.review_id].polarity for r in members if r.review_id in scores]
        n = len(members)
        sd = float(ratings.std(ddof=1)) if n > 1 else 0.0
        table.append(
            {
                "group": gval,
                "n": n,
                "mean_rating": float(ratings.mean()),
                "mean_polarity": float(np.mean(pols)) if pols else None,
                "ci_half_width": 1.96 * sd / math.sqrt(n) if n > 0 else None,
                "low_confidence": n < 5,
            }
        )
    return table


def rating_lag_analysis(reviews: list[Review]) -> dict:
    """Mean rating binned by days between visit and review.

    Records without both dates are skipped; negative lags are excluded and
    counted. An empty ``bins`` list marks the no-data case.
    """
    lags: list[tuple[int, int]] = []
    excluded_negative = 0
    missing = 0
    for r in reviews:
        if r.visit_date is None:
            missing += 1
            continue
        lag = (r.review_date - r.visit_date).days
        if lag < 0:
            excluded_negative += 1
            continue
        lags.append((lag, r.rating))

    bins = []
    for label, lo, hi in LAG_BINS:
        members = [rating for lag, rating in lags if lag >= lo and (hi is None or lag <= hi)]
        if members:
            bins.append({"lag_bin": label, "n": len(members), "mean_rating": float(np.mean(members))})
    return {"bins": bins, "excluded_negative": excluded_negative, "missing_dates": missing}


def length_positivity(reviews: list[Review], scores: dict[str, SentimentScore]) -> dict:
    """Pearson correlation of review token count with rating and polarity."""
    scored = [(scores[r.review_id], r) for r in reviews if r.review_id in scores]
    if len(scored) < 3:
        raise ValueError("need at least 3 scored reviews")
    lengths = [s.token_count for s, _ in scored]
    ratings = [r.rating for _, r in scored]
    pols = [s.polarity for s, _ in scored]
    r_rating = pearson(lengths, ratings)
    r_pol = pearson(lengths, pols)
    return {
        "n": len(scored),
        "length_vs_rating": None if math.isnan(r_rating) else r_rating,
        "length_vs_polarity": None if math.isnan(r_pol) else r_pol,
    }


def tfidf_terms(reviews: list[Review], group_key: str, top_k: int = 10) -> dict[object, list[dict]]:
    """Top distinguishing terms per group by tf-idf over concatenated texts.

    tf is the term share within the group document; idf is ln of total
    groups over groups containing the term, so universal terms score 0 and
    never rank. Ties order alphabetically.
    """
    docs: dict[object, list[str]] = {}
    for r in reviews:
        docs.setdefault(_group_key(r, group_key), []).extend(tokenize(r.title + " " + r.body))
    if len(docs) < 2:
        raise ValueError("tf-idf needs at least 2 groups")

    df: dict[str, int] = {}
    for tokens in docs.values():
        for term in set(tokens):
            df[term] = df.get(term, 0) + 1
    n_groups = len(docs)

    out: dict[object, list[dict]] = {}
    for gval in sorted(docs, key=lambda v: str(v)):
        tokens = docs[gval]
        total = len(tokens)
        counts: dict[str, int] = {}
        for t in tokens:
            counts[t] = counts.get(t, 0) + 1
        scored = [
            {"term": term, "score": (c / total) * math.log(n_groups / df[term])}
            for term, c in counts.items()
        ]
        scored.sort(key=lambda rec: (-rec["score"], rec["term"]))
        out[gval] = [rec for rec in scored[:top_k] if rec["score"] > 0]
    return out
