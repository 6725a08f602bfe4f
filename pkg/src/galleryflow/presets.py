"""Canned generator configurations for demos and validation corpora.

Each preset plants one family of structure at a known strength:

  demo        everything on at moderate size, for the bundled walkthrough
  archetypes  four behaviour clusters at 22/30/33/15% shares
  stairfit    distance-decay walkers under true stair multipliers 3.0 / 1.0
  dropoff     0.70 stair refusal at the main staircase
  tours       tour followers at 18% completion with mode-3 exits
  cleaning    a small corpus with planted short/sparse/teleport sessions
  perf        load-test scale: ~100k events, 2k trips, 10k reviews
"""

from __future__ import annotations

from .errors import ConfigError
from .synthgen import ArchetypeSpec, GenConfig, default_archetypes


def preset_demo(seed: int = 20160701, n_trips: int = 400, n_reviews: int = 800) -> GenConfig:
    return GenConfig(seed=seed, n_trips=n_trips, n_reviews=n_reviews)


def preset_archetypes(seed: int = 42, n_trips: int = 2000) -> GenConfig:
    """Four planted archetypes; tour exits kept narrow so the Targeted
    cluster stays tight in object-set space."""
    archetypes = default_archetypes()
    for a in archetypes:
        if a.name == "Targeted Visitor":
            a.tour_affinity = 1.0
    return GenConfig(
        seed=seed,
        n_trips=n_trips,
        n_reviews=0,
        archetypes=archetypes,
        completion_target=0.75,
        partial_exit_weights={4: 0.6, 5: 0.4},
    )


def preset_stairfit(seed: int = 7, n_trips: int = 5000) -> GenConfig:
    """One archetype, no room bias, no tours: visitation is pure distance
    decay under the true multipliers, so the grid fit must recover them."""
    walker = ArchetypeSpec(
        name="Wanderer",
        share=1.0,
        duration_range=(1200, 3000),
        objects_range=(6, 14),
    )
    return GenConfig(
        seed=seed,
        n_trips=n_trips,
        n_reviews=0,
        archetypes=[walker],
        lambda_up_true=3.0,
        lambda_down_true=1.0,
    )


def preset_dropoff(seed: int = 11, n_trips: int = 5000, refusal: float = 0.70) -> GenConfig:
    walker = ArchetypeSpec(
        name="Gateed Wanderer",
        share=1.0,
        duration_range=(1200, 3000),
        objects_range=(8, 14),
        stair_refusal=refusal,
    )
    return GenConfig(seed=seed, n_trips=n_trips, n_reviews=0, archetypes=[walker])


def preset_tours(seed: int = 5, n_trips: int = 2000) -> GenConfig:
    follower = ArchetypeSpec(
        name="Tour Follower",
        share=1.0,
        duration_range=(1200, 2400),
        objects_range=(4, 8),
        tour_affinity=1.0,
        preferred_tours=("T2",),
        language_mix={"en": 0.4, "ja": 0.25, "zh": 0.2, "de": 0.15},
    )
    return GenConfig(
        seed=seed,
        n_trips=n_trips,
        n_reviews=0,
        archetypes=[follower],
        completion_target=0.18,
        partial_exit_weights={2: 0.14, 3: 0.30, 4: 0.17, 5: 0.09, 6: 0.07, 7: 0.05},
    )


def preset_cleaning(seed: int = 3, n_trips: int = 43) -> GenConfig:
    """Roughly a thousand events with known-bad sessions planted."""
    cfg = GenConfig(seed=seed, n_trips=n_trips, n_reviews=0)
    cfg.plant_short = 4
    cfg.plant_sparse = 4
    cfg.plant_teleport = 3
    return cfg


def preset_perf(seed: int = 1, n_trips: int = 2000, n_reviews: int = 10000) -> GenConfig:
    """Scale test: every archetype plays most of the catalog, and play/stop
    pairs put the event volume near 50 per trip."""
    archetypes = default_archetypes()
    for a in archetypes:
        a.objects_range = (24, 40)
        a.tour_affinity = 0.0
    return GenConfig(seed=seed, n_trips=n_trips, n_reviews=n_reviews, archetypes=archetypes)


PRESETS = {
    "demo": preset_demo,
    "archetypes": preset_archetypes,
    "stairfit": preset_stairfit,
    "dropoff": preset_dropoff,
    "tours": preset_tours,
    "cleaning": preset_cleaning,
    "perf": preset_perf,
}


def make_preset(name: str, seed: int | None = None, n_trips: int | None = None, n_reviews: int | None = None) -> GenConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown synth preset {name!r}; choose from {sorted(PRESETS)}")
    cfg = PRESETS[name]()  # type: ignore[operator]
    if seed is not None:
        cfg.seed = seed
    if n_trips is not None:
        cfg.n_trips = n_trips
    if n_reviews is not None:
        cfg.n_reviews = n_reviews
    return cfg
