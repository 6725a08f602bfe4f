"""Pipeline configuration: flat key=value files with a strict key registry.

Unknown keys are rejected so typos fail loudly. Values are typed by the
registry defaults; paths stay strings and are resolved by the CLI.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

_DEFAULTS: dict[str, object] = {
    "paths.events": "",
    "paths.reviews": "",
    "paths.museum": "",
    "paths.lexicon": "",
    "paths.outdir": "out",
    "stages.cluster": True,
    "stages.flow": True,
    "stages.tours": True,
    "stages.sentiment": True,
    "ingest.format": "jsonl",
    "ingest.gap_seconds": 1800,
    "ingest.min_plays": 3,
    "ingest.min_duration": 300,
    "ingest.anomaly_min_hops": 3,
    "ingest.anomaly_max_seconds": 30,
    "ingest.anomaly_max_fraction": 0.10,
    "ingest.group_window_seconds": 300,
    "ingest.group_min_similarity": 0.8,
    "cluster.k_min": 2,
    "cluster.k_max": 10,
    "cluster.max_trips": 20000,
    "cluster.sampler_max_duration": 900.0,
    "cluster.targeted_min_tour_share": 0.5,
    "flow.damping": 0.85,
    "flow.lambda_up_min": 1.0,
    "flow.lambda_up_max": 6.0,
    "flow.lambda_up_step": 0.25,
    "flow.lambda_down_min": 0.5,
    "flow.lambda_down_max": 2.0,
    "flow.lambda_down_step": 0.25,
    "flow.boundaries": "auto",
    "sentiment.tfidf_group_key": "trip_type",
    "sentiment.top_k_terms": 10,
    "synth.preset": "demo",
    "synth.seed": 20160701,
    "synth.trips": 500,
    "synth.reviews": 1000,
}


def _coerce(key: str, raw: str) -> object:
    default = _DEFAULTS[key]
    if isinstance(default, bool):
        low = raw.strip().lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected boolean, got {raw!r}")
    if isinstance(default, int):
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected integer, got {raw!r}") from exc
    if isinstance(default, float):
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected number, got {raw!r}") from exc
    return raw.strip()


@dataclass
class PipelineConfig:
    values: dict[str, object] = field(default_factory=lambda: dict(_DEFAULTS))

    def __getitem__(self, key: str) -> object:
        if key not in self.values:
            raise ConfigError(f"unknown config key {key!r}")
        return self.values[key]

    def set(self, key: str, raw: str):
        if key not in _DEFAULTS:
            raise ConfigError(f"unknown config key {key!r}")
        self.values[key] = _coerce(key, raw)

    def path(self, key: str) -> Path | None:
        value = str(self[key])
        return Path(value) if value else None

    def to_canonical_dict(self) -> dict[str, object]:
        """Computation-relevant config only: path keys are excluded so report
        hashes do not depend on where inputs and outputs live (input content
        is hashed separately)."""
        return {k: self.values[k] for k in sorted(self.values) if not k.startswith("paths.")}

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        cfg = cls()
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
            key, _, raw = stripped.partition("=")
            cfg.set(key.strip(), raw.strip())
        return cfg

    def ingest_config(self):
        from .ingest import IngestConfig

        return IngestConfig(
            gap_seconds=int(self["ingest.gap_seconds"]),
            min_plays=int(self["ingest.min_plays"]),
            min_duration=int(self["ingest.min_duration"]),
            anomaly_min_hops=int(self["ingest.anomaly_min_hops"]),
            anomaly_max_seconds=int(self["ingest.anomaly_max_seconds"]),
            anomaly_max_fraction=float(self["ingest.anomaly_max_fraction"]),
            group_window_seconds=int(self["ingest.group_window_seconds"]),
            group_min_similarity=float(self["ingest.group_min_similarity"]),
        )

    def lambda_grid_ranges(self) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
        return (
            (float(self["flow.lambda_up_min"]), float(self["flow.lambda_up_max"]), float(self["flow.lambda_up_step"])),
            (float(self["flow.lambda_down_min"]), float(self["flow.lambda_down_max"]), float(self["flow.lambda_down_step"])),
        )
