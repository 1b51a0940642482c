"""Engine configuration: one flat dataclass, TOML on disk."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib


class ConfigError(ValueError):
    pass


@dataclass
class EngineConfig:
    # loudness measurement
    loudness_window_s: float = 0.4
    loudness_hop_s: float = 0.1
    loudness_floor_db: float = -70.0
    resample_audio: bool = False
    # per-basket cue window and peak pooling
    window_pre_s: float = 3.0
    window_post_s: float = 1.0
    peak_count: int = 7
    # game timing
    period_length_s: float = 1200.0
    # scoreboard alignment
    debounce_k: int = 3
    scoreboard_latency_s: float = 0.0
    clock_tolerance_s: float = 2.0
    # weight learning
    grid_step: float = 0.05
    agreement_min: int = 10
    fold_objective: str = "train"
    # highlight assembly
    clip_duration_s: float = 7.0
    clip_post_s: float = 1.5
    top_n: int = 10
    merge_overlapping_clips: bool = False

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if self.loudness_window_s <= 0 or self.loudness_hop_s <= 0:
            raise ConfigError("loudness window and hop must be positive")
        if self.loudness_hop_s > self.loudness_window_s:
            raise ConfigError("loudness hop must not exceed the window")
        if self.window_pre_s < 0 or self.window_post_s < 0:
            raise ConfigError("cue window extents must be non-negative")
        if self.window_pre_s + self.window_post_s <= 0:
            raise ConfigError("cue window must have positive length")
        if self.peak_count < 1:
            raise ConfigError("peak_count must be at least 1")
        if self.period_length_s <= 0:
            raise ConfigError("period_length_s must be positive")
        if self.debounce_k < 1:
            raise ConfigError("debounce_k must be at least 1")
        if self.clock_tolerance_s < 0:
            raise ConfigError("clock_tolerance_s must be non-negative")
        if not 0 < self.grid_step <= 1:
            raise ConfigError("grid_step must lie in (0, 1]")
        if self.agreement_min < 1:
            raise ConfigError("agreement_min must be at least 1")
        if self.fold_objective not in ("train", "heldout"):
            raise ConfigError("fold_objective must be 'train' or 'heldout'")
        if self.clip_duration_s <= 0:
            raise ConfigError("clip_duration_s must be positive")
        if not 0 <= self.clip_post_s < self.clip_duration_s:
            raise ConfigError("clip_post_s must lie in [0, clip_duration_s)")
        if self.top_n < 1:
            raise ConfigError("top_n must be at least 1")

    @classmethod
    def load(cls, path: str | Path) -> "EngineConfig":
        with open(path, "rb") as fh:
            try:
                raw = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from exc
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
        try:
            return cls(**raw)
        except TypeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc

    def save(self, path: str | Path) -> None:
        # flat key/value TOML; repr round-trips floats exactly
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool):
                lines.append(f"{f.name} = {'true' if v else 'false'}")
            elif isinstance(v, str):
                lines.append(f'{f.name} = "{v}"')
            else:
                lines.append(f"{f.name} = {v!r}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
