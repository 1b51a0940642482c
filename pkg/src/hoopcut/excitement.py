"""Per-basket cues, per-game normalization, and the combined score.

Five cues feed the final score: crowd/commentator loudness, scorer
ranking (season PPG), score differential weighted by time remaining,
basket type, and overall motion.  Each is min-max normalized within its
game, then combined as a convex weighted sum.
"""

from __future__ import annotations

import numpy as np

from dataclasses import dataclass

from .game_data import BasketEvent, BasketType
from .loudness import LoudnessSeries, audio_cue
from .motion import FlowFrame, motion_scores
from .scoreboard import AlignedBasket

CUE_NAMES = ("audio", "player", "score_diff", "basket_type", "motion")

_BASKET_TYPE_VALUE = {
    BasketType.DUNK: 1.0,
    BasketType.TIP_SHOT: 0.75,
    BasketType.THREE_JUMPER: 0.5,
    BasketType.LAYUP: 0.25,
    BasketType.JUMPER: 0.0,
}


@dataclass(frozen=True)
class WeightVector:
    """Convex weights over the five cues: nonnegative, summing to 1."""

    audio: float
    player: float
    score_diff: float
    basket_type: float
    motion: float

    def __post_init__(self) -> None:
        vals = self.as_array()
        if np.any(vals < 0):
            raise ValueError(f"weights must be nonnegative, got {tuple(vals)}")
        total = float(np.sum(vals))
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1 within 1e-9, got {total!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.audio, self.player, self.score_diff,
                         self.basket_type, self.motion], dtype=np.float64)

    def as_dict(self) -> dict[str, float]:
        return {name: float(v) for name, v in zip(CUE_NAMES, self.as_array())}

    @classmethod
    def from_array(cls, arr) -> "WeightVector":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.shape != (5,):
            raise ValueError(f"expected 5 weights, got shape {arr.shape}")
        return cls(*(float(v) for v in arr))

    @classmethod
    def from_dict(cls, raw: dict) -> "WeightVector":
        missing = [n for n in CUE_NAMES if n not in raw]
        if missing:
            raise ValueError(f"weights missing cues {missing}")
        return cls(*(float(raw[n]) for n in CUE_NAMES))

    @classmethod
    def one_hot(cls, cue: str) -> "WeightVector":
        if cue not in CUE_NAMES:
            raise ValueError(f"unknown cue {cue!r} (expected one of {CUE_NAMES})")
        return cls(*(1.0 if n == cue else 0.0 for n in CUE_NAMES))

    @classmethod
    def uniform(cls) -> "WeightVector":
        return cls(0.2, 0.2, 0.2, 0.2, 0.2)


@dataclass(frozen=True)
class CueVector:
    """Normalized cue values in [0, 1] plus the raw pre-normalization values."""

    audio: float
    player: float
    score_diff: float
    basket_type: float
    motion: float
    raw_audio: float
    raw_player: float
    raw_score_diff: float
    raw_basket_type: float
    raw_motion: float

    def as_array(self) -> np.ndarray:
        return np.array([self.audio, self.player, self.score_diff,
                         self.basket_type, self.motion], dtype=np.float64)

    def raw_as_array(self) -> np.ndarray:
        return np.array([self.raw_audio, self.raw_player, self.raw_score_diff,
                         self.raw_basket_type, self.raw_motion], dtype=np.float64)


@dataclass(frozen=True)
class ScoredBasket:
    aligned: AlignedBasket
    cues: CueVector
    score: float

    @property
    def event_id(self) -> str:
        return self.aligned.event.event_id

    @property
    def video_ts_s(self) -> float:
        return self.aligned.video_ts_s


def player_cue(event: BasketEvent, roster: dict[str, float]) -> float:
    """Season PPG of the scorer; normalization happens over the game pool."""
    try:
        return roster[event.player]
    except KeyError:
        raise ValueError(f"player {event.player!r} not in roster") from None


def score_diff_cue(event: BasketEvent, period_length_s: float = 1200.0) -> float:
    """Closeness-of-game weight: 1/(margin+1) scaled by time already played."""
    margin = abs(event.home_score - event.visiting_score)
    return (1.0 / (margin + 1)) * (period_length_s - event.game_clock_s)


def basket_type_cue(event: BasketEvent) -> float:
    """Linear value on the type ranking; free throws must be filtered upstream."""
    if event.basket_type is BasketType.FREE_THROW:
        raise ValueError(
            f"event {event.event_id}: free throws carry no basket-type cue")
    return _BASKET_TYPE_VALUE[event.basket_type]


def normalize_per_game(raw: "list[float] | np.ndarray") -> np.ndarray:
    """Min-max scale to [0, 1] over one game; constant input maps to 0.5."""
    arr = np.asarray(raw, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot normalize an empty value list")
    if not np.all(np.isfinite(arr)):
        raise ValueError("cue values must be finite")
    lo = float(np.min(arr))
    hi = float(np.max(arr))
    if hi == lo:
        return np.full(arr.shape, 0.5)
    return (arr - lo) / (hi - lo)


def combine(cues: CueVector, w: WeightVector) -> float:
    """Weighted sum of the normalized cues (the final per-basket score)."""
    return float(np.dot(cues.as_array(), w.as_array()))


def build_cue_vectors(aligned: list[AlignedBasket], roster: dict[str, float],
                      series: LoudnessSeries, frames: list[FlowFrame],
                      *, m: int = 7, pre_s: float = 3.0, post_s: float = 1.0,
                      period_length_s: float = 1200.0,
                      player_pool: "list[float] | None" = None,
                      ) -> list[CueVector]:
    """Raw cue extraction plus per-game normalization for one game.

    ``aligned`` must already exclude free throws.  The player cue is
    normalized against ``player_pool`` (defaults to every rostered PPG,
    both teams), while the other four normalize over the game's baskets.
    """
    if not aligned:
        return []
    raw = np.empty((len(aligned), 5), dtype=np.float64)
    for i, ab in enumerate(aligned):
        raw[i, 0] = audio_cue(series, ab.video_ts_s, m, pre_s, post_s)
        raw[i, 1] = player_cue(ab.event, roster)
        raw[i, 2] = score_diff_cue(ab.event, period_length_s)
        raw[i, 3] = basket_type_cue(ab.event)
        raw[i, 4] = motion_scores(frames, ab.video_ts_s, pre_s, post_s).overall
    norm = np.empty_like(raw)
    for c in (0, 2, 3, 4):
        norm[:, c] = normalize_per_game(raw[:, c])
    pool = list(roster.values()) if player_pool is None else list(player_pool)
    pool_lo = min(pool)
    pool_hi = max(pool)
    if pool_hi == pool_lo:
        norm[:, 1] = 0.5
    else:
        norm[:, 1] = (raw[:, 1] - pool_lo) / (pool_hi - pool_lo)
    return [CueVector(*(float(x) for x in norm[i]), *(float(x) for x in raw[i]))
            for i in range(len(aligned))]


def score_baskets(aligned: list[AlignedBasket], cues: list[CueVector],
                  w: WeightVector) -> list[ScoredBasket]:
    if len(aligned) != len(cues):
        raise ValueError("one cue vector per aligned basket required")
    return [ScoredBasket(ab, cv, combine(cv, w)) for ab, cv in zip(aligned, cues)]


def rank_baskets(scored: list[ScoredBasket]) -> list[ScoredBasket]:
    """Descending score; ties go to the earlier basket."""
    return sorted(scored, key=lambda sb: (-sb.score, sb.video_ts_s))
