"""Per-game orchestration: manifest to aligned, scored, assembled output.

The CLI and tests drive games through this module; everything below is a
thin composition of the domain modules with the file formats resolved.
A manifest's audio entry may be a WAV (full loudness measurement runs)
or a precomputed loudness cache in JSON Lines form, distinguished by
extension.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .assembly import HighlightEdl, build_edl, cue_breakdown, select_top_n
from .config import EngineConfig
from .excitement import (CueVector, ScoredBasket, WeightVector,
                         build_cue_vectors, combine, rank_baskets)
from .game_data import (BasketEvent, BasketType, GameManifest, GameRecord,
                        load_game, load_manifest)
from .loudness import (LoudnessSeries, default_cascade_48k, load_loudness_jsonl,
                       loudness_series, read_wav, two_stage_filter)
from .motion import FlowFrame, load_flow_jsonl
from .scoreboard import (AlignConfig, AlignedBasket, ScoreboardReading,
                         align_baskets, debounce_readings, load_readings_jsonl)

log = logging.getLogger(__name__)


@dataclass
class GameBundle:
    manifest: GameManifest
    record: GameRecord
    readings: list[ScoreboardReading]
    loudness: LoudnessSeries
    flow: list[FlowFrame]


def load_loudness_input(path: Path, cfg: EngineConfig) -> LoudnessSeries:
    """WAV -> filter -> measure; .jsonl -> precomputed cache."""
    suffix = Path(path).suffix.lower()
    if suffix == ".wav":
        audio = read_wav(path)
        cascade = default_cascade_48k()
        filtered = two_stage_filter(audio, cascade, resample=cfg.resample_audio)
        return loudness_series(filtered, cfg.loudness_window_s,
                               cfg.loudness_hop_s, cfg.loudness_floor_db,
                               cascade.channel_gains)
    if suffix == ".jsonl":
        return load_loudness_jsonl(path, cfg.loudness_window_s,
                                   cfg.loudness_floor_db)
    raise ValueError(f"{path}: audio input must be .wav or a .jsonl loudness cache")


def load_bundle(manifest_path: str | Path, cfg: EngineConfig) -> GameBundle:
    manifest = load_manifest(manifest_path)
    return GameBundle(
        manifest=manifest,
        record=load_game(manifest),
        readings=load_readings_jsonl(manifest.readings_file),
        loudness=load_loudness_input(manifest.audio_file, cfg),
        flow=load_flow_jsonl(manifest.motion_file),
    )


def align_game(bundle: GameBundle, cfg: EngineConfig,
               ) -> tuple[list[AlignedBasket], list[BasketEvent]]:
    transitions = debounce_readings(bundle.readings, cfg.debounce_k)
    return align_baskets(bundle.record.events, transitions,
                         AlignConfig(debounce_k=cfg.debounce_k,
                                     scoreboard_latency_s=cfg.scoreboard_latency_s,
                                     clock_tolerance_s=cfg.clock_tolerance_s))


def game_cues(bundle: GameBundle, aligned: list[AlignedBasket],
              cfg: EngineConfig) -> tuple[list[AlignedBasket], list[CueVector]]:
    """Cue vectors for the scoreable (non free-throw) aligned baskets."""
    keep = [ab for ab in aligned
            if ab.event.basket_type is not BasketType.FREE_THROW]
    cues = build_cue_vectors(
        keep, bundle.record.roster, bundle.loudness, bundle.flow,
        m=cfg.peak_count, pre_s=cfg.window_pre_s, post_s=cfg.window_post_s,
        period_length_s=bundle.record.period_length_s)
    return keep, cues


def score_bundle(bundle: GameBundle, weights: WeightVector, cfg: EngineConfig,
                 ) -> tuple[list[ScoredBasket], list[BasketEvent]]:
    aligned, unmatched = align_game(bundle, cfg)
    keep, cues = game_cues(bundle, aligned, cfg)
    scored = [ScoredBasket(ab, cv, combine(cv, weights))
              for ab, cv in zip(keep, cues)]
    return scored, unmatched


def generate_edl(bundle: GameBundle, weights: WeightVector, cfg: EngineConfig,
                 video_len_s: float = float("inf"),
                 ) -> tuple[HighlightEdl, list[BasketEvent]]:
    scored, unmatched = score_bundle(bundle, weights, cfg)
    selected = select_top_n(rank_baskets(scored), cfg.top_n)
    edl = build_edl(bundle.record.game_id, selected, cfg.clip_duration_s,
                    cfg.clip_post_s, video_len_s,
                    merge_overlapping=cfg.merge_overlapping_clips)
    return edl, unmatched


# ---------------------------------------------------------------------------
# artifact serialization
# ---------------------------------------------------------------------------

def aligned_dict(game_id: str, aligned: list[AlignedBasket],
                 unmatched: list[BasketEvent]) -> dict:
    return {
        "game_id": game_id,
        "aligned": [{
            "event_id": ab.event.event_id,
            "vts": ab.video_ts_s,
            "period": ab.event.period,
            "home": ab.event.home_score,
            "visiting": ab.event.visiting_score,
            "clock": ab.event.game_clock_s,
        } for ab in aligned],
        "unmatched": [ev.event_id for ev in unmatched],
    }


def scored_dict(game_id: str, weights: WeightVector,
                scored: list[ScoredBasket]) -> dict:
    return {
        "game_id": game_id,
        "weights": weights.as_dict(),
        "baskets": [{
            "event_id": sb.event_id,
            "vts": sb.video_ts_s,
            "cues": cue_breakdown(sb.cues),
            "score": sb.score,
        } for sb in scored],
    }


def write_json(payload: dict, path: Path) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# dataset-level loading (learning and evaluation)
# ---------------------------------------------------------------------------

def dataset_manifests(dataset_dir: str | Path) -> list[Path]:
    paths = sorted(Path(dataset_dir).glob("*.manifest.json"))
    if not paths:
        raise FileNotFoundError(
            f"no *.manifest.json files under {dataset_dir}")
    return paths


def load_and_score_dataset(dataset_dir: str | Path, cfg: EngineConfig,
                           weights: WeightVector | None = None,
                           workers: int = 1,
                           ) -> dict[str, list[ScoredBasket]]:
    """Align and cue-extract every game in a dataset directory.

    Baskets are scored under ``weights`` (uniform when omitted; cue
    vectors do not depend on the weights, only the scalar score does).
    Games are independent, so a worker pool just maps over manifests;
    results keep manifest order for determinism.
    """
    w = weights or WeightVector.uniform()
    paths = dataset_manifests(dataset_dir)

    def one(path: Path) -> tuple[str, list[ScoredBasket]]:
        bundle = load_bundle(path, cfg)
        scored, unmatched = score_bundle(bundle, w, cfg)
        if unmatched:
            log.warning("%s: %d events unmatched", bundle.record.game_id,
                        len(unmatched))
        return bundle.record.game_id, scored

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, paths))
    else:
        results = [one(p) for p in paths]
    return dict(results)
