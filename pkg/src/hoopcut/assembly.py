"""Top-N selection, clip boundary math, and edit decision list output."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .excitement import CUE_NAMES, CueVector, ScoredBasket

log = logging.getLogger(__name__)

EDL_CSV_HEADER = "event_id,start,end,score"


def cue_breakdown(cues: CueVector) -> dict:
    """Raw and normalized cue values keyed by cue name, for audit output."""
    return {
        "raw": {n: float(v) for n, v in zip(CUE_NAMES, cues.raw_as_array())},
        "norm": {n: float(v) for n, v in zip(CUE_NAMES, cues.as_array())},
    }


@dataclass(frozen=True)
class ClipSpec:
    event_id: str
    start_s: float
    end_s: float
    basket_vts_s: float
    score: float = 0.0
    cues: dict | None = None

    def __post_init__(self) -> None:
        if self.start_s < 0:
            raise ValueError(f"clip {self.event_id}: start {self.start_s} < 0")
        if self.start_s >= self.end_s:
            raise ValueError(
                f"clip {self.event_id}: empty span [{self.start_s}, {self.end_s}]")
        if not self.start_s <= self.basket_vts_s <= self.end_s:
            raise ValueError(
                f"clip {self.event_id}: basket at {self.basket_vts_s} outside "
                f"[{self.start_s}, {self.end_s}]")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass
class HighlightEdl:
    game_id: str
    clips: list[ClipSpec] = field(default_factory=list)

    @property
    def total_duration_s(self) -> float:
        return sum(c.duration_s for c in self.clips)


def select_top_n(ranked: list[ScoredBasket], n: int) -> list[ScoredBasket]:
    """First min(n, len) of the ranked list, re-sorted chronologically."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not ranked:
        raise ValueError("no ranked baskets to select from")
    return sorted(ranked[:n], key=lambda sb: sb.video_ts_s)


def clip_bounds(basket_vts_s: float, duration_s: float = 7.0,
                post_s: float = 1.5, video_len_s: float = float("inf"),
                event_id: str = "", score: float = 0.0,
                cues: dict | None = None) -> ClipSpec:
    """Clip window around one basket: fixed length, basket near the end.

    end = basket + post_s, start = end - duration_s.  A window hanging off
    either edge of the video shifts inward at full duration; a video
    shorter than the duration becomes the whole clip.
    """
    if not 0 < post_s < duration_s:
        raise ValueError(f"need 0 < post_s < duration_s, got ({post_s}, {duration_s})")
    if video_len_s <= 0:
        raise ValueError(f"video length must be positive, got {video_len_s}")
    if not 0 <= basket_vts_s <= video_len_s:
        raise ValueError(
            f"basket at {basket_vts_s}s outside video of {video_len_s}s")
    if duration_s >= video_len_s:
        return ClipSpec(event_id, 0.0, video_len_s, basket_vts_s, score, cues)
    end = basket_vts_s + post_s
    start = end - duration_s
    if start < 0.0:
        start, end = 0.0, duration_s
    elif end > video_len_s:
        start, end = video_len_s - duration_s, video_len_s
    return ClipSpec(event_id, start, end, basket_vts_s, score, cues)


def build_edl(game_id: str, selected: list[ScoredBasket],
              duration_s: float = 7.0, post_s: float = 1.5,
              video_len_s: float = float("inf"),
              merge_overlapping: bool = False) -> HighlightEdl:
    """Assemble clips for chronologically ordered selected baskets.

    Overlapping neighbours (baskets closer than the clip length) are
    warned about, or merged into one span when ``merge_overlapping``.
    """
    clips = []
    for sb in selected:
        clips.append(clip_bounds(sb.video_ts_s, duration_s, post_s, video_len_s,
                                 event_id=sb.event_id, score=sb.score,
                                 cues=cue_breakdown(sb.cues)))
    clips.sort(key=lambda c: (c.start_s, c.basket_vts_s))
    overlaps = [(a, b) for a, b in zip(clips, clips[1:]) if b.start_s < a.end_s]
    if overlaps and not merge_overlapping:
        for a, b in overlaps:
            log.warning("game %s: clips %s and %s overlap by %.2fs", game_id,
                        a.event_id, b.event_id, a.end_s - b.start_s)
    if overlaps and merge_overlapping:
        merged: list[ClipSpec] = []
        for c in clips:
            if merged and c.start_s < merged[-1].end_s:
                prev = merged[-1]
                merged[-1] = ClipSpec(
                    event_id=f"{prev.event_id}+{c.event_id}",
                    start_s=prev.start_s, end_s=max(prev.end_s, c.end_s),
                    basket_vts_s=prev.basket_vts_s,
                    score=max(prev.score, c.score), cues=prev.cues)
            else:
                merged.append(c)
        clips = merged
    return HighlightEdl(game_id=game_id, clips=clips)


def emit_edl(edl: HighlightEdl, fmt: str = "json") -> str:
    """Deterministic EDL serialization; fmt is "json" or "csv"."""
    if fmt == "json":
        payload = {
            "game_id": edl.game_id,
            "total_duration_s": edl.total_duration_s,
            "clips": [{
                "event_id": c.event_id,
                "start": c.start_s,
                "end": c.end_s,
                "basket_vts": c.basket_vts_s,
                "score": c.score,
                "cues": c.cues,
            } for c in edl.clips],
        }
        return json.dumps(payload, indent=2) + "\n"
    if fmt == "csv":
        lines = [EDL_CSV_HEADER]
        for c in edl.clips:
            lines.append(f"{c.event_id},{c.start_s!r},{c.end_s!r},{c.score!r}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unsupported EDL format {fmt!r}")


def parse_edl_json(text: str) -> HighlightEdl:
    raw = json.loads(text)
    clips = [ClipSpec(event_id=c["event_id"], start_s=float(c["start"]),
                      end_s=float(c["end"]), basket_vts_s=float(c["basket_vts"]),
                      score=float(c["score"]), cues=c.get("cues"))
             for c in raw["clips"]]
    return HighlightEdl(game_id=raw["game_id"], clips=clips)


def render_cuts_script(edl: HighlightEdl, source_var: str = "SRC") -> str:
    """Shell script of stream-copy cut commands for an external encoder."""
    lines = [
        "#!/bin/sh",
        "# usage: SRC=broadcast.mp4 sh cuts.sh",
        f': "${{{source_var}:?set {source_var} to the source video path}}"',
        "set -e",
    ]
    for i, c in enumerate(edl.clips):
        out = f"{edl.game_id}_clip{i:02d}_{c.event_id}.mp4"
        lines.append(
            f'ffmpeg -y -ss {c.start_s!r} -to {c.end_s!r} -i "${source_var}" '
            f'-c copy "{out}"')
    return "\n".join(lines) + "\n"
