"""Scoreboard reading debounce and event-to-video alignment.

OCR of the broadcast score bug yields a reading every frame interval.
Individual readings glitch; a state only becomes real once it has been
seen ``k`` times.  Confirmed transitions are then matched against the
play-by-play in order, which pins each scoring event to a video timestamp.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .game_data import BasketEvent

log = logging.getLogger(__name__)

State = tuple[int, int, int]  # (home, visiting, period)


@dataclass(frozen=True)
class ScoreboardReading:
    video_ts_s: float
    home: int
    visiting: int
    period: int
    clock_s: float
    confidence: float = 1.0

    @property
    def state(self) -> State:
        return (self.home, self.visiting, self.period)


@dataclass(frozen=True)
class AlignedBasket:
    event: BasketEvent
    video_ts_s: float


@dataclass
class AlignConfig:
    debounce_k: int = 3
    scoreboard_latency_s: float = 0.0
    clock_tolerance_s: float = 2.0


def debounce_readings(readings: list[ScoreboardReading],
                      k: int = 3) -> list[ScoreboardReading]:
    """Collapse a noisy reading stream into confirmed state transitions.

    A state is confirmed once ``k`` readings of it arrive with no reading
    of the currently confirmed state in between; the emitted reading is
    the first sighting of that state, so the transition timestamp is when
    the scoreboard actually changed, not when confirmation completed.
    Isolated glitch readings accumulate no count before the stream returns
    to the confirmed state and are discarded.  States still pending when
    the stream ends are flushed in first-seen order.

    With k=1 this degenerates to the raw state-change sequence.
    """
    if k < 1:
        raise ValueError(f"debounce k must be >= 1, got {k}")
    prev_ts = None
    confirmed: State | None = None
    pending: dict[State, tuple[int, ScoreboardReading]] = {}
    out: list[ScoreboardReading] = []
    for r in readings:
        if prev_ts is not None and r.video_ts_s <= prev_ts:
            raise ValueError(
                f"readings out of order at video ts {r.video_ts_s}")
        prev_ts = r.video_ts_s
        s = r.state
        if s == confirmed:
            pending.clear()
            continue
        count, first = pending.get(s, (0, r))
        count += 1
        if count >= k:
            out.append(first)
            confirmed = s
            pending.clear()
        else:
            pending[s] = (count, first)
    # a state that was still collecting sightings at cut-off is kept:
    # the stream ending is not evidence the reading was a glitch
    for _, first in pending.values():
        out.append(first)
    return out


def align_baskets(events: list[BasketEvent],
                  transitions: list[ScoreboardReading],
                  cfg: AlignConfig | None = None,
                  ) -> tuple[list[AlignedBasket], list[BasketEvent]]:
    """Match scoring events to debounced transitions, preserving order.

    Both sequences are chronological, so a single forward scan suffices:
    each event consumes the next transition whose (home, visiting, period)
    equals the event's post-basket state.  Events with no remaining match
    are returned unmatched.  A transition clock disagreeing with the
    event clock by more than the tolerance is logged, not rejected; OCR
    clock digits are less reliable than the scores.
    """
    cfg = cfg or AlignConfig()
    seen_states: dict[State, str] = {}
    for ev in events:
        s = (ev.home_score, ev.visiting_score, ev.period)
        if s in seen_states:
            log.warning("events %s and %s share scoreboard state %s; the later "
                        "one cannot be aligned", seen_states[s], ev.event_id, s)
        else:
            seen_states[s] = ev.event_id
    aligned: list[AlignedBasket] = []
    unmatched: list[BasketEvent] = []
    ti = 0
    for ev in events:
        target = (ev.home_score, ev.visiting_score, ev.period)
        hit = None
        for j in range(ti, len(transitions)):
            if transitions[j].state == target:
                hit = j
                break
        if hit is None:
            unmatched.append(ev)
            continue
        tr = transitions[hit]
        ti = hit + 1
        if abs(tr.clock_s - ev.game_clock_s) > cfg.clock_tolerance_s:
            log.warning("event %s: scoreboard clock %.1fs vs stats clock %.1fs "
                        "differ by more than %.1fs", ev.event_id, tr.clock_s,
                        ev.game_clock_s, cfg.clock_tolerance_s)
        aligned.append(AlignedBasket(ev, tr.video_ts_s - cfg.scoreboard_latency_s))
    if unmatched:
        log.warning("%d of %d events left unaligned", len(unmatched), len(events))
    return aligned, unmatched


def load_readings_jsonl(path: str | Path) -> list[ScoreboardReading]:
    readings = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                readings.append(ScoreboardReading(
                    video_ts_s=float(raw["vts"]),
                    home=int(raw["home"]),
                    visiting=int(raw["visiting"]),
                    period=int(raw["period"]),
                    clock_s=float(raw["clock"]),
                    confidence=float(raw.get("conf", 1.0)),
                ))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{ln}: bad reading line ({exc})") from exc
    return readings


def save_readings_jsonl(readings: list[ScoreboardReading], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in readings:
            fh.write(json.dumps({
                "vts": r.video_ts_s,
                "home": r.home,
                "visiting": r.visiting,
                "period": r.period,
                "clock": r.clock_s,
                "conf": r.confidence,
            }) + "\n")
