"""Play-by-play, roster, and manifest handling.

A game arrives as three small files: a stats CSV (one row per scoring
event), a roster CSV (season points-per-game for every rostered player on
both teams), and a JSON manifest tying them to the media-derived inputs.
"""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

log = logging.getLogger(__name__)

PLAY_BY_PLAY_HEADER = "player,basket_type,period,home_score,visiting_score,game_clock"
ROSTER_HEADER = "player,ppg"


class ParseError(ValueError):
    """Malformed input; message carries source and line number."""

    def __init__(self, source: str, line: int, message: str) -> None:
        super().__init__(f"{source}:{line}: {message}")
        self.source = source
        self.line = line


class BasketType(enum.Enum):
    FREE_THROW = "FreeThrow"
    DUNK = "Dunk"
    TIP_SHOT = "TipShot"
    THREE_JUMPER = "ThreeJumper"
    LAYUP = "Layup"
    JUMPER = "Jumper"

    @classmethod
    def from_token(cls, token: str) -> "BasketType":
        for member in cls:
            if member.value == token:
                return member
        valid = ", ".join(m.value for m in cls)
        raise ValueError(f"unknown basket type {token!r} (expected one of: {valid})")

    @property
    def points(self) -> int:
        if self is BasketType.FREE_THROW:
            return 1
        if self is BasketType.THREE_JUMPER:
            return 3
        return 2


def clock_to_seconds(clock: str) -> float:
    """Parse a game clock of the form MM:SS into seconds remaining."""
    parts = clock.split(":")
    if len(parts) != 2 or not parts[0].isdigit() or not parts[1].isdigit():
        raise ValueError(f"bad game clock {clock!r} (expected MM:SS)")
    minutes, seconds = int(parts[0]), int(parts[1])
    if seconds >= 60:
        raise ValueError(f"bad game clock {clock!r} (seconds field >= 60)")
    return float(minutes * 60 + seconds)


def seconds_to_clock(seconds: float) -> str:
    if seconds < 0 or seconds != int(seconds):
        raise ValueError(f"clock seconds must be a non-negative whole number, got {seconds}")
    whole = int(seconds)
    return f"{whole // 60:02d}:{whole % 60:02d}"


@dataclass(frozen=True)
class BasketEvent:
    event_id: str
    player: str
    basket_type: BasketType
    period: int
    home_score: int
    visiting_score: int
    game_clock_s: float


def _event_id(index: int) -> str:
    # ids are positional: row order is the only identity the CSV carries
    return f"b{index:04d}"


def parse_play_by_play(text: str, period_length_s: float = 1200.0,
                       source: str = "<string>") -> list[BasketEvent]:
    """Parse a stats CSV into ordered scoring events.

    The header must match PLAY_BY_PLAY_HEADER exactly.  Rows must be
    ordered by (period ascending, clock descending); scores must never
    decrease.  Rows tied on (period, clock) are kept in file order with a
    warning.  Event ids are assigned from 1-based row position.
    """
    lines = text.splitlines()
    if not lines:
        raise ParseError(source, 1, "empty file")
    if lines[0].strip() != PLAY_BY_PLAY_HEADER:
        raise ParseError(source, 1,
                         f"bad header {lines[0]!r} (expected {PLAY_BY_PLAY_HEADER!r})")
    events: list[BasketEvent] = []
    prev: BasketEvent | None = None
    for ln, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        cols = raw.split(",")
        if len(cols) != 6:
            raise ParseError(source, ln, f"expected 6 columns, got {len(cols)}")
        player, type_tok, period_s, home_s, vis_s, clock_tok = (c.strip() for c in cols)
        if not player:
            raise ParseError(source, ln, "empty player name")
        try:
            basket_type = BasketType.from_token(type_tok)
            period = int(period_s)
            home = int(home_s)
            visiting = int(vis_s)
            clock = clock_to_seconds(clock_tok)
        except ValueError as exc:
            raise ParseError(source, ln, str(exc)) from exc
        if period < 1:
            raise ParseError(source, ln, f"period must be >= 1, got {period}")
        if home < 0 or visiting < 0:
            raise ParseError(source, ln, "scores must be non-negative")
        if clock > period_length_s:
            raise ParseError(source, ln,
                             f"clock {clock_tok} exceeds period length {period_length_s}s")
        ev = BasketEvent(_event_id(ln - 1), player, basket_type,
                         period, home, visiting, clock)
        if prev is not None:
            if ev.period < prev.period:
                raise ParseError(source, ln, "period decreased")
            if ev.period == prev.period and ev.game_clock_s > prev.game_clock_s:
                raise ParseError(source, ln, "clock increased within a period")
            if ev.home_score < prev.home_score or ev.visiting_score < prev.visiting_score:
                raise ParseError(source, ln, "score decreased")
            if ev.period == prev.period and ev.game_clock_s == prev.game_clock_s:
                log.warning("%s:%d: events %s and %s tied on (period, clock); "
                            "keeping file order", source, ln, prev.event_id, ev.event_id)
        events.append(ev)
        prev = ev
    return events


def serialize_play_by_play(events: list[BasketEvent]) -> str:
    lines = [PLAY_BY_PLAY_HEADER]
    for ev in events:
        lines.append(",".join([
            ev.player,
            ev.basket_type.value,
            str(ev.period),
            str(ev.home_score),
            str(ev.visiting_score),
            seconds_to_clock(ev.game_clock_s),
        ]))
    return "\n".join(lines) + "\n"


def parse_roster(text: str, source: str = "<string>") -> dict[str, float]:
    """Parse a roster CSV into {player: season points per game}."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != ROSTER_HEADER:
        raise ParseError(source, 1, f"bad or missing header (expected {ROSTER_HEADER!r})")
    roster: dict[str, float] = {}
    for ln, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        cols = raw.split(",")
        if len(cols) != 2:
            raise ParseError(source, ln, f"expected 2 columns, got {len(cols)}")
        player, ppg_s = cols[0].strip(), cols[1].strip()
        if not player:
            raise ParseError(source, ln, "empty player name")
        try:
            ppg = float(ppg_s)
        except ValueError as exc:
            raise ParseError(source, ln, f"bad ppg {ppg_s!r}") from exc
        if ppg < 0:
            raise ParseError(source, ln, f"ppg must be non-negative, got {ppg}")
        if player in roster:
            raise ParseError(source, ln, f"duplicate player {player!r}")
        roster[player] = ppg
    if not roster:
        raise ParseError(source, 1, "roster has no players")
    return roster


def serialize_roster(roster: dict[str, float]) -> str:
    lines = [ROSTER_HEADER]
    for player, ppg in roster.items():
        lines.append(f"{player},{ppg!r}")
    return "\n".join(lines) + "\n"


@dataclass
class GameManifest:
    """Paths and identity for one game, resolved relative to the manifest file."""

    game_id: str
    home_team: str
    visiting_team: str
    period_length_s: float
    roster_file: Path
    stats_file: Path
    readings_file: Path
    audio_file: Path
    motion_file: Path


_MANIFEST_KEYS = ("game_id", "home_team", "visiting_team", "period_length_s",
                  "roster_file", "stats_file", "readings_file", "audio_file",
                  "motion_file")


def load_manifest(path: str | Path) -> GameManifest:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(str(path), exc.lineno, exc.msg) from exc
    missing = [k for k in _MANIFEST_KEYS if k not in raw]
    if missing:
        raise ParseError(str(path), 1, f"manifest missing keys {missing}")
    base = path.parent
    return GameManifest(
        game_id=str(raw["game_id"]),
        home_team=str(raw["home_team"]),
        visiting_team=str(raw["visiting_team"]),
        period_length_s=float(raw["period_length_s"]),
        roster_file=base / raw["roster_file"],
        stats_file=base / raw["stats_file"],
        readings_file=base / raw["readings_file"],
        audio_file=base / raw["audio_file"],
        motion_file=base / raw["motion_file"],
    )


def save_manifest(manifest: GameManifest, path: str | Path) -> None:
    """Write a manifest with file references relative to its own directory."""
    path = Path(path)
    base = path.parent
    payload = {
        "game_id": manifest.game_id,
        "home_team": manifest.home_team,
        "visiting_team": manifest.visiting_team,
        "period_length_s": manifest.period_length_s,
        "roster_file": _relativize(manifest.roster_file, base),
        "stats_file": _relativize(manifest.stats_file, base),
        "readings_file": _relativize(manifest.readings_file, base),
        "audio_file": _relativize(manifest.audio_file, base),
        "motion_file": _relativize(manifest.motion_file, base),
    }
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _relativize(target: Path, base: Path) -> str:
    try:
        return str(Path(target).relative_to(base))
    except ValueError:
        return str(target)


@dataclass
class GameRecord:
    game_id: str
    home_team: str
    visiting_team: str
    period_length_s: float
    events: list[BasketEvent] = field(default_factory=list)
    roster: dict[str, float] = field(default_factory=dict)

    def validate(self) -> None:
        """Check cross-references the per-file parsers cannot see."""
        missing = sorted({ev.player for ev in self.events} - set(self.roster))
        if missing:
            raise ValueError(
                f"game {self.game_id}: players missing from roster: {missing}")

    def field_goals(self) -> list[BasketEvent]:
        """Events that count as baskets for scoring; free throws are not."""
        return [ev for ev in self.events if ev.basket_type is not BasketType.FREE_THROW]


def load_game(manifest: GameManifest) -> GameRecord:
    stats_text = Path(manifest.stats_file).read_text(encoding="utf-8")
    roster_text = Path(manifest.roster_file).read_text(encoding="utf-8")
    record = GameRecord(
        game_id=manifest.game_id,
        home_team=manifest.home_team,
        visiting_team=manifest.visiting_team,
        period_length_s=manifest.period_length_s,
        events=parse_play_by_play(stats_text, manifest.period_length_s,
                                  str(manifest.stats_file)),
        roster=parse_roster(roster_text, str(manifest.roster_file)),
    )
    record.validate()
    return record
