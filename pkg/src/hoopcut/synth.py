"""Synthetic games with known ground truth.

Every generated artifact mirrors a real input file, but the generator
keeps the answers: true basket video timestamps (scoreboard updates
define truth, and they land exactly on the reading grid), a hidden
per-basket excitement draw that loudness spike heights and motion
magnitudes are linearly coupled to, and a planted weight vector that
rater majorities follow up to configurable vote noise.

Construction keeps cue extraction exact: each basket gets one isolated
loudness spike (so the audio cue returns the spike height above the
floor) and constant-displacement flow frames (so overall motion equals
the displacement magnitude).  Ground-truth votes are generated from cue
vectors computed by the package's own extractors at the true timestamps,
which makes planted-weight recovery well-posed end to end.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .config import EngineConfig
from .excitement import (ScoredBasket, WeightVector, build_cue_vectors,
                         combine)
from .game_data import (BasketEvent, BasketType, GameManifest, GameRecord,
                        save_manifest, serialize_play_by_play, serialize_roster)
from .learning import ABPair, save_pairs_csv
from .loudness import LoudnessSeries, save_loudness_jsonl
from .motion import FlowFrame, save_flow_jsonl
from .scoreboard import AlignedBasket, ScoreboardReading, save_readings_jsonl

# roughly broadcast-shaped: free throws common, dunks and tips rare
DEFAULT_TYPE_MIXTURE: dict[BasketType, float] = {
    BasketType.FREE_THROW: 0.20,
    BasketType.DUNK: 0.08,
    BasketType.TIP_SHOT: 0.07,
    BasketType.THREE_JUMPER: 0.25,
    BasketType.LAYUP: 0.22,
    BasketType.JUMPER: 0.18,
}

LEAD_IN_S = 30.0
TAIL_S = 30.0


@dataclass
class SynthConfig:
    seed: int = 7
    n_games: int = 25
    baskets_per_game: int = 30
    type_mixture: dict[BasketType, float] = dc_field(
        default_factory=lambda: dict(DEFAULT_TYPE_MIXTURE))
    misread_rate: float = 0.0
    vote_noise: float = 0.0
    planted_weights: WeightVector = dc_field(default_factory=WeightVector.uniform)
    raters: int = 15
    pairs_per_game: int = 30
    frame_interval_s: float = 0.5
    periods: int = 2
    period_length_s: float = 1200.0
    players_per_team: int = 8
    excitement_coupling: float = 0.5  # shared fraction of the hidden draw

    def __post_init__(self) -> None:
        probs = np.array([self.type_mixture.get(t, 0.0) for t in BasketType])
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError("type mixture must be a probability distribution")
        if not 0 <= self.misread_rate < 1:
            raise ValueError("misread_rate must lie in [0, 1)")
        if not 0 <= self.vote_noise <= 0.5:
            raise ValueError("vote_noise must lie in [0, 0.5]")
        if self.n_games < 1 or self.baskets_per_game < 1:
            raise ValueError("need at least one game and one basket")
        if self.raters < 1:
            raise ValueError("need at least one rater")
        if self.frame_interval_s <= 0 or self.period_length_s <= 0:
            raise ValueError("frame interval and period length must be positive")
        if self.periods < 1 or self.players_per_team < 2:
            raise ValueError("need >= 1 period and >= 2 players per team")
        if not 0 <= self.excitement_coupling <= 1:
            raise ValueError("excitement_coupling must lie in [0, 1]")


@dataclass
class SynthGame:
    record: GameRecord
    readings: list[ScoreboardReading]
    loudness: LoudnessSeries
    flow: list[FlowFrame]
    true_ts: dict[str, float]

    @property
    def video_len_s(self) -> float:
        return self.readings[-1].video_ts_s


def _game_rng(cfg: SynthConfig, index: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, index])


def gen_game(cfg: SynthConfig, index: int) -> SynthGame:
    """One deterministic game: events, readings, loudness, flow, truth."""
    rng = _game_rng(cfg, index)
    game_id = f"g{index:03d}"
    roster: dict[str, float] = {}
    team_players: dict[str, list[str]] = {"home": [], "visiting": []}
    for side in ("home", "visiting"):
        for j in range(cfg.players_per_team):
            name = f"{game_id}_{side}{j:02d}"
            roster[name] = round(float(rng.uniform(2.0, 28.0)), 1)
            team_players[side].append(name)

    types = list(BasketType)
    probs = np.array([cfg.type_mixture.get(t, 0.0) for t in types])
    events: list[BasketEvent] = []
    true_ts: dict[str, float] = {}
    home = visiting = 0
    counter = 0
    for period in range(1, cfg.periods + 1):
        n_p = cfg.baskets_per_game // cfg.periods
        if period <= cfg.baskets_per_game % cfg.periods:
            n_p += 1
        slot = cfg.period_length_s / n_p
        for j in range(n_p):
            # whole-second times on the reading grid; slot jitter keeps
            # neighbouring baskets far apart relative to the cue window
            t_in = float(int((j + rng.uniform(0.15, 0.85)) * slot))
            btype = types[int(rng.choice(len(types), p=probs))]
            side = "home" if rng.random() < 0.5 else "visiting"
            player = team_players[side][int(rng.choice(cfg.players_per_team))]
            if side == "home":
                home += btype.points
            else:
                visiting += btype.points
            counter += 1
            ev = BasketEvent(
                event_id=f"b{counter:04d}", player=player, basket_type=btype,
                period=period, home_score=home, visiting_score=visiting,
                game_clock_s=cfg.period_length_s - t_in)
            events.append(ev)
            true_ts[ev.event_id] = (LEAD_IN_S
                                    + (period - 1) * cfg.period_length_s + t_in)

    record = GameRecord(game_id=game_id, home_team=f"HOME{index:03d}",
                        visiting_team=f"VIS{index:03d}",
                        period_length_s=cfg.period_length_s,
                        events=events, roster=roster)
    record.validate()

    video_len = LEAD_IN_S + cfg.periods * cfg.period_length_s + TAIL_S
    readings = _gen_readings(cfg, rng, record, true_ts, video_len)
    hidden = rng.uniform(0.0, 1.0, size=len(events))
    loudness = _gen_loudness(events, true_ts, hidden, video_len)
    flow = _gen_flow(cfg, rng, events, true_ts, hidden)
    return SynthGame(record=record, readings=readings, loudness=loudness,
                     flow=flow, true_ts=true_ts)


def _gen_readings(cfg: SynthConfig, rng: np.random.Generator,
                  record: GameRecord, true_ts: dict[str, float],
                  video_len: float) -> list[ScoreboardReading]:
    events = record.events
    ev_times = [true_ts[ev.event_id] for ev in events]
    readings = []
    n_frames = int(video_len / cfg.frame_interval_s) + 1
    ei = -1  # index of the last event at or before the current frame
    for fi in range(n_frames):
        t = fi * cfg.frame_interval_s
        while ei + 1 < len(events) and ev_times[ei + 1] <= t:
            ei += 1
        if ei < 0:
            home, visiting, period = 0, 0, 1
            clock = cfg.period_length_s
        else:
            ev = events[ei]
            home, visiting, period = ev.home_score, ev.visiting_score, ev.period
            clock = max(0.0, ev.game_clock_s - (t - ev_times[ei]))
        conf = 1.0
        if cfg.misread_rate > 0 and rng.random() < cfg.misread_rate:
            target = "home" if rng.integers(0, 2) == 0 else "visiting"
            true_val = home if target == "home" else visiting
            val = true_val
            while val == true_val:
                val = int(rng.integers(0, 151))
            if target == "home":
                home = val
            else:
                visiting = val
            conf = 0.5
        readings.append(ScoreboardReading(video_ts_s=t, home=home,
                                          visiting=visiting, period=period,
                                          clock_s=clock, confidence=conf))
    return readings


def _gen_loudness(events: list[BasketEvent], true_ts: dict[str, float],
                  hidden: np.ndarray, video_len: float) -> LoudnessSeries:
    window_s, hop_s, floor_db = 0.4, 0.1, -70.0
    start = window_s / 2.0
    n = int((video_len - window_s) / hop_s) + 1
    values = np.full(n, floor_db)
    for ev, e in zip(events, hidden):
        idx = int(round((true_ts[ev.event_id] - start) / hop_s))
        values[idx] = floor_db + 5.0 + 55.0 * e
    return LoudnessSeries(values=values, hop_s=hop_s, window_s=window_s,
                          start_ts_s=start, floor_db=floor_db)


def _gen_flow(cfg: SynthConfig, rng: np.random.Generator,
              events: list[BasketEvent], true_ts: dict[str, float],
              hidden: np.ndarray) -> list[FlowFrame]:
    frames = []
    for ev, e in zip(events, hidden):
        mix = cfg.excitement_coupling
        e_motion = mix * e + (1.0 - mix) * float(rng.uniform(0.0, 1.0))
        mag = 0.5 + 9.5 * e_motion
        theta = float(rng.uniform(0.0, 2.0 * np.pi))
        dx, dy = mag * np.cos(theta), mag * np.sin(theta)
        t0 = true_ts[ev.event_id] - 3.0
        for j in range(17):  # 4 Hz sampling across the cue window
            pos = rng.uniform(0.0, 1.0, size=(12, 2)) * np.array([1280.0, 720.0])
            vec = np.column_stack([pos, np.full(12, dx), np.full(12, dy)])
            frames.append(FlowFrame(vts_s=t0 + 0.25 * j, vectors=vec))
    return frames


def true_aligned(game: SynthGame, include_free_throws: bool = False,
                 ) -> list[AlignedBasket]:
    """Aligned baskets built from the generator's own timestamps."""
    return [AlignedBasket(ev, game.true_ts[ev.event_id])
            for ev in game.record.events
            if include_free_throws or ev.basket_type is not BasketType.FREE_THROW]


def true_scored(game: SynthGame, weights: WeightVector,
                engine: EngineConfig | None = None) -> list[ScoredBasket]:
    """Score a synthetic game against ground-truth timestamps."""
    engine = engine or EngineConfig()
    aligned = true_aligned(game)
    cues = build_cue_vectors(
        aligned, game.record.roster, game.loudness, game.flow,
        m=engine.peak_count, pre_s=engine.window_pre_s,
        post_s=engine.window_post_s, period_length_s=game.record.period_length_s)
    return [ScoredBasket(ab, cv, combine(cv, weights))
            for ab, cv in zip(aligned, cues)]


@dataclass(frozen=True)
class Ballot:
    """One A/B question with every rater's answer, rater-ordered."""

    game_id: str
    basket_a: str
    basket_b: str
    answers: str  # e.g. "AABAB...", length = rater count

    def to_pair(self) -> ABPair:
        return ABPair(self.game_id, self.basket_a, self.basket_b,
                      self.answers.count("A"), self.answers.count("B"))


def gen_ballots(scored_games: dict[str, list[ScoredBasket]],
                planted: WeightVector, vote_noise: float = 0.0,
                raters: int = 15, pairs_per_game: int = 30,
                rng: np.random.Generator | None = None) -> list[Ballot]:
    """Random in-game pairs with per-rater votes following the planted scores.

    Each rater votes for the planted-score winner and flips independently
    with probability ``vote_noise``.  Pairs whose planted scores tie are
    redrawn: a tie has no majority to plant.
    """
    rng = rng or np.random.default_rng()
    ballots = []
    for gid in sorted(scored_games):
        baskets = scored_games[gid]
        if len(baskets) < 2:
            raise ValueError(f"game {gid} has {len(baskets)} scored baskets; "
                             "need >= 2 to form pairs")
        scores = [combine(sb.cues, planted) for sb in baskets]
        for _ in range(pairs_per_game):
            for _attempt in range(64):
                i, j = rng.choice(len(baskets), size=2, replace=False)
                if scores[i] != scores[j]:
                    break
            else:
                raise ValueError(f"game {gid}: could not draw a pair with "
                                 "distinct planted scores")
            winner, loser = ("A", "B") if scores[i] > scores[j] else ("B", "A")
            flips = rng.random(raters) < vote_noise
            answers = "".join(loser if f else winner for f in flips)
            ballots.append(Ballot(gid, baskets[i].event_id,
                                  baskets[j].event_id, answers))
    return ballots


def gen_ground_truth(scored_games: dict[str, list[ScoredBasket]],
                     planted: WeightVector, vote_noise: float = 0.0,
                     raters: int = 15, pairs_per_game: int = 30,
                     rng: np.random.Generator | None = None) -> list[ABPair]:
    return [b.to_pair() for b in gen_ballots(scored_games, planted, vote_noise,
                                             raters, pairs_per_game, rng)]


VOTES_HEADER = "game_id,basket_a,basket_b,ballots"


def save_votes_csv(ballots: list[Ballot], path: str | Path) -> None:
    lines = [VOTES_HEADER]
    for b in ballots:
        lines.append(f"{b.game_id},{b.basket_a},{b.basket_b},{b.answers}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_votes_csv(path: str | Path) -> list[Ballot]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != VOTES_HEADER:
        raise ValueError(f"{path}:1: bad or missing header (expected {VOTES_HEADER!r})")
    ballots = []
    for ln, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        cols = [c.strip() for c in raw.split(",")]
        if len(cols) != 4 or set(cols[3]) - {"A", "B"}:
            raise ValueError(f"{path}:{ln}: bad ballot line")
        ballots.append(Ballot(cols[0], cols[1], cols[2], cols[3]))
    return ballots


def write_dataset(cfg: SynthConfig, out_dir: str | Path,
                  engine: EngineConfig | None = None) -> dict:
    """Generate and write a full dataset; returns a summary dict.

    Layout: per game <gid>.manifest.json plus the five files it points
    at (loudness is written in cache form), then pairs.csv, votes.csv,
    and truth.json with the planted weights and true timestamps.
    """
    engine = engine or EngineConfig()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scored_games: dict[str, list[ScoredBasket]] = {}
    truth_games = {}
    for index in range(cfg.n_games):
        game = gen_game(cfg, index)
        gid = game.record.game_id
        (out / f"{gid}.stats.csv").write_text(
            serialize_play_by_play(game.record.events), encoding="utf-8")
        (out / f"{gid}.roster.csv").write_text(
            serialize_roster(game.record.roster), encoding="utf-8")
        save_readings_jsonl(game.readings, out / f"{gid}.readings.jsonl")
        save_loudness_jsonl(game.loudness, out / f"{gid}.loudness.jsonl")
        save_flow_jsonl(game.flow, out / f"{gid}.flow.jsonl")
        manifest = GameManifest(
            game_id=gid, home_team=game.record.home_team,
            visiting_team=game.record.visiting_team,
            period_length_s=cfg.period_length_s,
            roster_file=out / f"{gid}.roster.csv",
            stats_file=out / f"{gid}.stats.csv",
            readings_file=out / f"{gid}.readings.jsonl",
            audio_file=out / f"{gid}.loudness.jsonl",
            motion_file=out / f"{gid}.flow.jsonl")
        save_manifest(manifest, out / f"{gid}.manifest.json")
        scored_games[gid] = true_scored(game, cfg.planted_weights, engine)
        truth_games[gid] = {"true_ts": game.true_ts,
                            "video_len_s": game.video_len_s}
    gt_rng = np.random.default_rng([cfg.seed, 1_000_003])
    ballots = gen_ballots(scored_games, cfg.planted_weights, cfg.vote_noise,
                          cfg.raters, cfg.pairs_per_game, gt_rng)
    save_votes_csv(ballots, out / "votes.csv")
    save_pairs_csv([b.to_pair() for b in ballots], out / "pairs.csv")
    truth = {
        "seed": cfg.seed,
        "planted_weights": cfg.planted_weights.as_dict(),
        "vote_noise": cfg.vote_noise,
        "misread_rate": cfg.misread_rate,
        "raters": cfg.raters,
        "games": truth_games,
    }
    (out / "truth.json").write_text(json.dumps(truth, indent=2) + "\n",
                                    encoding="utf-8")
    return {
        "games": cfg.n_games,
        "baskets": sum(len(v["true_ts"]) for v in truth_games.values()),
        "pairs": len(ballots),
        "out_dir": str(out),
    }
