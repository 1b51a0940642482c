"""Weight learning from pairwise A/B ground truth.

Raters judge random in-game basket pairs; a weight vector "matches" a
pair when the higher-scoring basket under those weights is the one the
rater majority preferred.  Learning is exhaustive: every nonnegative
weight vector on the step-resolution simplex is scored by match count
under leave-one-game-out cross-validation, fold winners are averaged,
and the result is renormalized.

Two match-counting routes exist deliberately: the grid search runs on a
vectorized cue-difference matrix (see _kernels.count_matches), while
pairwise_match_count walks pairs one by one through combine(); tests
hold them against each other.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import comb
from pathlib import Path

import numpy as np

from . import _kernels
from .excitement import CUE_NAMES, CueVector, ScoredBasket, WeightVector, combine
from .metrics import ConfusionCounts, mcc

log = logging.getLogger(__name__)

# game_id -> event_id -> CueVector
CueTables = dict[str, dict[str, CueVector]]


@dataclass(frozen=True)
class ABPair:
    game_id: str
    basket_a: str
    basket_b: str
    votes_a: int
    votes_b: int

    def __post_init__(self) -> None:
        if self.basket_a == self.basket_b:
            raise ValueError(f"pair in {self.game_id} compares {self.basket_a} "
                             "with itself")
        if self.votes_a < 0 or self.votes_b < 0:
            raise ValueError("vote counts must be non-negative")

    @property
    def raters(self) -> int:
        return self.votes_a + self.votes_b

    @property
    def majority(self) -> int:
        """+1 when A wins the vote, -1 when B does, 0 on a split."""
        if self.votes_a > self.votes_b:
            return 1
        if self.votes_b > self.votes_a:
            return -1
        return 0


PAIRS_HEADER = "game_id,basket_a,basket_b,votes_a,votes_b"


def load_pairs_csv(path: str | Path) -> list[ABPair]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != PAIRS_HEADER:
        raise ValueError(f"{path}:1: bad or missing header (expected {PAIRS_HEADER!r})")
    pairs = []
    for ln, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        cols = [c.strip() for c in raw.split(",")]
        if len(cols) != 5:
            raise ValueError(f"{path}:{ln}: expected 5 columns, got {len(cols)}")
        try:
            pairs.append(ABPair(cols[0], cols[1], cols[2], int(cols[3]), int(cols[4])))
        except ValueError as exc:
            raise ValueError(f"{path}:{ln}: {exc}") from exc
    return pairs


def save_pairs_csv(pairs: list[ABPair], path: str | Path) -> None:
    lines = [PAIRS_HEADER]
    for p in pairs:
        lines.append(f"{p.game_id},{p.basket_a},{p.basket_b},{p.votes_a},{p.votes_b}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def filter_pairs_by_agreement(pairs: list[ABPair], n_min: int) -> list[ABPair]:
    """Keep pairs whose winning side reached at least n_min votes."""
    return [p for p in pairs if max(p.votes_a, p.votes_b) >= n_min]


def enumerate_weight_grid(step: float) -> list[WeightVector]:
    """Every nonnegative weight vector on the simplex at the given step.

    1/step must be an integer; the count is C(1/step + 4, 4).  Vectors
    come out in ascending lexicographic order of
    (audio, player, score_diff, basket_type), which downstream tie
    handling relies on.
    """
    if step <= 0:
        raise ValueError(f"grid step must be positive, got {step}")
    k = round(1.0 / step)
    if k < 1 or abs(k * step - 1.0) > 1e-9:
        raise ValueError(f"1/step must be an integer, got step {step}")
    out = []
    for i0 in range(k + 1):
        for i1 in range(k + 1 - i0):
            for i2 in range(k + 1 - i0 - i1):
                for i3 in range(k + 1 - i0 - i1 - i2):
                    i4 = k - i0 - i1 - i2 - i3
                    out.append(WeightVector(i0 / k, i1 / k, i2 / k, i3 / k, i4 / k))
    assert len(out) == comb(k + 4, 4)
    return out


def grid_matrix(grid: list[WeightVector]) -> np.ndarray:
    return np.stack([w.as_array() for w in grid])


def cue_tables_from_scored(scored: dict[str, list[ScoredBasket]]) -> CueTables:
    return {gid: {sb.event_id: sb.cues for sb in baskets}
            for gid, baskets in scored.items()}


def _lookup(tables: CueTables, pair: ABPair) -> tuple[CueVector, CueVector]:
    try:
        game = tables[pair.game_id]
    except KeyError:
        raise ValueError(f"pair references unknown game {pair.game_id!r}") from None
    try:
        return game[pair.basket_a], game[pair.basket_b]
    except KeyError as exc:
        raise ValueError(f"pair in {pair.game_id} references unscored basket "
                         f"{exc.args[0]!r}") from None


def pair_arrays(pairs: list[ABPair], tables: CueTables,
                ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized pair data: cue differences, majority signs, game index.

    Returns (diff, y, games) where diff[i] = cues_a - cues_b (normalized),
    y[i] in {+1, -1, 0} is the vote majority, and games[i] is the pair's
    game_id as a numpy string array for fold masking.
    """
    n = len(pairs)
    diff = np.empty((n, 5), dtype=np.float64)
    y = np.empty(n, dtype=np.float64)
    games = np.empty(n, dtype=object)
    for i, p in enumerate(pairs):
        cv_a, cv_b = _lookup(tables, p)
        diff[i] = cv_a.as_array() - cv_b.as_array()
        y[i] = p.majority
        games[i] = p.game_id
    return diff, y, games


def match_decisions(score_a: np.ndarray, score_b: np.ndarray,
                    majority: np.ndarray) -> np.ndarray:
    """Per-pair match flags from raw scores and majority signs.

    A pair matches when the strict score comparison agrees with a strict
    vote majority; score ties and vote splits never match.  Only
    comparisons of the scores matter, so any strictly increasing
    transform applied to both score arrays leaves the result unchanged.
    """
    pick = np.sign(np.asarray(score_a) - np.asarray(score_b))
    return (pick * np.asarray(majority)) > 0


def pairwise_match_count(w: WeightVector, pairs: list[ABPair],
                         tables: CueTables) -> tuple[int, int]:
    """Match count for one weight vector, one pair at a time via combine()."""
    sa = np.empty(len(pairs))
    sb = np.empty(len(pairs))
    maj = np.empty(len(pairs))
    for i, p in enumerate(pairs):
        cv_a, cv_b = _lookup(tables, p)
        sa[i] = combine(cv_a, w)
        sb[i] = combine(cv_b, w)
        maj[i] = p.majority
    return int(np.count_nonzero(match_decisions(sa, sb, maj))), len(pairs)


@dataclass(frozen=True)
class FoldResult:
    game_id: str
    weights: WeightVector
    train_matches: int
    train_total: int
    heldout_matches: int
    heldout_total: int


@dataclass
class CvReport:
    grid_step: float
    agreement_min: int
    objective: str
    folds: list[FoldResult]
    final_weights: WeightVector
    overall_matches: int
    overall_total: int
    overall_mcc: float

    def to_dict(self) -> dict:
        def pct(m: int, t: int) -> float | None:
            return 100.0 * m / t if t else None

        return {
            "grid_step": self.grid_step,
            "agreement_min": self.agreement_min,
            "objective": self.objective,
            "folds": [{
                "game_id": f.game_id,
                "weights": f.weights.as_dict(),
                "train_matches": f.train_matches,
                "train_total": f.train_total,
                "train_pct": pct(f.train_matches, f.train_total),
                "heldout_matches": f.heldout_matches,
                "heldout_total": f.heldout_total,
                "heldout_pct": pct(f.heldout_matches, f.heldout_total),
            } for f in self.folds],
            "final_weights": self.final_weights.as_dict(),
            "overall": {
                "matches": self.overall_matches,
                "total": self.overall_total,
                "match_pct": pct(self.overall_matches, self.overall_total),
                "mcc": self.overall_mcc,
            },
        }


def _pick_winner(md: np.ndarray, gmat: np.ndarray) -> int:
    """Index of the best grid vector on the rows of md (= y * cue diff).

    Primary: most rows with positive margin.  Ties: largest total signed
    margin (order-independent and linear, so evaluation order cannot
    matter).  Residual ties: first index, i.e. lexicographically smallest
    vector given the grid's enumeration order.
    """
    counts = _kernels.count_matches(md, gmat)
    top = int(counts.max())
    tied = np.flatnonzero(counts == top)
    if tied.size == 1:
        return int(tied[0])
    margins = md @ gmat[tied].T
    return int(tied[int(np.argmax(margins.sum(axis=0)))])


def learn_weights(tables: CueTables, pairs: list[ABPair], step: float = 0.05,
                  n_min: int = 10, objective: str = "train",
                  grid: list[WeightVector] | None = None) -> CvReport:
    """Leave-one-game-out grid search over the weight simplex.

    Per fold one game's pairs are held out; the grid vector with the most
    matches on the remaining pairs wins the fold ("heldout" objective
    instead maximizes matches on the held-out game, the leakier protocol
    some studies use).  Final weights are the renormalized mean of the
    fold winners.  The report carries per-fold train and held-out match
    counts plus overall match count and MCC under the final weights.
    """
    if objective not in ("train", "heldout"):
        raise ValueError(f"unknown objective {objective!r}")
    kept = filter_pairs_by_agreement(pairs, n_min)
    fold_games = sorted({p.game_id for p in kept})
    if len(fold_games) < 2:
        raise ValueError(
            f"need pairs from >= 2 games after the agreement filter, "
            f"have {len(fold_games)}")
    if grid is None:
        grid = enumerate_weight_grid(step)
    gmat = grid_matrix(grid)
    diff, y, games = pair_arrays(kept, tables)
    md = diff * y[:, np.newaxis]
    folds = []
    winner_sum = np.zeros(5)
    for gid in fold_games:
        held = games == gid
        train = ~held
        n_train = int(np.count_nonzero(train))
        if n_train == 0:
            raise ValueError(f"fold {gid!r} has zero training pairs")
        sel = held if objective == "heldout" else train
        wi = _pick_winner(md[sel], gmat)
        w = grid[wi]
        warr = gmat[wi]
        train_m = int(np.count_nonzero(md[train] @ warr > 0))
        held_m = int(np.count_nonzero(md[held] @ warr > 0))
        folds.append(FoldResult(gid, w, train_m, n_train,
                                held_m, int(np.count_nonzero(held))))
        winner_sum += warr
    mean = winner_sum / len(fold_games)
    final = WeightVector.from_array(mean / mean.sum())
    s = md @ final.as_array()
    pos = y > 0
    neg = y < 0
    conf = ConfusionCounts(tp=int(np.count_nonzero(pos & (s > 0))),
                           fn=int(np.count_nonzero(pos & (s < 0))),
                           tn=int(np.count_nonzero(neg & (s > 0))),
                           fp=int(np.count_nonzero(neg & (s < 0))))
    overall_matches = conf.tp + conf.tn
    log.info("learned weights %s over %d folds, %d/%d pairs matched",
             final.as_dict(), len(fold_games), overall_matches, len(kept))
    return CvReport(grid_step=step, agreement_min=n_min, objective=objective,
                    folds=folds, final_weights=final,
                    overall_matches=overall_matches, overall_total=len(kept),
                    overall_mcc=mcc(conf) if conf.total else 0.0)


def evaluate_weights(w: WeightVector, pairs: list[ABPair], tables: CueTables,
                     ) -> dict:
    """Match count and MCC for a fixed weight vector over given pairs."""
    diff, y, _ = pair_arrays(pairs, tables)
    s = (diff * y[:, np.newaxis]) @ w.as_array()
    pos = y > 0
    neg = y < 0
    conf = ConfusionCounts(tp=int(np.count_nonzero(pos & (s > 0))),
                           fn=int(np.count_nonzero(pos & (s < 0))),
                           tn=int(np.count_nonzero(neg & (s > 0))),
                           fp=int(np.count_nonzero(neg & (s < 0))))
    matches = conf.tp + conf.tn
    return {
        "matches": matches,
        "total": len(pairs),
        "match_pct": 100.0 * matches / len(pairs) if pairs else None,
        "mcc": mcc(conf) if conf.total else 0.0,
    }
