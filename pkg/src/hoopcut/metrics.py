"""Agreement and significance statistics for pairwise preference data.

Everything here operates on plain counts or label sequences; nothing
imports the scoring pipeline, so these functions double as the
evaluation layer's independent vocabulary: Matthews correlation for
system-vs-majority decisions, Cohen/Fleiss kappa for rater consistency,
McNemar's test (with Yates' continuity correction) for comparing two
systems on the same pairs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

log = logging.getLogger(__name__)

CHI2_CRITICAL_95 = 3.84


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def mcc(c: ConfusionCounts) -> float:
    """Matthews correlation coefficient.

    (tp*tn - fp*fn) / sqrt((tp+fp)(tp+fn)(tn+fp)(tn+fn)); any zero factor
    in the denominator yields 0 by convention.  All-zero counts are an
    error, not a zero.
    """
    if c.total == 0:
        raise ValueError("confusion counts are all zero")
    num = c.tp * c.tn - c.fp * c.fn
    denom = (c.tp + c.fp) * (c.tp + c.fn) * (c.tn + c.fp) * (c.tn + c.fn)
    if denom == 0:
        return 0.0
    return num / math.sqrt(denom)


def cohen_kappa(labels_a: Sequence, labels_b: Sequence,
                marginals: str = "rater") -> float:
    """Chance-corrected agreement between two label sequences.

    kappa = (Po - Pe)/(1 - Pe).  With marginals="rater" (default) Pe uses
    each rater's own empirical category frequencies; "pooled" uses the
    frequencies of both raters merged, which is the form that coincides
    with Fleiss' kappa at two raters.  Degenerate Pe = 1 maps to 1 when
    observed agreement is also perfect, else 0.
    """
    if len(labels_a) != len(labels_b):
        raise ValueError(
            f"label sequences differ in length: {len(labels_a)} vs {len(labels_b)}")
    n = len(labels_a)
    if n == 0:
        raise ValueError("label sequences are empty")
    if marginals not in ("rater", "pooled"):
        raise ValueError(f"unknown marginals mode {marginals!r}")
    po = sum(a == b for a, b in zip(labels_a, labels_b)) / n
    cats = sorted(set(labels_a) | set(labels_b), key=repr)
    if marginals == "rater":
        freq_a = {c: 0 for c in cats}
        freq_b = {c: 0 for c in cats}
        for a in labels_a:
            freq_a[a] += 1
        for b in labels_b:
            freq_b[b] += 1
        pe = sum((freq_a[c] / n) * (freq_b[c] / n) for c in cats)
    else:
        pooled = {c: 0 for c in cats}
        for a, b in zip(labels_a, labels_b):
            pooled[a] += 1
            pooled[b] += 1
        pe = sum((pooled[c] / (2 * n)) ** 2 for c in cats)
    if pe >= 1.0:
        log.warning("cohen_kappa: degenerate chance agreement Pe = 1")
        return 1.0 if po == 1.0 else 0.0
    return (po - pe) / (1.0 - pe)


def mean_pairwise_cohen(ballots: Sequence[Sequence], marginals: str = "rater") -> float:
    """Average Cohen's kappa over all rater pairs.

    ``ballots`` is rater-major: ballots[r][i] is rater r's label on item i.
    """
    if len(ballots) < 2:
        raise ValueError("need at least two raters")
    ks = [cohen_kappa(ballots[i], ballots[j], marginals)
          for i, j in combinations(range(len(ballots)), 2)]
    return sum(ks) / len(ks)


def fleiss_kappa(table: Sequence[Sequence[int]], n_raters: int) -> float:
    """Multi-rater chance-corrected agreement from an items x categories table.

    table[i][c] counts raters assigning item i to category c; every row
    must sum to n_raters.  Per-item agreement P_i = (sum_c n_ic^2 - n) /
    (n(n-1)); chance agreement Pe = sum_c (column share)^2.  If one
    category absorbs everything Pe = 1 and the value is 1.0 by convention
    (with a warning): unanimity on a single category is still unanimity.
    """
    if n_raters < 2:
        raise ValueError(f"need at least 2 raters, got {n_raters}")
    if not table:
        raise ValueError("empty rating table")
    n_items = len(table)
    n_cats = len(table[0])
    col = [0] * n_cats
    p_sum = 0.0
    for i, row in enumerate(table):
        if len(row) != n_cats:
            raise ValueError(f"row {i} has {len(row)} categories, expected {n_cats}")
        if sum(row) != n_raters:
            raise ValueError(
                f"row {i} sums to {sum(row)}, expected n_raters = {n_raters}")
        p_sum += (sum(v * v for v in row) - n_raters) / (n_raters * (n_raters - 1))
        for c, v in enumerate(row):
            col[c] += v
    p_bar = p_sum / n_items
    total = n_items * n_raters
    pe = sum((v / total) ** 2 for v in col)
    if pe >= 1.0:
        log.warning("fleiss_kappa: a single category absorbed every rating; "
                    "returning 1.0 by convention")
        return 1.0
    return (p_bar - pe) / (1.0 - pe)


def mean_pairwise_agreement(table: Sequence[Sequence[int]], n_raters: int) -> float:
    """Mean per-item rater agreement P_i (the observed part of Fleiss' kappa)."""
    if n_raters < 2:
        raise ValueError(f"need at least 2 raters, got {n_raters}")
    if not table:
        raise ValueError("empty rating table")
    p_sum = 0.0
    for i, row in enumerate(table):
        if sum(row) != n_raters:
            raise ValueError(
                f"row {i} sums to {sum(row)}, expected n_raters = {n_raters}")
        p_sum += (sum(v * v for v in row) - n_raters) / (n_raters * (n_raters - 1))
    return p_sum / len(table)


def mcnemar_yates(b: int, c: int) -> tuple[float, bool]:
    """McNemar's test with Yates' continuity correction on discordant counts.

    ``b`` and ``c`` are the two discordant cells (pairs one system got
    right and the other wrong).  chi2 = (|b - c| - 1)^2 / (b + c);
    significant at 95% when chi2 exceeds 3.84.
    """
    if b < 0 or c < 0:
        raise ValueError("discordant counts must be non-negative")
    if b + c == 0:
        raise ValueError("no discordant pairs: test undefined")
    chi2 = (abs(b - c) - 1) ** 2 / (b + c)
    return chi2, chi2 > CHI2_CRITICAL_95
