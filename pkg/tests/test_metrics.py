import math
from collections import Counter

import numpy as np
import pytest

from hoopcut.metrics import (
    CHI2_CRITICAL_95,
    ConfusionCounts,
    cohen_kappa,
    fleiss_kappa,
    mcc,
    mcnemar_yates,
    mean_pairwise_agreement,
    mean_pairwise_cohen,
)

# --- oracle 1: MCC as the Pearson correlation of two binary vectors --------

def mcc_oracle(c):
    pred = [1] * c.tp + [1] * c.fp + [0] * c.fn + [0] * c.tn
    truth = [1] * c.tp + [0] * c.fp + [1] * c.fn + [0] * c.tn
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.corrcoef(pred, truth)[0, 1]
    return 0.0 if np.isnan(r) else float(r)


# --- oracle 2: Cohen's kappa via explicit frequency tables -----------------

def cohen_oracle(a, b, marginals="rater"):
    n = len(a)
    po = sum(x == y for x, y in zip(a, b)) / n
    if marginals == "rater":
        fa, fb = Counter(a), Counter(b)
        pe = sum((fa[c] / n) * (fb[c] / n) for c in set(a) | set(b))
    else:
        pooled = Counter(a) + Counter(b)
        pe = sum((v / (2 * n)) ** 2 for v in pooled.values())
    if pe >= 1.0:
        return 1.0 if po == 1.0 else 0.0
    return (po - pe) / (1 - pe)


# --- oracle 3: Fleiss' kappa, textbook loops -------------------------------

def fleiss_oracle(table, n):
    rows = len(table)
    cats = len(table[0])
    p_items = []
    for row in table:
        p_items.append((sum(v * v for v in row) - n) / (n * (n - 1)))
    p_bar = sum(p_items) / rows
    p_j = [sum(table[i][j] for i in range(rows)) / (rows * n) for j in range(cats)]
    pe = sum(p * p for p in p_j)
    if pe >= 1.0:
        return 1.0
    return (p_bar - pe) / (1 - pe)


# --- mcc -------------------------------------------------------------------

def test_mcc_perfect_and_chance():
    assert mcc(ConfusionCounts(5, 0, 0, 5)) == 1.0
    assert mcc(ConfusionCounts(5, 5, 5, 5)) == 0.0
    assert mcc(ConfusionCounts(0, 5, 5, 0)) == -1.0


def test_mcc_worked_example():
    # oracle-frozen: 10/sqrt(6*5*5*4)
    c = ConfusionCounts(tp=4, fn=1, fp=2, tn=3)
    want = 10 / math.sqrt(600)
    assert mcc(c) == pytest.approx(want, abs=1e-15)
    assert mcc(c) == pytest.approx(0.4082482904638630, abs=1e-15)
    assert mcc_oracle(c) == pytest.approx(want, abs=1e-12)


def test_mcc_zero_factor_convention():
    assert mcc(ConfusionCounts(3, 0, 0, 0)) == 0.0
    assert mcc(ConfusionCounts(0, 0, 0, 7)) == 0.0
    assert mcc(ConfusionCounts(2, 2, 0, 0)) == 0.0


def test_mcc_all_zero_is_error():
    with pytest.raises(ValueError, match="all zero"):
        mcc(ConfusionCounts(0, 0, 0, 0))
    with pytest.raises(ValueError, match="non-negative"):
        ConfusionCounts(-1, 0, 0, 0)


def test_mcc_against_pearson_oracle():
    rng = np.random.default_rng(28)
    for _ in range(1000):
        c = ConfusionCounts(*(int(v) for v in rng.integers(0, 30, 4)))
        if c.total == 0:
            continue
        assert mcc(c) == pytest.approx(mcc_oracle(c), abs=1e-12)


def test_mcc_symmetries():
    rng = np.random.default_rng(29)
    for _ in range(1000):
        tp, fp, fn, tn = (int(v) for v in rng.integers(0, 30, 4))
        if tp + fp + fn + tn == 0:
            continue
        base = mcc(ConfusionCounts(tp, fp, fn, tn))
        # swapping the meaning of positive and negative changes nothing
        assert mcc(ConfusionCounts(tn, fn, fp, tp)) == pytest.approx(base, abs=1e-12)
        # flipping one side's labels negates the correlation
        flipped = mcc(ConfusionCounts(fp, tp, tn, fn))
        if mcc_oracle(ConfusionCounts(tp, fp, fn, tn)) != 0.0:
            assert flipped == pytest.approx(-base, abs=1e-12)


def test_mcc_range():
    rng = np.random.default_rng(30)
    for _ in range(500):
        c = ConfusionCounts(*(int(v) for v in rng.integers(0, 50, 4)))
        if c.total == 0:
            continue
        assert -1.0 <= mcc(c) <= 1.0


# --- cohen -----------------------------------------------------------------

def test_cohen_identical():
    assert cohen_kappa(list("XYXYX"), list("XYXYX")) == 1.0


def test_cohen_worked_example():
    a = ["X"] * 10
    b = ["X"] * 5 + ["Y"] * 5
    assert cohen_kappa(a, b) == 0.0


def test_cohen_errors():
    with pytest.raises(ValueError, match="length"):
        cohen_kappa(["X"], ["X", "Y"])
    with pytest.raises(ValueError, match="empty"):
        cohen_kappa([], [])
    with pytest.raises(ValueError, match="marginals"):
        cohen_kappa(["X"], ["X"], marginals="magic")


def test_cohen_degenerate(caplog):
    with caplog.at_level("WARNING"):
        assert cohen_kappa(["X", "X"], ["X", "X"]) == 1.0
    assert any("degenerate" in r.message for r in caplog.records)


def test_cohen_against_oracle():
    rng = np.random.default_rng(31)
    cats = ["a", "b", "c"]
    for _ in range(1000):
        n = int(rng.integers(1, 40))
        a = [cats[i] for i in rng.integers(0, 3, n)]
        b = [cats[i] for i in rng.integers(0, 3, n)]
        for mode in ("rater", "pooled"):
            assert cohen_kappa(a, b, mode) == pytest.approx(
                cohen_oracle(a, b, mode), abs=1e-12)


def test_cohen_symmetric_in_raters():
    rng = np.random.default_rng(32)
    for _ in range(200):
        n = int(rng.integers(1, 30))
        a = list(rng.integers(0, 2, n))
        b = list(rng.integers(0, 2, n))
        assert cohen_kappa(a, b) == pytest.approx(cohen_kappa(b, a), abs=1e-12)


def test_mean_pairwise_cohen_matches_brute_force():
    rng = np.random.default_rng(33)
    ballots = [list(rng.integers(0, 2, 25)) for _ in range(6)]
    want = []
    for i in range(6):
        for j in range(i + 1, 6):
            want.append(cohen_oracle(ballots[i], ballots[j]))
    got = mean_pairwise_cohen(ballots)
    assert got == pytest.approx(sum(want) / len(want), abs=1e-12)
    with pytest.raises(ValueError, match="two raters"):
        mean_pairwise_cohen(ballots[:1])


# --- fleiss ----------------------------------------------------------------

def test_fleiss_unanimous():
    table = [(3, 0), (0, 3), (3, 0)]
    assert fleiss_kappa(table, 3) == 1.0


def test_fleiss_worked_example():
    assert fleiss_kappa([(3, 0), (1, 2)], 3) == pytest.approx(0.25, abs=1e-15)
    assert fleiss_oracle([(3, 0), (1, 2)], 3) == pytest.approx(0.25, abs=1e-15)


def test_fleiss_single_category_degenerate(caplog):
    with caplog.at_level("WARNING"):
        assert fleiss_kappa([(3, 0), (3, 0)], 3) == 1.0
    assert any("single category" in r.message for r in caplog.records)


def test_fleiss_errors():
    with pytest.raises(ValueError, match="sums to"):
        fleiss_kappa([(2, 0)], 3)
    with pytest.raises(ValueError, match="at least 2"):
        fleiss_kappa([(1, 0)], 1)
    with pytest.raises(ValueError, match="empty"):
        fleiss_kappa([], 3)
    with pytest.raises(ValueError, match="categories"):
        fleiss_kappa([(2, 1), (3,)], 3)


def test_fleiss_against_oracle():
    rng = np.random.default_rng(34)
    for _ in range(1000):
        n = int(rng.integers(2, 9))
        rows = int(rng.integers(1, 12))
        table = []
        for _ in range(rows):
            counts = rng.multinomial(n, [1 / 3] * 3)
            table.append(tuple(int(v) for v in counts))
        assert fleiss_kappa(table, n) == pytest.approx(
            fleiss_oracle(table, n), abs=1e-12)


def test_fleiss_two_raters_equals_pooled_cohen():
    rng = np.random.default_rng(35)
    for _ in range(300):
        rows = int(rng.integers(1, 20))
        table = []
        a, b = [], []
        for _ in range(rows):
            counts = rng.multinomial(2, [0.5, 0.5])
            table.append(tuple(int(v) for v in counts))
            if counts[0] == 2:
                a.append(0), b.append(0)
            elif counts[1] == 2:
                a.append(1), b.append(1)
            else:
                a.append(0), b.append(1)
        assert fleiss_kappa(table, 2) == pytest.approx(
            cohen_kappa(a, b, marginals="pooled"), abs=1e-12)


def test_mean_pairwise_agreement():
    assert mean_pairwise_agreement([(3, 0), (0, 3)], 3) == 1.0
    assert mean_pairwise_agreement([(3, 0), (1, 2)], 3) == pytest.approx(2 / 3)
    # P-bar is the observed-agreement part of Fleiss' kappa
    rng = np.random.default_rng(36)
    table = [tuple(int(v) for v in rng.multinomial(5, [0.4, 0.6])) for _ in range(8)]
    p_bar = mean_pairwise_agreement(table, 5)
    p_items = [(sum(v * v for v in row) - 5) / 20 for row in table]
    assert p_bar == pytest.approx(sum(p_items) / 8, abs=1e-12)


# --- mcnemar ---------------------------------------------------------------

def test_mcnemar_worked_examples():
    chi2, sig = mcnemar_yates(10, 0)
    assert chi2 == pytest.approx(8.1, abs=1e-12)
    assert sig is True
    chi2, sig = mcnemar_yates(5, 5)
    assert chi2 == pytest.approx(0.1, abs=1e-12)
    assert sig is False


def test_mcnemar_errors():
    with pytest.raises(ValueError, match="undefined"):
        mcnemar_yates(0, 0)
    with pytest.raises(ValueError, match="non-negative"):
        mcnemar_yates(-1, 2)


def test_mcnemar_symmetric():
    rng = np.random.default_rng(37)
    for _ in range(300):
        b, c = (int(v) for v in rng.integers(0, 40, 2))
        if b + c == 0:
            continue
        assert mcnemar_yates(b, c) == mcnemar_yates(c, b)


def test_mcnemar_threshold_is_strict():
    assert CHI2_CRITICAL_95 == 3.84
    # straddle the critical value
    chi2, sig = mcnemar_yates(15, 2)   # 144/17 = 8.47
    assert sig is True
    chi2, sig = mcnemar_yates(7, 2)    # 16/9 = 1.78
    assert sig is False


def test_mcnemar_equal_counts_small_but_nonzero():
    # |b-c| = 0 keeps the corrected numerator at 1, not 0
    for n in (1, 5, 20):
        chi2, sig = mcnemar_yates(n, n)
        assert chi2 == pytest.approx(1 / (2 * n), abs=1e-12)
        assert sig is False
