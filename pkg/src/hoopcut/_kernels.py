"""Hot numeric kernels, numba-jitted with numpy/scipy fallbacks.

The jitted path is used when numba imports cleanly and the environment
variable HOOPCUT_DISABLE_NUMBA is unset or empty.  Both paths compute the
same thing; benchmarks/bench_kernels.py times them side by side.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised via env flag instead
    HAS_NUMBA = False


def numba_enabled() -> bool:
    return HAS_NUMBA and not os.environ.get("HOOPCUT_DISABLE_NUMBA")


# ---------------------------------------------------------------------------
# biquad cascade
# ---------------------------------------------------------------------------

def _biquad_numpy(x: np.ndarray, b0: float, b1: float, b2: float,
                  a1: float, a2: float) -> np.ndarray:
    # An IIR recurrence cannot be vectorised in pure numpy; scipy's lfilter
    # is the standard compiled implementation of the same difference equation.
    from scipy.signal import lfilter

    return lfilter([b0, b1, b2], [1.0, a1, a2], x)


if HAS_NUMBA:

    @njit(cache=True)
    def _biquad_numba(x, b0, b1, b2, a1, a2):  # pragma: no cover - jitted
        y = np.empty_like(x)
        z1 = 0.0
        z2 = 0.0
        for i in range(x.size):
            v = b0 * x[i] + z1
            z1 = b1 * x[i] - a1 * v + z2
            z2 = b2 * x[i] - a2 * v
            y[i] = v
        return y


def biquad(x: np.ndarray, b: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Filter ``x`` through one second-order section.

    ``b`` holds (b0, b1, b2); ``a`` is either (a1, a2) or the full
    (a0, a1, a2) with a0 == 1.  State starts at zero, transposed direct
    form II.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    if len(a) == 3:
        if a[0] != 1.0:
            raise ValueError(f"a0 must be normalised to 1, got {a[0]}")
        a1, a2 = float(a[1]), float(a[2])
    elif len(a) == 2:
        a1, a2 = float(a[0]), float(a[1])
    else:
        raise ValueError(f"need 2 or 3 denominator coefficients, got {len(a)}")
    if numba_enabled():
        return _biquad_numba(x, float(b[0]), float(b[1]), float(b[2]), a1, a2)
    return _biquad_numpy(x, float(b[0]), float(b[1]), float(b[2]), a1, a2)


def biquad_cascade(x: np.ndarray, stages: list[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    """Apply second-order sections in series."""
    y = np.ascontiguousarray(x, dtype=np.float64)
    for b, a in stages:
        y = biquad(y, b, a)
    return y


# ---------------------------------------------------------------------------
# windowed mean square
# ---------------------------------------------------------------------------

def _window_mean_square_numpy(x: np.ndarray, win: int, hop: int) -> np.ndarray:
    n_out = (x.size - win) // hop + 1
    view = np.lib.stride_tricks.sliding_window_view(x, win)[::hop][:n_out]
    return np.mean(view * view, axis=1)


if HAS_NUMBA:

    @njit(cache=True)
    def _window_mean_square_numba(x, win, hop):  # pragma: no cover - jitted
        n_out = (x.size - win) // hop + 1
        out = np.empty(n_out, dtype=np.float64)
        for i in range(n_out):
            s = 0.0
            base = i * hop
            for j in range(win):
                v = x[base + j]
                s += v * v
            out[i] = s / win
        return out


def window_mean_square(x: np.ndarray, win: int, hop: int) -> np.ndarray:
    """Mean of squares over length-``win`` windows advancing by ``hop`` samples.

    Window i covers samples [i*hop, i*hop + win); only complete windows are
    emitted.  Requires x.size >= win.
    """
    if win <= 0 or hop <= 0:
        raise ValueError("window and hop must be positive sample counts")
    if x.size < win:
        raise ValueError(
            f"signal of {x.size} samples shorter than one {win}-sample window")
    x = np.ascontiguousarray(x, dtype=np.float64)
    if numba_enabled():
        return _window_mean_square_numba(x, win, hop)
    return _window_mean_square_numpy(x, win, hop)


# ---------------------------------------------------------------------------
# weight-grid match counting
# ---------------------------------------------------------------------------

def _count_matches_numpy(md: np.ndarray, grid: np.ndarray) -> np.ndarray:
    out = np.zeros(grid.shape[0], dtype=np.int64)
    # chunked so a 10k-point grid against thousands of pairs stays in cache
    step = 256
    for lo in range(0, grid.shape[0], step):
        block = grid[lo:lo + step]
        out[lo:lo + step] = np.count_nonzero(md @ block.T > 0.0, axis=0)
    return out


if HAS_NUMBA:

    @njit(cache=True)
    def _count_matches_numba(md, grid):  # pragma: no cover - jitted
        g = grid.shape[0]
        n = md.shape[0]
        k = md.shape[1]
        out = np.zeros(g, dtype=np.int64)
        for wi in range(g):
            c = 0
            for i in range(n):
                s = 0.0
                for j in range(k):
                    s += md[i, j] * grid[wi, j]
                if s > 0.0:
                    c += 1
            out[wi] = c
        return out


def count_matches(md: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """For each grid row w, count rows of ``md`` with md[i] . w > 0.

    ``md`` rows are majority-signed cue differences, so a positive dot
    product means the weighted scores agree with the majority vote.  Rows
    with no majority are all-zero and never count, for any w.
    """
    md = np.ascontiguousarray(md, dtype=np.float64)
    grid = np.ascontiguousarray(grid, dtype=np.float64)
    if md.ndim != 2 or grid.ndim != 2 or md.shape[1] != grid.shape[1]:
        raise ValueError("difference matrix and grid must share cue dimension")
    if numba_enabled():
        return _count_matches_numba(md, grid)
    return _count_matches_numpy(md, grid)


def warm_up() -> None:
    """Trigger jit compilation of every kernel on tiny inputs."""
    x = np.zeros(8, dtype=np.float64)
    biquad(x, np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0]))
    window_mean_square(x, 4, 2)
    count_matches(np.zeros((2, 5)), np.ones((3, 5)))
