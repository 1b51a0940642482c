"""Broadcast loudness measurement and the per-basket audio cue.

The crowd/commentator mix is the strongest single excitement signal, but
raw PCM amplitude is a poor proxy for perceived loudness.  We follow the
broadcast measurement practice: a two-stage prefilter (a shelving filter
modelling the acoustic effect of the head, then the RLB revised
low-frequency B-curve high-pass), windowed mean-square energy, channel
summation, and conversion to dB.  The per-basket cue is then the sum of
the m largest loudness peaks in a short window around the basket.

Filter coefficients are data, not code: the 48 kHz set ships in
``data/bs1770_48k.json``.  Audio at any other rate must either come with
its own coefficient file or be resampled to the coefficient rate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import _kernels


class SampleRateError(ValueError):
    pass


@dataclass
class PcmAudio:
    """Uniformly sampled PCM, one row per channel, floats in [-1, 1]."""

    sample_rate_hz: int
    samples: np.ndarray  # shape (channels, n)

    def __post_init__(self) -> None:
        self.samples = np.atleast_2d(np.asarray(self.samples, dtype=np.float64))
        if self.sample_rate_hz <= 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate_hz}")
        if self.samples.ndim != 2 or self.samples.shape[1] == 0:
            raise ValueError("samples must be a non-empty (channels, n) array")

    @property
    def channels(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return self.samples.shape[1] / self.sample_rate_hz


@dataclass
class BiquadCascadeConfig:
    """Second-order sections applied in series, plus per-channel gains.

    Each stage is (b, a) with b = (b0, b1, b2) and a = (a0=1, a1, a2).
    ``channel_gains`` of None means unit gain on every channel.
    """

    sample_rate_hz: int
    stages: list[tuple[np.ndarray, np.ndarray]]
    channel_gains: list[float] | None = None

    def __post_init__(self) -> None:
        if not self.stages:
            raise ValueError("cascade needs at least one stage")
        norm = []
        for b, a in self.stages:
            b = np.asarray(b, dtype=np.float64)
            a = np.asarray(a, dtype=np.float64)
            if b.shape != (3,) or a.shape != (3,):
                raise ValueError("each stage needs 3 b and 3 a coefficients")
            if a[0] != 1.0:
                raise ValueError(f"stage a0 must be normalized to 1, got {a[0]}")
            if not (np.all(np.isfinite(b)) and np.all(np.isfinite(a))):
                raise ValueError("non-finite filter coefficient")
            norm.append((b, a))
        self.stages = norm

    @classmethod
    def from_dict(cls, raw: dict) -> "BiquadCascadeConfig":
        stages = [(np.asarray(s["b"], dtype=np.float64),
                   np.asarray(s["a"], dtype=np.float64))
                  for s in raw["stages"]]
        return cls(sample_rate_hz=int(raw["sample_rate_hz"]), stages=stages,
                   channel_gains=raw.get("channel_gains"))

    @classmethod
    def load(cls, path: str | Path) -> "BiquadCascadeConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def default_cascade_48k() -> BiquadCascadeConfig:
    """The packaged 48 kHz two-stage prefilter."""
    text = resources.files("hoopcut").joinpath("data/bs1770_48k.json").read_text("utf-8")
    return BiquadCascadeConfig.from_dict(json.loads(text))


def two_stage_filter(audio: PcmAudio, cfg: BiquadCascadeConfig,
                     resample: bool = False) -> PcmAudio:
    """Run every channel through the prefilter cascade, state starting at zero.

    Raises SampleRateError when the audio rate differs from the coefficient
    rate and ``resample`` is False; otherwise the audio is polyphase-resampled
    to the coefficient rate first.
    """
    if audio.sample_rate_hz != cfg.sample_rate_hz:
        if not resample:
            raise SampleRateError(
                f"audio at {audio.sample_rate_hz} Hz but coefficients are for "
                f"{cfg.sample_rate_hz} Hz (enable resampling or supply "
                f"matching coefficients)")
        from scipy.signal import resample_poly

        g = math.gcd(cfg.sample_rate_hz, audio.sample_rate_hz)
        samples = resample_poly(audio.samples, cfg.sample_rate_hz // g,
                                audio.sample_rate_hz // g, axis=1)
        audio = PcmAudio(cfg.sample_rate_hz, samples)
    out = np.empty_like(audio.samples)
    for ch in range(audio.channels):
        out[ch] = _kernels.biquad_cascade(audio.samples[ch], cfg.stages)
    return PcmAudio(audio.sample_rate_hz, out)


@dataclass
class LoudnessSeries:
    """Windowed loudness in dB at a fixed hop.

    Value i covers the audio span [i*hop, i*hop + window); its timestamp is
    the window centre, so ``start_ts_s`` defaults to window/2 for a series
    measured from the start of the recording.  Values never fall below
    ``floor_db``; silence sits exactly on the floor.
    """

    values: np.ndarray
    hop_s: float
    window_s: float
    start_ts_s: float
    floor_db: float = -70.0

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.values)

    def ts(self) -> np.ndarray:
        return self.start_ts_s + np.arange(len(self.values)) * self.hop_s


def loudness_series(filtered: PcmAudio, window_s: float = 0.4,
                    hop_s: float = 0.1, floor_db: float = -70.0,
                    channel_gains: list[float] | None = None) -> LoudnessSeries:
    """Mean-square level per window, channels gain-summed, in dB.

    window_s >= hop_s > 0.  Per window: sum_c gain_c * meansquare(channel c),
    then 10*log10, clamped to floor_db.  Raises when the audio is shorter
    than one window.
    """
    if not 0 < hop_s <= window_s:
        raise ValueError(f"need window_s >= hop_s > 0, got ({window_s}, {hop_s})")
    sr = filtered.sample_rate_hz
    win = int(round(window_s * sr))
    hop = int(round(hop_s * sr))
    if filtered.samples.shape[1] < win:
        raise ValueError(
            f"audio of {filtered.duration_s:.3f}s shorter than one "
            f"{window_s}s window")
    if channel_gains is None:
        channel_gains = [1.0] * filtered.channels
    if len(channel_gains) != filtered.channels:
        raise ValueError(f"{len(channel_gains)} gains for {filtered.channels} channels")
    power = None
    for ch in range(filtered.channels):
        ms = _kernels.window_mean_square(filtered.samples[ch], win, hop)
        power = ms * channel_gains[ch] if power is None else power + ms * channel_gains[ch]
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(power)
    db = np.maximum(db, floor_db)
    return LoudnessSeries(values=db, hop_s=hop_s, window_s=window_s,
                          start_ts_s=window_s / 2.0, floor_db=floor_db)


def _peak_run_values(seg: np.ndarray) -> np.ndarray:
    """Values of strict local maxima of ``seg``, plateaus collapsed to one.

    A run of equal values is a peak when it has a strictly smaller
    neighbour on both sides; the first and last runs of the segment can
    never qualify.
    """
    if seg.size < 3:
        return np.empty(0, dtype=np.float64)
    boundaries = np.flatnonzero(np.diff(seg) != 0)
    run_values = seg[np.r_[0, boundaries + 1]]
    if run_values.size < 3:
        return np.empty(0, dtype=np.float64)
    inner = run_values[1:-1]
    is_peak = (inner > run_values[:-2]) & (inner > run_values[2:])
    return inner[is_peak]


def audio_cue(series: LoudnessSeries, basket_vts_s: float, m: int = 7,
              pre_s: float = 3.0, post_s: float = 1.0) -> float:
    """Sum of the m largest loudness peaks around the basket.

    The series is restricted to [basket - pre_s, basket + post_s]; peak
    values are shifted by the floor so the summands are nonnegative (raw
    dB peaks can be negative, which would make a top-m sum shrink as m
    grows).  Fewer than m peaks: all of them are summed.  No peaks: 0.

    Raises when the window does not intersect the series span at all.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    ts = series.ts()
    lo = basket_vts_s - pre_s
    hi = basket_vts_s + post_s
    sel = (ts >= lo) & (ts <= hi)
    if not np.any(sel):
        raise ValueError(
            f"cue window [{lo:.3f}, {hi:.3f}]s lies outside the loudness "
            f"series span [{ts[0]:.3f}, {ts[-1]:.3f}]s" if len(ts) else
            "empty loudness series")
    peaks = _peak_run_values(series.values[sel]) - series.floor_db
    if peaks.size == 0:
        return 0.0
    top = np.sort(peaks)[::-1][:m]
    return float(np.sum(top))


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------

def read_wav(path: str | Path) -> PcmAudio:
    """Load PCM WAV (16-bit int, 32-bit int, or 32/64-bit float)."""
    from scipy.io import wavfile

    sr, data = wavfile.read(path)
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        samples = data.astype(np.float64) / 2147483648.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise ValueError(f"{path}: unsupported WAV sample format {data.dtype}")
    if samples.ndim == 1:
        samples = samples[np.newaxis, :]
    else:
        samples = samples.T
    return PcmAudio(int(sr), samples)


def write_wav(path: str | Path, audio: PcmAudio) -> None:
    from scipy.io import wavfile

    wavfile.write(path, audio.sample_rate_hz,
                  np.ascontiguousarray(audio.samples.T, dtype=np.float32))


def save_loudness_jsonl(series: LoudnessSeries, path: str | Path) -> None:
    ts = series.ts()
    with open(path, "w", encoding="utf-8") as fh:
        for t, db in zip(ts, series.values):
            fh.write(json.dumps({"ts": float(t), "db": float(db)}) + "\n")


def load_loudness_jsonl(path: str | Path, window_s: float = 0.4,
                        floor_db: float = -70.0) -> LoudnessSeries:
    """Read a cached series; hop and start come from the stored timestamps.

    The window and floor are measurement parameters the cache does not
    carry, so the caller supplies them (normally from EngineConfig).
    """
    ts: list[float] = []
    db: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                ts.append(float(raw["ts"]))
                db.append(float(raw["db"]))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{ln}: bad loudness line ({exc})") from exc
    if len(ts) < 2:
        raise ValueError(f"{path}: loudness cache needs at least 2 samples")
    hops = np.diff(ts)
    # nanosecond rounding keeps an exact hop (0.1, not 0.1 + one ulp of drift)
    hop = round(float(hops[0]), 9)
    if not np.allclose(hops, hop, rtol=0, atol=1e-6):
        raise ValueError(f"{path}: loudness timestamps are not uniformly spaced")
    return LoudnessSeries(values=np.asarray(db), hop_s=hop, window_s=window_s,
                          start_ts_s=ts[0], floor_db=floor_db)
