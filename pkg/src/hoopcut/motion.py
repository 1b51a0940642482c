"""Motion magnitudes from precomputed sparse optical-flow vectors.

Camera motion is estimated as the dominant (median) displacement per
frame; player motion is what remains after subtracting it.  The pipeline
consumes the overall magnitude; camera and player components are kept
inspectable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass
class FlowFrame:
    vts_s: float
    vectors: np.ndarray  # shape (n, 4): x, y, dx, dy; n may be 0

    def __post_init__(self) -> None:
        self.vectors = np.asarray(self.vectors, dtype=np.float64).reshape(-1, 4)
        if self.vts_s < 0:
            raise ValueError(f"frame timestamp must be non-negative, got {self.vts_s}")


@dataclass(frozen=True)
class MotionScores:
    camera: float
    player: float
    overall: float


def dominant_flow(frame: FlowFrame) -> tuple[float, float]:
    """Component-wise median displacement; empty frame gives (0, 0)."""
    if frame.vectors.shape[0] == 0:
        return (0.0, 0.0)
    med = np.median(frame.vectors[:, 2:4], axis=0)
    return (float(med[0]), float(med[1]))


def motion_scores(frames: list[FlowFrame], basket_vts_s: float,
                  pre_s: float = 3.0, post_s: float = 1.0) -> MotionScores:
    """Aggregate motion magnitudes over frames around the basket.

    Per in-window frame: camera = norm of the dominant flow, player =
    mean norm of (vector - dominant), overall = mean vector norm; the
    scores are the means over frames.  No frames in window: all zeros.
    """
    cam: list[float] = []
    ply: list[float] = []
    ovr: list[float] = []
    lo = basket_vts_s - pre_s
    hi = basket_vts_s + post_s
    for frame in frames:
        if not lo <= frame.vts_s <= hi:
            continue
        d = np.array(dominant_flow(frame))
        disp = frame.vectors[:, 2:4]
        cam.append(float(np.hypot(d[0], d[1])))
        if disp.shape[0] == 0:
            ply.append(0.0)
            ovr.append(0.0)
        else:
            ply.append(float(np.mean(np.linalg.norm(disp - d, axis=1))))
            ovr.append(float(np.mean(np.linalg.norm(disp, axis=1))))
    if not cam:
        return MotionScores(0.0, 0.0, 0.0)
    return MotionScores(camera=float(np.mean(cam)), player=float(np.mean(ply)),
                        overall=float(np.mean(ovr)))


def load_flow_jsonl(path: str | Path) -> list[FlowFrame]:
    frames = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                frames.append(FlowFrame(vts_s=float(raw["vts"]),
                                        vectors=np.asarray(raw["v"], dtype=np.float64)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{ln}: bad flow line ({exc})") from exc
    frames.sort(key=lambda f: f.vts_s)
    return frames


def save_flow_jsonl(frames: list[FlowFrame], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for frame in frames:
            fh.write(json.dumps({"vts": frame.vts_s,
                                 "v": frame.vectors.tolist()}) + "\n")
