"""Basketball highlight engine.

Scores every basket of a game by fusing five excitement cues (crowd
loudness, scorer ranking, score differential, basket type, motion),
learns the cue weights from pairwise human preferences, and assembles
the top baskets into a chronological edit decision list.
"""

from .config import EngineConfig
from .excitement import CueVector, ScoredBasket, WeightVector
from .game_data import BasketEvent, BasketType, GameRecord

__version__ = "0.1.0"

__all__ = [
    "BasketEvent",
    "BasketType",
    "CueVector",
    "EngineConfig",
    "GameRecord",
    "ScoredBasket",
    "WeightVector",
    "__version__",
]
