"""Two-position self-tuning of the singleton scale ``c``.

The tuner behaves as a hysteresis relay on the control error: it holds the
nominal value ``c1`` while the error stays within ``[-alpha, alpha]``, jumps
to ``c2`` once the error leaves that band, and only comes back to ``c1`` when
the error has dropped below the much smaller ``beta``.

    >>> cfg = TunerConfig(alpha=0.01, beta=0.001, c1=1.0, c2=2.5)
    >>> tuner_trace([0.0, 0.02, 0.005, 0.0005, 0.02], cfg)
    [1.0, 2.5, 2.5, 1.0, 2.5]
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .errors import ConfigError


class Mode(str, Enum):
    NOMINAL = "nominal"
    RETUNED = "retuned"


@dataclass(frozen=True)
class TunerConfig:
    alpha: float = 0.01
    beta: float = 0.001
    c1: float = 1.0
    c2: float = 2.5

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "c1", "c2"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        if not 0 < self.beta:
            raise ConfigError("beta > 0")
        if not self.beta < self.alpha:
            raise ConfigError("beta < alpha")
        if not (self.c1 > 0 and self.c2 > 0):
            raise ConfigError("c1 > 0 and c2 > 0")


@dataclass
class TunerState:
    mode: Mode = Mode.NOMINAL


def tuner_step(e: float, config: TunerConfig, state: TunerState) -> float:
    """Update the relay with error `e`, then emit the scale for the new mode.

    Both thresholds are strict: ``|e| == alpha`` does not engage and
    ``|e| == beta`` does not release.
    """
    mag = abs(e)
    if state.mode is Mode.NOMINAL:
        if mag > config.alpha:
            state.mode = Mode.RETUNED
    elif mag < config.beta:
        state.mode = Mode.NOMINAL
    return config.c1 if state.mode is Mode.NOMINAL else config.c2


def tuner_trace(errors: Iterable[float], config: TunerConfig) -> list[float]:
    state = TunerState()
    return [tuner_step(e, config, state) for e in errors]
