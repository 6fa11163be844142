"""Fuzzy PI controller with integration on the output.

Two normalized inputs (error and per-sample error difference) are fuzzified
on five triangular sets each, combined through a 5x5 rule table with min/max
inference, and defuzzified as a weighted average of singleton consequents.
The singleton positions are scaled by a tunable factor ``c``. The resulting
increment is accumulated into the controller output, which makes the
nonlinear map behave like PI gains.

Evaluation order is chosen so that the control law is exactly odd-symmetric
and exactly homogeneous in ``c`` in floating point, not only algebraically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import ConfigError, ZeroActivation

N_SETS = 5
DEFAULT_PEAKS = (-1.0, -0.5, 0.0, 0.5, 1.0)


def _clamp(x: float, lo: float, hi: float) -> float:
    return lo if x < lo else hi if x > hi else x


def default_rules() -> tuple[tuple[int, ...], ...]:
    """Anti-diagonal PI rule base: cell (i, j) -> clamp(i + j - 4, -2, 2) + 2."""
    return tuple(
        tuple(int(_clamp(i + j - 4, -2, 2)) + 2 for j in range(N_SETS)) for i in range(N_SETS)
    )


@dataclass(frozen=True)
class TriangularPartition:
    """Five triangles on [-1, 1], each with feet at the neighbouring peaks.

    End sets are shouldered: inputs are clamped to [-1, 1] before evaluation,
    so anything beyond the universe has full membership in the outer set.
    """

    peaks: tuple[float, ...] = DEFAULT_PEAKS

    def __post_init__(self) -> None:
        peaks = tuple(float(p) for p in self.peaks)
        object.__setattr__(self, "peaks", peaks)
        if len(peaks) != N_SETS:
            raise ConfigError(f"partition needs {N_SETS} peaks, got {len(peaks)}")
        if peaks[0] != -1.0 or peaks[-1] != 1.0:
            raise ConfigError("partition peaks must start at -1 and end at +1")
        if any(b <= a for a, b in zip(peaks, peaks[1:])):
            raise ConfigError("partition peaks must be strictly increasing")

    @property
    def symmetric(self) -> bool:
        p = self.peaks
        return all(p[i] == -p[N_SETS - 1 - i] for i in range(N_SETS))


@dataclass(frozen=True)
class RuleTable:
    cells: tuple[tuple[int, ...], ...] = field(default_factory=default_rules)

    def __post_init__(self) -> None:
        cells = tuple(tuple(int(v) for v in row) for row in self.cells)
        object.__setattr__(self, "cells", cells)
        if len(cells) != N_SETS or any(len(row) != N_SETS for row in cells):
            raise ConfigError("rule table must be 5x5")
        for i, row in enumerate(cells):
            for j, k in enumerate(row):
                if not 0 <= k < N_SETS:
                    raise ConfigError(f"rule ({i},{j}) index {k} outside 0..4")
                # singleton odd symmetry turns the mirrored-sign condition
                # into a mirrored-index one
                if cells[N_SETS - 1 - i][N_SETS - 1 - j] != N_SETS - 1 - k:
                    raise ConfigError(f"rule table not anti-symmetric at ({i},{j})")


@dataclass(frozen=True)
class FuzzyPIConfig:
    k_e: float = 10.0
    k_de: float = 400.0
    k_u: float = 0.05
    e_partition: TriangularPartition = field(default_factory=TriangularPartition)
    de_partition: TriangularPartition = field(default_factory=TriangularPartition)
    rules: RuleTable = field(default_factory=RuleTable)
    base_singletons: tuple[float, ...] = DEFAULT_PEAKS
    u_min: float = -5.0
    u_max: float = 5.0

    def __post_init__(self) -> None:
        s = tuple(float(v) for v in self.base_singletons)
        object.__setattr__(self, "base_singletons", s)
        for name in ("k_e", "k_de", "k_u"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} > 0")
        if len(s) != N_SETS:
            raise ConfigError(f"need {N_SETS} base singletons")
        if any(b <= a for a, b in zip(s, s[1:])):
            raise ConfigError("base singletons must be ordered")
        if any(s[i] != -s[N_SETS - 1 - i] for i in range(N_SETS)):
            raise ConfigError("base singletons must be odd-symmetric")
        if not self.u_min < self.u_max:
            raise ConfigError("u_min < u_max")


@dataclass
class ControllerState:
    e_prev: float = 0.0
    u: float = 0.0
    initialized: bool = False


def fuzzify(x: float, partition: TriangularPartition) -> tuple[float, ...]:
    """Membership degrees of `x` in the five sets; they always sum to one."""
    x = _clamp(x, -1.0, 1.0)
    if x < 0.0 and partition.symmetric:
        # evaluate the mirror image so that fuzzify(-x) is exactly reversed
        return fuzzify(-x, partition)[::-1]
    p = partition.peaks
    k = 0
    while k < N_SETS - 2 and x > p[k + 1]:
        k += 1
    t = (x - p[k]) / (p[k + 1] - p[k])
    mu = [0.0] * N_SETS
    mu[k] = 1.0 - t
    mu[k + 1] = t
    return tuple(mu)


def infer(mu_e: Sequence[float], mu_de: Sequence[float], rules: RuleTable) -> tuple[float, ...]:
    """Max-min activation of each singleton consequent."""
    act = [0.0] * N_SETS
    for i, a in enumerate(mu_e):
        if a <= 0.0:
            continue
        row = rules.cells[i]
        for j, b in enumerate(mu_de):
            if b <= 0.0:
                continue
            w = a if a < b else b
            k = row[j]
            if w > act[k]:
                act[k] = w
    return tuple(act)


def defuzzify(activations: Sequence[float], base_singletons: Sequence[float], c: float) -> float:
    """Weighted average of the singletons ``c * s_k``.

    Mirrored terms are summed pairwise, which keeps the result exactly odd
    under reversal of the activations.
    """
    n = len(activations)
    num = 0.0
    den = 0.0
    for k in range(n // 2):
        m = n - 1 - k
        num += activations[k] * base_singletons[k] + activations[m] * base_singletons[m]
        den += activations[k] + activations[m]
    if n % 2:
        num += activations[n // 2] * base_singletons[n // 2]
        den += activations[n // 2]
    if den <= 0.0:
        raise ZeroActivation("no rule fired")
    return c * (num / den)


def increment(e: float, de: float, c: float, config: FuzzyPIConfig) -> float:
    """Output increment for error `e` and per-sample difference `de` (unclamped)."""
    x = _clamp(config.k_e * e, -1.0, 1.0)
    y = _clamp(config.k_de * de, -1.0, 1.0)
    act = infer(fuzzify(x, config.e_partition), fuzzify(y, config.de_partition), config.rules)
    return c * (config.k_u * defuzzify(act, config.base_singletons, 1.0))


def controller_step(e: float, c: float, config: FuzzyPIConfig, state: ControllerState) -> float:
    """Advance the controller by one sample and return the new output."""
    de = e - state.e_prev if state.initialized else 0.0
    state.u = _clamp(state.u + increment(e, de, c, config), config.u_min, config.u_max)
    state.e_prev = e
    state.initialized = True
    return state.u


def reset(state: ControllerState) -> ControllerState:
    state.e_prev = 0.0
    state.u = 0.0
    state.initialized = False
    return state
