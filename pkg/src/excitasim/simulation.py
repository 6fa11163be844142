"""Closed-loop scenarios: plant + sampled fuzzy PI controller + tuner.

The plant is integrated with classic fixed-step RK4 at step ``h``; the
controller runs every ``ts`` seconds and its output is held in between.
Reference, measured output, control signal and electric torque are handled
as deviations from the initial operating point.
"""

from __future__ import annotations

import dataclasses
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import ConfigError, EmptyWindow, LossOfSynchronism, Unstable
from .integrate import rk4_step
from .fuzzy import ControllerState, FuzzyPIConfig, controller_step
from .model import (
    RHS,
    GeneratorParams,
    MechanicalInput,
    Model,
    NetworkAdmittance,
    find_equilibrium,
    outputs,
)
from .tuner import TunerConfig, TunerState, tuner_step

DIVERGENCE_BOUND = 1e3
# tolerance used when comparing sample times against window edges
_TIME_EPS = 1e-9


class EventKind(str, Enum):
    REFERENCE_STEP = "reference_step"
    TORQUE_STEP = "torque_step"
    OWN_CONDUCTANCE_STEP = "own_conductance_step"
    OWN_SUSCEPTANCE_STEP = "own_susceptance_step"
    TRANSFER_CONDUCTANCE_STEP = "transfer_conductance_step"
    TRANSFER_SUSCEPTANCE_STEP = "transfer_susceptance_step"


_NET_FIELD = {
    EventKind.OWN_CONDUCTANCE_STEP: "g1",
    EventKind.OWN_SUSCEPTANCE_STEP: "b1",
    EventKind.TRANSFER_CONDUCTANCE_STEP: "g2",
    EventKind.TRANSFER_SUSCEPTANCE_STEP: "b2",
}


@dataclass(frozen=True)
class ScenarioEvent:
    time: float
    kind: EventKind
    magnitude: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", EventKind(self.kind))
        if not (math.isfinite(self.time) and self.time >= 0):
            raise ConfigError("event time >= 0")
        if not math.isfinite(self.magnitude):
            raise ConfigError("event magnitude must be finite")


@dataclass(frozen=True)
class ScenarioConfig:
    duration: float = 80.0
    h: float = 0.001
    ts: float = 0.02
    model: Model = Model.FULL
    adaptive: bool = True
    fixed_c: float = 1.0
    target_vt: float = 1.0
    target_te: float = 0.8
    events: tuple[ScenarioEvent, ...] = ()
    log_full_rate: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "events", tuple(self.events))
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ConfigError("duration > 0")
        if not (self.h > 0 and self.h <= self.ts):
            raise ConfigError("0 < h <= ts")
        ratio = self.ts / self.h
        if abs(ratio - round(ratio)) > 1e-9 * ratio:
            raise ConfigError("ts must be an integer multiple of h")
        if not math.isfinite(self.fixed_c):
            raise ConfigError("fixed_c must be finite")

    @property
    def steps_per_sample(self) -> int:
        return round(self.ts / self.h)

    @property
    def n_samples(self) -> int:
        return math.floor(self.duration / self.ts + _TIME_EPS)

    def snapped_step(self, time: float) -> int:
        """Integration step index of the grid point nearest to `time`."""
        return round(time / self.h)


def paper_scenario() -> ScenarioConfig:
    """Reference step at 20 s, turbine torque step at 40 s, extra local load at 60 s."""
    return ScenarioConfig(
        duration=80.0,
        h=0.001,
        ts=0.02,
        model=Model.FULL,
        events=(
            ScenarioEvent(20.0, EventKind.REFERENCE_STEP, 0.05),
            ScenarioEvent(40.0, EventKind.TORQUE_STEP, 0.2),
            ScenarioEvent(60.0, EventKind.OWN_CONDUCTANCE_STEP, 0.2),
        ),
    )


@dataclass
class TimeSeries:
    """Logged trajectories, one row per logged instant.

    ``vt_dev``, ``e``, ``u``, ``s`` and ``t_e`` are deviations from the
    initial operating point; ``delta`` and ``v_f`` are absolute. ``x`` holds
    the raw plant state, ``stator`` the algebraic solution (i_d, i_q, v_d,
    v_q) and ``network`` the admittances (g1, b1, g2, b2) in force.
    """

    model: Model
    dt: float
    t: np.ndarray
    reference: np.ndarray
    vt_dev: np.ndarray
    e: np.ndarray
    u: np.ndarray
    v_f: np.ndarray
    delta: np.ndarray
    s: np.ndarray
    t_e: np.ndarray
    c: np.ndarray
    v_t: np.ndarray
    t_m: np.ndarray
    x: np.ndarray
    stator: np.ndarray
    network: np.ndarray
    v_t0: float
    t_e0: float
    u0: float

    CSV_COLUMNS = ("t", "ref", "vt_dev", "e", "u", "vf", "delta", "slip", "te", "c")

    def columns(self) -> list[np.ndarray]:
        return [
            self.t, self.reference, self.vt_dev, self.e, self.u,
            self.v_f, self.delta, self.s, self.t_e, self.c,
        ]

    def __len__(self) -> int:
        return len(self.t)


@dataclass(frozen=True)
class Metrics:
    iae: float
    ise: float
    overshoot: float
    settling_time: float
    max_abs_error: float
    settled: bool = True


def integrate_open_loop(
    x0: Sequence[float],
    inp: MechanicalInput,
    params: GeneratorParams,
    net: NetworkAdmittance,
    model: Model,
    duration: float,
    h: float = 0.001,
) -> np.ndarray:
    """RK4 trajectory with inputs held constant; one row per step, including t = 0."""
    rhs = RHS[Model(model)]
    n = round(duration / h)
    x = [float(v) for v in x0]
    out = np.empty((n + 1, len(x)))
    out[0] = x
    for j in range(n):
        x = rk4_step(rhs, x, h, inp.t_m, inp.u, params, net)
        out[j + 1] = x
    return out


def run_closed_loop(
    scenario: ScenarioConfig,
    params: GeneratorParams,
    net: NetworkAdmittance,
    controller_config: FuzzyPIConfig,
    tuner_config: TunerConfig,
) -> TimeSeries:
    model = scenario.model
    state0, inp0 = find_equilibrium(scenario.target_vt, scenario.target_te, params, net, model)
    x = [float(v) for v in state0.as_array()]
    alg0 = outputs(x, model, params, net)
    v_t0, t_e0, u0 = alg0.v_t, alg0.t_e, inp0.u

    rhs = RHS[model]
    h = scenario.h
    sps = scenario.steps_per_sample
    total = scenario.n_samples * sps
    events = sorted(
        ((scenario.snapped_step(ev.time), n, ev) for n, ev in enumerate(scenario.events)),
        key=lambda item: (item[0], item[1]),
    )

    ctrl = ControllerState()
    tuner = TunerState()
    t_m = inp0.t_m
    ref = 0.0
    u_dev = 0.0
    c = tuner_config.c1 if scenario.adaptive else scenario.fixed_c
    rows: list[tuple] = []
    ev_i = 0

    for j in range(total + 1):
        while ev_i < len(events) and events[ev_i][0] == j:
            ev = events[ev_i][2]
            if ev.kind is EventKind.REFERENCE_STEP:
                ref += ev.magnitude
            elif ev.kind is EventKind.TORQUE_STEP:
                t_m += ev.magnitude
            else:
                name = _NET_FIELD[ev.kind]
                net = dataclasses.replace(net, **{name: getattr(net, name) + ev.magnitude})
            ev_i += 1

        sample = j % sps == 0
        if sample or scenario.log_full_rate:
            alg = outputs(x, model, params, net)
            e = ref - (alg.v_t - v_t0)
            if sample:
                c = tuner_step(e, tuner_config, tuner) if scenario.adaptive else scenario.fixed_c
                u_dev = controller_step(e, c, controller_config, ctrl)
            rows.append((
                j * h, ref, alg.v_t - v_t0, e, u_dev, x[-1], x[0], x[1], alg.t_e - t_e0, c,
                alg.v_t, t_m, tuple(x), (alg.i_d, alg.i_q, alg.v_d, alg.v_q),
                (net.g1, net.b1, net.g2, net.b2),
            ))
        if j == total:
            break

        x = rk4_step(rhs, x, h, t_m, u0 + u_dev, params, net)
        if abs(x[0]) > math.pi:
            raise LossOfSynchronism(f"|delta| = {abs(x[0]):.3f} rad at t = {(j + 1) * h:.3f} s")
        if not all(math.isfinite(v) and abs(v) <= DIVERGENCE_BOUND for v in x):
            raise Unstable(f"state left the +/-{DIVERGENCE_BOUND:g} band at t = {(j + 1) * h:.3f} s")

    cols = list(zip(*rows))
    scalar = [np.array(col, dtype=float) for col in cols[:12]]
    if not scenario.log_full_rate:
        # times are regenerated from the sample index to keep spacing exact
        scalar[0] = np.arange(len(rows)) * scenario.ts
    return TimeSeries(
        model=model,
        dt=h if scenario.log_full_rate else scenario.ts,
        t=scalar[0], reference=scalar[1], vt_dev=scalar[2], e=scalar[3], u=scalar[4],
        v_f=scalar[5], delta=scalar[6], s=scalar[7], t_e=scalar[8], c=scalar[9],
        v_t=scalar[10], t_m=scalar[11],
        x=np.array(cols[12], dtype=float),
        stator=np.array(cols[13], dtype=float),
        network=np.array(cols[14], dtype=float),
        v_t0=v_t0, t_e0=t_e0, u0=u0,
    )


def compute_metrics(series: TimeSeries, window: tuple[float, float], band: float) -> Metrics:
    """Performance indices over samples with ``t_start <= t < t_end``.

    Overshoot is measured against the latest reference step inside the
    window (0 if there is none). Settling time is counted from the window
    start to the sample after the last one whose error lies outside `band`.
    """
    t0, t1 = window
    idx = np.flatnonzero((series.t >= t0 - _TIME_EPS) & (series.t < t1 - _TIME_EPS))
    if idx.size == 0:
        raise EmptyWindow(f"no samples in [{t0}, {t1})")
    e = series.e[idx]
    dt = series.dt
    iae = float(np.sum(np.abs(e)) * dt)
    ise = float(np.sum(e * e) * dt)
    max_abs = float(np.max(np.abs(e)))

    overshoot = 0.0
    ref = series.reference
    steps = [k for k in idx if k > 0 and ref[k] != ref[k - 1]]
    if steps:
        k = steps[-1]
        mag = ref[k] - ref[k - 1]
        after = idx[idx >= k]
        excess = np.sign(mag) * (series.vt_dev[after] - ref[after])
        overshoot = max(0.0, float(np.max(excess))) / float(abs(mag))

    outside = np.flatnonzero(np.abs(e) > band)
    if outside.size == 0:
        settling, settled = 0.0, True
    elif outside[-1] == idx.size - 1:
        settling, settled = float(t1 - t0), False
    else:
        settling, settled = float(series.t[idx[outside[-1] + 1]] - t0), True
    return Metrics(iae, ise, overshoot, settling, max_abs, settled)


@dataclass
class Comparison:
    adaptive: TimeSeries
    fixed: TimeSeries
    windows: list[tuple[float, float]]
    adaptive_metrics: list[Metrics] = field(default_factory=list)
    fixed_metrics: list[Metrics] = field(default_factory=list)


def event_windows(scenario: ScenarioConfig) -> list[tuple[float, float]]:
    """One window per distinct event time, each ending at the next event."""
    times = sorted({scenario.snapped_step(ev.time) * scenario.h for ev in scenario.events})
    times = [t for t in times if t < scenario.duration]
    ends = times[1:] + [scenario.duration]
    return list(zip(times, ends))


def _workers() -> int:
    raw = os.environ.get("EXCITASIM_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            return 1
    return min(2, os.cpu_count() or 1)


def compare_adaptive(
    scenario: ScenarioConfig,
    params: GeneratorParams,
    net: NetworkAdmittance,
    controller_config: FuzzyPIConfig,
    tuner_config: TunerConfig,
) -> Comparison:
    """Run the scenario with and without tuning (fixed scale = c1)."""
    legs = [
        dataclasses.replace(scenario, adaptive=True),
        dataclasses.replace(scenario, adaptive=False, fixed_c=tuner_config.c1),
    ]
    args = [(leg, params, net, controller_config, tuner_config) for leg in legs]
    if _workers() > 1:
        with ProcessPoolExecutor(max_workers=2) as pool:
            adaptive, fixed = pool.map(run_closed_loop, *zip(*args))
    else:
        adaptive, fixed = (run_closed_loop(*a) for a in args)
    windows = event_windows(scenario)
    return Comparison(
        adaptive=adaptive,
        fixed=fixed,
        windows=windows,
        adaptive_metrics=[compute_metrics(adaptive, w, tuner_config.alpha) for w in windows],
        fixed_metrics=[compute_metrics(fixed, w, tuner_config.alpha) for w in windows],
    )


def total_iae(metrics: Sequence[Metrics]) -> float:
    return float(sum(m.iae for m in metrics))
