"""JSON run configuration.

A config file is a JSON object with an optional ``"schema": 1`` marker and
any subset of the sections ``generator``, ``line``, ``load``,
``controller``, ``tuner`` and ``scenario``. Omitted sections and keys take
the library defaults (the scenario defaults to the 80 s study case). Unknown
keys are rejected. ``"line": null`` disconnects the transmission line.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigError, ParseError
from .fuzzy import FuzzyPIConfig, RuleTable, TriangularPartition
from .model import (
    ComplexAdmittance,
    GeneratorParams,
    LineParams,
    Model,
    NetworkAdmittance,
    admittances_from_line_and_load,
)
from .simulation import ScenarioConfig, ScenarioEvent, paper_scenario
from .tuner import TunerConfig

SCHEMA_VERSION = 1
SECTIONS = ("generator", "line", "load", "controller", "tuner", "scenario")


@dataclass(frozen=True)
class RunConfig:
    generator: GeneratorParams = field(default_factory=GeneratorParams)
    line: LineParams | None = field(default_factory=LineParams)
    load: ComplexAdmittance = field(default_factory=ComplexAdmittance)
    controller: FuzzyPIConfig = field(default_factory=FuzzyPIConfig)
    tuner: TunerConfig = field(default_factory=TunerConfig)
    scenario: ScenarioConfig = field(default_factory=paper_scenario)

    @property
    def network(self) -> NetworkAdmittance:
        y_line = self.line.admittance() if self.line is not None else ComplexAdmittance()
        return admittances_from_line_and_load(y_line, self.load)


def _check_keys(section: str, data: Any, allowed) -> dict:
    if not isinstance(data, dict):
        raise ConfigError(f"{section}: expected an object")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"{section}: unknown key(s) {', '.join(unknown)}")
    return data


def _number(section: str, key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key}: expected a number")
    return float(value)


def _flat(section: str, cls, data: Any, base):
    names = [f.name for f in dataclasses.fields(cls)]
    data = _check_keys(section, data, names)
    kwargs = {k: _number(section, k, v) for k, v in data.items()}
    try:
        return dataclasses.replace(base, **kwargs)
    except ConfigError as exc:
        raise ConfigError(f"{section}: {exc}") from None


_CONTROLLER_KEYS = (
    "k_e", "k_de", "k_u", "e_peaks", "de_peaks", "rules", "base_singletons", "u_min", "u_max",
)


def _controller(data: Any) -> FuzzyPIConfig:
    data = _check_keys("controller", data, _CONTROLLER_KEYS)
    base = FuzzyPIConfig()
    kwargs: dict[str, Any] = {}
    try:
        for key in ("k_e", "k_de", "k_u", "u_min", "u_max"):
            if key in data:
                kwargs[key] = _number("controller", key, data[key])
        if "e_peaks" in data:
            kwargs["e_partition"] = TriangularPartition(_numbers("e_peaks", data["e_peaks"]))
        if "de_peaks" in data:
            kwargs["de_partition"] = TriangularPartition(_numbers("de_peaks", data["de_peaks"]))
        if "base_singletons" in data:
            kwargs["base_singletons"] = _numbers("base_singletons", data["base_singletons"])
        if "rules" in data:
            rows = data["rules"]
            if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
                raise ConfigError("rules: expected a 5x5 array")
            for row in rows:
                if not all(isinstance(v, int) and not isinstance(v, bool) for v in row):
                    raise ConfigError("rules: entries must be integers")
            kwargs["rules"] = RuleTable(tuple(tuple(r) for r in rows))
        return dataclasses.replace(base, **kwargs)
    except ConfigError as exc:
        raise ConfigError(f"controller: {exc}") from None


def _numbers(key: str, value: Any) -> tuple[float, ...]:
    if not isinstance(value, list):
        raise ConfigError(f"{key}: expected an array of numbers")
    return tuple(_number("controller", key, v) for v in value)


_SCENARIO_KEYS = tuple(f.name for f in dataclasses.fields(ScenarioConfig))


def _scenario(data: Any) -> ScenarioConfig:
    data = _check_keys("scenario", data, _SCENARIO_KEYS)
    kwargs: dict[str, Any] = {}
    try:
        for key in ("duration", "h", "ts", "fixed_c", "target_vt", "target_te"):
            if key in data:
                kwargs[key] = _number("scenario", key, data[key])
        for key in ("adaptive", "log_full_rate"):
            if key in data:
                if not isinstance(data[key], bool):
                    raise ConfigError(f"{key}: expected true/false")
                kwargs[key] = data[key]
        if "model" in data:
            try:
                kwargs["model"] = Model(data["model"])
            except ValueError:
                raise ConfigError("model: expected 'full' or 'reduced'") from None
        if "events" in data:
            events = data["events"]
            if not isinstance(events, list):
                raise ConfigError("events: expected an array")
            parsed = []
            for n, ev in enumerate(events):
                ev = _check_keys(f"events[{n}]", ev, ("time", "kind", "magnitude"))
                missing = {"time", "kind", "magnitude"} - set(ev)
                if missing:
                    raise ConfigError(f"events[{n}]: missing {', '.join(sorted(missing))}")
                try:
                    parsed.append(ScenarioEvent(
                        _number("event", "time", ev["time"]),
                        ev["kind"],
                        _number("event", "magnitude", ev["magnitude"]),
                    ))
                except ValueError as exc:
                    if isinstance(exc, ConfigError):
                        raise
                    raise ConfigError(f"events[{n}]: unknown kind {ev['kind']!r}") from None
            kwargs["events"] = tuple(parsed)
        return dataclasses.replace(paper_scenario(), **kwargs)
    except ConfigError as exc:
        raise ConfigError(f"scenario: {exc}") from None


def config_from_dict(data: Any) -> RunConfig:
    data = _check_keys("config", data, ("schema",) + SECTIONS)
    schema = data.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ConfigError(f"schema: unsupported version {schema!r}")
    cfg = RunConfig()
    kwargs: dict[str, Any] = {}
    if "generator" in data:
        kwargs["generator"] = _flat("generator", GeneratorParams, data["generator"], cfg.generator)
    if "line" in data:
        kwargs["line"] = (
            None if data["line"] is None else _flat("line", LineParams, data["line"], LineParams())
        )
    if "load" in data:
        kwargs["load"] = _flat("load", ComplexAdmittance, data["load"], cfg.load)
    if "controller" in data:
        kwargs["controller"] = _controller(data["controller"])
    if "tuner" in data:
        kwargs["tuner"] = _flat("tuner", TunerConfig, data["tuner"], cfg.tuner)
    if "scenario" in data:
        kwargs["scenario"] = _scenario(data["scenario"])
    return dataclasses.replace(cfg, **kwargs)


def config_to_dict(cfg: RunConfig) -> dict:
    """Fully expanded, normalized form of `cfg` (every key present)."""
    c = cfg.controller
    s = cfg.scenario
    return {
        "schema": SCHEMA_VERSION,
        "generator": dataclasses.asdict(cfg.generator),
        "line": None if cfg.line is None else dataclasses.asdict(cfg.line),
        "load": dataclasses.asdict(cfg.load),
        "controller": {
            "k_e": c.k_e,
            "k_de": c.k_de,
            "k_u": c.k_u,
            "e_peaks": list(c.e_partition.peaks),
            "de_peaks": list(c.de_partition.peaks),
            "rules": [list(row) for row in c.rules.cells],
            "base_singletons": list(c.base_singletons),
            "u_min": c.u_min,
            "u_max": c.u_max,
        },
        "tuner": dataclasses.asdict(cfg.tuner),
        "scenario": {
            "duration": s.duration,
            "h": s.h,
            "ts": s.ts,
            "model": s.model.value,
            "adaptive": s.adaptive,
            "fixed_c": s.fixed_c,
            "target_vt": s.target_vt,
            "target_te": s.target_te,
            "events": [
                {"time": ev.time, "kind": ev.kind.value, "magnitude": ev.magnitude}
                for ev in s.events
            ],
            "log_full_rate": s.log_full_rate,
        },
    }


def load_config(path: str | Path) -> RunConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return config_from_dict(data)


def save_config(cfg: RunConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2) + "\n", encoding="utf-8")
