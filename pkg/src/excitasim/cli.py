"""Command-line front end.

Exit codes: 0 success, 1 I/O problem, 2 invalid configuration or flags,
3 simulation failure (no operating point, loss of synchronism, divergence).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from .config import RunConfig, load_config
from .errors import ConfigError, ExcitasimError
from .linearize import linearize_operating_point
from .model import RHS, Model, find_equilibrium, outputs
from .simulation import TimeSeries, compare_adaptive, compute_metrics, run_closed_loop

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2
EXIT_SIM = 3

METRICS_HEADER = (
    "variant", "window_start", "window_end", "iae", "ise",
    "overshoot", "settling_time", "settled", "max_abs_error",
)


def fmt(value: float) -> str:
    return f"{value:.9g}"


def write_trace(series: TimeSeries, out: TextIO) -> None:
    out.write(",".join(TimeSeries.CSV_COLUMNS) + "\n")
    for row in zip(*series.columns()):
        out.write(",".join(fmt(v) for v in row) + "\n")


def save_trace(series: TimeSeries, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        write_trace(series, fh)


def _load(path: str | None) -> RunConfig:
    return RunConfig() if path is None else load_config(path)


def cmd_simulate(args: argparse.Namespace) -> int:
    if not args.out:
        print("error: --out is required", file=sys.stderr)
        return EXIT_IO
    cfg = _load(args.config)
    scenario = cfg.scenario
    if args.adaptive is not None:
        scenario = dataclasses.replace(scenario, adaptive=args.adaptive == "on")
    if args.model is not None:
        scenario = dataclasses.replace(scenario, model=Model(args.model))
    series = run_closed_loop(scenario, cfg.generator, cfg.network, cfg.controller, cfg.tuner)
    save_trace(series, Path(args.out))
    m = compute_metrics(series, (0.0, scenario.duration), cfg.tuner.alpha)
    print(
        f"rows={len(series)} iae={fmt(m.iae)} ise={fmt(m.ise)} "
        f"max_abs_error={fmt(m.max_abs_error)} overshoot={fmt(m.overshoot)}"
    )
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    if not args.out_dir:
        print("error: --out-dir is required", file=sys.stderr)
        return EXIT_IO
    cfg = _load(args.config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = compare_adaptive(cfg.scenario, cfg.generator, cfg.network, cfg.controller, cfg.tuner)
    save_trace(result.adaptive, out_dir / "adaptive.csv")
    save_trace(result.fixed, out_dir / "fixed.csv")
    with open(out_dir / "metrics.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(METRICS_HEADER) + "\n")
        for variant, metrics in (("adaptive", result.adaptive_metrics), ("fixed", result.fixed_metrics)):
            for (t0, t1), m in zip(result.windows, metrics):
                fields = [
                    variant, fmt(t0), fmt(t1), fmt(m.iae), fmt(m.ise), fmt(m.overshoot),
                    fmt(m.settling_time), str(int(m.settled)), fmt(m.max_abs_error),
                ]
                fh.write(",".join(fields) + "\n")
    iae_a = sum(m.iae for m in result.adaptive_metrics)
    iae_f = sum(m.iae for m in result.fixed_metrics)
    print(f"adaptive_iae={fmt(iae_a)} fixed_iae={fmt(iae_f)}")
    return EXIT_OK


def cmd_linearize(args: argparse.Namespace) -> int:
    cfg = _load(args.config)
    ts = cfg.scenario.ts if args.ts is None else args.ts
    if not ts > 0:
        raise ConfigError("--ts must be positive")
    s = cfg.scenario
    tf = linearize_operating_point(cfg.generator, cfg.network, s.target_vt, s.target_te, ts)
    print("name,value")
    for i, b in enumerate(tf.b_coeffs):
        print(f"b{i},{fmt(b)}")
    for i, a in enumerate(tf.a_coeffs, start=1):
        print(f"a{i},{fmt(a)}")
    print(f"ts,{fmt(tf.ts)}")
    print(f"delay,{tf.delay}")
    return EXIT_OK


def cmd_equilibrium(args: argparse.Namespace) -> int:
    cfg = _load(args.config)
    s = cfg.scenario
    model = Model(args.model) if args.model is not None else s.model
    state, inp = find_equilibrium(s.target_vt, s.target_te, cfg.generator, cfg.network, model)
    x = state.as_array()
    deriv = RHS[model](list(x), inp.t_m, inp.u, cfg.generator, cfg.network)
    alg = outputs(x, model, cfg.generator, cfg.network)
    print("name,value")
    print(f"model,{model.value}")
    for f in dataclasses.fields(state):
        print(f"{f.name},{fmt(getattr(state, f.name))}")
    print(f"v_f0,{fmt(inp.u)}")
    print(f"t_m0,{fmt(inp.t_m)}")
    print(f"v_t,{fmt(alg.v_t)}")
    print(f"t_e,{fmt(alg.t_e)}")
    print(f"derivative_norm,{fmt(float(np.max(np.abs(deriv))))}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="excitasim",
        description="Adaptive fuzzy excitation control of a synchronous generator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one closed-loop scenario and write a CSV trace")
    p.add_argument("--config")
    p.add_argument("--out")
    p.add_argument("--adaptive", choices=("on", "off"))
    p.add_argument("--model", choices=("full", "reduced"))
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="run with and without tuning; write traces and metrics")
    p.add_argument("--config")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("linearize", help="print the discrete 4th-order transfer function")
    p.add_argument("--config")
    p.add_argument("--ts", type=float)
    p.set_defaults(func=cmd_linearize)

    p = sub.add_parser("equilibrium", help="print the initial operating point")
    p.add_argument("--config")
    p.add_argument("--model", choices=("full", "reduced"))
    p.set_defaults(func=cmd_equilibrium)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ExcitasimError as exc:
        print(f"simulation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SIM
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
