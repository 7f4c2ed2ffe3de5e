"""Command line front end: generate graphs, run one config, run sweeps.

Exit codes: 0 on success, 1 for validation problems (bad flags, bad
config, bad parameter values), 2 for I/O failures.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from .graphgen import TOPOLOGY_KINDS, TopologyConfig, build_graph, save_graph
from .harness import (
    SWEEP_PARAMETERS,
    ConfigError,
    SweepSpec,
    load_config,
    run_ensemble,
    write_results,
)
from .metrics import mean_and_sem


class CliError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports bad usage through the exit-code contract
    instead of calling sys.exit(2) itself."""

    def error(self, message):
        raise CliError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="reqoffer", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate", help="sample a graph and write it as JSON")
    gen.add_argument("--topology", required=True, choices=TOPOLOGY_KINDS)
    gen.add_argument("--n", required=True, type=int)
    gen.add_argument("--alpha", type=float, default=2.2)
    gen.add_argument("--kmin", type=int, default=2)
    gen.add_argument("--lambda", dest="lam", type=float, default=9.36)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_generate)

    sim = sub.add_parser("simulate", help="run the ensemble described by a config")
    sim.add_argument("--config", required=True)
    _add_output_flags(sim)
    sim.set_defaults(func=_cmd_simulate)

    swp = sub.add_parser("sweep", help="run a config once per sweep value")
    swp.add_argument("--config", required=True)
    swp.add_argument("--param", required=True, choices=SWEEP_PARAMETERS)
    swp.add_argument(
        "--values",
        required=True,
        help="comma-separated list, e.g. --values=0.25,0.5,1 (use = before negatives)",
    )
    _add_output_flags(swp)
    swp.set_defaults(func=_cmd_sweep)
    return parser


def _add_output_flags(cmd) -> None:
    cmd.add_argument("--out", help="summary CSV path")
    cmd.add_argument("--per-degree", dest="per_degree", help="per-degree CSV path")
    cmd.add_argument("--lowhigh", help="low/high decomposition CSV path")
    cmd.add_argument("--trace", help="per-step JSON-lines path (forces serial runs)")


def _cmd_generate(args) -> int:
    config = TopologyConfig(
        kind=args.topology, n=args.n, alpha=args.alpha, k_min=args.kmin, lam=args.lam
    )
    graph = build_graph(config, np.random.default_rng(args.seed))
    save_graph(graph, args.out)
    print(f"wrote {args.out}: n={graph.n} edges={graph.total_edges}")
    return 0


def _effective_config(args):
    config = load_config(args.config)
    overrides = {
        key: value
        for key, value in (
            ("summary", args.out),
            ("per_degree", args.per_degree),
            ("lowhigh", args.lowhigh),
            ("trace", args.trace),
        )
        if value is not None
    }
    if overrides:
        config = replace(config, outputs=replace(config.outputs, **overrides))
    return config


def _run_and_write(config) -> int:
    if config.outputs.trace is not None:
        with open(config.outputs.trace, "w", encoding="utf-8", newline="") as sink:
            result = run_ensemble(config, trace_sink=sink)
    else:
        result = run_ensemble(config)
    written = write_results(result, config.outputs)

    per_value: dict[float, list[float]] = {}
    for row in result.rows:
        per_value.setdefault(row.sweep_value, []).append(row.avg_vertex_time)
    for value, avgs in per_value.items():
        mean, sem = mean_and_sem(avgs)
        label = "" if result.sweep_param == "none" else f"{result.sweep_param}={value:g} "
        print(f"{label}avg_vertex_time={mean:.6g} sem={sem:.3g} realizations={len(avgs)}")
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_simulate(args) -> int:
    return _run_and_write(_effective_config(args))


def _cmd_sweep(args) -> int:
    tokens = [tok.strip() for tok in args.values.split(",")]
    if not all(tokens):
        raise CliError(f"--values has an empty entry: {args.values!r}")
    try:
        values = tuple(float(tok) for tok in tokens)
    except ValueError:
        raise CliError(f"--values must be a comma-separated list of numbers, got {args.values!r}")
    if args.param == "M" and any(v < 0 for v in values):
        raise CliError("--values must be >= 0 for an M sweep")
    config = _effective_config(args)
    config = replace(config, sweep=SweepSpec(parameter=args.param, values=values))
    return _run_and_write(config)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (CliError, ConfigError, ValueError, RuntimeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
