"""Experiment configuration, deterministic seeding, ensemble runs, and
CSV persistence.

A config file is JSON with sections:

    {
      "topology": {"kind": "scale-free", "n": 2000, "alpha": 2.2, "k_min": 2},
      "model":    {"R": 1.0, "beta": 2.0, "strategy": "random",
                   "eta": 0.6, "offer_scan": "skip"},
      "money":    {"M": 1.0, "theta": 0.0},
      "run":      {"realizations": 100, "max_steps": 1000000,
                   "master_seed": 1, "workers": 1},
      "sweep":    {"parameter": "theta", "values": [-2.0, -1.6]},
      "outputs":  {"summary": "out.csv", "per_degree": "deg.csv",
                   "lowhigh": "lh.csv", "trace": "trace.jsonl"}
    }

"graph" (a path written by the generate command) may replace "topology"
to rerun the dynamics on one fixed graph. Everything except the
topology/graph choice has a default. Output bytes are fully determined
by the config: seeds derive from (master_seed, sweep index,
realization), rows are emitted in (sweep value, realization) order no
matter how the runs are scheduled, and floats are written with repr
round-trip formatting.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import DEFAULT_MAX_STEPS, ModelParams, run_simulation
from .graphgen import (
    Multigraph,
    TopologyConfig,
    build_graph,
    default_k_split,
    load_graph,
)
from .metrics import (
    DegreeProfile,
    LowHighDecomposition,
    censored_count,
    degree_profile,
    low_high_from_profile,
    merge_profiles,
    survival_summary,
)
from .moneyinit import allocate_money
from .strategies import DEFAULT_ETA, STRATEGY_NAMES, StrategyKind

SWEEP_PARAMETERS = ("M", "theta")

SUMMARY_HEADER = "sweep_param,sweep_value,realization,seed,avg_vertex_time,t_max,censored_count"
PER_DEGREE_HEADER = "sweep_value,k,n_k,mean_T,mu_k,s_k"
LOWHIGH_HEADER = "sweep_value,f_L,f_H,T_low,T_high"


class ConfigError(ValueError):
    """A config that violates its schema; the message lists every problem."""

    def __init__(self, problems) -> None:
        self.problems = list(problems)
        super().__init__(
            "invalid config:\n" + "\n".join(f"  - {p}" for p in self.problems)
        )


@dataclass(frozen=True)
class MoneyParams:
    budget: float = 1.0
    theta: float = 0.0


@dataclass(frozen=True)
class RunParams:
    realizations: int = 1
    max_steps: int = DEFAULT_MAX_STEPS
    master_seed: int = 0
    workers: int = 1


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class OutputPaths:
    summary: str | None = None
    per_degree: str | None = None
    lowhigh: str | None = None
    trace: str | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    topology: TopologyConfig | None
    graph_path: str | None
    model: ModelParams
    money: MoneyParams
    run: RunParams
    sweep: SweepSpec | None
    outputs: OutputPaths


@dataclass(frozen=True)
class ResultRow:
    sweep_value: float
    realization: int
    seed: int
    avg_vertex_time: float
    t_max: int
    censored_count: int


@dataclass
class EnsembleResult:
    sweep_param: str  # "M", "theta", or "none"
    rows: list[ResultRow]
    profiles: list[tuple[float, DegreeProfile]]
    lowhigh: list[tuple[float, LowHighDecomposition]]
    k_split: int


def _check_number(section, key, value, problems, minimum=None, strict=False) -> float | None:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        problems.append(f"{section}.{key} must be a number, got {value!r}")
        return None
    value = float(value)
    if not np.isfinite(value):
        problems.append(f"{section}.{key} must be finite, got {value!r}")
        return None
    if minimum is not None and (value <= minimum if strict else value < minimum):
        op = ">" if strict else ">="
        problems.append(f"{section}.{key} must be {op} {minimum}, got {value}")
        return None
    return value


def _check_int(section, key, value, problems, minimum) -> int | None:
    if not isinstance(value, int) or isinstance(value, bool):
        problems.append(f"{section}.{key} must be an integer, got {value!r}")
        return None
    if value < minimum:
        problems.append(f"{section}.{key} must be >= {minimum}, got {value}")
        return None
    return value


def _reject_unknown(section, payload, known, problems) -> None:
    for key in payload:
        if key not in known:
            problems.append(f"unknown key {section}.{key}")


def parse_config(payload: dict) -> ExperimentConfig:
    """Validate a decoded JSON payload and fill in defaults."""
    problems: list[str] = []
    if not isinstance(payload, dict):
        raise ConfigError(["top level must be a JSON object"])
    _reject_unknown(
        "config",
        payload,
        {"topology", "graph", "model", "money", "run", "sweep", "outputs"},
        problems,
    )

    topology = None
    graph_path = None
    has_topology = "topology" in payload
    has_graph = "graph" in payload
    if has_topology == has_graph:
        problems.append("exactly one of topology or graph is required")
    elif has_graph:
        if not isinstance(payload["graph"], str) or not payload["graph"]:
            problems.append("graph must be a non-empty path string")
        else:
            graph_path = payload["graph"]
    else:
        topo = payload["topology"]
        if not isinstance(topo, dict):
            problems.append("topology must be an object")
        else:
            _reject_unknown("topology", topo, {"kind", "n", "alpha", "k_min", "lambda"}, problems)
            kind = topo.get("kind")
            n = _check_int("topology", "n", topo.get("n", 0), problems, minimum=1)
            kwargs = {}
            if "alpha" in topo:
                alpha = _check_number("topology", "alpha", topo["alpha"], problems, minimum=1.0, strict=True)
                if alpha is not None:
                    kwargs["alpha"] = alpha
            if "k_min" in topo:
                k_min = _check_int("topology", "k_min", topo["k_min"], problems, minimum=1)
                if k_min is not None:
                    kwargs["k_min"] = k_min
            if "lambda" in topo:
                lam = _check_number("topology", "lambda", topo["lambda"], problems, minimum=0.0, strict=True)
                if lam is not None:
                    kwargs["lam"] = lam
            if n is not None:
                try:
                    topology = TopologyConfig(kind=kind, n=n, **kwargs)
                except ValueError as err:
                    problems.append(str(err))

    model_payload = payload.get("model", {})
    model = None
    if not isinstance(model_payload, dict):
        problems.append("model must be an object")
    else:
        _reject_unknown("model", model_payload, {"R", "beta", "strategy", "eta", "offer_scan"}, problems)
        threshold = _check_number("model", "R", model_payload.get("R", 1.0), problems, minimum=0.0)
        capacity = _check_number("model", "beta", model_payload.get("beta", 2.0), problems, minimum=0.0, strict=True)
        eta = _check_number("model", "eta", model_payload.get("eta", DEFAULT_ETA), problems, minimum=0.0)
        name = model_payload.get("strategy", "random")
        if name not in STRATEGY_NAMES:
            problems.append(f"model.strategy must be one of {STRATEGY_NAMES}, got {name!r}")
            name = None
        offer_scan = model_payload.get("offer_scan", "skip")
        if offer_scan not in ("skip", "stop"):
            problems.append(f"model.offer_scan must be 'skip' or 'stop', got {offer_scan!r}")
            offer_scan = "skip"
        if None not in (threshold, capacity, eta, name):
            model = ModelParams(
                threshold=threshold,
                capacity=capacity,
                strategy=StrategyKind(name, eta=eta),
                offer_scan=offer_scan,
            )

    money_payload = payload.get("money", {})
    money = None
    if not isinstance(money_payload, dict):
        problems.append("money must be an object")
    else:
        _reject_unknown("money", money_payload, {"M", "theta"}, problems)
        budget = _check_number("money", "M", money_payload.get("M", 1.0), problems, minimum=0.0)
        theta = _check_number("money", "theta", money_payload.get("theta", 0.0), problems)
        if None not in (budget, theta):
            money = MoneyParams(budget=budget, theta=theta)

    run_payload = payload.get("run", {})
    run = None
    if not isinstance(run_payload, dict):
        problems.append("run must be an object")
    else:
        _reject_unknown("run", run_payload, {"realizations", "max_steps", "master_seed", "workers"}, problems)
        realizations = _check_int("run", "realizations", run_payload.get("realizations", 1), problems, minimum=1)
        max_steps = _check_int("run", "max_steps", run_payload.get("max_steps", DEFAULT_MAX_STEPS), problems, minimum=1)
        workers = _check_int("run", "workers", run_payload.get("workers", 1), problems, minimum=1)
        master_seed = run_payload.get("master_seed", 0)
        if not isinstance(master_seed, int) or isinstance(master_seed, bool):
            problems.append(f"run.master_seed must be an integer, got {master_seed!r}")
            master_seed = None
        if None not in (realizations, max_steps, workers, master_seed):
            run = RunParams(
                realizations=realizations,
                max_steps=max_steps,
                master_seed=master_seed,
                workers=workers,
            )

    sweep = None
    if "sweep" in payload:
        sweep_payload = payload["sweep"]
        if not isinstance(sweep_payload, dict):
            problems.append("sweep must be an object")
        else:
            _reject_unknown("sweep", sweep_payload, {"parameter", "values"}, problems)
            parameter = sweep_payload.get("parameter")
            if parameter not in SWEEP_PARAMETERS:
                problems.append(
                    f"sweep.parameter must be one of {SWEEP_PARAMETERS}, got {parameter!r}"
                )
            values = sweep_payload.get("values")
            ok_values: list[float] = []
            if not isinstance(values, list) or not values:
                problems.append("sweep.values must be a non-empty list of numbers")
            else:
                for i, v in enumerate(values):
                    checked = _check_number("sweep", f"values[{i}]", v, problems)
                    if checked is not None:
                        if parameter == "M" and checked < 0:
                            problems.append(f"sweep.values[{i}] must be >= 0 for an M sweep")
                        else:
                            ok_values.append(checked)
            if parameter in SWEEP_PARAMETERS and len(ok_values) == len(values or []):
                sweep = SweepSpec(parameter=parameter, values=tuple(ok_values))

    outputs_payload = payload.get("outputs", {})
    outputs = OutputPaths()
    if not isinstance(outputs_payload, dict):
        problems.append("outputs must be an object")
    else:
        _reject_unknown("outputs", outputs_payload, {"summary", "per_degree", "lowhigh", "trace"}, problems)
        fields = {}
        for key in ("summary", "per_degree", "lowhigh", "trace"):
            if key in outputs_payload:
                value = outputs_payload[key]
                if not isinstance(value, str) or not value:
                    problems.append(f"outputs.{key} must be a non-empty path string")
                else:
                    fields[key] = value
        outputs = OutputPaths(**fields)

    if problems:
        raise ConfigError(problems)
    assert model is not None and money is not None and run is not None
    return ExperimentConfig(
        topology=topology,
        graph_path=graph_path,
        model=model,
        money=money,
        run=run,
        sweep=sweep,
        outputs=outputs,
    )


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(
            [f"JSON parse error at line {err.lineno} column {err.colno}: {err.msg}"]
        ) from err
    return parse_config(payload)


_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _finalize(z: int) -> int:
    """splitmix64 finalizer: avalanches all 64 bits of the state."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


_SWEEP_MULT = 0xBF58476D1CE4E5B9
_REALIZATION_MULT = 0x94D049BB133111EB


def derive_seed(master_seed: int, sweep_index: int, realization_index: int) -> int:
    """Deterministic, collision-resistant seed for one run of the ensemble.

    Each component enters through its own odd multiplier before a
    splitmix64 finalizer round, so nearby triples cannot collide by
    cancellation (plain addition would collide whenever the components
    sum to the same value).
    """
    state = _finalize(((master_seed & _MASK64) + _GOLDEN) & _MASK64)
    state = _finalize((state + (sweep_index & _MASK64) * _SWEEP_MULT) & _MASK64)
    state = _finalize((state + (realization_index & _MASK64) * _REALIZATION_MULT) & _MASK64)
    return state


def _effective_money(config: ExperimentConfig, sweep_param: str, value: float) -> MoneyParams:
    if sweep_param == "M":
        return replace(config.money, budget=value)
    if sweep_param == "theta":
        return replace(config.money, theta=value)
    return config.money


def _single_run(task) -> tuple[ResultRow, DegreeProfile]:
    """One (sweep value, realization) work unit; also the subprocess entry."""
    config, sweep_param, sweep_index, value, realization, graph, trace_sink = task
    seed = derive_seed(config.run.master_seed, sweep_index, realization)
    try:
        rng = np.random.default_rng(seed)
        if graph is None:
            graph = build_graph(config.topology, rng)
        money = _effective_money(config, sweep_param, value)
        allocation = allocate_money(graph.degrees, money.budget, money.theta)
        trace = None
        if trace_sink is not None:
            def trace(summary, _value=value, _realization=realization):
                trace_sink.write(
                    json.dumps(
                        {"sweep_value": _value, "realization": _realization, **summary}
                    )
                    + "\n"
                )
        records = run_simulation(
            graph,
            allocation,
            config.model,
            max_steps=config.run.max_steps,
            rng=rng,
            trace=trace,
        )
    except Exception as err:
        raise RuntimeError(
            f"run failed at sweep_value={value} realization={realization} seed={seed}: {err}"
        ) from err
    avg, t_max = survival_summary(records)
    row = ResultRow(
        sweep_value=value,
        realization=realization,
        seed=seed,
        avg_vertex_time=avg,
        t_max=t_max,
        censored_count=censored_count(records),
    )
    return row, degree_profile(records)


def run_ensemble(config: ExperimentConfig, trace_sink=None) -> EnsembleResult:
    """Run every (sweep value, realization) pair and aggregate.

    Results come back in deterministic (sweep value, realization) order
    whether runs execute serially or on worker processes. A trace sink
    (any file-like with write) forces serial execution so lines arrive
    in that same order.
    """
    if config.sweep is not None:
        sweep_param = config.sweep.parameter
        values = list(config.sweep.values)
    else:
        sweep_param = "none"
        values = [0.0]

    fixed_graph: Multigraph | None = None
    if config.graph_path is not None:
        fixed_graph = load_graph(config.graph_path)

    if fixed_graph is not None:
        mean_k = float(fixed_graph.degrees.mean())
        k_split = int(np.floor(mean_k)) + 1
    else:
        k_split = default_k_split(config.topology)

    tasks = [
        (config, sweep_param, si, value, realization, fixed_graph, trace_sink)
        for si, value in enumerate(values)
        for realization in range(config.run.realizations)
    ]

    if config.run.workers > 1 and trace_sink is None:
        with ProcessPoolExecutor(max_workers=config.run.workers) as pool:
            outcomes = list(pool.map(_single_run, tasks))
    else:
        outcomes = [_single_run(task) for task in tasks]

    rows = [row for row, _ in outcomes]
    profiles: list[tuple[float, DegreeProfile]] = []
    lowhigh: list[tuple[float, LowHighDecomposition]] = []
    per_value = config.run.realizations
    for si, value in enumerate(values):
        chunk = [profile for _, profile in outcomes[si * per_value : (si + 1) * per_value]]
        pooled = merge_profiles(chunk)
        profiles.append((value, pooled))
        lowhigh.append((value, low_high_from_profile(pooled, k_split)))
    return EnsembleResult(
        sweep_param=sweep_param,
        rows=rows,
        profiles=profiles,
        lowhigh=lowhigh,
        k_split=k_split,
    )


def _fmt(value) -> str:
    if value is None:
        return "nan"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_results(result: EnsembleResult, paths: OutputPaths) -> list[str]:
    """Write the requested CSV files; returns the paths written.

    All files use LF line endings, '.' decimals, and no quoting, so a
    rerun of the same config reproduces them byte for byte.
    """
    written = []
    if paths.summary is not None:
        with open(paths.summary, "w", encoding="utf-8", newline="") as fh:
            fh.write(SUMMARY_HEADER + "\n")
            for row in result.rows:
                fields = (
                    result.sweep_param,
                    _fmt(row.sweep_value),
                    row.realization,
                    row.seed,
                    _fmt(row.avg_vertex_time),
                    row.t_max,
                    row.censored_count,
                )
                fh.write(",".join(str(f) for f in fields) + "\n")
        written.append(paths.summary)
    if paths.per_degree is not None:
        with open(paths.per_degree, "w", encoding="utf-8", newline="") as fh:
            fh.write(PER_DEGREE_HEADER + "\n")
            for value, profile in result.profiles:
                for i, k in enumerate(profile.degrees):
                    fields = (
                        _fmt(value),
                        int(k),
                        int(profile.counts[i]),
                        _fmt(float(profile.mean_lifetime[i])),
                        _fmt(float(profile.mu[i])),
                        _fmt(float(profile.mean_saves[i])),
                    )
                    fh.write(",".join(str(f) for f in fields) + "\n")
        written.append(paths.per_degree)
    if paths.lowhigh is not None:
        with open(paths.lowhigh, "w", encoding="utf-8", newline="") as fh:
            fh.write(LOWHIGH_HEADER + "\n")
            for value, decomp in result.lowhigh:
                fields = (
                    _fmt(value),
                    _fmt(decomp.f_low),
                    _fmt(decomp.f_high),
                    _fmt(decomp.mean_low),
                    _fmt(decomp.mean_high),
                )
                fh.write(",".join(fields) + "\n")
        written.append(paths.lowhigh)
    return written
