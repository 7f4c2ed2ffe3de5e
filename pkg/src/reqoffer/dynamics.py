"""The request-offer survival dynamics.

Each discrete step runs the same protocol over every vertex still alive
at the start of the step:

1. Draw a production amount X ~ Exponential(mean = capacity). A vertex
   with X below its threshold R is in deficit by R - X; with X above R it
   holds a surplus of X - R; X == R is neither.
2. A deficit vertex that cannot pay for its shortfall (money < deficit)
   dies immediately and sends nothing.
3. Every surviving deficit vertex sends a request for its shortfall to
   all neighbours alive at the start of the step.
4. Each surplus vertex keeps the requests it could afford in full
   (amount <= surplus), puts them in strategy order, then scans the
   ordered list: a request that fits the unreserved remainder gets an
   offer and a reservation; one that does not is skipped (or, in "stop"
   scan mode, ends the scan).
5. A requester that received offers accepts exactly one, uniformly at
   random, pays the offerer the full amount, and survives the step. A
   requester with no offers dies.

Unspent surplus perishes at the end of the step; money persists, and the
balances of dead vertices are stranded with them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .graphgen import Multigraph
from .moneyinit import MoneyAllocation
from .strategies import StrategyKind

DEATH_NO_MONEY = "no_money"
DEATH_NO_OFFER = "no_offer"
CENSORED = "censored"

_CAUSE_ALIVE = 0
_CAUSE_NO_MONEY = 1
_CAUSE_NO_OFFER = 2
_CAUSE_LABELS = {_CAUSE_NO_MONEY: DEATH_NO_MONEY, _CAUSE_NO_OFFER: DEATH_NO_OFFER}

SCAN_MODES = ("skip", "stop")
DEFAULT_MAX_STEPS = 1_000_000

_STRATEGY_CODES = {"random": 0, "high_to_low": 1, "prop_to_req": 2, "prop_to_req_deg": 3}


@dataclass(frozen=True)
class ModelParams:
    """Per-vertex economics: threshold is the amount a vertex must consume
    each step, capacity the mean of its production draw."""

    threshold: float = 1.0
    capacity: float = 2.0
    strategy: StrategyKind = field(default_factory=lambda: StrategyKind("random"))
    offer_scan: str = "skip"

    def __post_init__(self) -> None:
        if self.threshold < 0:
            raise ValueError(f"threshold must be >= 0, got {self.threshold}")
        if self.capacity <= 0:
            raise ValueError(f"capacity must be positive, got {self.capacity}")
        if self.offer_scan not in SCAN_MODES:
            raise ValueError(f"offer_scan must be one of {SCAN_MODES}, got {self.offer_scan!r}")


@dataclass(frozen=True)
class SurvivalRecord:
    """Outcome of one vertex over a whole simulation."""

    vertex: int
    degree: int
    lifetime: int
    cause: str
    saves: int


@dataclass(frozen=True)
class VertexState:
    vertex: int
    alive: bool
    money: float
    saves: int
    death_time: int  # 0 while alive
    death_cause: str | None


@dataclass
class StepLog:
    """Everything that happened during one call to run_time_step."""

    t: int
    productions: dict[int, float]
    requests: dict[int, tuple[float, tuple[int, ...]]]
    offers: list[tuple[int, int, float]]
    acceptances: list[tuple[int, int, float]]
    deaths: list[tuple[int, str]]


def sample_production(capacity: float, rng: np.random.Generator, size: int | None = None):
    """Exponential production draw(s) with mean `capacity`.

    Returns a float when size is omitted, else an array of draws.
    """
    if capacity <= 0:
        raise ValueError(f"capacity must be positive, got {capacity}")
    if size is None:
        return float(rng.exponential(scale=capacity))
    return rng.exponential(scale=capacity, size=size)


class SimState:
    """Mutable state of one simulation run.

    Vertex attributes live in flat arrays indexed by vertex id; the
    adjacency used by the dynamics drops self-loops, which can never
    carry an offer (a vertex is either in deficit or in surplus, not
    both).
    """

    def __init__(
        self,
        graph: Multigraph,
        allocation: MoneyAllocation,
        params: ModelParams,
        rng: np.random.Generator,
    ) -> None:
        if len(allocation.balances) != graph.n:
            raise ValueError(
                f"allocation covers {len(allocation.balances)} vertices, graph has {graph.n}"
            )
        if np.any(allocation.balances < 0):
            raise ValueError("money balances must be non-negative")
        self.graph = graph
        self.params = params
        self.rng = rng
        self.t = 1  # index of the step about to run
        n = graph.n
        self.alive = np.ones(n, dtype=bool)
        self.money = allocation.balances.astype(np.float64, copy=True)
        self.saves = np.zeros(n, dtype=np.int64)
        self.death_time = np.zeros(n, dtype=np.int64)
        self._cause = np.zeros(n, dtype=np.int8)
        self._initial_money_total = float(self.money.sum())

        # adjacency without self-loops
        row = np.repeat(np.arange(n, dtype=np.int64), np.diff(graph.indptr))
        keep = graph.nbr != row
        self._nbr = graph.nbr[keep]
        self._mult = graph.nbr_mult[keep].astype(np.float64)
        counts = np.bincount(row[keep], minlength=n)
        self._indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=self._indptr[1:])

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def alive_count(self) -> int:
        return int(self.alive.sum())

    @property
    def money_total(self) -> float:
        return float(self.money.sum())

    @property
    def initial_money_total(self) -> float:
        return self._initial_money_total

    def vertex(self, i: int) -> VertexState:
        code = int(self._cause[i])
        return VertexState(
            vertex=i,
            alive=bool(self.alive[i]),
            money=float(self.money[i]),
            saves=int(self.saves[i]),
            death_time=int(self.death_time[i]),
            death_cause=_CAUSE_LABELS.get(code),
        )


@njit(cache=True)
def _offer_scan(offs, amounts, weights, surplus, weighted, stop_on_misfit, uniforms, granted):
    """Per-offerer ordering and reservation scan over grouped request rows.

    Rows [offs[g], offs[g+1]) belong to offerer group g and hold only
    affordable requests (amount <= full surplus). When `weighted`, the
    whole group is first put in order by sequential weighted sampling
    without replacement (one uniform per draw); otherwise rows are
    visited as given. The ordered rows are then scanned: a request
    fitting the unreserved remainder is granted, a misfit is skipped,
    or ends the group when `stop_on_misfit`.
    """
    used = np.zeros(len(amounts), dtype=np.bool_)
    ptr = 0
    for g in range(len(offs) - 1):
        a, b = offs[g], offs[g + 1]
        rem = surplus[g]
        if not weighted:
            for i in range(a, b):
                if amounts[i] <= rem:
                    granted[i] = True
                    rem -= amounts[i]
                elif stop_on_misfit:
                    break
            continue
        size = b - a
        order = np.empty(size, dtype=np.int64)
        for d in range(size):
            total = 0.0
            for i in range(a, b):
                if not used[i]:
                    total += weights[i]
            target = uniforms[ptr] * total
            ptr += 1
            pick = -1
            acc = 0.0
            for i in range(a, b):
                if used[i]:
                    continue
                acc += weights[i]
                if acc > target:
                    pick = i
                    break
            if pick < 0:
                # floating-point edge: target landed at or past the
                # running total; take the last live row
                for i in range(b - 1, a - 1, -1):
                    if not used[i]:
                        pick = i
                        break
            used[pick] = True
            order[d] = pick
        for d in range(size):
            i = order[d]
            if amounts[i] <= rem:
                granted[i] = True
                rem -= amounts[i]
            elif stop_on_misfit:
                break


def _segment_take(indptr: np.ndarray, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Flat adjacency positions of every entry in the given CSR rows."""
    counts = indptr[rows + 1] - indptr[rows]
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64), counts
    ends = np.cumsum(counts)
    pos = np.arange(total, dtype=np.int64) - np.repeat(ends - counts, counts)
    pos += np.repeat(indptr[rows], counts)
    return pos, counts


def _advance(
    state: SimState,
    production_override: dict[int, float] | None,
    collect: bool,
) -> tuple[StepLog | None, int, int, int]:
    """Run one step in place. Returns (log, deaths_no_money,
    deaths_no_offer, transactions); log is None unless `collect`."""
    params = state.params
    rng = state.rng
    t = state.t
    n = state.n
    alive_idx = np.flatnonzero(state.alive)

    if production_override is None:
        x_alive = rng.exponential(scale=params.capacity, size=len(alive_idx))
    else:
        missing = [int(i) for i in alive_idx if i not in production_override]
        if missing:
            raise ValueError(f"production override misses alive vertices {missing[:5]}")
        x_alive = np.array([production_override[int(i)] for i in alive_idx], dtype=np.float64)
        if np.any(x_alive < 0):
            raise ValueError("production must be non-negative")

    threshold = params.threshold
    x = np.zeros(n, dtype=np.float64)
    x[alive_idx] = x_alive
    surplus_amt = x - threshold
    in_surplus = np.zeros(n, dtype=bool)
    in_surplus[alive_idx] = x_alive > threshold

    deficit_mask = x_alive < threshold
    deficit_vertices = alive_idx[deficit_mask]
    deficit_amt = threshold - x_alive[deficit_mask]

    # money gate: a shortfall the vertex cannot cover kills it on the spot
    funded = state.money[deficit_vertices] >= deficit_amt
    no_money_dead = deficit_vertices[~funded]
    requesters = deficit_vertices[funded]
    req_amt = deficit_amt[funded]

    # fan requests out to every neighbour alive at the start of the step
    pos, counts = _segment_take(state._indptr, requesters)
    pair_req = np.repeat(requesters, counts)
    pair_amt = np.repeat(req_amt, counts)
    pair_dst = state._nbr[pos]
    pair_mult = state._mult[pos]
    pair_alive = state.alive[pair_dst]

    eligible = pair_alive & in_surplus[pair_dst] & (pair_amt <= surplus_amt[pair_dst])
    e_req = pair_req[eligible]
    e_dst = pair_dst[eligible]
    e_amt = pair_amt[eligible]
    e_mult = pair_mult[eligible]

    strategy = params.strategy
    code = _STRATEGY_CODES[strategy.name]
    if len(e_req):
        if code == 1:  # high_to_low: deterministic order inside each group
            order = np.lexsort((e_req, -e_mult, -e_amt, e_dst))
        else:
            order = np.argsort(e_dst, kind="stable")
        e_req, e_dst, e_amt, e_mult = e_req[order], e_dst[order], e_amt[order], e_mult[order]
        group_dst, group_start = np.unique(e_dst, return_index=True)
        offs = np.append(group_start, len(e_dst)).astype(np.int64)

        if code == 0:
            weights = e_mult
        elif code == 2:
            weights = e_amt * e_mult
        elif code == 3:
            alive_deg = np.bincount(pair_req, weights=pair_alive, minlength=n)
            weights = e_amt * e_mult / alive_deg[e_req] ** strategy.eta
        else:
            weights = np.empty(0, dtype=np.float64)

        uniforms = rng.random(len(e_dst)) if code != 1 else np.empty(0, dtype=np.float64)
        granted = np.zeros(len(e_dst), dtype=np.bool_)
        _offer_scan(
            offs,
            e_amt,
            weights,
            surplus_amt[group_dst],
            code != 1,
            params.offer_scan == "stop",
            uniforms,
            granted,
        )
        off_dst = e_dst[granted]
        off_req = e_req[granted]
        off_amt = e_amt[granted]
    else:
        off_dst = off_req = np.empty(0, dtype=np.int64)
        off_amt = np.empty(0, dtype=np.float64)

    # each requester with offers accepts one uniformly at random
    if len(off_req):
        order = np.argsort(off_req, kind="stable")
        off_req, off_dst, off_amt = off_req[order], off_dst[order], off_amt[order]
        saved, acc_start = np.unique(off_req, return_index=True)
        acc_counts = np.diff(np.append(acc_start, len(off_req)))
        u = rng.random(len(saved))
        sel = acc_start + np.minimum((u * acc_counts).astype(np.int64), acc_counts - 1)
        acc_off = off_dst[sel]
        acc_amt = off_amt[sel]
        state.money[saved] -= acc_amt
        np.add.at(state.money, acc_off, acc_amt)
        state.saves[saved] += 1
    else:
        saved = acc_off = np.empty(0, dtype=np.int64)
        acc_amt = np.empty(0, dtype=np.float64)

    got_offer = np.zeros(n, dtype=bool)
    got_offer[saved] = True
    no_offer_dead = requesters[~got_offer[requesters]]

    state.alive[no_money_dead] = False
    state.alive[no_offer_dead] = False
    state.death_time[no_money_dead] = t
    state.death_time[no_offer_dead] = t
    state._cause[no_money_dead] = _CAUSE_NO_MONEY
    state._cause[no_offer_dead] = _CAUSE_NO_OFFER
    state.t = t + 1

    log = None
    if collect:
        productions = {int(i): float(v) for i, v in zip(alive_idx, x_alive)}
        requests: dict[int, tuple[float, tuple[int, ...]]] = {}
        lo = 0
        for r, amt, c in zip(requesters, req_amt, counts):
            dsts = pair_dst[lo : lo + c]
            live = pair_alive[lo : lo + c]
            requests[int(r)] = (float(amt), tuple(int(d) for d in dsts[live]))
            lo += c
        offers = [
            (int(o), int(r), float(a)) for o, r, a in zip(off_dst, off_req, off_amt)
        ]
        acceptances = [
            (int(r), int(o), float(a)) for r, o, a in zip(saved, acc_off, acc_amt)
        ]
        deaths = [(int(v), DEATH_NO_MONEY) for v in no_money_dead]
        deaths += [(int(v), DEATH_NO_OFFER) for v in no_offer_dead]
        log = StepLog(
            t=t,
            productions=productions,
            requests=requests,
            offers=offers,
            acceptances=acceptances,
            deaths=deaths,
        )
    return log, len(no_money_dead), len(no_offer_dead), len(saved)


def run_time_step(
    state: SimState, production_override: dict[int, float] | None = None
) -> StepLog:
    """Advance the state by one step and report everything that happened.

    production_override maps vertex id to a fixed production amount and
    must cover every vertex alive at the start of the step; it exists so
    tests can script exact scenarios.
    """
    log, _, _, _ = _advance(state, production_override, collect=True)
    assert log is not None
    return log


def run_simulation(
    graph: Multigraph,
    allocation: MoneyAllocation,
    params: ModelParams,
    max_steps: int = DEFAULT_MAX_STEPS,
    rng: np.random.Generator | None = None,
    trace=None,
) -> list[SurvivalRecord]:
    """Run the dynamics until every vertex is dead or max_steps elapses.

    Returns one record per vertex. Vertices still alive after max_steps
    are reported as censored with lifetime == max_steps. `trace`, if
    given, is called after every step with a small summary dict.
    """
    if max_steps < 1:
        raise ValueError(f"max_steps must be >= 1, got {max_steps}")
    if rng is None:
        rng = np.random.default_rng()
    state = SimState(graph, allocation, params, rng)
    while state.alive_count and state.t <= max_steps:
        _, dnm, dno, txn = _advance(state, None, collect=False)
        if trace is not None:
            trace(
                {
                    "t": state.t - 1,
                    "alive": state.alive_count,
                    "deaths_no_money": dnm,
                    "deaths_no_offer": dno,
                    "transactions": txn,
                }
            )
    return collect_records(state, max_steps)


def collect_records(state: SimState, max_steps: int) -> list[SurvivalRecord]:
    """Per-vertex outcomes; still-alive vertices are censored at max_steps."""
    records = []
    degrees = state.graph.degrees
    for v in range(state.n):
        if state.alive[v]:
            lifetime, cause = max_steps, CENSORED
        else:
            lifetime = int(state.death_time[v])
            cause = _CAUSE_LABELS[int(state._cause[v])]
        records.append(
            SurvivalRecord(
                vertex=v,
                degree=int(degrees[v]),
                lifetime=lifetime,
                cause=cause,
                saves=int(state.saves[v]),
            )
        )
    return records
