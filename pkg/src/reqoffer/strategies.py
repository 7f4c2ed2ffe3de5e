"""Orderings a surplus vertex applies to its eligible requests.

Four strategies are supported. Three are random orderings drawn by
sequential weighted sampling without replacement (draw one, remove it,
renormalize, repeat); the weights differ per strategy. The fourth,
high_to_low, is a deterministic sort.

    random           weight = edge multiplicity
    high_to_low      sort by amount desc, multiplicity desc, requester id asc
    prop_to_req      weight = amount * multiplicity
    prop_to_req_deg  weight = amount * multiplicity / alive_degree^eta

alive_degree is the requester's number of distinct neighbours still alive
at the start of the step, so prop_to_req_deg biases offers toward poorly
connected requesters. eta = 0 makes it identical to prop_to_req.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

STRATEGY_NAMES = ("random", "high_to_low", "prop_to_req", "prop_to_req_deg")
DEFAULT_ETA = 0.6


@dataclass(frozen=True)
class StrategyKind:
    name: str
    eta: float = DEFAULT_ETA

    def __post_init__(self) -> None:
        if self.name not in STRATEGY_NAMES:
            raise ValueError(
                f"unknown strategy {self.name!r}; expected one of {STRATEGY_NAMES}"
            )
        if self.eta < 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")


@dataclass(frozen=True)
class EligibleRequest:
    """One request a surplus vertex can afford to serve."""

    requester: int
    amount: float
    alive_degree: int
    multiplicity: int = 1


def request_weights(requests: list[EligibleRequest], kind: StrategyKind) -> np.ndarray:
    """Sampling weight of each request under a (non-deterministic) strategy."""
    if kind.name == "random":
        return np.array([r.multiplicity for r in requests], dtype=np.float64)
    if kind.name == "prop_to_req":
        return np.array([r.amount * r.multiplicity for r in requests], dtype=np.float64)
    if kind.name == "prop_to_req_deg":
        return np.array(
            [r.amount * r.multiplicity / r.alive_degree**kind.eta for r in requests],
            dtype=np.float64,
        )
    raise ValueError(f"{kind.name} has no sampling weights")


def order_eligible(
    requests: list[EligibleRequest], kind: StrategyKind, rng: np.random.Generator
) -> list[EligibleRequest]:
    """Return the requests in the order the offerer will consider them.

    The result is always a permutation of the input. high_to_low ignores
    the generator entirely; the others consume one uniform draw per
    element.
    """
    if not requests:
        return []
    if kind.name == "high_to_low":
        return sorted(requests, key=lambda r: (-r.amount, -r.multiplicity, r.requester))

    weights = request_weights(requests, kind)
    if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
        raise ValueError("request weights must be positive and finite")
    remaining = list(range(len(requests)))
    ordered: list[EligibleRequest] = []
    while remaining:
        total = sum(weights[i] for i in remaining)
        target = rng.random() * total
        acc = 0.0
        pick = remaining[-1]
        for i in remaining:
            acc += weights[i]
            if acc > target:
                pick = i
                break
        remaining.remove(pick)
        ordered.append(requests[pick])
    return ordered
