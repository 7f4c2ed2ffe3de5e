from collections import Counter

import numpy as np
import pytest

from reqoffer.strategies import (
    STRATEGY_NAMES,
    EligibleRequest,
    StrategyKind,
    order_eligible,
)


def _req(requester, amount, alive_degree=1, multiplicity=1):
    return EligibleRequest(requester, amount, alive_degree, multiplicity)


def test_empty_input_gives_empty_order():
    rng = np.random.default_rng(0)
    for name in STRATEGY_NAMES:
        assert order_eligible([], StrategyKind(name), rng) == []


def test_single_request_returned_unchanged():
    rng = np.random.default_rng(0)
    req = _req(3, 0.7, alive_degree=4, multiplicity=2)
    for name in STRATEGY_NAMES:
        assert order_eligible([req], StrategyKind(name), rng) == [req]


def test_every_strategy_returns_a_permutation():
    rng = np.random.default_rng(17)
    for trial in range(50):
        m = int(rng.integers(1, 9))
        reqs = [
            _req(i, float(rng.uniform(0.05, 3.0)), int(rng.integers(1, 30)), int(rng.integers(1, 4)))
            for i in range(m)
        ]
        for name in STRATEGY_NAMES:
            out = order_eligible(reqs, StrategyKind(name), rng)
            assert Counter(id(r) for r in out) == Counter(id(r) for r in reqs)


def test_high_to_low_sorts_by_amount_then_multiplicity_then_id():
    reqs = [
        _req(0, 0.5),
        _req(1, 0.9),
        _req(2, 0.2),
        _req(3, 0.5, multiplicity=2),
        _req(4, 0.5),
    ]
    out = order_eligible(reqs, StrategyKind("high_to_low"), np.random.default_rng(0))
    assert [r.requester for r in out] == [1, 3, 0, 4, 2]


def test_high_to_low_never_consumes_randomness():
    reqs = [_req(i, float(a)) for i, a in enumerate([0.3, 1.2, 0.8])]
    rng = np.random.default_rng(5)
    before = rng.bit_generator.state
    order_eligible(reqs, StrategyKind("high_to_low"), rng)
    assert rng.bit_generator.state == before


def test_prop_to_req_first_pick_frequency():
    # amounts 1.0 and 3.0: P(first = larger) = 3/4
    reqs = [_req(0, 1.0), _req(1, 3.0)]
    rng = np.random.default_rng(23)
    kind = StrategyKind("prop_to_req")
    hits = sum(
        order_eligible(reqs, kind, rng)[0].requester == 1 for _ in range(100_000)
    )
    assert hits / 100_000 == pytest.approx(0.75, abs=0.01)


def test_prop_to_req_deg_discounts_connected_requesters():
    # equal amounts, alive degrees 1 and 32, eta = 0.6: 32^0.6 = 8 exactly,
    # so the degree-1 requester is drawn first with probability 8/9.
    reqs = [_req(0, 1.0, alive_degree=1), _req(1, 1.0, alive_degree=32)]
    rng = np.random.default_rng(29)
    kind = StrategyKind("prop_to_req_deg", eta=0.6)
    hits = sum(
        order_eligible(reqs, kind, rng)[0].requester == 0 for _ in range(100_000)
    )
    assert hits / 100_000 == pytest.approx(8 / 9, abs=0.01)


def test_random_strategy_weights_by_multiplicity():
    reqs = [_req(0, 2.0, multiplicity=1), _req(1, 0.1, multiplicity=9)]
    rng = np.random.default_rng(31)
    hits = sum(
        order_eligible(reqs, StrategyKind("random"), rng)[0].requester == 1
        for _ in range(100_000)
    )
    assert hits / 100_000 == pytest.approx(0.9, abs=0.01)


def test_prop_to_req_deg_with_eta_zero_matches_prop_to_req():
    reqs = [_req(0, 0.4, alive_degree=2), _req(1, 1.1, alive_degree=40), _req(2, 0.7, alive_degree=9)]
    n = 100_000
    freq = {}
    for name, kind in [
        ("ptr", StrategyKind("prop_to_req")),
        ("ptrd0", StrategyKind("prop_to_req_deg", eta=0.0)),
    ]:
        rng = np.random.default_rng(37)
        counts = Counter(
            tuple(r.requester for r in order_eligible(reqs, kind, rng)) for _ in range(n)
        )
        freq[name] = counts
    for perm in set(freq["ptr"]) | set(freq["ptrd0"]):
        assert freq["ptr"][perm] / n == pytest.approx(freq["ptrd0"][perm] / n, abs=0.01)


def test_scaling_amounts_leaves_weighted_orders_unchanged():
    # doubling every amount scales all weights by the same factor, so the
    # same generator state yields the identical permutation
    reqs = [_req(i, a, alive_degree=d) for i, (a, d) in enumerate([(0.4, 2), (1.1, 7), (0.9, 3), (0.2, 1)])]
    doubled = [_req(r.requester, 2 * r.amount, r.alive_degree, r.multiplicity) for r in reqs]
    for name in ("prop_to_req", "prop_to_req_deg", "random"):
        for seed in range(20):
            a = order_eligible(reqs, StrategyKind(name), np.random.default_rng(seed))
            b = order_eligible(doubled, StrategyKind(name), np.random.default_rng(seed))
            assert [r.requester for r in a] == [r.requester for r in b]


def test_unknown_strategy_rejected():
    with pytest.raises(ValueError):
        StrategyKind("greedy")
    with pytest.raises(ValueError):
        StrategyKind("prop_to_req_deg", eta=-0.1)
