import json
import math
from itertools import permutations

import numpy as np
import pytest

from reqoffer import graphgen as gg

# Reference values computed with mpmath (mp.zeta(x, a) at 30 digits) and
# scipy.stats.poisson, frozen before the implementation was written.
ZETA_22_2 = 0.490543256506893
ZETA_12_2 = 4.59158244117775
ZETA_22_3 = 0.272905615682862
TAIL_SF_SPLIT10 = 0.113853331074425
TAIL_POISSON_936_SPLIT10 = 0.459912407669349
P2_EXACT = 0.443666563421554  # 2^-2.2 / zeta(2.2, 2)


# ---------------------------------------------------------------------------
# hurwitz zeta


def test_zeta_at_integer_point_matches_basel_value():
    assert gg.hurwitz_zeta(2.0, 1.0) == pytest.approx(math.pi**2 / 6, rel=1e-10)


def test_zeta_frozen_reference_values():
    assert gg.hurwitz_zeta(2.2, 2.0) == pytest.approx(ZETA_22_2, rel=1e-10)
    assert gg.hurwitz_zeta(1.2, 2.0) == pytest.approx(ZETA_12_2, rel=1e-10)


def test_zeta_mean_degree_ratio():
    ratio = gg.hurwitz_zeta(1.2, 2.0) / gg.hurwitz_zeta(2.2, 2.0)
    assert abs(ratio - 9.36) < 0.01


def test_zeta_shift_identity():
    # zeta(x, a) - a^-x == zeta(x, a + 1)
    for x, a in [(2.2, 2.0), (1.5, 1.0), (3.7, 0.5), (2.01, 7.0)]:
        lhs = gg.hurwitz_zeta(x, a) - a ** (-x)
        assert lhs == pytest.approx(gg.hurwitz_zeta(x, a + 1.0), rel=1e-10)
    assert gg.hurwitz_zeta(2.2, 2.0) - 2.0**-2.2 == pytest.approx(ZETA_22_3, rel=1e-10)


def test_zeta_domain_errors():
    with pytest.raises(ValueError):
        gg.hurwitz_zeta(1.0, 2.0)
    with pytest.raises(ValueError):
        gg.hurwitz_zeta(0.8, 2.0)
    with pytest.raises(ValueError):
        gg.hurwitz_zeta(2.2, 0.0)
    with pytest.raises(ValueError):
        gg.hurwitz_zeta(2.2, -1.0)


# ---------------------------------------------------------------------------
# power-law degree sampling


@pytest.fixture(scope="module")
def powerlaw_draws():
    rng = np.random.default_rng(42)
    return gg.sample_powerlaw_degrees(1_000_000, 2.2, 2, rng)


def test_powerlaw_respects_lower_cutoff(powerlaw_draws):
    assert powerlaw_draws.min() >= 2


def test_powerlaw_sum_is_even(powerlaw_draws):
    assert powerlaw_draws.sum() % 2 == 0


def test_powerlaw_mass_at_cutoff(powerlaw_draws):
    p2 = np.mean(powerlaw_draws == 2)
    assert abs(p2 - P2_EXACT) < 0.005


def test_powerlaw_tail_fraction(powerlaw_draws):
    assert abs(np.mean(powerlaw_draws >= 10) - 0.11) < 0.01


def test_powerlaw_ks_distance(powerlaw_draws):
    # Kolmogorov-Smirnov distance between the empirical CDF and the exact
    # discrete CDF, evaluated over the observed support.
    k_max = int(powerlaw_draws.max())
    ks = np.arange(2, k_max + 1, dtype=np.float64)
    pmf = ks**-2.2 / gg.hurwitz_zeta(2.2, 2.0)
    cdf = np.cumsum(pmf)
    counts = np.bincount(powerlaw_draws, minlength=k_max + 1)[2:]
    ecdf = np.cumsum(counts) / len(powerlaw_draws)
    assert np.max(np.abs(ecdf - cdf)) < 0.005


def test_powerlaw_deterministic_given_seed():
    a = gg.sample_powerlaw_degrees(500, 2.2, 2, np.random.default_rng(7))
    b = gg.sample_powerlaw_degrees(500, 2.2, 2, np.random.default_rng(7))
    assert np.array_equal(a, b)


def test_powerlaw_domain_errors():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        gg.sample_powerlaw_degrees(10, 1.0, 2, rng)
    with pytest.raises(ValueError):
        gg.sample_powerlaw_degrees(10, 2.2, 0, rng)
    with pytest.raises(ValueError):
        gg.sample_powerlaw_degrees(0, 2.2, 2, rng)


# ---------------------------------------------------------------------------
# poisson degree sampling


def test_poisson_moments_and_tail():
    rng = np.random.default_rng(11)
    d = gg.sample_poisson_degrees(1_000_000, 9.36, rng)
    assert d.sum() % 2 == 0
    assert np.mean(d) == pytest.approx(9.36, abs=0.02)
    assert np.mean(d >= 10) == pytest.approx(0.46, abs=0.01)


def test_poisson_tiny_mean_gives_all_zero_degrees():
    rng = np.random.default_rng(3)
    d = gg.sample_poisson_degrees(10_000, 1e-12, rng)
    assert not d.any()


def test_poisson_domain_error():
    with pytest.raises(ValueError):
        gg.sample_poisson_degrees(10, 0.0, np.random.default_rng(0))


# ---------------------------------------------------------------------------
# configuration model


def test_two_vertices_one_stub_each_gives_single_edge():
    g = gg.build_configuration_model([1, 1], np.random.default_rng(0))
    assert g.n == 2
    assert g.edge_u.tolist() == [0]
    assert g.edge_v.tolist() == [1]
    assert g.edge_mult.tolist() == [1]
    assert g.degrees.tolist() == [1, 1]


def test_single_vertex_degree_two_gives_self_loop():
    g = gg.build_configuration_model([2], np.random.default_rng(0))
    assert (g.edge_u.tolist(), g.edge_v.tolist(), g.edge_mult.tolist()) == ([0], [0], [1])
    assert g.degrees.tolist() == [2]


def _pairing_outcome(stubs):
    # classify one stub pairing of the [2, 2] sequence
    pairs = {tuple(sorted(stubs[i : i + 2])) for i in (0, 2)}
    return "loops" if (0, 0) in pairs else "double"


def test_two_two_sequence_matches_exhaustive_enumeration():
    # Brute-force oracle: all 4! orderings of the stub list [0,0,1,1],
    # paired consecutively. 8 of 24 give two self-loops, 16 a double edge.
    outcomes = [_pairing_outcome(p) for p in permutations([0, 0, 1, 1])]
    p_loops = outcomes.count("loops") / len(outcomes)
    assert p_loops == pytest.approx(1 / 3)

    rng = np.random.default_rng(99)
    hits = 0
    trials = 10_000
    for _ in range(trials):
        g = gg.build_configuration_model([2, 2], rng)
        if len(g.edge_u) == 2:  # two self-loops
            hits += 1
        else:
            assert g.edge_mult.tolist() == [2]
    assert hits / trials == pytest.approx(1 / 3, abs=0.02)


def test_degrees_match_prescribed_sequence():
    rng = np.random.default_rng(5)
    for seed in range(5):
        seq = gg.sample_powerlaw_degrees(300, 2.2, 2, np.random.default_rng(seed))
        g = gg.build_configuration_model(seq, rng)
        assert np.array_equal(g.degrees, seq)
        assert g.total_edges * 2 == seq.sum()


def test_incidence_index_consistent_with_edge_list():
    seq = gg.sample_poisson_degrees(200, 5.0, np.random.default_rng(8))
    g = gg.build_configuration_model(seq, np.random.default_rng(8))
    rebuilt = gg.Multigraph.from_edges(g.n, g.edge_u, g.edge_v, g.edge_mult)
    assert np.array_equal(rebuilt.indptr, g.indptr)
    assert np.array_equal(rebuilt.nbr, g.nbr)
    assert np.array_equal(rebuilt.nbr_mult, g.nbr_mult)
    # degree identity: multiplicity once per endpoint, twice for loops
    for v in range(g.n):
        nbrs, mults = g.neighbors(v)
        k = sum(2 * m if w == v else m for w, m in zip(nbrs, mults))
        assert k == g.degrees[v]


def test_configuration_model_deterministic_given_seed():
    seq = [3, 2, 2, 1, 4, 2]
    a = gg.build_configuration_model(seq, np.random.default_rng(13))
    b = gg.build_configuration_model(seq, np.random.default_rng(13))
    assert np.array_equal(a.edge_u, b.edge_u)
    assert np.array_equal(a.edge_v, b.edge_v)
    assert np.array_equal(a.edge_mult, b.edge_mult)


def test_odd_degree_sum_rejected():
    with pytest.raises(ValueError):
        gg.build_configuration_model([1, 1, 1], np.random.default_rng(0))


# ---------------------------------------------------------------------------
# analytic tail fractions


def test_tail_fraction_scale_free():
    cfg = gg.TopologyConfig("scale-free", n=1000, alpha=2.2, k_min=2)
    f_low, f_high = gg.analytic_tail_fraction(cfg, 10)
    assert f_high == pytest.approx(TAIL_SF_SPLIT10, rel=1e-9)
    assert f_low + f_high == 1.0
    assert abs(f_high - 0.11) < 0.005


def test_tail_fraction_poisson():
    cfg = gg.TopologyConfig("poisson", n=1000, lam=9.36)
    f_low, f_high = gg.analytic_tail_fraction(cfg, 10)
    assert f_high == pytest.approx(TAIL_POISSON_936_SPLIT10, rel=1e-9)
    assert f_low + f_high == 1.0
    assert abs(f_high - 0.46) < 0.005


def test_tail_fraction_split_at_or_below_cutoff_is_all_high():
    cfg = gg.TopologyConfig("scale-free", n=10, alpha=2.2, k_min=2)
    assert gg.analytic_tail_fraction(cfg, 2) == (0.0, 1.0)
    assert gg.analytic_tail_fraction(cfg, 1) == (0.0, 1.0)


def test_default_k_split_matches_mean_degree():
    assert gg.default_k_split(gg.TopologyConfig("scale-free", n=10)) == 10
    assert gg.default_k_split(gg.TopologyConfig("poisson", n=10, lam=9.36)) == 10
    assert gg.default_k_split(gg.TopologyConfig("poisson", n=10, lam=4.0)) == 5


# ---------------------------------------------------------------------------
# graph file round-trip


def test_graph_json_round_trip(tmp_path):
    g = gg.build_graph(gg.TopologyConfig("scale-free", n=120), np.random.default_rng(2))
    path = tmp_path / "g.json"
    gg.save_graph(g, str(path))
    payload = json.loads(path.read_text())
    assert set(payload) == {"n", "edges"}
    loaded = gg.load_graph(str(path))
    assert loaded.n == g.n
    assert np.array_equal(loaded.edge_u, g.edge_u)
    assert np.array_equal(loaded.edge_v, g.edge_v)
    assert np.array_equal(loaded.edge_mult, g.edge_mult)
    assert np.array_equal(loaded.degrees, g.degrees)


def test_load_graph_rejects_malformed_payload(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 3}')
    with pytest.raises(ValueError):
        gg.load_graph(str(bad))
    bad.write_text('{"n": 2, "edges": [[0, 1, 1], [0, 1, 2]]}')
    with pytest.raises(ValueError):
        gg.load_graph(str(bad))
    bad.write_text('{"n": 2, "edges": [[1, 0, 1]]}')
    with pytest.raises(ValueError):
        gg.load_graph(str(bad))
