import math

import numpy as np
import pytest
from scipy import stats

from coupledsir.errors import GraphFormatError, ParameterError
from coupledsir.graphs import (
    Graph,
    LinkSpec,
    couple_random,
    couple_to_hubs,
    gen_barabasi_albert,
    gen_barabasi_albert_edges,
    gen_erdos_renyi,
    gen_erdos_renyi_gnm,
    gen_watts_strogatz,
    load_graph,
    load_layered_network,
    save_graph,
    save_layered_network,
    sample_without_replacement,
)


def complete_graph(n):
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def check_graph_invariants(g):
    assert int(g.degrees.sum()) == 2 * g.edge_count
    assert np.all(g.edges[:, 0] < g.edges[:, 1])
    assert len(g.edge_set()) == g.edge_count
    for v in range(min(g.n, 20)):
        nbrs = g.neighbors(v)
        assert np.all(np.diff(nbrs) > 0)  # sorted, no duplicates
        assert v not in nbrs


class TestGraphType:
    def test_rejects_self_loop(self):
        with pytest.raises(ParameterError):
            Graph(3, [(1, 1)])

    def test_rejects_duplicate(self):
        with pytest.raises(ParameterError):
            Graph(3, [(0, 1), (1, 0)])

    def test_rejects_out_of_range(self):
        with pytest.raises(ParameterError):
            Graph(3, [(0, 3)])

    def test_symmetry_of_neighbor_lists(self):
        g = Graph(4, [(0, 1), (1, 2), (0, 3)])
        for u, v in g.edges:
            assert u in g.neighbors(v) and v in g.neighbors(u)


class TestErdosRenyi:
    def test_zero_probability(self):
        g = gen_erdos_renyi(5, 0.0, seed=1)
        assert g.edge_count == 0

    def test_probability_one_is_complete(self):
        g = gen_erdos_renyi(5, 1.0, seed=1)
        assert g.edge_count == 10
        assert g.edge_set() == complete_graph(5).edge_set()

    def test_paper_scale_expected_count(self):
        # n=500, p=0.02: mean 2495, sd = sqrt(2495*0.98) ~ 49.4
        g = gen_erdos_renyi(500, 0.02, seed=42)
        pairs = 500 * 499 // 2
        mean = 0.02 * pairs
        sd = math.sqrt(pairs * 0.02 * 0.98)
        assert abs(g.edge_count - mean) < 4 * sd
        check_graph_invariants(g)

    def test_invalid_probability(self):
        with pytest.raises(ParameterError):
            gen_erdos_renyi(10, 1.5, seed=0)


class TestGnm:
    def test_paper_instance_edge_count(self):
        g = gen_erdos_renyi_gnm(1000, 3255, seed=7)
        assert g.edge_count == 3255
        check_graph_invariants(g)

    def test_saturation_is_complete(self):
        g = gen_erdos_renyi_gnm(4, 6, seed=3)
        assert g.edge_set() == complete_graph(4).edge_set()

    def test_zero_edges(self):
        assert gen_erdos_renyi_gnm(10, 0, seed=3).edge_count == 0

    def test_too_many_edges(self):
        with pytest.raises(ParameterError):
            gen_erdos_renyi_gnm(4, 7, seed=0)


class TestWattsStrogatz:
    def test_paper_edge_count(self):
        g = gen_watts_strogatz(500, 20, 0.2, seed=5)
        assert g.edge_count == 5000
        check_graph_invariants(g)

    def test_no_rewiring_is_ring_lattice(self):
        g = gen_watts_strogatz(100, 4, 0.0, seed=5)
        assert g.edge_count == 200
        assert np.all(g.degrees == 4)
        assert set(g.neighbors(0)) == {1, 2, 98, 99}

    def test_rewired_degrees_vary(self):
        g = gen_watts_strogatz(100, 4, 0.1, seed=5)
        assert g.edge_count == 200
        assert g.degrees.min() < 4 or g.degrees.max() > 4

    def test_edge_count_preserved_for_all_rewire_levels(self):
        for p in (0.0, 0.3, 0.7, 1.0):
            g = gen_watts_strogatz(60, 6, p, seed=9)
            assert g.edge_count == 180
            check_graph_invariants(g)

    def test_odd_degree_rejected(self):
        with pytest.raises(ParameterError):
            gen_watts_strogatz(10, 3, 0.1, seed=0)

    def test_degree_not_below_n(self):
        with pytest.raises(ParameterError):
            gen_watts_strogatz(10, 10, 0.1, seed=0)


class TestBarabasiAlbert:
    def test_edge_count_formula(self):
        # clique C(4,2) + 996 * 3 attachments
        g = gen_barabasi_albert(1000, 3, seed=2)
        assert g.edge_count == 6 + 996 * 3
        check_graph_invariants(g)

    def test_seed_clique_boundary_rejected(self):
        with pytest.raises(ParameterError):
            gen_barabasi_albert(5, 4, seed=0)

    def test_heavy_tail_over_seeds(self):
        # brute force: the hub should dominate the mean degree by >= 5x
        for seed in range(100):
            g = gen_barabasi_albert(1000, 3, seed=seed)
            assert g.degrees.max() >= 5 * g.degrees.mean()

    def test_exact_edge_count_mode(self):
        g = gen_barabasi_albert_edges(1000, 2957, seed=4)
        assert g.edge_count == 2957
        check_graph_invariants(g)

    def test_edge_count_mode_rejects_more_than_generated(self):
        with pytest.raises(ParameterError):
            gen_barabasi_albert_edges(100, 10_000, seed=4)


class TestCoupling:
    def test_probability_mode_within_4_sigma(self):
        g1 = gen_erdos_renyi(500, 0.01, seed=1)
        g2 = gen_erdos_renyi(100, 0.05, seed=2)
        net = couple_random(g1, g2, LinkSpec(probability=0.2), seed=3)
        mean = 0.2 * 500 * 100
        sd = math.sqrt(500 * 100 * 0.2 * 0.8)
        assert abs(net.interlink_count - mean) < 4 * sd

    def test_zero_count(self):
        g1 = gen_erdos_renyi(20, 0.2, seed=1)
        g2 = gen_erdos_renyi(10, 0.2, seed=2)
        net = couple_random(g1, g2, LinkSpec(count=0), seed=3)
        assert net.interlink_count == 0

    def test_fraction_paper_count(self):
        g1 = gen_erdos_renyi_gnm(1000, 3255, seed=1)
        g2 = gen_erdos_renyi_gnm(1000, 3255, seed=2)
        net = couple_random(g1, g2, LinkSpec(fraction=0.00135), seed=3)
        assert net.interlink_count == 1350

    def test_probability_mode_chi_square_over_seeds(self):
        # counts over 100 seeds behave like Binomial(n1*n2, omega)
        g1 = Graph(40, [])
        g2 = Graph(25, [])
        n_pairs, omega = 1000, 0.3
        counts = np.array([
            couple_random(g1, g2, LinkSpec(probability=omega), seed=s).interlink_count
            for s in range(100)
        ])
        var = n_pairs * omega * (1 - omega)
        statistic = float(((counts - n_pairs * omega) ** 2 / var).sum())
        lo, hi = stats.chi2.ppf([0.0005, 0.9995], df=100)
        assert lo < statistic < hi

    def test_a21_is_a12_transposed(self):
        g1 = gen_erdos_renyi(30, 0.1, seed=1)
        g2 = gen_erdos_renyi(20, 0.1, seed=2)
        net = couple_random(g1, g2, LinkSpec(probability=0.15), seed=3)
        a12 = net.a12().toarray()
        for u, w in net.interlinks:
            assert a12[u, w] == 1.0
        assert a12.sum() == net.interlink_count

    def test_linkspec_requires_one_mode(self):
        with pytest.raises(ParameterError):
            LinkSpec()
        with pytest.raises(ParameterError):
            LinkSpec(probability=0.1, count=3)
        with pytest.raises(ParameterError):
            LinkSpec(probability=1.5)


class TestHubCoupling:
    def setup_method(self):
        self.g1 = gen_erdos_renyi(200, 0.05, seed=1)
        self.g2 = gen_barabasi_albert(100, 2, seed=2)

    def hub_counts(self, net):
        counts = {}
        for _, w in net.interlinks:
            counts[int(w)] = counts.get(int(w), 0) + 1
        return counts

    def test_equal_split(self):
        net = couple_to_hubs(self.g1, self.g2, 180, 5, seed=3)
        assert sorted(self.hub_counts(net).values()) == [36] * 5

    def test_remainder_distribution(self):
        net = couple_to_hubs(self.g1, self.g2, 7, 5, seed=3)
        assert sorted(self.hub_counts(net).values(), reverse=True) == [2, 2, 1, 1, 1]

    def test_zero_links(self):
        net = couple_to_hubs(self.g1, self.g2, 0, 5, seed=3)
        assert net.interlink_count == 0

    def test_endpoints_are_exactly_the_hub_set(self):
        net = couple_to_hubs(self.g1, self.g2, 60, 5, seed=3)
        degrees = self.g2.degrees
        order = np.lexsort((np.arange(self.g2.n), -degrees))
        expected_hubs = set(int(h) for h in order[:5])
        assert set(int(w) for _, w in net.interlinks) == expected_hubs

    def test_capacity_error(self):
        with pytest.raises(ParameterError):
            couple_to_hubs(self.g1, self.g2, 5 * 200 + 1, 5, seed=3)


class TestDeterminism:
    def test_generators_reproducible(self):
        makers = [
            lambda s: gen_erdos_renyi(60, 0.1, s),
            lambda s: gen_erdos_renyi_gnm(60, 100, s),
            lambda s: gen_watts_strogatz(60, 6, 0.3, s),
            lambda s: gen_barabasi_albert(60, 3, s),
            lambda s: gen_barabasi_albert_edges(60, 150, s),
        ]
        for make in makers:
            assert make(1234) == make(1234)
            check_graph_invariants(make(1234))

    def test_couplings_reproducible(self):
        g1 = gen_erdos_renyi(30, 0.1, seed=1)
        g2 = gen_erdos_renyi(20, 0.1, seed=2)
        for spec in (LinkSpec(probability=0.2), LinkSpec(count=17), LinkSpec(fraction=0.05)):
            a = couple_random(g1, g2, spec, seed=9)
            b = couple_random(g1, g2, spec, seed=9)
            assert np.array_equal(a.interlinks, b.interlinks)
        a = couple_to_hubs(g1, g2, 11, 3, seed=9)
        b = couple_to_hubs(g1, g2, 11, 3, seed=9)
        assert np.array_equal(a.interlinks, b.interlinks)

    def test_sample_without_replacement_uniformity(self):
        rng = np.random.default_rng(0)
        hits = np.zeros(10)
        for _ in range(2000):
            hits[sample_without_replacement(rng, 10, 3)] += 1
        # each element expected 600 times; loose 5-sigma band
        sd = math.sqrt(2000 * 0.3 * 0.7)
        assert np.all(np.abs(hits - 600) < 5 * sd)


class TestIo:
    def test_round_trip(self, tmp_path):
        g = complete_graph(5)
        path = tmp_path / "k5.edges"
        save_graph(g, path)
        assert load_graph(path) == g

    def test_self_loop_reports_line(self, tmp_path):
        path = tmp_path / "bad.edges"
        path.write_text("3 3\n")
        with pytest.raises(GraphFormatError) as err:
            load_graph(path)
        assert err.value.line_number == 1

    def test_header_only_gives_isolated_nodes(self, tmp_path):
        path = tmp_path / "empty.edges"
        path.write_text("# n=10\n")
        g = load_graph(path)
        assert g.n == 10 and g.edge_count == 0

    def test_malformed_line_number(self, tmp_path):
        path = tmp_path / "bad.edges"
        path.write_text("0 1\n1 2 3\n")
        with pytest.raises(GraphFormatError) as err:
            load_graph(path)
        assert err.value.line_number == 2

    def test_layered_round_trip(self, tmp_path):
        g1 = gen_erdos_renyi(12, 0.3, seed=1)
        g2 = gen_erdos_renyi(8, 0.3, seed=2)
        net = couple_random(g1, g2, LinkSpec(count=10), seed=3)
        save_layered_network(net, tmp_path / "net")
        assert load_layered_network(tmp_path / "net") == net
