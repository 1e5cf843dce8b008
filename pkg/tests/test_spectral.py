import numpy as np
import pytest

from coupledsir.errors import ConvergenceError, ParameterError, SupercriticalLayerError
from coupledsir.graphs import Graph, LayeredNetwork, LinkSpec, couple_random, gen_erdos_renyi
from coupledsir.params import EpidemicParams
from coupledsir.spectral import (
    block_spectral_radius,
    build_ht_operator,
    epidemic_threshold,
    jacobian_leading_eigenvalue,
    layer_spectral_radius,
    spectral_radius,
    threshold_curve,
)


def cycle_graph(n):
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n):
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def dense_block_matrix(net, t11, t12, t21, t22):
    a11 = net.a11().toarray()
    a22 = net.a22().toarray()
    a12 = net.a12().toarray()
    top = np.hstack([t11 * a11, t12 * a12])
    bottom = np.hstack([t21 * a12.T, t22 * a22])
    return np.vstack([top, bottom])


def dense_ht_matrix(net, tau22, alpha):
    a11 = net.a11().toarray()
    a22 = net.a22().toarray()
    a12 = net.a12().toarray()
    inv = np.linalg.inv(np.eye(net.n2) - tau22 * a22)
    return a11 + (tau22 / alpha**2) * (a12 @ inv @ a12.T)


def random_layered_instance(rng):
    """Small connected-ish two-layer instance for oracle comparisons."""
    while True:
        n1 = int(rng.integers(5, 40))
        n2 = int(rng.integers(5, min(25, 60 - n1)))
        g1 = gen_erdos_renyi(n1, 0.25, seed=int(rng.integers(1 << 30)))
        g2 = gen_erdos_renyi(n2, 0.3, seed=int(rng.integers(1 << 30)))
        if g1.edge_count == 0 or g2.edge_count == 0:
            continue
        net = couple_random(
            g1, g2, LinkSpec(probability=0.15), seed=int(rng.integers(1 << 30))
        )
        if net.interlink_count > 0:
            return net


class TestPowerIteration:
    def test_complete_graph(self):
        rho, v = spectral_radius(complete_graph(5).adjacency().dot, 5)
        assert rho == pytest.approx(4.0, abs=1e-9)

    def test_cycle_is_bipartite_but_converges(self):
        rho, _ = spectral_radius(cycle_graph(8).adjacency().dot, 8)
        assert rho == pytest.approx(2.0, abs=1e-9)

    def test_star_matches_dense_eigensolver(self):
        star = Graph(11, [(0, i) for i in range(1, 11)])
        rho, _ = spectral_radius(star.adjacency().dot, 11)
        dense = np.max(np.abs(np.linalg.eigvals(star.adjacency().toarray())))
        assert rho == pytest.approx(dense, rel=1e-9)

    def test_zero_operator(self):
        rho, v = spectral_radius(lambda x: np.zeros_like(x), 4)
        assert rho == 0.0
        assert np.linalg.norm(v) == pytest.approx(1.0)

    def test_perron_vector_positive(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            g = gen_erdos_renyi(25, 0.3, seed=int(rng.integers(1 << 30)))
            if g.edge_count == 0:
                continue
            _, v = spectral_radius(g.adjacency().dot, g.n)
            # entrywise positive on nodes with any connectivity
            assert np.all(v[g.degrees > 0] > 0)

    def test_nonconvergence_reports_residual(self):
        nilpotent = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(ConvergenceError) as err:
            spectral_radius(lambda x: nilpotent @ x, 2, max_iter=50)
        assert err.value.residual is not None


class TestHtOperator:
    def test_no_interlinks_reduces_to_a11(self):
        g1 = gen_erdos_renyi(12, 0.3, seed=1)
        g2 = gen_erdos_renyi(8, 0.3, seed=2)
        net = LayeredNetwork(g1, g2, [])
        op = build_ht_operator(net, 0.2, 1.0)
        a11 = net.a11()
        for k in range(g1.n):
            e = np.zeros(g1.n)
            e[k] = 1.0
            assert np.array_equal(op(e), a11 @ e)

    def test_tau22_zero_reduces_to_a11(self):
        g1 = gen_erdos_renyi(12, 0.3, seed=1)
        g2 = gen_erdos_renyi(8, 0.3, seed=2)
        net = couple_random(g1, g2, LinkSpec(count=6), seed=3)
        op = build_ht_operator(net, 0.0, 1.0)
        a11 = net.a11()
        v = np.ones(g1.n)
        assert np.array_equal(op(v), a11 @ v)

    def test_two_plus_two_matches_explicit_inversion(self):
        net = LayeredNetwork(Graph(2, [(0, 1)]), Graph(2, [(0, 1)]), [(0, 0)])
        op = build_ht_operator(net, 0.3, 1.0)
        dense = dense_ht_matrix(net, 0.3, 1.0)
        for k in range(2):
            e = np.zeros(2)
            e[k] = 1.0
            assert op(e) == pytest.approx(dense @ e, abs=1e-12)

    def test_supercritical_layer2_rejected(self):
        net = LayeredNetwork(Graph(2, [(0, 1)]), complete_graph(4), [(0, 0)])
        # lambda(K4) = 3, so tau22 = 0.4 gives tau22*lambda > 1
        with pytest.raises(SupercriticalLayerError):
            build_ht_operator(net, 0.4, 1.0)

    def test_matrix_free_matches_dense_small_instances(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            net = random_layered_instance(rng)
            lam2 = layer_spectral_radius(net.layer2)
            tau22 = 0.5 / lam2
            alpha = float(rng.uniform(0.5, 2.0))
            op = build_ht_operator(net, tau22, alpha)
            dense = dense_ht_matrix(net, tau22, alpha)
            v = rng.random(net.n1)
            assert np.linalg.norm(op(v) - dense @ v) <= 1e-8 * max(np.linalg.norm(dense @ v), 1.0)


class TestEpidemicThreshold:
    def test_isolated_layer_threshold(self):
        g1 = gen_erdos_renyi(15, 0.3, seed=1)
        g2 = gen_erdos_renyi(10, 0.3, seed=2)
        net = LayeredNetwork(g1, g2, [])
        lam2 = layer_spectral_radius(g2)
        t = epidemic_threshold(net, 0.5 / lam2, 1.0)
        assert t == pytest.approx(1.0 / layer_spectral_radius(g1), rel=1e-9)

    def test_tau22_zero_threshold(self):
        g1 = gen_erdos_renyi(15, 0.3, seed=1)
        g2 = gen_erdos_renyi(10, 0.3, seed=2)
        net = couple_random(g1, g2, LinkSpec(count=8), seed=3)
        t = epidemic_threshold(net, 0.0, 1.0)
        assert t == pytest.approx(1.0 / layer_spectral_radius(g1), rel=1e-9)

    def test_two_plus_two_against_block_bisection_oracle(self):
        net = LayeredNetwork(Graph(2, [(0, 1)]), Graph(2, [(0, 1)]), [(0, 0)])
        tau22, alpha = 0.3, 1.0
        t11c = epidemic_threshold(net, tau22, alpha)

        def block_rho(t11):
            cross = np.sqrt(t11 * tau22) / alpha
            m = dense_block_matrix(net, t11, cross, cross, tau22)
            return np.max(np.abs(np.linalg.eigvals(m)))

        lo, hi = 1e-6, 10.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if block_rho(mid) < 1.0:
                lo = mid
            else:
                hi = mid
        assert t11c == pytest.approx(0.5 * (lo + hi), abs=1e-8)

    def test_bound_by_isolated_threshold(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            net = random_layered_instance(rng)
            lam1 = layer_spectral_radius(net.layer1)
            lam2 = layer_spectral_radius(net.layer2)
            t = epidemic_threshold(net, 0.4 / lam2, 1.0)
            assert 0.0 < t <= 1.0 / lam1 + 1e-12

    def test_monotone_in_tau22_alpha_and_links(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            net = random_layered_instance(rng)
            lam2 = layer_spectral_radius(net.layer2)
            taus = [0.1 / lam2, 0.4 / lam2, 0.7 / lam2]
            values = [epidemic_threshold(net, t, 1.0) for t in taus]
            assert values[0] >= values[1] >= values[2]
            # larger alpha weakens the cross rates (beta12*beta21 =
            # beta11*beta22/alpha^2), pushing the threshold back up
            alphas = [0.5, 1.0, 2.0]
            values = [epidemic_threshold(net, 0.4 / lam2, a) for a in alphas]
            assert values[0] <= values[1] <= values[2]
            # adding inter-links can only lower the threshold
            extra = couple_random(
                net.layer1, net.layer2, LinkSpec(probability=0.4), seed=123
            )
            merged = set(map(tuple, net.interlinks.tolist())) | set(
                map(tuple, extra.interlinks.tolist())
            )
            denser = LayeredNetwork(net.layer1, net.layer2, sorted(merged))
            assert epidemic_threshold(denser, 0.4 / lam2, 1.0) <= values[1] + 1e-10


class TestBlockSpectralRadius:
    def test_zero_matrix(self):
        net = LayeredNetwork(Graph(2, [(0, 1)]), Graph(2, [(0, 1)]), [(0, 0)])
        assert block_spectral_radius(net, 0, 0, 0, 0) == 0.0

    def test_block_diagonal(self):
        g1 = complete_graph(5)
        g2 = cycle_graph(8)
        net = LayeredNetwork(g1, g2, [(0, 0)])
        rho = block_spectral_radius(net, 0.3, 0.0, 0.0, 0.2)
        assert rho == pytest.approx(max(0.3 * 4.0, 0.2 * 2.0), abs=1e-9)

    def test_self_consistency_on_random_instances(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            net = random_layered_instance(rng)
            lam2 = layer_spectral_radius(net.layer2)
            for _ in range(5):
                tau22 = float(rng.uniform(0.05, 0.9)) / lam2
                alpha = float(rng.uniform(0.5, 2.0))
                t11c = epidemic_threshold(net, tau22, alpha)
                cross = np.sqrt(t11c * tau22) / alpha
                rho = block_spectral_radius(net, t11c, cross, cross, tau22)
                assert rho == pytest.approx(1.0, abs=1e-6)

    def test_spectrum_depends_on_cross_product_only(self):
        rng = np.random.default_rng(19)
        net = random_layered_instance(rng)
        rho_sym = block_spectral_radius(net, 0.1, 0.06, 0.06, 0.2)
        rho_skew = block_spectral_radius(net, 0.1, 0.12, 0.03, 0.2)
        assert rho_sym == pytest.approx(rho_skew, abs=1e-8)


class TestJacobian:
    def test_pure_decay(self):
        net = LayeredNetwork(Graph(2, [(0, 1)]), Graph(2, [(0, 1)]), [(0, 0)])
        params = EpidemicParams(0.0, 0.0, 0.0, 0.0, mu=1.0)
        assert jacobian_leading_eigenvalue(net, params) == pytest.approx(-1.0)

    def test_decoupled_critical_point(self):
        g1 = complete_graph(6)  # lambda = 5
        g2 = cycle_graph(6)
        net = LayeredNetwork(g1, g2, [])
        params = EpidemicParams(0.2, 0.0, 0.0, 0.05, mu=1.0)  # beta11 * 5 = mu
        assert jacobian_leading_eigenvalue(net, params) == pytest.approx(0.0, abs=1e-9)


class TestThresholdCurve:
    def small_pair(self, omega, seed=23):
        g1 = gen_erdos_renyi(40, 0.2, seed=101)
        g2 = gen_erdos_renyi(25, 0.25, seed=102)
        spec = LinkSpec(probability=omega) if omega > 0 else LinkSpec(count=0)
        return couple_random(g1, g2, spec, seed=seed)

    def test_zero_coupling_is_flat_one(self):
        net = self.small_pair(0.0)
        curve = threshold_curve(net, 1.0, [0.0, 0.2, 0.4, 0.6, 0.8])
        for _, tc1 in curve.points:
            assert tc1 == pytest.approx(1.0, abs=1e-9)

    def test_tau2_zero_point_is_one(self):
        net = self.small_pair(0.2)
        curve = threshold_curve(net, 1.0, [0.0, 0.5])
        assert curve.points[0][1] == pytest.approx(1.0, abs=1e-9)

    def test_stronger_coupling_gives_lower_curve(self):
        grid = [0.0, 0.25, 0.5, 0.75]
        strong = threshold_curve(self.small_pair(0.3), 1.0, grid, omega=0.3)
        weak = threshold_curve(self.small_pair(0.05), 1.0, grid, omega=0.05)
        for (_, lo), (_, hi) in zip(strong.points, weak.points):
            assert lo <= hi + 1e-12

    def test_grid_validation(self):
        net = self.small_pair(0.1)
        with pytest.raises(ParameterError):
            threshold_curve(net, 1.0, [0.0, 1.0])
        with pytest.raises(ParameterError):
            threshold_curve(net, 1.0, [0.4, 0.2])

    def test_csv_header(self, tmp_path):
        net = self.small_pair(0.1)
        curve = threshold_curve(net, 1.0, [0.0, 0.3], omega=0.1)
        path = tmp_path / "curve.csv"
        curve.to_csv(path)
        assert path.read_text().splitlines()[0] == "tau2,tau_c1,omega,alpha,lambda1,lambda2"
