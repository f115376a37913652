import math
import random

import numpy as np
import pytest

from ridesim.hst import (DisconnectedPoint, StreetGraph, TreePoint, frt_embed,
                         graph_metric, grid_street_graph, hst_distance,
                         load_street_graph, nearest_node)
from ridesim.model import GeoPoint


def random_street_graph(rng: random.Random, n=30, extra_edges=12) -> StreetGraph:
    """Connected random graph: a random spanning tree plus chords."""
    nodes = {i: GeoPoint(40.70 + rng.random() * 0.15,
                         -74.02 + rng.random() * 0.1) for i in range(n)}
    edges = []
    for i in range(1, n):
        j = rng.randrange(i)
        edges.append((i, j, rng.uniform(50.0, 400.0)))
    for _ in range(extra_edges):
        i, j = rng.randrange(n), rng.randrange(n)
        if i != j:
            edges.append((i, j, rng.uniform(50.0, 400.0)))
    return StreetGraph(nodes, edges)


class TestGraphMetric:
    def test_adjacent_nodes(self):
        g = StreetGraph({0: GeoPoint(0, 0), 1: GeoPoint(0, 0.001)},
                        [(0, 1, 50.0)])
        d = graph_metric(g, [0, 1])
        assert d[0, 1] == 50.0

    def test_path_sum(self):
        g = StreetGraph({0: GeoPoint(0, 0), 1: GeoPoint(0, 0.001),
                         2: GeoPoint(0, 0.002)},
                        [(0, 1, 50.0), (1, 2, 70.0)])
        d = graph_metric(g, [0, 1, 2])
        assert d[0, 2] == 120.0
        assert np.allclose(d, d.T)
        assert np.all(np.diag(d) == 0)

    def test_disconnected_raises(self):
        g = StreetGraph({0: GeoPoint(0, 0), 1: GeoPoint(0, 0.001),
                         2: GeoPoint(0, 0.002)},
                        [(0, 1, 50.0)])
        with pytest.raises(DisconnectedPoint):
            graph_metric(g, [0, 2])

    def test_metric_dominates_direct_edges(self):
        rng = random.Random(5)
        g = random_street_graph(rng)
        ids = sorted(g.nodes)
        d = graph_metric(g, ids)
        for u, v, length in g.edges:
            assert d[ids.index(u), ids.index(v)] <= length + 1e-9


class TestFrtEmbed:
    def test_single_point(self):
        tree = frt_embed(np.zeros((1, 1)), sigma=4, seed=0)
        assert len(tree.leaf_of_point) == 1
        assert hst_distance(tree, tree.leaf_of_point[0], tree.leaf_of_point[0]) == 0

    def test_two_points_dominance_every_seed(self):
        d = 137.0
        metric = np.array([[0.0, d], [d, 0.0]])
        for seed in range(100):
            tree = frt_embed(metric, sigma=4, seed=seed)
            dt = hst_distance(tree, tree.leaf_of_point[0], tree.leaf_of_point[1])
            assert dt >= d - 1e-9

    def test_duplicate_points_rejected(self):
        metric = np.array([[0.0, 0.0], [0.0, 0.0]])
        with pytest.raises(ValueError):
            frt_embed(metric, sigma=4, seed=0)

    def test_sigma_below_two_rejected(self):
        with pytest.raises(ValueError):
            frt_embed(np.zeros((1, 1)), sigma=1.5, seed=0)

    def test_deterministic_per_seed(self):
        rng = random.Random(6)
        g = random_street_graph(rng, n=15)
        metric = graph_metric(g, sorted(g.nodes))
        t1 = frt_embed(metric, sigma=4, seed=99)
        t2 = frt_embed(metric, sigma=4, seed=99)
        assert t1.parent == t2.parent
        assert t1.level == t2.level
        assert t1.leaf_of_point == t2.leaf_of_point

    def test_dominance_and_separation_random_graph(self):
        rng = random.Random(7)
        g = random_street_graph(rng)
        ids = sorted(g.nodes)
        metric = graph_metric(g, ids)
        n = len(ids)
        for seed in range(20):
            tree = frt_embed(metric, sigma=4, seed=seed)
            # leaf bijection
            assert sorted(tree.leaf_of_point) == list(range(n))
            # every parent-child edge drops exactly one level
            for node in range(1, tree.n_nodes):
                p = tree.parent[node]
                assert tree.level[node] == tree.level[p] - 1
                if tree.parent[p] >= 0:
                    assert tree.edge_len(node) * tree.sigma == pytest.approx(
                        tree.edge_len(p), rel=1e-12)
            # dominance over all pairs
            for i in range(n):
                for j in range(i + 1, n):
                    dt = hst_distance(tree, tree.leaf_of_point[i],
                                      tree.leaf_of_point[j])
                    assert dt >= metric[i, j] - 1e-6

    def test_distortion_reported_and_bounded(self):
        # mean stretch over seeds stays within a loose multiple of the
        # sigma * log_sigma(n) guidance; informative, not a proof
        rng = random.Random(8)
        g = random_street_graph(rng, n=20)
        ids = sorted(g.nodes)
        metric = graph_metric(g, ids)
        n = len(ids)
        stretch_sum = np.zeros((n, n))
        seeds = 32
        for seed in range(seeds):
            tree = frt_embed(metric, sigma=4, seed=seed)
            for i in range(n):
                for j in range(i + 1, n):
                    dt = hst_distance(tree, tree.leaf_of_point[i],
                                      tree.leaf_of_point[j])
                    stretch_sum[i, j] += dt / metric[i, j]
        mean_stretch = stretch_sum[np.triu_indices(n, 1)] / seeds
        assert np.isfinite(mean_stretch).all()
        bound = 4.0 * 4.0 * math.log(n, 4.0)
        frac_over = float((mean_stretch > bound).mean())
        assert frac_over < 0.25  # flag-level check, not a hard guarantee


class TestTreeMechanics:
    def _tree(self, seed=3):
        rng = random.Random(seed)
        g = random_street_graph(rng, n=12)
        ids = sorted(g.nodes)
        metric = graph_metric(g, ids)
        return frt_embed(metric, sigma=4, seed=seed)

    def test_hst_distance_symmetric(self):
        tree = self._tree()
        leaves = sorted(tree.point_of_leaf)
        for u in leaves[:6]:
            for v in leaves[:6]:
                assert hst_distance(tree, u, v) == pytest.approx(
                    hst_distance(tree, v, u))

    def test_sibling_distance_is_twice_child_edge(self):
        tree = self._tree()
        for node in range(tree.n_nodes):
            kids = tree.children[node]
            if len(kids) >= 2:
                a, b = kids[0], kids[1]
                assert tree.node_dist(a, b) == pytest.approx(
                    tree.edge_len(a) + tree.edge_len(b), rel=1e-12)
                return
        pytest.skip("no branching node in this tree")

    def test_advance_conserves_distance(self):
        tree = self._tree()
        leaves = sorted(tree.point_of_leaf)
        rng = random.Random(11)
        for _ in range(200):
            a, b = rng.sample(leaves, 2)
            start = TreePoint(a, 0.0)
            total = tree.point_node_dist(start, b)
            step = rng.uniform(0, total)
            mid = tree.advance_toward(start, b, step)
            d_mid = tree.point_node_dist(mid, b)
            assert d_mid == pytest.approx(total - step, rel=1e-9, abs=1e-9)
            assert tree.point_point_dist(start, mid) == pytest.approx(
                step, rel=1e-9, abs=1e-9)

    def test_advance_full_budget_arrives(self):
        tree = self._tree()
        leaves = sorted(tree.point_of_leaf)
        a, b = leaves[0], leaves[-1]
        start = TreePoint(a, 0.0)
        total = tree.point_node_dist(start, b)
        end = tree.advance_toward(start, b, total)
        assert end.node == b and end.up == pytest.approx(0.0, abs=1e-9)

    def test_point_point_distance_cases(self):
        tree = self._tree()
        leaves = sorted(tree.point_of_leaf)
        rng = random.Random(12)
        for _ in range(100):
            a, b, c = (rng.choice(leaves) for _ in range(3))
            pa = tree.advance_toward(TreePoint(a, 0.0), b,
                                     rng.uniform(0, max(tree.node_dist(a, b), 1e-9)))
            pc = tree.advance_toward(TreePoint(c, 0.0), a,
                                     rng.uniform(0, max(tree.node_dist(c, a), 1e-9)))
            d = tree.point_point_dist(pa, pc)
            assert d >= -1e-12
            assert d == pytest.approx(tree.point_point_dist(pc, pa), rel=1e-12)
            # triangle through any leaf holds exactly on a tree
            via = (tree.point_node_dist(pa, b) + tree.point_node_dist(pc, b))
            assert d <= via + 1e-6


class TestStreetGraphIO:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "streets.txt"
        path.write_text("3 2\n"
                        "0 40.75 -73.99\n"
                        "1 40.76 -73.99\n"
                        "2 40.76 -73.98\n"
                        "0 1 1111.9\n"
                        "1 2 845.2\n")
        g = load_street_graph(path)
        assert len(g.nodes) == 3
        assert len(g.edges) == 2
        d = graph_metric(g, [0, 2])
        assert d[0, 1] == pytest.approx(1111.9 + 845.2)

    def test_truncated_file(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("2 1\n0 40.75 -73.99\n")
        with pytest.raises(ValueError):
            load_street_graph(path)

    def test_grid_graph_connected(self):
        g = grid_street_graph(40.70, 40.80, -74.0, -73.9, nx=5, ny=4)
        assert len(g.nodes) == 20
        d = graph_metric(g, sorted(g.nodes))
        assert np.isfinite(d).all()

    def test_nearest_node(self):
        g = grid_street_graph(40.70, 40.80, -74.0, -73.9, nx=5, ny=4)
        target = g.nodes[7]
        found = nearest_node(g, GeoPoint(target.lat + 1e-5, target.lon - 1e-5))
        assert found == 7
