"""Street graphs, shortest-path metrics and randomized tree embeddings.

A finite metric is embedded into a hierarchically separated tree by random
hierarchical decomposition: a random permutation fixes center priorities
and a log-uniform radius scale beta in (1/sigma, 1] fixes the cut radii
beta * sigma^level.  Edge lengths shrink by exactly sigma per level, the
tree distance dominates the input metric, and leaves are in bijection with
the input points.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import geo
from .model import GeoPoint


class DisconnectedPoint(Exception):
    """A queried node is unreachable from the others."""


@dataclass
class StreetGraph:
    nodes: dict[int, GeoPoint]
    edges: list[tuple[int, int, float]]
    adj: dict[int, list[tuple[int, float]]] = field(default_factory=dict)
    _node_cache: Optional[tuple] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.adj:
            self.adj = {n: [] for n in self.nodes}
            for u, v, length in self.edges:
                if length <= 0:
                    raise ValueError("edge lengths must be positive")
                self.adj[u].append((v, length))
                self.adj[v].append((u, length))

    def node_array(self) -> tuple[list[int], np.ndarray]:
        if self._node_cache is None:
            ids = sorted(self.nodes)
            arr = np.array([[self.nodes[i].lat, self.nodes[i].lon] for i in ids])
            self._node_cache = (ids, arr)
        return self._node_cache


def load_street_graph(path) -> StreetGraph:
    """Parse the plain-text graph format: `N M` header, N `id lat lon`
    lines, M `u v length_m` lines."""
    with open(path) as fh:
        tokens = fh.read().split()
    it = iter(tokens)
    try:
        n, m = int(next(it)), int(next(it))
        nodes = {}
        for _ in range(n):
            nid = int(next(it))
            nodes[nid] = GeoPoint(float(next(it)), float(next(it)))
        edges = []
        for _ in range(m):
            edges.append((int(next(it)), int(next(it)), float(next(it))))
    except StopIteration:
        raise ValueError(f"truncated street graph file: {path}")
    return StreetGraph(nodes, edges)


def grid_street_graph(min_lat: float, max_lat: float, min_lon: float,
                      max_lon: float, nx: int = 10, ny: int = 10) -> StreetGraph:
    """Synthetic rectangular street grid covering a bounding box."""
    nodes = {}
    for iy in range(ny):
        for ix in range(nx):
            lat = min_lat + (max_lat - min_lat) * iy / max(ny - 1, 1)
            lon = min_lon + (max_lon - min_lon) * ix / max(nx - 1, 1)
            nodes[iy * nx + ix] = GeoPoint(lat, lon)
    edges = []
    for iy in range(ny):
        for ix in range(nx):
            nid = iy * nx + ix
            if ix + 1 < nx:
                other = nid + 1
                edges.append((nid, other,
                              geo.manhattan_distance(nodes[nid], nodes[other])))
            if iy + 1 < ny:
                other = nid + nx
                edges.append((nid, other,
                              geo.manhattan_distance(nodes[nid], nodes[other])))
    return StreetGraph(nodes, edges)


def graph_metric(g: StreetGraph, points: list[int]) -> np.ndarray:
    """Pairwise shortest-path distances between the given node ids."""
    index = {p: k for k, p in enumerate(points)}
    n = len(points)
    out = np.zeros((n, n))
    for src in points:
        dist = _dijkstra(g, src)
        for dst in points:
            if dst not in dist:
                raise DisconnectedPoint(f"{dst} unreachable from {src}")
            out[index[src], index[dst]] = dist[dst]
    return out


def _dijkstra(g: StreetGraph, src: int) -> dict[int, float]:
    dist = {src: 0.0}
    heap = [(0.0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist.get(u, math.inf):
            continue
        for v, length in g.adj[u]:
            nd = d + length
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


@dataclass(frozen=True, slots=True)
class TreePoint:
    """A point on the tree: `up` meters above `node` along its parent edge."""

    node: int
    up: float = 0.0


class HstTree:
    """Rooted tree with geometrically decreasing edge lengths.

    Node arrays are index-based; `leaf_of_point[p]` maps input point p to
    its leaf node.  Edge length of a node at level l to its parent is
    unit * sigma**(l + 1).
    """

    def __init__(self, sigma: float, unit: float):
        self.sigma = float(sigma)
        self.unit = float(unit)
        self.parent: list[int] = []
        self.level: list[int] = []
        self.children: list[list[int]] = []
        self.depth_len: list[float] = []
        self.leaf_of_point: dict[int, int] = {}
        self.point_of_leaf: dict[int, int] = {}
        self._tin: list[int] = []
        self._tout: list[int] = []
        self._up: list[list[int]] = []

    # -- construction ----------------------------------------------------
    def add_node(self, parent: Optional[int], level: int) -> int:
        nid = len(self.parent)
        self.parent.append(-1 if parent is None else parent)
        self.level.append(level)
        self.children.append([])
        if parent is None:
            self.depth_len.append(0.0)
        else:
            self.children[parent].append(nid)
            self.depth_len.append(self.depth_len[parent] + self.edge_len(nid))
        return nid

    def set_leaf(self, node: int, point: int) -> None:
        self.leaf_of_point[point] = node
        self.point_of_leaf[node] = point

    def freeze(self) -> None:
        """Build Euler intervals and binary-lifting tables."""
        n = len(self.parent)
        self._tin = [0] * n
        self._tout = [0] * n
        clock = 0
        stack = [(0, False)]
        while stack:
            node, done = stack.pop()
            if done:
                self._tout[node] = clock
                clock += 1
                continue
            self._tin[node] = clock
            clock += 1
            stack.append((node, True))
            for ch in reversed(self.children[node]):
                stack.append((ch, False))
        levels = max(1, math.ceil(math.log2(max(2, n))))
        up = [list(self.parent)]
        up[0][0] = 0
        for k in range(1, levels + 1):
            prev = up[k - 1]
            up.append([prev[prev[v]] for v in range(n)])
        self._up = up

    # -- structure queries -------------------------------------------------
    def edge_len(self, node: int) -> float:
        if self.parent[node] < 0:
            return 0.0
        return self.unit * self.sigma ** (self.level[node] + 1)

    @property
    def n_nodes(self) -> int:
        return len(self.parent)

    @property
    def depth_levels(self) -> int:
        return max(self.level) - min(self.level) + 1 if self.parent else 0

    def is_ancestor(self, a: int, b: int) -> bool:
        """True when a is b or an ancestor of b."""
        return self._tin[a] <= self._tin[b] and self._tout[b] <= self._tout[a]

    def lca(self, a: int, b: int) -> int:
        if self.is_ancestor(a, b):
            return a
        if self.is_ancestor(b, a):
            return b
        for table in reversed(self._up):
            if not self.is_ancestor(table[a], b):
                a = table[a]
        return self._up[0][a]

    def node_dist(self, a: int, b: int) -> float:
        l = self.lca(a, b)
        return self.depth_len[a] + self.depth_len[b] - 2.0 * self.depth_len[l]

    # -- point mechanics ---------------------------------------------------
    def point_depth(self, p: TreePoint) -> float:
        return self.depth_len[p.node] - p.up

    def point_node_dist(self, p: TreePoint, x: int) -> float:
        if self.is_ancestor(p.node, x):
            return (self.depth_len[x] - self.depth_len[p.node]) + p.up
        l = self.lca(p.node, x)
        return (self.point_depth(p) - self.depth_len[l]) + \
               (self.depth_len[x] - self.depth_len[l])

    def point_point_dist(self, p: TreePoint, q: TreePoint) -> float:
        if p.node == q.node:
            return abs(p.up - q.up)
        if self.is_ancestor(p.node, q.node):
            return self.point_depth(q) - self.depth_len[p.node] + p.up
        if self.is_ancestor(q.node, p.node):
            return self.point_depth(p) - self.depth_len[q.node] + q.up
        l = self.lca(p.node, q.node)
        return (self.point_depth(p) - self.depth_len[l]) + \
               (self.point_depth(q) - self.depth_len[l])

    def child_toward(self, node: int, target: int) -> int:
        for ch in self.children[node]:
            if self.is_ancestor(ch, target):
                return ch
        raise ValueError(f"{target} is not below {node}")

    def advance_toward(self, p: TreePoint, target_leaf: int, budget: float) -> TreePoint:
        """Move a tree point `budget` meters along the unique path to the
        target leaf (stopping exactly at the leaf)."""
        node, up = p.node, p.up
        while budget > 1e-12:
            if self.is_ancestor(node, target_leaf):
                if up > 0:  # descend back to the anchor node first
                    step = min(up, budget)
                    up -= step
                    budget -= step
                    continue
                if node == target_leaf:
                    break
                ch = self.child_toward(node, target_leaf)
                length = self.edge_len(ch)
                if budget < length:
                    return TreePoint(ch, length - budget)
                budget -= length
                node = ch
            else:
                remaining = self.edge_len(node) - up
                if budget < remaining:
                    return TreePoint(node, up + budget)
                budget -= remaining
                node = self.parent[node]
                up = 0.0
    # exact arrival or exhausted budget
        return TreePoint(node, up)

    def leaf_point(self, point: int) -> TreePoint:
        return TreePoint(self.leaf_of_point[point], 0.0)


def frt_embed(metric: np.ndarray, sigma: float, seed: int = 0) -> HstTree:
    """Randomized hierarchical decomposition of a finite metric.

    `metric` is a symmetric nonneg matrix with zero diagonal satisfying the
    triangle inequality.  The returned tree's leaf i corresponds to point i.
    """
    if sigma < 2:
        raise ValueError("sigma must be >= 2")
    metric = np.asarray(metric, dtype=float)
    n = metric.shape[0]
    rng = np.random.default_rng(seed)
    if n == 1:
        tree = HstTree(sigma, 1.0)
        root = tree.add_node(None, 0)
        tree.set_leaf(root, 0)
        tree.freeze()
        return tree
    off = metric[~np.eye(n, dtype=bool)]
    unit = float(off.min())
    if unit <= 0:
        raise ValueError("metric has distinct points at distance zero")
    norm = metric / unit
    diameter = float(norm.max())

    beta = sigma ** (float(rng.random()) - 1.0)  # log-uniform in (1/sigma, 1]
    perm = [int(v) for v in rng.permutation(n)]
    rank = {p: k for k, p in enumerate(perm)}

    top = 1
    while beta * sigma ** top < diameter:
        top += 1

    tree = HstTree(sigma, unit)
    root = tree.add_node(None, top)
    frontier = [(root, list(range(n)))]
    level = top - 1
    while frontier:
        radius = beta * sigma ** level
        next_frontier = []
        for parent_node, members in frontier:
            groups: dict[int, list[int]] = {}
            for u in members:
                center = next(p for p in perm if norm[u, p] <= radius)
                groups.setdefault(center, []).append(u)
            for center in sorted(groups, key=lambda p: rank[p]):
                child = tree.add_node(parent_node, level)
                if len(groups[center]) == 1:
                    tree.set_leaf(child, groups[center][0])
                else:
                    next_frontier.append((child, groups[center]))
        frontier = next_frontier
        level -= 1
    tree.freeze()
    return tree


def hst_distance(tree: HstTree, u_leaf: int, v_leaf: int) -> float:
    """Sum of edge lengths on the unique path between two leaves."""
    return tree.node_dist(u_leaf, v_leaf)


def nearest_node(g: StreetGraph, point: GeoPoint) -> int:
    """Street node closest to a geo-point under the L1 metric."""
    ids, arr = g.node_array()
    dlat = np.abs(arr[:, 0] - point.lat)
    dlon = np.abs(arr[:, 1] - point.lon) * np.cos(
        np.radians(0.5 * (arr[:, 0] + point.lat)))
    return ids[int(np.argmin(dlat + dlon))]
