"""Offline matching algorithms: optimal, heuristic and approximate.

The optimal matcher delegates to the blossom implementation in networkx
for general graphs and to the Jonker-Volgenant assignment solver in scipy
for bipartite ones; both are exact.  The round-based back-off heuristic,
the randomized greedy and the random baseline are implemented here, as is
the two-phase 2.5-approximation batch assigner.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.optimize import linear_sum_assignment

from . import geo
from .matchgraph import MatchGraph
from .model import Request, Vehicle

DEFAULT_ALMA_ROUNDS = 50


class InsufficientVehicles(Exception):
    """Raised when a batch assignment has more rides than free vehicles."""


@dataclass
class Matching:
    """Disjoint matched pairs plus the leftover nodes."""

    pairs: list[tuple[int, int]]
    unmatched: list[int]
    total_weight: float

    def partner(self) -> dict[int, int]:
        out = {}
        for i, j in self.pairs:
            out[i] = j
            out[j] = i
        return out


def _finish(graph: MatchGraph, pairs: list[tuple[int, int]],
            weight_of: dict[tuple[int, int], float]) -> Matching:
    matched = set()
    total = 0.0
    norm_pairs = []
    for i, j in pairs:
        a, b = min(i, j), max(i, j)
        if a in matched or b in matched:
            raise ValueError("matching is not disjoint")
        matched.update((a, b))
        norm_pairs.append((a, b))
        total += weight_of[(a, b)]
    unmatched = [n for n in graph.nodes if n not in matched]
    return Matching(sorted(norm_pairs), unmatched, total)


def _weight_map(graph: MatchGraph) -> dict[tuple[int, int], float]:
    return {(min(e.i, e.j), max(e.i, e.j)): e.weight for e in graph.edges}


def mwm(graph: MatchGraph) -> Matching:
    """Maximum-weight matching (not necessarily perfect)."""
    weight_of = _weight_map(graph)
    if graph.kind == "bipartite":
        return _mwm_bipartite(graph, weight_of)
    g = nx.Graph()
    g.add_nodes_from(sorted(graph.nodes))
    for (a, b), w in sorted(weight_of.items()):
        g.add_edge(a, b, weight=w)
    pairs = [tuple(p) for p in nx.max_weight_matching(g)]
    return _finish(graph, pairs, weight_of)


def _mwm_bipartite(graph: MatchGraph, weight_of) -> Matching:
    # Only positive edges can appear in a maximum-weight matching.  Solve
    # an assignment problem with negated weights, padded with one zero-cost
    # dummy column per left node so that staying unmatched is free.
    left = sorted(graph.left)
    right = sorted(graph.right)
    if not left or not right:
        return Matching([], sorted(graph.nodes), 0.0)
    big = 1.0 + sum(w for w in weight_of.values() if w > 0)
    cost = np.full((len(left), len(right) + len(left)), big)
    cost[:, len(right):] = 0.0
    l_idx = {n: k for k, n in enumerate(left)}
    r_idx = {n: k for k, n in enumerate(right)}
    for e in graph.edges:
        if e.weight > 0:
            li = l_idx[e.i] if e.i in l_idx else l_idx[e.j]
            ri = r_idx[e.j] if e.j in r_idx else r_idx[e.i]
            cost[li, ri] = min(cost[li, ri], -e.weight)
    rows, cols = linear_sum_assignment(cost)
    pairs = [(left[r], right[c]) for r, c in zip(rows, cols)
             if c < len(right) and cost[r, c] < 0]
    return _finish(graph, pairs, weight_of)


def alma(graph: MatchGraph, max_rounds: int = DEFAULT_ALMA_ROUNDS,
         seed: int = 0) -> Matching:
    """Round-based decentralized matching with loss-driven back-off.

    Each unmatched agent targets its best available counterpart.  When a
    target is contested, every contender independently backs off with
    probability 1 - L, where L is its normalized utility loss of switching
    to its best remaining alternative (L = 1 with no alternative).  A sole
    surviving contender claims the target.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    rng = random.Random(seed)
    weight_of = _weight_map(graph)
    adj = graph.adjacency()
    agents = sorted(graph.left) if graph.kind == "bipartite" else sorted(graph.nodes)
    matched: set[int] = set()
    pairs: list[tuple[int, int]] = []

    def options(agent: int) -> list[tuple[float, int]]:
        # candidate targets by descending weight, id as tie-break
        out = [(-w, j) for j, w in adj[agent] if j not in matched and w > 0]
        out.sort()
        return out

    active = [a for a in agents if a not in matched]
    for _ in range(max_rounds):
        targets: dict[int, list[int]] = {}
        prefs: dict[int, list[tuple[float, int]]] = {}
        for agent in active:
            if agent in matched:
                continue
            opts = options(agent)
            if not opts:
                continue
            prefs[agent] = opts
            targets.setdefault(opts[0][1], []).append(agent)
        if not targets:
            break
        claims = []
        for target in sorted(targets):
            contenders = sorted(targets[target])
            if len(contenders) == 1:
                claims.append((target, contenders[0]))
                continue
            survivors = []
            for agent in contenders:
                opts = prefs[agent]
                u_best = -opts[0][0]
                u_next = -opts[1][0] if len(opts) > 1 else None
                loss = 1.0 if u_next is None else (u_best - u_next) / u_best
                if rng.random() >= 1.0 - loss:  # back off with prob 1 - loss
                    survivors.append(agent)
            if len(survivors) == 1:
                claims.append((target, survivors[0]))
        for target, agent in claims:
            if target in matched or agent in matched:
                continue
            matched.update((target, agent))
            pairs.append((agent, target))
        active = [a for a in agents if a not in matched]
        if not active:
            break
    return _finish(graph, pairs, weight_of)


def greedy(graph: MatchGraph, seed: int = 0) -> Matching:
    """Match a randomly drawn node to its best available neighbor."""
    rng = random.Random(seed)
    weight_of = _weight_map(graph)
    adj = graph.adjacency()
    pool = sorted(graph.left) if graph.kind == "bipartite" else sorted(graph.nodes)
    matched: set[int] = set()
    pairs = []
    pool = list(pool)
    while pool:
        i = pool.pop(rng.randrange(len(pool)))
        if i in matched:
            continue
        best = None
        for j, w in adj[i]:
            if j in matched or w <= 0:
                continue
            if best is None or (w, -j) > (best[0], -best[1]):
                best = (w, j)
        if best is None:
            continue
        matched.update((i, best[1]))
        pairs.append((i, best[1]))
    return _finish(graph, pairs, weight_of)


def random_match(graph: MatchGraph, seed: int = 0) -> Matching:
    """Uniformly random maximal matching over non-negative edges."""
    rng = random.Random(seed)
    weight_of = _weight_map(graph)
    edges = sorted((min(e.i, e.j), max(e.i, e.j)) for e in graph.edges if e.weight >= 0)
    rng.shuffle(edges)
    matched: set[int] = set()
    pairs = []
    for a, b in edges:
        if a in matched or b in matched:
            continue
        matched.update((a, b))
        pairs.append((a, b))
    return _finish(graph, pairs, weight_of)


def min_weight_pairing(costs: dict[tuple[int, int], float],
                       nodes: list[int]) -> list[tuple[int, int]]:
    """Minimum-cost perfect pairing of `nodes` (ids), given pair costs.

    Runs blossom on shifted negated costs so that cardinality is preserved.
    With an odd node count one node stays unpaired; `costs` must then carry
    a ((n, n)) entry per node giving its self-service cost.
    """
    nodes = sorted(nodes)
    if not nodes:
        return []
    if len(nodes) == 1:
        return [(nodes[0], nodes[0])]
    g = nx.Graph()
    dummy = None
    if len(nodes) % 2 == 1:
        dummy = min(nodes) - 1
        g.add_node(dummy)
    g.add_nodes_from(nodes)
    big = 1.0 + max(costs.values())
    for (a, b), c in sorted(costs.items()):
        if a == b:
            if dummy is not None:
                g.add_edge(dummy, a, weight=big - c)
        else:
            g.add_edge(min(a, b), max(a, b), weight=big - c)
    out = []
    for i, j in nx.max_weight_matching(g, maxcardinality=True):
        a, b = min(i, j), max(i, j)
        if dummy is not None and a == dummy:
            out.append((b, b))
        else:
            out.append((a, b))
    return sorted(out)


def worst_pickup_cost(r1: Request, r2: Request) -> float:
    """Shared service distance assuming the less convenient start pickup."""
    if r1.id == r2.id:
        return geo.manhattan_distance(r1.src, r1.dst)
    from_1 = min(
        _order_len(order, r1, r2)
        for order in geo.SHARED_ORDERS if order[0] == "s1"
    )
    from_2 = min(
        _order_len(order, r1, r2)
        for order in geo.SHARED_ORDERS if order[0] == "s2"
    )
    return max(from_1, from_2)


def _order_len(order, r1, r2):
    pts = geo.order_points(order, r1, r2)
    return sum(geo.manhattan_distance(a, b) for a, b in zip(pts, pts[1:]))


def appr_pair_phase(requests: list[Request]) -> list[tuple[Request, Request]]:
    """Phase one of the batch approximation: pair all requests, with the
    pair cost taken at the worst of the two pickup-start choices."""
    reqs = sorted(requests, key=lambda r: r.id)
    by_id = {r.id: r for r in reqs}
    costs: dict[tuple[int, int], float] = {}
    for a in range(len(reqs)):
        costs[(reqs[a].id, reqs[a].id)] = worst_pickup_cost(reqs[a], reqs[a])
        for b in range(a + 1, len(reqs)):
            costs[(reqs[a].id, reqs[b].id)] = worst_pickup_cost(reqs[a], reqs[b])
    return [(by_id[a], by_id[b]) for a, b in
            min_weight_pairing(costs, [r.id for r in reqs])]


def appr_dispatch_phase(pairs: list[tuple[Request, Request]],
                        vehicles: list[Vehicle]) -> list[tuple[int, Vehicle]]:
    """Phase two: assign each pair a vehicle, minimizing the distance to
    the closer of the two pickups.  Returns (pair index, vehicle)."""
    veh = sorted(vehicles, key=lambda v: v.id)
    if len(veh) < len(pairs):
        raise InsufficientVehicles(
            f"{len(pairs)} rides but only {len(veh)} free vehicles")
    if not pairs:
        return []
    cost = np.zeros((len(pairs), len(veh)))
    for pi, (r1, r2) in enumerate(pairs):
        for vi, v in enumerate(veh):
            d = geo.manhattan_distance(v.pos, r1.src)
            if r2.id != r1.id:
                d = min(d, geo.manhattan_distance(v.pos, r2.src))
            cost[pi, vi] = d
    rows, cols = linear_sum_assignment(cost)
    return [(int(r), veh[int(c)]) for r, c in zip(rows, cols)]


def appr_assign(requests: list[Request],
                vehicles: list[Vehicle]) -> list[tuple[Request, Request, Vehicle]]:
    """Two-phase batch assignment with a 2.5 worst-case guarantee."""
    pairs = appr_pair_phase(requests)
    placed = appr_dispatch_phase(pairs, vehicles)
    return [(pairs[pi][0], pairs[pi][1], v) for pi, v in placed]
