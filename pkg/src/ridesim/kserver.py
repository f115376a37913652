"""Ride-to-taxi dispatchers from the server-on-metric-space family.

Includes the accumulated-distance balancer, the inverse-distance sampler,
equal-speed double coverage on a tree embedding, a windowed work-function
dispatcher evaluated through an assignment solver, and an electrical-flow
dispatcher that routes unit current through the tree's Steiner subgraph.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import geo
from .hst import HstTree, TreePoint
from .model import GeoPoint, Vehicle

RECIPROCAL_FLOOR_M = 1.0
DEFAULT_WFA_WINDOW = 8


@dataclass
class DispatchContext:
    """Free vehicles plus the chosen pickup point of the ride to serve."""

    vehicles: list[Vehicle]
    source: GeoPoint

    def __post_init__(self):
        if not self.vehicles:
            raise ValueError("dispatch requires at least one free vehicle")


def balance_choose(ctx: DispatchContext) -> Vehicle:
    """Vehicle minimizing accumulated distance plus approach distance."""
    return min(ctx.vehicles,
               key=lambda v: (v.odometer_m + geo.manhattan_distance(v.pos, ctx.source),
                              v.id))


def harmonic_choose(ctx: DispatchContext, seed: int = 0) -> Vehicle:
    """Sample a vehicle with probability inversely proportional to its
    approach distance (clamped below at one meter)."""
    vehicles = sorted(ctx.vehicles, key=lambda v: v.id)
    probs = harmonic_probabilities(ctx)
    rng = random.Random(seed)
    x = rng.random()
    acc = 0.0
    for v in vehicles:
        acc += probs[v.id]
        if x < acc:
            return v
    return vehicles[-1]


def harmonic_probabilities(ctx: DispatchContext) -> dict[int, float]:
    vehicles = sorted(ctx.vehicles, key=lambda v: v.id)
    inv = [1.0 / max(geo.manhattan_distance(v.pos, ctx.source), RECIPROCAL_FLOOR_M)
           for v in vehicles]
    total = sum(inv)
    return {v.id: w / total for v, w in zip(vehicles, inv)}


# ---------------------------------------------------------------------------
# Double coverage on the tree embedding
# ---------------------------------------------------------------------------

@dataclass
class HstDispatchState:
    """Tree embedding plus each vehicle's virtual position on it."""

    tree: HstTree
    pos: dict[int, TreePoint] = field(default_factory=dict)

    def place(self, vehicle_id: int, leaf: int) -> None:
        self.pos[vehicle_id] = TreePoint(leaf, 0.0)


def dc_choose(state: HstDispatchState, source_leaf: int,
              vehicle_ids: list[int]) -> tuple[int, dict[int, float]]:
    """Equal-speed motion toward the source leaf with halting on obstruction.

    All candidates move toward the source at equal speed; a vehicle halts
    for good once another vehicle's virtual position lies strictly between
    it and the source.  The first arrival wins.  Halting times admit a
    closed form: vehicle j starts blocking vehicle i the moment j passes
    the merge point of their two paths, provided j is still moving then.

    Returns the winner id and the tree distance each candidate moved; all
    candidates' virtual positions are updated in place.
    """
    if not vehicle_ids:
        raise ValueError("no candidate vehicles")
    tree = state.tree
    ids = sorted(vehicle_ids)
    dist = {i: tree.point_node_dist(state.pos[i], source_leaf) for i in ids}
    order = sorted(ids, key=lambda i: (dist[i], i))
    winner = order[0]
    horizon = dist[winner]

    halt: dict[int, float] = {}
    for rank, i in enumerate(order):
        t_stop = horizon
        for j in order[:rank]:
            if dist[j] >= dist[i]:  # ties never strictly block
                continue
            merge_to_source = 0.5 * (dist[i] + dist[j] -
                                     tree.point_point_dist(state.pos[i], state.pos[j]))
            t_block = max(0.0, dist[j] - merge_to_source)
            if t_block <= halt[j] + 1e-9:
                t_stop = min(t_stop, t_block)
        halt[i] = t_stop

    moved = {}
    for i in ids:
        step = min(halt[i], horizon, dist[i])
        moved[i] = step
        if step > 0:
            state.pos[i] = tree.advance_toward(state.pos[i], source_leaf, step)
    state.pos[winner] = TreePoint(source_leaf, 0.0)
    return winner, moved


# ---------------------------------------------------------------------------
# Windowed work function
# ---------------------------------------------------------------------------

@dataclass
class WfaWindow:
    """The last w served rides and vehicle positions at window start."""

    w: int = DEFAULT_WFA_WINDOW
    rides: deque = field(default_factory=deque)  # (source, dest, vehicle_id)
    initial_pos: dict[int, GeoPoint] = field(default_factory=dict)

    def record(self, source: GeoPoint, dest: GeoPoint, vehicle: Vehicle) -> None:
        """Append a served ride; the window start advances past evicted
        rides by pinning their server at the evicted destination."""
        if vehicle.id not in self.initial_pos:
            self.initial_pos[vehicle.id] = vehicle.pos
        self.rides.append((source, dest, vehicle.id))
        while len(self.rides) > self.w:
            old_src, old_dst, old_vid = self.rides.popleft()
            self.initial_pos[old_vid] = old_dst

    def start_position(self, vehicle: Vehicle) -> GeoPoint:
        return self.initial_pos.get(vehicle.id, vehicle.pos)


def work_function_value(initial: list[GeoPoint], rides: list[tuple[GeoPoint, GeoPoint]],
                        final: list[GeoPoint]) -> float:
    """Minimum total distance serving `rides` in order from `initial`,
    ending with servers on `final` (a multiset of the same size).

    Solved as one assignment problem: every ride source and every final
    slot is covered either by an initial server position or by the
    destination of an earlier ride; ride destinations may only feed later
    rides.  Includes the forced source-to-destination legs.
    """
    k, m = len(initial), len(rides)
    if len(final) != k:
        raise ValueError("final configuration must match server count")
    forced = sum(geo.manhattan_distance(s, d) for s, d in rides)
    if k == 0:
        return forced
    size = k + m
    big = 1e18
    cost = np.full((size, size), big)
    # suppliers: 0..k-1 initial positions, k..k+m-1 ride destinations
    # consumers: 0..m-1 ride sources, m..m+k-1 final slots
    for a in range(k):
        for j in range(m):
            cost[a, j] = geo.manhattan_distance(initial[a], rides[j][0])
        for f in range(k):
            cost[a, m + f] = geo.manhattan_distance(initial[a], final[f])
    for i in range(m):
        for j in range(i + 1, m):
            cost[k + i, j] = geo.manhattan_distance(rides[i][1], rides[j][0])
        for f in range(k):
            cost[k + i, m + f] = geo.manhattan_distance(rides[i][1], final[f])
    rows, cols = linear_sum_assignment(cost)
    total = cost[rows, cols].sum()
    if total >= big:
        raise ValueError("infeasible work function instance")
    return float(total + forced)


def wfa_choose(win: WfaWindow, ctx: DispatchContext) -> Vehicle:
    """Vehicle minimizing work-function value of the configuration with
    that vehicle moved to the new ride, plus its approach distance."""
    vehicles = sorted(ctx.vehicles, key=lambda v: v.id)
    initial = [win.start_position(v) for v in vehicles]
    rides = list(win.rides)
    ride_legs = [(s, d) for s, d, _ in rides]
    best = None
    for idx, v in enumerate(vehicles):
        final = [ctx.source if k == idx else vehicles[k].pos
                 for k in range(len(vehicles))]
        value = work_function_value(initial, ride_legs, final)
        score = value + geo.manhattan_distance(v.pos, ctx.source)
        if best is None or score < best[0] - 1e-12:
            best = (score, v)
    return best[1]


# ---------------------------------------------------------------------------
# Electrical-flow dispatch on the tree
# ---------------------------------------------------------------------------

def steiner_subtree(tree: HstTree, terminals: list[int]) -> dict[int, list[tuple[int, float]]]:
    """Adjacency of the subtree spanning `terminals`, edge values are the
    tree edge lengths (interpreted as resistances)."""
    keep: set[int] = set()
    for t in terminals:
        node = t
        while node not in keep:
            keep.add(node)
            if tree.parent[node] < 0:
                break
            node = tree.parent[node]
    term = set(terminals)
    # prune non-terminal dangling chains toward the root
    adj: dict[int, list[tuple[int, float]]] = {n: [] for n in keep}
    for n in keep:
        p = tree.parent[n]
        if p >= 0 and p in keep:
            length = tree.edge_len(n)
            adj[n].append((p, length))
            adj[p].append((n, length))
    changed = True
    while changed:
        changed = False
        for n in list(adj):
            if n not in term and len(adj[n]) == 1:
                (other, length) = adj[n][0]
                adj[other] = [(x, l) for x, l in adj[other] if x != n]
                del adj[n]
                changed = True
    return adj


def electrical_split(adj: dict[int, list[tuple[int, float]]], source: int,
                     grounded: set[int]) -> dict[int, float]:
    """Absorbed current per grounded node when a unit current enters at
    `source` of the resistor tree `adj` (edge values are resistances).

    Works by leaf elimination: each branch's conductance to ground is
    reduced bottom-up, then the current is pushed top-down, splitting at
    every node in proportion to branch conductance.
    """
    conductance: dict[tuple[int, int], float] = {}

    def branch(child: int, parent: int, resistance: float) -> float:
        if child in grounded:
            return 1.0 / resistance
        g = subtree(child, parent)
        if g <= 0.0:
            return 0.0
        return 1.0 / (resistance + 1.0 / g)

    def subtree(node: int, parent: int) -> float:
        key = (node, parent)
        if key not in conductance:
            conductance[key] = sum(branch(ch, node, r)
                                   for ch, r in adj[node] if ch != parent)
        return conductance[key]

    absorbed = {g: 0.0 for g in grounded}
    stack = [(source, -1, 1.0)]
    while stack:
        node, parent, current = stack.pop()
        branches = [(ch, branch(ch, node, r)) for ch, r in adj[node]
                    if ch != parent]
        total = sum(g for _, g in branches)
        if total <= 0.0:
            continue
        for ch, g in branches:
            flow = current * g / total
            if ch in grounded:
                absorbed[ch] += flow
            elif flow > 0.0:
                stack.append((ch, node, flow))
    return absorbed


def electrical_probabilities(tree: HstTree, source_leaf: int,
                             vehicle_leaves: dict[int, int]) -> dict[int, float]:
    """Unit current enters at the source leaf; grounded vehicle leaves
    absorb it in proportion to their branch conductances.

    Vehicles sharing a leaf split that leaf's probability equally.
    Vehicles already at the source leaf take the full unit flow.
    """
    at_source = [vid for vid, leaf in vehicle_leaves.items() if leaf == source_leaf]
    if at_source:
        share = 1.0 / len(at_source)
        return {vid: (share if leaf == source_leaf else 0.0)
                for vid, leaf in vehicle_leaves.items()}
    leaves = sorted(set(vehicle_leaves.values()))
    adj = steiner_subtree(tree, leaves + [source_leaf])
    absorbed = electrical_split(adj, source_leaf, set(leaves))

    probs: dict[int, float] = {}
    leaf_count: dict[int, int] = {}
    for vid, leaf in vehicle_leaves.items():
        leaf_count[leaf] = leaf_count.get(leaf, 0) + 1
    for vid, leaf in vehicle_leaves.items():
        probs[vid] = absorbed[leaf] / leaf_count[leaf]
    return probs


def ktaxi_choose(state: HstDispatchState, source_leaf: int,
                 vehicle_ids: list[int], seed: int = 0) -> int:
    """Sample the serving vehicle from the electrical-flow distribution;
    the winner's virtual position jumps to the source leaf."""
    if not vehicle_ids:
        raise ValueError("no candidate vehicles")
    leaves = {vid: state.pos[vid].node for vid in sorted(vehicle_ids)}
    probs = electrical_probabilities(state.tree, source_leaf, leaves)
    rng = random.Random(seed)
    x = rng.random()
    acc = 0.0
    winner = sorted(vehicle_ids)[-1]
    for vid in sorted(vehicle_ids):
        acc += probs[vid]
        if x < acc:
            winner = vid
            break
    state.pos[winner] = TreePoint(source_leaf, 0.0)
    return winner
