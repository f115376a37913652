"""Weighted matching graphs over requests, rides and vehicles.

Two graph families are built each decision round:
 - a general graph over active requests whose edge weight is the travel
   distance saved by sharing (edges kept only when the saving is positive);
 - a bipartite ride/taxi graph whose edge weight is the reciprocal of the
   approach-plus-service distance from the vehicle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from . import geo
from .model import Request, Ride, Vehicle

RECIPROCAL_FLOOR_M = 1.0  # clamp for 1/distance weights


@dataclass(slots=True)
class Edge:
    i: int
    j: int
    weight: float
    payload: Optional[tuple] = None  # (order, meters) where applicable


@dataclass
class MatchGraph:
    kind: str  # "general" | "bipartite"
    nodes: list[int]
    edges: list[Edge]
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in ("general", "bipartite"):
            raise ValueError(f"unknown graph kind {self.kind!r}")
        node_set = set(self.nodes)
        left, right = set(self.left), set(self.right)
        for e in self.edges:
            if self.kind == "general" and e.i == e.j:
                raise ValueError("self-loop in general graph")
            if e.i not in node_set or e.j not in node_set:
                raise ValueError("edge endpoint missing from node set")
            if self.kind == "bipartite":
                if not ((e.i in left and e.j in right) or
                        (e.i in right and e.j in left)):
                    raise ValueError("bipartite edge must cross sides")
            if not math.isfinite(e.weight):
                raise ValueError("edge weight must be finite")

    def neighbors(self, node: int) -> list[tuple[int, float]]:
        out = []
        for e in self.edges:
            if e.i == node:
                out.append((e.j, e.weight))
            elif e.j == node:
                out.append((e.i, e.weight))
        return out

    def adjacency(self) -> dict[int, list[tuple[int, float]]]:
        adj: dict[int, list[tuple[int, float]]] = {n: [] for n in self.nodes}
        for e in self.edges:
            adj[e.i].append((e.j, e.weight))
            adj[e.j].append((e.i, e.weight))
        return adj


def pair_saving(r1: Request, r2: Request) -> float:
    """Distance saved by serving r1 and r2 as one shared ride."""
    solo = geo.manhattan_distance(r1.src, r1.dst) + geo.manhattan_distance(r2.src, r2.dst)
    _, shared_len = geo.shared_route(r1, r2)
    return solo - shared_len


def build_request_graph(requests: list[Request]) -> MatchGraph:
    """General graph over requests; edges where sharing saves distance."""
    ordered = sorted(requests, key=lambda r: r.id)
    by_id = {r.id: r for r in ordered}
    edges = []
    ids = [r.id for r in ordered]
    for a in range(len(ids)):
        for b in range(a + 1, len(ids)):
            r1, r2 = by_id[ids[a]], by_id[ids[b]]
            w = pair_saving(r1, r2)
            if w > 0.0:
                edges.append(Edge(ids[a], ids[b], w))
    return MatchGraph("general", ids, edges)


def ride_node(index: int) -> int:
    """Node id for the ride at `index`; negative so it cannot collide with
    vehicle ids."""
    return -(index + 1)


def ride_index(node: int) -> int:
    return -node - 1


def build_ride_taxi_graph(rides: list[Ride], free_vehicles: list[Vehicle]) -> MatchGraph:
    """Complete bipartite graph from pending rides to free vehicles.

    Ride-side node ids are ride_node(index into `rides`); vehicle-side ids
    are vehicle ids.  The payload carries the minimizing stop order and the
    approach-plus-service distance for the pair.
    """
    ride_ids = [ride_node(i) for i in range(len(rides))]
    veh = sorted(free_vehicles, key=lambda v: v.id)
    veh_ids = [v.id for v in veh]
    edges = []
    for ri, ride in enumerate(rides):
        for v in veh:
            order, meters = geo.shared_route_from(v.pos, ride.r1, ride.r2)
            w = 1.0 / max(meters, RECIPROCAL_FLOOR_M)
            edges.append(Edge(ride_ids[ri], v.id, w, payload=(order, meters)))
    return MatchGraph("bipartite", ride_ids + veh_ids, edges,
                      left=ride_ids, right=veh_ids)
