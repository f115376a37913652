"""Pairing two trips into a shared ride.

Walks through the core geometry: the four interleaved stop orders, the
distance saved by sharing, and how a batch of requests turns into a
weighted graph that different matchers resolve differently.
"""

import random

from ridesim import geo
from ridesim.matchgraph import build_request_graph
from ridesim.matchers import alma, greedy, mwm
from ridesim.model import GeoPoint, Request

rng = random.Random(7)


def rand_request(rid):
    return Request(rid, 0,
                   GeoPoint(rng.uniform(40.70, 40.80), rng.uniform(-74.0, -73.9)),
                   GeoPoint(rng.uniform(40.70, 40.80), rng.uniform(-74.0, -73.9)),
                   k_wait=2)


# -- two specific trips ------------------------------------------------------
r1 = Request(1, 0, GeoPoint(40.730, -73.990), GeoPoint(40.770, -73.960), 2)
r2 = Request(2, 0, GeoPoint(40.735, -73.985), GeoPoint(40.775, -73.955), 2)

solo = (geo.manhattan_distance(r1.src, r1.dst) +
        geo.manhattan_distance(r2.src, r2.dst))
order, shared_len = geo.shared_route(r1, r2)
print("two northbound trips, almost parallel")
print(f"  served separately : {solo:9.0f} m")
print(f"  best shared order : {order}  ->  {shared_len:9.0f} m")
print(f"  distance saved    : {solo - shared_len:9.0f} m")
print(f"  per-passenger legs: r1={geo.conditional_leg(order, r1, r2, 'r1'):.0f} m, "
      f"r2={geo.conditional_leg(order, r1, r2, 'r2'):.0f} m")

# -- a batch of requests and three matchers ---------------------------------
batch = [rand_request(k) for k in range(14)]
graph = build_request_graph(batch)
print(f"\nbatch of {len(batch)} requests -> graph with {len(graph.edges)} "
      f"positive-saving edges")

for name, matching in (("optimal (blossom)", mwm(graph)),
                       ("back-off heuristic", alma(graph, seed=1)),
                       ("greedy", greedy(graph, seed=1))):
    saved = matching.total_weight
    print(f"  {name:18s}: {len(matching.pairs):2d} pairs, "
          f"{saved:8.0f} m saved")
