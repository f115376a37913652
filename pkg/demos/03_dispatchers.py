"""How the five ride-to-taxi dispatchers pick a vehicle.

One ride, one small fleet: the accumulated-distance balancer, the
inverse-distance sampler, the work-function dispatcher, and the two
tree-based rules (equal-speed double coverage and electrical flow).
"""

import random

from ridesim.hst import frt_embed, graph_metric, grid_street_graph, nearest_node
from ridesim.kserver import (DispatchContext, HstDispatchState, WfaWindow,
                             balance_choose, dc_choose, electrical_probabilities,
                             harmonic_probabilities, ktaxi_choose, wfa_choose)
from ridesim.model import GeoPoint, Vehicle

rng = random.Random(3)
source = GeoPoint(40.76, -73.97)
fleet = [Vehicle(id=k,
                 pos=GeoPoint(rng.uniform(40.70, 40.80), rng.uniform(-74.0, -73.9)),
                 odometer_m=rng.uniform(0, 30_000))
         for k in range(5)]
ctx = DispatchContext(fleet, source)

print("ride source at", (source.lat, source.lon))
print("\nbalancer (odometer + approach):")
chosen = balance_choose(ctx)
print(f"  -> vehicle {chosen.id}")

print("\ninverse-distance sampler probabilities:")
for vid, p in harmonic_probabilities(ctx).items():
    print(f"  vehicle {vid}: {p:.3f}")

print("\nwork-function dispatcher with an empty window (greedy fallback):")
print(f"  -> vehicle {wfa_choose(WfaWindow(w=8), ctx).id}")

# tree-based rules need an embedding of the street metric
graph = grid_street_graph(40.70, 40.80, -74.00, -73.90, nx=6, ny=5)
ids = sorted(graph.nodes)
tree = frt_embed(graph_metric(graph, ids), sigma=4, seed=1)
leaf_of = {nid: tree.leaf_of_point[k] for k, nid in enumerate(ids)}
state = HstDispatchState(tree)
for v in fleet:
    state.place(v.id, leaf_of[nearest_node(graph, v.pos)])
source_leaf = leaf_of[nearest_node(graph, source)]

print("\nelectrical-flow probabilities on the tree:")
probs = electrical_probabilities(tree, source_leaf,
                                 {v.id: state.pos[v.id].node for v in fleet})
for vid, p in sorted(probs.items()):
    print(f"  vehicle {vid}: {p:.3f}")

winner, moved = dc_choose(state, source_leaf, [v.id for v in fleet])
print("\nequal-speed double coverage:")
print(f"  -> vehicle {winner} wins; virtual tree moves per vehicle:")
for vid, dist in sorted(moved.items()):
    print(f"     vehicle {vid}: {dist:8.0f} m on the tree")
