"""Idle-fleet relocation toward demand sampled from history.

Expected future requests are drawn from the recent minute window of prior
days.  Idle taxis are then matched against the union of expected and live
unpaired requests through the same two matching graphs used for service,
and each matched taxi starts moving toward its ride's source.  Relocating
taxis stay interruptible; phantom requests are never served or billed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from . import matchers
from .ingest import HistoryStore
from .matchgraph import build_request_graph, build_ride_taxi_graph, ride_index
from .model import GeoPoint, Request, Ride, Vehicle

PHANTOM_ID_BASE = 1_000_000_000


@dataclass(slots=True)
class ExpectedRequest(Request):
    """History-sampled demand point; attracts taxis but is never served."""

    @property
    def phantom(self) -> bool:
        return True


def sample_future(store: HistoryStore, t: int, days_back: int,
                  minutes_back: int, seed: int = 0) -> list[ExpectedRequest]:
    """Draw one day's expected share of the history window, uniformly
    without replacement; deterministic per seed."""
    window = store.window(t, days_back, minutes_back)
    if not window:
        return []
    n_target = min(len(window), math.ceil(len(window) / days_back))
    rng = random.Random(seed)
    picks = rng.sample(range(len(window)), n_target)
    out = []
    for k, idx in enumerate(sorted(picks)):
        r = window[idx]
        out.append(ExpectedRequest(
            id=PHANTOM_ID_BASE + k,
            t_open=t,
            src=r.src,
            dst=r.dst,
            k_wait=r.k_wait,
        ))
    return out


_PAIRERS = {
    "mwm": lambda g, seed: matchers.mwm(g),
    "alma": lambda g, seed: matchers.alma(g, seed=seed),
    "greedy": lambda g, seed: matchers.greedy(g, seed=seed),
}


def relocate(idle: list[Vehicle], actives: list[Request],
             future: list[ExpectedRequest], matcher: str = "mwm",
             seed: int = 0) -> list[tuple[Vehicle, GeoPoint]]:
    """Targets for idle taxis: pair expected and live requests, match the
    resulting rides to the idle fleet by reciprocal distance, and send each
    matched taxi toward its ride's source (picked at random between the two
    sources of a shared ride)."""
    if matcher not in _PAIRERS:
        raise ValueError(f"unsupported relocation matcher {matcher!r}")
    if not idle:
        return []
    nodes: list[Request] = list(future) + [r for r in actives if r.active]
    if not nodes:
        return []
    rng = random.Random(seed)
    by_id = {r.id: r for r in nodes}
    pair_fn = _PAIRERS[matcher]

    graph = build_request_graph(nodes)
    matching = pair_fn(graph, seed)
    rides: list[Ride] = []
    for a, b in matching.pairs:
        rides.append(Ride(by_id[a], by_id[b]))
    for lone in matching.unmatched:
        rides.append(Ride(by_id[lone], by_id[lone]))

    bip = build_ride_taxi_graph(rides, idle)
    assignment = pair_fn(bip, seed)
    vehicles = {v.id: v for v in idle}
    out: list[tuple[Vehicle, GeoPoint]] = []
    for a, b in assignment.pairs:
        ride_node_id, vid = (a, b) if a < 0 else (b, a)
        ride = rides[ride_index(ride_node_id)]
        if ride.single:
            target = ride.r1.src
        else:
            target = ride.r1.src if rng.random() < 0.5 else ride.r2.src
        out.append((vehicles[vid], target))
    return sorted(out, key=lambda pair: pair[0].id)
