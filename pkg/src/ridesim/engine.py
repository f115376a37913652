"""Discrete-time simulation loop: admission, pairing, dispatch, relocation,
vehicle motion and event emission.

Tick order within each minute is fixed: admit, promote to critical, pair
(step a), dispatch (step b), relocate (step c), then advance every vehicle
by one minute of travel.  The clock runs past the workload span until all
admitted requests complete, so every run serves every request.
"""

from __future__ import annotations

import copy
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import geo, hst, kserver, matchers, metrics, online, relocation
from .ingest import BoundingBox, HistoryStore
from .matchgraph import build_request_graph, build_ride_taxi_graph, ride_index
from .model import (GeoPoint, Request, Ride, SimParams, Stop, Vehicle,
                    transition)

PAIR_ALGOS = ("mwm", "alma", "greedy", "random", "appr", "pg", "gd", "single")
DISPATCH_ALGOS = ("mwm", "alma", "greedy", "random", "appr",
                  "balance", "harmonic", "dc", "wfa", "ktaxi")
RELOC_ALGOS = ("mwm", "alma", "greedy")

_OFFLINE_PAIRERS = {
    "mwm": lambda g, seed: matchers.mwm(g),
    "alma": lambda g, seed: matchers.alma(g, seed=seed),
    "greedy": lambda g, seed: matchers.greedy(g, seed=seed),
    "random": lambda g, seed: matchers.random_match(g, seed=seed),
}


class InsufficientHistory(Exception):
    """Fewer prior requests than vehicles to place."""


@dataclass(slots=True)
class EventRecord:
    t: float
    kind: str
    request_id: Optional[int]
    vehicle_id: Optional[int]
    lat: float
    lon: float


@dataclass
class EventLog:
    """Append-only lifecycle event sequence plus per-step wall-clock time."""

    events: list[EventRecord] = field(default_factory=list)
    elapsed_ns: dict[str, int] = field(default_factory=dict)

    def append(self, t: float, kind: str, request_id: Optional[int],
               vehicle_id: Optional[int], point: GeoPoint) -> None:
        self.events.append(EventRecord(t, kind, request_id, vehicle_id,
                                       point.lat, point.lon))

    def add_elapsed(self, step: str, ns: int) -> None:
        self.elapsed_ns[step] = self.elapsed_ns.get(step, 0) + ns

    def export_lines(self) -> list[str]:
        out = []
        for ev in self.events:
            rid = "-" if ev.request_id is None else ev.request_id
            vid = "-" if ev.vehicle_id is None else ev.vehicle_id
            out.append(f"{ev.t:.6f} {ev.kind} {rid} {vid} {ev.lat:.6f} {ev.lon:.6f}")
        return out

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("\n".join(self.export_lines()) + "\n")


@dataclass
class ScenarioConfig:
    """One simulation run: workload, fleet sizing and algorithm choices."""

    requests: list[Request]
    algo_pair: str = "mwm"
    algo_dispatch: str = "mwm"
    algo_reloc: Optional[str] = None
    params: SimParams = field(default_factory=SimParams)
    fleet_multiplier: float = 1.0
    fleet_count: Optional[int] = None
    warmup: list[Request] = field(default_factory=list)
    history: Optional[HistoryStore] = None
    street_graph: Optional[hst.StreetGraph] = None
    hst_sigma: float = 4.0
    wfa_window: int = kserver.DEFAULT_WFA_WINDOW
    # work-function configurations grow cubically with the candidate count,
    # so the engine evaluates only the nearest free vehicles per ride
    wfa_candidates: int = 16
    alma_max_rounds: int = matchers.DEFAULT_ALMA_ROUNDS
    span_end: Optional[int] = None  # last workload minute (exclusive)
    graph_observer: Optional[Callable] = None  # test hook: sees step-(a) graphs

    def __post_init__(self):
        if self.algo_pair not in PAIR_ALGOS:
            raise ValueError(f"unknown pairing algorithm {self.algo_pair!r}")
        if self.algo_dispatch not in DISPATCH_ALGOS:
            raise ValueError(f"unknown dispatch algorithm {self.algo_dispatch!r}")
        if self.algo_reloc is not None and self.algo_reloc not in RELOC_ALGOS:
            raise ValueError(f"unknown relocation algorithm {self.algo_reloc!r}")
        if self.algo_reloc is not None and self.history is None:
            raise ValueError("relocation requires a history store")


def compute_base_fleet(requests: list[Request],
                       params: Optional[SimParams] = None) -> int:
    """Minimum fleet serving everything as single rides with no queuing.

    Replays the workload: each request takes the nearest free vehicle, or
    spawns a new one at its source when none is free.
    """
    params = params or SimParams()
    speed = params.speed_m_per_min
    fleet: list[list] = []  # [pos, busy_until]
    for r in requests:
        now = float(r.t_open)
        trip_min = geo.manhattan_distance(r.src, r.dst) / speed
        free = [(k, v) for k, v in enumerate(fleet) if v[1] <= now]
        if not free:
            fleet.append([r.dst, now + trip_min])
            continue
        _, best = min(free, key=lambda kv: (geo.manhattan_distance(kv[1][0], r.src),
                                            kv[0]))
        approach_min = geo.manhattan_distance(best[0], r.src) / speed
        best[0] = r.dst
        best[1] = now + approach_min + trip_min
    return len(fleet)


def initial_fleet(history: list[Request], count: int, t0: int,
                  params: Optional[SimParams] = None) -> list[Vehicle]:
    """One vehicle per each of the last `count` pre-t0 requests, placed at
    that request's dropoff and busy until its dropoff time."""
    params = params or SimParams()
    prior = [r for r in history if r.t_open < t0]
    if len(prior) < count:
        raise InsufficientHistory(
            f"need {count} prior requests, have {len(prior)}")
    prior.sort(key=lambda r: (r.t_open, r.id))
    tail = prior[-count:] if count else []
    out = []
    for vid, r in enumerate(tail):
        trip_min = geo.manhattan_distance(r.src, r.dst) / params.speed_m_per_min
        out.append(Vehicle(id=vid, pos=r.dst, busy_until=r.t_open + trip_min))
    return out


class _Leg:
    """Current travel leg of a vehicle; positions are materialized from
    the leg start so distances stay consistent with the metric."""

    __slots__ = ("start", "target", "length", "consumed", "stop")

    def __init__(self, start: GeoPoint, target: GeoPoint, stop: Optional[Stop]):
        self.start = start
        self.target = target
        self.length = geo.manhattan_distance(start, target)
        self.consumed = 0.0
        self.stop = stop

    @property
    def remaining(self) -> float:
        return self.length - self.consumed

    def position(self) -> GeoPoint:
        if self.consumed <= 0.0:
            return self.start
        if self.consumed >= self.length:
            return self.target
        return geo.move_along(self.start, self.target, self.consumed)


class Simulation:
    """Owns all mutable state of one run."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.params = config.params
        self.log = EventLog()
        # own private copies: runs must not mutate the caller's workload
        self.requests = sorted((copy.copy(r) for r in config.requests),
                               key=lambda r: (r.t_open, r.id))
        self.by_id = {r.id: r for r in self.requests}
        if len(self.by_id) != len(self.requests):
            raise ValueError("duplicate request ids")
        self.t0 = self.requests[0].t_open if self.requests else 0
        horizon = (max(r.t_open for r in self.requests) + 1) if self.requests else 0
        self.span_end = config.span_end if config.span_end is not None else horizon

        self._init_rng()
        self._init_fleet()
        self._init_algorithms()

        self.open_ids: list[int] = []
        self.critical_ids: list[int] = []
        self.pending_rides: deque[Ride] = deque()
        self.completed = 0
        self._arrival_idx = 0

    # -- setup -------------------------------------------------------------
    def _init_rng(self):
        base = self.params.rng_seed
        names = ("pair", "dispatch", "source", "reloc", "coin")
        self._streams = {name: np.random.default_rng((base, idx))
                         for idx, name in enumerate(names)}

    def _draw_seed(self, stream: str) -> int:
        return int(self._streams[stream].integers(0, 2**62))

    def _init_fleet(self):
        cfg = self.config
        if cfg.fleet_count is not None:
            count = cfg.fleet_count
        else:
            base = compute_base_fleet(self.requests, self.params)
            count = max(1, round(base * cfg.fleet_multiplier))
        try:
            self.vehicles = initial_fleet(cfg.warmup, count, self.t0, self.params)
        except InsufficientHistory:
            # tiny scenarios without warmup: park vehicles at early sources
            self.vehicles = []
            if self.requests:
                for vid in range(count):
                    src = self.requests[vid % len(self.requests)].src
                    self.vehicles.append(Vehicle(id=vid, pos=src))
        self.veh_by_id = {v.id: v for v in self.vehicles}
        self._legs: dict[int, Optional[_Leg]] = {v.id: None for v in self.vehicles}
        self._service: dict[int, deque] = {v.id: deque() for v in self.vehicles}
        self._active_ride: dict[int, Ride] = {}
        self.base_fleet_size = count

    def _init_algorithms(self):
        cfg = self.config
        self.pg_state = online.PgState() if cfg.algo_pair == "pg" else None
        self.gd_state = online.GdState(self.params) if cfg.algo_pair == "gd" else None
        self.wfa_window = (kserver.WfaWindow(cfg.wfa_window)
                           if cfg.algo_dispatch == "wfa" else None)
        self.hst_state = None
        if cfg.algo_dispatch in ("dc", "ktaxi") and (self.requests or
                                                     cfg.street_graph):
            graph = cfg.street_graph
            if graph is None:
                box = self._workload_box()
                graph = hst.grid_street_graph(box.min_lat, box.max_lat,
                                              box.min_lon, box.max_lon)
            node_ids, _ = graph.node_array()
            metric = hst.graph_metric(graph, node_ids)
            tree = hst.frt_embed(metric, cfg.hst_sigma,
                                 seed=self._draw_seed("dispatch"))
            self._street = graph
            self._leaf_of_node = {nid: tree.leaf_of_point[idx]
                                  for idx, nid in enumerate(node_ids)}
            self.hst_state = kserver.HstDispatchState(tree)
            for v in self.vehicles:
                self.hst_state.place(v.id, self._leaf_for(v.pos))

    def _workload_box(self) -> BoundingBox:
        lats = [p.lat for r in self.requests for p in (r.src, r.dst)]
        lons = [p.lon for r in self.requests for p in (r.src, r.dst)]
        for v in self.vehicles:
            lats.append(v.pos.lat)
            lons.append(v.pos.lon)
        pad = 1e-3
        return BoundingBox(min(lats) - pad, max(lats) + pad,
                           min(lons) - pad, max(lons) + pad)

    def _leaf_for(self, point: GeoPoint) -> int:
        return self._leaf_of_node[hst.nearest_node(self._street, point)]

    # -- helpers -----------------------------------------------------------
    def _free_vehicles(self, now: float) -> list[Vehicle]:
        return [v for v in self.vehicles
                if not self._service[v.id] and not self._active_ride.get(v.id)
                and v.busy_until <= now]

    def _materialize(self, v: Vehicle) -> None:
        leg = self._legs[v.id]
        if leg is not None:
            v.pos = leg.position()

    def _actives(self) -> list[Request]:
        return [self.by_id[i] for i in self.open_ids + self.critical_ids]

    # -- main loop -----------------------------------------------------------
    def run(self) -> tuple[EventLog, metrics.MetricsReport]:
        t = self.t0
        guard = self.span_end + 1_000_000
        while True:
            self._tick(t)
            if self._arrival_idx >= len(self.requests) and \
                    self.completed == len(self.requests) and t >= self.span_end:
                break
            t += 1
            if t > guard:
                raise RuntimeError("simulation failed to drain")
        report = metrics.finalize(self.log, self.vehicles, self.params)
        return self.log, report

    def _tick(self, t: int):
        newly_critical = self._admit_and_promote(t)
        self._step_pair(t, newly_critical)
        self._step_dispatch(t)
        self._step_relocate(t)
        self._step_motion(t)

    # -- admission / promotion ----------------------------------------------
    def _admit_and_promote(self, t: int) -> list[Request]:
        while (self._arrival_idx < len(self.requests) and
               self.requests[self._arrival_idx].t_open <= t):
            r = self.requests[self._arrival_idx]
            self._arrival_idx += 1
            self.log.append(t, "open", r.id, None, r.src)
            if self.config.algo_pair == "single":
                transition(r, "paired", t)
                self.log.append(t, "paired", r.id, None, r.src)
                self.pending_rides.append(Ride(r, r))
            else:
                self.open_ids.append(r.id)
                if self.pg_state is not None:
                    online.pg_on_arrival(self.pg_state, r)
                if self.gd_state is not None:
                    self.gd_state.add(r)
        newly_critical = []
        still_open = []
        for rid in self.open_ids:
            r = self.by_id[rid]
            if t - r.t_open >= r.k_wait:
                transition(r, "critical", t)
                self.log.append(t, "critical", r.id, None, r.src)
                self.critical_ids.append(rid)
                newly_critical.append(r)
            else:
                still_open.append(rid)
        self.open_ids = still_open
        return newly_critical

    # -- step (a): request pairing -------------------------------------------
    def _step_pair(self, t: int, newly_critical: list[Request]):
        algo = self.config.algo_pair
        if algo == "single":
            return
        started = time.perf_counter_ns()
        if algo == "pg":
            for r in sorted(newly_critical, key=lambda r: r.id):
                if r.id not in self.pg_state.undecided:
                    continue  # already paired as an earlier request's partner
                _, decision = online.pg_on_critical(self.pg_state, r,
                                                    seed=self._draw_seed("coin"))
                if decision.single:
                    self._commit_single(r, t)
                else:
                    self._commit_pair(r, decision.partner, t)
        elif algo == "gd":
            _, matches = online.gd_tick(self.gd_state, t)
            for r1, r2 in matches:
                self._commit_pair(r1, r2, t)
            for r in list(map(self.by_id.get, self.critical_ids)):
                grace = max(r.k_wait, 1)
                if t - r.t_open >= r.k_wait + grace:
                    self.gd_state.discard(r.id)
                    self._commit_single(r, t)
        else:
            batch = self.params.batch_minutes
            trigger = (bool(newly_critical) if batch == "jit"
                       else t % int(batch) == 0)
            if trigger:
                self._run_offline_pairing(t)
        self.log.add_elapsed("pair", time.perf_counter_ns() - started)

    def _run_offline_pairing(self, t: int):
        algo = self.config.algo_pair
        actives = self._actives()
        if not actives:
            return
        if algo == "appr":
            for r1, r2 in matchers.appr_pair_phase(actives):
                if r1.id == r2.id:
                    self._commit_single(r1, t)
                else:
                    self._commit_pair(r1, r2, t)
        else:
            graph = build_request_graph(actives)
            if self.config.graph_observer is not None:
                self.config.graph_observer(t, graph)
            matching = _OFFLINE_PAIRERS[algo](graph, self._draw_seed("pair"))
            for a, b in matching.pairs:
                self._commit_pair(self.by_id[a], self.by_id[b], t)
        # criticals that the matcher left unmatched must commit as singles
        for rid in list(self.critical_ids):
            self._commit_single(self.by_id[rid], t)

    def _commit_pair(self, r1: Request, r2: Request, t: int):
        for r in (r1, r2):
            transition(r, "paired", t)
            self.log.append(t, "paired", r.id, None, r.src)
            self._remove_active(r.id)
        a, b = (r1, r2) if r1.id < r2.id else (r2, r1)
        self.pending_rides.append(Ride(a, b))

    def _commit_single(self, r: Request, t: int):
        transition(r, "paired", t)
        self.log.append(t, "paired", r.id, None, r.src)
        self._remove_active(r.id)
        self.pending_rides.append(Ride(r, r))

    def _remove_active(self, rid: int):
        if rid in self.open_ids:
            self.open_ids.remove(rid)
        if rid in self.critical_ids:
            self.critical_ids.remove(rid)
        if self.pg_state is not None:
            online.pg_forget(self.pg_state, rid)
        if self.gd_state is not None:
            self.gd_state.discard(rid)

    # -- step (b): ride dispatch ----------------------------------------------
    def _step_dispatch(self, t: int):
        if not self.pending_rides:
            return
        started = time.perf_counter_ns()
        free = self._free_vehicles(t)
        for v in free:
            self._materialize(v)
        algo = self.config.algo_dispatch
        if algo in _OFFLINE_PAIRERS:
            self._dispatch_offline(t, free, algo)
        elif algo == "appr":
            self._dispatch_appr(t, free)
        else:
            self._dispatch_kserver(t, free, algo)
        self.log.add_elapsed("dispatch", time.perf_counter_ns() - started)

    def _dispatch_offline(self, t: int, free: list[Vehicle], algo: str):
        if not free:
            return
        rides = list(self.pending_rides)
        graph = build_ride_taxi_graph(rides, free)
        matching = _OFFLINE_PAIRERS[algo](graph, self._draw_seed("dispatch"))
        payload = {(e.i, e.j): e.payload for e in graph.edges}
        dispatched = set()
        for a, b in matching.pairs:
            node, vid = (a, b) if a < 0 else (b, a)
            idx = ride_index(node)
            order, _ = payload[(node, vid)]
            self._dispatch(rides[idx], self.veh_by_id[vid], t, order)
            dispatched.add(idx)
        self.pending_rides = deque(r for i, r in enumerate(rides)
                                   if i not in dispatched)

    def _dispatch_appr(self, t: int, free: list[Vehicle]):
        if not free:
            return
        rides = list(self.pending_rides)
        cost = np.zeros((len(rides), len(free)))
        for ri, ride in enumerate(rides):
            for vi, v in enumerate(free):
                d = geo.manhattan_distance(v.pos, ride.r1.src)
                if not ride.single:
                    d = min(d, geo.manhattan_distance(v.pos, ride.r2.src))
                cost[ri, vi] = d
        rows, cols = linear_sum_assignment(cost)
        dispatched = set()
        for ri, vi in zip(rows, cols):
            ride, v = rides[ri], free[vi]
            order, _ = geo.shared_route_from(v.pos, ride.r1, ride.r2)
            self._dispatch(ride, v, t, order)
            dispatched.add(int(ri))
        self.pending_rides = deque(r for i, r in enumerate(rides)
                                   if i not in dispatched)

    def _dispatch_kserver(self, t: int, free: list[Vehicle], algo: str):
        free = list(free)
        while self.pending_rides and free:
            ride = self.pending_rides.popleft()
            source = self._choose_source(ride)
            ctx = kserver.DispatchContext(free, source)
            if algo == "balance":
                v = kserver.balance_choose(ctx)
            elif algo == "harmonic":
                v = kserver.harmonic_choose(ctx, seed=self._draw_seed("dispatch"))
            elif algo == "wfa":
                cands = sorted(free, key=lambda fv: (
                    geo.manhattan_distance(fv.pos, source), fv.id))
                cands = cands[:self.config.wfa_candidates]
                v = kserver.wfa_choose(self.wfa_window,
                                       kserver.DispatchContext(cands, source))
            elif algo == "dc":
                leaf = self._leaf_for(source)
                vid, _ = kserver.dc_choose(self.hst_state, leaf,
                                           [fv.id for fv in free])
                v = self.veh_by_id[vid]
            elif algo == "ktaxi":
                leaf = self._leaf_for(source)
                vid = kserver.ktaxi_choose(self.hst_state, leaf,
                                           [fv.id for fv in free],
                                           seed=self._draw_seed("dispatch"))
                v = self.veh_by_id[vid]
            else:
                raise ValueError(algo)
            order = self._order_from_source(ride, source)
            if self.wfa_window is not None:
                pts = geo.order_points(order, ride.r1, ride.r2)
                self.wfa_window.record(source, pts[-1], v)
            self._dispatch(ride, v, t, order)
            free = [fv for fv in free if fv.id != v.id]

    def _choose_source(self, ride: Ride) -> GeoPoint:
        if ride.single:
            return ride.r1.src
        rng = self._streams["source"]
        return ride.r1.src if rng.random() < 0.5 else ride.r2.src

    def _order_from_source(self, ride: Ride, source: GeoPoint) -> tuple:
        if ride.single:
            return geo.SINGLE_ORDER
        first = "s1" if source == ride.r1.src else "s2"
        candidates = [o for o in geo.SHARED_ORDERS if o[0] == first]
        return min(candidates,
                   key=lambda o: sum(geo.manhattan_distance(a, b) for a, b in
                                     zip(geo.order_points(o, ride.r1, ride.r2),
                                         geo.order_points(o, ride.r1, ride.r2)[1:])))

    def _dispatch(self, ride: Ride, v: Vehicle, t: int, order: tuple):
        self._interrupt_relocation(v)
        if v.last_dropoff_t is not None:
            v.friction_accum_s += (t - v.last_dropoff_t) * 60.0
            v.last_dropoff_t = None
        ride.order = order
        ride.assigned_vehicle = v.id
        stops = []
        pts = geo.order_points(order, ride.r1, ride.r2)
        reqs = {"s1": ride.r1, "d1": ride.r1, "s2": ride.r2, "d2": ride.r2}
        for label, pt in zip(order, pts):
            kind = "pickup" if label.startswith("s") else "dropoff"
            stops.append(Stop(kind, reqs[label].id, pt))
        self._service[v.id] = deque(stops)
        self._active_ride[v.id] = ride
        ride.v_start = v.pos
        ride.total_route_m = (geo.manhattan_distance(v.pos, pts[0]) +
                              sum(geo.manhattan_distance(a, b)
                                  for a, b in zip(pts, pts[1:])))
        for r in ride.requests:
            transition(r, "taxi_assigned", t)
            self.log.append(t, "taxi_assigned", r.id, v.id, v.pos)

    def _interrupt_relocation(self, v: Vehicle):
        leg = self._legs[v.id]
        if leg is not None and leg.stop is None:
            v.pos = leg.position()
            # charge the abandoned partial leg at metric distance
            v.odometer_m += geo.manhattan_distance(leg.start, v.pos) - leg.consumed
        self._legs[v.id] = None
        v.reloc_target = None

    # -- step (c): relocation --------------------------------------------------
    def _step_relocate(self, t: int):
        cfg = self.config
        if cfg.algo_reloc is None or t >= self.span_end:
            return
        idle = self._free_vehicles(t)
        if not idle:
            return
        started = time.perf_counter_ns()
        for v in idle:
            self._materialize(v)
        future = relocation.sample_future(
            cfg.history, t % 1440, self.params.reloc_days,
            self.params.reloc_minutes, seed=self._draw_seed("reloc"))
        actives = self._actives()
        moves = relocation.relocate(idle, actives, future, cfg.algo_reloc,
                                    seed=self._draw_seed("reloc"))
        for v, target in moves:
            if v.reloc_target is not None and \
                    geo.manhattan_distance(v.reloc_target, target) < 1e-9:
                continue
            self._interrupt_relocation(v)
            if geo.manhattan_distance(v.pos, target) < 1e-9:
                continue
            v.reloc_target = target
            self._legs[v.id] = _Leg(v.pos, target, None)
            self.log.append(t, "relocation_start", None, v.id, v.pos)
        self.log.add_elapsed("relocate", time.perf_counter_ns() - started)

    # -- motion ------------------------------------------------------------------
    def _step_motion(self, t: int):
        budget_full = self.params.speed_m_per_min
        for v in self.vehicles:
            if v.busy_until > t:
                continue  # still finishing its pre-scenario trip
            service = self._service[v.id]
            leg = self._legs[v.id]
            if leg is None and not service and v.reloc_target is None:
                continue
            budget = budget_full
            used = 0.0
            while budget > 1e-9:
                leg = self._legs[v.id]
                if leg is None:
                    leg = self._next_leg(v)
                    if leg is None:
                        break
                step = min(budget, leg.remaining)
                leg.consumed += step
                v.odometer_m += step
                budget -= step
                used += step
                if leg.remaining <= 1e-9:
                    stamp = t + used / budget_full
                    v.pos = leg.target
                    self._legs[v.id] = None
                    if leg.stop is not None:
                        self._arrive_stop(v, leg.stop, stamp)
                    else:
                        v.reloc_target = None  # reached the relocation target
            if self._legs[v.id] is not None:
                self._materialize(v)

    def _next_leg(self, v: Vehicle) -> Optional[_Leg]:
        service = self._service[v.id]
        if service:
            stop = service.popleft()
            leg = _Leg(v.pos, stop.point, stop)
        elif v.reloc_target is not None:
            leg = _Leg(v.pos, v.reloc_target, None)
        else:
            return None
        self._legs[v.id] = leg
        return leg

    def _arrive_stop(self, v: Vehicle, stop: Stop, stamp: float):
        r = self.by_id[stop.request_id]
        if stop.kind == "pickup":
            transition(r, "picked_up", stamp)
            self.log.append(stamp, "pickup", r.id, v.id, stop.point)
        else:
            transition(r, "completed", stamp)
            self.log.append(stamp, "dropoff", r.id, v.id, stop.point)
            self.completed += 1
        if not self._service[v.id] and stop.kind == "dropoff":
            self._complete_ride(v, stamp)

    def _complete_ride(self, v: Vehicle, stamp: float):
        ride = self._active_ride.pop(v.id)
        v.earnings_usd += metrics.ride_revenue(ride, ride.order,
                                               ride.v_start, self.params)
        v.last_dropoff_t = stamp
        if self.hst_state is not None:
            self.hst_state.place(v.id, self._leaf_for(v.pos))


def run(config: ScenarioConfig) -> tuple[EventLog, metrics.MetricsReport]:
    """Execute one scenario; returns the event log and the metric report."""
    return Simulation(config).run()
