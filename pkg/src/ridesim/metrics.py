"""Pricing and end-of-run metric aggregation from the event log.

Revenue per ride combines a flag-drop fee, a per-km distance fare (single
or shared rate) and a fuel cost over the whole driven route.  The report
aggregates per-request waiting components, per-vehicle profit and friction
gaps, using population variance for all standard deviations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from . import geo
from .model import GeoPoint, Ride, SimParams, Vehicle


class IncompleteLog(Exception):
    """The event log has requests that never completed."""


def ride_revenue(ride: Ride, order: tuple, v_start: GeoPoint,
                 params: SimParams) -> float:
    """Driver revenue for one served ride, in dollars.

    Single: beta + pi_I * d(s, d) - c * d(v, s, d).
    Shared: 2 beta + pi_II * (both conditional legs) - c * full route.
    All distances in km.
    """
    if ride.single:
        trip = geo.manhattan_distance(ride.r1.src, ride.r1.dst) / 1000.0
        route = (geo.manhattan_distance(v_start, ride.r1.src) / 1000.0) + trip
        return (params.beta_usd + params.pi_single_usd_per_km * trip -
                params.cost_usd_per_km * route)
    leg1 = geo.conditional_leg(order, ride.r1, ride.r2, "r1") / 1000.0
    leg2 = geo.conditional_leg(order, ride.r1, ride.r2, "r2") / 1000.0
    pts = geo.order_points(order, ride.r1, ride.r2)
    route = (geo.manhattan_distance(v_start, pts[0]) +
             sum(geo.manhattan_distance(a, b) for a, b in zip(pts, pts[1:]))) / 1000.0
    return (2.0 * params.beta_usd +
            params.pi_shared_usd_per_km * (leg1 + leg2) -
            params.cost_usd_per_km * route)


def gross_fare(single: bool, trip_m: float, leg1_m: float, leg2_m: float,
               params: SimParams) -> float:
    """Passenger-side charges for one ride (commission base)."""
    if single:
        return params.beta_usd + params.pi_single_usd_per_km * trip_m / 1000.0
    return (2.0 * params.beta_usd +
            params.pi_shared_usd_per_km * (leg1_m + leg2_m) / 1000.0)


def _mean_sd(values: list[float]) -> tuple[float, float]:
    if not values:
        return 0.0, 0.0
    mean = sum(values) / len(values)
    var = sum((v - mean) ** 2 for v in values) / len(values)
    return mean, math.sqrt(var)


@dataclass
class MetricsReport:
    """All end-of-run metrics; means and SDs over completed requests."""

    n_requests: int = 0
    distance_driven_m: float = 0.0
    elapsed_ns: dict = field(default_factory=dict)
    time_to_pair_s: float = 0.0
    time_to_pair_sd: float = 0.0
    time_to_pair_taxi_s: float = 0.0
    time_to_pair_taxi_sd: float = 0.0
    time_to_pickup_s: float = 0.0
    time_to_pickup_sd: float = 0.0
    delay_s: float = 0.0
    delay_sd: float = 0.0
    cumulative_delay_s: float = 0.0
    driver_profit_mean_usd: float = 0.0
    driver_profit_max_usd: float = 0.0
    driver_profit_min_usd: float = 0.0
    driver_profit_sd: float = 0.0
    platform_profit_usd: float = 0.0
    shared_ride_count: int = 0
    frictions_s: float = 0.0
    frictions_sd: float = 0.0

    CSV_COLUMNS = (
        "n_requests", "distance_driven_m", "elapsed_total_ns",
        "time_to_pair_s", "time_to_pair_sd",
        "time_to_pair_taxi_s", "time_to_pair_taxi_sd",
        "time_to_pickup_s", "time_to_pickup_sd",
        "delay_s", "delay_sd", "cumulative_delay_s",
        "driver_profit_mean_usd", "driver_profit_sd",
        "driver_profit_max_usd", "driver_profit_min_usd",
        "platform_profit_usd", "shared_ride_count",
        "frictions_s", "frictions_sd",
    )

    def csv_row(self) -> list:
        total_ns = sum(self.elapsed_ns.values())
        data = {c: getattr(self, c) for c in self.CSV_COLUMNS if c != "elapsed_total_ns"}
        data["elapsed_total_ns"] = total_ns
        return [data[c] for c in self.CSV_COLUMNS]

    def to_json(self) -> str:
        payload = {c: v for c, v in zip(self.CSV_COLUMNS, self.csv_row())}
        payload["elapsed_ns"] = dict(self.elapsed_ns)
        return json.dumps(payload, indent=2, sort_keys=True)


def finalize(log, fleet: list[Vehicle], params: SimParams) -> MetricsReport:
    """Compute the full report from a completed event log.

    The log alone carries every per-request timestamp and every stop
    position, so waiting components, fares and friction gaps are derived
    without consulting simulator internals.
    """
    opened: dict[int, tuple[float, GeoPoint]] = {}
    paired: dict[int, float] = {}
    assigned: dict[int, tuple[float, int, GeoPoint]] = {}
    picked: dict[int, tuple[float, GeoPoint]] = {}
    dropped: dict[int, tuple[float, GeoPoint]] = {}
    by_vehicle_time: dict[tuple[int, float], list[int]] = {}

    for ev in log.events:
        if ev.kind == "open":
            opened[ev.request_id] = (ev.t, GeoPoint(ev.lat, ev.lon))
        elif ev.kind == "paired":
            paired[ev.request_id] = ev.t
        elif ev.kind == "taxi_assigned":
            assigned[ev.request_id] = (ev.t, ev.vehicle_id, GeoPoint(ev.lat, ev.lon))
            by_vehicle_time.setdefault((ev.vehicle_id, ev.t), []).append(ev.request_id)
        elif ev.kind == "pickup":
            picked[ev.request_id] = (ev.t, GeoPoint(ev.lat, ev.lon))
        elif ev.kind == "dropoff":
            dropped[ev.request_id] = (ev.t, GeoPoint(ev.lat, ev.lon))

    missing = [rid for rid in opened if rid not in dropped]
    if missing:
        raise IncompleteLog(f"{len(missing)} requests never completed "
                            f"(e.g. {sorted(missing)[:5]})")

    pair_c, pair_taxi_c, pickup_c, delay_c = [], [], [], []
    for rid, (t_open, src) in sorted(opened.items()):
        t_paired = paired[rid]
        t_taxi = assigned[rid][0]
        t_pickup = picked[rid][0]
        t_dest, dst = dropped[rid]
        pair_c.append((t_paired - t_open) * 60.0)
        pair_taxi_c.append((t_taxi - t_paired) * 60.0)
        pickup_c.append((t_pickup - t_taxi) * 60.0)
        direct_s = geo.manhattan_distance(src, dst) / params.speed_mps
        delay_c.append((t_dest - t_pickup) * 60.0 - direct_s)

    report = MetricsReport(n_requests=len(opened))
    report.time_to_pair_s, report.time_to_pair_sd = _mean_sd(pair_c)
    report.time_to_pair_taxi_s, report.time_to_pair_taxi_sd = _mean_sd(pair_taxi_c)
    report.time_to_pickup_s, report.time_to_pickup_sd = _mean_sd(pickup_c)
    report.delay_s, report.delay_sd = _mean_sd(delay_c)
    report.cumulative_delay_s = (report.time_to_pair_s + report.time_to_pair_taxi_s +
                                 report.time_to_pickup_s + report.delay_s)

    gross_total = 0.0
    shared = 0
    for (vid, t), rids in sorted(by_vehicle_time.items()):
        if len(rids) == 1:
            rid = rids[0]
            trip = geo.manhattan_distance(opened[rid][1], dropped[rid][1])
            gross_total += gross_fare(True, trip, 0.0, 0.0, params)
        else:
            shared += 1
            legs = []
            for rid in rids:
                legs.append(_driven_leg(rid, rids, picked, dropped))
            gross_total += gross_fare(False, 0.0, legs[0], legs[1], params)

    report.shared_ride_count = shared
    report.platform_profit_usd = params.commission * gross_total

    earnings = [v.earnings_usd for v in fleet]
    if earnings:
        report.driver_profit_mean_usd, report.driver_profit_sd = _mean_sd(earnings)
        report.driver_profit_max_usd = max(earnings)
        report.driver_profit_min_usd = min(earnings)
    report.distance_driven_m = sum(v.odometer_m for v in fleet)
    report.elapsed_ns = dict(log.elapsed_ns)

    frictions = []
    by_vehicle_events: dict[int, list[tuple[float, str]]] = {}
    for ev in log.events:
        if ev.kind in ("taxi_assigned", "dropoff") and ev.vehicle_id is not None:
            by_vehicle_events.setdefault(ev.vehicle_id, []).append((ev.t, ev.kind))
    for vid, evs in sorted(by_vehicle_events.items()):
        evs.sort(key=lambda e: (e[0], e[1] != "dropoff"))
        last_drop = None
        for t, kind in evs:
            if kind == "dropoff":
                last_drop = t
            elif last_drop is not None:
                frictions.append((t - last_drop) * 60.0)
                last_drop = None
    report.frictions_s, report.frictions_sd = _mean_sd(frictions)
    return report


def _driven_leg(rid: int, rids: list[int], picked, dropped) -> float:
    """Distance driven between a request's pickup and dropoff, summed over
    the actual stop sequence recorded in the log."""
    stops = []
    for other in rids:
        stops.append((picked[other][0], picked[other][1]))
        stops.append((dropped[other][0], dropped[other][1]))
    stops.sort(key=lambda s: s[0])
    t_pick, t_drop = picked[rid][0], dropped[rid][0]
    total = 0.0
    for (t_a, p_a), (t_b, p_b) in zip(stops, stops[1:]):
        if t_pick <= t_a and t_b <= t_drop:
            total += geo.manhattan_distance(p_a, p_b)
    return total
