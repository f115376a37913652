"""Shared workload builders and run-invariant checkers."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from collections import defaultdict


from ridesim import geo
from ridesim.engine import EventLog, ScenarioConfig, Simulation
from ridesim.ingest import BoundingBox, HistoryStore, WorkloadSpec, synth_generate
from ridesim.model import GeoPoint, SimParams

DEMO_BOX = BoundingBox(40.70, 40.80, -74.00, -73.90)
DEMO_CENTERS = [GeoPoint(40.72, -73.98), GeoPoint(40.78, -73.92)]


def demo_workload(duration=40, rate=1.5, seed=0, shift=0, warmup=60):
    spec = WorkloadSpec(duration_min=duration, rate_per_min=rate,
                        region=DEMO_BOX, centers=DEMO_CENTERS,
                        sigma_m=400.0, shift_every_min=shift)
    requests = synth_generate(spec, seed=seed)
    warm_spec = WorkloadSpec(duration_min=warmup, rate_per_min=rate,
                             region=DEMO_BOX, centers=DEMO_CENTERS,
                             sigma_m=400.0, start_minute=-warmup)
    warm = synth_generate(warm_spec, seed=seed + 901)
    return requests, warm, spec


def demo_history(spec, seed=0, days=3):
    store = HistoryStore(sim_day=0)
    for day in range(-days, 0):
        store.add_day(day, synth_generate(spec, seed=seed + 501 + day))
    return store


def run_scenario(pair="mwm", dispatch="mwm", reloc=None, seed=0, duration=40,
                 rate=1.5, shift=0, batch=2, fleet_multiplier=1.0, **kw):
    requests, warm, spec = demo_workload(duration=duration, rate=rate,
                                         seed=seed, shift=shift)
    history = demo_history(spec, seed=seed) if reloc else None
    config = ScenarioConfig(
        requests=requests,
        algo_pair=pair,
        algo_dispatch=dispatch,
        algo_reloc=reloc,
        params=SimParams(rng_seed=seed, batch_minutes=batch),
        fleet_multiplier=fleet_multiplier,
        warmup=warm,
        history=history,
        span_end=duration,
        **kw)
    sim = Simulation(config)
    log, report = sim.run()
    return sim, log, report


def events_by_request(log: EventLog):
    out = defaultdict(dict)
    for ev in log.events:
        if ev.request_id is not None and ev.request_id >= 0:
            out[ev.request_id][ev.kind] = ev
    return out


def check_serve_all(sim, log):
    per_request = events_by_request(log)
    expected = {r.id for r in sim.requests}
    assert set(per_request) == expected
    for rid, evs in per_request.items():
        for kind in ("open", "paired", "taxi_assigned", "pickup", "dropoff"):
            assert kind in evs, f"request {rid} missing {kind}"
        stamps = [evs["open"].t, evs["paired"].t, evs["taxi_assigned"].t,
                  evs["pickup"].t, evs["dropoff"].t]
        assert stamps == sorted(stamps), f"request {rid} timestamps not ordered"


def check_exclusivity(log: EventLog):
    """No vehicle serves two rides at once nor carries more than two."""
    rides = defaultdict(list)  # vehicle -> [(assign_t, request_ids)]
    for ev in log.events:
        if ev.kind == "taxi_assigned":
            rides[ev.vehicle_id].append((ev.t, ev.request_id))
    drops = defaultdict(dict)
    for ev in log.events:
        if ev.kind == "dropoff":
            drops[ev.vehicle_id][ev.request_id] = ev.t
    for vid, assignments in rides.items():
        groups = defaultdict(list)
        for t, rid in assignments:
            groups[t].append(rid)
        times = sorted(groups)
        for t, members in groups.items():
            assert len(members) <= 2, f"vehicle {vid} overloaded at {t}"
        for prev_t, next_t in zip(times, times[1:]):
            last_drop = max(drops[vid][rid] for rid in groups[prev_t])
            assert next_t >= last_drop - 1e-9, \
                f"vehicle {vid} double-booked at {next_t}"


def check_distance_conservation(sim, log, rel_tol=1e-6):
    per_vehicle = defaultdict(list)
    for ev in log.events:
        if ev.vehicle_id is not None and ev.kind in (
                "taxi_assigned", "pickup", "dropoff", "relocation_start"):
            per_vehicle[ev.vehicle_id].append(ev)
    total_logged = 0.0
    for v in sim.vehicles:
        evs = sorted(per_vehicle.get(v.id, []), key=lambda e: e.t)
        walked = 0.0
        prev = None
        for ev in evs:
            point = GeoPoint(ev.lat, ev.lon)
            if prev is not None:
                walked += geo.manhattan_distance(prev, point)
            prev = point
        if prev is not None:
            walked += geo.manhattan_distance(prev, v.pos)
        assert abs(walked - v.odometer_m) <= max(1.0e-6 * max(v.odometer_m, 1.0), 1e-6), \
            f"vehicle {v.id}: walked {walked} vs odometer {v.odometer_m}"
        total_logged += walked
    total_odo = sum(v.odometer_m for v in sim.vehicles)
    assert abs(total_logged - total_odo) <= 1e-6 * max(total_odo, 1.0)


def check_run_invariants(sim, log):
    check_serve_all(sim, log)
    check_exclusivity(log)
    check_distance_conservation(sim, log)
