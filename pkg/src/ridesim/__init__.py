"""Ridesharing fleet simulator and algorithm library.

Pairs trip requests into shared rides, dispatches taxis, relocates the
idle fleet toward demand sampled from history, and reports distance,
waiting, profit and friction metrics for every run.
"""

from .engine import (EventLog, ScenarioConfig, Simulation, compute_base_fleet,
                     initial_fleet, run)
from .ingest import (BoundingBox, HistoryStore, Region, WorkloadSpec, clean,
                     load_trips, synth_generate)
from .metrics import MetricsReport, finalize, ride_revenue
from .model import (GeoPoint, Request, RequestState, Ride, SimParams, Stop,
                    Vehicle, request_waiting_budget, transition)

__all__ = [
    "BoundingBox", "EventLog", "GeoPoint", "HistoryStore", "MetricsReport",
    "Region", "Request", "RequestState", "Ride", "ScenarioConfig",
    "SimParams", "Simulation", "Stop", "Vehicle", "WorkloadSpec", "clean",
    "compute_base_fleet", "finalize", "initial_fleet", "load_trips",
    "request_waiting_budget", "ride_revenue", "run", "synth_generate",
    "transition",
]

__version__ = "0.1.0"
