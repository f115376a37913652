"""Shared domain types: geo-points, requests, rides, vehicles, parameters.

All simulation times are minutes since the scenario epoch.  Scheduling
happens on whole-minute ticks (ints); event timestamps carry fractional
minutes so that metrics resolve to seconds.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional


class IllegalTransition(Exception):
    """Raised when a request lifecycle event arrives out of order."""


@dataclass(frozen=True, slots=True)
class GeoPoint:
    """WGS84 coordinate pair in degrees."""

    lat: float
    lon: float

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude out of range: {self.lat}")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude out of range: {self.lon}")


class RequestState(enum.Enum):
    OPEN = "open"
    CRITICAL = "critical"
    PAIRED = "paired"
    TAXI_ASSIGNED = "taxi_assigned"
    PICKED_UP = "picked_up"
    COMPLETED = "completed"


# event name -> (legal predecessor states, timestamp attribute)
_TRANSITIONS = {
    "critical": ({RequestState.OPEN}, None),
    "paired": ({RequestState.OPEN, RequestState.CRITICAL}, "t_paired"),
    "taxi_assigned": ({RequestState.PAIRED}, "t_taxi"),
    "picked_up": ({RequestState.TAXI_ASSIGNED}, "t_pickup"),
    "completed": ({RequestState.PICKED_UP}, "t_dest"),
}

_EVENT_STATE = {
    "critical": RequestState.CRITICAL,
    "paired": RequestState.PAIRED,
    "taxi_assigned": RequestState.TAXI_ASSIGNED,
    "picked_up": RequestState.PICKED_UP,
    "completed": RequestState.COMPLETED,
}


@dataclass(slots=True)
class Request:
    """One customer trip and its lifecycle bookkeeping."""

    id: int
    t_open: int
    src: GeoPoint
    dst: GeoPoint
    k_wait: int
    state: RequestState = RequestState.OPEN
    t_paired: Optional[float] = None
    t_taxi: Optional[float] = None
    t_pickup: Optional[float] = None
    t_dest: Optional[float] = None

    @property
    def active(self) -> bool:
        return self.state in (RequestState.OPEN, RequestState.CRITICAL)

    @property
    def phantom(self) -> bool:
        return False


def transition(request: Request, event: str, at: float) -> Request:
    """Advance the request lifecycle, recording the event timestamp once.

    Raises IllegalTransition if the event is not a legal successor of the
    current state or if it would move a timestamp backwards.
    """
    if event not in _TRANSITIONS:
        raise IllegalTransition(f"unknown lifecycle event {event!r}")
    legal_from, stamp_attr = _TRANSITIONS[event]
    if request.state not in legal_from:
        raise IllegalTransition(
            f"request {request.id}: cannot apply {event!r} in state {request.state.value}"
        )
    last = _latest_stamp(request)
    if last is not None and at < last - 1e-9:
        raise IllegalTransition(
            f"request {request.id}: event {event!r} at {at} precedes {last}"
        )
    if stamp_attr is not None:
        setattr(request, stamp_attr, float(at))
    request.state = _EVENT_STATE[event]
    return request


def _latest_stamp(request: Request) -> Optional[float]:
    for attr in ("t_dest", "t_pickup", "t_taxi", "t_paired"):
        value = getattr(request, attr)
        if value is not None:
            return value
    return float(request.t_open)


@dataclass(slots=True)
class Stop:
    """A single itinerary stop event."""

    kind: str  # "pickup" | "dropoff"
    request_id: int
    point: GeoPoint


@dataclass(slots=True)
class Ride:
    """A committed ride: a pair of requests, or a singleton (r1 is r2)."""

    r1: Request
    r2: Request
    order: tuple = ()  # stop-label sequence committed at dispatch
    total_route_m: float = 0.0
    assigned_vehicle: Optional[int] = None
    v_start: Optional[GeoPoint] = None  # vehicle position at assignment

    @property
    def single(self) -> bool:
        return self.r1.id == self.r2.id

    @property
    def requests(self) -> tuple[Request, ...]:
        return (self.r1,) if self.single else (self.r1, self.r2)


@dataclass(slots=True)
class Vehicle:
    """A taxi: position, cumulative distance, schedule and earnings."""

    id: int
    pos: GeoPoint
    odometer_m: float = 0.0
    busy_until: float = 0.0
    earnings_usd: float = 0.0
    last_dropoff_t: Optional[float] = None
    friction_accum_s: float = 0.0
    itinerary: list = field(default_factory=list)  # of Stop
    reloc_target: Optional[GeoPoint] = None

    @property
    def serving(self) -> bool:
        return bool(self.itinerary)


@dataclass(slots=True)
class SimParams:
    """Scenario constants; defaults follow the reference setup."""

    w_min: int = 1
    w_max: int = 3
    q: float = 0.1
    speed_mps: float = 6.2
    beta_usd: float = 2.2
    pi_single_usd_per_km: float = 0.994
    pi_shared_usd_per_km: float = 0.8
    cost_usd_per_km: float = 0.0686
    commission: float = 0.25
    batch_minutes: int | str = 2  # 1, 2 or "jit"
    reloc_days: int = 3
    reloc_minutes: int = 2
    rng_seed: int = 0

    def __post_init__(self):
        if self.w_min <= 0 or self.w_max < self.w_min:
            raise ValueError("require 0 < w_min <= w_max")
        for name in ("q", "speed_mps", "beta_usd", "pi_single_usd_per_km",
                     "pi_shared_usd_per_km", "cost_usd_per_km"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.commission <= 1.0:
            raise ValueError("commission must lie in [0, 1]")
        if self.batch_minutes != "jit" and int(self.batch_minutes) < 1:
            raise ValueError("batch_minutes must be 'jit' or a positive int")

    @property
    def speed_m_per_min(self) -> float:
        return self.speed_mps * 60.0


def request_waiting_budget(expected_trip_s: float, params: SimParams) -> int:
    """Waiting budget in whole minutes, proportional to trip time.

    Rounds half-up before clamping to [w_min, w_max].
    """
    if expected_trip_s < 0:
        raise ValueError("trip time must be non-negative")
    minutes = params.q * (expected_trip_s / 60.0)
    rounded = math.floor(minutes + 0.5)
    return max(params.w_min, min(params.w_max, rounded))
