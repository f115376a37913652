"""Trip-record ingestion, history store and synthetic workload generation.

The loader consumes the 2016 yellow-cab CSV schema subset; cleaning drops
sub-minute trips and out-of-region endpoints and assigns each request its
waiting budget.  The history store answers minute-of-day window queries
over days strictly before the simulated one.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from typing import Iterable, Optional

import numpy as np

from . import geo
from .model import GeoPoint, Request, SimParams, request_waiting_budget


class SchemaError(Exception):
    """Required columns are missing from a trip file."""


REQUIRED_COLUMNS = (
    "tpep_pickup_datetime",
    "tpep_dropoff_datetime",
    "pickup_longitude",
    "pickup_latitude",
    "dropoff_longitude",
    "dropoff_latitude",
)


@dataclass(frozen=True, slots=True)
class BoundingBox:
    min_lat: float
    max_lat: float
    min_lon: float
    max_lon: float

    def contains(self, p: GeoPoint) -> bool:
        return (self.min_lat <= p.lat <= self.max_lat and
                self.min_lon <= p.lon <= self.max_lon)

    def center(self) -> GeoPoint:
        return GeoPoint(0.5 * (self.min_lat + self.max_lat),
                        0.5 * (self.min_lon + self.max_lon))


# Rectangular borough approximations; the region filter is a box test.
BOROUGH_BOXES: dict[str, BoundingBox] = {
    "manhattan": BoundingBox(40.700, 40.882, -74.022, -73.906),
    "bronx": BoundingBox(40.785, 40.917, -73.935, -73.765),
    "brooklyn": BoundingBox(40.551, 40.740, -74.046, -73.833),
    "queens": BoundingBox(40.541, 40.802, -73.963, -73.700),
    "staten_island": BoundingBox(40.477, 40.652, -74.259, -74.034),
}


class Region:
    """A named union of borough boxes, or a single explicit box."""

    def __init__(self, boxes: list[BoundingBox], name: str = "custom"):
        if not boxes:
            raise ValueError("region needs at least one box")
        self.boxes = boxes
        self.name = name

    @classmethod
    def named(cls, name: str) -> "Region":
        key = name.strip().lower()
        if key == "nyc":
            return cls(list(BOROUGH_BOXES.values()), "nyc")
        if key in BOROUGH_BOXES:
            return cls([BOROUGH_BOXES[key]], key)
        raise KeyError(f"unknown region {name!r}")

    def contains(self, p: GeoPoint) -> bool:
        return any(b.contains(p) for b in self.boxes)

    def envelope(self) -> BoundingBox:
        return BoundingBox(min(b.min_lat for b in self.boxes),
                           max(b.max_lat for b in self.boxes),
                           min(b.min_lon for b in self.boxes),
                           max(b.max_lon for b in self.boxes))


@dataclass(slots=True)
class RawTrip:
    pickup_dt: datetime
    dropoff_dt: datetime
    pickup: GeoPoint
    dropoff: GeoPoint


def load_trips(path, region: Optional[Region] = None,
               day_range: Optional[tuple[date, date]] = None
               ) -> tuple[list[RawTrip], int]:
    """Parse trips; returns (trips, number of malformed rows skipped)."""
    trips: list[RawTrip] = []
    skipped = 0
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise IOError(f"cannot open trip file {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"missing columns: {', '.join(missing)}")
        for row in reader:
            try:
                pickup_dt = _parse_dt(row["tpep_pickup_datetime"])
                dropoff_dt = _parse_dt(row["tpep_dropoff_datetime"])
                pickup = GeoPoint(float(row["pickup_latitude"]),
                                  float(row["pickup_longitude"]))
                dropoff = GeoPoint(float(row["dropoff_latitude"]),
                                   float(row["dropoff_longitude"]))
            except (ValueError, TypeError):
                skipped += 1
                continue
            if day_range is not None:
                d = pickup_dt.date()
                if not day_range[0] <= d <= day_range[1]:
                    continue
            if region is not None and not (region.contains(pickup) and
                                           region.contains(dropoff)):
                continue
            trips.append(RawTrip(pickup_dt, dropoff_dt, pickup, dropoff))
    return trips, skipped


def _parse_dt(text: str) -> datetime:
    return datetime.strptime(text.strip(), "%Y-%m-%d %H:%M:%S")


def clean(trips: Iterable[RawTrip], region: Region, params: SimParams,
          epoch: Optional[datetime] = None) -> list[Request]:
    """Drop sub-minute and out-of-region trips, assign waiting budgets.

    Request times are whole minutes since `epoch` (default: midnight of
    the earliest trip).  Output is sorted by opening time.
    """
    trips = sorted(trips, key=lambda t: t.pickup_dt)
    if not trips:
        return []
    if epoch is None:
        first = trips[0].pickup_dt
        epoch = first.replace(hour=0, minute=0, second=0, microsecond=0)
    out: list[Request] = []
    next_id = 0
    for trip in trips:
        if (trip.dropoff_dt - trip.pickup_dt) < timedelta(minutes=1):
            continue
        if not (region.contains(trip.pickup) and region.contains(trip.dropoff)):
            continue
        t_open = int((trip.pickup_dt - epoch).total_seconds() // 60)
        if t_open < 0:
            continue
        trip_s = geo.manhattan_distance(trip.pickup, trip.dropoff) / params.speed_mps
        out.append(Request(
            id=next_id,
            t_open=t_open,
            src=trip.pickup,
            dst=trip.dropoff,
            k_wait=request_waiting_budget(trip_s, params),
        ))
        next_id += 1
    return out


class HistoryStore:
    """Per-day request sets for window queries over prior days."""

    def __init__(self, sim_day):
        self.sim_day = sim_day
        self._days: dict = {}

    def add_day(self, day, requests: list[Request]) -> None:
        if day >= self.sim_day:
            raise ValueError("history must predate the simulated day")
        self._days[day] = sorted(requests, key=lambda r: (r.t_open, r.id))

    def days(self) -> list:
        return sorted(self._days)

    def window(self, t: int, days_back: int, minutes_back: int) -> list[Request]:
        """Requests from each of the `days_back` most recent stored days
        whose minute-of-day lies in [t - minutes_back, t]."""
        if days_back < 1:
            raise ValueError("days_back must be >= 1")
        if minutes_back < 0:
            raise ValueError("minutes_back must be non-negative")
        lo, hi = t - minutes_back, t
        out = []
        for day in self.days()[-days_back:]:
            for r in self._days[day]:
                if lo <= r.t_open <= hi:
                    out.append(r)
        return out


def history_window(store: HistoryStore, t: int, days_back: int,
                   minutes_back: int) -> list[Request]:
    return store.window(t, days_back, minutes_back)


@dataclass
class WorkloadSpec:
    """Synthetic demand: Poisson arrivals over a hot-spot mixture.

    With shift_every_min > 0 the source hot-spot rotates through `centers`;
    otherwise sources mix over all centers uniformly.  Destinations are
    uniform over the region box, or mix over `dest_centers` when given.
    """

    duration_min: int
    rate_per_min: float
    region: BoundingBox
    centers: list[GeoPoint]
    sigma_m: float = 250.0
    shift_every_min: int = 0
    dest_centers: list[GeoPoint] = field(default_factory=list)
    start_minute: int = 0

    def __post_init__(self):
        if self.duration_min < 0 or self.rate_per_min < 0:
            raise ValueError("duration and rate must be non-negative")
        if not self.centers:
            raise ValueError("at least one hot-spot center required")


def synth_generate(spec: WorkloadSpec, seed: int = 0,
                   id_base: int = 0) -> list[Request]:
    """Deterministic synthetic workload for the given seed."""
    rng = np.random.default_rng(seed)
    params = SimParams()
    out: list[Request] = []
    next_id = id_base
    lat_span = spec.region.max_lat - spec.region.min_lat
    lon_span = spec.region.max_lon - spec.region.min_lon
    for minute in range(spec.duration_min):
        count = int(rng.poisson(spec.rate_per_min))
        if spec.shift_every_min > 0:
            active = (minute // spec.shift_every_min) % len(spec.centers)
        else:
            active = None
        for _ in range(count):
            if active is None:
                center = spec.centers[int(rng.integers(len(spec.centers)))]
            else:
                center = spec.centers[active]
            src = _jitter(center, spec.sigma_m, rng, spec.region)
            if spec.dest_centers:
                dcenter = spec.dest_centers[int(rng.integers(len(spec.dest_centers)))]
                dst = _jitter(dcenter, spec.sigma_m, rng, spec.region)
            else:
                dst = GeoPoint(spec.region.min_lat + lat_span * rng.random(),
                               spec.region.min_lon + lon_span * rng.random())
            trip_s = geo.manhattan_distance(src, dst) / params.speed_mps
            out.append(Request(
                id=next_id,
                t_open=spec.start_minute + minute,
                src=src,
                dst=dst,
                k_wait=request_waiting_budget(trip_s, params),
            ))
            next_id += 1
    return out


def _jitter(center: GeoPoint, sigma_m: float, rng, box: BoundingBox) -> GeoPoint:
    dlat = rng.normal(0.0, sigma_m) / geo.EARTH_RADIUS_M * (180.0 / math.pi)
    scale = math.cos(math.radians(center.lat))
    dlon = rng.normal(0.0, sigma_m) / (geo.EARTH_RADIUS_M * scale) * (180.0 / math.pi)
    lat = min(max(center.lat + dlat, box.min_lat), box.max_lat)
    lon = min(max(center.lon + dlon, box.min_lon), box.max_lon)
    return GeoPoint(lat, lon)


def load_workload_spec(path) -> WorkloadSpec:
    """Parse the plain key-value workload format (`key = value` lines,
    `#` comments; centers as `lat,lon` pairs separated by `;`)."""
    fields: dict[str, str] = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"bad workload line: {line!r}")
            key, value = line.split("=", 1)
            fields[key.strip()] = value.strip()
    return workload_from_fields(fields)


def workload_from_fields(fields: dict[str, str]) -> WorkloadSpec:
    def parse_points(text: str) -> list[GeoPoint]:
        pts = []
        for chunk in text.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            lat, lon = chunk.split(",")
            pts.append(GeoPoint(float(lat), float(lon)))
        return pts

    try:
        box_vals = [float(x) for x in fields["region"].split(",")]
        spec = WorkloadSpec(
            duration_min=int(fields["duration_min"]),
            rate_per_min=float(fields["rate_per_min"]),
            region=BoundingBox(*box_vals),
            centers=parse_points(fields["centers"]),
            sigma_m=float(fields.get("sigma_m", 250.0)),
            shift_every_min=int(fields.get("shift_every_min", 0)),
            dest_centers=parse_points(fields.get("dest_centers", "")),
            start_minute=int(fields.get("start_minute", 0)),
        )
    except KeyError as exc:
        raise ValueError(f"workload spec missing key: {exc.args[0]}") from exc
    return spec
