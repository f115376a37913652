"""Distance functions and shared-route optimization over geo-points.

Distances use the Manhattan (L1) metric on an equirectangular projection:
R * |dlat| + R * |dlon| * cos(mean lat), angles in radians, R = 6371 km.
Vehicles travel L-shaped paths (latitude leg first, then longitude), so
path prefixes preserve Manhattan distances exactly.
"""

from __future__ import annotations

import math

from .model import GeoPoint, Request

EARTH_RADIUS_M = 6_371_000.0
_RAD = math.pi / 180.0

# The four interleaved pickup/dropoff sequences for a shared ride.  Serving
# one full trip and then the other is deliberately excluded: the ride must
# be genuinely shared.
SHARED_ORDERS = (
    ("s1", "s2", "d1", "d2"),
    ("s1", "s2", "d2", "d1"),
    ("s2", "s1", "d1", "d2"),
    ("s2", "s1", "d2", "d1"),
)

SINGLE_ORDER = ("s1", "d1")


def manhattan_distance(a: GeoPoint, b: GeoPoint) -> float:
    """L1 distance in meters between two geo-points."""
    dlat = abs(a.lat - b.lat) * _RAD
    dlon = abs(a.lon - b.lon) * _RAD
    mean_lat = 0.5 * (a.lat + b.lat) * _RAD
    return EARTH_RADIUS_M * (dlat + dlon * math.cos(mean_lat))


def order_points(order: tuple, r1: Request, r2: Request) -> list[GeoPoint]:
    """Materialize a label order into the corresponding geo-points."""
    lookup = {"s1": r1.src, "d1": r1.dst, "s2": r2.src, "d2": r2.dst}
    return [lookup[label] for label in order]


def _path_length(points: list[GeoPoint]) -> float:
    return sum(manhattan_distance(a, b) for a, b in zip(points, points[1:]))


def shared_route(r1: Request, r2: Request) -> tuple[tuple, float]:
    """Best interleaved order serving both requests, and its length.

    The minimum is over the four shared orders; ties resolve to the first
    order in SHARED_ORDERS for reproducibility.
    """
    best_order, best_len = None, math.inf
    for order in SHARED_ORDERS:
        length = _path_length(order_points(order, r1, r2))
        if length < best_len:
            best_order, best_len = order, length
    return best_order, best_len


def shared_route_from(v: GeoPoint, r1: Request, r2: Request) -> tuple[tuple, float]:
    """Best order serving the ride starting from vehicle position v.

    Minimizes approach leg plus service legs over the four shared orders;
    a singleton ride (r1 is r2) is served directly.
    """
    if r1.id == r2.id:
        return SINGLE_ORDER, manhattan_distance(v, r1.src) + manhattan_distance(r1.src, r1.dst)
    best_order, best_len = None, math.inf
    for order in SHARED_ORDERS:
        pts = order_points(order, r1, r2)
        length = manhattan_distance(v, pts[0]) + _path_length(pts)
        if length < best_len:
            best_order, best_len = order, length
    return best_order, best_len


def conditional_leg(order: tuple, r1: Request, r2: Request, which: str) -> float:
    """Distance driven from a request's pickup to its dropoff within order.

    `which` is "r1" or "r2".  For a singleton order this is the direct trip.
    """
    if order == SINGLE_ORDER or r1.id == r2.id:
        return manhattan_distance(r1.src, r1.dst)
    tag = "1" if which == "r1" else "2"
    start = order.index("s" + tag)
    end = order.index("d" + tag)
    pts = order_points(order, r1, r2)
    return _path_length(pts[start:end + 1])


def move_along(origin: GeoPoint, target: GeoPoint, budget_m: float) -> GeoPoint:
    """Advance along the L-path (latitude leg first) by at most budget_m."""
    if budget_m < 0:
        raise ValueError("budget must be non-negative")
    lat_leg = abs(target.lat - origin.lat) * _RAD * EARTH_RADIUS_M
    if budget_m <= lat_leg:
        if lat_leg == 0.0:
            new_lat = origin.lat
        else:
            frac = budget_m / lat_leg
            new_lat = origin.lat + (target.lat - origin.lat) * frac
        return GeoPoint(new_lat, origin.lon)
    rest = budget_m - lat_leg
    corner = GeoPoint(target.lat, origin.lon)
    lon_leg = manhattan_distance(corner, target)
    if rest >= lon_leg:
        return target
    frac = rest / lon_leg
    return GeoPoint(target.lat, origin.lon + (target.lon - origin.lon) * frac)
