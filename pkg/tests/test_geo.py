import math
import random

import pytest

from ridesim import geo
from ridesim.model import GeoPoint, Request


def rand_point(rng, box=(40.70, 40.88, -74.02, -73.906)):
    return GeoPoint(rng.uniform(box[0], box[1]), rng.uniform(box[2], box[3]))


def rand_request(rng, rid):
    return Request(rid, 0, rand_point(rng), rand_point(rng), 2)


def collinear_requests(offsets_m=(0.0, 100.0, 400.0, 500.0)):
    """s1, s2, d1, d2 on one meridian at the given meter offsets."""
    lat0, lon0 = 40.75, -73.99
    deg = lambda m: lat0 + m / geo.EARTH_RADIUS_M * 180.0 / math.pi
    s1, s2, d1, d2 = (GeoPoint(deg(m), lon0) for m in offsets_m)
    return Request(1, 0, s1, d1, 2), Request(2, 0, s2, d2, 2)


class TestManhattanDistance:
    def test_identity(self):
        p = GeoPoint(40.75, -73.99)
        assert geo.manhattan_distance(p, p) == 0.0

    def test_pure_latitude_leg(self):
        # R * 0.01 deg in radians; lon contributes nothing
        a = GeoPoint(40.75, -73.99)
        b = GeoPoint(40.76, -73.99)
        expected = geo.EARTH_RADIUS_M * 0.01 * math.pi / 180.0
        assert geo.manhattan_distance(a, b) == pytest.approx(expected, rel=1e-12)
        assert geo.manhattan_distance(a, b) == pytest.approx(1111.9493, abs=1e-3)

    def test_symmetry_and_nonnegativity(self):
        rng = random.Random(7)
        for _ in range(200):
            a, b = rand_point(rng), rand_point(rng)
            d = geo.manhattan_distance(a, b)
            assert d >= 0
            assert d == geo.manhattan_distance(b, a)

    def test_triangle_inequality_random_triples(self):
        # the pair-mean cosine varies with latitude, so the inequality holds
        # only up to the equirectangular approximation error (~5e-4 here)
        rng = random.Random(11)
        for _ in range(1000):
            a, b, c = (rand_point(rng) for _ in range(3))
            d_ac = geo.manhattan_distance(a, c)
            via = geo.manhattan_distance(a, b) + geo.manhattan_distance(b, c)
            assert d_ac <= via * (1.0 + 5e-4) + 1e-9


class TestSharedRoute:
    def test_collinear_example(self):
        r1, r2 = collinear_requests()
        order, length = geo.shared_route(r1, r2)
        assert order == ("s1", "s2", "d1", "d2")
        assert length == pytest.approx(500.0, rel=1e-6)

    def test_symmetric_swap_same_length(self):
        rng = random.Random(3)
        for k in range(50):
            r1, r2 = rand_request(rng, 1), rand_request(rng, 2)
            swapped_r1 = Request(1, 0, r2.src, r2.dst, 2)
            swapped_r2 = Request(2, 0, r1.src, r1.dst, 2)
            assert geo.shared_route(r1, r2)[1] == pytest.approx(
                geo.shared_route(swapped_r1, swapped_r2)[1], rel=1e-12)

    def test_never_exceeds_any_single_order(self):
        rng = random.Random(5)
        for _ in range(100):
            r1, r2 = rand_request(rng, 1), rand_request(rng, 2)
            _, best = geo.shared_route(r1, r2)
            fixed = (geo.manhattan_distance(r1.src, r2.src) +
                     geo.manhattan_distance(r2.src, r1.dst) +
                     geo.manhattan_distance(r1.dst, r2.dst))
            assert best <= fixed + 1e-9

    def test_minimum_over_enumerated_orders(self):
        rng = random.Random(9)
        for _ in range(100):
            r1, r2 = rand_request(rng, 1), rand_request(rng, 2)
            _, best = geo.shared_route(r1, r2)
            lookup = {"s1": r1.src, "d1": r1.dst, "s2": r2.src, "d2": r2.dst}
            brute = min(
                sum(geo.manhattan_distance(lookup[a], lookup[b])
                    for a, b in zip(order, order[1:]))
                for order in geo.SHARED_ORDERS)
            assert best == pytest.approx(brute, rel=1e-12)


class TestSharedRouteFrom:
    def test_vehicle_at_first_pickup_adds_nothing(self):
        r1, r2 = collinear_requests()
        _, base = geo.shared_route(r1, r2)
        _, from_v = geo.shared_route_from(r1.src, r1, r2)
        assert from_v == pytest.approx(base, rel=1e-12)

    def test_single_ride_concatenates_legs(self):
        rng = random.Random(2)
        r = rand_request(rng, 1)
        v = rand_point(rng)
        _, total = geo.shared_route_from(v, r, r)
        expected = (geo.manhattan_distance(v, r.src) +
                    geo.manhattan_distance(r.src, r.dst))
        assert total == pytest.approx(expected, rel=1e-12)

    def test_never_below_shared_route(self):
        rng = random.Random(13)
        for _ in range(100):
            r1, r2 = rand_request(rng, 1), rand_request(rng, 2)
            v = rand_point(rng)
            assert (geo.shared_route_from(v, r1, r2)[1] >=
                    geo.shared_route(r1, r2)[1] - 1e-9)


class TestConditionalLeg:
    def test_collinear_legs(self):
        r1, r2 = collinear_requests()
        order = ("s1", "s2", "d1", "d2")
        # driven distance from each pickup to its dropoff along the order
        assert geo.conditional_leg(order, r1, r2, "r1") == pytest.approx(400.0, rel=1e-6)
        assert geo.conditional_leg(order, r1, r2, "r2") == pytest.approx(400.0, rel=1e-6)

    def test_single_ride_is_direct_trip(self):
        rng = random.Random(4)
        r = rand_request(rng, 1)
        assert geo.conditional_leg(geo.SINGLE_ORDER, r, r, "r1") == pytest.approx(
            geo.manhattan_distance(r.src, r.dst))

    def test_legs_cover_the_route_between_endpoints(self):
        rng = random.Random(6)
        for _ in range(50):
            r1, r2 = rand_request(rng, 1), rand_request(rng, 2)
            order, total = geo.shared_route(r1, r2)
            pts = geo.order_points(order, r1, r2)
            leg1 = geo.conditional_leg(order, r1, r2, "r1")
            first_leg = geo.manhattan_distance(pts[0], pts[1])
            last_leg = geo.manhattan_distance(pts[2], pts[3])
            # the interleaved middle legs belong to both passengers
            leg2 = geo.conditional_leg(order, r1, r2, "r2")
            assert leg1 + leg2 == pytest.approx(total + (total - first_leg - last_leg),
                                                rel=1e-9)


class TestMoveAlong:
    def test_budget_covers_distance(self):
        rng = random.Random(8)
        a, b = rand_point(rng), rand_point(rng)
        d = geo.manhattan_distance(a, b)
        assert geo.move_along(a, b, d * 1.5) == b

    def test_zero_budget(self):
        rng = random.Random(8)
        a, b = rand_point(rng), rand_point(rng)
        assert geo.move_along(a, b, 0.0) == a

    def test_half_latitude_leg_moves_latitude_only(self):
        a = GeoPoint(40.75, -73.99)
        b = GeoPoint(40.76, -73.95)
        lat_leg = geo.EARTH_RADIUS_M * 0.01 * math.pi / 180.0
        q = geo.move_along(a, b, lat_leg / 2.0)
        assert q.lon == a.lon
        assert q.lat == pytest.approx(40.755, abs=1e-9)
        assert geo.manhattan_distance(a, q) == pytest.approx(lat_leg / 2.0, rel=1e-9)

    def test_path_additivity_within_projection_error(self):
        # the pair-mean cosine makes the metric additive along L-paths only
        # up to the equirectangular approximation (~1e-4 relative here)
        rng = random.Random(10)
        worst = 0.0
        for _ in range(200):
            a, b = rand_point(rng), rand_point(rng)
            d = geo.manhattan_distance(a, b)
            if d == 0:
                continue
            q = geo.move_along(a, b, rng.uniform(0, d))
            total = geo.manhattan_distance(a, q) + geo.manhattan_distance(q, b)
            worst = max(worst, abs(total - d) / d)
        assert worst < 5e-4

    def test_negative_budget_rejected(self):
        a = GeoPoint(40.75, -73.99)
        with pytest.raises(ValueError):
            geo.move_along(a, a, -1.0)
