import math
import random

import pytest

from ridesim.ingest import HistoryStore
from ridesim.model import GeoPoint, Request, Vehicle
from ridesim.relocation import ExpectedRequest, relocate, sample_future

from test_geo import rand_point


def store_with(days: dict[int, list[Request]], sim_day=10) -> HistoryStore:
    store = HistoryStore(sim_day=sim_day)
    for day, reqs in days.items():
        store.add_day(day, reqs)
    return store


def req_at(rid, minute, src, dst=None):
    return Request(rid, minute, src, dst or GeoPoint(40.80, -73.92), 2)


class TestSampleFuture:
    def test_empty_history(self):
        store = store_with({})
        assert sample_future(store, 480, 3, 2, seed=1) == []

    def test_one_per_day_samples_one(self):
        src = GeoPoint(40.75, -73.99)
        days = {d: [req_at(d, 480, src)] for d in (7, 8, 9)}
        out = sample_future(store_with(days), 480, 3, 2, seed=2)
        # window has 3 entries, one day's share is ceil(3/3) = 1
        assert len(out) == 1
        assert out[0].phantom

    def test_deterministic_per_seed(self):
        rng = random.Random(1)
        days = {d: [req_at(d * 100 + k, 480 + k % 3, rand_point(rng))
                    for k in range(6)] for d in (7, 8, 9)}
        store = store_with(days)
        a = sample_future(store, 481, 3, 2, seed=5)
        b = sample_future(store, 481, 3, 2, seed=5)
        assert [(r.src, r.dst) for r in a] == [(r.src, r.dst) for r in b]

    def test_share_size(self):
        rng = random.Random(2)
        days = {d: [req_at(d * 100 + k, 480, rand_point(rng))
                    for k in range(8)] for d in (8, 9)}
        out = sample_future(store_with(days), 480, 2, 0, seed=3)
        assert len(out) == math.ceil(16 / 2)

    def test_phantoms_never_alias_real_ids(self):
        src = GeoPoint(40.75, -73.99)
        days = {9: [req_at(7, 480, src)]}
        out = sample_future(store_with(days), 480, 3, 2, seed=1)
        assert all(r.id >= 10**9 for r in out)


class TestRelocate:
    def test_one_idle_one_phantom(self):
        phantom = ExpectedRequest(10**9, 0, GeoPoint(40.78, -73.95),
                                  GeoPoint(40.80, -73.92), 2)
        v = Vehicle(id=0, pos=GeoPoint(40.71, -74.0))
        moves = relocate([v], [], [phantom], "mwm", seed=0)
        assert moves == [(v, phantom.src)]

    def test_no_demand_no_moves(self):
        v = Vehicle(id=0, pos=GeoPoint(40.71, -74.0))
        assert relocate([v], [], [], "mwm", seed=0) == []

    def test_no_idle_no_moves(self):
        phantom = ExpectedRequest(10**9, 0, GeoPoint(40.78, -73.95),
                                  GeoPoint(40.80, -73.92), 2)
        assert relocate([], [], [phantom], "mwm", seed=0) == []

    def test_two_hotspots_assignment_matches_enumeration(self):
        # two far-apart phantom sources, two idle vehicles: the optimal
        # reciprocal-distance matching is the distance-minimizing pairing
        hot_a = GeoPoint(40.72, -74.00)
        hot_b = GeoPoint(40.86, -73.92)
        far = GeoPoint(40.75, -73.99)
        phantoms = [
            ExpectedRequest(10**9, 0, hot_a, far, 2),
            ExpectedRequest(10**9 + 1, 0, hot_b, far, 2),
        ]
        v_near_a = Vehicle(id=0, pos=GeoPoint(40.73, -74.00))
        v_near_b = Vehicle(id=1, pos=GeoPoint(40.85, -73.93))
        moves = relocate([v_near_a, v_near_b], [], phantoms, "mwm", seed=1)
        targets = {v.id: t for v, t in moves}
        assert targets[0] == hot_a
        assert targets[1] == hot_b

    def test_matchers_accepted(self):
        rng = random.Random(3)
        phantoms = [ExpectedRequest(10**9 + k, 0, rand_point(rng),
                                    rand_point(rng), 2) for k in range(4)]
        idle = [Vehicle(id=k, pos=rand_point(rng)) for k in range(3)]
        for matcher in ("mwm", "alma", "greedy"):
            moves = relocate(idle, [], phantoms, matcher, seed=7)
            assert len(moves) <= len(idle)
            for v, target in moves:
                assert isinstance(target, GeoPoint)
        with pytest.raises(ValueError):
            relocate(idle, [], phantoms, "blossom", seed=7)

    def test_shared_relocation_ride_targets_one_of_the_sources(self):
        # two overlapping phantoms pair into one ride; its target must be
        # one of the two sources
        s1 = GeoPoint(40.750, -73.990)
        s2 = GeoPoint(40.751, -73.990)
        d = GeoPoint(40.80, -73.93)
        phantoms = [ExpectedRequest(10**9, 0, s1, d, 2),
                    ExpectedRequest(10**9 + 1, 0, s2, d, 2)]
        v = Vehicle(id=0, pos=GeoPoint(40.74, -73.99))
        moves = relocate([v], [], phantoms, "mwm", seed=2)
        assert len(moves) == 1
        assert moves[0][1] in (s1, s2)

    def test_live_actives_participate(self):
        live = Request(5, 0, GeoPoint(40.77, -73.96), GeoPoint(40.80, -73.93), 2)
        v = Vehicle(id=0, pos=GeoPoint(40.70, -74.01))
        moves = relocate([v], [live], [], "mwm", seed=0)
        assert moves == [(v, live.src)]
