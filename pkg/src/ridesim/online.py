"""Event-driven request pairing: postponed greedy and a primal-dual scheme.

Postponed greedy creates a virtual buyer and seller per request; buyers
point greedily at the best seller on arrival and the pointer never moves.
The primal-dual matcher grows a dual value per active set each minute and
merges sets whose duals cover the connecting edge cost.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from . import geo
from .matchgraph import pair_saving
from .model import Request, SimParams


@dataclass
class PgDecision:
    request: Request
    partner: Optional[Request]  # None means single ride

    @property
    def single(self) -> bool:
        return self.partner is None


@dataclass
class PgState:
    """Virtual buyer/seller records for the postponed-greedy matcher."""

    undecided: dict[int, Request] = field(default_factory=dict)
    tentative: dict[int, int] = field(default_factory=dict)  # buyer -> seller
    pointer_weight: dict[int, float] = field(default_factory=dict)
    decided: dict[int, PgDecision] = field(default_factory=dict)


def pg_on_arrival(state: PgState, r: Request) -> PgState:
    """Register a new request; its buyer points at the best live seller."""
    best_id, best_w = None, 0.0
    for other_id, other in sorted(state.undecided.items()):
        w = pair_saving(r, other)
        if w > best_w:
            best_id, best_w = other_id, w
    state.undecided[r.id] = r
    if best_id is not None:
        state.tentative[r.id] = best_id
        state.pointer_weight[r.id] = best_w
    return state


def pg_on_critical(state: PgState, r: Request, seed: int = 0) -> tuple[PgState, PgDecision]:
    """Finalize a request's role with a fair coin.

    A seller closes the best live buyer pointing at it; a buyer closes its
    own tentative seller if that seller is still undecided.  Either way the
    request leaves the pool with a terminal decision.
    """
    if r.id not in state.undecided:
        raise ValueError(f"request {r.id} is not undecided")
    rng = random.Random(seed)
    partner = None
    if rng.random() < 0.5:  # seller
        best = None
        for buyer_id, seller_id in sorted(state.tentative.items()):
            if seller_id != r.id or buyer_id not in state.undecided:
                continue
            w = state.pointer_weight[buyer_id]
            if best is None or w > best[0]:
                best = (w, buyer_id)
        if best is not None:
            partner = state.undecided[best[1]]
    else:  # buyer
        seller_id = state.tentative.get(r.id)
        if seller_id is not None and seller_id in state.undecided:
            partner = state.undecided[seller_id]
    del state.undecided[r.id]
    state.tentative.pop(r.id, None)
    state.pointer_weight.pop(r.id, None)
    if partner is not None:
        del state.undecided[partner.id]
        state.tentative.pop(partner.id, None)
        state.pointer_weight.pop(partner.id, None)
    decision = PgDecision(r, partner)
    state.decided[r.id] = decision
    if partner is not None:
        state.decided[partner.id] = decision
    return state, decision


def pg_forget(state: PgState, request_id: int) -> None:
    """Drop a request the engine has committed elsewhere."""
    state.undecided.pop(request_id, None)
    state.tentative.pop(request_id, None)
    state.pointer_weight.pop(request_id, None)


@dataclass
class ActiveSet:
    members: list[int]
    dual: float = 0.0


@dataclass
class GdState:
    """Active-set partition with per-set dual values."""

    params: SimParams
    sets: dict[int, ActiveSet] = field(default_factory=dict)
    requests: dict[int, Request] = field(default_factory=dict)
    _next_set: int = 0

    def add(self, r: Request) -> None:
        self.requests[r.id] = r
        self.sets[self._next_set] = ActiveSet([r.id])
        self._next_set += 1

    def discard(self, request_id: int) -> None:
        self.requests.pop(request_id, None)
        for sid in list(self.sets):
            s = self.sets[sid]
            if request_id in s.members:
                s.members.remove(request_id)
                if not s.members:
                    del self.sets[sid]

    def cost(self, a: Request, b: Request) -> float:
        """Edge cost in minutes: spatial separation at fleet speed plus
        the arrival-time gap."""
        spatial = (geo.manhattan_distance(a.src, b.src) +
                   geo.manhattan_distance(a.dst, b.dst))
        return spatial / self.params.speed_m_per_min + abs(a.t_open - b.t_open)


def gd_tick(state: GdState, now: int) -> tuple[GdState, list[tuple[Request, Request]]]:
    """Advance duals one minute, merge tight sets, pair inside merged sets."""
    for s in state.sets.values():
        s.dual += 1.0

    merged = True
    while merged:
        merged = False
        sids = sorted(state.sets)
        for ai in range(len(sids)):
            for bi in range(ai + 1, len(sids)):
                a, b = state.sets[sids[ai]], state.sets[sids[bi]]
                if _tight(state, a, b):
                    a.members.extend(b.members)
                    a.dual = max(a.dual, b.dual)
                    del state.sets[sids[bi]]
                    merged = True
                    break
            if merged:
                break

    matches = []
    for sid in sorted(state.sets):
        s = state.sets[sid]
        if len(s.members) < 2:
            continue
        cand = []
        members = sorted(s.members)
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                u, v = state.requests[members[i]], state.requests[members[j]]
                cand.append((state.cost(u, v), members[i], members[j]))
        cand.sort()
        used: set[int] = set()
        for _, u_id, v_id in cand:
            if u_id in used or v_id in used:
                continue
            used.update((u_id, v_id))
            matches.append((state.requests[u_id], state.requests[v_id]))
        s.members = [m for m in s.members if m not in used]
        if not s.members:
            del state.sets[sid]
    for u, v in matches:
        state.requests.pop(u.id, None)
        state.requests.pop(v.id, None)
    return state, matches


def _tight(state: GdState, a: ActiveSet, b: ActiveSet) -> bool:
    budget = a.dual + b.dual
    for u_id in a.members:
        for v_id in b.members:
            if state.cost(state.requests[u_id], state.requests[v_id]) <= budget:
                return True
    return False
