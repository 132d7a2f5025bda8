"""Exact solvers used as ground truth for the strategic-modeling tasks.

These back the optimality checkpoints: a submitted plan is judged against the
value these return. Both are exact (no heuristics) and deterministic,
including their tie-breaking rules, so repeated runs grade identically.
"""

from __future__ import annotations

import itertools

import networkx as nx

from .errors import NoFeasiblePlan


def knapsack_opt(budget: int, channels: list[tuple[int, float]]) -> tuple[tuple[int, ...], float]:
    """0/1 knapsack: pick channels maximizing exposure within the budget.

    ``channels`` is a list of (cost, exposure) with integer costs > 0.
    Returns (chosen indices ascending, total exposure). Among all optimal
    subsets the lexicographically smallest index tuple is returned, where a
    proper prefix sorts before its extensions.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    costs = []
    exposures = []
    for cost, exposure in channels:
        if int(cost) != cost or cost <= 0:
            raise ValueError(f"channel costs must be positive integers, got {cost!r}")
        if exposure < 0:
            raise ValueError(f"channel exposures must be >= 0, got {exposure!r}")
        costs.append(int(cost))
        exposures.append(exposure)
    n = len(channels)

    # best[i][c]: max exposure achievable with channels i.. and capacity c.
    best = [[0.0] * (budget + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row = best[i]
        nxt = best[i + 1]
        cost = costs[i]
        exposure = exposures[i]
        for c in range(budget + 1):
            skip = nxt[c]
            take = exposure + nxt[c - cost] if cost <= c else None
            row[c] = skip if take is None or take <= skip else take

    # Reconstruct the lexicographically smallest optimal subset: stop as soon
    # as nothing more is needed, otherwise take the earliest channel that
    # still reaches the target.
    chosen: list[int] = []
    remaining = budget
    target = best[0][budget]
    for i in range(n):
        if target <= 0:
            break
        if costs[i] <= remaining and exposures[i] + best[i + 1][remaining - costs[i]] == target:
            chosen.append(i)
            target = best[i + 1][remaining - costs[i]]
            remaining -= costs[i]
    return tuple(chosen), best[0][budget]


def _common_dates(dates) -> list[str]:
    if isinstance(dates, dict):
        people = list(dates.values())
        if not people:
            return []
        common = set(people[0])
        for avail in people[1:]:
            common &= set(avail)
        return sorted(common)
    return sorted(set(dates))


def _distance_table(venue_map: dict) -> dict:
    graph = nx.Graph()
    graph.add_nodes_from(venue_map.get("nodes", []))
    for a, b, w in venue_map["edges"]:
        # repeated entries for one pair keep the cheapest weight
        if graph.has_edge(a, b):
            graph[a][b]["weight"] = min(graph[a][b]["weight"], w)
        else:
            graph.add_edge(a, b, weight=w)
    return dict(nx.all_pairs_dijkstra_path_length(graph, weight="weight"))


def plan_score(itinerary: tuple[str, ...], date: str, venues: list[dict], constraints: dict, dist: dict):
    """Score of one candidate plan, or None when it violates a constraint."""
    by_name = {v["name"]: v for v in venues}
    required = constraints.get("venues_required", len(itinerary))
    if len(itinerary) != required or len(set(itinerary)) != len(itinerary):
        return None
    start = constraints.get("start", "Office")
    penalty = constraints.get("distance_penalty", 1)
    total_value = 0
    travel = 0
    here = start
    for name in itinerary:
        venue = by_name.get(name)
        if venue is None:
            return None
        open_dates = venue.get("open_dates")
        if open_dates is not None and date not in open_dates:
            return None
        if name not in dist.get(here, {}):
            return None
        travel += dist[here][name]
        total_value += venue["value"]
        here = name
    return total_value - penalty * travel


def event_plan_opt(dates, venues: list[dict], constraints: dict, venue_map: dict):
    """Exhaustively search (date x itinerary) for the best feasible plan.

    Returns (date, itinerary, score). Ties break toward the earliest date and
    then the lexicographically smallest itinerary. Raises
    :class:`NoFeasiblePlan` when no date/itinerary combination is valid.
    """
    common = _common_dates(dates)
    if not common:
        raise NoFeasiblePlan("no feasible plan: the common availability is empty")
    dist = _distance_table(venue_map)
    required = constraints.get("venues_required", 2)
    names = sorted(v["name"] for v in venues)

    best = None  # (score, date, itinerary)
    for date in common:
        for itinerary in itertools.permutations(names, required):
            score = plan_score(itinerary, date, venues, constraints, dist)
            if score is None:
                continue
            key = (-score, date, itinerary)
            if best is None or key < best[0]:
                best = (key, date, itinerary, score)
    if best is None:
        raise NoFeasiblePlan("no feasible plan: every itinerary violates the constraints")
    return best[1], best[2], best[3]
