"""Exact-solver checks against independent brute-force recomputation.

The brute-force references here are deliberately written from scratch
(bitmask enumeration, hand-rolled Floyd-Warshall) so they share no code with
the solvers they check.
"""

from itertools import permutations

import pytest
from hypothesis import given, settings, strategies as st

from worksim.errors import NoFeasiblePlan
from worksim.oracles import event_plan_opt, knapsack_opt
from worksim.rng import Stream


# -- independent references ----------------------------------------------------

def brute_force_knapsack(budget, channels):
    """Enumerate all subsets; max exposure, ties to the lexicographically
    smallest index tuple (prefix before extension)."""
    n = len(channels)
    best = ((), 0)
    for mask in range(1 << n):
        subset = tuple(i for i in range(n) if mask >> i & 1)
        cost = sum(channels[i][0] for i in subset)
        if cost > budget:
            continue
        exposure = sum(channels[i][1] for i in subset)
        if exposure > best[1] or (exposure == best[1] and subset < best[0]):
            best = (subset, exposure)
    return best


def floyd_warshall(nodes, edges):
    INF = float("inf")
    dist = {a: {b: (0 if a == b else INF) for b in nodes} for a in nodes}
    for a, b, w in edges:
        dist[a][b] = min(dist[a][b], w)
        dist[b][a] = min(dist[b][a], w)
    for k in nodes:
        for i in nodes:
            for j in nodes:
                if dist[i][k] + dist[k][j] < dist[i][j]:
                    dist[i][j] = dist[i][k] + dist[k][j]
    return dist


def brute_force_event_plan(dates, venues, constraints, venue_map):
    if isinstance(dates, dict):
        common = set.intersection(*[set(v) for v in dates.values()]) if dates else set()
    else:
        common = set(dates)
    dist = floyd_warshall(venue_map["nodes"], venue_map["edges"])
    k = constraints.get("venues_required", 2)
    start = constraints.get("start", "Office")
    penalty = constraints.get("distance_penalty", 1)
    best = None
    for date in sorted(common):
        for itinerary in permutations(sorted(v["name"] for v in venues), k):
            by_name = {v["name"]: v for v in venues}
            if any(
                by_name[name].get("open_dates") is not None and date not in by_name[name]["open_dates"]
                for name in itinerary
            ):
                continue
            travel, here, ok = 0, start, True
            for name in itinerary:
                if dist[here][name] == float("inf"):
                    ok = False
                    break
                travel += dist[here][name]
                here = name
            if not ok:
                continue
            score = sum(by_name[n]["value"] for n in itinerary) - penalty * travel
            key = (-score, date, itinerary)
            if best is None or key < best[0]:
                best = (key, date, itinerary, score)
    return None if best is None else (best[1], best[2], best[3])


# -- knapsack -------------------------------------------------------------------

def test_knapsack_frozen_example():
    # brute force over all 8 subsets gives {0, 2} with exposure 50
    subset, exposure = knapsack_opt(10, [(6, 30), (5, 25), (4, 20)])
    assert (subset, exposure) == ((0, 2), 50)
    assert brute_force_knapsack(10, [(6, 30), (5, 25), (4, 20)]) == ((0, 2), 50)


def test_knapsack_degenerate_cases():
    assert knapsack_opt(0, [(3, 10)]) == ((), 0)
    assert knapsack_opt(5, []) == ((), 0)
    # budget covers everything -> all channels
    subset, exposure = knapsack_opt(100, [(6, 30), (5, 25), (4, 20)])
    assert subset == (0, 1, 2) and exposure == 75


def test_knapsack_matches_brute_force_on_random_instances():
    stream = Stream(2024)
    for _ in range(200):
        n = stream.randint(1, 15)
        channels = [(stream.randint(1, 30), stream.randint(0, 90)) for _ in range(n)]
        budget = stream.randint(0, 80)
        assert knapsack_opt(budget, channels) == brute_force_knapsack(budget, channels)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.tuples(st.integers(1, 20), st.integers(0, 50)), min_size=0, max_size=10),
    st.integers(0, 60),
)
def test_knapsack_property(channels, budget):
    subset, exposure = knapsack_opt(budget, channels)
    assert sum(channels[i][0] for i in subset) <= budget
    assert (subset, exposure) == brute_force_knapsack(budget, channels)


def test_knapsack_rejects_bad_costs():
    with pytest.raises(ValueError):
        knapsack_opt(10, [(0, 5)])
    with pytest.raises(ValueError):
        knapsack_opt(-1, [(1, 5)])


# -- event planning ---------------------------------------------------------------

def _fixture(seed):
    stream = Stream(seed)
    dates = [f"2025-10-{6 + i:02d}" for i in range(3)]
    people = {}
    for name in ("a", "b", "c"):
        count = stream.randint(1, 3)
        people[name] = sorted(stream.sample(dates, count))
    venues = []
    for name in ("Park", "Museum", "Cruise"):
        open_dates = sorted(stream.sample(dates, stream.randint(1, 3)))
        venues.append({"name": name, "value": stream.randint(8, 20) * 5, "open_dates": open_dates})
    nodes = ["Office", "Park", "Museum", "Cruise"]
    order = list(nodes)
    stream.shuffle(order)
    edges = [[a, b, stream.randint(1, 12)] for a, b in zip(order, order[1:])]
    edges.append(["Office", order[-1], stream.randint(1, 12)])
    constraints = {"venues_required": 2, "start": "Office", "distance_penalty": 1}
    return people, venues, constraints, {"nodes": nodes, "edges": edges}


def test_event_plan_matches_exhaustive_enumeration_on_fixtures():
    checked = 0
    seed = 0
    while checked < 50:
        seed += 1
        people, venues, constraints, venue_map = _fixture(seed)
        expected = brute_force_event_plan(people, venues, constraints, venue_map)
        if expected is None:
            with pytest.raises(NoFeasiblePlan):
                event_plan_opt(people, venues, constraints, venue_map)
            continue
        assert event_plan_opt(people, venues, constraints, venue_map) == expected
        checked += 1


def test_event_plan_unique_feasible_plan():
    people = {"a": ["2025-10-06"], "b": ["2025-10-06"]}
    venues = [
        {"name": "Park", "value": 50, "open_dates": ["2025-10-06"]},
        {"name": "Museum", "value": 40, "open_dates": ["2025-10-06"]},
    ]
    venue_map = {"nodes": ["Office", "Park", "Museum"], "edges": [["Office", "Park", 2], ["Park", "Museum", 3]]}
    constraints = {"venues_required": 2, "start": "Office", "distance_penalty": 1}
    date, itinerary, score = event_plan_opt(people, venues, constraints, venue_map)
    assert date == "2025-10-06"
    # Office->Park->Museum costs 5; Office->Museum->Park costs 5+3=8
    assert itinerary == ("Park", "Museum")
    assert score == 50 + 40 - 5


def test_event_plan_empty_availability_errors():
    people = {"a": ["2025-10-06"], "b": ["2025-10-07"]}
    venues = [{"name": "Park", "value": 10, "open_dates": None}]
    venue_map = {"nodes": ["Office", "Park"], "edges": [["Office", "Park", 1]]}
    with pytest.raises(NoFeasiblePlan):
        event_plan_opt(people, venues, {"venues_required": 1}, venue_map)
