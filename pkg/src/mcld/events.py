"""Forward event-driven simulators.

``run_clocked`` replays the same exponential clocks as the fixed-horizon
construction, processing edge arrivals and lightning strikes in one global
time order (ties: time, then edges before strikes, then lexicographic
indices).  Deletion marks the component's root burnt; members observe the
flag lazily, so no un-union is ever needed.

``run_gillespie`` is an independent aggregated-rate sampler over component
weights, used only for distributional cross-checks against the clocked
engine.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable, Sequence

import numpy as np

from .clock_field import ClockField, edge_arrivals, strike_arrivals
from .errors import InvalidInput
from .mass_state import OrderedMassVector, ordered
from .trajectory import Event, Trajectory

__all__ = ["run_clocked", "run_gillespie", "deleted_mass_up_to"]

_EDGE, _STRIKE = 0, 1  # tie rank: edges apply before strikes at equal times


def _as_state(masses) -> OrderedMassVector:
    if isinstance(masses, OrderedMassVector):
        return masses
    return OrderedMassVector(tuple(float(m) for m in masses))


def _grid_or_default(grid, t_end: float) -> tuple[float, ...]:
    if t_end < 0:
        raise InvalidInput("t_end must be nonnegative")
    if grid is None:
        return (float(t_end),)
    out = tuple(float(g) for g in grid)
    if not out:
        raise InvalidInput("time grid must be nonempty")
    if any(b <= a for a, b in zip(out, out[1:])):
        raise InvalidInput("time grid must be strictly increasing")
    if out[0] < 0 or out[-1] > t_end:
        raise InvalidInput("grid times must lie in [0, t_end]")
    return out


class _MergeBurnForest:
    """Union-find over alive vertices with weights, burnt flags, min labels."""

    __slots__ = ("parent", "weight", "burnt", "minlabel")

    def __init__(self, masses: Sequence[float]):
        n = len(masses)
        self.parent = list(range(n + 1))
        self.weight = [0.0] + [float(m) for m in masses]
        self.burnt = [False] * (n + 1)
        self.minlabel = list(range(n + 1))

    def find(self, v: int) -> int:
        parent = self.parent
        root = v
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root

    def alive_component_weights(self) -> list[float]:
        return [
            self.weight[v]
            for v in range(1, len(self.parent))
            if self.parent[v] == v and not self.burnt[v]
        ]


def run_clocked(
    masses,
    clocks: ClockField,
    lam: float,
    t_end: float,
    grid=None,
    observers: Iterable[Callable[[Event], None]] = (),
) -> Trajectory:
    """Simulate forward to ``t_end``, recording states on ``grid``.

    Edge events between vertices whose components are both alive merge them
    (same-root arrivals are no-ops); a strike at an alive vertex deletes its
    whole current component.  Events at burnt vertices are no-ops.
    """
    initial = _as_state(masses)
    grid_t = _grid_or_default(grid, t_end)
    arr = np.asarray(initial.masses, dtype=np.float64)
    observers = tuple(observers)

    ei, ej, et = edge_arrivals(clocks, arr, t_end)
    sv, st = strike_arrivals(clocks, arr, lam, t_end)
    queue: list[tuple[float, int, int, int]] = [
        (t, _EDGE, int(a), int(b))
        for t, a, b in zip(et.tolist(), ei.tolist(), ej.tolist())
    ]
    queue.extend((t, _STRIKE, int(v), 0) for t, v in zip(st.tolist(), sv.tolist()))
    queue.sort()

    forest = _MergeBurnForest(arr.tolist())
    events: list[Event] = []
    states: list[OrderedMassVector] = []
    pos = 0

    def apply_event(time: float, kind: int, a: int, b: int) -> None:
        if kind == _EDGE:
            ra, rb = forest.find(a), forest.find(b)
            if ra == rb or forest.burnt[ra] or forest.burnt[rb]:
                return
            ids = (forest.minlabel[ra], forest.minlabel[rb])
            if forest.weight[ra] < forest.weight[rb]:
                ra, rb = rb, ra
            forest.parent[rb] = ra
            forest.weight[ra] += forest.weight[rb]
            forest.minlabel[ra] = min(forest.minlabel[ra], forest.minlabel[rb])
            ev = Event(time, "merge", (min(ids), max(ids)), forest.weight[ra])
        else:
            root = forest.find(a)
            if forest.burnt[root]:
                return
            forest.burnt[root] = True
            ev = Event(time, "delete", (forest.minlabel[root],), forest.weight[root])
        events.append(ev)
        for obs in observers:
            obs(ev)

    for g in grid_t:
        while pos < len(queue) and queue[pos][0] <= g:
            apply_event(*queue[pos])
            pos += 1
        states.append(ordered(forest.alive_component_weights()))
    # event log always covers the full horizon, not just the last grid point
    while pos < len(queue):
        apply_event(*queue[pos])
        pos += 1

    return Trajectory(
        initial=initial,
        times=grid_t,
        states=tuple(states),
        events=tuple(events),
        horizon=float(t_end),
    )


def run_gillespie(
    masses, rng_stream, lam: float, t_end: float, grid=None
) -> Trajectory:
    """Aggregated-rate sampler: holding times from the total event rate.

    Merge rate of a weight pair is the product of the weights; deletion rate
    of a component is ``lam`` times its weight.  Independent of the clock
    field; components are tracked anonymously, so event ids are synthetic
    (initial components are numbered by rank, merges keep the smaller id).
    """
    initial = _as_state(masses)
    grid_t = _grid_or_default(grid, t_end)
    rng = (
        rng_stream
        if isinstance(rng_stream, np.random.Generator)
        else np.random.default_rng(rng_stream)
    )
    if lam < 0:
        raise InvalidInput("deletion rate must be nonnegative")

    weights = list(initial.masses)
    ids = list(range(1, len(weights) + 1))
    events: list[Event] = []
    states: list[OrderedMassVector] = []
    now = 0.0
    gi = 0

    def snapshot_until(limit: float) -> None:
        nonlocal gi
        while gi < len(grid_t) and grid_t[gi] < limit:
            states.append(ordered(weights))
            gi += 1

    while True:
        w1 = math.fsum(weights)
        w2 = math.fsum(w * w for w in weights)
        merge_rate = max((w1 * w1 - w2) / 2.0, 0.0)
        delete_rate = lam * w1
        total = merge_rate + delete_rate
        if total <= 0.0:
            break
        now += rng.exponential(1.0 / total)
        if now > t_end:
            now = t_end
            break
        snapshot_until(now)
        probs = np.asarray(weights) / w1
        if rng.uniform() * total < merge_rate:
            # restart both draws on a collision: redrawing only the second
            # index would bias pairs toward heavy components
            while True:
                a = int(rng.choice(len(weights), p=probs))
                b = int(rng.choice(len(weights), p=probs))
                if a != b:
                    break
            a, b = min(a, b), max(a, b)
            merged = weights[a] + weights[b]
            ida, idb = ids[a], ids[b]
            weights[a] = merged
            ids[a] = min(ida, idb)
            del weights[b], ids[b]
            events.append(Event(now, "merge", (min(ida, idb), max(ida, idb)), merged))
        else:
            a = int(rng.choice(len(weights), p=probs))
            events.append(Event(now, "delete", (ids[a],), weights[a]))
            del weights[a], ids[a]
    snapshot_until(math.inf)

    return Trajectory(
        initial=initial,
        times=grid_t,
        states=tuple(states),
        events=tuple(events),
        horizon=float(t_end),
    )


def deleted_mass_up_to(traj: Trajectory, t: float) -> float:
    """Total weight removed by deletions with event time <= t."""
    if t > traj.horizon:
        raise InvalidInput("query beyond the trajectory horizon")
    return math.fsum(e.weight for e in traj.events if e.kind == "delete" and e.time <= t)
