"""Fixed symbolic policies: annotation-ranked question answering, BFS exploration
over the remembered room map, and the non-learned transfer baselines.

All policies are pure functions of the memory snapshot plus an explicit seeded
random stream; the only mutation is the recall touch applied to the item used
to answer a query.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable

from .errors import UsageError
from .kg import MemoryItem
from .memory import DROP, KEEP, LongTermStore, ShortTermBuffer

QA_KINDS = ("mra", "mru", "mfu")
TRANSFER_BASELINES = ("always", "novel_only", "random")


@dataclass(frozen=True)
class QaPolicy:
    kind: str  # mra -> time_added, mru -> last_accessed, mfu -> num_recalled


@dataclass(frozen=True)
class TransferBaseline:
    kind: str
    p: float = 0.5

    def __post_init__(self):
        if self.kind not in TRANSFER_BASELINES:
            raise UsageError(f"unknown transfer baseline: {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise UsageError("transfer probability must lie in [0, 1]")


@dataclass(frozen=True)
class SymbolicContext:
    """World-vocabulary facts the symbolic policies need (built by the environment)."""

    agent: int
    unknown: int
    at_location: int
    directions: tuple[tuple[str, int], ...]  # (label, relation id) in N/S/E/W order
    is_room: Callable[[int], bool]


def _policy_key(kind: str, item: MemoryItem) -> int:
    if kind == "mra":
        return item.ann.time_added
    if kind == "mru":
        return item.ann.last_accessed
    if kind == "mfu":
        return item.ann.num_recalled
    raise UsageError(f"unknown QA policy: {kind!r}")


def _enumerate(short: ShortTermBuffer, long: LongTermStore):
    """Yield (item, order, where, key) over long then short.

    ``order`` is a totally ordered recency tuple: long items rank by insertion
    counter, short items rank above all long items, in buffer order.
    """
    for item, counter in long.entries():
        yield item, (0, counter), "long", None
    for idx, item in enumerate(short.items):
        yield item, (1, idx), "short", idx


def answer_query(
    short: ShortTermBuffer,
    long: LongTermStore,
    query,
    policy: QaPolicy,
    now: int,
    ctx: SymbolicContext,
) -> tuple[int, MemoryItem | None]:
    """Answer a (head, relation, ?) query from short + long memory.

    Candidates are ranked by the policy's annotation key, ties broken by larger
    time_added then larger insertion order. The winning item receives a recall
    touch. With no candidate, the fixed unknown entity is returned (always
    scored incorrect by the environment).
    """
    best = None
    for item, order, where, idx in _enumerate(short, long):
        t = item.triple
        if t.head != query.head or t.relation != query.relation:
            continue
        key = (_policy_key(policy.kind, item), item.ann.time_added, order)
        if best is None or key > best[0]:
            best = (key, item, where, idx)
    if best is None:
        return ctx.unknown, None
    _, item, where, idx = best
    if where == "long":
        touched = long.touch(item.triple, now)
    else:
        touched = short.touch(idx, now)
    return item.triple.tail, touched


def _room_map(short, long, ctx):
    """Resolve remembered direction facts into an open-passage adjacency map.

    Conflicting facts for the same (room, direction) are resolved by most
    recent last_accessed (then time_added, then insertion order). Facts whose
    target is not a room mark the passage blocked.
    """
    winners: dict[tuple[int, int], tuple] = {}
    direction_rels = {rel for _, rel in ctx.directions}
    visited: dict[int, int] = {}
    for item, order, _, _ in _enumerate(short, long):
        t = item.triple
        if t.relation == ctx.at_location and t.head == ctx.agent:
            prev = visited.get(t.tail)
            if prev is None or item.ann.last_accessed > prev:
                visited[t.tail] = item.ann.last_accessed
            continue
        if t.relation in direction_rels and ctx.is_room(t.head):
            key = (item.ann.last_accessed, item.ann.time_added, order)
            slot = (t.head, t.relation)
            if slot not in winners or key > winners[slot][0]:
                winners[slot] = (key, t.tail)

    adjacency: dict[int, dict[int, int]] = {}
    for (room, rel), (_, target) in winners.items():
        if ctx.is_room(target):
            adjacency.setdefault(room, {})[rel] = target
    return adjacency, visited


def explore_action(
    short: ShortTermBuffer,
    long: LongTermStore,
    current_room: int,
    now: int,
    rng,
    ctx: SymbolicContext,
) -> str:
    """First move of a BFS shortest path to the nearest unvisited remembered room.

    Falls back to the least-recently-visited reachable neighbor when every
    reachable room is visited, and to a seeded-random direction when the
    remembered map has no usable passage out of the current room.
    """
    adjacency, visited = _room_map(short, long, ctx)
    neighbors = adjacency.get(current_room, {})
    if not neighbors:
        label, _ = ctx.directions[int(rng.integers(len(ctx.directions)))]
        return label

    # BFS expanding in fixed direction order; first unvisited room dequeued wins.
    first_move: dict[int, str] = {current_room: ""}
    queue = deque([current_room])
    while queue:
        room = queue.popleft()
        if room != current_room and room not in visited:
            return first_move[room]
        for label, rel in ctx.directions:
            target = adjacency.get(room, {}).get(rel)
            if target is None or target in first_move:
                continue
            first_move[target] = first_move[room] or label
            queue.append(target)

    # Everything reachable is visited: go to the least-recently-visited neighbor.
    best = None
    for dir_idx, (label, rel) in enumerate(ctx.directions):
        target = neighbors.get(rel)
        if target is None:
            continue
        key = (visited.get(target, -1), dir_idx)
        if best is None or key < best[0]:
            best = (key, label)
    return best[1]


def baseline_transfer(
    short: ShortTermBuffer,
    long: LongTermStore,
    baseline: TransferBaseline,
    rng,
) -> list[int]:
    """Keep/drop vector for the symbolic transfer baselines."""
    if baseline.kind == "always":
        return [KEEP] * len(short.items)
    if baseline.kind == "novel_only":
        return [DROP if item.triple in long else KEEP for item in short.items]
    return [KEEP if rng.random() < baseline.p else DROP for _ in short.items]
