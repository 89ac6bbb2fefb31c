"""Two-tier memory: a per-step short-term buffer and a capacity-limited long-term store.

The long-term store holds at most one item per distinct triple; keeping an
already-present triple refreshes its ``last_accessed`` annotation instead of
duplicating it. Eviction fires once per overflowing insertion, so the store
never transiently exceeds its capacity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from .errors import UsageError
from .kg import LONG_TERM, SHORT_TERM, MemoryItem, TemporalAnnotations, Triple, Vocab, item_to_json

KEEP = 1
DROP = 0

EVICTION_POLICIES = ("fifo", "lru", "lfu")


def touch_on_recall(item: MemoryItem, now: int) -> MemoryItem:
    """Mark an item as just used to answer a query."""
    return replace(
        item,
        ann=replace(item.ann, last_accessed=now, num_recalled=item.ann.num_recalled + 1),
    )


class ShortTermBuffer:
    """Per-step buffer of observed triples, rebuilt from scratch each step."""

    def __init__(self, items: list[MemoryItem], step: int):
        self.items = items
        self.step = step

    def __len__(self) -> int:
        return len(self.items)

    def touch(self, index: int, now: int) -> MemoryItem:
        self.items[index] = touch_on_recall(self.items[index], now)
        return self.items[index]

    def snapshot(self) -> tuple[MemoryItem, ...]:
        return tuple(self.items)


def refresh_short_term(triples, now: int) -> ShortTermBuffer:
    """Build the short-term buffer for one step, preserving the observation order."""
    ann = TemporalAnnotations(time_added=now, last_accessed=now, num_recalled=0)
    return ShortTermBuffer([MemoryItem(t, ann) for t in triples], now)


@dataclass
class _Entry:
    item: MemoryItem
    counter: int


def _eviction_key(policy: str):
    if policy == "fifo":
        return lambda e: (e.counter,)
    if policy == "lru":
        return lambda e: (e.item.ann.last_accessed, e.counter)
    if policy == "lfu":
        return lambda e: (e.item.ann.num_recalled, e.counter)
    raise UsageError(f"unknown eviction policy: {policy!r}")


class LongTermStore:
    """Capacity-limited store of annotated triples with FIFO/LRU/LFU eviction."""

    def __init__(self, capacity: int = 128):
        if capacity < 1:
            raise UsageError("long-term capacity must be >= 1")
        self.capacity = capacity
        self._entries: dict[Triple, _Entry] = {}
        self._next_counter = 0

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._entries

    def get(self, triple: Triple) -> MemoryItem | None:
        entry = self._entries.get(triple)
        return entry.item if entry else None

    def counter_of(self, triple: Triple) -> int:
        return self._entries[triple].counter

    def items(self) -> list[MemoryItem]:
        return [e.item for e in self._entries.values()]

    def entries(self) -> list[tuple[MemoryItem, int]]:
        return [(e.item, e.counter) for e in self._entries.values()]

    def snapshot(self) -> tuple[MemoryItem, ...]:
        return tuple(e.item for e in self._entries.values())

    def insert(self, item: MemoryItem) -> None:
        """Insert a novel triple; refreshes instead if the triple already exists."""
        entry = self._entries.get(item.triple)
        if entry is not None:
            self.refresh(item.triple, item.ann.last_accessed)
            return
        self._entries[item.triple] = _Entry(item, self._next_counter)
        self._next_counter += 1

    def refresh(self, triple: Triple, now: int) -> None:
        """Bump last_accessed of an existing item; time_added and counter are kept."""
        entry = self._entries[triple]
        entry.item = replace(entry.item, ann=replace(entry.item.ann, last_accessed=now))

    def touch(self, triple: Triple, now: int) -> MemoryItem:
        entry = self._entries[triple]
        entry.item = touch_on_recall(entry.item, now)
        return entry.item

    def evict_one(self, policy: str) -> MemoryItem:
        """Remove and return the argmin item under the policy key, insertion-order tie-break."""
        if not self._entries:
            raise UsageError("cannot evict from an empty store")
        key = _eviction_key(policy)
        victim = min(self._entries.values(), key=key)
        del self._entries[victim.item.triple]
        return victim.item


def apply_transfer(
    short: ShortTermBuffer,
    actions,
    store: LongTermStore,
    eviction: str,
    now: int,
) -> list[MemoryItem]:
    """Execute per-item keep/drop decisions against the long-term store.

    Kept items refresh an existing entry or insert a new one; each overflowing
    insertion triggers exactly one eviction. Mutates ``store`` and returns the
    evicted items in eviction order.
    """
    if len(actions) != len(short.items):
        raise UsageError(
            f"actions length {len(actions)} != short-term size {len(short.items)}"
        )
    if eviction not in EVICTION_POLICIES:
        raise UsageError(f"unknown eviction policy: {eviction!r}")
    evicted: list[MemoryItem] = []
    for item, action in zip(short.items, actions):
        if action != KEEP:
            continue
        if item.triple in store:
            store.refresh(item.triple, now)
        else:
            store.insert(item)
            if len(store) > store.capacity:
                evicted.append(store.evict_one(eviction))
    return evicted


def store_to_jsonl(store: LongTermStore, vocab: Vocab) -> str:
    """Full store snapshot as JSONL, one memory item per line."""
    lines = [json.dumps(item_to_json(item, vocab)) for item in store.items()]
    return "\n".join(lines) + ("\n" if lines else "")


_CATEGORY_COLORS = {
    "room": "#f7d154",
    "agent": "#9b59b6",
    "static_object": "#5b8ff9",
    "moving_object": "#5ad8a6",
    "wall": "#a6a6a6",
}
_DEFAULT_COLOR = "#ffffff"


def _dot_quote(label: str) -> str:
    return '"' + label.replace("\\", "\\\\").replace('"', '\\"') + '"'


def memory_to_dot(
    tagged_items: list[tuple[MemoryItem, str]],
    vocab: Vocab,
    category_of=None,
    name: str = "memory",
) -> str:
    """Render memory items as a DOT digraph.

    Items sharing a triple are collapsed into one edge whose relation label is
    marked with ``(N)``; per-item annotations go into the edge tooltip. Node
    fill colors follow the entity category when ``category_of`` is given.
    """
    by_triple: dict[Triple, list[tuple[MemoryItem, str]]] = {}
    nodes: dict[int, None] = {}
    for item, source in tagged_items:
        by_triple.setdefault(item.triple, []).append((item, source))
        nodes.setdefault(item.triple.head)
        nodes.setdefault(item.triple.tail)

    lines = [f"digraph {name} {{", "  rankdir=LR;", "  node [style=filled];"]
    for ent in nodes:
        label = vocab.entities.label(ent)
        color = _DEFAULT_COLOR
        if category_of is not None:
            color = _CATEGORY_COLORS.get(category_of(ent), _DEFAULT_COLOR)
        lines.append(f"  {_dot_quote(label)} [fillcolor={_dot_quote(color)}];")
    for triple, group in by_triple.items():
        h, r, t = vocab.triple_labels(triple)
        label = r if len(group) == 1 else f"{r} ({len(group)})"
        tips = []
        for item, source in group:
            a = item.ann
            tips.append(
                f"{source}: time_added={a.time_added} "
                f"last_accessed={a.last_accessed} num_recalled={a.num_recalled}"
            )
        lines.append(
            f"  {_dot_quote(h)} -> {_dot_quote(t)} "
            f"[label={_dot_quote(label)}, tooltip={_dot_quote(' | '.join(tips))}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def tagged_memory(short_items, long_items) -> list[tuple[MemoryItem, str]]:
    """Pair items with their source tag for graph/DOT exports."""
    tagged = [(item, SHORT_TERM) for item in short_items]
    tagged.extend((item, LONG_TERM) for item in long_items)
    return tagged
