"""Interned symbolic vocabulary, triples, temporal annotations, and graph views.

Entities and relations are dense integer ids produced by an interner; ids are
stable for the lifetime of a run and serialize as their string labels.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UsageError, VocabularyError

SHORT_TERM = "short_term"
LONG_TERM = "long_term"

STM_ONLY = "stm_only"
FULL = "full"

#: Cap applied to num_recalled when normalizing annotation features.
RECALL_CAP = 10


class Interner:
    """Bijective label <-> dense id table. Single-writer during setup, read-only after."""

    def __init__(self, labels=()):
        self._ids: dict[str, int] = {}
        self._labels: list[str] = []
        for label in labels:
            self.intern(label)

    def intern(self, label: str) -> int:
        if not label:
            raise UsageError("cannot intern an empty label")
        idx = self._ids.get(label)
        if idx is None:
            idx = len(self._labels)
            self._ids[label] = idx
            self._labels.append(label)
        return idx

    def id_of(self, label: str) -> int:
        try:
            return self._ids[label]
        except KeyError:
            raise VocabularyError(f"unknown label: {label!r}") from None

    def label(self, idx: int) -> str:
        try:
            return self._labels[idx]
        except IndexError:
            raise VocabularyError(f"unknown id: {idx}") from None

    def __contains__(self, label: str) -> bool:
        return label in self._ids

    def __len__(self) -> int:
        return len(self._labels)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self._labels)


@dataclass(frozen=True)
class Triple:
    """An RDF-style (head, relation, tail) fact over interned ids."""

    head: int
    relation: int
    tail: int


@dataclass(frozen=True)
class TemporalAnnotations:
    """Step-indexed metadata attached to a memory item."""

    time_added: int
    last_accessed: int
    num_recalled: int = 0

    def __post_init__(self):
        if self.last_accessed < self.time_added:
            raise UsageError(
                f"last_accessed ({self.last_accessed}) < time_added ({self.time_added})"
            )
        if self.num_recalled < 0:
            raise UsageError("num_recalled must be non-negative")


@dataclass(frozen=True)
class MemoryItem:
    """A triple plus its temporal annotations; the atomic unit of memory."""

    triple: Triple
    ann: TemporalAnnotations


@dataclass
class Vocab:
    """Separate interners for entities and relations."""

    entities: Interner
    relations: Interner

    def triple(self, head: str, relation: str, tail: str) -> Triple:
        return Triple(
            self.entities.id_of(head),
            self.relations.id_of(relation),
            self.entities.id_of(tail),
        )

    def triple_labels(self, t: Triple) -> tuple[str, str, str]:
        return (
            self.entities.label(t.head),
            self.relations.label(t.relation),
            self.entities.label(t.tail),
        )


def item_to_json(item: MemoryItem, vocab: Vocab) -> dict:
    """Serialize a memory item with labels, never raw ids."""
    h, r, t = vocab.triple_labels(item.triple)
    return {
        "h": h,
        "r": r,
        "t": t,
        "ann": {
            "time_added": item.ann.time_added,
            "last_accessed": item.ann.last_accessed,
            "num_recalled": item.ann.num_recalled,
        },
    }


def item_from_json(obj: dict, vocab: Vocab) -> MemoryItem:
    ann = obj["ann"]
    return MemoryItem(
        vocab.triple(obj["h"], obj["r"], obj["t"]),
        TemporalAnnotations(
            time_added=ann["time_added"],
            last_accessed=ann["last_accessed"],
            num_recalled=ann["num_recalled"],
        ),
    )


@dataclass(frozen=True)
class GraphEdge:
    head: int
    relation: int
    tail: int
    features: tuple[float, float, float]
    source: str  # SHORT_TERM or LONG_TERM


@dataclass(frozen=True)
class GraphView:
    """The symbolic memory state as a graph handed to the encoders.

    Nodes are entity ids in first-appearance order over the edge list; every
    edge endpoint is guaranteed to appear in ``nodes``.
    """

    nodes: tuple[int, ...]
    edges: tuple[GraphEdge, ...]


def annotation_features(
    ann: TemporalAnnotations, now: int, horizon: int, recall_cap: int = RECALL_CAP
) -> tuple[float, float, float]:
    """Normalized (age, recency, recall) vector; lies in [0,1]^3 within the horizon."""
    return (
        (now - ann.time_added) / horizon,
        (now - ann.last_accessed) / horizon,
        min(ann.num_recalled, recall_cap) / recall_cap,
    )


def build_graph_view(
    short: list[MemoryItem],
    long: list[MemoryItem],
    mode: str,
    now: int,
    horizon: int,
    recall_cap: int = RECALL_CAP,
) -> GraphView:
    """Convert the current memory state into the encoder input graph.

    ``stm_only`` includes only short-term edges; ``full`` appends the long-term
    ones. Edge order is short-term (buffer order) then long-term (insertion
    order).
    """
    if mode not in (STM_ONLY, FULL):
        raise UsageError(f"unknown graph view mode: {mode!r}")
    tagged = [(item, SHORT_TERM) for item in short]
    if mode == FULL:
        tagged.extend((item, LONG_TERM) for item in long)

    nodes: list[int] = []
    seen: dict[int, None] = {}
    edges = []
    for item, source in tagged:
        t = item.triple
        for endpoint in (t.head, t.tail):
            if endpoint not in seen:
                seen[endpoint] = None
                nodes.append(endpoint)
        edges.append(
            GraphEdge(
                t.head,
                t.relation,
                t.tail,
                annotation_features(item.ann, now, horizon, recall_cap),
                source,
            )
        )
    return GraphView(tuple(nodes), tuple(edges))
