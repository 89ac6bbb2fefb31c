"""Partially observable room-grid world with triple observations and QA-only reward.

The hidden state is a square grid of rooms with periodically scheduled inner
walls, static and moving objects, and a single agent. Observations are the
local induced triple subgraph around the agent's room, emitted in a fresh
random order each step. One location query is posed per step; reward is 1.0
for a correct answer and 0.0 otherwise.

World layout (names, walls, schedules, object start rooms) is a pure function
of ``world_seed``; per-episode streams (observation shuffles, object moves,
query schedule) derive from the episode seed, with the query stream
additionally keyed by the train/test split.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, UsageError
from .kg import Interner, Triple, Vocab
from .policies import SymbolicContext

DIRECTIONS = ("north", "south", "east", "west")
_DELTAS = {"north": (-1, 0), "south": (1, 0), "east": (0, 1), "west": (0, -1)}
MOVES = DIRECTIONS + ("stay",)

AT_LOCATION = "at_location"
AGENT = "agent"
UNKNOWN = "unknown"

WALL_PERIODS = (4, 6, 8, 10)

#: At most this many objects per room on average is considered feasible.
_OBJECT_DENSITY_CAP = 4

ROOM_NAMES = (
    "playroom", "studio", "living", "kitchen", "bedroom", "bathroom",
    "garage", "attic", "cellar", "library", "pantry", "nursery",
    "office", "lounge", "hall", "closet", "gym", "den",
    "foyer", "porch", "balcony", "workshop", "laundry", "sunroom",
    "parlor", "vestibule", "larder", "scullery", "boudoir", "atrium",
)
STATIC_OBJECT_NAMES = (
    "table", "sofa", "lamp", "piano", "wardrobe", "mirror",
    "vase", "clock", "bookshelf", "rug", "desk", "stove",
    "fridge", "bathtub", "bed", "cabinet", "easel", "anvil",
)
MOVING_OBJECT_NAMES = (
    "john", "william", "sarah", "emma", "oliver", "sophia",
    "liam", "mia", "noah", "ava", "ethan", "lucas",
    "grace", "henry", "alice", "jack", "ruby", "leo",
)

# Stream tags for seed derivation.
_TAG_LAYOUT = 101
_TAG_SHUFFLE = 102
_TAG_MOVE = 103
_TAG_QUERY = 104
_TAG_POLICY = 105

_SPLIT_CODES = {"train": 0, "test": 1}


@dataclass
class WorldConfig:
    grid_length: int = 7
    num_static_objects: int = 18
    num_moving_objects: int = 18
    num_inner_walls: int = 36
    horizon: int = 100
    world_seed: int = 0
    query_split: str = "train"

    def validate(self) -> None:
        if self.grid_length < 2:
            raise ConfigError("world.grid_length: must be >= 2")
        if self.horizon < 1:
            raise ConfigError("world.horizon: must be >= 1")
        n = self.grid_length
        interior = 2 * n * (n - 1)
        if not 0 <= self.num_inner_walls <= interior:
            raise ConfigError(
                f"world.num_inner_walls: must be in [0, {interior}] for grid_length {n}"
            )
        if self.num_static_objects < 0:
            raise ConfigError("world.num_static_objects: must be >= 0")
        if self.num_moving_objects < 0:
            raise ConfigError("world.num_moving_objects: must be >= 0")
        total = self.num_static_objects + self.num_moving_objects
        if total > _OBJECT_DENSITY_CAP * n * n:
            raise ConfigError(
                f"world.num_static_objects: {total} objects exceed "
                f"{_OBJECT_DENSITY_CAP} per room on a {n}x{n} grid"
            )
        if total == 0:
            raise ConfigError("world.num_static_objects: world needs at least one object to query")
        if self.query_split not in _SPLIT_CODES:
            raise ConfigError("world.query_split: must be 'train' or 'test'")


@dataclass(frozen=True)
class Query:
    """Location query (head, at_location, ?); truth is hidden from the agent."""

    head: int
    relation: int
    truth: int


@dataclass(frozen=True)
class Observation:
    triples: tuple[Triple, ...]


@dataclass
class HiddenState:
    step: int
    agent_room: int
    object_rooms: dict[int, int]
    wall_states: dict[int, bool] = field(repr=False)  # entity id -> closed?


@dataclass(frozen=True)
class _WallSchedule:
    period: int
    phase: int
    span: int

    def closed(self, t: int) -> bool:
        return (t + self.phase) % self.period < self.span


def _overflow_names(base: tuple[str, ...], count: int, pattern: str) -> list[str]:
    names = list(base[:count])
    names.extend(pattern.format(i) for i in range(len(names), count))
    return names


class RoomWorld:
    """Simulator instance; layout and vocabulary are fixed at construction."""

    def __init__(self, config: WorldConfig):
        config.validate()
        self.config = config
        n = config.grid_length
        self.num_rooms = n * n

        entities = Interner()
        relations = Interner()
        self.vocab = Vocab(entities, relations)
        self.at_location = relations.intern(AT_LOCATION)
        self.direction_ids = tuple(relations.intern(d) for d in DIRECTIONS)

        room_names = _overflow_names(ROOM_NAMES, self.num_rooms, "room_{}")
        self.room_ids = tuple(entities.intern(name) for name in room_names)
        self.agent = entities.intern(AGENT)
        self.unknown = entities.intern(UNKNOWN)

        static_names = _overflow_names(
            STATIC_OBJECT_NAMES, config.num_static_objects, "object_{}"
        )
        moving_names = _overflow_names(
            MOVING_OBJECT_NAMES, config.num_moving_objects, "walker_{}"
        )
        self.static_objects = tuple(entities.intern(name) for name in static_names)
        self.moving_objects = tuple(entities.intern(name) for name in moving_names)
        self.objects = self.static_objects + self.moving_objects

        self._categories: dict[int, str] = {self.agent: "agent", self.unknown: "unknown"}
        for ent in self.room_ids:
            self._categories[ent] = "room"
        for ent in self.static_objects:
            self._categories[ent] = "static_object"
        for ent in self.moving_objects:
            self._categories[ent] = "moving_object"

        self._build_layout()
        self._state: HiddenState | None = None
        self._query: Query | None = None

    # -- layout ----------------------------------------------------------

    def _room_at(self, row: int, col: int) -> int:
        return self.room_ids[row * self.config.grid_length + col]

    def _coords(self, room: int) -> tuple[int, int]:
        idx = self._room_index[room]
        n = self.config.grid_length
        return divmod(idx, n)

    def _build_layout(self) -> None:
        cfg = self.config
        n = cfg.grid_length
        self._room_index = {ent: i for i, ent in enumerate(self.room_ids)}
        rng = np.random.default_rng(np.random.SeedSequence([cfg.world_seed, _TAG_LAYOUT]))

        interior_edges: list[tuple[int, int]] = []
        for r in range(n):
            for c in range(n):
                if c + 1 < n:
                    interior_edges.append((self._room_at(r, c), self._room_at(r, c + 1)))
                if r + 1 < n:
                    interior_edges.append((self._room_at(r, c), self._room_at(r + 1, c)))

        picked = rng.choice(len(interior_edges), size=cfg.num_inner_walls, replace=False)
        self._edge_wall: dict[tuple[int, int], int] = {}
        self._wall_schedule: dict[int, _WallSchedule] = {}
        self.inner_walls: list[int] = []
        for k, edge_idx in enumerate(picked):
            wall = self.vocab.entities.intern(f"wall_{k}")
            self._categories[wall] = "wall"
            edge = interior_edges[int(edge_idx)]
            period = int(rng.choice(WALL_PERIODS))
            phase = int(rng.integers(period))
            self._edge_wall[edge] = wall
            self._wall_schedule[wall] = _WallSchedule(period, phase, period // 2)
            self.inner_walls.append(wall)

        self._border_wall: dict[tuple[int, str], int] = {}
        self.border_walls: list[int] = []
        k = 0
        for r in range(n):
            for c in range(n):
                room = self._room_at(r, c)
                for d in DIRECTIONS:
                    dr, dc = _DELTAS[d]
                    if not (0 <= r + dr < n and 0 <= c + dc < n):
                        wall = self.vocab.entities.intern(f"wall_border_{k}")
                        self._categories[wall] = "wall"
                        self._border_wall[(room, d)] = wall
                        self.border_walls.append(wall)
                        k += 1

        self._static_start = {
            obj: self.room_ids[int(room)]
            for obj, room in zip(
                self.static_objects, rng.integers(self.num_rooms, size=len(self.static_objects))
            )
        }
        self._moving_start = {
            obj: self.room_ids[int(room)]
            for obj, room in zip(
                self.moving_objects, rng.integers(self.num_rooms, size=len(self.moving_objects))
            )
        }

    def entity_category(self, ent: int) -> str:
        return self._categories.get(ent, "unknown")

    def is_room(self, ent: int) -> bool:
        return self._categories.get(ent) == "room"

    def policy_context(self) -> SymbolicContext:
        return SymbolicContext(
            agent=self.agent,
            unknown=self.unknown,
            at_location=self.at_location,
            directions=self.direction_ids,
            is_room=self.is_room,
        )

    # -- dynamics ----------------------------------------------------------

    def _wall_states(self, t: int) -> dict[int, bool]:
        states = {w: s.closed(t) for w, s in self._wall_schedule.items()}
        for w in self.border_walls:
            states[w] = True
        return states

    def _passage(self, room: int, direction: str, t: int) -> tuple[bool, int]:
        """Return (open, target): target is the adjacent room or the blocking wall entity."""
        r, c = self._coords(room)
        dr, dc = _DELTAS[direction]
        n = self.config.grid_length
        r2, c2 = r + dr, c + dc
        if not (0 <= r2 < n and 0 <= c2 < n):
            return False, self._border_wall[(room, direction)]
        neighbor = self._room_at(r2, c2)
        edge = (room, neighbor) if self._room_index[room] < self._room_index[neighbor] else (neighbor, room)
        wall = self._edge_wall.get(edge)
        if wall is not None and self._wall_schedule[wall].closed(t):
            return False, wall
        return True, neighbor

    def open_directions(self, room: int, t: int) -> list[str]:
        return [d for d in DIRECTIONS if self._passage(room, d, t)[0]]

    def _observe(self, state: HiddenState) -> Observation:
        room = state.agent_room
        triples = [Triple(self.agent, self.at_location, room)]
        for d, rel in zip(DIRECTIONS, self.direction_ids):
            _, target = self._passage(room, d, state.step)
            triples.append(Triple(room, rel, target))
        for obj in self.objects:
            if state.object_rooms[obj] == room:
                triples.append(Triple(obj, self.at_location, room))
        perm = self._shuffle_rng.permutation(len(triples))
        return Observation(tuple(triples[i] for i in perm))

    def _make_query(self, state: HiddenState) -> Query:
        obj = self._query_order[state.step % len(self._query_order)]
        return Query(obj, self.at_location, state.object_rooms[obj])

    def _stream(self, tag: int, split_aware: bool = False) -> np.random.Generator:
        entropy = [self.config.world_seed, self._episode_seed, tag]
        if split_aware:
            entropy.append(_SPLIT_CODES[self.config.query_split])
        return np.random.default_rng(np.random.SeedSequence(entropy))

    def reset(self, episode_seed: int) -> tuple[HiddenState, Observation, Query]:
        self._episode_seed = episode_seed
        self._shuffle_rng = self._stream(_TAG_SHUFFLE)
        self._move_rng = self._stream(_TAG_MOVE)
        query_rng = self._stream(_TAG_QUERY, split_aware=True)
        order = query_rng.permutation(len(self.objects))
        self._query_order = tuple(self.objects[int(i)] for i in order)

        rooms = dict(self._static_start)
        rooms.update(self._moving_start)
        state = HiddenState(
            step=0,
            agent_room=self._room_at(0, 0),
            object_rooms=rooms,
            wall_states=self._wall_states(0),
        )
        self._state = state
        obs = self._observe(state)
        self._query = self._make_query(state)
        return state, obs, self._query

    def policy_rng(self) -> np.random.Generator:
        """Deterministic per-episode stream for symbolic-policy fallbacks."""
        return self._stream(_TAG_POLICY)

    @property
    def state(self) -> HiddenState:
        return self._state

    @property
    def pending_query(self) -> Query:
        return self._query

    def step(
        self, move: str, answer: int
    ) -> tuple[HiddenState, Observation, Query, float, bool]:
        """Answer the pending query, apply the move, advance walls and objects."""
        state = self._state
        if state is None:
            raise UsageError("step() before reset()")
        if state.step >= self.config.horizon:
            raise UsageError("episode is finished; reset() to start a new one")
        if move not in MOVES:
            raise UsageError(f"unknown move: {move!r}")

        reward = 1.0 if answer == self._query.truth else 0.0

        t = state.step
        agent_room = state.agent_room
        if move != "stay":
            is_open, target = self._passage(agent_room, move, t)
            if is_open:
                agent_room = target

        t1 = t + 1
        rooms = dict(state.object_rooms)
        for obj in self.moving_objects:
            if self._move_rng.random() < 0.5:
                continue
            open_dirs = self.open_directions(rooms[obj], t1)
            if not open_dirs:
                continue
            d = open_dirs[int(self._move_rng.integers(len(open_dirs)))]
            rooms[obj] = self._passage(rooms[obj], d, t1)[1]

        new_state = HiddenState(
            step=t1,
            agent_room=agent_room,
            object_rooms=rooms,
            wall_states=self._wall_states(t1),
        )
        done = t1 == self.config.horizon
        self._state = new_state
        obs = self._observe(new_state)
        self._query = self._make_query(new_state)
        return new_state, obs, self._query, reward, done

    # -- rendering ---------------------------------------------------------

    def render_birdseye(self, state: HiddenState | None = None) -> str:
        """ASCII bird's-eye view: '@' agent, digits object counts, closed walls drawn solid."""
        state = state or self._state
        if state is None:
            raise UsageError("no state to render")
        n = self.config.grid_length
        counts: dict[int, int] = {}
        for room in state.object_rooms.values():
            counts[room] = counts.get(room, 0) + 1

        def closed_between(a: int, b: int) -> bool:
            edge = (a, b) if self._room_index[a] < self._room_index[b] else (b, a)
            wall = self._edge_wall.get(edge)
            return wall is not None and state.wall_states[wall]

        lines = []
        for r in range(n):
            top = []
            for c in range(n):
                if r == 0 or closed_between(self._room_at(r - 1, c), self._room_at(r, c)):
                    top.append("+---")
                else:
                    top.append("+   ")
            lines.append("".join(top) + "+")
            row = []
            for c in range(n):
                room = self._room_at(r, c)
                if c == 0 or closed_between(self._room_at(r, c - 1), room):
                    row.append("|")
                else:
                    row.append(" ")
                marker = "@" if state.agent_room == room else " "
                cnt = counts.get(room, 0)
                cnt_char = " " if cnt == 0 else (str(cnt) if cnt <= 9 else "*")
                row.append(f"{marker}{cnt_char} ")
            lines.append("".join(row) + "|")
        lines.append("+---" * n + "+")
        return "\n".join(lines) + "\n"
