"""Symbolic semantics of a network: states, successors, layered exploration, trace sets."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Iterable

from .errors import EmptyInitialState, LimitReached
from .linarith import LinearInequality, Polyhedron, Relation
from .model import Network, Transition

EQUALITY = "equality"
INCLUSION = "inclusion"


@dataclass(frozen=True)
class SymbolicState:
    locations: tuple[str, ...]
    discretes: tuple[int, ...]
    constraint: Polyhedron

    @property
    def key(self) -> tuple:
        return (self.locations, self.discretes)


class _Compiled:
    """Per-network lookup tables used by the successor computation."""

    def __init__(self, net: Network):
        self.net = net
        self.owners = net.action_owners()
        self.outgoing = [
            {loc: comp.outgoing(loc) for loc in comp.locations} for comp in net.components
        ]
        self._inv: dict[tuple[str, ...], Polyhedron] = {}

    def invariant(self, locations: tuple[str, ...]) -> Polyhedron:
        inv = self._inv.get(locations)
        if inv is None:
            inv = Polyhedron.true(self.net.registry)
            for comp, loc in zip(self.net.components, locations):
                inv = inv.intersect(comp.invariants[loc])
            self._inv[locations] = inv
        return inv


@lru_cache(maxsize=64)
def _compiled(net: Network) -> _Compiled:
    return _Compiled(net)


def initial_state(net: Network, extra: Polyhedron | None = None) -> SymbolicState:
    """``(q0, v0, C0)`` with all clocks equal, nonnegative, time-elapsed within ``I(q0)``."""
    reg = net.registry
    comp = _compiled(net)
    locations = tuple(c.initial_location for c in net.components)
    inv = comp.invariant(locations)
    rows = []
    n = reg.size
    for i in range(len(reg.clocks) - 1):
        coeffs = [0] * n
        coeffs[i], coeffs[i + 1] = 1, -1
        rows.append(LinearInequality.make(coeffs, 0, Relation.EQ))
    if reg.clocks:
        coeffs = [0] * n
        coeffs[0] = 1
        rows.append(LinearInequality.make(coeffs, 0, Relation.GE))
    c = net.initial_constraint.intersect(inv).intersect(net.pins).conjoin(*rows)
    if extra is not None:
        c = c.intersect(extra)
    c = c.time_elapse().intersect(inv)
    if not c.is_satisfiable():
        raise EmptyInitialState("empty initial state")
    discretes = tuple(net.initial_discretes.get(d, 0) for d in reg.discretes)
    return SymbolicState(locations, discretes, c)


def _global_moves(comp: _Compiled, locations: tuple[str, ...]) -> Iterable[tuple[str | None, tuple]]:
    """Enabled-by-structure global moves as ``(action, ((component index, transition), ...))``.

    Components in declaration order, transitions in source order; a shared
    action is emitted once, from its first owner, with every combination of
    the other owners' matching transitions.
    """
    for i, loc in enumerate(locations):
        for t in comp.outgoing[i][loc]:
            owners = comp.owners.get(t.action, (i,)) if t.action is not None else (i,)
            if len(owners) == 1:
                yield t.action, ((i, t),)
                continue
            if owners[0] != i:
                continue
            others = []
            for j in owners[1:]:
                others.append([(j, u) for u in comp.outgoing[j][locations[j]] if u.action == t.action])
            for rest in product(*others):
                yield t.action, ((i, t),) + rest


def successors(net: Network, s: SymbolicState) -> list[tuple[str | None, SymbolicState]]:
    """One discrete step followed by time elapse, bounded by the target invariant."""
    comp = _compiled(net)
    reg = net.registry
    dnames = reg.discretes
    valuation = dict(zip(dnames, s.discretes))
    out = []
    for action, move in _global_moves(comp, s.locations):
        transitions: list[Transition] = [t for _, t in move]
        if not all(g.holds(valuation) for t in transitions for g in t.discrete_guard):
            continue
        c = s.constraint
        for t in transitions:
            c = c.intersect(t.guard)
        if not c.is_satisfiable():
            continue
        resets = set()
        new_vals = dict(valuation)
        for t in transitions:
            resets |= t.resets
            for u in t.discrete_updates:
                new_vals[u.variable] = valuation[u.value] if isinstance(u.value, str) else u.value
        locations = list(s.locations)
        for i, t in move:
            locations[i] = t.target
        locations = tuple(locations)
        inv = comp.invariant(locations)
        c = c.reset_clocks(sorted(resets, key=reg.index)).intersect(inv)
        if not c.is_satisfiable():
            continue
        c = c.time_elapse().intersect(inv)
        if not c.is_satisfiable():
            continue
        out.append((action, SymbolicState(locations, tuple(new_vals[d] for d in dnames), c)))
    return out


class StateSpace:
    """Reachable states keyed by ``(locations, discretes)`` with stable BFS-ordered ids."""

    def __init__(self, net: Network, mode: str = EQUALITY, acyclic: bool = False):
        if mode not in (EQUALITY, INCLUSION):
            raise ValueError(f"unknown fixpoint mode {mode!r}")
        self.net = net
        self.mode = mode
        self.acyclic = acyclic
        self.states: list[SymbolicState] = []
        self.layers: list[int] = []
        self.index: dict[tuple, list[int]] = {}
        self.edges: list[tuple[int, str | None, int]] = []
        self._edge_set: set = set()
        self.limit: str | None = None  # "depth" or "time" when exploration stopped early

    @property
    def complete(self) -> bool:
        return self.limit is None

    def __len__(self) -> int:
        return len(self.states)

    def find(self, s: SymbolicState) -> int | None:
        """Id of a stored state that makes ``s`` a duplicate, if any."""
        if self.acyclic:
            return None
        for sid in self.index.get(s.key, ()):
            stored = self.states[sid].constraint
            if stored == s.constraint:
                return sid
            if self.mode == EQUALITY:
                if stored.same_as(s.constraint):
                    return sid
            elif s.constraint.includes(stored):
                return sid
        return None

    def add(self, s: SymbolicState, layer: int = 0) -> tuple[int, bool]:
        """Store ``s`` unless it duplicates a stored state; returns ``(id, is_new)``."""
        assert s.constraint.is_satisfiable(), "empty states are never stored"
        sid = self.find(s)
        if sid is not None:
            return sid, False
        sid = len(self.states)
        self.states.append(s)
        self.layers.append(layer)
        self.index.setdefault(s.key, []).append(sid)
        return sid, True

    def add_edge(self, src: int, action: str | None, tgt: int):
        e = (src, action, tgt)
        if e not in self._edge_set:
            self._edge_set.add(e)
            self.edges.append(e)

    def frontier(self, layer: int) -> list[int]:
        return [i for i, l in enumerate(self.layers) if l == layer]

    def conjoin_all(self, row: LinearInequality) -> list[int]:
        """Conjoin ``row`` onto every stored constraint; drop and return states made empty."""
        dead = []
        for sid, s in enumerate(self.states):
            c = s.constraint.conjoin(row)
            if not c.is_satisfiable():
                dead.append(sid)
            self.states[sid] = SymbolicState(s.locations, s.discretes, c)
        if dead:
            self.remove(dead)
        return dead

    def remove(self, ids: Iterable[int]):
        """Delete states and their incident edges, renumbering the survivors in order."""
        gone = set(ids)
        remap = {}
        states, layers = [], []
        for sid, (s, layer) in enumerate(zip(self.states, self.layers)):
            if sid in gone:
                continue
            remap[sid] = len(states)
            states.append(s)
            layers.append(layer)
        self.states, self.layers = states, layers
        self.index = {}
        for sid, s in enumerate(states):
            self.index.setdefault(s.key, []).append(sid)
        edges = [(remap[a], act, remap[b]) for a, act, b in self.edges if a in remap and b in remap]
        self.edges = edges
        self._edge_set = set(edges)


class Deadline:
    def __init__(self, seconds: float | None):
        self.end = None if seconds is None else time.monotonic() + seconds

    def check(self, partial=None):
        if self.end is not None and time.monotonic() > self.end:
            raise LimitReached("time", partial)


def post(space: StateSpace, frontier: list[int], layer: int, deadline: Deadline | None = None) -> list[int]:
    """Add the successors of ``frontier`` at ``layer``; return the ids of new states."""
    new = []
    for sid in frontier:
        if deadline is not None:
            deadline.check(space)
        for action, succ in successors(space.net, space.states[sid]):
            tid, fresh = space.add(succ, layer)
            space.add_edge(sid, action, tid)
            if fresh:
                new.append(tid)
    return new


def has_new_successor(space: StateSpace, frontier: list[int]) -> bool:
    for sid in frontier:
        for _, succ in successors(space.net, space.states[sid]):
            if space.find(succ) is None:
                return True
    return False


def reachable(
    net: Network,
    depth_limit: int | None = None,
    time_limit: float | None = None,
    acyclic: bool = False,
    mode: str = EQUALITY,
    extra: Polyhedron | None = None,
) -> StateSpace:
    """Breadth-first exploration to a fixpoint, or until a limit flags the result."""
    space = StateSpace(net, mode, acyclic)
    deadline = Deadline(time_limit)
    sid, _ = space.add(initial_state(net, extra), 0)
    frontier, depth = [sid], 0
    try:
        while frontier:
            deadline.check(space)
            if depth_limit is not None and depth >= depth_limit:
                if has_new_successor(space, frontier):
                    space.limit = "depth"
                break
            depth += 1
            frontier = post(space, frontier, depth, deadline)
    except LimitReached:
        space.limit = "time"
    return space


@dataclass(frozen=True)
class TraceSet:
    """Location/action graph obtained by quotienting a state space onto its keys."""

    nodes: tuple[tuple, ...]  # (locations, discretes) in first-reached order
    edges: tuple[tuple[int, str | None, int], ...]
    discrete_names: tuple[str, ...] = ()
    component_names: tuple[str, ...] = field(default=(), compare=False)

    def signature(self) -> tuple[frozenset, frozenset]:
        return (
            frozenset(self.nodes),
            frozenset((self.nodes[a], act, self.nodes[b]) for a, act, b in self.edges),
        )

    def same_graph(self, other: "TraceSet") -> bool:
        return self.signature() == other.signature()

    def node_label(self, i: int) -> str:
        locations, discretes = self.nodes[i]
        label = ", ".join(locations)
        if self.discrete_names:
            label += " | " + ", ".join(f"{n}={v}" for n, v in zip(self.discrete_names, discretes))
        return label

    def locations(self) -> set[str]:
        return {loc for locs, _ in self.nodes for loc in locs}


def trace_set(space: StateSpace) -> TraceSet:
    node_of: dict[tuple, int] = {}
    for s in space.states:
        node_of.setdefault(s.key, len(node_of))
    edges = set()
    for a, act, b in space.edges:
        edges.add((node_of[space.states[a].key], act, node_of[space.states[b].key]))
    ordered = sorted(edges, key=lambda e: (e[0], e[2], e[1] or ""))
    nodes = tuple(sorted(node_of, key=node_of.get))
    return TraceSet(
        nodes,
        tuple(ordered),
        space.net.registry.discretes,
        tuple(c.name for c in space.net.components),
    )


def format_state_listing(space: StateSpace) -> str:
    """One ``STATE <id>: <locations> | <discretes> | <constraint>`` line per state."""
    names = space.net.registry.discretes
    lines = []
    for sid, s in enumerate(space.states):
        disc = ", ".join(f"{n}={v}" for n, v in zip(names, s.discretes)) or "-"
        lines.append(f"STATE {sid}: {', '.join(s.locations)} | {disc} | {s.constraint.render()}")
    return "\n".join(lines) + ("\n" if lines else "")
