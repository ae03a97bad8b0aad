"""The inverse method: generalise a reference valuation into a behavioral tile.

Starting from the reference valuation ``pi0``, states are explored layer by
layer.  Whenever a stored state's parameter projection excludes ``pi0``, the
first violated inequality ``J`` of that projection is negated and conjoined
to the working constraint.  The result ``K0`` is the intersection of the
parameter projections of all states at the fixpoint.

Two refinement variants are available: by default ``not J`` is conjoined onto
every stored state in place (states that become empty are deleted); with
``optimized=False`` the state set is recomputed from the initial state up to
the current depth, which serves as a differential check of the former.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

from .errors import IncompatibleInitialState, LimitReached, UsageError
from .linarith import LinearInequality, Polyhedron, Relation, negate_inequality, split_equality
from .model import Network
from .reachability import (
    EQUALITY,
    Deadline,
    StateSpace,
    TraceSet,
    has_new_successor,
    initial_state,
    post,
    trace_set,
)


@dataclass
class IMStats:
    iterations: int = 0
    refinements: int = 0
    k0_size: int = 0
    states: int = 0
    transitions: int = 0
    time_ms: int = 0


@dataclass
class IMResult:
    k0: Polyhedron
    space: StateSpace
    traces: TraceSet
    stats: IMStats
    negated: list[LinearInequality] = field(default_factory=list)
    complete: bool = True
    limit: str | None = None


def _point(c: Polyhedron, pi0: Sequence) -> list:
    return [0] * len(c.registry.clocks) + list(pi0)


def select_incompatible(c: Polyhedron, pi0: Sequence) -> LinearInequality:
    """First inequality of ``c`` (canonical order, equalities split) violated by ``pi0``."""
    point = _point(c, pi0)
    for row in c.constraints:
        halves = split_equality(row) if row.relation is Relation.EQ else (row,)
        for half in halves:
            if not half.holds_at(point):
                return half
    raise UsageError("the valuation satisfies the constraint; nothing to select")


class _Run:
    def __init__(self, net: Network, pi0: Sequence, optimized: bool, fixpoint: str,
                 depth_limit: int | None, time_limit: float | None, acyclic: bool):
        if len(pi0) != len(net.registry.parameters):
            raise UsageError(f"valuation has {len(pi0)} entries, expected {len(net.registry.parameters)}")
        self.net = net
        self.pi0 = tuple(pi0)
        self.optimized = optimized
        self.fixpoint = fixpoint
        self.depth_limit = depth_limit
        self.acyclic = acyclic
        self.deadline = Deadline(time_limit)
        self.started = time.monotonic()
        self.k = Polyhedron.true(net.registry)
        self.negated: list[LinearInequality] = []
        self.depth = 0
        self._compatible: dict[Polyhedron, bool] = {}

    def projection_ok(self, c: Polyhedron) -> bool:
        ok = self._compatible.get(c)
        if ok is None:
            ok = c.eliminate_clocks().satisfies_point(self.pi0)
            self._compatible[c] = ok
        return ok

    def explore_to_depth(self) -> StateSpace:
        """Recompute from scratch every state within ``depth`` steps under ``K``."""
        space = StateSpace(self.net, self.fixpoint, self.acyclic)
        sid, _ = space.add(initial_state(self.net, self.k), 0)
        frontier = [sid]
        for layer in range(1, self.depth + 1):
            frontier = post(space, frontier, layer, self.deadline)
        return space

    def refine(self, space: StateSpace) -> StateSpace:
        while True:
            self.deadline.check(space)
            bad = next((s for s in space.states if not self.projection_ok(s.constraint)), None)
            if bad is None:
                return space
            j = select_incompatible(bad.constraint.eliminate_clocks(), self.pi0)
            not_j = negate_inequality(j)
            self.k = self.k.conjoin(not_j)
            self.negated.append(not_j)
            if self.optimized:
                before = [self.projection_ok(s.constraint) for s in space.states]
                dead = set(space.conjoin_all(not_j))
                # a pi0-compatible state stays compatible after conjoining a pi0-compatible ineq
                survivors = [ok for sid, ok in enumerate(before) if sid not in dead]
                for s, ok in zip(space.states, survivors):
                    if ok:
                        self._compatible[s.constraint] = True
            else:
                space = self.explore_to_depth()

    def result(self, space: StateSpace, complete: bool = True, limit: str | None = None) -> IMResult:
        k0 = Polyhedron.true(self.net.registry)
        for s in space.states:
            k0 = k0.intersect(s.constraint.eliminate_clocks())
        k0 = k0.minimized()
        stats = IMStats(
            iterations=self.depth,
            refinements=len(self.negated),
            k0_size=len(k0),
            states=len(space.states),
            transitions=len(space.edges),
            time_ms=int((time.monotonic() - self.started) * 1000),
        )
        return IMResult(k0, space, trace_set(space), stats, list(self.negated), complete, limit)

    def run(self) -> IMResult:
        s0 = initial_state(self.net)
        if not self.projection_ok(s0.constraint):
            raise IncompatibleInitialState("the initial state is incompatible with the reference valuation")
        space = StateSpace(self.net, self.fixpoint, self.acyclic)
        space.add(s0, 0)
        try:
            while True:
                space = self.refine(space)
                self.deadline.check(space)
                frontier = space.frontier(self.depth)
                if self.depth_limit is not None and self.depth >= self.depth_limit:
                    if has_new_successor(space, frontier):
                        raise LimitReached("depth", space)
                    break
                if not post(space, frontier, self.depth + 1, self.deadline):
                    break
                self.depth += 1
        except LimitReached as exc:
            space = exc.partial if isinstance(exc.partial, StateSpace) else space
            raise LimitReached(exc.reason, self.result(space, complete=False, limit=exc.reason)) from None
        res = self.result(space)
        assert res.k0.satisfies_point(self.pi0)
        return res


def im(
    net: Network,
    pi0: Sequence,
    optimized: bool = True,
    fixpoint: str = EQUALITY,
    depth_limit: int | None = None,
    time_limit: float | None = None,
    acyclic: bool = False,
) -> IMResult:
    """Synthesize ``K0`` around ``pi0``.

    Raises :class:`IncompatibleInitialState` when ``pi0`` is excluded by the
    initial state and :class:`LimitReached` (carrying a partial
    :class:`IMResult`) when a depth or time limit cuts the exploration.
    """
    return _Run(net, pi0, optimized, fixpoint, depth_limit, time_limit, acyclic).run()
