"""Behavioral cartography: cover the integer points of a rectangle with IM tiles."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import EmptyInitialState, IncompatibleInitialState, LimitReached, UsageError
from .inverse_method import IMStats, im
from .linarith import Polyhedron
from .model import Network, RectangleV0
from .reachability import EQUALITY, TraceSet

FULL = "full"
RANDOM = "random"

GOOD, BAD, UNCLASSIFIED = "good", "bad", "unclassified"


@dataclass
class Tile:
    constraint: Polyhedron
    witness: tuple[Fraction, ...]
    traces: TraceSet
    stats: IMStats
    verdict: str = UNCLASSIFIED

    def contains(self, pi: Sequence) -> bool:
        return self.constraint.satisfies_point(tuple(pi))


@dataclass
class Tiling:
    tiles: list[Tile]
    v0: RectangleV0
    mode: str = FULL
    samples: int | None = None
    seed: int | None = None
    failures: list[tuple[tuple, str]] = field(default_factory=list)  # (point, reason)

    def __len__(self) -> int:
        return len(self.tiles)

    def __iter__(self):
        return iter(self.tiles)


def integer_points(v0: RectangleV0):
    """Integer points of ``v0`` in ascending lexicographic order."""
    ranges = [range(math.ceil(lo), math.floor(hi) + 1) for lo, hi in v0.bounds]
    for point in itertools.product(*ranges):
        yield tuple(Fraction(v) for v in point)


def grid_points(v0: RectangleV0, denominator: int):
    """Points of ``v0`` whose coordinates are multiples of ``1/denominator``."""
    if denominator < 1:
        raise UsageError("grid denominator must be at least 1")
    ranges = [range(math.ceil(lo * denominator), math.floor(hi * denominator) + 1) for lo, hi in v0.bounds]
    for point in itertools.product(*ranges):
        yield tuple(Fraction(v, denominator) for v in point)


def covered(pi: Sequence, tiling: Tiling | Sequence[Tile]) -> bool:
    tiles = tiling.tiles if isinstance(tiling, Tiling) else tiling
    return any(t.contains(pi) for t in tiles)


def bc(
    net: Network,
    v0: RectangleV0,
    mode: str = FULL,
    samples: int | None = None,
    seed: int = 0,
    optimized: bool = True,
    fixpoint: str = EQUALITY,
    depth_limit: int | None = None,
    time_limit: float | None = None,
    acyclic: bool = False,
) -> Tiling:
    """Run IM on every uncovered integer point of ``v0`` (or on ``samples`` random ones).

    Limits apply to each IM call; points whose call fails are recorded in
    ``Tiling.failures`` and stay uncovered.
    """
    if len(v0) != len(net.registry.parameters):
        raise UsageError(f"rectangle has {len(v0)} dimensions, expected {len(net.registry.parameters)}")
    tiling = Tiling([], v0, mode, samples, seed if mode == RANDOM else None)
    if mode == FULL:
        points = integer_points(v0)
    elif mode == RANDOM:
        if samples is None or samples < 1:
            raise UsageError("random mode needs at least one sample")
        pool = list(integer_points(v0))
        if not pool:
            return tiling
        rng = random.Random(seed)
        points = (rng.choice(pool) for _ in range(samples))
    else:
        raise UsageError(f"unknown cartography mode {mode!r}")
    failed = set()
    for pi in points:
        if pi in failed or covered(pi, tiling):
            continue
        try:
            res = im(net, pi, optimized=optimized, fixpoint=fixpoint, depth_limit=depth_limit,
                     time_limit=time_limit, acyclic=acyclic)
        except LimitReached as exc:
            tiling.failures.append((pi, f"{exc.reason} limit"))
            failed.add(pi)
            continue
        except (IncompatibleInitialState, EmptyInitialState) as exc:
            tiling.failures.append((pi, str(exc)))
            failed.add(pi)
            continue
        tiling.tiles.append(Tile(res.k0, pi, res.traces, res.stats))
    return tiling


@dataclass
class CoverageReport:
    tiles: int
    integer_covered: int
    integer_total: int
    grid_covered: int
    grid_total: int
    grid_denominator: int

    @property
    def integer_fraction(self) -> Fraction:
        return Fraction(self.integer_covered, self.integer_total) if self.integer_total else Fraction(0)

    @property
    def grid_fraction(self) -> Fraction:
        return Fraction(self.grid_covered, self.grid_total) if self.grid_total else Fraction(0)


def coverage_stats(tiling: Tiling, v0: RectangleV0 | None = None, grid_denominator: int = 1) -> CoverageReport:
    v0 = v0 or tiling.v0
    ints = list(integer_points(v0))
    grid = list(grid_points(v0, grid_denominator))
    return CoverageReport(
        tiles=len(tiling.tiles),
        integer_covered=sum(covered(p, tiling) for p in ints),
        integer_total=len(ints),
        grid_covered=sum(covered(p, tiling) for p in grid),
        grid_total=len(grid),
        grid_denominator=grid_denominator,
    )


# --- trace properties --------------------------------------------------------------


@dataclass(frozen=True)
class ForbiddenLocations:
    """Good iff no reachable location vector contains one of ``locations``.

    A name may be qualified as ``component.location``.
    """

    locations: frozenset[str]

    def check_names(self, net: Network):
        for name in sorted(self.locations):
            comp, _, loc = name.rpartition(".")
            if comp:
                if loc not in net.component(comp).locations:
                    raise UsageError(f"unknown location {name!r}")
            elif name not in net.all_locations():
                raise UsageError(f"unknown location {name!r}")

    def holds(self, traces: TraceSet) -> bool:
        for locations, _ in traces.nodes:
            for comp, loc in itertools.zip_longest(traces.component_names, locations):
                if loc in self.locations or f"{comp}.{loc}" in self.locations:
                    return False
        return True


@dataclass(frozen=True)
class ActionPrecedes:
    """Good iff, on every trace, ``second`` never occurs before the first ``first``."""

    first: str
    second: str

    def check_names(self, net: Network):
        for a in (self.first, self.second):
            if a not in net.all_actions():
                raise UsageError(f"unknown action {a!r}")

    def holds(self, traces: TraceSet) -> bool:
        if not traces.nodes:
            return True
        seen = {0}
        stack = [0]
        while stack:
            n = stack.pop()
            for a, act, b in traces.edges:
                if a != n or act == self.first:
                    continue
                if act == self.second:
                    return False
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
        return True


def classify(tiling: Tiling, prop, net: Network | None = None) -> tuple[list[Tile], list[Tile]]:
    """Split tiles into (good, bad) and record each tile's verdict."""
    if net is not None:
        prop.check_names(net)
    good, bad = [], []
    for tile in tiling.tiles:
        ok = prop.holds(tile.traces)
        tile.verdict = GOOD if ok else BAD
        (good if ok else bad).append(tile)
    return good, bad
