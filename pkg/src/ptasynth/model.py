"""Networks of parametric timed automata with integer discrete variables."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence, Union

from .errors import UsageError
from .linarith import LinearInequality, Polyhedron, Relation, VariableRegistry

INTERNAL = None  # action of an unlabeled transition

DISCRETE_RELATIONS = ("<", "<=", "=", ">=", ">")


@dataclass(frozen=True)
class DiscreteGuard:
    variable: str
    relation: str
    value: int

    def holds(self, valuation: dict[str, int]) -> bool:
        v = valuation[self.variable]
        return {
            "<": v < self.value,
            "<=": v <= self.value,
            "=": v == self.value,
            ">=": v >= self.value,
            ">": v > self.value,
        }[self.relation]


@dataclass(frozen=True)
class DiscreteUpdate:
    """``variable := value`` where ``value`` is an integer or another discrete's name."""

    variable: str
    value: Union[int, str]


@dataclass(frozen=True)
class Transition:
    source: str
    guard: Polyhedron
    target: str
    action: str | None = INTERNAL
    resets: frozenset[str] = frozenset()
    discrete_guard: tuple[DiscreteGuard, ...] = ()
    discrete_updates: tuple[DiscreteUpdate, ...] = ()


@dataclass(frozen=True)
class Component:
    name: str
    actions: tuple[str, ...]
    invariants: dict[str, Polyhedron]  # location name -> invariant, in declaration order
    initial_location: str
    transitions: tuple[Transition, ...] = ()

    @property
    def locations(self) -> tuple[str, ...]:
        return tuple(self.invariants)

    def outgoing(self, location: str) -> list[Transition]:
        return [t for t in self.transitions if t.source == location]

    def __hash__(self):
        return hash((self.name, self.initial_location, self.transitions))


@dataclass(frozen=True)
class Network:
    registry: VariableRegistry
    components: tuple[Component, ...]
    initial_constraint: Polyhedron  # K, parameters only
    initial_discretes: dict[str, int] = field(default_factory=dict)
    initial_pins: Polyhedron | None = None  # init-block conjuncts mentioning clocks

    def __post_init__(self):
        names = [c.name for c in self.components]
        if len(set(names)) != len(names):
            raise UsageError("component names must be unique")
        if self.initial_constraint.mentions_clocks():
            raise UsageError("the initial parameter constraint must not mention clocks")

    @property
    def pins(self) -> Polyhedron:
        return self.initial_pins if self.initial_pins is not None else Polyhedron.true(self.registry)

    def component(self, name: str) -> Component:
        for c in self.components:
            if c.name == name:
                return c
        raise UsageError(f"unknown component {name!r}")

    def action_owners(self) -> dict[str, tuple[int, ...]]:
        """Indices of the components whose alphabet contains each action."""
        owners: dict[str, list[int]] = {}
        for i, comp in enumerate(self.components):
            for a in comp.actions:
                owners.setdefault(a, []).append(i)
        return {a: tuple(ix) for a, ix in owners.items()}

    def all_locations(self) -> set[str]:
        return {loc for c in self.components for loc in c.locations}

    def all_actions(self) -> set[str]:
        return {a for c in self.components for a in c.actions}

    def __hash__(self):
        return hash((self.registry, self.components, self.initial_constraint))


@dataclass(frozen=True)
class RectangleV0:
    """Closed per-parameter bounds ``[lo_i, hi_i]``."""

    bounds: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        bounds = tuple((Fraction(lo), Fraction(hi)) for lo, hi in self.bounds)
        object.__setattr__(self, "bounds", bounds)
        for i, (lo, hi) in enumerate(bounds):
            if lo > hi:
                raise UsageError(f"empty interval for parameter {i}")

    def __len__(self) -> int:
        return len(self.bounds)

    def contains(self, pi: Sequence) -> bool:
        return all(lo <= v <= hi for v, (lo, hi) in zip(pi, self.bounds))


def instantiate(net: Network, pi: Sequence) -> Network:
    """``A[pi]``: the network with every parameter pinned through the initial constraint."""
    reg = net.registry
    if len(pi) != len(reg.parameters):
        raise UsageError(f"valuation has {len(pi)} entries, expected {len(reg.parameters)}")
    pins = []
    for j, v in zip(reg.parameter_indices, pi):
        coeffs = [0] * reg.size
        coeffs[j] = 1
        pins.append(LinearInequality.make(coeffs, -Fraction(v), Relation.EQ))
    return replace(net, initial_constraint=net.initial_constraint.conjoin(*pins))


@dataclass(frozen=True)
class Diagnostic:
    message: str
    span: object = None  # parser.SourceSpan when produced by the parser

    def __str__(self) -> str:
        return f"{self.span}: {self.message}" if self.span is not None else self.message


def _foreign_variables(poly: Polyhedron, reg: VariableRegistry) -> list[str]:
    if poly.registry == reg:
        return []
    out = []
    for j, name in enumerate(poly.registry.dims):
        if poly.mentions(j) and (not reg.has(name) or poly.registry.kind(name) != reg.kind(name)):
            out.append(name)
    if not out:
        out.append("<registry mismatch>")
    return out


def validate(net: Network) -> list[Diagnostic]:
    """Static checks; never raises on a structurally well-formed network."""
    reg = net.registry
    diags: list[Diagnostic] = []

    def check_poly(poly: Polyhedron, where: str, clocks_allowed: bool = True):
        for name in _foreign_variables(poly, reg):
            diags.append(Diagnostic(f"{where}: undeclared variable {name!r}"))
        if poly.registry == reg and not clocks_allowed and poly.mentions_clocks():
            diags.append(Diagnostic(f"{where}: must constrain parameters only"))

    check_poly(net.initial_constraint, "initial constraint", clocks_allowed=False)
    check_poly(net.pins, "initial pins")
    if not net.components:
        diags.append(Diagnostic("no automaton declared"))
    for d in net.initial_discretes:
        if d not in reg.discretes:
            diags.append(Diagnostic(f"init: undeclared discrete {d!r}"))
    for comp in net.components:
        locs = set(comp.locations)
        if comp.initial_location not in locs:
            diags.append(Diagnostic(f"{comp.name}: unknown initial location {comp.initial_location!r}"))
        for loc, inv in comp.invariants.items():
            check_poly(inv, f"{comp.name}.{loc} invariant")
        for k, t in enumerate(comp.transitions):
            where = f"{comp.name} transition {k} ({t.source} -> {t.target})"
            for loc in (t.source, t.target):
                if loc not in locs:
                    diags.append(Diagnostic(f"{where}: unknown location {loc!r}"))
            check_poly(t.guard, where)
            for x in sorted(t.resets):
                if x not in reg.clocks:
                    diags.append(Diagnostic(f"{where}: reset of undeclared clock {x!r}"))
            for g in t.discrete_guard:
                if g.variable not in reg.discretes:
                    diags.append(Diagnostic(f"{where}: undeclared discrete {g.variable!r}"))
                if g.relation not in DISCRETE_RELATIONS:
                    diags.append(Diagnostic(f"{where}: bad relation {g.relation!r}"))
            seen = set()
            for u in t.discrete_updates:
                if u.variable not in reg.discretes:
                    diags.append(Diagnostic(f"{where}: undeclared discrete {u.variable!r}"))
                if isinstance(u.value, str) and u.value not in reg.discretes:
                    diags.append(Diagnostic(f"{where}: undeclared discrete {u.value!r}"))
                if u.variable in seen:
                    diags.append(Diagnostic(f"{where}: {u.variable!r} updated twice"))
                seen.add(u.variable)
            if t.action is not None and t.action not in comp.actions:
                diags.append(Diagnostic(f"{where}: action {t.action!r} not in the alphabet of {comp.name}"))
    return diags
