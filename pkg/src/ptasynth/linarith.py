"""Exact linear arithmetic over the rationals and not-necessarily-closed polyhedra.

A :class:`Polyhedron` is a conjunction of linear constraints ``a.v + k REL 0`` with
``REL`` one of ``=``, ``>=``, ``>``, over the clocks and parameters of a
:class:`VariableRegistry`.  Coefficients are stored as machine-independent Python
integers (denominators are cleared on construction), so every operation is
exact.  All queries (emptiness, projection, entailment) reduce to
Fourier-Motzkin elimination with strictness tracking.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, Mapping, Sequence, Union

from .errors import UsageError

Number = Union[int, Fraction]
ParameterValuation = tuple  # tuple[Fraction, ...], one entry per parameter


class Relation(enum.IntEnum):
    EQ = 0
    GE = 1
    GT = 2

    @property
    def symbol(self) -> str:
        return ("=", ">=", ">")[self]


@dataclass(frozen=True)
class VariableRegistry:
    """Ordered names of clocks, parameters and discrete variables.

    Polyhedra range over ``clocks + parameters`` (in that order); discrete
    variables never enter a polyhedron.
    """

    clocks: tuple[str, ...] = ()
    parameters: tuple[str, ...] = ()
    discretes: tuple[str, ...] = ()

    def __post_init__(self):
        for attr in ("clocks", "parameters", "discretes"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        names = self.clocks + self.parameters + self.discretes
        seen = set()
        for name in names:
            if name in seen:
                raise UsageError(f"variable {name!r} declared twice")
            seen.add(name)

    @property
    def dims(self) -> tuple[str, ...]:
        return self.clocks + self.parameters

    @property
    def size(self) -> int:
        return len(self.clocks) + len(self.parameters)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.dims)}

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UsageError(f"unknown variable {name!r}") from None

    def has(self, name: str) -> bool:
        return name in self._index

    @property
    def clock_indices(self) -> range:
        return range(len(self.clocks))

    @property
    def parameter_indices(self) -> range:
        return range(len(self.clocks), self.size)

    def kind(self, name: str) -> str | None:
        if name in self.clocks:
            return "clock"
        if name in self.parameters:
            return "parameter"
        if name in self.discretes:
            return "discrete"
        return None


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


@dataclass(frozen=True, order=False)
class LinearInequality:
    """``sum(coeffs[i] * v[i]) + constant  REL  0`` in canonical integer form."""

    coeffs: tuple[int, ...]
    constant: int
    relation: Relation

    @classmethod
    def make(cls, coeffs: Sequence[Number], constant: Number, relation: Relation) -> "LinearInequality":
        """Build the canonical representative of a constraint with rational data."""
        values = [Fraction(c) for c in coeffs] + [Fraction(constant)]
        den = reduce(_lcm, (v.denominator for v in values), 1)
        ints = [int(v * den) for v in values]
        g = reduce(math.gcd, ints, 0)
        if g > 1:
            ints = [v // g for v in ints]
        if relation is Relation.EQ:
            lead = next((v for v in ints if v != 0), 0)
            if lead < 0:
                ints = [-v for v in ints]
        return cls(tuple(ints[:-1]), ints[-1], Relation(relation))

    @property
    def is_constant(self) -> bool:
        return not any(self.coeffs)

    def truth(self) -> bool | None:
        """Truth value of a constraint without variables, ``None`` otherwise."""
        if not self.is_constant:
            return None
        return _holds(self.constant, self.relation)

    def value(self, point: Sequence[Number]) -> Fraction:
        return sum((Fraction(c) * v for c, v in zip(self.coeffs, point) if c), Fraction(self.constant))

    def holds_at(self, point: Sequence[Number]) -> bool:
        return _holds(self.value(point), self.relation)

    def sort_key(self):
        last = max((i for i, c in enumerate(self.coeffs) if c), default=-1)
        return (last, self.coeffs, self.constant, self.relation)

    def __str__(self) -> str:
        return f"{list(self.coeffs)} + {self.constant} {self.relation.symbol} 0"


def _holds(value: Number, relation: Relation) -> bool:
    if relation is Relation.EQ:
        return value == 0
    if relation is Relation.GE:
        return value >= 0
    return value > 0


def negate_inequality(j: LinearInequality) -> LinearInequality:
    """Complement of a half-space: strictness flips and the form changes sign."""
    if j.relation is Relation.EQ:
        raise UsageError("cannot negate an equality; decompose it into two inequalities first")
    rel = Relation.GE if j.relation is Relation.GT else Relation.GT
    return LinearInequality.make([-c for c in j.coeffs], -j.constant, rel)


def split_equality(j: LinearInequality) -> tuple[LinearInequality, LinearInequality]:
    """``t = 0`` as ``(t >= 0, -t >= 0)``."""
    return (
        LinearInequality(j.coeffs, j.constant, Relation.GE),
        LinearInequality.make([-c for c in j.coeffs], -j.constant, Relation.GE),
    )


# --- canonicalization ----------------------------------------------------------

_EMPTY = object()


def _canonicalize(rows: Iterable[LinearInequality]) -> tuple[LinearInequality, ...] | object:
    """Drop trivial rows and merge parallel bounds; return ``_EMPTY`` on contradiction.

    Rows sharing a direction ``t = d.v`` (d primitive, leading entry positive)
    are collapsed to the tightest lower bound and tightest upper bound on ``t``,
    or to ``t = b`` when both meet.
    """
    groups: dict[tuple[int, ...], list] = {}
    for row in rows:
        truth = row.truth()
        if truth is True:
            continue
        if truth is False:
            return _EMPTY
        g = reduce(math.gcd, row.coeffs, 0)
        lead = next(c for c in row.coeffs if c)
        m = g if lead > 0 else -g
        direction = tuple(c // m for c in row.coeffs)
        bound = Fraction(-row.constant, m)
        # lower/upper as (value, strict)
        entry = groups.setdefault(direction, [None, None])
        if row.relation is Relation.EQ:
            bounds = [(0, (bound, False)), (1, (bound, False))]
        else:
            strict = row.relation is Relation.GT
            bounds = [(0 if m > 0 else 1, (bound, strict))]
        for side, b in bounds:
            cur = entry[side]
            if cur is None:
                entry[side] = b
            elif side == 0:
                if b[0] > cur[0] or (b[0] == cur[0] and b[1]):
                    entry[side] = b
            else:
                if b[0] < cur[0] or (b[0] == cur[0] and b[1]):
                    entry[side] = b
    out = []
    for direction, (lo, hi) in groups.items():
        if lo is not None and hi is not None:
            if lo[0] > hi[0] or (lo[0] == hi[0] and (lo[1] or hi[1])):
                return _EMPTY
            if lo[0] == hi[0]:
                out.append(LinearInequality.make(direction, -lo[0], Relation.EQ))
                continue
        if lo is not None:
            out.append(LinearInequality.make(direction, -lo[0], Relation.GT if lo[1] else Relation.GE))
        if hi is not None:
            out.append(
                LinearInequality.make([-c for c in direction], hi[0], Relation.GT if hi[1] else Relation.GE)
            )
    out.sort(key=LinearInequality.sort_key)
    return tuple(out)


def _combine(p: LinearInequality, n: LinearInequality, j: int) -> LinearInequality:
    """Eliminate variable ``j`` between a lower bound ``p`` and an upper bound ``n``."""
    a, b = p.coeffs[j], -n.coeffs[j]
    coeffs = [b * pc + a * nc for pc, nc in zip(p.coeffs, n.coeffs)]
    const = b * p.constant + a * n.constant
    strict = p.relation is Relation.GT or n.relation is Relation.GT
    return LinearInequality.make(coeffs, const, Relation.GT if strict else Relation.GE)


def _substitute(r: LinearInequality, e: LinearInequality, j: int) -> LinearInequality:
    ej, rj = e.coeffs[j], r.coeffs[j]
    s = 1 if ej > 0 else -1
    coeffs = [abs(ej) * rc - s * rj * ec for rc, ec in zip(r.coeffs, e.coeffs)]
    const = abs(ej) * r.constant - s * rj * e.constant
    return LinearInequality.make(coeffs, const, r.relation)


def _fm_step(rows: Sequence[LinearInequality], j: int):
    """One Fourier-Motzkin step on column ``j``; returns canonical rows or ``_EMPTY``."""
    eq = next((r for r in rows if r.relation is Relation.EQ and r.coeffs[j]), None)
    if eq is not None:
        out = [_substitute(r, eq, j) if r.coeffs[j] else r for r in rows if r is not eq]
        return _canonicalize(out)
    keep, lower, upper = [], [], []
    for r in rows:
        c = r.coeffs[j]
        if c > 0:
            lower.append(r)
        elif c < 0:
            upper.append(r)
        else:
            keep.append(r)
    keep.extend(_combine(p, n, j) for p in lower for n in upper)
    return _canonicalize(keep)


def _fm_eliminate(rows, columns: Iterable[int]):
    for j in columns:
        if rows is _EMPTY:
            return _EMPTY
        if any(r.coeffs[j] for r in rows):
            rows = _fm_step(rows, j)
    return rows


def _elimination_cost(rows, j: int) -> tuple:
    pos = neg = 0
    for r in rows:
        c = r.coeffs[j]
        if c and r.relation is Relation.EQ:
            return (0, 0, j)
        if c > 0:
            pos += 1
        elif c < 0:
            neg += 1
    return (1, pos * neg - pos - neg, j)


def _rows_satisfiable(rows) -> bool:
    while rows is not _EMPTY and rows:
        live = {j for r in rows for j, c in enumerate(r.coeffs) if c}
        j = min(live, key=lambda k: _elimination_cost(rows, k))
        rows = _fm_step(rows, j)
    return rows is not _EMPTY


# --- polyhedra -------------------------------------------------------------------


@dataclass(frozen=True)
class Polyhedron:
    """Canonical conjunction of linear constraints over ``registry.dims``.

    The empty constraint list means *true*; ``empty=True`` is the canonical
    unsatisfiable value.  Instances are immutable; build them with
    :meth:`of`, :meth:`true` or :meth:`false`.
    """

    registry: VariableRegistry
    constraints: tuple[LinearInequality, ...] = ()
    empty: bool = False
    _sat: list = field(default_factory=lambda: [None], compare=False, repr=False, hash=False)

    @classmethod
    def of(cls, registry: VariableRegistry, rows: Iterable[LinearInequality]) -> "Polyhedron":
        rows = list(rows)
        for r in rows:
            if len(r.coeffs) != registry.size:
                raise UsageError("inequality dimension does not match the registry")
        canon = _canonicalize(rows)
        if canon is _EMPTY:
            return cls.false(registry)
        return cls(registry, canon)

    @classmethod
    def true(cls, registry: VariableRegistry) -> "Polyhedron":
        return cls(registry, ())

    @classmethod
    def false(cls, registry: VariableRegistry) -> "Polyhedron":
        p = cls(registry, (), True)
        p._sat[0] = False
        return p

    @classmethod
    def from_terms(
        cls, registry: VariableRegistry, terms: Mapping[str, Number], constant: Number, relation: Relation
    ) -> "Polyhedron":
        return cls.of(registry, [inequality(registry, terms, constant, relation)])

    # queries ------------------------------------------------------------------

    @property
    def is_true(self) -> bool:
        return not self.empty and not self.constraints

    def is_satisfiable(self) -> bool:
        if self._sat[0] is None:
            self._sat[0] = _rows_satisfiable(self.constraints)
        return self._sat[0]

    def mentions(self, index: int) -> bool:
        return any(r.coeffs[index] for r in self.constraints)

    def mentions_clocks(self) -> bool:
        return any(self.mentions(i) for i in self.registry.clock_indices)

    def contains(self, point: Sequence[Number]) -> bool:
        """Membership of a full point (one value per clock and parameter)."""
        if self.empty:
            return False
        return all(r.holds_at(point) for r in self.constraints)

    def contains_closure(self, point: Sequence[Number]) -> bool:
        if self.empty:
            return False
        return all(r.value(point) >= 0 if r.relation is not Relation.EQ else r.value(point) == 0
                   for r in self.constraints)

    def satisfies_point(self, pi: Sequence[Number]) -> bool:
        """Whether the parameter valuation ``pi`` satisfies a parameter-only constraint."""
        if len(pi) != len(self.registry.parameters):
            raise UsageError(f"valuation has {len(pi)} entries, expected {len(self.registry.parameters)}")
        if self.mentions_clocks():
            raise UsageError("constraint mentions clocks; eliminate them before testing a valuation")
        point = [0] * len(self.registry.clocks) + list(pi)
        return self.contains(point)

    # constructions ------------------------------------------------------------

    def _check(self, other: "Polyhedron"):
        if other.registry != self.registry:
            raise UsageError("polyhedra are defined over different variable registries")

    def intersect(self, other: "Polyhedron") -> "Polyhedron":
        self._check(other)
        if self.empty or other.empty:
            return Polyhedron.false(self.registry)
        if other.is_true:
            return self
        if self.is_true:
            return other
        return Polyhedron.of(self.registry, self.constraints + other.constraints)

    def conjoin(self, *rows: LinearInequality) -> "Polyhedron":
        if self.empty:
            return self
        return Polyhedron.of(self.registry, self.constraints + tuple(rows))

    def _columns(self, variables: Iterable[int | str]) -> list[int]:
        cols = []
        for v in variables:
            j = self.registry.index(v) if isinstance(v, str) else int(v)
            if not 0 <= j < self.registry.size:
                raise UsageError(f"variable index {j} out of range")
            cols.append(j)
        return sorted(set(cols))

    def eliminate(self, variables: Iterable[int | str]) -> "Polyhedron":
        """Existential projection: the result no longer mentions ``variables``."""
        if self.empty:
            return self
        cols = self._columns(variables)
        rows = self.constraints
        # cheapest column first keeps intermediate systems small
        pending = [j for j in cols if any(r.coeffs[j] for r in rows)]
        while pending and rows is not _EMPTY:
            j = min(pending, key=lambda k: _elimination_cost(rows, k))
            pending.remove(j)
            rows = _fm_step(rows, j)
            pending = [k for k in pending if rows is not _EMPTY and any(r.coeffs[k] for r in rows)]
        if rows is _EMPTY:
            return Polyhedron.false(self.registry)
        return Polyhedron(self.registry, rows)

    def eliminate_clocks(self) -> "Polyhedron":
        return self.eliminate(self.registry.clock_indices)

    def time_elapse(self) -> "Polyhedron":
        """All valuations reachable by letting every clock grow by the same ``d >= 0``."""
        if self.empty or not self.registry.clocks:
            return self
        nclk = len(self.registry.clocks)
        rows = []
        for r in self.constraints:
            drift = -sum(r.coeffs[:nclk])
            rows.append(LinearInequality.make(r.coeffs + (drift,), r.constant, r.relation))
        d = self.registry.size
        rows.append(LinearInequality.make((0,) * d + (1,), 0, Relation.GE))
        rows = _canonicalize(rows)
        rows = _fm_eliminate(rows, [d]) if rows is not _EMPTY else rows
        if rows is _EMPTY:
            return Polyhedron.false(self.registry)
        return Polyhedron.of(self.registry, [LinearInequality.make(r.coeffs[:d], r.constant, r.relation) for r in rows])

    def reset_clocks(self, clocks: Iterable[str | int]) -> "Polyhedron":
        cols = self._columns(clocks)
        if not cols:
            return self
        for j in cols:
            if j not in self.registry.clock_indices:
                raise UsageError(f"{self.registry.dims[j]!r} is not a clock")
        projected = self.eliminate(cols)
        pins = []
        for j in cols:
            coeffs = [0] * self.registry.size
            coeffs[j] = 1
            pins.append(LinearInequality.make(coeffs, 0, Relation.EQ))
        return projected.conjoin(*pins)

    def entails(self, row: LinearInequality) -> bool:
        """Whether every point of ``self`` satisfies ``row``."""
        if self.empty or row in self.constraints:
            return True
        if row.relation is Relation.EQ:
            return all(self.entails(half) for half in split_equality(row))
        return not _rows_satisfiable(_canonicalize(self.constraints + (negate_inequality(row),)))

    def includes(self, other: "Polyhedron") -> bool:
        """``self`` is a subset of ``other``."""
        self._check(other)
        if self.empty:
            return True
        if other.empty:
            return not self.is_satisfiable()
        return all(self.entails(row) for row in other.constraints)

    def same_as(self, other: "Polyhedron") -> bool:
        """Semantic equality (mutual inclusion)."""
        if self == other:
            return True
        return self.includes(other) and other.includes(self)

    def minimized(self) -> "Polyhedron":
        """Drop every constraint entailed by the remaining ones (canonical order)."""
        if self.empty:
            return self
        if not self.is_satisfiable():
            return Polyhedron.false(self.registry)
        rows = list(self.constraints)
        i = 0
        while i < len(rows):
            rest = Polyhedron(self.registry, tuple(rows[:i] + rows[i + 1:]))
            if rest.entails(rows[i]):
                del rows[i]
            else:
                i += 1
        return Polyhedron(self.registry, tuple(rows))

    # rendering ----------------------------------------------------------------

    def render(self) -> str:
        if self.empty:
            return "false"
        if not self.constraints:
            return "true"
        return " & ".join(render_inequality(r, self.registry) for r in self.constraints)

    def __str__(self) -> str:
        return self.render()

    def __len__(self) -> int:
        return len(self.constraints)


def inequality(
    registry: VariableRegistry, terms: Mapping[str, Number], constant: Number, relation: Relation
) -> LinearInequality:
    coeffs = [Fraction(0)] * registry.size
    for name, c in terms.items():
        coeffs[registry.index(name)] += Fraction(c)
    return LinearInequality.make(coeffs, constant, relation)


def format_rational(q: Number) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _render_side(terms: list[tuple[Fraction, str]], constant: Fraction) -> str:
    parts = []
    for c, name in terms:
        parts.append(name if c == 1 else f"{format_rational(c)}*{name}")
    if constant:
        parts.append(format_rational(constant))
    return " + ".join(parts) if parts else "0"


def render_inequality(row: LinearInequality, registry: VariableRegistry) -> str:
    """Human-readable form, scaled so the first variable has coefficient +-1.

    Positive terms go to the right of ``<``/``<=``; equalities print as
    ``positive side = negative side``.
    """
    names = registry.dims
    lead = next((c for c in row.coeffs if c), 1)
    scale = Fraction(1, abs(lead))
    pos, neg = [], []
    for c, name in zip(row.coeffs, names):
        if c > 0:
            pos.append((c * scale, name))
        elif c < 0:
            neg.append((-c * scale, name))
    k = row.constant * scale
    pos_side = _render_side(pos, k if k > 0 else Fraction(0))
    neg_side = _render_side(neg, -k if k < 0 else Fraction(0))
    if row.relation is Relation.EQ:
        return f"{pos_side} = {neg_side}"
    op = "<" if row.relation is Relation.GT else "<="
    return f"{neg_side} {op} {pos_side}"


# --- sampling ----------------------------------------------------------------------


def _pick(lo, hi, rng: random.Random) -> Fraction:
    if lo is None and hi is None:
        return Fraction(rng.randint(-4, 4)) + Fraction(rng.randint(0, 3), 4)
    if hi is None:
        return lo[0] + Fraction(rng.randint(1, 16), 4)
    if lo is None:
        return hi[0] - Fraction(rng.randint(1, 16), 4)
    if lo[0] == hi[0]:
        return lo[0]
    return lo[0] + (hi[0] - lo[0]) * Fraction(rng.randint(1, 7), 8)


def variable_bounds(rows: Iterable[LinearInequality], j: int, point: Sequence[Number]):
    """Tightest (value, strict) lower and upper bounds on variable ``j``.

    Every variable other than ``j`` takes its value from ``point``.  Returns
    ``(lower, upper, consistent)`` where bounds may be ``None`` and
    ``consistent`` is False when a variable-free row fails.
    """
    lo = hi = None
    ok = True
    for r in rows:
        c = r.coeffs[j]
        rest = sum((Fraction(a) * point[i] for i, a in enumerate(r.coeffs) if a and i != j), Fraction(r.constant))
        if c == 0:
            ok = ok and _holds(rest, r.relation)
            continue
        b = -rest / c
        strict = r.relation is Relation.GT
        sides = [0, 1] if r.relation is Relation.EQ else [0 if c > 0 else 1]
        for side in sides:
            if side == 0:
                if lo is None or b > lo[0] or (b == lo[0] and strict):
                    lo = (b, strict)
            elif hi is None or b < hi[0] or (b == hi[0] and strict):
                hi = (b, strict)
    return lo, hi, ok


def sample_point(poly: Polyhedron, rng: random.Random) -> tuple[Fraction, ...] | None:
    """A random rational point of ``poly`` (all clocks and parameters), or ``None`` if empty.

    Variables are fixed one at a time, each drawn strictly inside the interval
    left open by the projection onto the variables fixed so far.
    """
    if poly.empty or not poly.is_satisfiable():
        return None
    n = poly.registry.size
    projections = [poly] * n
    for k in range(n - 2, -1, -1):
        projections[k] = projections[k + 1].eliminate([k + 1])
    point = [Fraction(0)] * n
    for k in range(n):
        lo, hi, _ = variable_bounds(projections[k].constraints, k, point)
        point[k] = _pick(lo, hi, rng)
    return tuple(point)
