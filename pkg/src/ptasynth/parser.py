"""Readers for the HyTech-style model language, reference valuations and rectangles.

Model syntax::

    var x, y: clock;
        p1, p2: parameter;
        d: discrete;

    automaton toy
    synclabs: a, b;
    loc q0: while x <= p1 do
        when x = p1 sync a goto q1;
        when x >= p2 & d = 0 sync b do { x' = 0, d' = 1 } goto q2;
    loc q1: while True do
    loc q2: while True do
    end

    init := loc[toy] = q0 & x = 0 & p1 >= 0;

``--`` starts a comment.  Init conjuncts over parameters form the initial
constraint, conjuncts over clocks pin the initial clock values and
``d = n`` sets a discrete (unmentioned discretes start at 0).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import PtaError
from .linarith import LinearInequality, Polyhedron, Relation, VariableRegistry, format_rational, render_inequality
from .model import (
    Component,
    DiscreteGuard,
    DiscreteUpdate,
    Diagnostic,
    Network,
    RectangleV0,
    Transition,
    validate,
)


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    col_start: int
    col_end: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col_start}"


class ParseError(PtaError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class Token:
    kind: str  # "name", "num", "op", "eof"
    text: str
    span: SourceSpan


_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)|(?P<comment>--[^\n]*)|(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>:=|\.\.|<=|>=|[<>=&;:,\[\]{}'*/+\-])"
)

_KEYWORDS = {"var", "clock", "parameter", "discrete", "automaton", "synclabs", "loc", "while", "do",
             "when", "sync", "goto", "end", "init", "True", "False"}


def tokenize(text: str, filename: str = "<input>") -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            span = SourceSpan(filename, line, col, col + 1)
            raise ParseError([Diagnostic(f"unexpected character {text[pos]!r}", span)])
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, value, SourceSpan(filename, line, col, col + len(value))))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    col = pos - line_start + 1
    tokens.append(Token("eof", "", SourceSpan(filename, line, max(col - 1, 1), max(col, 1))))
    return tokens


class _Parser:
    def __init__(self, text: str, filename: str, registry: VariableRegistry | None = None):
        self.registry = registry
        self.tokens = tokenize(text, filename)
        self.pos = 0
        self.filename = filename
        self.diagnostics: list[Diagnostic] = []

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def error(self, message: str, token: Token | None = None):
        token = token or self.tok
        raise ParseError(self.diagnostics + [Diagnostic(message, token.span)])

    def note(self, message: str, span: SourceSpan):
        self.diagnostics.append(Diagnostic(message, span))

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind != "eof"

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            tok = self.tok
            self.pos += 1
            return tok
        return None

    def expect(self, text: str) -> Token:
        tok = self.accept(text)
        if tok is None:
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")
        return tok

    def name(self, what: str = "name") -> Token:
        tok = self.tok
        if tok.kind != "name" or tok.text in _KEYWORDS:
            self.error(f"expected {what}, found {tok.text or 'end of input'!r}")
        self.pos += 1
        return tok

    def rational(self) -> Fraction:
        sign = 1
        if self.accept("-"):
            sign = -1
        else:
            self.accept("+")
        tok = self.tok
        if tok.kind != "num":
            self.error(f"expected a rational number, found {tok.text or 'end of input'!r}")
        self.pos += 1
        value = Fraction(int(tok.text))
        if self.accept("/"):
            den = self.tok
            if den.kind != "num" or int(den.text) == 0:
                self.error("expected a nonzero denominator")
            self.pos += 1
            value /= int(den.text)
        return sign * value

    # linear expressions -------------------------------------------------------

    def linear_expression(self) -> tuple[dict[str, tuple[Fraction, Token]], Fraction]:
        """``[+-] term ([+-] term)*`` with terms ``c``, ``name`` or ``c*name``."""
        terms: dict[str, tuple[Fraction, Token]] = {}
        constant = Fraction(0)
        sign = 1
        if self.accept("-"):
            sign = -1
        else:
            self.accept("+")
        while True:
            if self.tok.kind == "num":
                c = self.rational()
                if self.accept("*"):
                    tok = self.name("variable")
                    prev = terms.get(tok.text, (Fraction(0), tok))[0]
                    terms[tok.text] = (prev + sign * c, tok)
                else:
                    constant += sign * c
            elif self.tok.kind == "name" and self.tok.text not in _KEYWORDS:
                tok = self.name()
                c = Fraction(1)
                if self.accept("*"):
                    c = self.rational()
                prev = terms.get(tok.text, (Fraction(0), tok))[0]
                terms[tok.text] = (prev + sign * c, tok)
            else:
                self.error(f"expected a term, found {self.tok.text or 'end of input'!r}")
            if self.accept("+"):
                sign = 1
            elif self.accept("-"):
                sign = -1
            else:
                return terms, constant

    def linear_constraint(self):
        """``expr REL expr`` returned as (terms, constant, relation, first token) of ``lhs - rhs REL 0``."""
        start = self.tok
        lhs, lc = self.linear_expression()
        op = self.tok
        if op.text not in ("<", "<=", "=", ">=", ">"):
            self.error(f"expected a relation, found {op.text or 'end of input'!r}")
        self.pos += 1
        rhs, rc = self.linear_expression()
        terms = {k: v for k, v in lhs.items()}
        for k, (c, tok) in rhs.items():
            prev = terms.get(k, (Fraction(0), tok))[0]
            terms[k] = (prev - c, tok)
        constant = lc - rc
        if op.text in ("<", "<="):
            terms = {k: (-c, tok) for k, (c, tok) in terms.items()}
            constant = -constant
        relation = {"<": Relation.GT, "<=": Relation.GE, "=": Relation.EQ, ">=": Relation.GE, ">": Relation.GT}[
            op.text
        ]
        return terms, constant, relation, start, op.text


    def check_names(self, terms, allowed=("clock", "parameter")) -> bool:
        ok = True
        for name, (_, tok) in terms.items():
            kind = self.registry.kind(name)
            if kind is None:
                self.note(f"undeclared variable {name!r}", tok.span)
                ok = False
            elif kind not in allowed:
                self.note(f"{kind} {name!r} not allowed here", tok.span)
                ok = False
        return ok

    def convex(self, allow_discrete: bool):
        """Returns (polyhedron, discrete guards)."""
        reg = self.registry
        if self.accept("True"):
            return Polyhedron.true(reg), []
        if self.accept("False"):
            return Polyhedron.false(reg), []
        rows, dguards = [], []
        while True:
            terms, constant, relation, start, op = self.linear_constraint()
            discrete = [n for n in terms if reg.kind(n) == "discrete"]
            if discrete and allow_discrete:
                guard = self._discrete_guard(terms, constant, op, start)
                if guard is not None:
                    dguards.append(guard)
            elif self.check_names(terms):
                rows.append(_to_inequality(reg, terms, constant, relation))
            if not self.accept("&"):
                break
        return Polyhedron.of(reg, rows), dguards

    def _discrete_guard(self, terms, constant, op, start) -> DiscreteGuard | None:
        # terms/constant encode lhs - rhs (negated for < and <=)
        nonzero = {n: c for n, (c, _) in terms.items() if c}
        if len(nonzero) != 1:
            self.note("a discrete guard compares one discrete variable with an integer", start.span)
            return None
        (name, c), = nonzero.items()
        value = -constant / c
        if abs(c) != 1 or value.denominator != 1:
            self.note("a discrete guard compares one discrete variable with an integer", start.span)
            return None
        # normalise to "name rel value"
        if op in ("<", "<="):
            c = -c
        flip = {"<": ">", "<=": ">=", "=": "=", ">=": "<=", ">": "<"}
        rel = op if c > 0 else flip[op]
        return DiscreteGuard(name, rel, int(value))


def _to_inequality(reg: VariableRegistry, terms, constant, relation) -> LinearInequality:
    coeffs = [Fraction(0)] * reg.size
    for name, (c, _) in terms.items():
        coeffs[reg.index(name)] += c
    return LinearInequality.make(coeffs, constant, relation)


class _ModelParser(_Parser):
    def parse(self) -> Network:
        if self.tok.kind == "eof":
            self.error("no automaton declared")
        reg = self.declarations()
        self.registry = reg
        components = []
        while self.at("automaton"):
            components.append(self.automaton())
        if not components:
            self.error("no automaton declared")
        names = {}
        for comp, span in components:
            if comp.name in names:
                self.note(f"duplicate automaton {comp.name!r}", span)
            names[comp.name] = comp
        k, pins, discretes, initial = self.init_block([c for c, _ in components])
        self.expect_eof()
        if self.diagnostics:
            raise ParseError(self.diagnostics)
        built = []
        for comp, _ in components:
            built.append(Component(comp.name, comp.actions, comp.invariants, initial[comp.name], comp.transitions))
        net = Network(reg, tuple(built), k, discretes, pins)
        problems = validate(net)
        if problems:
            raise ParseError(problems)
        return net

    def expect_eof(self):
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.tok.text!r} after init block")

    def declarations(self) -> VariableRegistry:
        groups = {"clock": [], "parameter": [], "discrete": []}
        seen: dict[str, SourceSpan] = {}
        self.expect("var")
        while not self.at("automaton") and self.tok.kind != "eof":
            names = [self.name("variable name")]
            while self.accept(","):
                names.append(self.name("variable name"))
            self.expect(":")
            kind = self.tok
            if kind.text not in groups:
                self.error(f"expected 'clock', 'parameter' or 'discrete', found {kind.text!r}")
            self.pos += 1
            self.expect(";")
            for tok in names:
                if tok.text in seen:
                    self.note(f"duplicate declaration of {tok.text!r}", tok.span)
                    continue
                seen[tok.text] = tok.span
                groups[kind.text].append(tok.text)
        if self.diagnostics:
            raise ParseError(self.diagnostics)
        return VariableRegistry(tuple(groups["clock"]), tuple(groups["parameter"]), tuple(groups["discrete"]))

    def automaton(self):
        start = self.expect("automaton")
        name = self.name("automaton name").text
        self.expect("synclabs")
        self.expect(":")
        actions = []
        if not self.at(";"):
            actions.append(self.name("action").text)
            while self.accept(","):
                tok = self.name("action")
                if tok.text in actions:
                    self.note(f"duplicate action {tok.text!r}", tok.span)
                actions.append(tok.text)
        self.expect(";")
        invariants: dict[str, Polyhedron] = {}
        transitions = []
        gotos = []
        while self.at("loc"):
            self.pos += 1
            loc_tok = self.name("location name")
            if loc_tok.text in invariants:
                self.note(f"duplicate location {loc_tok.text!r}", loc_tok.span)
            self.expect(":")
            self.expect("while")
            inv, _ = self.convex(allow_discrete=False)
            invariants[loc_tok.text] = inv
            self.expect("do")
            while self.at("when"):
                t, target_tok = self.transition(loc_tok.text, actions)
                transitions.append(t)
                gotos.append(target_tok)
        if not invariants:
            self.error("an automaton needs at least one location")
        self.expect("end")
        for tok in gotos:
            if tok.text not in invariants:
                self.note(f"unknown location {tok.text!r}", tok.span)
        comp = Component(name, tuple(actions), invariants, next(iter(invariants)), tuple(transitions))
        return comp, start.span

    def transition(self, source: str, actions: list[str]):
        self.expect("when")
        guard, dguards = self.convex(allow_discrete=True)
        action = None
        if self.accept("sync"):
            tok = self.name("action")
            if tok.text not in actions:
                self.note(f"action {tok.text!r} is not declared in synclabs", tok.span)
            action = tok.text
        resets, updates = set(), []
        if self.accept("do"):
            self.expect("{")
            if not self.at("}"):
                self.update(resets, updates)
                while self.accept(","):
                    self.update(resets, updates)
            self.expect("}")
        self.expect("goto")
        target = self.name("location name")
        self.expect(";")
        t = Transition(source, guard, target.text, action, frozenset(resets), tuple(dguards), tuple(updates))
        return t, target

    def update(self, resets: set, updates: list):
        tok = self.name("variable")
        self.expect("'")
        self.expect("=")
        kind = self.registry.kind(tok.text)
        if kind == "clock":
            value = self.rational()
            if value != 0:
                self.note(f"clock {tok.text!r} can only be reset to 0", tok.span)
            if tok.text in resets:
                self.note(f"{tok.text!r} updated twice", tok.span)
            resets.add(tok.text)
        elif kind == "discrete":
            if self.tok.kind == "name":
                src = self.name("discrete")
                if self.registry.kind(src.text) != "discrete":
                    self.note(f"{src.text!r} is not a discrete variable", src.span)
                value = src.text
            else:
                q = self.rational()
                if q.denominator != 1:
                    self.note("discrete variables hold integers", tok.span)
                value = int(q)
            if any(u.variable == tok.text for u in updates):
                self.note(f"{tok.text!r} updated twice", tok.span)
            updates.append(DiscreteUpdate(tok.text, value))
        else:
            self.note(f"undeclared variable {tok.text!r}" if kind is None else f"cannot update parameter {tok.text!r}",
                      tok.span)
            if self.tok.kind == "name":
                self.pos += 1
            else:
                self.rational()

    def init_block(self, components: list[Component]):
        reg = self.registry
        self.expect("init")
        self.expect(":=")
        initial: dict[str, str] = {}
        k_rows, pin_rows = [], []
        discretes = {d: 0 for d in reg.discretes}
        by_name = {c.name: c for c in components}
        while True:
            if self.at("loc") and self.peek().text == "[":
                self.pos += 2
                comp_tok = self.name("automaton name")
                self.expect("]")
                self.expect("=")
                loc_tok = self.name("location name")
                if comp_tok.text not in by_name:
                    self.note(f"unknown automaton {comp_tok.text!r}", comp_tok.span)
                elif comp_tok.text in initial:
                    self.note(f"initial location of {comp_tok.text!r} given twice", comp_tok.span)
                elif loc_tok.text not in by_name[comp_tok.text].invariants:
                    self.note(f"unknown location {loc_tok.text!r}", loc_tok.span)
                else:
                    initial[comp_tok.text] = loc_tok.text
            else:
                terms, constant, relation, start, op = self.linear_constraint()
                kinds = {reg.kind(n) for n, (c, _) in terms.items() if c}
                if "discrete" in kinds:
                    guard = self._discrete_guard(terms, constant, op, start)
                    if guard is not None:
                        if guard.relation != "=":
                            self.note("discretes are initialised with '='", start.span)
                        discretes[guard.variable] = guard.value
                elif self.check_names(terms):
                    row = _to_inequality(reg, terms, constant, relation)
                    (pin_rows if "clock" in kinds else k_rows).append(row)
            if not self.accept("&"):
                break
        end = self.expect(";")
        for comp in components:
            if comp.name not in initial:
                self.note(f"no initial location for automaton {comp.name!r}", end.span)
                initial[comp.name] = comp.initial_location
        pins = Polyhedron.of(reg, pin_rows) if pin_rows else None
        return Polyhedron.of(reg, k_rows), pins, discretes, initial


def parse_model(text: str, filename: str = "<model>") -> Network:
    """Parse and validate a model; raises :class:`ParseError` with spanned diagnostics."""
    return _ModelParser(text, filename).parse()


def parse_constraint(text: str, registry: VariableRegistry, filename: str = "<constraint>") -> Polyhedron:
    """Parse ``lin & lin & ...`` (or ``True``/``False``) over clocks and parameters."""
    p = _Parser(text, filename, registry)
    poly, _ = p.convex(allow_discrete=False)
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r}")
    if p.diagnostics:
        raise ParseError(p.diagnostics)
    return poly


def _assignments(text: str, filename: str, parameters: tuple[str, ...], value_parser):
    p = _Parser(text.replace("\n", " & "), filename)
    values: dict[str, object] = {}
    while p.accept("&"):
        pass
    while p.tok.kind != "eof":
        tok = p.name("parameter name")
        p.expect("=")
        value = value_parser(p, tok)
        if tok.text not in parameters:
            p.note(f"unknown parameter {tok.text!r}", tok.span)
        elif tok.text in values:
            p.note(f"parameter {tok.text!r} given twice", tok.span)
        else:
            values[tok.text] = value
        if p.tok.kind == "eof":
            break
        if not p.accept("&") and not p.accept(";"):
            p.error(f"expected '&' or a newline, found {p.tok.text!r}")
        while p.accept("&") or p.accept(";"):
            pass
    for name in parameters:
        if name not in values:
            p.note(f"{name} missing", p.tok.span)
    if p.diagnostics:
        raise ParseError(p.diagnostics)
    return tuple(values[name] for name in parameters)


def _registry_of(target) -> VariableRegistry:
    return target.registry if isinstance(target, Network) else target


def parse_pi0(text: str, target, filename: str = "<pi0>") -> tuple[Fraction, ...]:
    """Reference valuation ``p1 = 1 & p2 = 1/3`` in registry order."""
    reg = _registry_of(target)
    return _assignments(text, filename, reg.parameters, lambda p, tok: p.rational())


def parse_v0(text: str, target, filename: str = "<v0>") -> RectangleV0:
    """Rectangle ``p1 = 0..2 & p2 = 1/2..3``."""
    reg = _registry_of(target)

    def interval(p: _Parser, tok: Token):
        lo = p.rational()
        p.expect("..")
        hi = p.rational()
        if lo > hi:
            p.note(f"empty interval for {tok.text}", tok.span)
        return (lo, hi)

    return RectangleV0(_assignments(text, filename, reg.parameters, interval))


# --- pretty printing -------------------------------------------------------------


def _render_convex(poly: Polyhedron, guards=()) -> str:
    parts = []
    if poly.empty:
        parts.append("False")
    else:
        parts.extend(render_inequality(r, poly.registry) for r in poly.constraints)
    parts.extend(f"{g.variable} {g.relation} {g.value}" for g in guards)
    return " & ".join(parts) if parts else "True"


def format_model(net: Network) -> str:
    """Source text that parses back to a structurally identical network."""
    reg = net.registry
    lines = ["var"]
    for kind, names in (("clock", reg.clocks), ("parameter", reg.parameters), ("discrete", reg.discretes)):
        if names:
            lines.append(f"    {', '.join(names)}: {kind};")
    for comp in net.components:
        lines.append("")
        lines.append(f"automaton {comp.name}")
        lines.append(f"synclabs: {', '.join(comp.actions)};")
        for loc, inv in comp.invariants.items():
            lines.append(f"loc {loc}: while {_render_convex(inv)} do")
            for t in comp.outgoing(loc):
                text = f"    when {_render_convex(t.guard, t.discrete_guard)}"
                if t.action is not None:
                    text += f" sync {t.action}"
                ups = [f"{x}' = 0" for x in reg.clocks if x in t.resets]
                ups += [f"{u.variable}' = {u.value}" for u in t.discrete_updates]
                if ups:
                    text += " do { " + ", ".join(ups) + " }"
                lines.append(text + f" goto {t.target};")
        lines.append("end")
    init = [f"loc[{c.name}] = {c.initial_location}" for c in net.components]
    if net.initial_pins is not None and not net.initial_pins.is_true:
        init.append(_render_convex(net.initial_pins))
    if not net.initial_constraint.is_true:
        init.append(_render_convex(net.initial_constraint))
    init += [f"{d} = {v}" for d, v in net.initial_discretes.items()]
    lines.append("")
    lines.append("init := " + " & ".join(init) + ";")
    return "\n".join(lines) + "\n"


def format_valuation(pi, registry: VariableRegistry) -> str:
    return " & ".join(f"{n} = {format_rational(v)}" for n, v in zip(registry.parameters, pi))
