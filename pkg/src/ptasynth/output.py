"""Text emitters: trace sets as DOT, cartographies as SVG, result and tiling summaries.

Every emitter is a pure function of its inputs and returns a string, so
re-emitting the same object is byte-identical.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence
from xml.sax.saxutils import escape

from .cartography import BAD, GOOD, UNCLASSIFIED, CoverageReport, Tiling
from .errors import UsageError
from .inverse_method import IMResult
from .linarith import Polyhedron, Relation, format_rational
from .model import RectangleV0
from .reachability import StateSpace, TraceSet, format_state_listing

FILL = {GOOD: "#7fc97f", BAD: "#f0837a", UNCLASSIFIED: "#9ab8e0"}


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def emit_trace_dot(traces: TraceSet, name: str = "traces") -> str:
    """Directed graph with one ``s<i>`` node per location vector and one edge per action."""
    lines = [f"digraph {_dot_quote(name)} {{", "  node [shape=ellipse];"]
    for i in range(len(traces.nodes)):
        lines.append(f"  s{i} [label={_dot_quote(traces.node_label(i))}];")
    for a, act, b in traces.edges:
        lines.append(f"  s{a} -> s{b} [label={_dot_quote(act if act is not None else 'eps')}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def emit_state_listing(space: StateSpace) -> str:
    return format_state_listing(space)


def format_point(pi: Sequence) -> str:
    return "(" + ", ".join(format_rational(v) for v in pi) + ")"


def emit_result(res: IMResult, timings: bool = False) -> str:
    """Content of a ``.res`` file; the wall-clock line only when ``timings`` is set."""
    s = res.stats
    lines = [
        res.k0.render(),
        f"iterations: {s.iterations}",
        f"refinements: {s.refinements}",
        f"states: {s.states}",
        f"transitions: {s.transitions}",
    ]
    if timings:
        lines.append(f"time_ms: {s.time_ms}")
    if not res.complete:
        lines.append(f"status: partial ({res.limit} limit)")
    return "\n".join(lines) + "\n"


def emit_tiling(tiling: Tiling, report: CoverageReport) -> str:
    """Content of a ``.cart`` file: one TILE line per tile and a coverage footer."""
    lines = []
    for i, tile in enumerate(tiling.tiles, start=1):
        lines.append(
            f"TILE {i}: witness={format_point(tile.witness)} ; constraint={tile.constraint.render()} ; "
            f"verdict={tile.verdict}"
        )
    lines.append(
        f"COVERAGE tiles={report.tiles} integer={report.integer_covered}/{report.integer_total} "
        f"grid={report.grid_covered}/{report.grid_total} denominator={report.grid_denominator}"
    )
    for point, reason in tiling.failures:
        lines.append(f"UNCOVERED {format_point(point)} ; reason={reason}")
    return "\n".join(lines) + "\n"


# --- 2D geometry -----------------------------------------------------------------------


@dataclass(frozen=True)
class PlotViewport:
    """Two plotted parameter indices, the rectangle, and the margin around it."""

    params: tuple[int, int]
    v0: RectangleV0
    margin: Fraction = Fraction(1, 2)

    def __post_init__(self):
        if len(self.params) != 2:
            raise UsageError(f"a cartography plot shows exactly 2 parameters, got {len(self.params)}")
        i, j = self.params
        if i == j or not (0 <= i < len(self.v0) and 0 <= j < len(self.v0)):
            raise UsageError("plotted parameters must be two distinct parameter indices")
        if self.margin < 0:
            raise UsageError("margin must be nonnegative")

    def box(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        """``(umin, umax, vmin, vmax)`` of the visible region."""
        out = []
        for k in self.params:
            lo, hi = self.v0.bounds[k]
            pad = self.margin * (hi - lo) if hi > lo else Fraction(1)
            out += [lo - pad, hi + pad]
        return tuple(out)


def _project_pair(constraint: Polyhedron, params: tuple[int, int]) -> list[tuple[Fraction, Fraction, Fraction, Relation]]:
    """Rows ``a*u + b*v + k REL 0`` of the constraint's projection onto two parameters."""
    reg = constraint.registry
    cols = [reg.parameter_indices[p] for p in params]
    others = [j for j in range(reg.size) if j not in cols]
    proj = constraint.eliminate(others)
    if proj.empty:
        return None
    return [(Fraction(r.coeffs[cols[0]]), Fraction(r.coeffs[cols[1]]), Fraction(r.constant), r.relation)
            for r in proj.constraints]


def _closed(row, u, v) -> bool:
    a, b, k, rel = row
    val = a * u + b * v + k
    return val == 0 if rel is Relation.EQ else val >= 0


def clip_polygon(rows, box) -> list[tuple[Fraction, Fraction]]:
    """Vertices of ``rows`` (closure) intersected with ``box``, counter-clockwise.

    Candidates are the pairwise intersections of all boundary lines (rows and
    box edges); those satisfying every closed constraint are kept.
    """
    umin, umax, vmin, vmax = box
    edges = [
        (Fraction(1), Fraction(0), -umin, Relation.GE),
        (Fraction(-1), Fraction(0), umax, Relation.GE),
        (Fraction(0), Fraction(1), -vmin, Relation.GE),
        (Fraction(0), Fraction(-1), vmax, Relation.GE),
    ]
    all_rows = list(rows) + edges
    points = set()
    for i in range(len(all_rows)):
        a1, b1, k1, _ = all_rows[i]
        for j in range(i + 1, len(all_rows)):
            a2, b2, k2, _ = all_rows[j]
            det = a1 * b2 - a2 * b1
            if det == 0:
                continue
            u = (b1 * k2 - b2 * k1) / det
            v = (a2 * k1 - a1 * k2) / det
            if all(_closed(r, u, v) for r in all_rows):
                points.add((u, v))
    if len(points) < 3:
        return sorted(points)
    cu = sum(p[0] for p in points) / len(points)
    cv = sum(p[1] for p in points) / len(points)

    def half(p):
        du, dv = p[0] - cu, p[1] - cv
        return 0 if dv > 0 or (dv == 0 and du > 0) else 1

    def cmp(p, q):
        hp, hq = half(p), half(q)
        if hp != hq:
            return hp - hq
        cross = (p[0] - cu) * (q[1] - cv) - (p[1] - cv) * (q[0] - cu)
        if cross > 0:
            return -1
        if cross < 0:
            return 1
        dp = (p[0] - cu) ** 2 + (p[1] - cv) ** 2
        dq = (q[0] - cu) ** 2 + (q[1] - cv) ** 2
        return -1 if dp < dq else (1 if dp > dq else 0)

    return sorted(points, key=functools.cmp_to_key(cmp))


def tile_polygon(constraint: Polyhedron, viewport: PlotViewport) -> list[tuple[Fraction, Fraction]]:
    rows = _project_pair(constraint, viewport.params)
    if rows is None:
        return []
    return clip_polygon(rows, viewport.box())


def point_in_polygon(point, polygon) -> bool:
    """Exact test for a convex counter-clockwise polygon (boundary included)."""
    u, v = point
    if len(polygon) < 3:
        if len(polygon) < 2:
            return tuple(point) in polygon
        (u1, v1), (u2, v2) = polygon
        on_line = (u2 - u1) * (v - v1) == (v2 - v1) * (u - u1)
        return on_line and min(u1, u2) <= u <= max(u1, u2) and min(v1, v2) <= v <= max(v1, v2)
    n = len(polygon)
    for i in range(n):
        (u1, v1), (u2, v2) = polygon[i], polygon[(i + 1) % n]
        if (u2 - u1) * (v - v1) - (v2 - v1) * (u - u1) < 0:
            return False
    return True


def fmt6(q: Fraction) -> str:
    """Decimal with six fractional digits, rounding half to even."""
    n = round(Fraction(q) * 10**6)
    sign = "-" if n < 0 else ""
    n = abs(n)
    return f"{sign}{n // 10**6}.{n % 10**6:06d}"


SVG_SIZE = 520
SVG_PAD = 50


def emit_cartography_svg(tiling: Tiling, viewport: PlotViewport, names: Sequence[str] | None = None) -> str:
    """Tiles clipped to the viewport, coloured by verdict, with the rectangle outlined."""
    if len(tiling.v0) < 2:
        raise UsageError("a cartography plot needs two parameters")
    umin, umax, vmin, vmax = viewport.box()
    inner = Fraction(SVG_SIZE - 2 * SVG_PAD)

    def px(u, v):
        x = SVG_PAD + (u - umin) / (umax - umin) * inner
        y = SVG_PAD + (vmax - v) / (vmax - vmin) * inner
        return fmt6(x), fmt6(y)

    i, j = viewport.params
    names = list(names) if names is not None else [f"p{k + 1}" for k in range(len(tiling.v0))]
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" '
        f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">',
        f'  <rect x="0" y="0" width="{SVG_SIZE}" height="{SVG_SIZE}" fill="white"/>',
        '  <g id="tiles" stroke="#333333" stroke-width="1" fill-opacity="0.7">',
    ]
    for n, tile in enumerate(tiling.tiles, start=1):
        poly = tile_polygon(tile.constraint, viewport)
        if not poly:
            continue
        pts = " ".join(",".join(px(u, v)) for u, v in poly)
        title = escape(f"TILE {n}: {tile.constraint.render()} ({tile.verdict})")
        out.append(f'    <polygon id="tile{n}" points="{pts}" fill="{FILL[tile.verdict]}"><title>{title}</title></polygon>')
    out.append("  </g>")
    (lo_u, hi_u), (lo_v, hi_v) = tiling.v0.bounds[i], tiling.v0.bounds[j]
    x0, y0 = px(lo_u, hi_v)
    x1, y1 = px(hi_u, lo_v)
    w = fmt6(Fraction(x1) - Fraction(x0))
    h = fmt6(Fraction(y1) - Fraction(y0))
    out.append(f'  <rect id="v0" x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="black" '
               f'stroke-width="2" stroke-dasharray="6,3"/>')
    bx0, by0 = px(umin, vmin)
    bx1, by1 = px(umax, vmax)
    out.append(f'  <rect id="frame" x="{bx0}" y="{by1}" width="{fmt6(inner)}" height="{fmt6(inner)}" '
               f'fill="none" stroke="#999999" stroke-width="1"/>')
    out.append('  <g font-family="sans-serif" font-size="12" fill="black">')
    for u in (lo_u, hi_u):
        x, _ = px(u, vmin)
        out.append(f'    <text x="{x}" y="{fmt6(Fraction(by0) + 16)}" text-anchor="middle">{escape(format_rational(u))}</text>')
    for v in (lo_v, hi_v):
        _, y = px(umin, v)
        out.append(f'    <text x="{fmt6(Fraction(bx0) - 6)}" y="{y}" text-anchor="end">{escape(format_rational(v))}</text>')
    out.append(f'    <text x="{SVG_SIZE // 2}" y="{SVG_SIZE - 10}" text-anchor="middle">{escape(names[i])}</text>')
    out.append(f'    <text x="14" y="{SVG_SIZE // 2}" text-anchor="middle" '
               f'transform="rotate(-90 14 {SVG_SIZE // 2})">{escape(names[j])}</text>')
    out.append("  </g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
