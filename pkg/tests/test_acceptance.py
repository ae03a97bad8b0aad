"""Exit criteria 1-7.  Each test prints one ``CRITERION n: PASS|FAIL`` line."""

from __future__ import annotations

import filecmp
import random
import shutil
import time
from fractions import Fraction

import pytest

from ptasynth.cartography import ForbiddenLocations, bc, classify, coverage_stats
from ptasynth.cli import main
from ptasynth.errors import EmptyInitialState, IncompatibleInitialState, LimitReached
from ptasynth.inverse_method import im
from ptasynth.linarith import LinearInequality, Polyhedron, Relation, VariableRegistry, sample_point
from ptasynth.model import RectangleV0, instantiate
from ptasynth.parser import parse_constraint, parse_model, parse_pi0, parse_v0
from ptasynth.reachability import reachable, trace_set

import acceptance_log
from conftest import MODELS
from netgen import random_network, random_valuation
from oracles import holds, witness_interval_nonempty

pytestmark = pytest.mark.acceptance

# instantiated reachability used as the reference; generous so that a
# mismatch is never an artefact of truncation (truncation counts as failure)
REF_DEPTH, REF_TIME = 60, 5.0


@pytest.fixture
def report(capsys):
    def emit(n: int, ok: bool, detail: str):
        line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} | {detail}"
        acceptance_log.LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return emit


def params_of(net, point):
    return tuple(point[len(net.registry.clocks):])


def reference_traces(net, pi):
    space = reachable(instantiate(net, pi), REF_DEPTH, REF_TIME)
    return trace_set(space) if space.complete else None


def preserved_at_samples(net, k0, pi0, rng, n=5) -> tuple[int, int]:
    """(checked, discrepancies) for ``n`` rational points sampled in ``k0``."""
    ref = reference_traces(net, pi0)
    if ref is None:
        return 0, n
    bad = 0
    for _ in range(n):
        pi = params_of(net, sample_point(k0, rng))
        got = reference_traces(net, pi)
        if got is None or not got.same_graph(ref):
            bad += 1
    return n, bad


# --- 1 -----------------------------------------------------------------------------


def test_criterion_1_toy_inverse_method(toy, report):
    problems = []
    timings = []
    for optimized in (True, False):
        t = time.perf_counter()
        a = im(toy, (1, 2), optimized=optimized)
        timings.append(time.perf_counter() - t)
        t = time.perf_counter()
        b = im(toy, (2, 1), optimized=optimized)
        timings.append(time.perf_counter() - t)
        if not a.k0.same_as(parse_constraint("0 <= p1 & p1 < p2", toy.registry)):
            problems.append(f"K0(1,2)={a.k0.render()}")
        if a.stats.refinements != 1:
            problems.append(f"refinements(1,2)={a.stats.refinements}")
        edges = {(a.traces.node_label(i), act, a.traces.node_label(j)) for i, act, j in a.traces.edges}
        if edges != {("q0", "a", "q1")} or len(a.traces.nodes) != 2:
            problems.append(f"traces(1,2)={sorted(edges)}")
        if not b.k0.same_as(parse_constraint("0 <= p1 & p2 <= p1", toy.registry)):
            problems.append(f"K0(2,1)={b.k0.render()}")
        if b.stats.refinements != 0:
            problems.append(f"refinements(2,1)={b.stats.refinements}")
    slow = max(timings)
    if slow >= 1.0:
        problems.append(f"slowest run {slow:.3f}s")
    report(1, not problems,
           f"K0(1,2)=[{a.k0.render()}] K0(2,1)=[{b.k0.render()}] max run {slow * 1000:.1f} ms"
           + (f"; problems: {problems}" if problems else ""))


# --- 2 -----------------------------------------------------------------------------


def test_criterion_2_toy_cartography(toy, report):
    v0 = RectangleV0(((Fraction(0), Fraction(2)), (Fraction(0), Fraction(2))))
    t = time.perf_counter()
    tiling = bc(toy, v0)
    good, bad = classify(tiling, ForbiddenLocations(frozenset({"q2"})))
    elapsed = time.perf_counter() - t
    one = coverage_stats(tiling, v0, 1)
    two = coverage_stats(tiling, v0, 2)
    # "tile 1" of the criterion is the p1 < p2 tile; tiles are matched by constraint
    lt = parse_constraint("0 <= p1 & p1 < p2", toy.registry)
    ge = parse_constraint("0 <= p1 & p2 <= p1", toy.registry)
    ok = (
        len(tiling) == 2
        and (one.integer_covered, one.integer_total) == (9, 9)
        and (two.grid_covered, two.grid_total) == (25, 25)
        and [t.constraint for t in good] == [lt]
        and [t.constraint for t in bad] == [ge]
        and elapsed < 2.0
    )
    report(2, ok,
           f"tiles={len(tiling)} integer={one.integer_covered}/{one.integer_total} "
           f"grid={two.grid_covered}/{two.grid_total} good=[{good[0].constraint.render() if good else '-'}] "
           f"bad=[{bad[0].constraint.render() if bad else '-'}] time {elapsed * 1000:.0f} ms")


# --- 3 and 4 ----------------------------------------------------------------------

MIN_COMPARED = 100
MAX_SEEDS = 600


@pytest.fixture(scope="module")
def sweep():
    """Run both IM variants on random networks until MIN_COMPARED pairs terminate."""
    out = {"compared": [], "skipped": {"incompatible": 0, "empty": 0, "limit": 0}, "seeds": 0, "mismatch": []}
    for seed in range(MAX_SEEDS):
        if len(out["compared"]) >= MIN_COMPARED:
            break
        out["seeds"] += 1
        net = random_network(seed)
        pi0 = random_valuation(seed, net)
        try:
            a = im(net, pi0, optimized=True, depth_limit=12, time_limit=5)
            b = im(net, pi0, optimized=False, depth_limit=12, time_limit=5)
        except IncompatibleInitialState:
            out["skipped"]["incompatible"] += 1
            continue
        except EmptyInitialState:
            out["skipped"]["empty"] += 1
            continue
        except LimitReached:
            out["skipped"]["limit"] += 1
            continue
        out["compared"].append((seed, net, pi0, a))
        if not (a.k0.same_as(b.k0) and a.traces.same_graph(b.traces)):
            out["mismatch"].append(seed)
    return out


def test_criterion_3_optimization_differential(sweep, report):
    n = len(sweep["compared"])
    ok = n >= MIN_COMPARED and not sweep["mismatch"]
    report(3, ok,
           f"{n} networks compared over {sweep['seeds']} seeds (skipped {sweep['skipped']}); "
           f"discrepancies={len(sweep['mismatch'])}" + (f" seeds={sweep['mismatch']}" if sweep["mismatch"] else ""))


def test_criterion_4_trace_set_preservation(toy, sweep, report):
    instances = [("toy (1,2)", 1, toy, (Fraction(1), Fraction(2)), im(toy, (1, 2))),
                 ("toy (2,1)", 2, toy, (Fraction(2), Fraction(1)), im(toy, (2, 1)))]
    instances += [(f"seed {s}", s, net, pi0, res) for s, net, pi0, res in sweep["compared"]]
    checked = bad = 0
    failing = []
    for name, seed, net, pi0, res in instances:
        rng = random.Random(seed)
        c, b = preserved_at_samples(net, res.k0, pi0, rng)
        checked += c
        bad += b
        if b:
            failing.append(name)
    report(4, bad == 0 and len(instances) >= 2,
           f"{len(instances)} instances, {checked} sampled points, discrepancies={bad}"
           + (f" in {failing}" if failing else ""))


# --- 5 -----------------------------------------------------------------------------

FM_REG = VariableRegistry((), ("u", "v", "w"))
REL = [Relation.GE, Relation.GT, Relation.EQ]


def _random_system(rng):
    rows = []
    for _ in range(rng.randint(1, 6)):
        coeffs = [rng.randint(-3, 3) for _ in range(3)]
        rows.append(LinearInequality.make(coeffs, rng.randint(-6, 6), rng.choice(REL)))
    return Polyhedron.of(FM_REG, rows), rows


def _grid(step, span):
    n = int(span / step)
    return [Fraction(i) * step for i in range(-n, n + 1)]


def test_criterion_5_fourier_motzkin_oracle(report):
    rng = random.Random(2024)
    axis = _grid(Fraction(1, 2), 4)
    discrepancies = []
    forward = backward = 0
    t = time.perf_counter()
    for k in range(500):
        c, raw = _random_system(rng)
        j = rng.randrange(3)
        proj = c.eliminate([j])
        oracle_rows = [(r.coeffs, Fraction(r.constant), {0: "=", 1: ">=", 2: ">"}[int(r.relation)]) for r in raw]
        # direction 1: points of C (rejection-sampled on a grid) project into the result
        pts = [[rng.choice(axis) for _ in range(3)] for _ in range(400)]
        pts = [p for p in pts if all(holds(r, p) for r in oracle_rows)]
        for p in pts:
            forward += 1
            q = list(p)
            q[j] = Fraction(0)
            if not proj.contains(q):
                discrepancies.append((k, "projection misses", p))
        # direction 2: at grid points of the remaining plane, membership in the
        # result coincides with a nonempty witness interval for the eliminated variable
        others = [i for i in range(3) if i != j]
        for _ in range(120):
            q = [Fraction(0)] * 3
            for i in others:
                q[i] = rng.choice(axis)
            backward += 1
            if proj.contains(q) != witness_interval_nonempty(oracle_rows, j, q):
                discrepancies.append((k, "interval oracle disagrees", q))
    elapsed = time.perf_counter() - t
    ok = not discrepancies and elapsed < 30
    report(5, ok,
           f"500 systems, {forward} sampled points of C, {backward} points of the projected plane, "
           f"discrepancies={len(discrepancies)}, time {elapsed:.1f} s"
           + (f" first={discrepancies[0]}" if discrepancies else ""))


# --- 6 -----------------------------------------------------------------------------


def _run_twice(tmp_path, name, argv):
    dirs = []
    for k in (1, 2):
        d = tmp_path / f"{name}_{k}"
        d.mkdir()
        for f in MODELS.iterdir():
            shutil.copy(f, d / f.name)
        code = main([str(d / a) if a.endswith((".imi", ".pi0", ".v0")) else a for a in argv]
                    + ["--output", str(d / "out")])
        dirs.append((d, code))
    (d1, c1), (d2, c2) = dirs
    produced = sorted(p.name for p in d1.glob("out*"))
    same = c1 == c2 and produced == sorted(p.name for p in d2.glob("out*")) and produced
    same = bool(same) and all(filecmp.cmp(d1 / f, d2 / f, shallow=False) for f in produced)
    return same, produced, c1


def test_criterion_6_determinism_and_exactness(tmp_path, capsys, report):
    runs = {
        "reach": ["toy.imi", "--depth", "8"],
        "inverse": ["toy.imi", "--pi0", "toy.pi0"],
        "inverse-naive-incl": ["sr_latch.imi", "--pi0", "sr_latch.pi0", "--no-opt", "--incl"],
        "cover": ["toy.imi", "--v0", "toy.v0", "--forbid", "q2", "--grid-denominator", "2", "--plot"],
        "cover-latch": ["sr_latch.imi", "--v0", "sr_latch.v0", "--plot"],
        "random": ["toy.imi", "--v0", "toy.v0", "--random", "4", "--seed", "9", "--precedes", "a", "b"],
    }
    failures = []
    nfiles = 0
    for name, argv in runs.items():
        same, produced, code = _run_twice(tmp_path, name, argv)
        nfiles += len(produced)
        if not same or code != 0:
            failures.append(f"{name} (exit {code})")
    capsys.readouterr()
    # exactness: a guard with coefficient 1/3 survives into the .res rendering
    thirds = tmp_path / "thirds"
    thirds.mkdir()
    src = (MODELS / "toy.imi").read_text().replace("x >= p2 sync b", "x >= p2 + 1/3 sync b")
    (thirds / "t.imi").write_text(src)
    (thirds / "t.pi0").write_text("p1 = 1 & p2 = 2\n")
    main([str(thirds / "t.imi"), "--pi0", str(thirds / "t.pi0")])
    capsys.readouterr()
    k0_line = (thirds / "t.res").read_text().splitlines()[0]
    net = parse_model(src)
    expect = parse_constraint("0 <= p1 & p1 < p2 + 1/3", net.registry)
    exact = "p1 < p2 + 1/3" in k0_line and parse_constraint(k0_line, net.registry).same_as(expect)
    if not exact:
        failures.append(f"1/3 round trip: {k0_line!r}")
    report(6, not failures,
           f"{len(runs)} CLI runs x2, {nfiles} files byte-identical; 1/3 guard gives K0 [{k0_line}]"
           + (f"; failures: {failures}" if failures else ""))


# --- 7 -----------------------------------------------------------------------------


def test_criterion_7_sr_latch(report):
    net = parse_model((MODELS / "sr_latch.imi").read_text(), "sr_latch.imi")
    pi0 = parse_pi0((MODELS / "sr_latch.pi0").read_text(), net)
    v0 = parse_v0((MODELS / "sr_latch.v0").read_text(), net)
    res = im(net, pi0)
    contains = res.k0.satisfies_point(pi0)
    checked, bad = preserved_at_samples(net, res.k0, pi0, random.Random(7))
    tiling = bc(net, v0)
    cov = coverage_stats(tiling, v0, 1)
    full = cov.integer_covered == cov.integer_total and not tiling.failures
    ok = contains and bad == 0 and checked == 5 and full
    report(7, ok,
           f"SR latch: K0=[{res.k0.render()}] pi0 in K0={contains}, {checked} samples with {bad} discrepancies, "
           f"{len(tiling)} tiles cover {cov.integer_covered}/{cov.integer_total} integer points")
