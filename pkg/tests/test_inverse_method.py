import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptasynth.errors import IncompatibleInitialState, LimitReached, UsageError
from ptasynth.inverse_method import im, select_incompatible
from ptasynth.linarith import sample_point
from ptasynth.model import instantiate
from ptasynth.parser import parse_constraint, parse_model
from ptasynth.reachability import INCLUSION, reachable, trace_set
from netgen import random_network, random_valuation


def C(net, text):
    return parse_constraint(text, net.registry)


@pytest.mark.parametrize("optimized", [True, False])
def test_toy_refines_once(toy, optimized):
    res = im(toy, (1, 2), optimized=optimized)
    assert res.k0 == C(toy, "0 <= p1 & p1 < p2")
    assert res.stats.refinements == 1
    assert [str(n) for n in res.negated] == [str(C(toy, "p1 < p2").constraints[0])]
    assert {s.locations for s in res.space.states} == {("q0",), ("q1",)}
    assert res.traces.edges == ((0, "a", 1),)


@pytest.mark.parametrize("optimized", [True, False])
def test_toy_without_refinement(toy, optimized):
    res = im(toy, (2, 1), optimized=optimized)
    assert res.k0 == C(toy, "0 <= p1 & p2 <= p1")
    assert res.stats.refinements == 0
    assert res.stats.states == 3


def test_parameter_free_guards_give_true():
    net = parse_model("""
var x: clock; p: parameter;
automaton a synclabs: t; loc l0: while x <= 2 do when x >= 1 sync t goto l1; loc l1: while True do end
init := loc[a] = l0 & x = 0;
""")
    assert im(net, (5,)).k0.is_true


def test_select_incompatible(toy):
    j = select_incompatible(C(toy, "p2 <= p1"), (1, 2))
    assert j == C(toy, "p2 <= p1").constraints[0]
    j = select_incompatible(C(toy, "p1 = p2"), (1, 2))
    assert j == C(toy, "p1 >= p2").constraints[0]
    both = C(toy, "p1 > 5 & p2 > 5")
    assert select_incompatible(both, (0, 0)) == both.constraints[0]
    with pytest.raises(UsageError):
        select_incompatible(C(toy, "p1 < p2"), (1, 2))


def test_incompatible_initial_state(toy):
    with pytest.raises(IncompatibleInitialState):
        im(toy, (-1, 0))


def test_depth_limit_returns_partial():
    net = parse_model("""
var x: clock; p: parameter;
automaton a synclabs: t; loc l0: while x <= p do when x = p sync t do {x' = 0} goto l0; end
init := loc[a] = l0 & x = 0;
""")
    with pytest.raises(LimitReached) as exc:
        im(net, (1,), depth_limit=2, acyclic=True)
    assert exc.value.reason == "depth"
    assert not exc.value.partial.complete
    assert exc.value.partial.k0.satisfies_point((1,))


def test_inclusion_fixpoint_agrees_on_toy(toy):
    assert im(toy, (1, 2), fixpoint=INCLUSION).k0 == im(toy, (1, 2)).k0


def _im_or_none(net, pi0, **kw):
    try:
        return im(net, pi0, depth_limit=12, time_limit=5, **kw)
    except (LimitReached, IncompatibleInitialState):
        return None


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_im_invariants_on_random_networks(seed):
    net = random_network(seed)
    pi0 = random_valuation(seed, net)
    res = _im_or_none(net, pi0)
    if res is None:
        return
    assert res.k0.satisfies_point(pi0)
    assert not res.k0.mentions_clocks()
    for s in res.space.states:
        assert res.k0.includes(s.constraint.eliminate_clocks())
    # the working constraint strictly shrinks at each refinement
    k = net.initial_constraint
    for row in res.negated:
        nxt = k.conjoin(row)
        assert not k.includes(nxt)
        k = nxt
    naive = _im_or_none(net, pi0, optimized=False)
    if naive is not None:
        assert naive.k0.same_as(res.k0)
        assert naive.traces.same_graph(res.traces)
    ref = trace_set(reachable(instantiate(net, pi0), 40, 5))
    rng = random.Random(seed)
    for _ in range(2):
        pi = sample_point(res.k0, rng)[len(net.registry.clocks):]
        assert trace_set(reachable(instantiate(net, pi), 40, 5)).same_graph(ref)
