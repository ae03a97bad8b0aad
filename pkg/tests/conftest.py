import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).resolve().parent
MODELS = TESTS.parent / "models"
sys.path.insert(0, str(TESTS))

from ptasynth.linarith import LinearInequality, Polyhedron, Relation, VariableRegistry  # noqa: E402
from ptasynth.model import Component, Network, Transition  # noqa: E402
from ptasynth.parser import parse_model  # noqa: E402


def toy_network() -> Network:
    """TOY built by hand, independent of the parser."""
    reg = VariableRegistry(("x",), ("p1", "p2"))

    def row(cx, c1, c2, k, rel):
        return LinearInequality.make((cx, c1, c2), k, rel)

    inv_q0 = Polyhedron.of(reg, [row(-1, 1, 0, 0, Relation.GE)])  # x <= p1
    t1 = Transition("q0", Polyhedron.of(reg, [row(1, -1, 0, 0, Relation.EQ)]), "q1", "a")
    t2 = Transition("q0", Polyhedron.of(reg, [row(1, 0, -1, 0, Relation.GE)]), "q2", "b")
    comp = Component(
        "toy",
        ("a", "b"),
        {"q0": inv_q0, "q1": Polyhedron.true(reg), "q2": Polyhedron.true(reg)},
        "q0",
        (t1, t2),
    )
    pins = Polyhedron.of(reg, [row(1, 0, 0, 0, Relation.EQ)])
    return Network(reg, (comp,), Polyhedron.true(reg), {}, pins)


@pytest.fixture
def toy():
    return toy_network()


@pytest.fixture
def toy_parsed():
    return parse_model((MODELS / "toy.imi").read_text(), "toy.imi")


@pytest.fixture
def models_dir():
    return MODELS


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(acceptance_log.LINES):
            terminalreporter.write_line(line)
