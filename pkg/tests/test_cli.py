import shutil
import subprocess
import sys

import pytest

from ptasynth.cli import main

from conftest import MODELS


@pytest.fixture
def work(tmp_path):
    for f in MODELS.iterdir():
        shutil.copy(f, tmp_path / f.name)
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_inverse(work, capsys):
    code, out, _ = run(capsys, work / "toy.imi", "--pi0", work / "toy.pi0")
    assert code == 0
    assert out.startswith("mode=inverse status=ok time_ms=")
    res = (work / "toy.res").read_text()
    assert "0 <= p1 & p1 < p2" in res
    assert (work / "toy.states").exists() and (work / "toy.dot").exists()


def test_cover(work, capsys):
    code, out, _ = run(capsys, work / "toy.imi", "--v0", work / "toy.v0", "--forbid", "q2", "--plot")
    assert code == 0 and "mode=cover status=ok" in out
    cart = (work / "toy.cart").read_text().splitlines()
    assert sum(line.startswith("TILE ") for line in cart) == 2
    for name in ("toy_tile1.dot", "toy_tile2.dot", "toy_cart.svg", "toy_cart.png"):
        assert (work / name).exists(), name
    assert (work / "toy_cart.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_random_mode(work, capsys):
    code, out, _ = run(capsys, work / "toy.imi", "--v0", work / "toy.v0", "--random", 3, "--seed", 5)
    assert code == 0 and out.startswith("mode=random status=ok")
    code, _, _ = run(capsys, work / "toy.imi", "--mode", "border-random", "--v0", work / "toy.v0", "--random", 3)
    assert code == 0


def test_reach(work, capsys):
    code, out, _ = run(capsys, work / "toy.imi", "--depth", 5, "--output", work / "out" / "r")
    assert code == 0 and out.startswith("mode=reach status=ok")
    assert (work / "out" / "r.states").read_text().count("STATE") == 3


def test_missing_pi0(work, capsys):
    code, out, err = run(capsys, work / "toy.imi", "--pi0", work / "nope.pi0")
    assert code == 1
    assert "nope.pi0" in err
    assert out.startswith("mode=inverse status=diag")


def test_parse_error_is_diag(work, capsys):
    (work / "bad.imi").write_text("var x: clock;\n")
    code, out, err = run(capsys, work / "bad.imi")
    assert code == 1 and "no automaton declared" in err
    assert "status=diag" in out


def test_bad_flags(work, capsys):
    assert run(capsys, work / "toy.imi", "--bogus")[0] == 1
    assert run(capsys, work / "toy.imi", "--mode", "inverse")[0] == 1
    assert run(capsys, work / "toy.imi", "--pi0", work / "toy.pi0", "--v0", work / "toy.v0")[0] == 1
    code, _, err = run(capsys, work / "toy.imi", "--v0", work / "toy.v0", "--forbid", "q9")
    assert code == 1 and "q9" in err


def test_limit_exit_code(work, capsys):
    (work / "loop.imi").write_text("""
var x: clock; p: parameter;
automaton a synclabs: t; loc l0: while x <= p do when x = p sync t do {x' = 0} goto l0; end
init := loc[a] = l0 & x = 0;
""")
    (work / "loop.pi0").write_text("p = 1\n")
    code, out, _ = run(capsys, work / "loop.imi", "--pi0", work / "loop.pi0", "--depth", 2, "--acyclic")
    assert code == 2 and "status=limit" in out
    assert "status: partial (depth limit)" in (work / "loop.res").read_text()


def test_module_entry_point(work):
    proc = subprocess.run([sys.executable, "-m", "ptasynth", str(work / "toy.imi"), "--pi0", str(work / "toy.pi0")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("mode=inverse status=ok")
