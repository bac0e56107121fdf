import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lichk.corpus import CORPUS_DIR  # noqa: E402
from lichk.netlist import FALSE, Netlist, NodeRef  # noqa: E402


def random_netlist(rng: random.Random, n_in=4, n_latch=6, n_and=40, n_bad=1, n_con=0,
                   strash=True, p_init1=0.3) -> Netlist:
    """Random sequential netlist: every gate picks operands among earlier nodes and latches."""
    net = Netlist(strash=strash)
    pool = [net.add_input(f"i{k}") for k in range(n_in)]
    latches = [net.add_latch(int(rng.random() < p_init1), f"l{k}") for k in range(n_latch)]
    pool += latches
    for _ in range(n_and):
        a, b = rng.choice(pool), rng.choice(pool)
        g = net.add_and(a if rng.random() < 0.5 else ~a, b if rng.random() < 0.5 else ~b)
        pool.append(g)

    def pick():
        r = rng.choice(pool)
        return ~r if rng.random() < 0.5 else r

    for latch in latches:
        net.set_latch_next(latch, pick())
    # bads built as a conjunction of a few signals so that they are not trivially hit
    for k in range(n_bad):
        g = pick()
        for _ in range(rng.randint(1, 3)):
            g = net.add_and(g, pick())
        net.add_bad(f"b{k}", g)
    for _ in range(n_con):
        net.add_constraint(net.add_or(pick(), pick()))
    return net


def counter(width=3, target=7) -> Netlist:
    """Free-running counter with bad = (count == target)."""
    from lichk import words as W
    net = Netlist()
    regs = W.latches(net, "c", width)
    W.set_next(net, regs, W.increment(net, regs))
    net.add_bus("count", W.msb_first(regs))
    net.add_bad("hit", W.eq_const(net, regs, target))
    return net


@pytest.fixture
def designs_dir() -> Path:
    return CORPUS_DIR / "designs"


__all__ = ["random_netlist", "counter", "FALSE", "NodeRef"]


# acceptance criterion number -> "criterion N: PASS/FAIL ..." line (see test_acceptance.py)
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    lines = [v for k, v in sorted((k, v) for k, v in ACCEPTANCE.items() if isinstance(k, int))]
    if lines:
        terminalreporter.section("acceptance criteria")
        for ln in lines:
            terminalreporter.write_line(ln)
