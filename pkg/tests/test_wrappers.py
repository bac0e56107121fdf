import dataclasses
import re

import pytest

from lichk.corpus import design_path
from lichk.elaborate import ElabOptions, elaborate
from lichk.engine.check import BoundReached, Falsified, ProvenInductive, bmc, k_induction
from lichk.engine.oracle import bfs
from lichk.lang import ast as A
from lichk.lang import parse
from lichk.model import DEADLOCK, INVALID_INPUT
from lichk.netlist import INPUT
from lichk.wrappers import WrapperError, build_deadlock_model, build_invalid_input_model

WIRE = """
process W { in I : 2; out O : 2; var x : 2 = 0; body { x = pop(I); push(O, x); } }
design t { instance w : W; external in X = w.I; external out Y = w.O; }
"""

PUSH_THEN_POP = """
process P { in I : 1; out O : 1; var x : 1 = 0; body { push(O, x); x = pop(I); } }
design t { instance a : P; instance b : P; channel ab cap 0 : a.O -> b.I; channel ba cap 0 : b.O -> a.I; }
"""

NB_FREE = """
process N { in I : 1; out O : 1; var x : 1 = 0; var s : 1 = 0; var t : 1 = 0;
  body { (x, s) = popnb(I); t = pushnb(O, x); } }
design t { instance n : N; external in X = n.I; external out Y = n.O; }
"""


def load(stem, **opts):
    return elaborate(parse(design_path(stem).read_text()), ElabOptions(**opts))


def narrow(stem, width=2):
    """The corpus adder at a smaller data width (text substitution)."""
    return elaborate(parse(re.sub(r": 4\b", f": {width}", design_path(stem).read_text())))


def test_wire_process_is_insensitive():
    m = build_invalid_input_model(elaborate(parse(WIRE)))
    assert m.kind == INVALID_INPUT
    assert [n for n, _ in m.bads] == ["__bad.B1.Y", "__bad.B2.Y"]
    assert isinstance(k_induction(m, 8), ProvenInductive)
    assert bfs(m).safe


def test_miter_signal_names():
    m = build_invalid_input_model(elaborate(parse(WIRE)), strict_input_ready=True)
    for name in ("X.vld", "X.dat", "X.inv_ref", "X.inv_test", "Y.rdy", "ref.Y.vld", "test.Y.vld",
                 "ref.Y.dat", "test.Y.dat", "ref.w.__stall", "test.w.__stall", "__bad.B3.X"):
        assert name in m.signal_map, name
    assert all(a.startswith("ref.") and b.startswith("test.") for a, b in m.latch_pairs)


def test_miter_needs_external_ports():
    with pytest.raises(WrapperError):
        build_invalid_input_model(load("producer_consumer_buggy"))


def test_guarded_adder_two_bit_bfs_safe():
    m = build_invalid_input_model(narrow("adder_nb_guarded"))
    assert bfs(m).safe
    assert isinstance(k_induction(m, 10), ProvenInductive)


def test_unguarded_adder_two_bit_bfs_agrees():
    m = build_invalid_input_model(narrow("adder_nb_unguarded"))
    o = bfs(m)
    v = bmc(m, 10)
    assert o.falsified and isinstance(v, Falsified) and v.depth == o.depth


@pytest.mark.parametrize("stem", ["adder_nb_unguarded", "unconstrained_input_initial", "underconstrained_read_fix1"])
def test_miter_symmetry(stem):
    e = load(stem)
    a = bmc(build_invalid_input_model(e), 12)
    b = bmc(build_invalid_input_model(e, swap=True), 12)
    assert type(a) is type(b)
    assert getattr(a, "depth", None) == getattr(b, "depth", None)


BLOCKING_ONLY = ["adder_blocking", "mismatched_depths_initial", "mismatched_depths_fix1",
                 "out_of_order_push_initial", "out_of_order_push_fix1", "out_of_order_push_fix2"]


@pytest.mark.parametrize("stem", BLOCKING_ONLY)
def test_blocking_only_designs_are_insensitive(stem):
    e = load(stem)
    for inst in e.ast.instances:
        for s in A.walk(e.ast.process(inst.process).body):
            assert not isinstance(s, (A.PopNB, A.PushNB))
    assert isinstance(k_induction(build_invalid_input_model(e), 20), ProvenInductive)


def test_push_then_pop_deadlocks_at_depth_one():
    m = build_deadlock_model(elaborate(parse(PUSH_THEN_POP)))
    o = bfs(m)
    v = bmc(m, 5)
    assert o.depth == 1 and isinstance(v, Falsified) and v.depth == 1


def test_nb_module_with_ready_consumer_never_stalls():
    m = build_deadlock_model(elaborate(parse(NB_FREE)), nb_stall_cycles=2)
    assert bfs(m).safe
    assert isinstance(k_induction(m, 5), ProvenInductive)


def test_producer_consumer_buggy_model():
    m = build_deadlock_model(load("producer_consumer_buggy"))
    assert m.kind == DEADLOCK and [n for n, _ in m.bads] == ["__bad.deadlock"]
    v = bmc(m, 20)
    assert isinstance(v, Falsified) and v.depth <= 4
    last = v.trace.frames[-1]
    assert last["p.__stall"] == 1 and last["c.__stall"] == 1


def test_deadlock_reelaborates_for_stall_cycles():
    e = load("router_pair_fixed", nb_stall_cycles=8)
    m = build_deadlock_model(e, nb_stall_cycles=3)
    assert m.config["nb_stall_cycles"] == 3
    assert {len(v) for k, v in m.netlist.buses.items() if k.endswith("__cnt")} == {2}


def test_env_valid_free_drops_valid_constraints():
    e = load("adder_blocking")
    con = build_deadlock_model(e)
    free = build_deadlock_model(e, env_valid="free")
    assert len(con.netlist.constraints) == 3 and len(free.netlist.constraints) == 1
    # with starving inputs the adder can block forever
    assert isinstance(bmc(free, 5), Falsified)
    assert isinstance(k_induction(con, 8), ProvenInductive)
    with pytest.raises(WrapperError):
        build_deadlock_model(e, env_valid="maybe")


@pytest.mark.parametrize("stem", ["adder_blocking", "unconstrained_input_fix1", "router_pair_buggy",
                                  "mismatched_depths_fix1"])
def test_constraint_hygiene(stem):
    e = load(stem)
    for m in (build_deadlock_model(e),):
        net = m.netlist
        for c in net.constraints:
            assert net.kind[c.index] == INPUT
            assert net.names[c.index].split(".")[0] in e.external_dirs


DEADLOCK_DESIGNS = ["producer_consumer_fixed", "circular_dependency_fix1", "mismatched_depths_fix1",
                    "out_of_order_push_fix2", "router_pair_fixed", "adder_blocking"]


@pytest.mark.parametrize("stem", DEADLOCK_DESIGNS)
def test_capacity_increase_keeps_verdict(stem):
    ast = parse(design_path(stem).read_text())
    bigger = dataclasses.replace(ast, channels=tuple(dataclasses.replace(c, capacity=c.capacity + 1)
                                                     for c in ast.channels))
    before = bmc(build_deadlock_model(elaborate(ast)), 20)
    after = bmc(build_deadlock_model(elaborate(bigger)), 20)
    assert isinstance(before, BoundReached)
    assert isinstance(after, BoundReached)
