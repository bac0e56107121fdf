"""Check models built around an elaborated design.

``build_invalid_input_model`` is a miter: two copies of the design see the
same valid strobes and the same data whenever data is valid, but
independent free data whenever it is not.  Any difference in their valid
outputs, or in output data while both are valid, means the design consumed
invalid input.

``build_deadlock_model`` keeps the environment unblocked and flags the
cycle in which every module is stalled at once.
"""

from __future__ import annotations

from . import words as W
from .elaborate import ElaboratedDesign, reelaborate
from .model import DEADLOCK, INVALID_INPUT, CheckModel
from .netlist import Netlist, NodeRef


class WrapperError(Exception):
    pass


def _bus_map(net: Netlist, prefix: str = "") -> dict[str, list[NodeRef]]:
    return {prefix + k: list(v) for k, v in net.buses.items()}


def build_invalid_input_model(elab: ElaboratedDesign, strict_input_ready: bool = False,
                              swap: bool = False) -> CheckModel:
    ins = [n for n, d in elab.external_dirs.items() if d == "in"]
    outs = [n for n, d in elab.external_dirs.items() if d == "out"]
    if not ins or not outs:
        raise WrapperError("the invalid-input check needs at least one external in port and one external out port")
    dut = elab.netlist
    net = Netlist()
    sig: dict[str, list[NodeRef]] = {}
    bindings = {"ref.": {}, "test.": {}}
    for x in ins:
        width = len(elab.external_ports[x].dat)
        v = net.add_input(f"{x}.vld")
        shared = W.inputs(net, f"{x}.dat", width)
        inv_ref = W.inputs(net, f"{x}.inv_ref", width)
        inv_test = W.inputs(net, f"{x}.inv_test", width)
        inv = {"ref.": inv_test, "test.": inv_ref} if swap else {"ref.": inv_ref, "test.": inv_test}
        sig[f"{x}.vld"] = [v]
        sig[f"{x}.dat"] = W.msb_first(shared)
        sig[f"{x}.inv_ref"] = W.msb_first(inv_ref)
        sig[f"{x}.inv_test"] = W.msb_first(inv_test)
        for pre in bindings:
            bindings[pre][f"{x}.vld"] = v
            for i, d in enumerate(W.mux(net, v, shared, inv[pre])):
                bindings[pre][f"{x}.dat[{i}]"] = d
    for y in outs:
        r = net.add_input(f"{y}.rdy")
        sig[f"{y}.rdy"] = [r]
        for pre in bindings:
            bindings[pre][f"{y}.rdy"] = r
    remaps = {pre: net.import_netlist(dut, pre, bindings[pre]) for pre in bindings}
    sig.update(_bus_map(net))

    def port(pre, name):
        ps = elab.external_ports[name]
        rm = remaps[pre]
        return rm(ps.vld), rm(ps.rdy), rm.many(ps.dat)

    for y in outs:
        vr, _, dr = port("ref.", y)
        vt, _, dt = port("test.", y)
        net.add_bad(f"__bad.B1.{y}", net.add_xor(vr, vt))
        diff = ~W.eq(net, dr, dt)
        net.add_bad(f"__bad.B2.{y}", net.add_and_all([vr, vt, diff]))
    if strict_input_ready:
        for x in ins:
            _, rr, _ = port("ref.", x)
            _, rt, _ = port("test.", x)
            net.add_bad(f"__bad.B3.{x}", net.add_xor(rr, rt))
    for m in elab.modules:
        for pre in bindings:
            sig[f"{pre}{m.name}.__stall"] = [remaps[pre](m.global_stall)]
            for sn, sref in m.states.items():
                sig[pre + sn] = [remaps[pre](sref)]
    for name, ref in net.bads:
        sig[name] = [ref]
    net.validate()
    pairs = [("ref." + dut.names[i], "test." + dut.names[i]) for i in dut.latches]
    cfg = {"strict_input_ready": strict_input_ready, "swap": swap}
    return CheckModel(net, INVALID_INPUT, sig, pairs, cfg)


def build_deadlock_model(elab: ElaboratedDesign, nb_stall_cycles: int | None = None,
                         env_valid: str = "constrained") -> CheckModel:
    if env_valid not in ("constrained", "free"):
        raise WrapperError(f"env_valid must be 'constrained' or 'free', not {env_valid!r}")
    if nb_stall_cycles is not None and nb_stall_cycles != elab.options.nb_stall_cycles:
        elab = reelaborate(elab, nb_stall_cycles=nb_stall_cycles)
    if not elab.modules:
        raise WrapperError("design has no modules")
    net, remap = elab.netlist.finalize()
    for name, d in elab.external_dirs.items():
        if d == "out":
            net.add_constraint(net.lookup(f"{name}.rdy"))
        elif env_valid == "constrained":
            net.add_constraint(net.lookup(f"{name}.vld"))
    stalls = [remap(m.global_stall) for m in elab.modules]
    net.add_bad("__bad.deadlock", net.add_and_all(stalls))
    sig = _bus_map(net)
    for m in elab.modules:
        for sn, sref in m.states.items():
            sig[sn] = [remap(sref)]
    sig["__bad.deadlock"] = [net.bads[0][1]]
    net.validate()
    cfg = {"nb_stall_cycles": elab.options.nb_stall_cycles, "nb_stall_mode": elab.options.nb_stall_mode,
           "env_valid": env_valid}
    return CheckModel(net, DEADLOCK, sig, [], cfg)
