"""The check-model container shared by the wrappers and the engine."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .netlist import Netlist, NodeRef

INVALID_INPUT = "invalid-input"
DEADLOCK = "deadlock"


@dataclass
class CheckModel:
    """A netlist specialized for one check.

    ``signal_map`` names the signals shown in traces (MSB-first buses);
    ``latch_pairs`` optionally lists latches expected to track each other,
    such as the two copies of one register in a miter.
    """

    netlist: Netlist
    kind: str
    signal_map: dict[str, list[NodeRef]] = field(default_factory=dict)
    latch_pairs: list[tuple[str, str]] = field(default_factory=list)
    config: dict[str, Any] = field(default_factory=dict)

    @property
    def bads(self) -> list[tuple[str, NodeRef]]:
        return self.netlist.bads

    @classmethod
    def from_netlist(cls, net: Netlist, kind: str = "custom") -> "CheckModel":
        sig: dict[str, list[NodeRef]] = {}
        for i in net.inputs:
            sig[net.names[i]] = [NodeRef(i)]
        for i in net.latches:
            sig[net.names[i]] = [NodeRef(i)]
        sig.update({k: list(v) for k, v in net.buses.items()})
        for name, ref in net.bads:
            sig[name] = [ref]
        return cls(net, kind, sig)


def as_model(obj: CheckModel | Netlist) -> CheckModel:
    return obj if isinstance(obj, CheckModel) else CheckModel.from_netlist(obj)
