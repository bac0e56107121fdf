"""Word-level helpers over LSB-first lists of :class:`NodeRef`."""

from __future__ import annotations

from typing import Sequence

from .netlist import FALSE, TRUE, Netlist, NodeRef

Word = list[NodeRef]


def const(value: int, width: int) -> Word:
    return [TRUE if (value >> i) & 1 else FALSE for i in range(width)]


def inputs(net: Netlist, name: str, width: int) -> Word:
    return [net.add_input(f"{name}[{i}]") for i in range(width)]


def latches(net: Netlist, name: str, width: int, init: int = 0) -> Word:
    return [net.add_latch((init >> i) & 1, f"{name}[{i}]") for i in range(width)]


def set_next(net: Netlist, regs: Word, nxt: Word) -> None:
    for r, n in zip(regs, nxt, strict=True):
        net.set_latch_next(r, n)


def bitwise_not(a: Word) -> Word:
    return [~x for x in a]


def bitwise_and(net: Netlist, a: Word, b: Word) -> Word:
    return [net.add_and(x, y) for x, y in zip(a, b, strict=True)]


def bitwise_or(net: Netlist, a: Word, b: Word) -> Word:
    return [net.add_or(x, y) for x, y in zip(a, b, strict=True)]


def bitwise_xor(net: Netlist, a: Word, b: Word) -> Word:
    return [net.add_xor(x, y) for x, y in zip(a, b, strict=True)]


def add(net: Netlist, a: Word, b: Word, carry: NodeRef = FALSE) -> Word:
    """Ripple-carry sum modulo 2**width."""
    out = []
    for x, y in zip(a, b, strict=True):
        s = net.add_xor(x, y)
        out.append(net.add_xor(s, carry))
        carry = net.add_or(net.add_and(x, y), net.add_and(s, carry))
    return out


def sub(net: Netlist, a: Word, b: Word) -> Word:
    return add(net, a, bitwise_not(b), TRUE)


def increment(net: Netlist, a: Word) -> Word:
    out, carry = [], TRUE
    for x in a:
        out.append(net.add_xor(x, carry))
        carry = net.add_and(x, carry)
    return out


def decrement(net: Netlist, a: Word) -> Word:
    return sub(net, a, const(1, len(a)))


def eq(net: Netlist, a: Word, b: Word) -> NodeRef:
    return net.add_and_all(~net.add_xor(x, y) for x, y in zip(a, b, strict=True))


def eq_const(net: Netlist, a: Word, value: int) -> NodeRef:
    return net.add_and_all(x if (value >> i) & 1 else ~x for i, x in enumerate(a))


def ult(net: Netlist, a: Word, b: Word) -> NodeRef:
    """Unsigned a < b."""
    lt = FALSE
    for x, y in zip(a, b, strict=True):  # LSB to MSB; higher bits override
        bit_lt = net.add_and(~x, y)
        same = ~net.add_xor(x, y)
        lt = net.add_or(bit_lt, net.add_and(same, lt))
    return lt


def mux(net: Netlist, sel: NodeRef, then: Sequence[NodeRef], other: Sequence[NodeRef]) -> Word:
    return [net.add_mux(sel, t, e) for t, e in zip(then, other, strict=True)]


def msb_first(word: Sequence[NodeRef]) -> list[NodeRef]:
    return list(reversed(word))


def value_of(node_values: Sequence[int], refs_msb_first: Sequence[NodeRef]) -> int:
    v = 0
    for r in refs_msb_first:
        v = (v << 1) | (node_values[r.index] ^ int(r.negated))
    return v
