"""Counterexample files: tab-separated tables and VCD waveforms.

A TSV trace starts with ``#`` header lines carrying the check
configuration as JSON, so ``lichk replay`` can rebuild the model; then a
column header (``frame`` plus one column per signal) and one row per frame.
Every free input of the model is recoverable from the columns: inputs that
are not part of any named bus get a column of their own.
"""

from __future__ import annotations

import json
from typing import TextIO

from .engine.check import Trace, simulate_trace
from .model import CheckModel
from .netlist import NodeRef
from .words import value_of

MAGIC = "# lichk-trace v1"


class TraceFormatError(ValueError):
    pass


def _input_sources(model: CheckModel) -> tuple[dict[int, tuple[str, int]], list[str]]:
    """Map each input index to a (signal, bit) column, LSB = bit 0; list extra input columns."""
    net = model.netlist
    where: dict[int, tuple[str, int]] = {}
    for name, refs in model.signal_map.items():
        w = len(refs)
        for pos, r in enumerate(refs):
            if not r.negated and r.index in net.inputs and r.index not in where:
                where[r.index] = (name, w - 1 - pos)
    extra = [net.names[i] for i in net.inputs if i not in where]
    for nm in extra:
        where[net.lookup(nm).index] = (nm, 0)
    return where, extra


def full_signal_map(model: CheckModel) -> dict[str, list[NodeRef]]:
    """Every named node: the ``--trace-all`` view."""
    sig = dict(model.signal_map)
    net = model.netlist
    for idx, nm in net.names.items():
        sig.setdefault(nm, [NodeRef(idx)])
    return sig


def write_tsv(fh: TextIO, model: CheckModel, trace: Trace, config: dict, trace_all: bool = False) -> None:
    sigmap = full_signal_map(model) if trace_all else model.signal_map
    _, extra = _input_sources(model)
    signals = list(sigmap) + [e for e in extra if e not in sigmap]
    vals, _ = simulate_trace(model, trace.inputs)
    fh.write(MAGIC + "\n")
    fh.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    fh.write(f"# depth: {trace.depth}\n")
    fh.write("# bads: " + ",".join(trace.bads_hit) + "\n")
    fh.write("\t".join(["frame"] + signals) + "\n")
    net = model.netlist
    for t, v in enumerate(vals):
        row = [str(t)]
        for s in signals:
            refs = sigmap[s] if s in sigmap else [net.lookup(s)]
            row.append(str(value_of(v, refs)))
        fh.write("\t".join(row) + "\n")


def read_tsv(text: str) -> tuple[dict, list[str], list[dict[str, int]]]:
    """Return (config, signal names, rows)."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != MAGIC:
        raise TraceFormatError("not a lichk trace file")
    config = None
    i = 1
    while i < len(lines) and lines[i].startswith("#"):
        if lines[i].startswith("# config: "):
            config = json.loads(lines[i][len("# config: "):])
        i += 1
    if config is None:
        raise TraceFormatError("trace file has no config line")
    if i >= len(lines):
        raise TraceFormatError("trace file has no column header")
    header = lines[i].split("\t")
    if header[0] != "frame":
        raise TraceFormatError("first column must be 'frame'")
    signals = header[1:]
    rows = []
    for ln in lines[i + 1:]:
        if not ln.strip():
            continue
        cells = ln.split("\t")
        if len(cells) != len(header):
            raise TraceFormatError(f"row {len(rows)} has {len(cells)} cells, expected {len(header)}")
        rows.append({s: int(c) for s, c in zip(signals, cells[1:])})
    return config, signals, rows


def inputs_from_rows(model: CheckModel, rows: list[dict[str, int]]) -> list[dict[str, int]]:
    net = model.netlist
    where, _ = _input_sources(model)
    out = []
    for row in rows:
        frame = {}
        for idx, (sig, bit) in where.items():
            if sig not in row:
                raise TraceFormatError(f"trace lacks column {sig!r} needed for input {net.names[idx]!r}")
            frame[net.names[idx]] = (row[sig] >> bit) & 1
        out.append(frame)
    return out


# -- VCD -------------------------------------------------------------------------

def _vcd_id(n: int) -> str:
    chars = [chr(c) for c in range(33, 127)]
    s = ""
    n += 1
    while n:
        n, r = divmod(n - 1, len(chars))
        s = chars[r] + s
    return s


def write_vcd(fh: TextIO, trace: Trace, scope: str = "lichk") -> None:
    """Write the trace as a VCD waveform, one time unit (1 ns) per frame."""
    ids = {s: _vcd_id(i) for i, s in enumerate(trace.signals)}
    fh.write("$version lichk $end\n")
    fh.write("$timescale 1 ns $end\n")
    fh.write(f"$scope module {scope} $end\n")
    for s in trace.signals:
        ref = s.replace(" ", "_")
        fh.write(f"$var wire {trace.widths[s]} {ids[s]} {ref} $end\n")
    fh.write("$upscope $end\n$enddefinitions $end\n")

    def val(s, v):
        if trace.widths[s] == 1:
            return f"{v}{ids[s]}"
        return f"b{v:b} {ids[s]}"

    prev: dict[str, int] = {}
    for t, frame in enumerate(trace.frames):
        fh.write(f"#{t}\n")
        if t == 0:
            fh.write("$dumpvars\n")
        for s in trace.signals:
            v = frame[s]
            if prev.get(s) != v:
                fh.write(val(s, v) + "\n")
                prev[s] = v
        if t == 0:
            fh.write("$end\n")
    fh.write(f"#{len(trace.frames)}\n")


def read_vcd(text: str) -> dict[str, list[int]]:
    """Minimal reader for VCD files produced by :func:`write_vcd` (used in tests)."""
    names, series = {}, {}
    cur: dict[str, int] = {}
    times: list[int] = []
    snaps: list[dict[str, int]] = []
    for raw in text.splitlines():
        tok = raw.split()
        if not tok:
            continue
        if tok[0] == "$var":
            names[tok[3]] = tok[4]
        elif tok[0].startswith("#"):
            if times:
                snaps.append(dict(cur))
            times.append(int(tok[0][1:]))
        elif tok[0].startswith("b"):
            cur[names[tok[1]]] = int(tok[0][1:], 2)
        elif tok[0][0] in "01" and tok[0][1:] in names:
            cur[names[tok[0][1:]]] = int(tok[0][0])
    for nm in names.values():
        series[nm] = [s.get(nm, 0) for s in snaps]
    return series
