"""Compare the numba and pure-numpy simulation kernels.

    python3 benchmarks/bench_kernels.py [--lanes 4096] [--steps 200] [--repeat 3] [--json out.json]

Three workloads: one combinational evaluation of a wide lane array, a
multi-cycle ``ParallelSim.run``, and the explicit-state BFS oracle.  JIT
compilation is triggered before timing.
"""

from __future__ import annotations

import argparse
import json
import random
import time
from pathlib import Path

import numpy as np

from lichk import _kernels
from lichk.corpus import fixture
from lichk.engine.oracle import bfs
from lichk.netlist import FALSE, Netlist
from lichk.pipeline import build_model, load_design
from lichk.sim import FlatNetlist, ParallelSim


def corpus_netlist(name="mismatched_depths_fix1:invalid-input"):
    fx = fixture(name)
    return build_model(load_design(fx.path), fx.check_config()).netlist


def bfs_netlist(latches=14, n_in=3):
    """Input-driven shift/xor register: every state is reachable within ``latches`` steps."""
    rng = random.Random(7)
    net = Netlist()
    ins = [net.add_input(f"i{k}") for k in range(n_in)]
    regs = [net.add_latch(0, f"r{k}") for k in range(latches)]
    for k, r in enumerate(regs):
        src = regs[k - 1]
        net.set_latch_next(r, net.add_xor(src, net.add_and(ins[k % n_in], ~rng.choice(regs))))
    net.add_bad("never", FALSE)
    return net


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench(lanes, steps, repeat):
    net = corpus_netlist()
    flat = FlatNetlist(net)
    nw = (lanes + 63) // 64
    rng = np.random.default_rng(0)
    base = np.zeros((flat.num_nodes, nw), dtype=np.uint64)
    base[flat.input_idx] = rng.integers(0, 2**64, size=(len(flat.input_idx), nw), dtype=np.uint64)
    watch = [r for _, r in net.bads]
    stim = ParallelSim(net, lanes=lanes).random_stimulus(rng, steps)
    small = bfs_netlist()
    rows = []
    paths = [("numba", True), ("numpy", False)] if _kernels.HAVE_NUMBA else [("numpy", False)]
    for label, use in paths:
        ev = _kernels.eval_numba if use else _kernels.eval_numpy
        sim = ParallelSim(flat, lanes=lanes, use_numba=use)
        # warm-up (JIT compile / level grouping)
        ev(flat, base.copy())
        sim.run(stim[:2], watch)
        bfs(small, use_numba=use, coi=False)
        rows.append({
            "path": label,
            "eval_s": best_of(lambda: ev(flat, base.copy()), repeat),
            "run_s": best_of(lambda: (sim.reset(), sim.run(stim, watch)), repeat),
            "bfs_s": best_of(lambda: bfs(small, use_numba=use, coi=False), repeat),
        })
    meta = {"nodes": flat.num_nodes, "ands": int(len(flat.order)), "lanes": lanes, "steps": steps,
            "bfs_latches": len(small.latches), "bfs_states": bfs(small, coi=False).states}
    return meta, rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lanes", type=int, default=4096)
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json")
    args = ap.parse_args(argv)
    meta, rows = bench(args.lanes, args.steps, args.repeat)
    print(f"netlist: {meta['nodes']} nodes ({meta['ands']} ands), {meta['lanes']} lanes, {meta['steps']} steps; "
          f"bfs: {meta['bfs_latches']} latches, {meta['bfs_states']} states")
    print(f"{'path':8s} {'eval':>10s} {'run':>10s} {'bfs':>10s}")
    for r in rows:
        print(f"{r['path']:8s} {r['eval_s'] * 1e3:9.2f}ms {r['run_s'] * 1e3:9.1f}ms {r['bfs_s'] * 1e3:9.1f}ms")
    if len(rows) == 2:
        a, b = rows
        print("numpy/numba: " + ", ".join(f"{k[:-2]} x{b[k] / a[k]:.1f}" for k in ("eval_s", "run_s", "bfs_s")))
    if args.json:
        Path(args.json).write_text(json.dumps({"meta": meta, "results": rows}, indent=2) + "\n")


if __name__ == "__main__":
    main()
