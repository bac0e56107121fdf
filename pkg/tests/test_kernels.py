import os
import random
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_netlist
from lichk import _kernels
from lichk.engine.oracle import bfs
from lichk.sim import FlatNetlist, ParallelSim, lane_values

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


@needs_numba
@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 200))
def test_eval_paths_agree(seed, lanes):
    net = random_netlist(random.Random(seed), n_in=5, n_latch=6, n_and=60)
    flat = FlatNetlist(net)
    nw = (lanes + 63) // 64
    rng = np.random.default_rng(seed)
    vals = np.zeros((flat.num_nodes, nw), dtype=np.uint64)
    vals[flat.input_idx] = rng.integers(0, 2**64, size=(len(flat.input_idx), nw), dtype=np.uint64)
    vals[flat.latch_idx] = rng.integers(0, 2**64, size=(len(flat.latch_idx), nw), dtype=np.uint64)
    a, b = vals.copy(), vals.copy()
    _kernels.eval_numba(flat, a)
    _kernels.eval_numpy(flat, b)
    assert np.array_equal(a, b)


@needs_numba
def test_run_paths_agree():
    rng = random.Random(3)
    for k in range(10):
        net = random_netlist(rng, n_in=4, n_latch=8, n_and=70, n_bad=2)
        watch = [r for _, r in net.bads] + [net.lookup(net.names[i]) for i in net.latches]
        sims = [ParallelSim(net, lanes=130, use_numba=u) for u in (True, False)]
        stim = sims[0].random_stimulus(np.random.default_rng(k), 25)
        a, b = (s.run(stim, watch) for s in sims)
        assert np.array_equal(a, b)
        assert np.array_equal(sims[0].state, sims[1].state)


def test_parallel_sim_matches_reference():
    rng = random.Random(11)
    net = random_netlist(rng, n_in=3, n_latch=5, n_and=40, n_bad=1)
    sim = ParallelSim(net, lanes=8)
    stim = sim.random_stimulus(np.random.default_rng(0), 12)
    watch = [r for _, r in net.bads]
    rec = lane_values(sim.run(stim, watch), 8)
    bits = lane_values(stim, 8)
    names = [net.names[i] for i in net.inputs]
    for lane in range(8):
        st_ = net.initial_state()
        for t in range(12):
            st_, v = net.simulate_step(st_, {n: int(bits[t, j, lane]) for j, n in enumerate(names)})
            assert rec[t, 0, lane] == v[watch[0].index] ^ watch[0].negated


def test_pack_unpack_round_trip():
    bits = np.random.default_rng(1).integers(0, 2, size=(3, 100), dtype=np.uint8)
    assert np.array_equal(_kernels.unpack_lanes(_kernels.pack_lanes(bits))[:, :100], bits)


@needs_numba
def test_bfs_paths_agree():
    rng = random.Random(17)
    for _ in range(10):
        net = random_netlist(rng, n_in=3, n_latch=7, n_and=50, n_con=1)
        assert bfs(net, use_numba=True) == bfs(net, use_numba=False)


def test_env_flag_selects_numpy_path():
    code = "from lichk import _kernels as k, sim; print(k.USE_NUMBA, k.evaluate is k.eval_numpy)"
    env = dict(os.environ, LICHK_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "True"]
