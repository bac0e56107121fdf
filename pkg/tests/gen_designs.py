"""Random sequential netlists of three shapes: unstructured, counter-driven and shift chains."""

import random
from lichk import words as W
from lichk.netlist import Netlist
from conftest import random_netlist


def _sprinkle(rng, net, pool, n):
    for _ in range(n):
        a, b = rng.choice(pool), rng.choice(pool)
        pool.append(net.add_and(a if rng.random() < 0.5 else ~a, b if rng.random() < 0.5 else ~b))
    return pool


def counter_design(rng):
    net = Netlist()
    w = rng.randint(2, 6)
    ins = [net.add_input(f"i{k}") for k in range(rng.randint(1, 3))]
    regs = W.latches(net, "c", w)
    extra = [net.add_latch(int(rng.random() < 0.3), f"x{k}") for k in range(rng.randint(0, 16 - w))]
    pool = _sprinkle(rng, net, ins + regs + extra, rng.randint(5, 60))
    en = rng.choice(pool) if rng.random() < 0.7 else ~net.lookup("i0")
    W.set_next(net, regs, W.mux(net, en, W.increment(net, regs), regs))
    for x in extra:
        net.set_latch_next(x, rng.choice(pool))
    hit = W.eq_const(net, regs, rng.randrange(1 << w))
    if rng.random() < 0.5:
        hit = net.add_and(hit, rng.choice(pool))
    net.add_bad("hit", hit)
    return net


def shift_design(rng):
    net = Netlist()
    n = rng.randint(3, 16)
    ins = [net.add_input(f"i{k}") for k in range(rng.randint(1, 3))]
    regs = [net.add_latch(0, f"s{k}") for k in range(n)]
    pool = _sprinkle(rng, net, ins + regs, rng.randint(5, 60))
    net.set_latch_next(regs[0], rng.choice(pool))
    for a, b in zip(regs, regs[1:]):
        net.set_latch_next(b, a if rng.random() < 0.8 else net.add_and(a, rng.choice(pool)))
    taps = rng.sample(regs, rng.randint(1, min(4, n)))
    net.add_bad("taps", net.add_and_all(taps + [regs[-1]]))
    return net


def random_design(rng, k):
    kind = k % 3
    if kind == 0:
        return random_netlist(rng, n_in=rng.randint(1, 4), n_latch=rng.randint(1, 16), n_and=rng.randint(10, 190),
                              n_bad=rng.randint(1, 3), n_con=rng.randint(0, 1))
    return counter_design(rng) if kind == 1 else shift_design(rng)
