import io
import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lichk.engine.cnf import CnfFormula, DimacsError
from lichk.engine.sat import Solver, SolverTimeout, sat_solve


def brute_force(n, clauses) -> bool:
    """Exhaustive truth table, vectorized over all 2**n assignments."""
    if n == 0:
        return not clauses
    idx = np.arange(1 << n, dtype=np.uint32)
    bits = [((idx >> v) & 1).astype(bool) for v in range(n)]
    ok = np.ones(1 << n, dtype=bool)
    for c in clauses:
        sat = np.zeros(1 << n, dtype=bool)
        for x in c:
            sat |= bits[x - 1] if x > 0 else ~bits[-x - 1]
        ok &= sat
        if not ok.any():
            return False
    return bool(ok.any())


def random_3cnf(rng, n, m):
    cnf = CnfFormula(n)
    for _ in range(m):
        vs = rng.sample(range(1, n + 1), 3)
        cnf.clauses.append([v if rng.random() < 0.5 else -v for v in vs])
    return cnf


def test_empty_formula_is_sat():
    assert sat_solve(CnfFormula()) is not None


def test_contradiction():
    assert sat_solve(CnfFormula(1, [[1], [-1]])) is None


def test_empty_clause_is_unsat():
    assert sat_solve(CnfFormula(2, [[1, 2], []])) is None


def test_random_3cnf_matches_enumeration():
    rng = random.Random(2024)
    sat_count = 0
    for _ in range(200):
        n = rng.randint(3, 20)
        cnf = random_3cnf(rng, n, rng.randint(1, 90))
        model = sat_solve(cnf, seed=rng.randint(0, 99))
        assert (model is not None) == brute_force(n, cnf.clauses)
        if model is not None:
            assert cnf.satisfied_by(model)
            sat_count += 1
    assert 0 < sat_count < 200


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 8).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.lists(st.integers(1, n).flatmap(lambda v: st.sampled_from([v, -v])), min_size=1, max_size=4),
             max_size=30))))
def test_small_formulas_property(args):
    n, clauses = args
    cnf = CnfFormula(n, [list(dict.fromkeys(c)) for c in clauses])
    model = sat_solve(cnf)
    assert (model is not None) == brute_force(n, cnf.clauses)


def test_pigeonhole_unsat():
    # 5 pigeons, 4 holes
    p, h = 5, 4
    var = lambda i, j: i * h + j + 1  # noqa: E731
    cnf = CnfFormula(p * h)
    for i in range(p):
        cnf.clauses.append([var(i, j) for j in range(h)])
    for j in range(h):
        for a, b in itertools.combinations(range(p), 2):
            cnf.clauses.append([-var(a, j), -var(b, j)])
    assert sat_solve(cnf) is None


def test_incremental_assumptions_and_core():
    s = Solver(seed=1)
    s.ensure_vars(3)
    s.add_clause([-1, 2])
    s.add_clause([-2, 3])
    assert s.solve([1])
    assert s.value(3)
    assert not s.solve([1, -3])
    assert set(s.core()) <= {1, -3}
    assert s.solve([-3])
    assert not s.value(1)


def test_deadline_raises_timeout():
    rng = random.Random(0)
    cnf = random_3cnf(rng, 200, 852)
    with pytest.raises(SolverTimeout):
        sat_solve(cnf, deadline=0.0)


def test_seed_does_not_change_verdict():
    rng = random.Random(7)
    for _ in range(30):
        cnf = random_3cnf(rng, 15, 64)
        verdicts = {sat_solve(cnf, seed=s) is None for s in range(3)}
        assert len(verdicts) == 1


# -- DIMACS --------------------------------------------------------------------

def test_dimacs_round_trip():
    rng = random.Random(3)
    cnf = random_3cnf(rng, 10, 40)
    buf = io.StringIO()
    cnf.write(buf, ["hello"])
    back = CnfFormula.from_dimacs(buf.getvalue())
    assert back == cnf
    assert back.to_dimacs(["hello"]) == buf.getvalue()


def test_dimacs_multiline_clause_and_comments():
    text = "c x\np cnf 3 2\n1 -2\n 3 0\n-1 0\n"
    cnf = CnfFormula.from_dimacs(text)
    assert cnf.clauses == [[1, -2, 3], [-1]]


@pytest.mark.parametrize("text", ["1 2 0\n", "p cnf 2 1\n3 0\n", "p cnf 2 2\n1 0\n", "p dnf 1 1\n1 0\n"])
def test_dimacs_errors(text):
    with pytest.raises(DimacsError):
        CnfFormula.from_dimacs(text)


def test_add_drops_tautology_and_checks_range():
    cnf = CnfFormula(2)
    cnf.add([1, -1, 2])
    cnf.add([2, 2, -1])
    assert cnf.clauses == [[2, -1]]
    with pytest.raises(ValueError):
        cnf.add([3])
