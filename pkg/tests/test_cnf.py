import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rtdspeedup.cnf import (CnfFormula, DimacsError, clause_count, count_unsat,
                            generate_uniform_ksat, is_model, parse_dimacs,
                            read_dimacs, write_dimacs)

from oracles import naive_count_unsat


def test_parse_basic():
    f = parse_dimacs("p cnf 2 2\n1 -2 0\n2 0\n")
    assert f.num_vars == 2
    assert f.clauses == ((1, -2), (2,))


def test_parse_empty_clause_rejected():
    with pytest.raises(DimacsError, match="empty"):
        parse_dimacs("p cnf 1 1\n0\n")


def test_parse_comment_and_missing_newline():
    f = parse_dimacs("c comment\np cnf 3 1\n1 2 3 0")
    assert (f.num_vars, f.num_clauses) == (3, 1)


def test_parse_clause_spanning_lines_and_extra_whitespace():
    f = parse_dimacs("p cnf 3 2\n  1\t-2\n 3 0   -1 0\n\n")
    assert f.clauses == ((1, -2, 3), (-1,))


@pytest.mark.parametrize("text", [
    "p cnf 2 3\n1 0\n2 0\n",          # fewer clauses than declared
    "p cnf 2 1\n1 0\n2 0\n",          # more clauses than declared
    "p cnf 2 1\n3 0\n",               # literal out of range
    "1 2 0\n",                        # no header
    "p cnf 2\n1 0\n",                 # malformed header
    "p cnf 2 1\np cnf 2 1\n1 0\n",    # duplicate header
    "p cnf 2 1\n1 x 0\n",             # not an integer
    "p cnf 2 1\n1 2\n",               # unterminated clause
])
def test_parse_rejects(text):
    with pytest.raises(DimacsError):
        parse_dimacs(text)


def test_parse_warns_on_tautology():
    with pytest.warns(UserWarning, match="tautolog"):
        f = parse_dimacs("p cnf 2 1\n1 -1 2 0\n")
    assert f.clauses == ((1, -1, 2),)


def test_write_then_read(tmp_path):
    f = generate_uniform_ksat(20, 3, 4.2, seed=5)
    path = tmp_path / "a.cnf"
    path.write_text(write_dimacs(f, comments=["seed 5"]))
    assert read_dimacs(path) == f


@st.composite
def formulas(draw, max_vars=8, max_clauses=12):
    n = draw(st.integers(1, max_vars))
    lit = st.integers(1, n).flatmap(lambda v: st.sampled_from([v, -v]))
    clauses = draw(st.lists(st.lists(lit, min_size=1, max_size=4), min_size=1,
                            max_size=max_clauses))
    return CnfFormula(n, tuple(tuple(c) for c in clauses))


@settings(max_examples=200, deadline=None)
@given(formulas())
def test_round_trip(f):
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert parse_dimacs(write_dimacs(f)) == f


@pytest.mark.parametrize("n,k,r,m", [(30000, 3, 4.2, 126000), (2000, 5, 20, 40000),
                                     (100, 3, 4.2, 420), (250, 5, 20, 5000)])
def test_generator_clause_counts(n, k, r, m):
    f = generate_uniform_ksat(n, k, r, seed=1854039067)
    assert f.num_clauses == m == clause_count(n, r)
    widths = {len(c) for c in f.clauses}
    assert widths == {k}


def test_generator_distinct_variables_per_clause():
    f = generate_uniform_ksat(6, 5, 10, seed=3)
    for c in f.clauses:
        assert len({abs(l) for l in c}) == 5


def test_generator_rounds_to_nearest():
    assert clause_count(10, 4.26) == 43
    assert clause_count(10, 4.24) == 42
    assert generate_uniform_ksat(10, 3, 4.26, seed=0).num_clauses == 43


def test_generator_deterministic():
    assert generate_uniform_ksat(10, 3, 4.2, seed=7) == generate_uniform_ksat(10, 3, 4.2, seed=7)
    assert generate_uniform_ksat(10, 3, 4.2, seed=7) != generate_uniform_ksat(10, 3, 4.2, seed=8)


@pytest.mark.parametrize("args", [(0, 3, 4.2), (5, 1, 4.2), (2, 3, 4.2), (5, 3, 0)])
def test_generator_rejects_bad_arguments(args):
    with pytest.raises(ValueError):
        generate_uniform_ksat(*args, seed=0)


def test_count_unsat_examples():
    f = CnfFormula(2, ((1, -2), (2,)))
    assert count_unsat(f, [True, True]) == 0
    assert count_unsat(f, [False, True]) == 1
    g = CnfFormula(1, ((1,), (-1,)))
    assert count_unsat(g, [True]) == 1
    assert count_unsat(g, [False]) == 1


def test_count_unsat_shape_checked():
    with pytest.raises(ValueError):
        count_unsat(CnfFormula(2, ((1,),)), [True])


@pytest.mark.parametrize("seed", range(6))
def test_count_unsat_exhaustive_against_naive_scan(seed):
    rng = random.Random(seed)
    n = rng.randint(3, 12)
    f = generate_uniform_ksat(n, 3, rng.uniform(2, 6), seed=seed)
    for bits in itertools.product((False, True), repeat=n):
        assert count_unsat(f, bits) == naive_count_unsat(f.clauses, (None,) + bits)


@settings(max_examples=100, deadline=None)
@given(formulas(), st.randoms(use_true_random=False), st.data())
def test_count_unsat_invariant_under_clause_order(f, rnd, data):
    bits = data.draw(st.lists(st.booleans(), min_size=f.num_vars, max_size=f.num_vars))
    shuffled = list(f.clauses)
    rnd.shuffle(shuffled)
    g = CnfFormula(f.num_vars, tuple(shuffled))
    assert count_unsat(f, bits) == count_unsat(g, bits)
    assert is_model(f, bits) == (count_unsat(f, bits) == 0)


def test_formula_validation():
    with pytest.raises(ValueError):
        CnfFormula(2, ((1, 3),))
    with pytest.raises(ValueError):
        CnfFormula(2, ((),))
    with pytest.raises(ValueError):
        CnfFormula(0, ())


def test_flat_layout():
    f = CnfFormula(3, ((1, -2), (3,), (-1, 2, -3)))
    lits, starts = f.flat
    assert lits.tolist() == [1, -2, 3, -1, 2, -3]
    assert starts.tolist() == [0, 2, 3, 6]
    assert lits.dtype == np.int32
