"""Slow, obviously-correct reference implementations used only by the tests."""
from __future__ import annotations

import itertools
import math

import numpy as np


def naive_count_unsat(clauses, values):
    """values[v] is the truth value of variable v (1-based; index 0 unused)."""
    bad = 0
    for clause in clauses:
        if not any(values[abs(l)] == (l > 0) for l in clause):
            bad += 1
    return bad


def brute_force_sat(num_vars, clauses):
    for bits in itertools.product((False, True), repeat=num_vars):
        values = (None,) + bits
        if naive_count_unsat(clauses, values) == 0:
            return True
    return False


def dpll(num_vars, clauses):
    """Tiny complete solver: unit propagation plus branching on the first literal."""
    clauses = [list(c) for c in clauses]
    return _dpll(clauses, {})


def _dpll(clauses, assign):
    while True:
        simplified = []
        unit = None
        for c in clauses:
            if any(assign.get(abs(l)) == (l > 0) for l in c):
                continue
            rest = [l for l in c if abs(l) not in assign]
            if not rest:
                return False
            if len(rest) == 1 and unit is None:
                unit = rest[0]
            simplified.append(rest)
        if not simplified:
            return True
        if unit is None:
            break
        assign = {**assign, abs(unit): unit > 0}
        clauses = simplified
    lit = simplified[0][0]
    for val in (lit > 0, lit <= 0):
        if _dpll(simplified, {**assign, abs(lit): val}):
            return True
    return False


def break_counts(clauses, values, num_vars):
    """Clauses that become unsatisfied if each variable is flipped."""
    out = np.zeros(num_vars, dtype=np.int64)
    for clause in clauses:
        true_lits = [l for l in clause if values[abs(l)] == (l > 0)]
        if len({abs(l) for l in true_lits}) == 1:
            out[abs(true_lits[0]) - 1] += 1
    return out


def exact_bootstrap_min(sorted_x, n):
    """E[min of n draws with replacement from sorted_x], exactly."""
    N = len(sorted_x)
    total = math.fsum(
        x * (((N - i) / N) ** n - ((N - i - 1) / N) ** n)
        for i, x in enumerate(sorted_x)
    )
    return total


def kolmogorov_sf_mp(t, terms=100, dps=50):
    import mpmath as mp

    with mp.workdps(dps):
        t = mp.mpf(t)
        s = mp.fsum((-1) ** (k - 1) * mp.exp(-2 * k * k * t * t) for k in range(1, terms + 1))
        return float(2 * s)
