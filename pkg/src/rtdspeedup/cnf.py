"""CNF formulas: DIMACS reading/writing, uniform random k-SAT, clause evaluation."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np


class DimacsError(ValueError):
    """Malformed DIMACS input."""


@dataclass(frozen=True)
class CnfFormula:
    """A CNF formula over variables ``1..num_vars``.

    Clauses are tuples of nonzero signed ints; ``-v`` is the negation of ``v``.
    Instances are immutable and can be shared across worker threads.
    """

    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValueError(f"num_vars must be positive, got {self.num_vars}")
        clauses = tuple(tuple(int(l) for l in c) for c in self.clauses)
        object.__setattr__(self, "clauses", clauses)
        for i, clause in enumerate(clauses):
            if not clause:
                raise ValueError(f"clause {i} is empty")
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(
                        f"clause {i}: literal {lit} out of range 1..{self.num_vars}"
                    )

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    @cached_property
    def flat(self) -> tuple[np.ndarray, np.ndarray]:
        """Literals concatenated as int32 plus clause offsets (length m+1)."""
        sizes = np.fromiter((len(c) for c in self.clauses), dtype=np.int64,
                            count=len(self.clauses))
        starts = np.zeros(len(self.clauses) + 1, dtype=np.int64)
        np.cumsum(sizes, out=starts[1:])
        lits = np.fromiter((l for c in self.clauses for l in c), dtype=np.int32,
                           count=int(starts[-1]))
        return lits, starts


def parse_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF text.

    Comment lines start with ``c``. Clauses may span lines and must each be
    terminated by ``0``. A ``%`` line (SATLIB convention) ends the clause
    section.
    """
    header = None
    clauses: list[list[int]] = []
    current: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            if header is not None:
                raise DimacsError(f"line {lineno}: duplicate header")
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: malformed header {line!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise DimacsError(f"line {lineno}: malformed header {line!r}") from None
            if header[0] < 1 or header[1] < 0:
                raise DimacsError(f"line {lineno}: invalid header counts {line!r}")
            continue
        if header is None:
            raise DimacsError(f"line {lineno}: clause data before 'p cnf' header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"line {lineno}: bad literal {tok!r}") from None
            if lit == 0:
                if not current:
                    raise DimacsError(f"line {lineno}: empty clause")
                clauses.append(current)
                current = []
            elif abs(lit) > header[0]:
                raise DimacsError(
                    f"line {lineno}: literal {lit} out of range 1..{header[0]}"
                )
            else:
                current.append(lit)
    if header is None:
        raise DimacsError("missing 'p cnf' header")
    if current:
        raise DimacsError("unterminated final clause (missing 0)")
    if len(clauses) != header[1]:
        raise DimacsError(
            f"header declares {header[1]} clauses, found {len(clauses)}"
        )
    for i, clause in enumerate(clauses):
        if any(-l in clause for l in clause):
            warnings.warn(f"clause {i} is tautological: {clause}", stacklevel=2)
    return CnfFormula(header[0], tuple(tuple(c) for c in clauses))


def write_dimacs(formula: CnfFormula, comments: Sequence[str] = ()) -> str:
    lines = [f"c {c}" for c in comments]
    lines.append(f"p cnf {formula.num_vars} {formula.num_clauses}")
    lines.extend(" ".join(map(str, c)) + " 0" for c in formula.clauses)
    return "\n".join(lines) + "\n"


def read_dimacs(path) -> CnfFormula:
    with open(path) as fh:
        return parse_dimacs(fh.read())


def clause_count(num_vars: int, ratio: float) -> int:
    """Nearest-integer clause count for a clauses-per-variable ratio."""
    return int(math.floor(ratio * num_vars + 0.5))


def generate_uniform_ksat(num_vars: int, k: int, ratio: float, seed: int) -> CnfFormula:
    """Uniform random k-SAT with ``round(ratio * num_vars)`` clauses.

    Each clause holds k distinct variables drawn uniformly without
    replacement, each negated with probability 1/2. Clauses are drawn
    independently, so duplicate clauses can occur.
    """
    if num_vars < 1:
        raise ValueError("num_vars must be positive")
    if k < 2:
        raise ValueError("clause width k must be at least 2")
    if k > num_vars:
        raise ValueError(f"clause width k={k} exceeds num_vars={num_vars}")
    if ratio <= 0:
        raise ValueError("ratio must be positive")
    m = clause_count(num_vars, ratio)
    rng = np.random.default_rng(seed)
    vars_ = rng.integers(1, num_vars + 1, size=(m, k))
    # redraw rows with a repeated variable until every row is distinct
    while True:
        srt = np.sort(vars_, axis=1)
        bad = np.flatnonzero((np.diff(srt, axis=1) == 0).any(axis=1))
        if bad.size == 0:
            break
        vars_[bad] = rng.integers(1, num_vars + 1, size=(bad.size, k))
    signs = np.where(rng.random((m, k)) < 0.5, -1, 1)
    lits = (vars_ * signs).tolist()
    return CnfFormula(num_vars, tuple(tuple(c) for c in lits))


def _as_values(formula: CnfFormula, assignment) -> np.ndarray:
    values = np.asarray(assignment, dtype=bool)
    if values.shape != (formula.num_vars,):
        raise ValueError(
            f"assignment has shape {values.shape}, expected ({formula.num_vars},)"
        )
    return values


def count_unsat(formula: CnfFormula, assignment) -> int:
    """Number of clauses with no true literal.

    ``assignment[i]`` is the value of variable ``i + 1``.
    """
    values = _as_values(formula, assignment)
    if formula.num_clauses == 0:
        return 0
    lits, starts = formula.flat
    lit_true = values[np.abs(lits) - 1] == (lits > 0)
    sat = np.logical_or.reduceat(lit_true, starts[:-1])
    return int(formula.num_clauses - np.count_nonzero(sat))


def is_model(formula: CnfFormula, assignment) -> bool:
    return count_unsat(formula, assignment) == 0
