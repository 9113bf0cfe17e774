"""WalkSAT/SKC local search and sequential runtime collection.

One run starts from a uniformly random assignment and flips variables until
the formula is satisfied or the flip/time cutoff is hit; there are no
restarts inside a run.  The flip count is a pure function of
``(formula, seed, noise)``.
"""
from __future__ import annotations

import enum
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from numba import njit

from . import _rng
from .cnf import CnfFormula, count_unsat
from .rtd import Rtd, rtd_from_runs

DEFAULT_NOISE = 0.57
DEFAULT_MAX_FLIPS = 10_000_000
POLL_INTERVAL = 10_000


class Status(str, enum.Enum):
    SOLVED = "solved"
    CUTOFF = "cutoff"


@dataclass(frozen=True)
class SolverConfig:
    noise: float = DEFAULT_NOISE
    max_flips: int = DEFAULT_MAX_FLIPS
    max_seconds: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.noise <= 1.0:
            raise ValueError(f"noise must lie in [0, 1], got {self.noise}")
        if self.max_flips < 1:
            raise ValueError(f"max_flips must be >= 1, got {self.max_flips}")
        if self.max_seconds is not None and self.max_seconds <= 0:
            raise ValueError("max_seconds must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass(frozen=True)
class RunOutcome:
    status: Status
    flips: int
    seconds: float
    seed: int
    model: Optional[np.ndarray] = None

    @property
    def solved(self) -> bool:
        return self.status is Status.SOLVED


class AllCensoredError(RuntimeError):
    """Every run hit the cutoff; raise the cutoff and collect again."""


# --- compiled instance -----------------------------------------------------

@dataclass(frozen=True)
class _Compiled:
    num_vars: int
    lits: np.ndarray    # int32, concatenated clause literals
    cstart: np.ndarray  # int64, clause offsets into lits
    occ: np.ndarray     # int64, clause ids grouped by literal index
    ostart: np.ndarray  # int64, offsets into occ; literal index 2v (+1 if negative)


_compiled_cache: dict[int, tuple[CnfFormula, _Compiled]] = {}


def _compile(formula: CnfFormula) -> _Compiled:
    hit = _compiled_cache.get(id(formula))
    if hit is not None and hit[0] is formula:
        return hit[1]
    # dedupe literals, drop tautologies: both leave the model set unchanged
    # and keep the break-count bookkeeping exact
    clauses = []
    for c in formula.clauses:
        lits = tuple(dict.fromkeys(c))
        seen = set(lits)
        if any(-l in seen for l in lits):
            continue
        clauses.append(lits)
    n = formula.num_vars
    sizes = np.array([len(c) for c in clauses], dtype=np.int64)
    cstart = np.zeros(len(clauses) + 1, dtype=np.int64)
    np.cumsum(sizes, out=cstart[1:])
    lits = np.array([l for c in clauses for l in c], dtype=np.int32)
    lit_index = 2 * np.abs(lits).astype(np.int64) + (lits < 0)
    clause_of = np.repeat(np.arange(len(clauses), dtype=np.int64), sizes)
    order = np.argsort(lit_index, kind="stable")
    occ = clause_of[order]
    counts = np.bincount(lit_index, minlength=2 * (n + 1))
    ostart = np.zeros(2 * (n + 1) + 1, dtype=np.int64)
    np.cumsum(counts, out=ostart[1:])
    comp = _Compiled(n, lits, cstart, occ, ostart)
    if len(_compiled_cache) > 64:
        _compiled_cache.clear()
    _compiled_cache[id(formula)] = (formula, comp)
    return comp


# --- numba kernels -----------------------------------------------------------

@njit(cache=True, nogil=True)
def _init_state(lits, cstart, assign, tcount, crit, brk, unsat, upos, nunsat):
    m = cstart.shape[0] - 1
    brk[:] = 0
    nunsat[0] = 0
    for c in range(m):
        t = 0
        last = 0
        for p in range(cstart[c], cstart[c + 1]):
            l = lits[p]
            v = abs(l)
            if (l > 0) == (assign[v] == 1):
                t += 1
                last = v
        tcount[c] = t
        if t == 0:
            upos[c] = nunsat[0]
            unsat[nunsat[0]] = c
            nunsat[0] += 1
        elif t == 1:
            crit[c] = last
            brk[last] += 1


@njit(cache=True, nogil=True)
def _flip(v, assign, lits, cstart, occ, ostart, tcount, crit, brk, unsat, upos, nunsat):
    if assign[v] == 1:
        now_false = 2 * v
        now_true = 2 * v + 1
    else:
        now_false = 2 * v + 1
        now_true = 2 * v
    assign[v] = 1 - assign[v]
    for j in range(ostart[now_false], ostart[now_false + 1]):
        c = occ[j]
        tcount[c] -= 1
        if tcount[c] == 0:
            brk[v] -= 1
            upos[c] = nunsat[0]
            unsat[nunsat[0]] = c
            nunsat[0] += 1
        elif tcount[c] == 1:
            for p in range(cstart[c], cstart[c + 1]):
                l = lits[p]
                u = abs(l)
                if (l > 0) == (assign[u] == 1):
                    crit[c] = u
                    brk[u] += 1
                    break
    for j in range(ostart[now_true], ostart[now_true + 1]):
        c = occ[j]
        tcount[c] += 1
        if tcount[c] == 1:
            k = upos[c]
            last = unsat[nunsat[0] - 1]
            unsat[k] = last
            upos[last] = k
            nunsat[0] -= 1
            crit[c] = v
            brk[v] += 1
        elif tcount[c] == 2:
            brk[crit[c]] -= 1


@njit(cache=True, nogil=True)
def _walk(lits, cstart, occ, ostart, assign, tcount, crit, brk, unsat, upos,
          nunsat, rng, noise, budget):
    """Perform up to ``budget`` SKC flips; return the number performed."""
    flips = 0
    while nunsat[0] > 0 and flips < budget:
        c = unsat[_rng.below(rng, nunsat[0])]
        a = cstart[c]
        b = cstart[c + 1]
        best = 1 << 62
        nbest = 0
        for p in range(a, b):
            bc = brk[abs(lits[p])]
            if bc < best:
                best = bc
                nbest = 1
            elif bc == best:
                nbest += 1
        if best == 0 or _rng.uniform(rng) >= noise:
            pick = _rng.below(rng, nbest)
            v = 0
            for p in range(a, b):
                u = abs(lits[p])
                if brk[u] == best:
                    if pick == 0:
                        v = u
                        break
                    pick -= 1
        else:
            v = abs(lits[a + _rng.below(rng, b - a)])
        _flip(v, assign, lits, cstart, occ, ostart, tcount, crit, brk, unsat,
              upos, nunsat)
        flips += 1
    return flips


@njit(cache=True, nogil=True)
def _random_assignment(rng, assign):
    for v in range(1, assign.shape[0]):
        assign[v] = _rng.next_u64(rng) >> np.uint64(63)


# --- Python driver -----------------------------------------------------------

class Walker:
    """A single resumable WalkSAT walk.

    ``advance(k)`` performs at most k flips, so callers can interleave cutoff
    checks, wall-clock limits or stop signals between chunks without
    perturbing the flip sequence.
    """

    def __init__(self, formula: CnfFormula, seed: int, noise: float = DEFAULT_NOISE):
        self.formula = formula
        self.seed = seed
        self.noise = float(noise)
        self._c = c = _compile(formula)
        m = c.cstart.shape[0] - 1
        self._rng = _rng.new_state(seed)
        self._assign = np.zeros(c.num_vars + 1, dtype=np.uint8)
        _random_assignment(self._rng, self._assign)
        self._tcount = np.zeros(m, dtype=np.int64)
        self._crit = np.zeros(m, dtype=np.int64)
        self._brk = np.zeros(c.num_vars + 1, dtype=np.int64)
        self._unsat = np.zeros(max(m, 1), dtype=np.int64)
        self._upos = np.zeros(max(m, 1), dtype=np.int64)
        self._nunsat = np.zeros(1, dtype=np.int64)
        _init_state(c.lits, c.cstart, self._assign, self._tcount, self._crit,
                    self._brk, self._unsat, self._upos, self._nunsat)
        self.flips = 0

    @property
    def num_unsat(self) -> int:
        return int(self._nunsat[0])

    @property
    def solved(self) -> bool:
        return bool(self._nunsat[0] == 0)

    def assignment(self) -> np.ndarray:
        """Current values; index i holds variable i + 1."""
        return self._assign[1:].astype(bool)

    def break_counts(self) -> np.ndarray:
        return self._brk[1:].copy()

    def advance(self, budget: int) -> int:
        c = self._c
        done = _walk(c.lits, c.cstart, c.occ, c.ostart, self._assign, self._tcount,
                     self._crit, self._brk, self._unsat, self._upos, self._nunsat,
                     self._rng, self.noise, int(budget))
        self.flips += int(done)
        return int(done)


def solve(formula: CnfFormula, config: SolverConfig) -> RunOutcome:
    """One WalkSAT run from a random assignment to solution or cutoff."""
    t0 = time.perf_counter()
    w = Walker(formula, config.seed, config.noise)
    if config.max_seconds is None:
        w.advance(config.max_flips)
    else:
        while not w.solved and w.flips < config.max_flips:
            if time.perf_counter() - t0 >= config.max_seconds:
                break
            w.advance(min(POLL_INTERVAL, config.max_flips - w.flips))
    seconds = time.perf_counter() - t0
    if w.solved:
        model = w.assignment()
        assert count_unsat(formula, model) == 0
        return RunOutcome(Status.SOLVED, w.flips, seconds, config.seed, model)
    return RunOutcome(Status.CUTOFF, w.flips, seconds, config.seed)


def collect_runs(formula: CnfFormula, config: SolverConfig, n_runs: int,
                 base_seed: int, workers: int = 1) -> list[RunOutcome]:
    """Run seeds ``base_seed .. base_seed + n_runs - 1``; results ordered by seed."""
    if n_runs < 1:
        raise ValueError("n_runs must be positive")
    configs = [replace(config, seed=base_seed + i) for i in range(n_runs)]
    if workers <= 1:
        return [solve(formula, c) for c in configs]
    _compile(formula)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: solve(formula, c), configs))


def collect_rtd(formula: CnfFormula, config: SolverConfig, n_runs: int,
                base_seed: int, unit: str = "flips", workers: int = 1) -> Rtd:
    """Collect a sequential runtime distribution of ``n_runs`` independent runs.

    Cutoff runs enter as censored samples at the cutoff value.  Raises
    :class:`AllCensoredError` if no run solved the instance.
    """
    if n_runs < 2:
        raise ValueError("an RTD needs at least 2 runs")
    runs = collect_runs(formula, config, n_runs, base_seed, workers)
    if not any(r.solved for r in runs):
        raise AllCensoredError(
            f"all {n_runs} runs hit the cutoff (max_flips={config.max_flips}); "
            "raise the cutoff"
        )
    return rtd_from_runs(runs, unit)
