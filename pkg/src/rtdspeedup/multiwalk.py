"""Independent multi-walk execution: n walks race, the first finisher wins.

Two channels are provided.  ``simulate_logical`` computes the first
finisher in flips, which is deterministic and scales to any core count on
one machine.  ``run_parallel_wallclock`` really runs the walks on threads
and stops them through a shared signal.

Worker ``w`` of trial ``t`` uses seed ``base_seed + t * n_cores + w``, so the
seeds of one experiment never repeat.
"""
from __future__ import annotations

import csv
import io
import json
import os
import threading
import time
import warnings
from dataclasses import dataclass, field
from typing import Optional, Protocol

import numpy as np

from .cnf import CnfFormula
from .fit import CensoringWarning, DistModel
from .rtd import Rtd
from .sls import POLL_INTERVAL, AllCensoredError, SolverConfig, Walker


class Runner(Protocol):
    """Anything that yields one seeded sequential run.

    ``run(seed, cutoff)`` returns ``(solved, runtime)``; an unsolved run
    reports ``runtime == cutoff``.  Runtimes must not depend on ``cutoff``
    other than through truncation.
    """

    def run(self, seed: int, cutoff: float) -> tuple[bool, float]: ...


class FormulaRunner:
    """WalkSAT on a CNF formula, runtime in flips."""

    def __init__(self, formula: CnfFormula, noise: float):
        self.formula = formula
        self.noise = noise

    def run(self, seed, cutoff):
        w = Walker(self.formula, seed, self.noise)
        w.advance(int(cutoff))
        return w.solved, float(w.flips)


class ReplayRunner:
    """Synthetic solver replaying seeded draws from a runtime model."""

    def __init__(self, model: DistModel):
        self.model = model

    def run(self, seed, cutoff):
        t = float(self.model.sample(np.random.default_rng(seed)))
        if t > cutoff:
            return False, float(cutoff)
        return True, t


def as_runner(solver, config: SolverConfig) -> Runner:
    if isinstance(solver, CnfFormula):
        return FormulaRunner(solver, config.noise)
    if hasattr(solver, "run"):
        return solver
    raise TypeError(f"expected a CnfFormula or a runner, got {type(solver).__name__}")


def trial_seeds(base_seed: int, trial: int, n_cores: int) -> range:
    start = base_seed + trial * n_cores
    return range(start, start + n_cores)


def sequential_rtd(solver, config: SolverConfig, n_runs: int, base_seed: int) -> Rtd:
    """Flip-unit RTD of ``n_runs`` sequential runs, seeds ``base_seed + i``.

    Works for formulas and for any :class:`Runner`; unsolved runs are
    censored at ``config.max_flips``.
    """
    if n_runs < 2:
        raise ValueError("an RTD needs at least 2 runs")
    runner = as_runner(solver, config)
    out = [runner.run(base_seed + i, float(config.max_flips)) for i in range(n_runs)]
    solved = np.array([ok for ok, _ in out], dtype=bool)
    if not solved.any():
        raise AllCensoredError(f"all {n_runs} runs hit the cutoff")
    return Rtd([rt for _, rt in out], ~solved, "flips")


@dataclass(frozen=True)
class ParallelResult:
    n_cores: int
    trials: int
    runtimes: np.ndarray
    unit: str
    censored: np.ndarray = field(default=None)
    seq_mean: Optional[float] = None
    base_seed: Optional[int] = None
    mode: str = "logical"

    def __post_init__(self):
        rt = np.asarray(self.runtimes, dtype=float)
        object.__setattr__(self, "runtimes", rt)
        cens = (np.zeros(rt.size, dtype=bool) if self.censored is None
                else np.asarray(self.censored, dtype=bool))
        object.__setattr__(self, "censored", cens)
        if rt.size != self.trials:
            raise ValueError("one runtime per trial is required")
        if np.any(rt <= 0):
            raise ValueError("parallel runtimes must be positive")

    @property
    def mean_runtime(self) -> float:
        return float(np.mean(self.runtimes))

    @property
    def n_censored(self) -> int:
        return int(np.count_nonzero(self.censored))

    @property
    def empirical_speedup(self) -> Optional[float]:
        if self.seq_mean is None:
            return None
        return empirical_speedup(self.seq_mean, self)

    def with_seq_mean(self, seq_mean: float) -> "ParallelResult":
        return ParallelResult(self.n_cores, self.trials, self.runtimes, self.unit,
                              self.censored, seq_mean, self.base_seed, self.mode)

    def summary(self) -> dict:
        return {
            "n_cores": self.n_cores,
            "trials": self.trials,
            "unit": self.unit,
            "mode": self.mode,
            "base_seed": self.base_seed,
            "mean_runtime": self.mean_runtime,
            "n_censored": self.n_censored,
            "seq_mean": self.seq_mean,
            "empirical_speedup": self.empirical_speedup,
        }

    def csv_rows(self):
        for t, r in enumerate(self.runtimes):
            yield [t, self.n_cores, repr(float(r)), self.unit]


def results_to_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial", "n_cores", "runtime", "unit"])
    for res in results:
        w.writerows(res.csv_rows())
    return buf.getvalue()


def results_to_json(results) -> str:
    return json.dumps({"results": [r.summary() for r in results]}, indent=2)


def empirical_speedup(seq_mean: float, par: ParallelResult) -> float:
    """Sequential mean divided by the mean parallel runtime."""
    if not seq_mean > 0:
        raise ValueError("seq_mean must be positive")
    return seq_mean / par.mean_runtime


def simulate_logical(solver, config: SolverConfig, n_cores: int, trials: int,
                     base_seed: int, seq_mean: Optional[float] = None) -> ParallelResult:
    """Flip-count simulation of the first finisher among ``n_cores`` walks.

    ``solver`` is a :class:`CnfFormula` or a :class:`Runner`.  Each trial's
    runtime is the minimum over its walks.  Later walks are cut off at the
    best runtime found so far: runs are deterministic per seed, so this
    yields the same minimum as running every walk to the full cutoff.
    """
    if n_cores < 1:
        raise ValueError("n_cores must be >= 1")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    runner = as_runner(solver, config)
    runtimes = np.empty(trials)
    censored = np.zeros(trials, dtype=bool)
    for t in range(trials):
        best = float(config.max_flips)
        found = False
        for seed in trial_seeds(base_seed, t, n_cores):
            solved, rt = runner.run(seed, best)
            if solved and (not found or rt < best):
                best, found = rt, True
        runtimes[t] = best
        censored[t] = not found
    if censored.any():
        warnings.warn(f"{int(censored.sum())} of {trials} trials hit the cutoff; "
                      "their runtime is recorded at the cutoff", CensoringWarning,
                      stacklevel=2)
    return ParallelResult(n_cores, trials, runtimes, "flips", censored, seq_mean,
                          base_seed, "logical")


@dataclass
class _Race:
    stop: threading.Event
    lock: threading.Lock = field(default_factory=threading.Lock)
    winner: Optional[int] = None
    finish_time: Optional[float] = None
    flips: dict = field(default_factory=dict)


def walk_until_signal(walker: Walker, stop, max_flips: int,
                      poll_interval: int = POLL_INTERVAL) -> bool:
    """Advance ``walker`` in chunks, checking ``stop.is_set()`` before each.

    Returns True if the walk solved the formula.  At most ``poll_interval``
    flips happen after the signal becomes visible.
    """
    while walker.flips < max_flips and not walker.solved:
        if stop.is_set():
            return False
        walker.advance(min(poll_interval, max_flips - walker.flips))
    return walker.solved


def run_parallel_wallclock(formula: CnfFormula, config: SolverConfig, n_cores: int,
                           trials: int, base_seed: int = 0,
                           poll_interval: int = POLL_INTERVAL,
                           seq_mean: Optional[float] = None) -> ParallelResult:
    """Race ``n_cores`` walker threads per trial; record seconds to first solution.

    The numba kernel releases the GIL, so threads run truly in parallel up
    to the hardware limit.  A trial where no walk solves within
    ``config.max_flips`` (or ``config.max_seconds``) is censored at its
    elapsed time.
    """
    if n_cores < 1:
        raise ValueError("n_cores must be >= 1")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    avail = os.cpu_count() or 1
    if n_cores > avail:
        warnings.warn(f"{n_cores} walkers requested but only {avail} CPUs are "
                      "available; wall-clock speedup will be understated",
                      RuntimeWarning, stacklevel=2)
    runtimes = np.empty(trials)
    censored = np.zeros(trials, dtype=bool)
    for t in range(trials):
        seeds = list(trial_seeds(base_seed, t, n_cores))
        walkers = [Walker(formula, s, config.noise) for s in seeds]
        race = _Race(threading.Event())

        def work(i):
            w = walkers[i]
            if walk_until_signal(w, race.stop, config.max_flips, poll_interval):
                now = time.perf_counter()
                with race.lock:
                    if race.winner is None:
                        race.winner = i
                        race.finish_time = now
                race.stop.set()

        threads = [threading.Thread(target=work, args=(i,), daemon=True)
                   for i in range(n_cores)]
        t0 = time.perf_counter()
        timer = None
        if config.max_seconds is not None:
            timer = threading.Timer(config.max_seconds, race.stop.set)
            timer.start()
        for th in threads:
            th.start()
        for th in threads:
            th.join()
        end = time.perf_counter()
        if timer is not None:
            timer.cancel()
        if race.winner is None:
            runtimes[t] = max(end - t0, 1e-9)
            censored[t] = True
        else:
            runtimes[t] = max(race.finish_time - t0, 1e-9)
    if censored.any():
        warnings.warn(f"{int(censored.sum())} of {trials} trials found no solution",
                      CensoringWarning, stacklevel=2)
    return ParallelResult(n_cores, trials, runtimes, "seconds", censored, seq_mean,
                          base_seed, "wallclock")
