"""Empirical runtime distributions (RTDs) and the runtime log format.

The runtime log is a CSV with header ``run_id,seed,status,flips,seconds``,
one row per sequential run; ``status`` is ``solved`` or ``cutoff``.  The
``seconds`` field may be blank when timing was not recorded.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

UNITS = ("flips", "seconds")
LOG_FIELDS = ("run_id", "seed", "status", "flips", "seconds")


class RtdError(ValueError):
    pass


class Rtd:
    """Sorted runtime samples with right-censoring flags.

    Censored samples sit at the cutoff value and are the largest samples.
    Instances are immutable; the arrays are exposed read-only.
    """

    __slots__ = ("samples", "censored", "unit")

    def __init__(self, samples, censored=None, unit: str = "flips"):
        x = np.asarray(samples, dtype=float)
        if x.ndim != 1 or x.size < 2:
            raise RtdError("an RTD needs at least 2 samples")
        if not np.all(np.isfinite(x)):
            raise RtdError("RTD samples must be finite")
        if np.any(x <= 0):
            raise RtdError(
                "RTD samples must be positive; zero runtimes break log-based fits "
                "(use flip counts on a nontrivial formula)"
            )
        if unit not in UNITS:
            raise RtdError(f"unit must be one of {UNITS}, got {unit!r}")
        cens = (np.zeros(x.size, dtype=bool) if censored is None
                else np.asarray(censored, dtype=bool))
        if cens.shape != x.shape:
            raise RtdError("censored flags must match samples")
        order = np.lexsort((cens, x))
        x, cens = x[order], cens[order]
        if cens.any():
            cut = x[cens]
            if np.any(cut != cut[0]):
                raise RtdError("censored samples must share one cutoff value")
            if np.any(x[~cens] > cut[0]):
                raise RtdError("censored samples must be the largest samples")
        x.flags.writeable = False
        cens.flags.writeable = False
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "censored", cens)
        object.__setattr__(self, "unit", unit)

    def __setattr__(self, name, value):
        raise AttributeError("Rtd is immutable")

    def __len__(self):
        return self.samples.size

    def __repr__(self):
        return (f"Rtd(n={self.n}, n_censored={self.n_censored}, unit={self.unit!r}, "
                f"min={self.samples[0]:g}, max={self.samples[-1]:g})")

    def __eq__(self, other):
        if not isinstance(other, Rtd):
            return NotImplemented
        return (self.unit == other.unit
                and np.array_equal(self.samples, other.samples)
                and np.array_equal(self.censored, other.censored))

    @property
    def n(self) -> int:
        return int(self.samples.size)

    @property
    def n_censored(self) -> int:
        return int(np.count_nonzero(self.censored))

    @property
    def uncensored(self) -> np.ndarray:
        return self.samples[~self.censored]

    @property
    def cutoff(self) -> Optional[float]:
        return float(self.samples[-1]) if self.censored.any() else None


@dataclass(frozen=True)
class RtdSummary:
    min: float
    max: float
    mean: float
    median: float
    n: int
    n_censored: int

    def to_dict(self):
        return dict(min=self.min, max=self.max, mean=self.mean, median=self.median,
                    n=self.n, n_censored=self.n_censored)


def ecdf(rtd: Rtd, x):
    """Fraction of samples <= x (right-continuous; censoring ignored)."""
    counts = np.searchsorted(rtd.samples, x, side="right")
    out = counts / rtd.n
    return float(out) if np.ndim(out) == 0 else out


def summary(rtd: Rtd) -> RtdSummary:
    """Min, max, mean and median; censored runs count at the cutoff value."""
    x = rtd.samples
    return RtdSummary(min=float(x[0]), max=float(x[-1]), mean=float(np.mean(x)),
                      median=float(np.median(x)), n=rtd.n, n_censored=rtd.n_censored)


def quantile(rtd: Rtd, q: float) -> float:
    """Lower quantile: the smallest sample s with ecdf(s) >= q."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    levels = np.arange(1, rtd.n + 1) / rtd.n
    i = int(np.searchsorted(levels, q, side="left"))
    return float(rtd.samples[min(i, rtd.n - 1)])


# --- runtime log -----------------------------------------------------------

@dataclass(frozen=True)
class LogRow:
    run_id: int
    seed: int
    status: str
    flips: int
    seconds: Optional[float]

    @property
    def solved(self) -> bool:
        return self.status == "solved"


def _status_str(status) -> str:
    return getattr(status, "value", status)


def rtd_from_runs(runs: Iterable, unit: str = "flips") -> Rtd:
    """Build an RTD from run outcomes or log rows.

    Each run needs ``status``, ``flips`` and ``seconds``.  In seconds mode the
    cutoff runs are placed at the largest observed time so the censored block
    stays on top.
    """
    runs = list(runs)
    if unit not in UNITS:
        raise RtdError(f"unit must be one of {UNITS}, got {unit!r}")
    solved = np.array([_status_str(r.status) == "solved" for r in runs], dtype=bool)
    if unit == "flips":
        values = np.array([r.flips for r in runs], dtype=float)
    else:
        if any(r.seconds is None for r in runs):
            raise RtdError("runtime log has no seconds column values")
        values = np.array([r.seconds for r in runs], dtype=float)
    censored = ~solved
    if censored.any():
        if unit == "flips":
            cut = values[censored].max()
        else:
            cut = values.max()
        values = values.copy()
        values[censored] = cut
    return Rtd(values, censored, unit)


def write_runtime_log(runs: Sequence, fh, with_seconds: bool = True) -> None:
    """Write one CSV row per run; ``fh`` is a text stream."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(LOG_FIELDS)
    for i, r in enumerate(runs):
        secs = "" if (not with_seconds or r.seconds is None) else f"{r.seconds:.6f}"
        w.writerow([getattr(r, "run_id", i), r.seed, _status_str(r.status), r.flips, secs])


def read_runtime_log(fh) -> list[LogRow]:
    reader = csv.DictReader(fh)
    if reader.fieldnames is None or tuple(reader.fieldnames) != LOG_FIELDS:
        raise RtdError(f"runtime log header must be {','.join(LOG_FIELDS)}")
    rows = []
    for line, rec in enumerate(reader, start=2):
        status = rec["status"].strip()
        if status not in ("solved", "cutoff"):
            raise RtdError(f"line {line}: unknown status {status!r}")
        try:
            secs = rec["seconds"].strip()
            rows.append(LogRow(int(rec["run_id"]), int(rec["seed"]), status,
                               int(rec["flips"]), float(secs) if secs else None))
        except ValueError as exc:
            raise RtdError(f"line {line}: {exc}") from None
    return rows


def load_rtd(path, unit: str = "flips") -> Rtd:
    with open(path, newline="") as fh:
        return rtd_from_runs(read_runtime_log(fh), unit)


def ecdf_table(rtd: Rtd) -> str:
    """CSV of ``x,F`` at each distinct sample point."""
    xs = np.unique(rtd.samples)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "F"])
    for x, f in zip(xs, ecdf(rtd, xs)):
        w.writerow([repr(float(x)), repr(float(f))])
    return buf.getvalue()
