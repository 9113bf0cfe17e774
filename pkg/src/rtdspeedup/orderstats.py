"""Minimum of n i.i.d. runtimes: distribution, expectation and predicted speedup.

If one sequential run takes ``Y ~ F`` and n independent walks race until the
first one finishes, the parallel runtime is ``Z = min(X_1..X_n)`` with

    F_Z(x) = 1 - (1 - F(x))**n
    E[Z]   = n * integral t f(t) (1 - F(t))**(n-1) dt
    G(n)   = E[Y] / E[Z]

Exponential families have closed forms; the lognormal expectation is
integrated numerically.  ``(1 - F)**(n-1)`` is always evaluated as
``exp((n-1) * logsf)`` so that n in the millions does not underflow.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from .fit import DistModel, Lognormal, model_from_dict, model_to_dict
from .quadrature import adaptive_gauss_legendre
from .rtd import Rtd

QUAD_RTOL = 1e-8
LOGNORMAL_U_RANGE = 12.0
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
# survival^n levels e^-k used to place quadrature breakpoints near the mass of Z
_MASS_LEVELS = (1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0)
_TAIL_LEVEL = 64.0


def _check_n(n) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"core count must be an integer >= 1, got {n!r}")
    return int(n)


def _is_exponential(m) -> bool:
    return m.family in ("exp", "shifted-exp")


def min_cdf(m: DistModel, n: int, x):
    """CDF of the minimum of n independent draws from ``m``."""
    n = _check_n(n)
    if n == 1:
        out = m.cdf(x)
    else:
        out = -np.expm1(n * m.logsf(x))
    return float(out) if np.ndim(out) == 0 else out


def min_pdf(m: DistModel, n: int, x):
    n = _check_n(n)
    with np.errstate(invalid="ignore"):
        out = n * np.exp(m.logpdf(x) + (n - 1) * m.logsf(x))
    out = np.nan_to_num(out, nan=0.0)
    return float(out) if np.ndim(out) == 0 else out


def _isf(m: DistModel, s):
    """Inverse survival function, accurate for survival close to 0."""
    s = np.asarray(s, dtype=float)
    if _is_exponential(m):
        return m.x0 - np.log(s) / m.lam
    return np.exp(m.mu - m.sigma * special.ndtri(s))


def _expected_min_generic(m: DistModel, n: int, rtol: float) -> float:
    lo = m.support_min
    hi = float(_isf(m, math.exp(-_TAIL_LEVEL / n)))
    bps = sorted(float(_isf(m, math.exp(-k / n))) for k in _MASS_LEVELS)
    # heavy tails span many decades between mass levels; split those per decade
    # so no single panel hides a narrow peak from the error estimate
    extra = []
    for a, b in zip(bps, bps[1:] + [hi]):
        if a > 0 and b / a > 10.0:
            extra.extend(np.geomspace(a, b, int(math.ceil(math.log10(b / a))) + 1)[1:-1])
    bps.extend(float(e) for e in extra)

    def integrand(t):
        with np.errstate(divide="ignore", invalid="ignore"):
            v = n * t * np.exp(m.logpdf(t) + (n - 1) * m.logsf(t))
        return np.nan_to_num(v, nan=0.0, posinf=0.0)

    value, _ = adaptive_gauss_legendre(integrand, lo, hi, rtol=rtol, breakpoints=bps)
    return value


def _expected_min_lognormal(m: Lognormal, n: int, rtol: float) -> float:
    # t = exp(mu + sigma u): E[Z] = n * int exp(mu + sigma u) phi(u) Phi(-u)^(n-1) du
    lo = -LOGNORMAL_U_RANGE
    # the n = 1 integrand peaks at u = sigma, so widen the upper end by sigma
    hi = LOGNORMAL_U_RANGE + m.sigma
    log_n = math.log(n)
    bps = [float(special.ndtri(-math.expm1(-k / n))) for k in _MASS_LEVELS]
    bps.append(m.sigma)

    def integrand(u):
        return np.exp(log_n + m.mu + m.sigma * u - 0.5 * u * u - _LOG_SQRT_2PI
                      + (n - 1) * special.log_ndtr(-u))

    value, _ = adaptive_gauss_legendre(integrand, lo, hi, rtol=rtol,
                                       breakpoints=[b for b in bps if np.isfinite(b)])
    return value


def expected_min(m: DistModel, n: int, method: str = "auto", rtol: float = QUAD_RTOL) -> float:
    """Expected parallel runtime E[Z] on n cores.

    ``method="auto"`` uses the closed form ``x0 + 1/(n lam)`` for exponential
    families and Gauss-Legendre quadrature for the lognormal.
    ``method="quadrature"`` forces the generic numerical integral for any
    model.  Raises :class:`~rtdspeedup.quadrature.QuadratureError` if the
    integral does not reach ``rtol``.
    """
    n = _check_n(n)
    if method not in ("auto", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        if n == 1:
            return m.mean()
        if _is_exponential(m):
            return m.x0 + 1.0 / (n * m.lam)
        return _expected_min_lognormal(m, n, rtol)
    return _expected_min_generic(m, n, rtol)


def predicted_speedup(m: DistModel, n: int, method: str = "auto") -> float:
    return m.mean() / expected_min(m, n, method)


@dataclass(frozen=True)
class SpeedupLimit:
    """Limit of G(n) as n grows; ``value`` is ``math.inf`` when unbounded.

    ``kind`` is ``"closed-form"`` for exponential families.  For the lognormal
    it is ``"numerical"``: G is evaluated at n = 2**k up to ``probe_n`` and
    extrapolated only if its increments contract geometrically.  A plain
    lognormal has support reaching 0, and its increments keep growing, so
    this ends up reported as unbounded, with ``probe_speedup`` as a lower bound.
    """

    value: float
    kind: str
    probe_n: int | None = None
    probe_speedup: float | None = None

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    def to_dict(self) -> dict:
        d = {"value": self.value if self.finite else "infinite", "kind": self.kind}
        if self.probe_n is not None:
            d["probe_n"] = self.probe_n
            d["probe_speedup"] = self.probe_speedup
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SpeedupLimit":
        v = d["value"]
        return cls(math.inf if v == "infinite" else float(v), d["kind"],
                   d.get("probe_n"), d.get("probe_speedup"))


def speedup_limit(m: DistModel, max_log2_n: int = 20) -> SpeedupLimit:
    if _is_exponential(m):
        if m.x0 == 0:
            return SpeedupLimit(math.inf, "closed-form")
        return SpeedupLimit(1.0 + 1.0 / (m.x0 * m.lam), "closed-form")
    g = np.array([predicted_speedup(m, 2 ** k) for k in range(max_log2_n + 1)])
    d = np.diff(g)
    ratios = d[1:] / d[:-1]
    tail = ratios[-4:]
    probe_n, probe_g = 2 ** max_log2_n, float(g[-1])
    if np.all(tail < 1.0):
        r = float(tail[-1])
        return SpeedupLimit(probe_g + float(d[-1]) * r / (1.0 - r), "numerical",
                            probe_n, probe_g)
    return SpeedupLimit(math.inf, "numerical", probe_n, probe_g)


def empirical_expected_min(rtd: Rtd, n: int, trials: int, seed: int,
                           chunk_elems: int = 1 << 22) -> float:
    """Bootstrap estimate of E[min of n runs] by resampling the RTD."""
    n = _check_n(n)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    x = rtd.samples
    rows = max(1, chunk_elems // n)
    total = 0.0
    done = 0
    while done < trials:
        c = min(rows, trials - done)
        idx = rng.integers(0, x.size, size=(c, n))
        # samples are sorted, so the smallest index is the smallest runtime
        total += float(x[idx.min(axis=1)].sum())
        done += c
    return total / trials


@dataclass(frozen=True)
class SpeedupPoint:
    n: int
    expected_runtime: float
    speedup: float


@dataclass(frozen=True)
class SpeedupCurve:
    model: DistModel
    points: tuple[SpeedupPoint, ...]
    limit: SpeedupLimit
    base_mean: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "expected_runtime", "speedup"])
        for p in self.points:
            w.writerow([p.n, repr(p.expected_runtime), repr(p.speedup)])
        return buf.getvalue()

    def header(self) -> dict:
        return {"model": model_to_dict(self.model), "limit": self.limit.to_dict(),
                "base_mean": self.base_mean}

    def to_dict(self) -> dict:
        d = self.header()
        d["points"] = [{"n": p.n, "expected_runtime": p.expected_runtime,
                        "speedup": p.speedup} for p in self.points]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "SpeedupCurve":
        pts = tuple(SpeedupPoint(int(p["n"]), float(p["expected_runtime"]),
                                 float(p["speedup"])) for p in d["points"])
        return cls(model_from_dict(d["model"]), pts, SpeedupLimit.from_dict(d["limit"]),
                   float(d["base_mean"]))


def speedup_curve(m: DistModel, core_counts: Sequence[int], method: str = "auto") -> SpeedupCurve:
    if len(core_counts) == 0:
        raise ValueError("core_counts must be nonempty")
    base = m.mean()
    pts = []
    for n in core_counts:
        n = _check_n(n)
        ez = expected_min(m, n, method)
        pts.append(SpeedupPoint(n, ez, base / ez))
    return SpeedupCurve(m, tuple(pts), speedup_limit(m), base)
